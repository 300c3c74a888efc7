#include "dccycle/checkpoint.hpp"

#include "dccycle/config.hpp"
#include "json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <type_traits>

namespace dccycle {

namespace {

template <typename Scalar>
constexpr const char* scalar_tag() {
  return std::is_same_v<Scalar, float> ? "f32" : "f64";
}

template <typename Scalar>
void write_array(std::ostream& out, const Scalar* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(Scalar)));
}

template <typename Scalar>
void read_array(std::istream& in, Scalar* data, std::size_t count, const std::string& path) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(Scalar)));
  if (!in) throw std::runtime_error(path + ": truncated checkpoint");
}

json read_metadata(std::istream& in, const std::string& path) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kCheckpointMagic) {
    throw std::runtime_error(path + ": not a " + std::string(kCheckpointMagic) + " checkpoint");
  }
  std::string length_line;
  if (!std::getline(in, length_line)) throw std::runtime_error(path + ": truncated checkpoint header");
  const std::size_t length = std::stoull(length_line);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw std::runtime_error(path + ": truncated checkpoint metadata");
  return json::parse(text);
}

CheckpointInfo info_from_json(const json& meta) {
  CheckpointInfo info;
  info.scalar = meta.at("scalar").get<std::string>();
  info.model = model_config_from_json(meta.at("model"));
  info.train = train_config_from_json(meta.at("train"));
  info.counters = counters_from_json(meta.at("counters"));
  info.seed = meta.at("seed").get<std::uint64_t>();
  info.config_text = meta.at("config_text").get<std::string>();
  info.config_hash = meta.at("config_hash").get<std::string>();
  return info;
}

}  // namespace

template <typename Scalar>
void save_checkpoint(const std::string& path, const TrainState<Scalar>& state, const ModelConfig& model,
                     const TrainConfig& train, const std::string& config_text) {
  const std::pair<const char*, const Network<Scalar>*> nets[] = {
      {"G", &state.models.g}, {"F", &state.models.f}, {"D_X", &state.models.dx}, {"D_Y", &state.models.dy}};
  const AdamMoments<Scalar>* moments[] = {&state.adam_g, &state.adam_f, &state.adam_dx, &state.adam_dy};

  json blobs = json::array();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto count = static_cast<std::size_t>(nets[i].second->parameter_count());
    blobs.push_back({{"name", std::string(nets[i].first) + ".parameters"}, {"count", count}});
    blobs.push_back({{"name", std::string(nets[i].first) + ".adam_m"}, {"count", count}});
    blobs.push_back({{"name", std::string(nets[i].first) + ".adam_v"}, {"count", count}});
  }
  for (const Image<Scalar>& image : state.pool_x) {
    blobs.push_back({{"name", "pool_x." + image.id()}, {"count", static_cast<std::size_t>(image.pixels().size())}});
  }
  for (const Image<Scalar>& image : state.pool_y) {
    blobs.push_back({{"name", "pool_y." + image.id()}, {"count", static_cast<std::size_t>(image.pixels().size())}});
  }

  std::ostringstream rng_state;
  rng_state << state.rng;
  const json meta = {{"scalar", scalar_tag<Scalar>()},
                     {"model", to_json(model)},
                     {"train", to_json(train)},
                     {"counters", to_json(state.counters)},
                     {"seed", state.seed},
                     {"rng", rng_state.str()},
                     {"config_text", config_text},
                     {"config_hash", content_hash(config_text)},
                     {"pool_sizes", {state.pool_x.size(), state.pool_y.size()}},
                     {"blobs", blobs}};
  const std::string text = meta.dump();

  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    out << kCheckpointMagic << '\n' << text.size() << '\n' << text;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto count = static_cast<std::size_t>(nets[i].second->parameter_count());
      write_array(out, nets[i].second->parameters().data(), count);
      write_array(out, moments[i]->m.data(), count);
      write_array(out, moments[i]->v.data(), count);
    }
    for (const auto* pool : {&state.pool_x, &state.pool_y}) {
      for (const Image<Scalar>& image : *pool) {
        write_array(out, image.pixels().data(), static_cast<std::size_t>(image.pixels().size()));
      }
    }
    if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
  }
  std::rename(temp.c_str(), path.c_str());
}

CheckpointInfo read_checkpoint_info(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return info_from_json(read_metadata(in, path));
}

template <typename Scalar>
TrainState<Scalar> load_checkpoint(const std::string& path, CheckpointInfo* info_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  const json meta = read_metadata(in, path);
  const CheckpointInfo info = info_from_json(meta);
  if (info.scalar != scalar_tag<Scalar>()) {
    throw std::runtime_error(path + ": checkpoint precision " + info.scalar + " does not match requested " +
                             scalar_tag<Scalar>());
  }

  TrainConfig train = info.train;
  train.seed = info.seed;
  TrainState<Scalar> state = initialize_state<Scalar>(info.model, train);
  Network<Scalar>* nets[] = {&state.models.g, &state.models.f, &state.models.dx, &state.models.dy};
  AdamMoments<Scalar>* moments[] = {&state.adam_g, &state.adam_f, &state.adam_dx, &state.adam_dy};
  const json& blobs = meta.at("blobs");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto count = static_cast<std::size_t>(nets[i]->parameter_count());
    for (std::size_t b = 0; b < 3; ++b) {
      if (blobs.at(3 * i + b).at("count").get<std::size_t>() != count) {
        throw std::runtime_error(path + ": parameter count mismatch in " + blobs.at(3 * i + b).at("name").get<std::string>());
      }
    }
    read_array(in, nets[i]->parameters().data(), count, path);
    read_array(in, moments[i]->m.data(), count, path);
    read_array(in, moments[i]->v.data(), count, path);
  }

  const auto pool_sizes = meta.at("pool_sizes").get<std::vector<std::size_t>>();
  const Index side = info.model.generator.input_size;
  std::size_t blob_index = 12;
  for (std::size_t which = 0; which < 2; ++which) {
    auto& pool = which == 0 ? state.pool_x : state.pool_y;
    for (std::size_t k = 0; k < pool_sizes.at(which); ++k, ++blob_index) {
      Grid<Scalar> pixels(side, side);
      read_array(in, pixels.data(), static_cast<std::size_t>(pixels.size()), path);
      const std::string name = blobs.at(blob_index).at("name").get<std::string>();
      pool.emplace_back(std::move(pixels), ValueRange::model, which == 0 ? Domain::x : Domain::y,
                        name.substr(name.find('.') + 1));
    }
  }

  std::istringstream rng_state(meta.at("rng").get<std::string>());
  rng_state >> state.rng;
  state.counters = info.counters;
  state.seed = info.seed;
  if (info_out != nullptr) *info_out = info;
  return state;
}

template void save_checkpoint(const std::string&, const TrainState<float>&, const ModelConfig&, const TrainConfig&,
                              const std::string&);
template void save_checkpoint(const std::string&, const TrainState<double>&, const ModelConfig&, const TrainConfig&,
                              const std::string&);
template TrainState<float> load_checkpoint<float>(const std::string&, CheckpointInfo*);
template TrainState<double> load_checkpoint<double>(const std::string&, CheckpointInfo*);

}  // namespace dccycle
