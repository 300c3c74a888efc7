#include "dccycle/data.hpp"

#include "dccycle/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dccycle {

namespace fs = std::filesystem;

const char* to_string(Direction direction) { return direction == Direction::x_to_y ? "a2b" : "b2a"; }

Direction parse_direction(std::string_view text) {
  if (text == "a2b" || text == "x_to_y") return Direction::x_to_y;
  if (text == "b2a" || text == "y_to_x") return Direction::y_to_x;
  throw std::invalid_argument("unknown direction '" + std::string(text) + "' (expected a2b or b2a)");
}

Index UnpairedDataset::image_size() const {
  if (!domain_x.empty()) return domain_x.front().height();
  if (!domain_y.empty()) return domain_y.front().height();
  return 0;
}

bool UnpairedDataset::fully_paired() const {
  if (domain_x.size() != domain_y.size() || pairs.size() != domain_x.size()) return false;
  std::vector<bool> seen_x(domain_x.size(), false), seen_y(domain_y.size(), false);
  for (const auto& [xi, yi] : pairs) {
    if (xi >= seen_x.size() || yi >= seen_y.size() || seen_x[xi] || seen_y[yi]) return false;
    seen_x[xi] = seen_y[yi] = true;
  }
  return true;
}

double normalize_level8(int level) { return 2.0 * (static_cast<double>(level) / 255.0) - 1.0; }

Grid<double> export_levels(const Image<double>& image) { return quantize8(image.to_metric().pixels()) / 255.0; }

namespace {

Image<double> load_image(const fs::path& path, Index target_size, Domain domain) {
  Grid<double> metric = read_png(path.string());
  metric = resize_bilinear(metric, target_size, target_size);
  return Image<double>(metric_to_model(metric), ValueRange::model, domain, path.stem().string());
}

std::vector<fs::path> list_pngs(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("image directory '" + dir + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void require_target_size(Index target_size) {
  if (target_size <= 0 || target_size % 4 != 0) {
    throw std::invalid_argument("target_size " + std::to_string(target_size) + " must be a positive multiple of 4");
  }
}

}  // namespace

UnpairedDataset ingest(const std::string& dir_x, const std::string& dir_y, Index target_size) {
  require_target_size(target_size);
  UnpairedDataset dataset;
  for (const fs::path& p : list_pngs(dir_x)) dataset.domain_x.push_back(load_image(p, target_size, Domain::x));
  for (const fs::path& p : list_pngs(dir_y)) dataset.domain_y.push_back(load_image(p, target_size, Domain::y));
  if (dataset.domain_x.empty()) throw std::runtime_error("domain X directory '" + dir_x + "' has no PNG images");
  if (dataset.domain_y.empty()) throw std::runtime_error("domain Y directory '" + dir_y + "' has no PNG images");

  std::map<std::string, std::size_t> y_by_id;
  for (std::size_t j = 0; j < dataset.domain_y.size(); ++j) y_by_id[dataset.domain_y[j].id()] = j;
  for (std::size_t i = 0; i < dataset.domain_x.size(); ++i) {
    const auto it = y_by_id.find(dataset.domain_x[i].id());
    if (it != y_by_id.end()) dataset.pairs.emplace_back(i, it->second);
  }
  return dataset;
}

UnpairedDataset ingest_manifest(const std::string& manifest_path, Index target_size) {
  require_target_size(target_size);
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot read manifest '" + manifest_path + "'");
  const fs::path base = fs::path(manifest_path).parent_path();
  std::string line;
  if (!std::getline(in, line) || line.rfind("file,domain,pair_id", 0) != 0) {
    throw std::runtime_error(manifest_path + ": expected header 'file,domain,pair_id'");
  }
  UnpairedDataset dataset;
  std::map<std::string, std::size_t> x_pair, y_pair;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string file, domain, pair_id;
    std::getline(ss, file, ',');
    std::getline(ss, domain, ',');
    std::getline(ss, pair_id, ',');
    const fs::path path = base / file;
    if (domain == "x") {
      if (!pair_id.empty()) x_pair[pair_id] = dataset.domain_x.size();
      dataset.domain_x.push_back(load_image(path, target_size, Domain::x));
    } else if (domain == "y") {
      if (!pair_id.empty()) y_pair[pair_id] = dataset.domain_y.size();
      dataset.domain_y.push_back(load_image(path, target_size, Domain::y));
    } else {
      throw std::runtime_error(manifest_path + ":" + std::to_string(line_no) + ": unknown domain '" + domain + "'");
    }
  }
  if (dataset.domain_x.empty()) throw std::runtime_error(manifest_path + ": domain x is empty");
  if (dataset.domain_y.empty()) throw std::runtime_error(manifest_path + ": domain y is empty");
  for (const auto& [id, xi] : x_pair) {
    const auto it = y_pair.find(id);
    if (it != y_pair.end()) dataset.pairs.emplace_back(xi, it->second);
  }
  return dataset;
}

DatasetSplit split(const UnpairedDataset& dataset, std::uint64_t seed) {
  if (!(dataset.train_fraction > 0.0 && dataset.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0,1)");
  }
  if (dataset.domain_x.size() < 2) throw std::invalid_argument("domain X needs at least 2 images to split");
  if (dataset.domain_y.size() < 2) throw std::invalid_argument("domain Y needs at least 2 images to split");

  auto train_count = [&](std::size_t n) {
    // The epsilon absorbs representation error in e.g. 0.9 * 10.
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * dataset.train_fraction + 1e-9));
  };
  std::mt19937_64 rng(seed);
  DatasetSplit result;
  result.train.dataset = result.test.dataset = &dataset;

  if (dataset.fully_paired()) {
    std::vector<std::size_t> order(dataset.pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = train_count(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      DatasetView& view = k < n_train ? result.train : result.test;
      view.x_indices.push_back(dataset.pairs[order[k]].first);
      view.y_indices.push_back(dataset.pairs[order[k]].second);
    }
    return result;
  }

  auto split_domain = [&](std::size_t n, std::vector<std::size_t>& train, std::vector<std::size_t>& test) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = train_count(n);
    train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  };
  split_domain(dataset.domain_x.size(), result.train.x_indices, result.test.x_indices);
  split_domain(dataset.domain_y.size(), result.train.y_indices, result.test.y_indices);
  return result;
}

template <typename Scalar>
TrainingBatch<Scalar> next_batch(const DatasetView& train, std::mt19937_64& rng) {
  if (train.x_indices.empty() || train.y_indices.empty()) {
    throw std::invalid_argument("next_batch: training pools must be nonempty");
  }
  std::uniform_int_distribution<std::size_t> pick_x(0, train.x_indices.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_y(0, train.y_indices.size() - 1);
  const std::size_t xi = pick_x(rng);
  const std::size_t yi = pick_y(rng);
  const std::size_t xn = pick_x(rng);
  const std::size_t yn = pick_y(rng);
  return {train.x(xi).cast<Scalar>(), train.y(yi).cast<Scalar>(), train.x(xn).cast<Scalar>(),
          train.y(yn).cast<Scalar>()};
}

std::size_t paired_target(const UnpairedDataset& dataset, Direction direction, std::size_t source_index) {
  for (const auto& [xi, yi] : dataset.pairs) {
    if (direction == Direction::x_to_y && xi == source_index) return yi;
    if (direction == Direction::y_to_x && yi == source_index) return xi;
  }
  return static_cast<std::size_t>(-1);
}

template <typename Scalar>
std::vector<SyntheticImage> synthesize_test_set(const Network<Scalar>& generator, const DatasetView& test,
                                                Direction direction) {
  const auto& indices = direction == Direction::x_to_y ? test.x_indices : test.y_indices;
  const auto& pool = direction == Direction::x_to_y ? test.dataset->domain_x : test.dataset->domain_y;
  std::vector<SyntheticImage> out;
  out.reserve(indices.size());
  for (std::size_t index : indices) {
    const Image<double>& source = pool[index];
    const Image<Scalar> translated = generator.translate(source.cast<Scalar>());
    out.push_back({source.id(), index,
                   Image<double>(translated.pixels().template cast<double>(), ValueRange::model,
                                 direction == Direction::x_to_y ? Domain::y : Domain::x, source.id())});
  }
  std::sort(out.begin(), out.end(), [](const SyntheticImage& a, const SyntheticImage& b) { return a.id < b.id; });
  return out;
}

template TrainingBatch<float> next_batch<float>(const DatasetView&, std::mt19937_64&);
template TrainingBatch<double> next_batch<double>(const DatasetView&, std::mt19937_64&);
template std::vector<SyntheticImage> synthesize_test_set(const Network<float>&, const DatasetView&, Direction);
template std::vector<SyntheticImage> synthesize_test_set(const Network<double>&, const DatasetView&, Direction);

}  // namespace dccycle
