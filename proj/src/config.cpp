#include "dccycle/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef DCCYCLE_CODE_VERSION
#define DCCYCLE_CODE_VERSION "unknown"
#endif

namespace dccycle {

namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

long long parse_int(std::string_view key, std::string_view value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(std::string(key), "expected an integer, got '" + std::string(value) + "'");
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(std::string(key), "expected a nonnegative integer, got '" + std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string text(value);
    const double out = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw ConfigError(std::string(key), "expected a number, got '" + std::string(value) + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(value) + "'");
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> items;
  std::stringstream ss{std::string(value)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string format_real(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace

RunConfig RunConfig::toy() {
  RunConfig config;
  config.model = ModelConfig::toy();
  config.train.epochs = 30;
  config.data.toy_count = 50;
  config.data.train_fraction = 0.8;
  config.resolve();
  return config;
}

RunConfig RunConfig::full() {
  RunConfig config;
  config.model = ModelConfig::full();
  config.train.epochs = 200;
  config.data.train_fraction = 0.9;
  config.data.toy_count = 100;
  config.resolve();
  return config;
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  const std::string k(key);
  auto positive = [&](long long v) {
    if (v <= 0) throw ConfigError(k, "must be positive");
    return v;
  };
  if (k == "preset") {
    if (value == "toy") {
      *this = toy();
    } else if (value == "full") {
      *this = full();
    } else {
      throw ConfigError(k, "unknown preset '" + value + "' (expected toy or full)");
    }
  } else if (k == "data_source") {
    if (value != "toy" && value != "dir" && value != "manifest") throw ConfigError(k, "expected toy, dir or manifest");
    data.source = value;
  } else if (k == "data_path") {
    data.path = value;
  } else if (k == "toy_count") {
    data.toy_count = static_cast<std::size_t>(positive(parse_int(k, value)));
  } else if (k == "toy_gamma") {
    data.toy_gamma = parse_real(k, value);
  } else if (k == "toy_seed") {
    data.toy_seed = parse_uint(k, value);
  } else if (k == "train_fraction") {
    data.train_fraction = parse_real(k, value);
  } else if (k == "image_size") {
    model.generator.input_size = positive(parse_int(k, value));
    model.discriminator.input_size = model.generator.input_size;
  } else if (k == "gen_base_channels") {
    model.generator.base_channels = positive(parse_int(k, value));
  } else if (k == "gen_residual_blocks") {
    model.generator.n_residual_blocks = static_cast<int>(parse_int(k, value));
  } else if (k == "gen_downsample") {
    model.generator.downsample_stages = static_cast<int>(parse_int(k, value));
  } else if (k == "disc_base_channels") {
    model.discriminator.base_channels = positive(parse_int(k, value));
  } else if (k == "disc_downsample") {
    model.discriminator.downsample_stages = static_cast<int>(parse_int(k, value));
  } else if (k == "epochs") {
    train.epochs = static_cast<int>(parse_int(k, value));
  } else if (k == "batch_size") {
    train.batch_size = static_cast<int>(parse_int(k, value));
  } else if (k == "g_steps_per_d_step") {
    train.g_steps_per_d_step = static_cast<int>(parse_int(k, value));
  } else if (k == "learning_rate") {
    train.learning_rate = parse_real(k, value);
  } else if (k == "adam_beta1") {
    train.adam_beta1 = parse_real(k, value);
  } else if (k == "adam_beta2") {
    train.adam_beta2 = parse_real(k, value);
  } else if (k == "lr_decay") {
    train.lr_decay = parse_bool(k, value);
  } else if (k == "seed") {
    train.seed = parse_uint(k, value);
  } else if (k == "checkpoint_every") {
    train.checkpoint_every = static_cast<int>(parse_int(k, value));
  } else if (k == "replay_pool") {
    train.replay_pool = parse_bool(k, value);
  } else if (k == "replay_pool_size") {
    train.replay_pool_size = static_cast<int>(positive(parse_int(k, value)));
  } else if (k == "loss_family") {
    try {
      train.loss.family = parse_loss_family(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(k, e.what());
    }
  } else if (k == "dual_contrast") {
    train.loss.dual_contrast = parse_bool(k, value);
  } else if (k == "lambda") {
    train.loss.lambda = parse_real(k, value);
  } else if (k == "beta") {
    train.loss.beta = parse_real(k, value);
  } else if (k == "ssim_window") {
    ssim.window_size = static_cast<int>(parse_int(k, value));
  } else if (k == "ssim_sigma") {
    ssim.window_sigma = parse_real(k, value);
  } else if (k == "ssim_k1") {
    ssim.k1 = parse_real(k, value);
  } else if (k == "ssim_k2") {
    ssim.k2 = parse_real(k, value);
  } else if (k == "precision") {
    if (value != "f32" && value != "f64") throw ConfigError(k, "expected f32 or f64");
    precision = value;
  } else if (k == "plan_name") {
    if (value.empty() || value.find_first_of("/\\") != std::string::npos) throw ConfigError(k, "invalid plan name");
    plan_name = value;
  } else if (k == "repeat_seeds") {
    repeat_seeds.clear();
    for (const std::string& item : split_list(value)) repeat_seeds.push_back(parse_uint(k, item));
    if (repeat_seeds.empty()) throw ConfigError(k, "needs at least one seed");
  } else if (k == "beta_grid") {
    beta_grid.clear();
    for (const std::string& item : split_list(value)) beta_grid.push_back(parse_real(k, item));
    if (beta_grid.empty()) throw ConfigError(k, "needs at least one value");
  } else {
    throw ConfigError(k, "unknown key");
  }
}

void RunConfig::resolve() {
  model.discriminator.input_size = model.generator.input_size;
  model.discriminator.output_activation = output_activation_for(train.loss.family);
  auto check = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  };
  check("image_size", [&] { model.generator.validate(); });
  check("disc_downsample", [&] { model.discriminator.validate(); });
  check("training", [&] { train.validate(); });
  check("ssim_window", [&] { ssim.validate(); });
  if (!(data.train_fraction > 0 && data.train_fraction < 1)) throw ConfigError("train_fraction", "must lie in (0,1)");
  if (data.source != "toy" && data.path.empty()) throw ConfigError("data_path", "required for data_source " + data.source);
  for (double b : beta_grid) {
    if (!(b >= 0)) throw ConfigError("beta_grid", "values must be >= 0");
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  auto line = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  line("data_source", data.source);
  line("data_path", data.path);
  line("toy_count", std::to_string(data.toy_count));
  line("toy_gamma", format_real(data.toy_gamma));
  line("toy_seed", std::to_string(data.toy_seed));
  line("train_fraction", format_real(data.train_fraction));
  line("image_size", std::to_string(model.generator.input_size));
  line("gen_base_channels", std::to_string(model.generator.base_channels));
  line("gen_residual_blocks", std::to_string(model.generator.n_residual_blocks));
  line("gen_downsample", std::to_string(model.generator.downsample_stages));
  line("disc_base_channels", std::to_string(model.discriminator.base_channels));
  line("disc_downsample", std::to_string(model.discriminator.downsample_stages));
  line("epochs", std::to_string(train.epochs));
  line("batch_size", std::to_string(train.batch_size));
  line("g_steps_per_d_step", std::to_string(train.g_steps_per_d_step));
  line("learning_rate", format_real(train.learning_rate));
  line("adam_beta1", format_real(train.adam_beta1));
  line("adam_beta2", format_real(train.adam_beta2));
  line("lr_decay", train.lr_decay ? "true" : "false");
  line("seed", std::to_string(train.seed));
  line("checkpoint_every", std::to_string(train.checkpoint_every));
  line("replay_pool", train.replay_pool ? "true" : "false");
  line("replay_pool_size", std::to_string(train.replay_pool_size));
  line("loss_family", to_string(train.loss.family));
  line("dual_contrast", train.loss.dual_contrast ? "true" : "false");
  line("lambda", format_real(train.loss.lambda));
  line("beta", format_real(train.loss.beta));
  line("ssim_window", std::to_string(ssim.window_size));
  line("ssim_sigma", format_real(ssim.window_sigma));
  line("ssim_k1", format_real(ssim.k1));
  line("ssim_k2", format_real(ssim.k2));
  line("precision", precision);
  line("plan_name", plan_name);
  std::string seeds, betas;
  for (std::uint64_t s : repeat_seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
  for (double b : beta_grid) betas += (betas.empty() ? "" : ",") + format_real(b);
  line("repeat_seeds", seeds);
  line("beta_grid", betas);
  return out.str();
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig config = RunConfig::toy();
  std::vector<std::pair<std::string, std::string>> entries;
  std::stringstream ss{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(stripped, "line " + std::to_string(line_no) + " is not of the form key = value");
    }
    entries.emplace_back(trim(std::string_view(stripped).substr(0, eq)),
                         trim(std::string_view(stripped).substr(eq + 1)));
  }
  // A preset resets everything, so it goes first wherever it appears.
  for (const auto& [key, value] : entries) {
    if (key == "preset") config.set(key, value);
  }
  for (const auto& [key, value] : entries) {
    if (key != "preset") config.set(key, value);
  }
  config.resolve();
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string content_hash(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::string code_version() { return DCCYCLE_CODE_VERSION; }

}  // namespace dccycle
