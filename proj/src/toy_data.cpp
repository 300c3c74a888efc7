#include "dccycle/toy_data.hpp"

#include "dccycle/png_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace dccycle {

namespace fs = std::filesystem;

Grid<double> toy_field(Index size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = static_cast<double>(size);
  Grid<double> field = Grid<double>::Constant(size, size, 0.05 + 0.15 * unit(rng));

  // Large soft ellipses.
  const int ellipses = 2 + static_cast<int>(unit(rng) * 3.0);
  for (int e = 0; e < ellipses; ++e) {
    const double cy = s * (0.2 + 0.6 * unit(rng));
    const double cx = s * (0.2 + 0.6 * unit(rng));
    const double ry = s * (0.12 + 0.22 * unit(rng));
    const double rx = s * (0.12 + 0.22 * unit(rng));
    const double angle = std::numbers::pi * unit(rng);
    const double level = 0.35 + 0.6 * unit(rng);
    const double edge = 0.08 + 0.1 * unit(rng);
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (Index r = 0; r < size; ++r) {
      for (Index c = 0; c < size; ++c) {
        const double dy = r + 0.5 - cy, dx = c + 0.5 - cx;
        const double u = (ca * dx + sa * dy) / rx;
        const double v = (-sa * dx + ca * dy) / ry;
        const double radius = std::sqrt(u * u + v * v);
        const double inside = 1.0 / (1.0 + std::exp((radius - 1.0) / edge));
        field(r, c) = std::max(field(r, c), level * inside);
      }
    }
  }

  // Small bright blobs.
  const int blobs = 1 + static_cast<int>(unit(rng) * 3.0);
  for (int b = 0; b < blobs; ++b) {
    const double cy = s * unit(rng), cx = s * unit(rng);
    const double sigma = s * (0.03 + 0.05 * unit(rng));
    const double amplitude = 0.2 + 0.3 * unit(rng);
    for (Index r = 0; r < size; ++r) {
      for (Index c = 0; c < size; ++c) {
        const double dy = r + 0.5 - cy, dx = c + 0.5 - cx;
        field(r, c) += amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      }
    }
  }
  return field.cwiseMax(0.0).cwiseMin(1.0);
}

Grid<double> toy_modality_transform(const Grid<double>& field, double gamma) {
  return (1.0 - field.array()).max(0.0).pow(gamma);
}

namespace {

std::string toy_id(std::size_t i) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04zu", i);
  return buffer;
}

void validate(const ToyDataOptions& options) {
  if (options.count < 2) throw std::invalid_argument("toy dataset needs at least 2 images");
  if (options.size <= 0 || options.size % 4 != 0) throw std::invalid_argument("toy image size must be a multiple of 4");
  if (!(options.gamma > 0)) throw std::invalid_argument("toy gamma must be positive");
}

}  // namespace

UnpairedDataset make_toy_dataset(const ToyDataOptions& options) {
  validate(options);
  std::mt19937_64 rng(options.seed);
  UnpairedDataset dataset;
  for (std::size_t i = 0; i < options.count; ++i) {
    const Grid<double> field = quantize8(toy_field(options.size, rng)) / 255.0;
    const Grid<double> other = quantize8(toy_modality_transform(field, options.gamma)) / 255.0;
    dataset.domain_x.emplace_back(metric_to_model(field), ValueRange::model, Domain::x, toy_id(i));
    dataset.domain_y.emplace_back(metric_to_model(other), ValueRange::model, Domain::y, toy_id(i));
    dataset.pairs.emplace_back(i, i);
  }
  return dataset;
}

void write_toy_dataset(const ToyDataOptions& options, const std::string& out_dir) {
  const UnpairedDataset dataset = make_toy_dataset(options);
  fs::create_directories(fs::path(out_dir) / "x");
  fs::create_directories(fs::path(out_dir) / "y");
  std::ofstream manifest(fs::path(out_dir) / "manifest.csv");
  if (!manifest) throw std::runtime_error("cannot write manifest in '" + out_dir + "'");
  manifest << "file,domain,pair_id\n";
  for (std::size_t i = 0; i < options.count; ++i) {
    const std::string id = toy_id(i);
    write_png8((fs::path(out_dir) / "x" / (id + ".png")).string(), dataset.domain_x[i].to_metric().pixels());
    write_png8((fs::path(out_dir) / "y" / (id + ".png")).string(), dataset.domain_y[i].to_metric().pixels());
    manifest << "x/" << id << ".png,x," << id << '\n';
    manifest << "y/" << id << ".png,y," << id << '\n';
  }
}

}  // namespace dccycle
