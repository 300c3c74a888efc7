#pragma once

// Synthetic two-modality corpus. Domain X holds soft ellipse/blob intensity
// fields; domain Y holds the same fields after intensity inversion and a
// gamma curve, so every X image has a known Y ground truth.

#include "dccycle/data.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace dccycle {

struct ToyDataOptions {
  std::size_t count = 50;
  Index size = 64;
  std::uint64_t seed = 0;
  double gamma = 1.5;
};

/// Random field in [0,1].
Grid<double> toy_field(Index size, std::mt19937_64& rng);

/// (1 - v)^gamma.
Grid<double> toy_modality_transform(const Grid<double>& field, double gamma);

/// The corpus held in memory, quantized to 8-bit levels exactly as the PNG
/// files written by write_toy_dataset. Image i of X and Y form pair i.
UnpairedDataset make_toy_dataset(const ToyDataOptions& options);

/// Writes `out/x/NNNN.png`, `out/y/NNNN.png` and `out/manifest.csv`.
void write_toy_dataset(const ToyDataOptions& options, const std::string& out_dir);

}  // namespace dccycle
