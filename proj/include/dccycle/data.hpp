#pragma once

#include "dccycle/batch.hpp"
#include "dccycle/image.hpp"
#include "dccycle/network.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dccycle {

/// x_to_y is "a2b" (CT to MR), y_to_x is "b2a" (MR to CT).
enum class Direction { x_to_y, y_to_x };

const char* to_string(Direction direction);  // "a2b" / "b2a"
Direction parse_direction(std::string_view text);

/// Two image pools in model space at a common square resolution.
struct UnpairedDataset {
  std::vector<Image<double>> domain_x;
  std::vector<Image<double>> domain_y;
  /// (x index, y index) of images that depict the same subject. Only used to
  /// score synthetic images; training never reads it.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.9;

  Index image_size() const;
  /// Every image of both domains belongs to exactly one pair.
  bool fully_paired() const;
};

/// Index subsets of a dataset. Views never own images.
struct DatasetView {
  const UnpairedDataset* dataset = nullptr;
  std::vector<std::size_t> x_indices;
  std::vector<std::size_t> y_indices;

  const Image<double>& x(std::size_t i) const { return dataset->domain_x[x_indices[i]]; }
  const Image<double>& y(std::size_t i) const { return dataset->domain_y[y_indices[i]]; }
  std::size_t size() const { return std::max(x_indices.size(), y_indices.size()); }
};

struct DatasetSplit {
  DatasetView train;
  DatasetView test;
};

/// Loads `dir_x/*.png` and `dir_y/*.png`, rescales each file from its integer
/// range to [-1,1] and resizes bilinearly to target_size. Files with the same
/// name in both directories are paired.
UnpairedDataset ingest(const std::string& dir_x, const std::string& dir_y, Index target_size);

/// Loads a `file,domain,pair_id` manifest; paths are relative to the manifest.
UnpairedDataset ingest_manifest(const std::string& manifest_path, Index target_size);

/// Seeded shuffle with floor(n * train_fraction) training images per domain.
/// A fully paired dataset is split by pair so test images keep their partners.
DatasetSplit split(const UnpairedDataset& dataset, std::uint64_t seed);

/// Independent uniform draws for x, y and both negatives.
template <typename Scalar>
TrainingBatch<Scalar> next_batch(const DatasetView& train, std::mt19937_64& rng);

/// Ground-truth partner of the source image `source_index` (a dataset index in
/// the source domain of `direction`), or npos.
std::size_t paired_target(const UnpairedDataset& dataset, Direction direction, std::size_t source_index);

struct SyntheticImage {
  std::string id;
  std::size_t source_index = 0;
  Image<double> image;
};

/// Translates every test image of the direction's source domain; output is
/// sorted by id.
template <typename Scalar>
std::vector<SyntheticImage> synthesize_test_set(const Network<Scalar>& generator, const DatasetView& test,
                                                Direction direction);

/// Model-space image to [0,1] and quantized back to 8-bit levels / 255.
Grid<double> export_levels(const Image<double>& image);

/// 8-bit level v -> 2 v / 255 - 1.
double normalize_level8(int level);

}  // namespace dccycle
