#pragma once

// Checkpoint archive: the header line "dccycle-ckpt-v1", one line with the
// byte length of a JSON metadata block, the block itself, then raw parameter
// and optimizer arrays in the order listed under "blobs".

#include "dccycle/trainer.hpp"

#include <string>

namespace dccycle {

inline constexpr const char* kCheckpointMagic = "dccycle-ckpt-v1";

struct CheckpointInfo {
  std::string scalar;  // "f32" or "f64"
  ModelConfig model;
  TrainConfig train;
  TrainCounters counters;
  std::uint64_t seed = 0;
  std::string config_text;
  std::string config_hash;
};

template <typename Scalar>
void save_checkpoint(const std::string& path, const TrainState<Scalar>& state, const ModelConfig& model,
                     const TrainConfig& train, const std::string& config_text);

/// Reads only the metadata block.
CheckpointInfo read_checkpoint_info(const std::string& path);

/// Restores the full training state. Throws if the archive was written at a
/// different precision.
template <typename Scalar>
TrainState<Scalar> load_checkpoint(const std::string& path, CheckpointInfo* info = nullptr);

}  // namespace dccycle
