#pragma once

#include <filesystem>
#include <string>

#include "edmlift/nn/network.hpp"

namespace edmlift::nn {

inline constexpr int kCheckpointFormatVersion = 1;

/// Checkpoint layout: one line of JSON manifest
///   {"arch", "dropout_rate", "format_version", "n_joints", "target_scale",
///    "tensors": [{"name", "offset", "shape", "trainable"}...]}
/// terminated by '\n', followed by the tensors as little-endian IEEE-754
/// binary32 values in manifest order. Offsets are byte offsets into that blob.
std::string serialize_checkpoint(const Model& model);
Model deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace edmlift::nn
