#include "edmlift/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "edmlift/core/error.hpp"
#include "json.hpp"

namespace edmlift::nn {
namespace {

void put_le32(std::string& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

float get_le32(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

std::string serialize_checkpoint(const Model& model) {
  auto& net = const_cast<Model&>(model);
  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointFormatVersion;
  manifest["arch"] = std::string(to_string(model.config().arch));
  manifest["n_joints"] = model.config().n_joints;
  manifest["dropout_rate"] = model.config().dropout_rate;
  manifest["target_scale"] = model.config().target_scale;
  nlohmann::json tensors = nlohmann::json::array();
  std::string blob;
  for (const auto& slot : net.slots()) {
    tensors.push_back({{"name", slot.name},
                       {"shape", slot.value->shape()},
                       {"offset", blob.size()},
                       {"trainable", slot.trainable()}});
    for (float v : slot.value->values()) put_le32(blob, v);
  }
  manifest["tensors"] = tensors;
  return manifest.dump() + "\n" + blob;
}

Model deserialize_checkpoint(const std::string& bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) throw Error(ErrorCode::kParse, "checkpoint has no manifest line");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("checkpoint manifest: ") + e.what());
  }
  const char* blob = bytes.data() + newline + 1;
  const std::size_t blob_size = bytes.size() - newline - 1;

  try {
    if (manifest.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw Error(ErrorCode::kParse, "unsupported checkpoint format_version");
    }
    ModelConfig config;
    config.arch = parse_arch(manifest.at("arch").get<std::string>());
    config.n_joints = manifest.at("n_joints").get<int>();
    config.dropout_rate = manifest.at("dropout_rate").get<double>();
    config.target_scale = manifest.at("target_scale").get<double>();
    Model model(config, 0);

    auto slots = model.slots();
    const auto& entries = manifest.at("tensors");
    if (entries.size() != slots.size()) {
      throw Error(ErrorCode::kShape, "checkpoint lists " + std::to_string(entries.size()) +
                                         " tensors, model has " + std::to_string(slots.size()));
    }
    std::size_t expected_offset = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& entry = entries[i];
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      if (name != slots[i].name || shape != slots[i].value->shape()) {
        throw Error(ErrorCode::kShape, "checkpoint tensor '" + name + "' " + shape_string(shape) +
                                           " does not match model tensor '" + slots[i].name + "' " +
                                           shape_string(slots[i].value->shape()));
      }
      if (offset != expected_offset) {
        throw Error(ErrorCode::kParse, "checkpoint tensor '" + name + "' has offset " +
                                           std::to_string(offset) + ", expected " +
                                           std::to_string(expected_offset));
      }
      const std::size_t count = slots[i].value->size();
      if (offset + 4 * count > blob_size) {
        throw Error(ErrorCode::kParse, "checkpoint data truncated in tensor '" + name + "'");
      }
      for (std::size_t k = 0; k < count; ++k) (*slots[i].value)[k] = get_le32(blob + offset + 4 * k);
      expected_offset = offset + 4 * count;
    }
    if (expected_offset != blob_size) {
      throw Error(ErrorCode::kParse, "checkpoint has trailing bytes after the last tensor");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("checkpoint manifest: ") + e.what());
  }
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  const std::string bytes = serialize_checkpoint(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_checkpoint(buffer.str());
}

}  // namespace edmlift::nn
