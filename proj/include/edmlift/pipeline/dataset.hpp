#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "edmlift/core/pose.hpp"
#include "edmlift/eval/protocol.hpp"
#include "edmlift/mds/recover.hpp"

namespace edmlift::pipeline {

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// One line of a dataset file: 2D detection in pixels, 3D truth in mm.
struct DatasetRecord {
  std::string id;
  Split split = Split::kTrain;
  Pose2D joints2d;
  Pose3D joints3d;
  Visibility visibility;

  eval::LabeledPose labeled() const { return {joints2d, visibility, joints3d}; }
};

/// 3D poses whose coordinates span less than this are taken to be in metres.
inline constexpr double kMinExtentMm = 20.0;

nlohmann::json to_json(const DatasetRecord& record);
/// Throws parse errors naming the offending field.
DatasetRecord record_from_json(const nlohmann::json& doc, int n_joints = 14);

/// JSON Lines, one record per line. Errors carry "path:line".
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path, int n_joints = 14);
void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);

std::vector<DatasetRecord> select_split(const std::vector<DatasetRecord>& records, Split split);

/// One line of a predictions file.
struct PredictionRecord {
  std::string id;
  Pose3D joints3d;
  double edm_residual = 0.0;
  mds::Chirality chirality = mds::Chirality::kOriginal;
  /// Joints the network saw.
  Visibility visibility;
};

nlohmann::json to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const nlohmann::json& doc, int n_joints = 14);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path,
                                               int n_joints = 14);
void write_predictions(const std::filesystem::path& path,
                       const std::vector<PredictionRecord>& records);

}  // namespace edmlift::pipeline
