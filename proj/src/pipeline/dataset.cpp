#include "edmlift/pipeline/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "edmlift/core/error.hpp"
#include "edmlift/pipeline/format.hpp"

namespace edmlift::pipeline {
namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kParse, "field '" + field + "': " + what);
}

const nlohmann::json& field(const nlohmann::json& doc, const std::string& name) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "record is not a JSON object");
  const auto it = doc.find(name);
  if (it == doc.end()) fail(name, "missing");
  return *it;
}

Eigen::MatrixXd read_points(const nlohmann::json& doc, const std::string& name, int n_joints,
                            int dims) {
  const auto& arr = field(doc, name);
  if (!arr.is_array()) fail(name, "expected an array");
  if (static_cast<int>(arr.size()) != n_joints) {
    fail(name, "expected " + std::to_string(n_joints) + " joints, got " +
                   std::to_string(arr.size()));
  }
  Eigen::MatrixXd out(n_joints, dims);
  for (int j = 0; j < n_joints; ++j) {
    const auto& row = arr[j];
    if (!row.is_array() || static_cast<int>(row.size()) != dims) {
      fail(name, "joint " + std::to_string(j) + " needs " + std::to_string(dims) +
                     " coordinates");
    }
    for (int c = 0; c < dims; ++c) {
      if (!row[c].is_number()) fail(name, "joint " + std::to_string(j) + " has a non-number");
      out(j, c) = row[c].get<double>();
      if (!std::isfinite(out(j, c))) fail(name, "joint " + std::to_string(j) + " is not finite");
    }
  }
  return out;
}

Visibility read_visibility(const nlohmann::json& doc, int n_joints) {
  const auto& arr = field(doc, "visibility");
  if (!arr.is_array() || static_cast<int>(arr.size()) != n_joints) {
    fail("visibility", "expected " + std::to_string(n_joints) + " flags");
  }
  Visibility vis(n_joints);
  for (int j = 0; j < n_joints; ++j) {
    if (!arr[j].is_boolean()) fail("visibility", "flag " + std::to_string(j) + " is not a boolean");
    vis[j] = arr[j].get<bool>();
  }
  if (count_visible(vis) < kMinVisibleJoints) {
    fail("visibility", "fewer than " + std::to_string(kMinVisibleJoints) + " visible joints");
  }
  return vis;
}

std::string read_id(const nlohmann::json& doc) {
  const auto& id = field(doc, "id");
  if (!id.is_string() || id.get<std::string>().empty()) fail("id", "expected a non-empty string");
  return id.get<std::string>();
}

nlohmann::json points_json(const Eigen::MatrixXd& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    arr.push_back(std::move(row));
  }
  return arr;
}

template <typename Record, typename Parse>
std::vector<Record> read_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<Record> out;
  std::set<std::string> ids;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      Record rec = parse(nlohmann::json::parse(line));
      if (!ids.insert(rec.id).second) fail("id", "duplicate id '" + rec.id + "'");
      out.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, where + "malformed JSON (" + e.what() + ")");
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorCode::kParse, path.string() + ": no records");
  return out;
}

template <typename Record>
void write_lines(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::string text;
  for (const auto& r : records) text += json_line(to_json(r)) + "\n";
  write_text(path, text);
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown split '" + std::string(text) + "' (expected train, val or test)");
}

nlohmann::json to_json(const DatasetRecord& r) {
  nlohmann::json vis = nlohmann::json::array();
  for (bool v : r.visibility) vis.push_back(v);
  return {{"id", r.id},
          {"split", std::string(to_string(r.split))},
          {"joints2d", points_json(r.joints2d.joints)},
          {"joints3d", points_json(r.joints3d.joints)},
          {"visibility", vis}};
}

DatasetRecord record_from_json(const nlohmann::json& doc, int n_joints) {
  DatasetRecord r;
  r.id = read_id(doc);
  const auto& split = field(doc, "split");
  if (!split.is_string()) fail("split", "expected a string");
  try {
    r.split = parse_split(split.get<std::string>());
  } catch (const Error& e) {
    fail("split", e.what());
  }
  r.joints2d.joints = read_points(doc, "joints2d", n_joints, 2);
  r.joints3d.joints = read_points(doc, "joints3d", n_joints, 3);
  r.visibility = read_visibility(doc, n_joints);
  const double extent = (r.joints3d.joints.colwise().maxCoeff() -
                         r.joints3d.joints.colwise().minCoeff()).maxCoeff();
  if (extent < kMinExtentMm) {
    fail("joints3d", "pose spans only " + format9(extent) +
                         " units; coordinates must be in millimetres");
  }
  return r;
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path, int n_joints) {
  return read_lines<DatasetRecord>(
      path, [n_joints](const nlohmann::json& doc) { return record_from_json(doc, n_joints); });
}

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  write_lines(path, records);
}

std::vector<DatasetRecord> select_split(const std::vector<DatasetRecord>& records, Split split) {
  std::vector<DatasetRecord> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

nlohmann::json to_json(const PredictionRecord& r) {
  nlohmann::json vis = nlohmann::json::array();
  for (bool v : r.visibility) vis.push_back(v);
  return {{"id", r.id},
          {"joints3d", points_json(r.joints3d.joints)},
          {"edm_residual", r.edm_residual},
          {"chirality", r.chirality == mds::Chirality::kOriginal ? "original" : "reflected"},
          {"visibility", vis}};
}

PredictionRecord prediction_from_json(const nlohmann::json& doc, int n_joints) {
  PredictionRecord r;
  r.id = read_id(doc);
  r.joints3d.joints = read_points(doc, "joints3d", n_joints, 3);
  const auto& obj = field(doc, "edm_residual");
  if (!obj.is_number() || !(obj.get<double>() >= 0.0)) {
    fail("edm_residual", "expected a nonnegative number");
  }
  r.edm_residual = obj.get<double>();
  const auto& chir = field(doc, "chirality");
  if (chir == "original") {
    r.chirality = mds::Chirality::kOriginal;
  } else if (chir == "reflected") {
    r.chirality = mds::Chirality::kReflected;
  } else {
    fail("chirality", "expected \"original\" or \"reflected\"");
  }
  r.visibility = read_visibility(doc, n_joints);
  return r;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path, int n_joints) {
  return read_lines<PredictionRecord>(
      path, [n_joints](const nlohmann::json& doc) { return prediction_from_json(doc, n_joints); });
}

void write_predictions(const std::filesystem::path& path,
                       const std::vector<PredictionRecord>& records) {
  write_lines(path, records);
}

}  // namespace edmlift::pipeline
