#include "edmlift/core/skeleton.hpp"

#include <fstream>
#include <set>

#include "edmlift/core/error.hpp"

namespace edmlift {
namespace {

void fail(const std::string& what) { throw Error(ErrorCode::kInvalidInput, "skeleton: " + what); }

}  // namespace

Skeleton::Skeleton(std::vector<std::string> names, std::vector<int> parents,
                   std::map<std::string, std::array<int, 2>> limb_groups,
                   std::map<int, HingeLimit> hinge_limits, std::map<int, BendReference> hinge_bends)
    : names_(std::move(names)),
      parents_(std::move(parents)),
      limb_groups_(std::move(limb_groups)),
      hinge_limits_(std::move(hinge_limits)),
      hinge_bends_(std::move(hinge_bends)) {
  const int n = size();
  if (n == 0) fail("no joints");
  if (static_cast<int>(parents_.size()) != n) fail("names and parents differ in length");
  if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size()) {
    fail("joint names are not unique");
  }

  int roots = 0;
  for (int j = 0; j < n; ++j) {
    const int p = parents_[j];
    if (p < 0 || p >= n) fail("parent index out of range for joint '" + names_[j] + "'");
    if (p == j) {
      root_ = j;
      ++roots;
    }
  }
  if (roots != 1) fail("expected exactly one root (a joint that is its own parent)");
  // Every joint must reach the root without revisiting a node.
  for (int j = 0; j < n; ++j) {
    int cur = j;
    for (int steps = 0; cur != root_; ++steps) {
      if (steps > n) fail("parent links contain a cycle through '" + names_[j] + "'");
      cur = parents_[cur];
    }
  }

  for (const auto& [group, members] : limb_groups_) {
    for (int j : members) {
      if (j < 0 || j >= n) fail("limb group '" + group + "' references joint out of range");
    }
    if (members[0] == members[1]) fail("limb group '" + group + "' must name 2 distinct joints");
  }

  for (const auto& [joint, limit] : hinge_limits_) {
    if (joint < 0 || joint >= n) fail("hinge limit for joint out of range");
    if (!(limit.lo <= limit.hi)) fail("hinge limit for '" + names_[joint] + "' has lo > hi");
    if (joint == root_) fail("root joint cannot be a hinge");
    if (children(joint).size() != 1) {
      fail("hinge joint '" + names_[joint] + "' must have exactly one child");
    }
  }
  for (const auto& [joint, bend] : hinge_bends_) {
    if (!hinge_limits_.contains(joint)) fail("bend reference without hinge limit");
    if (bend.axis_from < 0 || bend.axis_from >= n || bend.axis_to < 0 || bend.axis_to >= n ||
        bend.axis_from == bend.axis_to) {
      fail("bend reference axis for '" + names_[joint] + "' is invalid");
    }
    if (bend.sign != 1 && bend.sign != -1) fail("bend reference sign must be +1 or -1");
  }
}

Skeleton Skeleton::standard() {
  using namespace joints;
  std::vector<std::string> names = {"head",      "neck",        "right_shoulder", "left_shoulder",
                                    "right_elbow", "left_elbow",  "right_wrist",    "left_wrist",
                                    "right_hip",   "left_hip",    "right_knee",     "left_knee",
                                    "right_ankle", "left_ankle"};
  std::vector<int> parents = {kNeck,         kNeck,        kNeck,    kNeck,    kRightShoulder,
                              kLeftShoulder, kRightElbow,  kLeftElbow, kNeck,  kNeck,
                              kRightHip,     kLeftHip,     kRightKnee, kLeftKnee};
  std::map<std::string, std::array<int, 2>> groups = {
      {"right_arm", {kRightElbow, kRightWrist}},
      {"left_arm", {kLeftElbow, kLeftWrist}},
      {"right_leg", {kRightKnee, kRightAnkle}},
      {"left_leg", {kLeftKnee, kLeftAnkle}},
  };
  const HingeLimit hinge{0.10, 3.10};
  std::map<int, HingeLimit> limits = {
      {kRightElbow, hinge}, {kLeftElbow, hinge}, {kRightKnee, hinge}, {kLeftKnee, hinge}};
  // Lateral axes point from the right side of the body to the left. Knees fold
  // backwards and elbows forwards, hence the opposite signs.
  std::map<int, BendReference> bends = {
      {kRightElbow, {kRightShoulder, kLeftShoulder, -1}},
      {kLeftElbow, {kRightShoulder, kLeftShoulder, -1}},
      {kRightKnee, {kRightHip, kLeftHip, +1}},
      {kLeftKnee, {kRightHip, kLeftHip, +1}},
  };
  return Skeleton(std::move(names), std::move(parents), std::move(groups), std::move(limits),
                  std::move(bends));
}

Skeleton Skeleton::from_json(const nlohmann::json& doc) {
  try {
    auto names = doc.at("names").get<std::vector<std::string>>();
    auto parents = doc.at("parents").get<std::vector<int>>();
    std::map<std::string, std::array<int, 2>> groups;
    if (doc.contains("limb_groups")) {
      for (const auto& [key, value] : doc.at("limb_groups").items()) {
        auto members = value.get<std::vector<int>>();
        if (members.size() != 2) fail("limb group '" + key + "' must have exactly 2 joints");
        groups[key] = {members[0], members[1]};
      }
    }
    auto index = [&](const std::string& name) {
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
      }
      fail("unknown joint name '" + name + "'");
      return -1;
    };
    std::map<int, HingeLimit> limits;
    if (doc.contains("hinge_limits")) {
      for (const auto& [key, value] : doc.at("hinge_limits").items()) {
        auto range = value.get<std::vector<double>>();
        if (range.size() != 2) fail("hinge limit for '" + key + "' must be [lo, hi]");
        limits[index(key)] = {range[0], range[1]};
      }
    }
    std::map<int, BendReference> bends;
    if (doc.contains("hinge_bend")) {
      for (const auto& [key, value] : doc.at("hinge_bend").items()) {
        auto axis = value.at("axis").get<std::vector<int>>();
        if (axis.size() != 2) fail("hinge_bend axis for '" + key + "' must be [from, to]");
        bends[index(key)] = {axis[0], axis[1], value.at("sign").get<int>()};
      }
    }
    return Skeleton(std::move(names), std::move(parents), std::move(groups), std::move(limits),
                    std::move(bends));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("skeleton json: ") + e.what());
  }
}

Skeleton Skeleton::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open skeleton file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Skeleton::to_json() const {
  nlohmann::json doc;
  doc["names"] = names_;
  doc["parents"] = parents_;
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [key, members] : limb_groups_) groups[key] = {members[0], members[1]};
  doc["limb_groups"] = groups;
  nlohmann::json limits = nlohmann::json::object();
  for (const auto& [joint, limit] : hinge_limits_) limits[names_[joint]] = {limit.lo, limit.hi};
  doc["hinge_limits"] = limits;
  nlohmann::json bends = nlohmann::json::object();
  for (const auto& [joint, bend] : hinge_bends_) {
    bends[names_[joint]] = {{"axis", {bend.axis_from, bend.axis_to}}, {"sign", bend.sign}};
  }
  doc["hinge_bend"] = bends;
  return doc;
}

int Skeleton::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown joint '" + name + "'");
}

std::vector<int> Skeleton::children(int joint) const {
  std::vector<int> out;
  for (int j = 0; j < size(); ++j) {
    if (j != joint && parents_[j] == joint) out.push_back(j);
  }
  return out;
}

std::array<int, 2> Skeleton::limb_group(const std::string& name) const {
  auto it = limb_groups_.find(name);
  if (it == limb_groups_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown limb group '" + name + "'");
  }
  return it->second;
}

std::optional<BendReference> Skeleton::bend_reference(int joint) const {
  auto it = hinge_bends_.find(joint);
  if (it == hinge_bends_.end()) return std::nullopt;
  return it->second;
}

int Skeleton::hinge_child(int joint) const {
  auto kids = children(joint);
  if (kids.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "joint '" + names_.at(joint) + "' is not a hinge");
  }
  return kids.front();
}

}  // namespace edmlift
