#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace edmlift {

/// Accepted interior angle (radians) at a hinge joint, measured between the
/// bone to the parent and the bone to the single child.
struct HingeLimit {
  double lo = 0.0;
  double hi = 0.0;
};

/// Bending direction of a hinge. With parent bone a = joint - parent,
/// child bone b = child - joint and axis c = joints[axis_to] - joints[axis_from],
/// a correctly bent hinge satisfies sign * dot(cross(a, b), c) > 0.
struct BendReference {
  int axis_from = 0;
  int axis_to = 0;
  int sign = 1;
};

/// Kinematic tree of the body model plus the limb groups used by the occlusion
/// protocols and the hinge table used to score anthropomorphism.
class Skeleton {
 public:
  Skeleton(std::vector<std::string> names, std::vector<int> parents,
           std::map<std::string, std::array<int, 2>> limb_groups,
           std::map<int, HingeLimit> hinge_limits, std::map<int, BendReference> hinge_bends = {});

  /// The 14-joint body model used throughout the toolkit.
  static Skeleton standard();

  static Skeleton from_json(const nlohmann::json& doc);
  static Skeleton load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int joint) const { return names_.at(joint); }
  int index_of(const std::string& name) const;
  int parent(int joint) const { return parents_.at(joint); }
  int root() const { return root_; }
  std::vector<int> children(int joint) const;

  const std::map<std::string, std::array<int, 2>>& limb_groups() const { return limb_groups_; }
  std::array<int, 2> limb_group(const std::string& name) const;

  const std::map<int, HingeLimit>& hinge_limits() const { return hinge_limits_; }
  std::optional<BendReference> bend_reference(int joint) const;
  /// The single child a hinge joint bends towards.
  int hinge_child(int joint) const;

 private:
  std::vector<std::string> names_;
  std::vector<int> parents_;
  std::map<std::string, std::array<int, 2>> limb_groups_;
  std::map<int, HingeLimit> hinge_limits_;
  std::map<int, BendReference> hinge_bends_;
  int root_ = 0;
};

/// Joint indices of the standard 14-joint model.
namespace joints {
inline constexpr int kHead = 0;
inline constexpr int kNeck = 1;
inline constexpr int kRightShoulder = 2;
inline constexpr int kLeftShoulder = 3;
inline constexpr int kRightElbow = 4;
inline constexpr int kLeftElbow = 5;
inline constexpr int kRightWrist = 6;
inline constexpr int kLeftWrist = 7;
inline constexpr int kRightHip = 8;
inline constexpr int kLeftHip = 9;
inline constexpr int kRightKnee = 10;
inline constexpr int kLeftKnee = 11;
inline constexpr int kRightAnkle = 12;
inline constexpr int kLeftAnkle = 13;
inline constexpr int kCount = 14;
}  // namespace joints

}  // namespace edmlift
