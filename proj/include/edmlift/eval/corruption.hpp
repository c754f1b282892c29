#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "edmlift/core/pose.hpp"
#include "edmlift/core/random.hpp"
#include "edmlift/core/skeleton.hpp"

namespace edmlift::eval {

enum class MaskKind { kRandom2, kRightArm, kLeftArm, kRightLeg, kLeftLeg };

std::string_view to_string(MaskKind kind);
/// "random2", "right_arm", "left_arm", "right_leg", "left_leg".
MaskKind parse_mask_kind(std::string_view text);

/// Visibility with two joints hidden: a uniformly random pair, or one limb group.
Visibility make_occlusion_mask(MaskKind kind, const Skeleton& skeleton, Rng& rng);

/// Gaussian pixel noise on the visible joints of a raw pose.
Pose2D inject_noise(const Pose2D& pose, double sigma, Rng& rng, const Visibility& visibility = {});

struct ProtocolSpec {
  enum class Kind { kClean, kNoise, kOcclusion };
  Kind kind = Kind::kClean;
  double sigma = 0.0;
  MaskKind mask = MaskKind::kRandom2;
  std::uint64_t seed = 0;

  /// "clean", "noise:S" (pixels) or "occlusion:KIND".
  static ProtocolSpec parse(std::string_view text, std::uint64_t seed = 0);
  std::string to_string() const;
  void validate() const;
};

/// The network's view of sample `index` under `spec`: raw pose with noise
/// added, or with the protocol's joints hidden on top of `visibility`.
ObservedPose2D apply_protocol(const ProtocolSpec& spec, const Skeleton& skeleton,
                              const Pose2D& raw, const Visibility& visibility,
                              std::uint64_t index);

}  // namespace edmlift::eval
