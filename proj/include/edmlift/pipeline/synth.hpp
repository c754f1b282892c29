#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "edmlift/core/random.hpp"
#include "edmlift/core/skeleton.hpp"
#include "edmlift/pipeline/camera.hpp"
#include "edmlift/pipeline/dataset.hpp"

namespace edmlift::pipeline {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Joint angle ranges in radians. Flexion moves a limb forward from hanging
/// straight down, abduction moves it outward, twist turns it about its own
/// axis. Elbow and knee flexion are measured from a straight limb.
struct AngleRanges {
  Range head_pitch{-0.3, 0.5};
  Range head_roll{-0.3, 0.3};
  Range torso_bend{-0.2, 0.5};
  Range torso_twist{-0.5, 0.5};
  Range shoulder_flex{-0.5, 2.6};
  Range shoulder_abduct{0.0, 1.3};
  Range shoulder_twist{-0.5, 0.5};
  Range elbow_flex{0.2, 2.3};
  Range hip_flex{-0.4, 1.9};
  Range hip_abduct{-0.15, 0.8};
  Range hip_twist{-0.3, 0.3};
  Range knee_flex{0.15, 2.2};
};

struct CameraRanges {
  double focal = 1000.0;
  Eigen::Vector2d principal{500.0, 500.0};
  Range distance{4000.0, 7000.0};
  Range azimuth{-3.14159265358979, 3.14159265358979};
  Range elevation{-0.2, 0.4};
  /// Uniform jitter of the look-at point around the torso centre, mm.
  double target_jitter = 150.0;
};

/// Adult proportions in mm, keyed by the joint each bone ends at.
std::map<std::string, double> default_bone_lengths();

struct SynthConfig {
  int n_samples = 1000;
  std::uint64_t seed = 0;
  /// Length of the bone ending at each non-root joint, keyed by joint name.
  std::map<std::string, double> bone_lengths = default_bone_lengths();
  AngleRanges angles;
  CameraRanges camera;
  double noise_sigma = 0.0;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  /// Redraws allowed per sample when a pose fails the checks.
  int max_retries = 100;

  void validate(const Skeleton& skeleton) const;
  /// Overrides fields of `base` from a JSON document; unknown keys are errors.
  static SynthConfig from_json(const nlohmann::json& doc, SynthConfig base);
  static SynthConfig from_json(const nlohmann::json& doc) { return from_json(doc, SynthConfig()); }
  nlohmann::json to_json() const;
};

/// Per-sample draw in the body frame (x to the body's left, y up, z forward).
Pose3D sample_body_pose(const SynthConfig& config, const Skeleton& skeleton, Rng& rng);
CameraModel sample_camera(const SynthConfig& config, Rng& rng);

/// Deterministic in the seed. Records are ordered train, val, test; every pose
/// scores full anthropomorphism under the skeleton's limits. Uses the
/// standard 14-joint layout.
std::vector<DatasetRecord> synth_dataset(const SynthConfig& config);

}  // namespace edmlift::pipeline
