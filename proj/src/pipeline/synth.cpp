#include "edmlift/pipeline/synth.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/Geometry>

#include "edmlift/core/error.hpp"
#include "edmlift/mds/recover.hpp"

namespace edmlift::pipeline {
namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;

Matrix3d rot_x(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitX()).toRotationMatrix(); }
Matrix3d rot_y(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitY()).toRotationMatrix(); }
Matrix3d rot_z(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitZ()).toRotationMatrix(); }

double draw(const Range& r, Rng& rng) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

// Rotations are built for a left limb; the right one is its mirror image.
Matrix3d side(const Matrix3d& left, bool right) {
  if (!right) return left;
  const Matrix3d m = Eigen::Vector3d(-1.0, 1.0, 1.0).asDiagonal();
  return m * left * m;
}

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw Error(ErrorCode::kInvalidArgument, std::string("range '") + name + "' is invalid");
  }
}

void read_range(const nlohmann::json& doc, Range& r, const std::string& name) {
  const auto v = doc.get<std::vector<double>>();
  if (v.size() != 2) throw Error(ErrorCode::kParse, "range '" + name + "' needs [lo, hi]");
  r = {v[0], v[1]};
}

#define EDMLIFT_ANGLE_FIELDS(X)                                                              \
  X(head_pitch) X(head_roll) X(torso_bend) X(torso_twist) X(shoulder_flex) X(shoulder_abduct) \
  X(shoulder_twist) X(elbow_flex) X(hip_flex) X(hip_abduct) X(hip_twist) X(knee_flex)

}  // namespace

std::map<std::string, double> default_bone_lengths() {
  return {{"head", 220.0},        {"right_shoulder", 180.0}, {"left_shoulder", 180.0},
          {"right_elbow", 300.0}, {"left_elbow", 300.0},     {"right_wrist", 260.0},
          {"left_wrist", 260.0},  {"right_hip", 530.0},      {"left_hip", 530.0},
          {"right_knee", 450.0},  {"left_knee", 450.0},      {"right_ankle", 430.0},
          {"left_ankle", 430.0}};
}

void SynthConfig::validate(const Skeleton& skeleton) const {
  if (n_samples < 1) throw Error(ErrorCode::kInvalidArgument, "n_samples must be >= 1");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise sigma must be >= 0");
  if (!(val_fraction >= 0.0) || !(test_fraction >= 0.0) || val_fraction + test_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must be >= 0 and sum to <= 1");
  }
  if (max_retries < 1) throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 1");
  for (int j = 0; j < skeleton.size(); ++j) {
    if (j == skeleton.root()) continue;
    const auto it = bone_lengths.find(skeleton.name(j));
    if (it == bone_lengths.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no bone length for '" + skeleton.name(j) + "'");
    }
    if (!(it->second > 0.0) || !std::isfinite(it->second)) {
      throw Error(ErrorCode::kInvalidArgument, "bone length of '" + it->first + "' must be > 0");
    }
  }
  for (const auto& [name, len] : bone_lengths) skeleton.index_of(name);
#define X(f) check_range(angles.f, #f);
  EDMLIFT_ANGLE_FIELDS(X)
#undef X
  check_range(camera.distance, "distance");
  check_range(camera.azimuth, "azimuth");
  check_range(camera.elevation, "elevation");
  if (!(camera.focal > 0.0)) throw Error(ErrorCode::kInvalidArgument, "focal must be > 0");
  if (!(camera.distance.lo > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "camera distance must be > 0");
  }
  if (std::abs(camera.elevation.lo) >= 1.5 || std::abs(camera.elevation.hi) >= 1.5) {
    throw Error(ErrorCode::kInvalidArgument, "camera elevation must stay within (-1.5, 1.5)");
  }
  if (!(camera.target_jitter >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target jitter must be >= 0");
  }
}

SynthConfig SynthConfig::from_json(const nlohmann::json& doc, SynthConfig base) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "synth config must be a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "n_samples") {
        base.n_samples = value.get<int>();
      } else if (key == "seed") {
        base.seed = value.get<std::uint64_t>();
      } else if (key == "noise_sigma") {
        base.noise_sigma = value.get<double>();
      } else if (key == "val_fraction") {
        base.val_fraction = value.get<double>();
      } else if (key == "test_fraction") {
        base.test_fraction = value.get<double>();
      } else if (key == "max_retries") {
        base.max_retries = value.get<int>();
      } else if (key == "bone_lengths") {
        for (const auto& [name, len] : value.items()) base.bone_lengths[name] = len.get<double>();
      } else if (key == "angles") {
        for (const auto& [name, r] : value.items()) {
          bool found = false;
#define X(f)                          \
  if (name == #f) {                   \
    read_range(r, base.angles.f, #f); \
    found = true;                     \
  }
          EDMLIFT_ANGLE_FIELDS(X)
#undef X
          if (!found) throw Error(ErrorCode::kParse, "unknown angle range '" + name + "'");
        }
      } else if (key == "camera") {
        for (const auto& [name, v] : value.items()) {
          if (name == "focal") {
            base.camera.focal = v.get<double>();
          } else if (name == "principal") {
            const auto p = v.get<std::vector<double>>();
            if (p.size() != 2) throw Error(ErrorCode::kParse, "principal needs [cx, cy]");
            base.camera.principal = {p[0], p[1]};
          } else if (name == "distance") {
            read_range(v, base.camera.distance, name);
          } else if (name == "azimuth") {
            read_range(v, base.camera.azimuth, name);
          } else if (name == "elevation") {
            read_range(v, base.camera.elevation, name);
          } else if (name == "target_jitter") {
            base.camera.target_jitter = v.get<double>();
          } else {
            throw Error(ErrorCode::kParse, "unknown camera setting '" + name + "'");
          }
        }
      } else {
        throw Error(ErrorCode::kParse, "unknown synth config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("synth config: ") + e.what());
  }
  return base;
}

nlohmann::json SynthConfig::to_json() const {
  nlohmann::json angles_doc;
#define X(f) angles_doc[#f] = {angles.f.lo, angles.f.hi};
  EDMLIFT_ANGLE_FIELDS(X)
#undef X
  return {{"n_samples", n_samples},
          {"seed", seed},
          {"noise_sigma", noise_sigma},
          {"val_fraction", val_fraction},
          {"test_fraction", test_fraction},
          {"max_retries", max_retries},
          {"bone_lengths", bone_lengths},
          {"angles", angles_doc},
          {"camera",
           {{"focal", camera.focal},
            {"principal", {camera.principal.x(), camera.principal.y()}},
            {"distance", {camera.distance.lo, camera.distance.hi}},
            {"azimuth", {camera.azimuth.lo, camera.azimuth.hi}},
            {"elevation", {camera.elevation.lo, camera.elevation.hi}},
            {"target_jitter", camera.target_jitter}}}};
}

Pose3D sample_body_pose(const SynthConfig& config, const Skeleton& skeleton, Rng& rng) {
  using namespace joints;
  if (skeleton.size() != kCount) {
    throw Error(ErrorCode::kInvalidArgument, "the generator needs the standard 14-joint skeleton");
  }
  const AngleRanges& a = config.angles;
  auto bone = [&](int j) { return config.bone_lengths.at(skeleton.name(j)); };
  const Vector3d down(0.0, -1.0, 0.0);

  Pose3D pose;
  pose.joints = Points3::Zero(kCount, 3);
  auto set = [&](int j, const Vector3d& p) { pose.joints.row(j) = p.transpose(); };
  auto at = [&](int j) -> Vector3d { return pose.joints.row(j).transpose(); };

  // Draw order is fixed; changing it changes every generated dataset.
  const double head_pitch = draw(a.head_pitch, rng);
  const double head_roll = draw(a.head_roll, rng);
  set(kHead, bone(kHead) * (rot_x(-head_pitch) * rot_z(head_roll) * Vector3d::UnitY()));
  set(kRightShoulder, Vector3d(-bone(kRightShoulder), 0.0, 0.0));
  set(kLeftShoulder, Vector3d(bone(kLeftShoulder), 0.0, 0.0));

  const double bend = draw(a.torso_bend, rng);
  const double twist = draw(a.torso_twist, rng);
  const Matrix3d pelvis = rot_y(twist) * rot_x(bend);
  for (const auto& [hip, dx] : {std::pair{kRightHip, -100.0}, std::pair{kLeftHip, 100.0}}) {
    set(hip, bone(hip) * (pelvis * Vector3d(dx, -520.0, 0.0).normalized()));
  }

  struct Limb {
    int root, mid, end;
    bool right, arm;
  };
  const Limb limbs[] = {{kRightShoulder, kRightElbow, kRightWrist, true, true},
                        {kLeftShoulder, kLeftElbow, kLeftWrist, false, true},
                        {kRightHip, kRightKnee, kRightAnkle, true, false},
                        {kLeftHip, kLeftKnee, kLeftAnkle, false, false}};
  for (const Limb& l : limbs) {
    const double flex = draw(l.arm ? a.shoulder_flex : a.hip_flex, rng);
    const double abduct = draw(l.arm ? a.shoulder_abduct : a.hip_abduct, rng);
    const double spin = draw(l.arm ? a.shoulder_twist : a.hip_twist, rng);
    const double hinge = draw(l.arm ? a.elbow_flex : a.knee_flex, rng);
    const Matrix3d frame = (l.arm ? Matrix3d::Identity() : pelvis) *
                           side(rot_z(abduct) * rot_x(-flex) * rot_y(spin), l.right);
    // Elbows fold forward, knees backward.
    const Matrix3d lower = frame * rot_x(l.arm ? -hinge : hinge);
    set(l.mid, at(l.root) + bone(l.mid) * (frame * down));
    set(l.end, at(l.mid) + bone(l.end) * (lower * down));
  }
  return pose;
}

CameraModel sample_camera(const SynthConfig& config, Rng& rng) {
  const CameraRanges& c = config.camera;
  const double azimuth = draw(c.azimuth, rng);
  const double elevation = draw(c.elevation, rng);
  const double distance = draw(c.distance, rng);
  Vector3d target(0.0, -400.0, 0.0);
  for (int k = 0; k < 3; ++k) target(k) += draw({-c.target_jitter, c.target_jitter}, rng);
  const Vector3d dir(std::sin(azimuth) * std::cos(elevation), std::sin(elevation),
                     std::cos(azimuth) * std::cos(elevation));
  return CameraModel::look_at(target + distance * dir, target, c.focal, c.principal);
}

std::vector<DatasetRecord> synth_dataset(const SynthConfig& config) {
  const Skeleton skeleton = Skeleton::standard();
  config.validate(skeleton);
  const int n = config.n_samples;
  const int n_test = static_cast<int>(std::lround(n * config.test_fraction));
  const int n_val = std::min(n - n_test, static_cast<int>(std::lround(n * config.val_fraction)));
  const int n_train = n - n_test - n_val;

  std::vector<DatasetRecord> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng = stream_rng(config.seed, static_cast<std::uint64_t>(i));
    DatasetRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "s%06d", i);
    rec.id = id;
    rec.split = i < n_train ? Split::kTrain : (i < n_train + n_val ? Split::kVal : Split::kTest);
    rec.visibility = all_visible(skeleton.size());
    bool ok = false;
    for (int attempt = 0; attempt < config.max_retries && !ok; ++attempt) {
      rec.joints3d = sample_body_pose(config, skeleton, rng);
      if (mds::anthropomorphism_score(rec.joints3d, skeleton) != skeleton.size()) continue;
      const CameraModel cam = sample_camera(config, rng);
      try {
        rec.joints2d = project_camera(rec.joints3d, cam);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kBehindCamera) throw;
        continue;
      }
      rec.joints2d = add_pixel_noise(rec.joints2d, rec.visibility, config.noise_sigma, rng);
      const auto v = rec.joints2d.joints.col(1);
      ok = v.maxCoeff() - v.minCoeff() > 0.0;
    }
    if (!ok) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sample " + std::to_string(i) + " failed after " +
                      std::to_string(config.max_retries) + " draws; widen the ranges");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace edmlift::pipeline
