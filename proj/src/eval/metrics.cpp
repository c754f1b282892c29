#include "edmlift/eval/metrics.hpp"

#include "edmlift/core/error.hpp"
#include "edmlift/eval/procrustes.hpp"

namespace edmlift::eval {

Eigen::VectorXd joint_errors(const Pose3D& pred, const Pose3D& gt, const MetricOptions& options) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kShape, "prediction has " + std::to_string(pred.size()) +
                                       " joints, ground truth " + std::to_string(gt.size()));
  }
  if (options.aligned) {
    return procrustes_align(pred, gt, options.allow_reflection, options.allow_scale).residuals;
  }
  return (pred.joints - gt.joints).rowwise().norm();
}

double mpjpe(const Pose3D& pred, const Pose3D& gt, bool aligned, bool allow_reflection) {
  return joint_errors(pred, gt, {aligned, allow_reflection, false}).mean();
}

MetricsAccumulator::MetricsAccumulator(int n_joints, MetricOptions options)
    : options_(options), joint_sum_(n_joints, 0.0) {}

void MetricsAccumulator::add(const Pose3D& pred, const Pose3D& gt, const Visibility& visibility) {
  const int n = static_cast<int>(joint_sum_.size());
  if (gt.size() != n) throw Error(ErrorCode::kShape, "ground truth has the wrong joint count");
  if (!visibility.empty() && static_cast<int>(visibility.size()) != n) {
    throw Error(ErrorCode::kShape, "visibility has the wrong length");
  }
  Eigen::VectorXd err;
  try {
    err = joint_errors(pred, gt, options_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateAlignment) throw;
    ++degenerate_;
    const Points3 shifted = pred.joints.rowwise() +
                            (gt.joints.colwise().mean() - pred.joints.colwise().mean());
    err = (shifted - gt.joints).rowwise().norm();
  }
  for (int j = 0; j < n; ++j) {
    joint_sum_[j] += err(j);
    if (!visibility.empty() && !visibility[j]) {
      occluded_sum_ += err(j);
      ++occluded_count_;
    } else {
      visible_sum_ += err(j);
      ++visible_count_;
    }
  }
  ++samples_;
}

MetricsReport MetricsAccumulator::report(const std::string& protocol) const {
  if (samples_ == 0) throw Error(ErrorCode::kInvalidArgument, "no samples were evaluated");
  MetricsReport r;
  r.protocol = protocol;
  r.samples = samples_;
  r.degenerate_alignments = degenerate_;
  double total = 0.0;
  for (double s : joint_sum_) {
    r.per_joint.push_back(s / samples_);
    total += s / samples_;
  }
  r.mpjpe = total / static_cast<double>(joint_sum_.size());
  r.occluded_joints = occluded_count_;
  if (occluded_count_ > 0) {
    r.occluded_mpjpe = occluded_sum_ / static_cast<double>(occluded_count_);
    r.visible_mpjpe = visible_sum_ / static_cast<double>(visible_count_);
  }
  return r;
}

nlohmann::json MetricsReport::to_json(const Skeleton& skeleton) const {
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t j = 0; j < per_joint.size(); ++j) {
    per[skeleton.name(static_cast<int>(j))] = per_joint[j];
  }
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"protocol", protocol},
          {"samples", samples},
          {"mpjpe_mm", mpjpe},
          {"per_joint_mm", per},
          {"occluded_mpjpe_mm", opt(occluded_mpjpe)},
          {"visible_mpjpe_mm", opt(visible_mpjpe)},
          {"occluded_joints", occluded_joints},
          {"degenerate_alignments", degenerate_alignments},
          {"baseline_mpjpe_mm", opt(baseline_mpjpe)}};
}

DistanceMatrix mean_edm(std::span<const Pose3D> poses) {
  if (poses.empty()) throw Error(ErrorCode::kInvalidArgument, "mean of zero distance matrices");
  Eigen::MatrixXd sum = build_edm(poses.front()).values();
  for (std::size_t i = 1; i < poses.size(); ++i) sum += build_edm(poses[i]).values();
  sum /= static_cast<double>(poses.size());
  return DistanceMatrix(0.5 * (sum + sum.transpose()), EdmUnits::kMillimeters);
}

}  // namespace edmlift::eval
