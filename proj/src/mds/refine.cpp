#include <cmath>
#include <limits>
#include <string>

#include "edmlift/core/error.hpp"
#include "edmlift/mds/recover.hpp"

namespace edmlift::mds {
namespace {

Points3 surrogate_gradient(const Points3& p, const Eigen::MatrixXd& d) {
  const Eigen::Index n = p.rows();
  Points3 g = Points3::Zero(n, 3);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = m + 1; k < n; ++k) {
      const Eigen::RowVector3d diff = p.row(m) - p.row(k);
      const double r = diff.squaredNorm() - d(m, k) * d(m, k);
      g.row(m) += 4.0 * r * diff;
      g.row(k) -= 4.0 * r * diff;
    }
  }
  return g;
}

void require_matching(const Points3& points, const DistanceMatrix& edm) {
  if (points.rows() != edm.size()) {
    throw Error(ErrorCode::kShape, "pose has " + std::to_string(points.rows()) +
                                       " joints, matrix is " + std::to_string(edm.size()) + "x" +
                                       std::to_string(edm.size()));
  }
}

}  // namespace

void RecoveryOptions::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (!(relative_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "relative tolerance must be > 0");
  }
  if (!(backtrack > 0.0 && backtrack < 1.0) || !(armijo > 0.0 && armijo < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "line-search parameters must lie in (0, 1)");
  }
  if (embed_dim != 3) throw Error(ErrorCode::kInvalidArgument, "only 3D embeddings are supported");
}

double stress_surrogate(const Points3& points, const DistanceMatrix& edm) {
  require_matching(points, edm);
  double s = 0.0;
  for (Eigen::Index m = 0; m < points.rows(); ++m) {
    for (Eigen::Index k = m + 1; k < points.rows(); ++k) {
      const double r = (points.row(m) - points.row(k)).squaredNorm() - edm(m, k) * edm(m, k);
      s += r * r;
    }
  }
  return s;
}

double edm_residual(const Points3& points, const DistanceMatrix& edm) {
  require_matching(points, edm);
  double s = 0.0;
  for (Eigen::Index m = 0; m < points.rows(); ++m) {
    for (Eigen::Index k = 0; k < points.rows(); ++k) {
      s += std::abs((points.row(m) - points.row(k)).squaredNorm() - edm(m, k) * edm(m, k));
    }
  }
  return s;
}

RecoveryResult refine_stress(const Pose3D& init, const DistanceMatrix& edm,
                             const RecoveryOptions& options, std::vector<double>* surrogate_trace) {
  options.validate();
  require_finite(init.joints, "initial pose");
  require_matching(init.joints, edm);

  Points3 p = init.joints;
  double s = stress_surrogate(p, edm);
  if (!std::isfinite(s)) throw Error(ErrorCode::kNumericFailure, "stress surrogate is not finite");
  RecoveryResult result;
  result.initial_surrogate = s;
  if (surrogate_trace) surrogate_trace->assign(1, s);

  Points3 g = surrogate_gradient(p, edm.values());
  Points3 prev_p, prev_g;
  // First trial step: move the fastest point by ~1% of the configuration size.
  const double size = std::max(1e-12, (p.rowwise() - p.colwise().mean()).norm());
  double step = g.norm() > 0.0 ? 1e-2 * size / g.norm() : 0.0;

  // below this the squared-distance residuals are rounding noise
  const double d2max = edm.values().cwiseAbs2().maxCoeff();
  const double n_pairs = 0.5 * edm.size() * (edm.size() - 1);
  const double eps = std::numeric_limits<double>::epsilon();
  const double noise_floor = n_pairs * (64.0 * eps * d2max) * (64.0 * eps * d2max);

  int accepted = 0;
  for (int it = 0; it < options.max_iterations && s > noise_floor; ++it) {
    const double gg = g.squaredNorm();
    if (gg == 0.0) break;
    if (accepted > 0) {
      // Barzilai-Borwein step as the first trial of the line search.
      const Points3 dp = p - prev_p;
      const Points3 dg = g - prev_g;
      const double curvature = (dp.array() * dg.array()).sum();
      step = curvature > 0.0 ? dp.squaredNorm() / curvature : 2.0 * step;
    }

    bool found = false;
    Points3 trial;
    double trial_s = s;
    for (int k = 0; k < options.max_backtracks; ++k, step *= options.backtrack) {
      trial = p - step * g;
      trial_s = stress_surrogate(trial, edm);
      if (!std::isfinite(trial_s)) continue;
      if (trial_s <= s - options.armijo * step * gg) {
        found = true;
        break;
      }
    }
    if (!found) break;

    prev_p = std::move(p);
    prev_g = std::move(g);
    p = std::move(trial);
    const double decrease = s - trial_s;
    s = trial_s;
    ++accepted;
    if (surrogate_trace) surrogate_trace->push_back(s);
    if (decrease <= options.relative_tolerance * (s + decrease)) break;
    g = surrogate_gradient(p, edm.values());
  }

  p.rowwise() -= p.colwise().mean();
  result.pose.joints = std::move(p);
  result.surrogate = stress_surrogate(result.pose.joints, edm);
  result.edm_residual = edm_residual(result.pose.joints, edm);
  if (!std::isfinite(result.edm_residual)) {
    throw Error(ErrorCode::kNumericFailure, "objective is not finite after refinement");
  }
  result.iterations = accepted;
  return result;
}

}  // namespace edmlift::mds
