#include "edmlift/eval/ambiguity.hpp"

#include <cmath>

#include "edmlift/core/distance_matrix.hpp"
#include "edmlift/core/error.hpp"

namespace edmlift::eval {
namespace {

Eigen::MatrixXd unit_frobenius(Eigen::MatrixXd m) {
  const double norm = m.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::kDegeneratePose, "pose has all joints coincident");
  return m / norm;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kShape, "correlated series differ in length");
  if (x.size() < 2) throw Error(ErrorCode::kCorrelationUndefined, "need at least two samples");
  const Eigen::Map<const Eigen::ArrayXd> a(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Map<const Eigen::ArrayXd> b(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::ArrayXd da = a - a.mean();
  const Eigen::ArrayXd db = b - b.mean();
  const double sa = da.square().sum();
  const double sb = db.square().sum();
  if (!(sa > 0.0) || !(sb > 0.0)) {
    throw Error(ErrorCode::kCorrelationUndefined, "a series has zero variance");
  }
  return (da * db).sum() / std::sqrt(sa * sb);
}

Eigen::MatrixXd normalized_coordinates(const Eigen::Ref<const Eigen::MatrixXd>& points) {
  return unit_frobenius(points.rowwise() - points.colwise().mean());
}

Eigen::MatrixXd normalized_edm(const Eigen::Ref<const Eigen::MatrixXd>& points) {
  return unit_frobenius(build_edm(points, EdmUnits::kMillimeters).values());
}

AmbiguityResult ambiguity_correlation(std::span<const Pose2D> poses2d,
                                      std::span<const Pose3D> poses3d, int n_pairs, Rng& rng) {
  if (poses2d.size() != poses3d.size()) {
    throw Error(ErrorCode::kShape, "2D and 3D pose lists differ in length");
  }
  if (poses2d.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two poses");
  if (n_pairs < 100) throw Error(ErrorCode::kInvalidArgument, "need at least 100 pairs");

  const int n = static_cast<int>(poses2d.size());
  std::vector<Eigen::MatrixXd> c2(n), c3(n), e2(n), e3(n);
  for (int i = 0; i < n; ++i) {
    c2[i] = normalized_coordinates(poses2d[i].joints);
    c3[i] = normalized_coordinates(poses3d[i].joints);
    e2[i] = normalized_edm(poses2d[i].joints);
    e3[i] = normalized_edm(poses3d[i].joints);
  }

  AmbiguityResult out;
  std::uniform_int_distribution<int> first(0, n - 1), second(0, n - 2);
  std::vector<double> x_cart, y_cart, x_edm, y_edm;
  for (int k = 0; k < n_pairs; ++k) {
    const int i = first(rng);
    int j = second(rng);
    if (j >= i) ++j;
    const ScatterPoint cart{i, j, (c3[i] - c3[j]).norm(), (c2[i] - c2[j]).norm()};
    const ScatterPoint edm{i, j, (e3[i] - e3[j]).norm(), (e2[i] - e2[j]).norm()};
    out.cartesian.push_back(cart);
    out.edm.push_back(edm);
    x_cart.push_back(cart.d2);
    y_cart.push_back(cart.d3);
    x_edm.push_back(edm.d2);
    y_edm.push_back(edm.d3);
  }
  out.pearson_cartesian = pearson(x_cart, y_cart);
  out.pearson_edm = pearson(x_edm, y_edm);
  return out;
}

}  // namespace edmlift::eval
