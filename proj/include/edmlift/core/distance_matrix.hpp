#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "edmlift/core/pose.hpp"

namespace edmlift {

enum class EdmUnits { kNormalized, kPixels, kMillimeters };

/// Square matrix of pairwise joint distances. Construction enforces exact
/// symmetry, a zero diagonal and finite entries; nonnegativity and the
/// triangle inequality are properties reported by `validate_edm`.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(Eigen::MatrixXd values, EdmUnits units);

  static DistanceMatrix zeros(int n, EdmUnits units);

  int size() const { return static_cast<int>(values_.rows()); }
  EdmUnits units() const { return units_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(int m, int n) const { return values_(m, n); }

  friend bool operator==(const DistanceMatrix& a, const DistanceMatrix& b) {
    return a.units_ == b.units_ && a.values_.rows() == b.values_.rows() && a.values_ == b.values_;
  }

 private:
  Eigen::MatrixXd values_;
  EdmUnits units_ = EdmUnits::kMillimeters;
};

/// Pairwise Euclidean distances between the rows of `points` (2 or 3 columns).
DistanceMatrix build_edm(const Eigen::Ref<const Eigen::MatrixXd>& points, EdmUnits units);
DistanceMatrix build_edm(const Pose3D& pose);
/// Units follow the pose: normalized when `pose.normalized()`, pixels otherwise.
DistanceMatrix build_edm(const Pose2D& pose);

/// Zeroes the rows and columns of joints whose visibility flag is false.
DistanceMatrix apply_occlusion(const DistanceMatrix& edm, const Visibility& visibility);

/// Number of entries strictly above the diagonal, N(N-1)/2.
int packed_size(int n_joints);
/// Joint count whose packed size is `length`; throws shape error if none.
int joints_for_packed_size(std::size_t length);

/// Upper triangle, row-major over (m, n) with m < n.
std::vector<double> pack_upper(const DistanceMatrix& edm);
/// Inverse of `pack_upper`. Negative entries are accepted.
DistanceMatrix unpack_upper(std::span<const double> packed, int n_joints, EdmUnits units);

struct EdmDiagnostics {
  double symmetry_residual = 0.0;   ///< max |d(m,n) - d(n,m)|
  double min_entry = 0.0;
  double max_abs_diagonal = 0.0;
  int triangle_violations = 0;      ///< ordered triples (m, n, k) with d(m,n) > d(m,k) + d(k,n)
  double gram_min_eigenvalue = 0.0; ///< of -1/2 J (D o D) J
  double negative_eigen_mass = 0.0; ///< sum of |negative eigenvalues|
  double gram_max_eigenvalue = 0.0;

  /// Gram matrix PSD up to `tolerance` (absolute, scaled by the largest eigenvalue when > 1).
  bool gram_psd(double tolerance = 1e-9) const;
  bool is_valid_edm(double tolerance = 1e-9) const;
};

/// Pure diagnostic over an arbitrary square matrix; never throws for square input.
EdmDiagnostics validate_edm(const Eigen::Ref<const Eigen::MatrixXd>& matrix);

/// -1/2 J (D o D) J with J = I - 11^T / N.
Eigen::MatrixXd double_centered_gram(const Eigen::Ref<const Eigen::MatrixXd>& distances);

}  // namespace edmlift

namespace edmlift {

/// Network input for an observed 2D pose: normalize over the visible joints,
/// build the distance matrix, zero the rows/columns of hidden joints.
DistanceMatrix network_input(const ObservedPose2D& observed);

}  // namespace edmlift
