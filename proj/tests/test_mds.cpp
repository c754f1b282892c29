#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "doctest.h"
#include "edmlift/core/distance_matrix.hpp"
#include "edmlift/core/error.hpp"
#include "edmlift/core/skeleton.hpp"
#include "edmlift/mds/recover.hpp"

using namespace edmlift;
using namespace edmlift::mds;

namespace {

// Kabsch, kept separate from the library's Procrustes on purpose
double rigid_rms(const Points3& a, const Points3& b, bool reflect) {
  const Points3 ca = a.rowwise() - a.colwise().mean();
  const Points3 cb = b.rowwise() - b.colwise().mean();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(ca.transpose() * cb, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if (!reflect && (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) d(2, 2) = -1;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  return std::sqrt(((ca * r.transpose()) - cb).rowwise().squaredNorm().mean());
}

Points3 random_points(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Points3 p(n, 3);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) p(i, k) = u(rng);
  return p;
}

// Standing pose, x to the body's left, y up, z forward. Elbows bend the
// forearm forward, knees bend the shank back, both by `flex` rad.
Pose3D neutral_pose(double flex = 1.0) {
  using namespace joints;
  Points3 p(14, 3);
  p.row(kNeck) << 0, 0, 0;
  p.row(kHead) << 0, 220, 30;
  p.row(kRightShoulder) << -180, 0, 0;
  p.row(kLeftShoulder) << 180, 0, 0;
  p.row(kRightElbow) << -180, -300, 0;
  p.row(kLeftElbow) << 180, -300, 0;
  const Eigen::RowVector3d fore(0, -260 * std::cos(flex), 260 * std::sin(flex));
  p.row(kRightWrist) = p.row(kRightElbow) + fore;
  p.row(kLeftWrist) = p.row(kLeftElbow) + fore;
  p.row(kRightHip) << -100, -520, 0;
  p.row(kLeftHip) << 100, -520, 0;
  p.row(kRightKnee) << -100, -970, 0;
  p.row(kLeftKnee) << 100, -970, 0;
  const Eigen::RowVector3d shank(0, -430 * std::cos(flex), -430 * std::sin(flex));
  p.row(kRightAnkle) = p.row(kRightKnee) + shank;
  p.row(kLeftAnkle) = p.row(kLeftKnee) + shank;
  return Pose3D{p};
}

}  // namespace

TEST_CASE("classical MDS") {
  SUBCASE("unit square") {
    Points3 sq(4, 3);
    sq << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
    const Pose3D out = classical_mds(build_edm(sq, EdmUnits::kNormalized));
    CHECK(rigid_rms(out.joints, sq, true) < 1e-9);
    CHECK(out.joints.colwise().mean().norm() < 1e-12);
    const Eigen::MatrixXd back = build_edm(out.joints, EdmUnits::kNormalized).values();
    CHECK((back - build_edm(sq, EdmUnits::kNormalized).values()).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("zero matrix puts every point at the origin") {
    const Pose3D out = classical_mds(DistanceMatrix::zeros(5, EdmUnits::kMillimeters));
    CHECK(out.joints.isZero(0.0));
  }
  SUBCASE("collinear points have no third dimension") {
    Points3 line(5, 3);
    for (int i = 0; i < 5; ++i) line.row(i) << 1.0 * i, 2.0 * i, -0.5 * i;
    const Pose3D out = classical_mds(build_edm(line, EdmUnits::kNormalized));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.joints);
    CHECK(svd.singularValues()(1) < 1e-6);
    CHECK(svd.singularValues()(2) < 1e-6);
  }
}

TEST_CASE("refinement") {
  std::mt19937_64 rng(17);
  SUBCASE("starting at the truth needs no step") {
    const Points3 p = random_points(14, rng);
    const DistanceMatrix d = build_edm(p, EdmUnits::kNormalized);
    const Points3 c = p.rowwise() - p.colwise().mean();
    const RecoveryResult r = refine_stress(Pose3D{c}, d);
    CHECK(r.edm_residual < 1e-12);
    CHECK(r.iterations == 0);
  }
  SUBCASE("exact inputs from classical MDS") {
    for (int i = 0; i < 50; ++i) {
      const DistanceMatrix d = build_edm(random_points(14, rng), EdmUnits::kNormalized);
      const RecoveryResult r = refine_stress(classical_mds(d), d);
      CHECK(r.edm_residual <= 1e-8);
    }
  }
  SUBCASE("noisy inputs descend monotonically") {
    std::normal_distribution<double> g(0.0, 0.01);
    for (int i = 0; i < 20; ++i) {
      Eigen::MatrixXd v = build_edm(random_points(14, rng), EdmUnits::kNormalized).values();
      for (int m = 0; m < 14; ++m)
        for (int n = m + 1; n < 14; ++n) v(m, n) = v(n, m) = v(m, n) * (1.0 + g(rng));
      const DistanceMatrix d(v, EdmUnits::kNormalized);
      std::vector<double> trace;
      const RecoveryResult r = refine_stress(classical_mds(d), d, {}, &trace);
      CHECK(r.surrogate < r.initial_surrogate);
      CHECK(trace.front() == r.initial_surrogate);
      for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1]);
      CHECK(stress_surrogate(r.pose.joints, d) == doctest::Approx(r.surrogate).epsilon(1e-12));
    }
  }
}

TEST_CASE("objectives on a hand example") {
  Points3 p(2, 3);
  p << 0, 0, 0, 2, 0, 0;
  Eigen::MatrixXd v(2, 2);
  v << 0, 1, 1, 0;
  const DistanceMatrix d(v, EdmUnits::kNormalized);
  // |4 - 1| counted for (0,1) and (1,0); squared residual once
  CHECK(edm_residual(p, d) == 6.0);
  CHECK(stress_surrogate(p, d) == 9.0);
}

TEST_CASE("anthropomorphism") {
  const Skeleton sk = Skeleton::standard();
  const Pose3D pose = neutral_pose();
  CHECK(anthropomorphism_score(pose, sk) == 14);
  CHECK(anthropomorphism_score(mirror(pose), sk) <= 12);

  Pose3D straight = neutral_pose(0.0);
  CHECK(anthropomorphism_score(straight, sk) == 10);  // pi is past the upper limit

  Pose3D stub = pose;
  stub.joints.row(joints::kLeftWrist) = stub.joints.row(joints::kLeftElbow);
  CHECK(anthropomorphism_score(stub, sk) == 13);
}

TEST_CASE("recover_pose picks the generating chirality") {
  const Skeleton sk = Skeleton::standard();
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (double flex : {0.4, 1.0, 1.8}) {
    Pose3D pose = neutral_pose(flex);
    // arbitrary rigid motion of the truth; chirality is intrinsic
    Eigen::Matrix3d r = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized().toRotationMatrix();
    pose.joints = (pose.joints * r.transpose()).rowwise() + Eigen::RowVector3d(300, 10, 4000);
    const RecoveryResult out = recover_pose(build_edm(pose), sk);
    CHECK(out.scores[0] != out.scores[1]);
    CHECK(anthropomorphism_score(out.pose, sk) == 14);
    CHECK(rigid_rms(out.pose.joints, pose.joints, false) < 1e-6);
  }
}

TEST_CASE("planar pose: mirror is a rotation, tie keeps the original") {
  const Skeleton sk = Skeleton::standard();
  Pose3D flat = neutral_pose();
  flat.joints.col(2).setZero();
  const RecoveryResult a = recover_pose(build_edm(flat), sk);
  const RecoveryResult b = recover_pose(build_edm(flat), sk);
  // rank-2 Gram; the flat direction converges slowly. 1e-5 mm on a 1.7 m body
  CHECK(rigid_rms(a.pose.joints, flat.joints, true) < 1e-5);
  CHECK(a.chirality == b.chirality);
  if (a.scores[0] == a.scores[1]) CHECK(a.chirality == Chirality::kOriginal);
}

TEST_CASE("recover_pose wants a complete matrix") {
  Eigen::MatrixXd v = build_edm(neutral_pose()).values();
  for (int j : {4, 9}) {
    v.row(j).setZero();
    v.col(j).setZero();
  }
  try {
    recover_pose(DistanceMatrix(v, EdmUnits::kMillimeters), Skeleton::standard());
    FAIL("zero rows accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIncompleteMatrix);
  }
  RecoveryOptions lax;
  lax.reject_zero_rows = false;
  CHECK_NOTHROW(recover_pose(DistanceMatrix(v, EdmUnits::kMillimeters), Skeleton::standard(), lax));
}

TEST_CASE("options are validated") {
  RecoveryOptions o;
  o.backtrack = 1.5;
  CHECK_THROWS_AS(o.validate(), Error);
}
