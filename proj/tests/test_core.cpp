#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "doctest.h"
#include "edmlift/core/distance_matrix.hpp"
#include "edmlift/core/error.hpp"
#include "edmlift/core/pose.hpp"
#include "edmlift/core/random.hpp"
#include "edmlift/core/skeleton.hpp"

using namespace edmlift;

namespace {

Points3 random_points(int n, std::mt19937_64& rng, double half = 1.0) {
  std::uniform_real_distribution<double> u(-half, half);
  Points3 p(n, 3);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) p(i, k) = u(rng);
  return p;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an edmlift::Error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("build_edm on a 3-4-5 triangle") {
  Points3 p(3, 3);
  p << 0, 0, 0, 3, 0, 0, 3, 4, 0;
  const DistanceMatrix d = build_edm(p, EdmUnits::kMillimeters);
  CHECK(d(0, 1) == 3.0);
  CHECK(d(1, 2) == 4.0);
  CHECK(d(0, 2) == 5.0);
  for (int i = 0; i < 3; ++i) CHECK(d(i, i) == 0.0);
  CHECK(d.values() == d.values().transpose());
}

TEST_CASE("build_edm of one point is [0]") {
  Points3 p(1, 3);
  p << 7, 7, 7;
  const DistanceMatrix d = build_edm(p, EdmUnits::kMillimeters);
  REQUIRE(d.size() == 1);
  CHECK(d(0, 0) == 0.0);
}

TEST_CASE("build_edm rejects non-finite coordinates") {
  Points3 p = Points3::Zero(3, 3);
  p(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { build_edm(p, EdmUnits::kMillimeters); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("build_edm is invariant to rigid motion and homogeneous in scale") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Points3 p = random_points(14, rng, 500.0);
    Eigen::Matrix3d r = random_rotation(rng);
    if (trial % 2) r.col(0) *= -1.0;  // reflections too
    const Eigen::RowVector3d t(120.0, -40.0, 900.0);
    const Points3 q = (p * r.transpose()).rowwise() + t;
    const Eigen::MatrixXd a = build_edm(p, EdmUnits::kMillimeters).values();
    const Eigen::MatrixXd b = build_edm(q, EdmUnits::kMillimeters).values();
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * a.maxCoeff());

    const Eigen::MatrixXd s = build_edm(Points3(2.5 * p), EdmUnits::kMillimeters).values();
    CHECK((s - 2.5 * a).cwiseAbs().maxCoeff() <= 4 * std::numeric_limits<double>::epsilon() * s.maxCoeff());
  }
}

TEST_CASE("normalize_2d maps the vertical span onto [-1, 1]") {
  Pose2D pose;
  pose.joints.resize(4, 2);
  pose.joints << 10, 100, 30, 300, 20, 200, 50, 150;
  const Pose2D n = normalize_2d(pose);
  REQUIRE(n.normalized());
  CHECK(n.norm->scale == doctest::Approx(0.01));
  CHECK(n.joints(0, 1) == doctest::Approx(-1.0));
  CHECK(n.joints(1, 1) == doctest::Approx(1.0));
  CHECK(n.joints(2, 1) == doctest::Approx(0.0));
  // horizontal: same scale about the midpoint of [10, 50]
  CHECK(n.joints(0, 0) == doctest::Approx((10.0 - 30.0) * 0.01));
  CHECK(n.joints.col(1).minCoeff() == -1.0);
  CHECK(n.joints.col(1).maxCoeff() == 1.0);

  SUBCASE("translation does not change the result") {
    Pose2D moved = pose;
    moved.joints.array() += 50.0;
    const Pose2D m = normalize_2d(moved);
    CHECK((m.joints - n.joints).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("second normalization is refused") {
    CHECK_THROWS_AS(normalize_2d(n), Error);
  }
  SUBCASE("inverse recovers the pixels") {
    CHECK((denormalize_2d(n).joints - pose.joints).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("normalize_2d with no vertical extent is degenerate") {
  Pose2D pose;
  pose.joints.resize(4, 2);
  pose.joints << 0, 5, 1, 5, 2, 5, 3, 5;
  CHECK(code_of([&] { normalize_2d(pose); }) == ErrorCode::kDegeneratePose);
}

TEST_CASE("normalize_2d uses only visible joints for the span") {
  Pose2D pose;
  pose.joints.resize(5, 2);
  pose.joints << 0, 0, 1, 10, 2, 20, 3, 30, 4, 1000;
  Visibility vis = all_visible(5);
  vis[4] = false;
  const Pose2D n = normalize_2d(pose, vis);
  CHECK(n.joints(0, 1) == doctest::Approx(-1.0));
  CHECK(n.joints(3, 1) == doctest::Approx(1.0));
}

TEST_CASE("apply_occlusion zeroes rows and columns") {
  std::mt19937_64 rng(3);
  const DistanceMatrix d = build_edm(random_points(14, rng), EdmUnits::kNormalized);

  SUBCASE("single joint") {
    Visibility vis = all_visible(14);
    vis[3] = false;
    const DistanceMatrix o = apply_occlusion(d, vis);
    for (int k = 0; k < 14; ++k) {
      CHECK(o(3, k) == 0.0);
      CHECK(o(k, 3) == 0.0);
    }
    for (int m = 0; m < 14; ++m)
      for (int n = 0; n < 14; ++n)
        if (m != 3 && n != 3) CHECK(o(m, n) == d(m, n));
    CHECK(apply_occlusion(o, vis) == o);
  }
  SUBCASE("all visible is the identity") {
    CHECK(apply_occlusion(d, all_visible(14)) == d);
  }
  SUBCASE("a limb group gives two zero rows") {
    const Skeleton sk = Skeleton::standard();
    Visibility vis = all_visible(14);
    for (int j : sk.limb_group("right_arm")) vis[j] = false;
    const DistanceMatrix o = apply_occlusion(d, vis);
    int zero_rows = 0;
    for (int m = 0; m < 14; ++m) zero_rows += o.values().row(m).isZero(0.0);
    CHECK(zero_rows == 2);
    CHECK(o.values() == o.values().transpose());
  }
  SUBCASE("fewer than four visible joints is refused") {
    Visibility vis(14, false);
    vis[0] = vis[1] = vis[2] = true;
    CHECK(code_of([&] { apply_occlusion(d, vis); }) == ErrorCode::kTooFewObservations);
  }
}

TEST_CASE("upper-triangle codec") {
  CHECK(packed_size(14) == 91);
  CHECK(joints_for_packed_size(91) == 14);
  std::mt19937_64 rng(5);
  const DistanceMatrix d = build_edm(random_points(14, rng), EdmUnits::kNormalized);
  const std::vector<double> v = pack_upper(d);
  REQUIRE(v.size() == 91);
  CHECK(v[0] == d(0, 1));
  CHECK(v[13] == d(1, 2));  // row 0 holds 13 entries
  CHECK(unpack_upper(v, 14, EdmUnits::kNormalized) == d);

  const DistanceMatrix z = DistanceMatrix::zeros(14, EdmUnits::kNormalized);
  const std::vector<double> zv = pack_upper(z);
  CHECK(std::all_of(zv.begin(), zv.end(), [](double x) { return x == 0.0; }));
  CHECK(unpack_upper(std::vector<double>(91, 0.0), 14, EdmUnits::kNormalized) == z);

  CHECK(code_of([] { unpack_upper(std::vector<double>(90, 1.0), 14, EdmUnits::kNormalized); }) ==
        ErrorCode::kShape);
  std::vector<double> neg(91, 1.0);
  neg[4] = -2.0;
  const DistanceMatrix u = unpack_upper(neg, 14, EdmUnits::kNormalized);
  CHECK(validate_edm(u.values()).min_entry == -2.0);
}

TEST_CASE("validate_edm diagnostics") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const DistanceMatrix d = build_edm(random_points(14, rng, 300.0), EdmUnits::kMillimeters);
    const EdmDiagnostics diag = validate_edm(d.values());
    CHECK(diag.triangle_violations == 0);
    CHECK(diag.symmetry_residual == 0.0);
    // scale-free PSD check on the Gram matrix
    CHECK(diag.gram_min_eigenvalue >= -1e-9 * std::max(1.0, diag.gram_max_eigenvalue));
  }

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(4, 4);
  bad(1, 2) = bad(2, 1) = 10.0;
  bad(1, 3) = bad(3, 1) = 1.0;
  bad(3, 2) = bad(2, 3) = 1.0;
  CHECK(validate_edm(bad).triangle_violations > 0);
  CHECK_FALSE(validate_edm(bad).is_valid_edm());

  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(3, 3);
  asym(0, 1) = 1.0;
  asym(1, 0) = 1.5;
  CHECK(validate_edm(asym).symmetry_residual == doctest::Approx(0.5));
}

TEST_CASE("double-centred Gram of a point EDM is PSD") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const Points3 p = random_points(14, rng);
    const Eigen::MatrixXd g = double_centered_gram(build_edm(p, EdmUnits::kNormalized).values());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    // independent check: Gram of the centred points
    const Points3 c = p.rowwise() - p.colwise().mean();
    CHECK((g - c * c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("standard skeleton") {
  const Skeleton sk = Skeleton::standard();
  CHECK(sk.size() == 14);
  CHECK(sk.name(sk.root()) == "neck");
  CHECK(sk.limb_group("right_arm") == std::array<int, 2>{joints::kRightElbow, joints::kRightWrist});
  CHECK(sk.limb_group("left_leg") == std::array<int, 2>{joints::kLeftKnee, joints::kLeftAnkle});
  for (const auto& [name, group] : sk.limb_groups()) CHECK(group[0] != group[1]);
  CHECK(sk.hinge_limits().size() == 4);
  // tree: every joint reaches the root
  for (int j = 0; j < sk.size(); ++j) {
    int k = j, steps = 0;
    while (k != sk.root() && steps++ < 20) k = sk.parent(k);
    CHECK(k == sk.root());
  }

  const Skeleton back = Skeleton::from_json(sk.to_json());
  CHECK(back.names() == sk.names());
  CHECK(back.to_json() == sk.to_json());
}

TEST_CASE("skeleton definition errors") {
  nlohmann::json doc = Skeleton::standard().to_json();
  doc["names"][3] = "right_shoulder";
  CHECK_THROWS_AS(Skeleton::from_json(doc), Error);

  doc = Skeleton::standard().to_json();
  doc["parents"][1] = 0;  // head <-> neck cycle, no root
  CHECK_THROWS_AS(Skeleton::from_json(doc), Error);
}

TEST_CASE("observed pose needs four visible joints") {
  ObservedPose2D obs;
  obs.pose.joints = Points2::Ones(14, 2);
  obs.visibility = Visibility(14, false);
  obs.visibility[0] = obs.visibility[1] = obs.visibility[2] = true;
  CHECK(code_of([&] { obs.validate(); }) == ErrorCode::kTooFewObservations);
}

TEST_CASE("pixel noise replays for a fixed stream") {
  Pose2D pose;
  pose.joints = Points2::Zero(14, 2);
  Rng a = stream_rng(4, 17), b = stream_rng(4, 17);
  const Pose2D x = add_pixel_noise(pose, all_visible(14), 3.0, a);
  const Pose2D y = add_pixel_noise(pose, all_visible(14), 3.0, b);
  CHECK(x.joints == y.joints);
  Rng c = stream_rng(4, 18);
  CHECK(add_pixel_noise(pose, all_visible(14), 3.0, c).joints != x.joints);
}

TEST_CASE("error text carries the kind") {
  const Error e(ErrorCode::kInvalidArgument, "bad n");
  CHECK(std::string(e.what()) == "invalid-argument: bad n");
}
