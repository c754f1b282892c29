#include <cmath>
#include <map>
#include <random>

#include <Eigen/Geometry>

#include "doctest.h"
#include "edmlift/core/distance_matrix.hpp"
#include "edmlift/core/error.hpp"
#include "edmlift/core/skeleton.hpp"
#include "edmlift/eval/ambiguity.hpp"
#include "edmlift/eval/corruption.hpp"
#include "edmlift/eval/lifter.hpp"
#include "edmlift/eval/metrics.hpp"
#include "edmlift/eval/procrustes.hpp"
#include "edmlift/eval/protocol.hpp"
#include "edmlift/nn/network.hpp"

using namespace edmlift;
using namespace edmlift::eval;

namespace {

Pose3D random_pose(std::mt19937_64& rng, double half = 500.0) {
  std::uniform_real_distribution<double> u(-half, half);
  Pose3D p;
  p.joints.resize(14, 3);
  for (int i = 0; i < 14; ++i)
    for (int k = 0; k < 3; ++k) p.joints(i, k) = u(rng);
  return p;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized().toRotationMatrix();
}

Pose2D flat_view(const Pose3D& p) {
  Pose2D out;
  out.joints = p.joints.leftCols(2).array() + 500.0;
  return out;
}

}  // namespace

TEST_CASE("procrustes") {
  std::mt19937_64 rng(1);
  const Pose3D src = random_pose(rng);

  SUBCASE("identical poses") {
    const AlignmentResult r = procrustes_align(src, src);
    CHECK(r.residuals.isZero(0.0));
    CHECK(r.rotation == Eigen::Matrix3d::Identity());
  }
  SUBCASE("known rigid motion") {
    const Eigen::Matrix3d rot = random_rotation(rng);
    const Eigen::Vector3d t(10, -250, 3000);
    Pose3D dst;
    dst.joints = (src.joints * rot.transpose()).rowwise() + t.transpose();
    const AlignmentResult r = procrustes_align(src, dst);
    CHECK(r.residuals.maxCoeff() < 1e-9);
    CHECK((r.rotation - rot).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((r.translation - t).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("mirror image") {
    Pose3D dst = src;
    dst.joints.col(0) *= -1.0;
    CHECK(procrustes_align(src, dst, false).residuals.maxCoeff() > 1.0);
    CHECK(procrustes_align(src, dst, true).residuals.maxCoeff() < 1e-9);
  }
  SUBCASE("uniform scale when allowed") {
    Pose3D dst = src;
    dst.joints *= 1.7;
    CHECK(procrustes_align(src, dst, false, true).scale == doctest::Approx(1.7));
    CHECK(procrustes_align(src, dst, false, true).residuals.maxCoeff() < 1e-9);
  }
  SUBCASE("collinear joints are degenerate") {
    Pose3D line = src;
    for (int i = 0; i < 14; ++i) line.joints.row(i) << i, 2.0 * i, 0.0;
    try {
      procrustes_align(line, src);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDegenerateAlignment);
    }
  }
}

TEST_CASE("mpjpe") {
  std::mt19937_64 rng(2);
  const Pose3D gt = random_pose(rng);
  CHECK(mpjpe(gt, gt) == 0.0);
  Pose3D moved = gt;
  moved.joints.col(0).array() += 10.0;
  CHECK(mpjpe(moved, gt, false) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(mpjpe(moved, gt, true) < 1e-9);

  // hand-computed: one joint off by (3, 4, 0)
  Pose3D one = gt;
  one.joints.row(5) += Eigen::RowVector3d(3, 4, 0);
  CHECK(mpjpe(one, gt, false) == doctest::Approx(5.0 / 14.0));
  const Eigen::VectorXd e = joint_errors(one, gt, {false, false, false});
  CHECK(e(5) == doctest::Approx(5.0));
}

TEST_CASE("metrics accumulator splits hidden and seen joints") {
  std::mt19937_64 rng(3);
  const Pose3D gt = random_pose(rng);
  Pose3D pred = gt;
  pred.joints.row(2) += Eigen::RowVector3d(0, 0, 7);
  Visibility vis = all_visible(14);
  vis[2] = false;
  MetricsAccumulator acc(14, {false, false, false});
  acc.add(pred, gt, vis);
  acc.add(gt, gt, vis);
  const MetricsReport r = acc.report("occlusion:random2");
  CHECK(r.samples == 2);
  CHECK(r.occluded_joints == 2);
  REQUIRE(r.occluded_mpjpe);
  CHECK(*r.occluded_mpjpe == doctest::Approx(3.5));
  CHECK(*r.visible_mpjpe == 0.0);
  CHECK(r.per_joint[2] == doctest::Approx(3.5));
  CHECK(r.mpjpe == doctest::Approx(7.0 / 28.0));
  const auto j = r.to_json(Skeleton::standard());
  CHECK(j.at("per_joint_mm").at("right_shoulder").get<double>() == doctest::Approx(3.5));
  CHECK(j.at("protocol") == "occlusion:random2");
}

TEST_CASE("degenerate predictions fall back to translation") {
  std::mt19937_64 rng(4);
  const Pose3D gt = random_pose(rng);
  Pose3D collapsed;
  collapsed.joints = Points3::Zero(14, 3);
  MetricsAccumulator acc(14);
  acc.add(collapsed, gt);
  const MetricsReport r = acc.report();
  CHECK(r.degenerate_alignments == 1);
  const Points3 c = gt.joints.rowwise() - gt.joints.colwise().mean();
  CHECK(r.mpjpe == doctest::Approx(c.rowwise().norm().mean()));
}

TEST_CASE("pixel noise statistics") {
  Pose2D zero;
  zero.joints = Points2::Zero(5000, 2);  // 10,000 coordinates
  Rng rng(5);
  const Pose2D noisy = inject_noise(zero, 10.0, rng);
  const Eigen::ArrayXd v = noisy.joints.reshaped().array();
  const double sd = std::sqrt((v - v.mean()).square().sum() / (v.size() - 1));
  CHECK(std::abs(sd - 10.0) < 0.2);

  Rng again(5);
  CHECK(inject_noise(zero, 10.0, again).joints == noisy.joints);
  Rng any(6);
  CHECK(inject_noise(zero, 0.0, any).joints == zero.joints);
}

TEST_CASE("occlusion masks") {
  const Skeleton sk = Skeleton::standard();
  Rng rng(7);
  auto hidden = [](const Visibility& v) {
    std::vector<int> out;
    for (int j = 0; j < static_cast<int>(v.size()); ++j)
      if (!v[j]) out.push_back(j);
    return out;
  };
  CHECK(hidden(make_occlusion_mask(MaskKind::kRightArm, sk, rng)) ==
        std::vector<int>{joints::kRightElbow, joints::kRightWrist});
  CHECK(hidden(make_occlusion_mask(MaskKind::kLeftLeg, sk, rng)) ==
        std::vector<int>{joints::kLeftKnee, joints::kLeftAnkle});
  CHECK(parse_mask_kind("left_arm") == MaskKind::kLeftArm);
  CHECK_THROWS_AS(parse_mask_kind("tail"), Error);

  // uniform over the 91 unordered pairs: chi-square with 90 dof
  const int draws = 91000;
  std::map<std::pair<int, int>, int> counts;
  for (int i = 0; i < draws; ++i) {
    const auto h = hidden(make_occlusion_mask(MaskKind::kRandom2, sk, rng));
    REQUIRE(h.size() == 2);
    ++counts[{h[0], h[1]}];
  }
  CHECK(counts.size() == 91);
  double chi2 = 0.0;
  for (const auto& [pair, c] : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  CHECK(chi2 < 137.2);  // 0.999 quantile of chi-square(90)
}

TEST_CASE("protocol strings") {
  CHECK(ProtocolSpec::parse("clean").kind == ProtocolSpec::Kind::kClean);
  const ProtocolSpec n = ProtocolSpec::parse("noise:7.5");
  CHECK(n.kind == ProtocolSpec::Kind::kNoise);
  CHECK(n.sigma == 7.5);
  CHECK(ProtocolSpec::parse("occlusion:right_leg").mask == MaskKind::kRightLeg);
  CHECK(ProtocolSpec::parse("occlusion:right_leg").to_string() == "occlusion:right_leg");
  CHECK_THROWS_AS(ProtocolSpec::parse("noise:-1"), Error);
  CHECK_THROWS_AS(ProtocolSpec::parse("blur"), Error);
}

TEST_CASE("apply_protocol replays per sample") {
  const Skeleton sk = Skeleton::standard();
  std::mt19937_64 rng(8);
  const Pose2D raw = flat_view(random_pose(rng));
  const ProtocolSpec spec = ProtocolSpec::parse("occlusion:random2", 3);
  const ObservedPose2D a = apply_protocol(spec, sk, raw, all_visible(14), 12);
  const ObservedPose2D b = apply_protocol(spec, sk, raw, all_visible(14), 12);
  CHECK(a.visibility == b.visibility);
  CHECK(count_visible(a.visibility) == 12);
  const ObservedPose2D c = apply_protocol(ProtocolSpec::parse("clean"), sk, raw, all_visible(14), 0);
  CHECK(c.pose.joints == raw.joints);
}

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{3, 5, 7, 9, 11};
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  const std::vector<double> z{5, 4, 3, 2, 1};
  CHECK(pearson(x, z) == doctest::Approx(-1.0));
  const std::vector<double> flat{2, 2, 2, 2, 2};
  CHECK_THROWS_AS(pearson(x, flat), Error);
}

TEST_CASE("ambiguity: rotations vanish in the EDM view only") {
  std::mt19937_64 rng(9);
  const Pose3D base = random_pose(rng);
  std::vector<Pose3D> p3;
  std::vector<Pose2D> p2;
  for (int i = 0; i < 30; ++i) {
    Pose3D p;
    p.joints = base.joints * random_rotation(rng).transpose();
    p3.push_back(p);
    p2.push_back(flat_view(p));
  }
  Rng pick(1);
  const AmbiguityResult r = ambiguity_correlation(p2, p3, 200, pick);
  REQUIRE(r.edm.size() == 200);
  double edm_max = 0.0, cart_min = 1e9;
  for (std::size_t k = 0; k < r.edm.size(); ++k) {
    if (r.edm[k].i == r.edm[k].j) continue;
    edm_max = std::max(edm_max, r.edm[k].d3);
    cart_min = std::min(cart_min, r.cartesian[k].d3);
  }
  CHECK(edm_max < 1e-12);
  CHECK(cart_min > 0.0);
  CHECK_THROWS_AS(ambiguity_correlation(p2, p3, 99, pick), Error);
}

TEST_CASE("normalized representations") {
  std::mt19937_64 rng(10);
  const Pose3D p = random_pose(rng);
  CHECK(normalized_coordinates(p.joints).norm() == doctest::Approx(1.0));
  CHECK(normalized_edm(p.joints).norm() == doctest::Approx(1.0));
  const Eigen::MatrixXd scaled = 3.0 * p.joints;
  CHECK((normalized_edm(scaled) - normalized_edm(p.joints)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mean EDM and baseline") {
  std::mt19937_64 rng(11);
  std::vector<Pose3D> poses{random_pose(rng), random_pose(rng)};
  const DistanceMatrix m = mean_edm(poses);
  const Eigen::MatrixXd want = 0.5 * (build_edm(poses[0]).values() + build_edm(poses[1]).values());
  CHECK((m.values() - want).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<Pose3D> same{poses[0], poses[0], poses[0]};
  const Pose3D base = mean_pose_baseline(same, Skeleton::standard());
  CHECK(baseline_mpjpe(base, same, {true, true, false}) < 1e-6);
}

TEST_CASE("lifting through an untrained network stays finite") {
  const nn::Model model = nn::init_model(nn::ModelConfig{}, 1);
  std::mt19937_64 rng(12);
  std::vector<LabeledPose> samples;
  for (int i = 0; i < 5; ++i) {
    const Pose3D p = random_pose(rng);
    samples.push_back({flat_view(p), all_visible(14), p});
  }
  const ProtocolOutcome out = run_protocol(model, Skeleton::standard(), samples,
                                           ProtocolSpec::parse("occlusion:left_arm"));
  CHECK(out.metrics.samples == 5);
  CHECK(std::isfinite(out.metrics.mpjpe));
  REQUIRE(out.metrics.occluded_mpjpe);
  CHECK(std::isfinite(*out.metrics.occluded_mpjpe));
  CHECK(out.metrics.occluded_joints == 10);
}
