#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "edmlift/core/error.hpp"
#include "edmlift/core/skeleton.hpp"
#include "edmlift/mds/recover.hpp"
#include "edmlift/pipeline/camera.hpp"
#include "edmlift/pipeline/commands.hpp"
#include "edmlift/pipeline/dataset.hpp"
#include "edmlift/pipeline/format.hpp"
#include "edmlift/pipeline/svg_plot.hpp"
#include "edmlift/pipeline/synth.hpp"
#include "json.hpp"

using namespace edmlift;
using namespace edmlift::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path root;
  explicit TempDir(const std::string& tag) {
    root = fs::temp_directory_path() / ("edmlift_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~TempDir() { fs::remove_all(root); }
  fs::path operator/(const std::string& name) const { return root / name; }
};

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "edmlift");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return rc;
}

std::string slurp(const fs::path& p) { return read_text(p); }

}  // namespace

TEST_CASE("projection") {
  CameraModel cam;
  cam.focal = 800.0;
  cam.principal = {320.0, 240.0};
  Pose3D p;
  p.joints.resize(3, 3);
  p.joints << 0, 0, 2000, 100, -50, 1000, 100, -50, 2000;
  const Pose2D img = project_camera(p, cam);
  CHECK(img.joints(0, 0) == 320.0);
  CHECK(img.joints(0, 1) == 240.0);
  // 800 * 100 / 1000 + 320, 800 * -50 / 1000 + 240
  CHECK(img.joints(1, 0) == doctest::Approx(400.0));
  CHECK(img.joints(1, 1) == doctest::Approx(200.0));
  // twice as deep: half the offset
  CHECK(img.joints(2, 0) - 320.0 == doctest::Approx(0.5 * (img.joints(1, 0) - 320.0)));
  CHECK(img.joints(2, 1) - 240.0 == doctest::Approx(0.5 * (img.joints(1, 1) - 240.0)));

  p.joints(2, 2) = -5.0;
  try {
    project_camera(p, cam);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBehindCamera);
  }
}

TEST_CASE("look-at camera") {
  const CameraModel cam = CameraModel::look_at({0, 0, -5000}, {0, 0, 0}, 1000.0, {500, 500});
  Pose3D p;
  p.joints.resize(2, 3);
  p.joints << 0, 0, 0, 0, 100, 0;
  const Pose2D img = project_camera(p, cam);
  CHECK(img.joints(0, 0) == doctest::Approx(500.0));
  CHECK(img.joints(0, 1) == doctest::Approx(500.0));
  // world up is image up, and v grows downwards
  CHECK(img.joints(1, 1) == doctest::Approx(500.0 - 1000.0 * 100.0 / 5000.0));
  CHECK((cam.rotation * cam.rotation.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("synthetic data") {
  SynthConfig cfg;
  cfg.n_samples = 100;
  cfg.seed = 42;
  const auto a = synth_dataset(cfg);
  const auto b = synth_dataset(cfg);
  REQUIRE(a.size() == 100);
  const Skeleton sk = Skeleton::standard();
  const auto bones = default_bone_lengths();
  int n_train = 0, n_val = 0, n_test = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(to_json(a[i]) == to_json(b[i]));
    const auto& r = a[i];
    n_train += r.split == Split::kTrain;
    n_val += r.split == Split::kVal;
    n_test += r.split == Split::kTest;
    for (int j = 0; j < 14; ++j) {
      if (j == sk.root()) continue;
      const double len = (r.joints3d.joints.row(j) - r.joints3d.joints.row(sk.parent(j))).norm();
      CHECK(std::abs(len - bones.at(sk.name(j))) < 1e-9);
    }
    CHECK(mds::anthropomorphism_score(r.joints3d, sk) == 14);
  }
  CHECK(n_train == 80);
  CHECK(n_val == 10);
  CHECK(n_test == 10);

  cfg.n_samples = 0;
  CHECK_THROWS_AS(cfg.validate(sk), Error);
}

TEST_CASE("synthetic 2D matches the pinhole formula") {
  // rebuild the camera from the same stream the generator used
  SynthConfig cfg;
  cfg.n_samples = 3;
  cfg.seed = 5;
  const auto recs = synth_dataset(cfg);
  const Skeleton sk = Skeleton::standard();
  Rng rng = stream_rng(cfg.seed, 0);
  const Pose3D body = sample_body_pose(cfg, sk, rng);
  const CameraModel cam = sample_camera(cfg, rng);
  CHECK((body.joints - recs[0].joints3d.joints).cwiseAbs().maxCoeff() < 1e-9);
  for (int j : {0, 6, 13}) {
    const Eigen::Vector3d c = cam.rotation * body.joints.row(j).transpose() + cam.translation;
    const double u = cam.focal * c.x() / c.z() + cam.principal.x();
    const double v = cam.focal * c.y() / c.z() + cam.principal.y();
    CHECK(recs[0].joints2d.joints(j, 0) == doctest::Approx(u).epsilon(1e-9));
    CHECK(recs[0].joints2d.joints(j, 1) == doctest::Approx(v).epsilon(1e-9));
  }
}

TEST_CASE("synth config from JSON") {
  const auto doc = nlohmann::json::parse(R"({"n_samples": 7, "noise_sigma": 2.5,
      "angles": {"knee_flex": [0.3, 1.0]}})");
  const SynthConfig cfg = SynthConfig::from_json(doc);
  CHECK(cfg.n_samples == 7);
  CHECK(cfg.angles.knee_flex.hi == 1.0);
  CHECK_THROWS_AS(SynthConfig::from_json(nlohmann::json::parse(R"({"n_sample": 7})")), Error);
  const SynthConfig back = SynthConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
}

TEST_CASE("number formatting") {
  CHECK(format9(0.1) == "0.1");
  CHECK(format9(1.0 / 3.0) == "0.333333333");
  CHECK(round9(123456.7891234) == 123456.789);
  const auto doc = round_floats(nlohmann::json{{"x", 2.0 / 3.0}, {"n", 3}});
  CHECK(doc.at("x").get<double>() == 0.666666667);
  CHECK(doc.at("n").is_number_integer());
}

TEST_CASE("dataset files") {
  TempDir tmp("ds");
  SynthConfig cfg;
  cfg.n_samples = 10;
  const auto recs = synth_dataset(cfg);
  write_dataset(tmp / "d.jsonl", recs);
  const auto back = read_dataset(tmp / "d.jsonl");
  REQUIRE(back.size() == 10);
  write_dataset(tmp / "e.jsonl", back);
  CHECK(slurp(tmp / "d.jsonl") == slurp(tmp / "e.jsonl"));
  CHECK(select_split(back, Split::kTest).size() == 1);

  auto expect_parse = [&](const std::string& text, const std::string& needle) {
    write_text(tmp / "bad.jsonl", text);
    try {
      read_dataset(tmp / "bad.jsonl");
      FAIL("accepted: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParse);
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  const std::string good = json_line(to_json(recs[0]));
  expect_parse(good + "\n{not json\n", ":2");
  expect_parse(good + "\n" + good + "\n", "duplicate");
  auto short_rec = to_json(recs[1]);
  short_rec["joints2d"].erase(0);
  expect_parse(json_line(short_rec) + "\n", "joints2d");
  auto bad_split = to_json(recs[1]);
  bad_split["split"] = "holdout";
  expect_parse(json_line(bad_split) + "\n", "split");

  CHECK_THROWS_AS(read_dataset(tmp / "missing.jsonl"), Error);
}

TEST_CASE("prediction files") {
  TempDir tmp("pred");
  PredictionRecord p;
  p.id = "s000001";
  p.joints3d.joints = Points3::Random(14, 3);
  p.edm_residual = 0.25;
  p.chirality = mds::Chirality::kReflected;
  p.visibility = all_visible(14);
  p.visibility[3] = false;
  write_predictions(tmp / "p.jsonl", {p});
  const auto back = read_predictions(tmp / "p.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].chirality == mds::Chirality::kReflected);
  CHECK(back[0].visibility == p.visibility);
  CHECK((back[0].joints3d.joints - p.joints3d.joints).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("svg rendering") {
  PlotSpec spec;
  spec.title = "a & b";
  spec.series.push_back({"err", {0, 5, 10}, {1, 2, 4}, true});
  const std::string svg = render_svg(spec);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("a &amp; b") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("cli: argument errors") {
  TempDir tmp("cli_args");
  std::string text;
  CHECK(cli({"synth", "--n", "0", "--out", (tmp / "x.jsonl").string()}, &text) != 0);
  CHECK(text.find("invalid-argument") != std::string::npos);
  CHECK(cli({"train", "--arch", "resnet", "--data", "x"}) != 0);
  CHECK(cli({"frobnicate"}) != 0);
  CHECK(cli({}) != 0);

  // the real binary agrees
  const std::string cmd = std::string(EDMLIFT_CLI_PATH) + " synth --n 0 --out " +
                          (tmp / "y.jsonl").string() + " > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) != 0);
}

TEST_CASE("cli: synth is reproducible") {
  TempDir tmp("cli_synth");
  REQUIRE(cli({"synth", "--n", "100", "--seed", "42", "--out", (tmp / "a.jsonl").string()}) == 0);
  REQUIRE(cli({"synth", "--n", "100", "--seed", "42", "--out", (tmp / "b.jsonl").string()}) == 0);
  CHECK(slurp(tmp / "a.jsonl") == slurp(tmp / "b.jsonl"));
  REQUIRE(cli({"synth", "--n", "100", "--seed", "43", "--out", (tmp / "c.jsonl").string()}) == 0);
  CHECK(slurp(tmp / "a.jsonl") != slurp(tmp / "c.jsonl"));
}

TEST_CASE("cli: evaluating the truth scores zero") {
  TempDir tmp("cli_eval");
  const auto data = (tmp / "d.jsonl").string();
  REQUIRE(cli({"synth", "--n", "50", "--seed", "1", "--out", data}) == 0);
  std::vector<PredictionRecord> preds;
  for (const auto& r : select_split(read_dataset(data), Split::kTest)) {
    PredictionRecord p;
    p.id = r.id;
    p.joints3d = r.joints3d;
    p.visibility = r.visibility;
    preds.push_back(p);
  }
  write_predictions(tmp / "p.jsonl", preds);
  const auto out = (tmp / "m.json").string();
  REQUIRE(cli({"evaluate", "--pred", (tmp / "p.jsonl").string(), "--gt", data, "--out", out}) == 0);
  const auto report = nlohmann::json::parse(slurp(out));
  CHECK(report.at("mpjpe_mm").get<double>() == 0.0);
  CHECK(report.at("samples").get<int>() == 5);
  CHECK(report.at("baseline_mpjpe_mm").get<double>() > 0.0);
}

TEST_CASE("cli: train, predict, evaluate, plot") {
  TempDir tmp("cli_e2e");
  const auto data = (tmp / "d.jsonl").string();
  const auto ckpt = (tmp / "m.ckpt").string();
  REQUIRE(cli({"synth", "--n", "1500", "--seed", "3", "--out", data}) == 0);
  REQUIRE(cli({"train", "--arch", "fconn", "--data", data, "--epochs", "40", "--seed", "1",
               "--out-checkpoint", ckpt, "--history", (tmp / "h.json").string(),
               "--log-every", "0"}) == 0);
  REQUIRE(cli({"predict", "--checkpoint", ckpt, "--data", data, "--out",
               (tmp / "p.jsonl").string()}) == 0);
  REQUIRE(cli({"evaluate", "--pred", (tmp / "p.jsonl").string(), "--gt", data, "--out",
               (tmp / "m.json").string()}) == 0);
  const auto report = nlohmann::json::parse(slurp(tmp / "m.json"));
  const double err = report.at("mpjpe_mm").get<double>();
  const double base = report.at("baseline_mpjpe_mm").get<double>();
  MESSAGE("trained " << err << " mm, mean-pose baseline " << base << " mm");
  CHECK(err < base);

  REQUIRE(cli({"plot", "--metrics", (tmp / "m.json").string(), "--out",
               (tmp / "m.svg").string()}) == 0);
  CHECK(slurp(tmp / "m.svg").find("<svg") == 0);
  REQUIRE(cli({"plot", "--metrics", (tmp / "h.json").string(), "--out",
               (tmp / "h.svg").string()}) == 0);

  REQUIRE(cli({"analyze-ambiguity", "--data", data, "--pairs", "500", "--seed", "2", "--out",
               (tmp / "a.json").string()}) == 0);
  const auto amb = nlohmann::json::parse(slurp(tmp / "a.json"));
  CHECK(amb.contains("pearson_edm"));
  CHECK(fs::exists(tmp / "a.csv"));
}
