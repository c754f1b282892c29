#include "edmlift/pipeline/commands.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "edmlift/core/error.hpp"
#include "edmlift/eval/ambiguity.hpp"
#include "edmlift/eval/protocol.hpp"
#include "edmlift/nn/checkpoint.hpp"
#include "edmlift/nn/train.hpp"
#include "edmlift/pipeline/dataset.hpp"
#include "edmlift/pipeline/format.hpp"
#include "edmlift/pipeline/svg_plot.hpp"
#include "edmlift/pipeline/synth.hpp"

namespace edmlift::pipeline {
namespace {

nlohmann::json parse_json_file(const path& p) {
  try {
    return nlohmann::json::parse(read_text(p));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, p.string() + ": malformed JSON (" + e.what() + ")");
  }
}

std::vector<nn::TrainingSample> training_samples(const std::vector<DatasetRecord>& records) {
  std::vector<nn::TrainingSample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(nn::make_training_sample({r.joints2d, r.visibility}, r.joints3d));
  }
  return out;
}

std::vector<DatasetRecord> records_for_split(const std::vector<DatasetRecord>& all,
                                             const std::string& split) {
  if (split == "all") return all;
  auto out = select_split(all, parse_split(split));
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "no records in split '" + split + "'");
  return out;
}

std::string short_name(const std::string& joint) {
  std::string s = joint;
  if (s.rfind("right_", 0) == 0) s = "R." + s.substr(6);
  if (s.rfind("left_", 0) == 0) s = "L." + s.substr(5);
  return s;
}

PlotSpec plot_reports(const std::vector<nlohmann::json>& reports) {
  PlotSpec spec;
  spec.y_label = "MPJPE (mm)";
  if (reports.size() == 1) {
    const auto& per = reports[0].at("per_joint_mm");
    Series s{"per joint", {}, {}, true};
    for (const auto& [name, value] : per.items()) {
      s.x.push_back(static_cast<double>(s.x.size()));
      s.y.push_back(value.get<double>());
      spec.categories.push_back(short_name(name));
    }
    spec.title = "Per-joint error (" + reports[0].at("protocol").get<std::string>() + ")";
    spec.x_label = "joint";
    spec.series.push_back(std::move(s));
    return spec;
  }

  bool noise_sweep = true;
  for (const auto& r : reports) {
    noise_sweep = noise_sweep && r.at("protocol").get<std::string>().rfind("noise:", 0) == 0;
  }
  Series model{"model", {}, {}, true}, occluded{"occluded joints", {}, {}, true},
      baseline{"mean-pose baseline", {}, {}, true};
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const std::string protocol = r.at("protocol").get<std::string>();
    const double x = noise_sweep ? std::stod(protocol.substr(6)) : static_cast<double>(i);
    if (!noise_sweep) spec.categories.push_back(protocol);
    model.x.push_back(x);
    model.y.push_back(r.at("mpjpe_mm").get<double>());
    if (r.contains("occluded_mpjpe_mm") && r["occluded_mpjpe_mm"].is_number()) {
      occluded.x.push_back(x);
      occluded.y.push_back(r["occluded_mpjpe_mm"].get<double>());
    }
    if (r.contains("baseline_mpjpe_mm") && r["baseline_mpjpe_mm"].is_number()) {
      baseline.x.push_back(x);
      baseline.y.push_back(r["baseline_mpjpe_mm"].get<double>());
    }
  }
  spec.title = noise_sweep ? "Error against 2D noise" : "Error by protocol";
  spec.x_label = noise_sweep ? "noise sigma (pixels)" : "protocol";
  spec.series.push_back(std::move(model));
  if (!occluded.x.empty()) spec.series.push_back(std::move(occluded));
  if (!baseline.x.empty()) spec.series.push_back(std::move(baseline));
  return spec;
}

PlotSpec plot_history(const nlohmann::json& doc) {
  PlotSpec spec;
  spec.title = "Training loss (" + doc.value("arch", std::string("model")) + ")";
  spec.x_label = "epoch";
  spec.y_label = "mean squared error";
  Series s{"train", {}, {}, true};
  for (const auto& v : doc.at("loss")) {
    s.x.push_back(static_cast<double>(s.x.size() + 1));
    s.y.push_back(v.get<double>());
  }
  spec.series.push_back(std::move(s));
  return spec;
}

PlotSpec plot_scatter(const path& csv) {
  std::istringstream in(read_text(csv));
  std::string line;
  std::getline(in, line);
  if (line.rfind("i,j,d3,d2,representation", 0) != 0) {
    throw Error(ErrorCode::kParse, csv.string() + ": not a scatter file");
  }
  std::map<std::string, Series> by_rep;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 5) {
      throw Error(ErrorCode::kParse, csv.string() + ":" + std::to_string(line_no) +
                                         ": expected 5 columns");
    }
    Series& s = by_rep[cells[4]];
    s.label = cells[4];
    s.line = false;
    s.x.push_back(std::stod(cells[3]));
    s.y.push_back(std::stod(cells[2]));
  }
  PlotSpec spec;
  spec.title = "Pose distances, 3D against 2D";
  spec.x_label = "2D distance";
  spec.y_label = "3D distance";
  for (auto& [rep, s] : by_rep) spec.series.push_back(std::move(s));
  return spec;
}

}  // namespace

void run_synth(const SynthArgs& args) {
  SynthConfig cfg;
  if (args.config) cfg = SynthConfig::from_json(parse_json_file(*args.config));
  cfg.n_samples = args.n;
  cfg.seed = args.seed;
  if (args.noise_sigma) cfg.noise_sigma = *args.noise_sigma;
  write_dataset(args.out, synth_dataset(cfg));
}

void run_train(const TrainArgs& args, std::ostream& log) {
  const auto records = read_dataset(args.data);
  const auto train_set = training_samples(records_for_split(records, "train"));
  const auto val_records = select_split(records, Split::kVal);

  nn::ModelConfig model_cfg;
  model_cfg.arch = args.arch;
  nn::TrainConfig cfg;
  cfg.epochs = args.epochs;
  cfg.batch_size = args.batch;
  cfg.seed = args.seed;
  cfg.lr_switch_epoch = args.lr_switch_epoch;
  cfg.noise_sigma = args.noise_sigma;
  cfg.occlusion_augment =
      args.occlusion_augment ? nn::OcclusionAugment::kRandomTwo : nn::OcclusionAugment::kOff;
  cfg.validate();

  nn::TrainCallbacks callbacks;
  callbacks.on_epoch = [&](const nn::EpochStats& s) {
    if (args.log_every > 0 && ((s.epoch + 1) % args.log_every == 0 || s.epoch + 1 == cfg.epochs)) {
      log << "epoch " << s.epoch + 1 << "/" << cfg.epochs << " loss " << format9(s.loss)
          << " lr " << format9(s.lr) << "\n";
    }
  };
  nn::TrainResult result = nn::train(model_cfg, cfg, train_set, callbacks);
  nn::save_checkpoint(result.model, args.out_checkpoint);

  if (args.history) {
    nlohmann::json doc = {{"arch", std::string(nn::to_string(args.arch))},
                          {"epochs", result.epochs_completed},
                          {"batch", args.batch},
                          {"seed", args.seed},
                          {"loss", result.loss_history},
                          {"final_train_loss", result.final_loss}};
    if (!val_records.empty()) {
      doc["final_val_loss"] = nn::evaluate_loss(result.model, training_samples(val_records));
    }
    write_text(*args.history, json_document(doc));
  }
}

void run_predict(const PredictArgs& args) {
  const nn::Model model = nn::load_checkpoint(args.checkpoint);
  const Skeleton skeleton = Skeleton::standard();
  const auto records = records_for_split(read_dataset(args.data, model.config().n_joints),
                                         args.split);
  const auto spec = eval::ProtocolSpec::parse(args.protocol, args.seed);

  std::vector<ObservedPose2D> inputs;
  inputs.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    inputs.push_back(
        eval::apply_protocol(spec, skeleton, records[i].joints2d, records[i].visibility, i));
  }
  const auto lifts = eval::lift_poses(model, inputs, skeleton);
  std::vector<PredictionRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = lifts[i].recovery;
    out.push_back({records[i].id, rec.pose, rec.edm_residual, rec.chirality,
                   inputs[i].visibility});
  }
  write_predictions(args.out, out);
}

eval::MetricsReport run_evaluate(const EvaluateArgs& args) {
  const Skeleton skeleton = Skeleton::standard();
  const auto spec = eval::ProtocolSpec::parse(args.protocol);
  const auto preds = read_predictions(args.pred, skeleton.size());
  const auto gt = read_dataset(args.gt, skeleton.size());
  std::map<std::string, const DatasetRecord*> by_id;
  for (const auto& r : gt) by_id[r.id] = &r;

  eval::MetricOptions metric;
  metric.allow_reflection = args.allow_reflection;
  eval::MetricsAccumulator acc(skeleton.size(), metric);
  std::vector<Pose3D> truths;
  for (const auto& p : preds) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kInvalidInput, "prediction '" + p.id + "' has no ground truth in '" +
                                                args.gt.string() + "'");
    }
    acc.add(p.joints3d, it->second->joints3d, p.visibility);
    truths.push_back(it->second->joints3d);
  }
  eval::MetricsReport report = acc.report(spec.to_string());

  std::vector<Pose3D> train_poses;
  for (const auto& r : gt) {
    if (r.split == Split::kTrain) train_poses.push_back(r.joints3d);
  }
  if (!train_poses.empty()) {
    const Pose3D baseline = eval::mean_pose_baseline(train_poses, skeleton);
    report.baseline_mpjpe = eval::baseline_mpjpe(baseline, truths, metric);
  }
  write_text(args.out, json_document(report.to_json(skeleton)));
  return report;
}

void run_analyze_ambiguity(const AmbiguityArgs& args) {
  const auto records = read_dataset(args.data);
  std::vector<Pose2D> poses2d;
  std::vector<Pose3D> poses3d;
  for (const auto& r : records) {
    poses2d.push_back(normalize_2d(r.joints2d, r.visibility));
    poses3d.push_back(r.joints3d);
  }
  Rng rng = stream_rng(args.seed, 0);
  const auto result = eval::ambiguity_correlation(poses2d, poses3d, args.pairs, rng);

  const path scatter = args.scatter ? *args.scatter : path(args.out).replace_extension(".csv");
  std::string csv = "i,j,d3,d2,representation\n";
  auto rows = [&csv](const std::vector<eval::ScatterPoint>& pts, const char* rep) {
    for (const auto& p : pts) {
      csv += std::to_string(p.i) + "," + std::to_string(p.j) + "," + format9(p.d3) + "," +
             format9(p.d2) + "," + rep + "\n";
    }
  };
  rows(result.cartesian, "cartesian");
  rows(result.edm, "edm");
  write_text(scatter, csv);

  const nlohmann::json doc = {{"poses", records.size()},
                              {"pairs", args.pairs},
                              {"seed", args.seed},
                              {"pearson_cartesian", result.pearson_cartesian},
                              {"pearson_edm", result.pearson_edm},
                              {"scatter", scatter.filename().string()}};
  write_text(args.out, json_document(doc));
}

void run_plot(const PlotArgs& args) {
  if (args.metrics.empty()) throw Error(ErrorCode::kInvalidArgument, "no metrics files given");
  PlotSpec spec;
  if (args.metrics.size() == 1 && args.metrics[0].extension() == ".csv") {
    spec = plot_scatter(args.metrics[0]);
  } else {
    std::vector<nlohmann::json> reports;
    for (const auto& p : args.metrics) {
      nlohmann::json doc = parse_json_file(p);
      if (doc.is_array()) {
        for (auto& d : doc) reports.push_back(d);
      } else if (doc.is_object() && doc.contains("loss") && args.metrics.size() == 1) {
        spec = plot_history(doc);
      } else {
        reports.push_back(doc);
      }
    }
    if (spec.series.empty()) {
      for (const auto& r : reports) {
        if (!r.is_object() || !r.contains("mpjpe_mm") || !r.contains("protocol")) {
          throw Error(ErrorCode::kParse, "metrics input is not an evaluation report");
        }
      }
      try {
        spec = plot_reports(reports);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("metrics report: ") + e.what());
      }
    }
  }
  write_text(args.out, render_svg(spec));
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lift 2D keypoints to 3D poses through distance matrices"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--n", synth.n, "number of poses")->required();
  c_synth->add_option("--seed", synth.seed, "random seed");
  c_synth->add_option("--out", synth.out, "output JSON Lines file")->required();
  c_synth->add_option("--noise-sigma", synth.noise_sigma, "2D pixel noise (std dev)");
  c_synth->add_option("--config", synth.config, "generator settings (JSON)")
      ->check(CLI::ExistingFile);

  TrainArgs train;
  std::string arch = "fconn";
  auto* c_train = app.add_subcommand("train", "Train a distance-matrix regressor");
  c_train->add_option("--arch", arch, "fconn or fconv")
      ->check(CLI::IsMember({"fconn", "fconv"}));
  c_train->add_option("--data", train.data, "dataset (train split is used)")
      ->required()
      ->check(CLI::ExistingFile);
  c_train->add_option("--epochs", train.epochs, "training epochs");
  c_train->add_option("--batch", train.batch, "mini-batch size");
  c_train->add_option("--seed", train.seed, "random seed");
  c_train->add_option("--out-checkpoint", train.out_checkpoint, "checkpoint to write")
      ->required();
  c_train->add_flag("--occlusion-augment", train.occlusion_augment,
                    "hide two random joints of every sample each epoch");
  c_train->add_option("--noise-sigma", train.noise_sigma, "2D pixel noise added each epoch");
  c_train->add_option("--lr-switch-epoch", train.lr_switch_epoch,
                      "epoch at which the step size drops (default: half way)");
  c_train->add_option("--history", train.history, "loss history (JSON)");
  c_train->add_option("--log-every", train.log_every, "progress interval in epochs (0: quiet)");

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Recover 3D poses with a trained model");
  c_predict->add_option("--checkpoint", predict.checkpoint)->required()->check(CLI::ExistingFile);
  c_predict->add_option("--data", predict.data)->required()->check(CLI::ExistingFile);
  c_predict->add_option("--out", predict.out, "predictions (JSON Lines)")->required();
  c_predict->add_option("--split", predict.split, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  c_predict->add_option("--protocol", predict.protocol, "clean, noise:SIGMA or occlusion:KIND");
  c_predict->add_option("--seed", predict.seed, "seed of the protocol's corruption");

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Score predictions against ground truth");
  c_eval->add_option("--pred", evaluate.pred)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--gt", evaluate.gt)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--protocol", evaluate.protocol, "protocol the predictions were made under");
  c_eval->add_option("--out", evaluate.out, "metrics report (JSON)")->required();
  c_eval->add_flag("--allow-reflection", evaluate.allow_reflection,
                   "allow mirror images in the alignment");

  AmbiguityArgs amb;
  auto* c_amb = app.add_subcommand("analyze-ambiguity",
                                   "Correlate 2D and 3D pose distances for random pairs");
  c_amb->add_option("--data", amb.data)->required()->check(CLI::ExistingFile);
  c_amb->add_option("--pairs", amb.pairs, "number of random pose pairs");
  c_amb->add_option("--seed", amb.seed, "random seed");
  c_amb->add_option("--out", amb.out, "correlations (JSON)")->required();
  c_amb->add_option("--scatter", amb.scatter, "scatter data (CSV; default: OUT with .csv)");

  PlotArgs plot;
  auto* c_plot = app.add_subcommand("plot", "Render metrics as SVG");
  c_plot->add_option("--metrics", plot.metrics,
                     "metrics report(s), a training history or a scatter CSV")
      ->required()
      ->check(CLI::ExistingFile);
  c_plot->add_option("--out", plot.out, "SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*c_synth) {
      run_synth(synth);
    } else if (*c_train) {
      train.arch = nn::parse_arch(arch);
      run_train(train, out);
    } else if (*c_predict) {
      run_predict(predict);
    } else if (*c_eval) {
      const auto report = run_evaluate(evaluate);
      out << "mpjpe " << format9(report.mpjpe) << " mm over " << report.samples << " samples";
      if (report.baseline_mpjpe) out << " (mean-pose baseline " << format9(*report.baseline_mpjpe) << " mm)";
      out << "\n";
    } else if (*c_amb) {
      run_analyze_ambiguity(amb);
    } else if (*c_plot) {
      run_plot(plot);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace edmlift::pipeline
