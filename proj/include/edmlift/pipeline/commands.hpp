#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "edmlift/eval/metrics.hpp"
#include "edmlift/nn/network.hpp"

namespace edmlift::pipeline {

using std::filesystem::path;

struct SynthArgs {
  int n = 0;
  std::uint64_t seed = 0;
  path out;
  std::optional<double> noise_sigma;
  std::optional<path> config;
};

struct TrainArgs {
  nn::Arch arch = nn::Arch::kFconn;
  path data;
  int epochs = 500;
  int batch = 7;
  std::uint64_t seed = 0;
  path out_checkpoint;
  bool occlusion_augment = false;
  double noise_sigma = 0.0;
  std::optional<int> lr_switch_epoch;
  /// Per-epoch loss and the final train/val losses as JSON.
  std::optional<path> history;
  /// Print progress every this many epochs; 0 disables it.
  int log_every = 50;
};

struct PredictArgs {
  path checkpoint;
  path data;
  path out;
  /// "train", "val", "test" or "all".
  std::string split = "test";
  std::string protocol = "clean";
  std::uint64_t seed = 0;
};

struct EvaluateArgs {
  path pred;
  path gt;
  path out;
  std::string protocol = "clean";
  bool allow_reflection = false;
};

struct AmbiguityArgs {
  path data;
  int pairs = 10000;
  std::uint64_t seed = 0;
  path out;
  /// Scatter CSV; defaults to `out` with a .csv extension.
  std::optional<path> scatter;
};

struct PlotArgs {
  std::vector<path> metrics;
  path out;
};

void run_synth(const SynthArgs& args);
void run_train(const TrainArgs& args, std::ostream& log);
void run_predict(const PredictArgs& args);
eval::MetricsReport run_evaluate(const EvaluateArgs& args);
void run_analyze_ambiguity(const AmbiguityArgs& args);
void run_plot(const PlotArgs& args);

/// Parses the command line and dispatches. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace edmlift::pipeline
