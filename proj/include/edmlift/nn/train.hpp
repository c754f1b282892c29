#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "edmlift/core/distance_matrix.hpp"
#include "edmlift/nn/adam.hpp"
#include "edmlift/nn/network.hpp"

namespace edmlift::nn {

enum class OcclusionAugment { kOff, kRandomTwo };

struct TrainConfig {
  int batch_size = 7;
  int epochs = 500;
  double lr_initial = 1e-3;
  double lr_reduced = 1e-4;
  /// Epoch index at which the step size drops; half of `epochs` when unset.
  std::optional<int> lr_switch_epoch;
  AdamConfig adam;
  std::uint64_t seed = 0;
  OcclusionAugment occlusion_augment = OcclusionAugment::kOff;
  /// Pixel noise re-drawn every epoch; needs samples with a raw 2D source.
  double noise_sigma = 0.0;

  int switch_epoch() const;
  double learning_rate(int epoch) const;
  void validate() const;
};

struct TrainingSample {
  /// Normalized 2D distance matrix (hidden joints already zeroed).
  DistanceMatrix input;
  /// 3D distance matrix in millimetres.
  DistanceMatrix target;
  /// Raw pixel pose the input was built from; lets augmentation rebuild it.
  std::optional<ObservedPose2D> source;
};

TrainingSample make_training_sample(const ObservedPose2D& observed, const Pose3D& truth);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainCallbacks {
  std::function<void(const EpochStats&)> on_epoch;
  /// Polled after every epoch; returning true ends training early.
  std::function<bool()> should_stop;
};

struct TrainResult {
  Model model;
  /// Mean mini-batch loss of each epoch (dropout and augmentation active).
  std::vector<double> loss_history;
  /// Loss of the final model in inference mode on the un-augmented inputs.
  double final_loss = 0.0;
  int epochs_completed = 0;
  bool stopped_early = false;
};

/// Input actually fed to the network for one sample in one epoch: pixel noise
/// and/or two random hidden joints per `config`, otherwise the stored input.
DistanceMatrix augment_input(const TrainingSample& sample, const TrainConfig& config, Rng& rng);

/// Mini-batch Adam on the mean squared error, reshuffling every epoch.
TrainResult train(const ModelConfig& model_config, const TrainConfig& config,
                  std::span<const TrainingSample> dataset, const TrainCallbacks& callbacks = {});

/// Mean squared error of `model` in inference mode (network units).
double evaluate_loss(const Model& model, std::span<const TrainingSample> dataset);

}  // namespace edmlift::nn
