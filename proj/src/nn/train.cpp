#include "edmlift/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edmlift/core/error.hpp"

namespace edmlift::nn {

int TrainConfig::switch_epoch() const { return lr_switch_epoch.value_or(epochs / 2); }

double TrainConfig::learning_rate(int epoch) const {
  return epoch < switch_epoch() ? lr_initial : lr_reduced;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (switch_epoch() < 0 || switch_epoch() >= epochs) {
    throw Error(ErrorCode::kInvalidArgument, "learning-rate switch epoch must be in [0, epochs)");
  }
  if (!(lr_initial > 0.0) || !(lr_reduced > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rates must be positive");
  }
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise sigma must be >= 0");
}

TrainingSample make_training_sample(const ObservedPose2D& observed, const Pose3D& truth) {
  return {network_input(observed), build_edm(truth), observed};
}

DistanceMatrix augment_input(const TrainingSample& sample, const TrainConfig& config, Rng& rng) {
  const bool occlude = config.occlusion_augment == OcclusionAugment::kRandomTwo;
  if (!occlude && config.noise_sigma == 0.0) return sample.input;

  const int n = sample.input.size();
  Visibility hidden(static_cast<std::size_t>(n), false);
  if (occlude) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    const int first = pick(rng);
    int second = pick(rng);
    while (second == first) second = pick(rng);
    hidden[first] = true;
    hidden[second] = true;
  }

  if (!sample.source) {
    if (config.noise_sigma > 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "noise augmentation needs samples with raw 2D poses");
    }
    Visibility visible(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) visible[j] = !hidden[j];
    return apply_occlusion(sample.input, visible);
  }

  ObservedPose2D observed = *sample.source;
  for (int j = 0; j < n; ++j) {
    if (hidden[j]) observed.visibility[j] = false;
  }
  observed.pose = add_pixel_noise(observed.pose, observed.visibility, config.noise_sigma, rng);
  return network_input(observed);
}

double evaluate_loss(const Model& model, std::span<const TrainingSample> dataset) {
  if (dataset.empty()) return 0.0;
  constexpr std::size_t kBatch = 256;
  double sum = 0.0;
  std::vector<DistanceMatrix> inputs, targets;
  for (std::size_t b0 = 0; b0 < dataset.size(); b0 += kBatch) {
    const std::size_t n = std::min(kBatch, dataset.size() - b0);
    inputs.clear();
    targets.clear();
    for (std::size_t i = 0; i < n; ++i) {
      inputs.push_back(dataset[b0 + i].input);
      targets.push_back(dataset[b0 + i].target);
    }
    const Tensor y = model.infer(encode_inputs<float>(model.config(), inputs));
    sum += mse_loss(y, encode_targets<float>(model.config(), targets)).loss * static_cast<double>(n);
  }
  return sum / static_cast<double>(dataset.size());
}

TrainResult train(const ModelConfig& model_config, const TrainConfig& config,
                  std::span<const TrainingSample> dataset, const TrainCallbacks& callbacks) {
  config.validate();
  if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "training dataset is empty");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].input.size() != model_config.n_joints ||
        dataset[i].target.size() != model_config.n_joints) {
      throw Error(ErrorCode::kShape, "training sample " + std::to_string(i) + " is not " +
                                         std::to_string(model_config.n_joints) + "x" +
                                         std::to_string(model_config.n_joints));
    }
  }

  TrainResult result{init_model(model_config, config.seed), {}, 0.0, 0, false};
  Model& model = result.model;
  Adam<float> optimizer(config.adam);
  Rng shuffle_rng = stream_rng(config.seed, 1);
  Rng dropout_rng = stream_rng(config.seed, 2);
  Rng augment_rng = stream_rng(config.seed, 3);

  const auto params = model.parameters();
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<DistanceMatrix> inputs, targets;
  Tape<float> tape;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const double lr = config.learning_rate(epoch);
    double epoch_loss = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t n = std::min<std::size_t>(config.batch_size, order.size() - b0);
      inputs.clear();
      targets.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const TrainingSample& sample = dataset[order[b0 + i]];
        inputs.push_back(augment_input(sample, config, augment_rng));
        targets.push_back(sample.target);
      }
      model.zero_grad();
      const Tensor y = model.forward(encode_inputs<float>(model_config, inputs),
                                     ForwardContext{Mode::kTrain, true, &dropout_rng}, &tape);
      const auto loss = mse_loss(y, encode_targets<float>(model_config, targets));
      if (!std::isfinite(loss.loss)) {
        throw Error(ErrorCode::kNumericFailure, "training loss became non-finite in epoch " +
                                                    std::to_string(epoch));
      }
      model.backward(loss.grad, tape);
      optimizer.step(params, lr);
      epoch_loss += loss.loss * static_cast<double>(n);
    }
    epoch_loss /= static_cast<double>(dataset.size());
    result.loss_history.push_back(epoch_loss);
    result.epochs_completed = epoch + 1;
    if (callbacks.on_epoch) callbacks.on_epoch({epoch, epoch_loss, lr});
    if (callbacks.should_stop && epoch + 1 < config.epochs && callbacks.should_stop()) {
      result.stopped_early = true;
      break;
    }
  }
  result.final_loss = evaluate_loss(model, dataset);
  return result;
}

}  // namespace edmlift::nn
