#include "edmlift/nn/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <string>

namespace edmlift::nn {
namespace {

std::vector<std::size_t> pick_coords(std::size_t size, int wanted, Rng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  if (static_cast<std::size_t>(wanted) < size) idx.resize(static_cast<std::size_t>(wanted));
  return idx;
}

struct Probe {
  BasicTensor<double> output;
  /// Fingerprint of the piecewise-linear switches taken; 0 when not tracked.
  std::uint64_t kinks = 0;
};

// FNV-1a over ReLU signs and max-pool winners. A finite difference whose two
// sides disagree with the base pass straddles a kink and says nothing about
// the derivative.
std::uint64_t kink_signature(const std::vector<std::unique_ptr<Layer<double>>>& layers,
                             const Tape<double>& tape) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t v) { h = (h ^ v) * 1099511628211ULL; };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string kind = layers[i]->kind();
    const auto& cache = tape.caches[i];
    if (kind == "relu") {
      for (double v : cache.input.values()) mix(v > 0.0);
    } else if (kind == "maxpool") {
      for (std::int32_t k : cache.indices) mix(static_cast<std::uint64_t>(k));
    }
  }
  return h;
}

// L(+) - L(-) for the mean-squared loss, written as sum (y+ - y-)(y+ + y- - 2t) / n.
// Same central difference as subtracting the two losses, minus the cancellation
// between two nearly equal sums of squares.
double loss_difference(const BasicTensor<double>& up, const BasicTensor<double>& down,
                       const BasicTensor<double>& target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < up.size(); ++i) sum += (up[i] - down[i]) * (up[i] + down[i] - 2.0 * target[i]);
  return sum / static_cast<double>(up.size());
}

// Compares `analytic` against central differences of `probe` w.r.t. `values`.
// Kink-straddling coordinates are skipped and replaced while others remain.
TensorCheck compare(const std::string& name, BasicTensor<double>& values,
                    const BasicTensor<double>& analytic, const std::function<Probe()>& probe,
                    const BasicTensor<double>& target, const GradientCheckOptions& options, Rng& rng) {
  TensorCheck out{name, 0, 0.0, 0.0, 0};
  const std::uint64_t base = probe().kinks;
  for (std::size_t i : pick_coords(values.size(), static_cast<int>(values.size()), rng)) {
    if (out.coords >= options.coords_per_tensor) break;
    const double saved = values[i];
    values[i] = saved + options.eps;
    const Probe up = probe();
    values[i] = saved - options.eps;
    const Probe down = probe();
    values[i] = saved;
    if (up.kinks != base || down.kinks != base) {
      ++out.skipped;
      continue;
    }
    const double numeric = loss_difference(up.output, down.output, target) / (2.0 * options.eps);
    const double a = analytic[i];
    const double err = std::abs(a - numeric);
    const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
    out.max_abs_error = std::max(out.max_abs_error, err);
    out.max_rel_error = std::max(out.max_rel_error, err / denom);
    ++out.coords;
  }
  return out;
}

void accumulate(GradientCheckReport& report, TensorCheck check) {
  report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
  report.tensors.push_back(std::move(check));
}

}  // namespace

GradientCheckSample random_sample(const ModelConfig& config, int batch, std::uint64_t seed) {
  Network<double> probe(config, 0);
  Shape in = probe.sample_input_shape();
  Shape out = probe.sample_output_shape();
  in.insert(in.begin(), batch);
  out.insert(out.begin(), batch);
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GradientCheckSample sample{BasicTensor<double>(in), BasicTensor<double>(out)};
  for (auto& v : sample.input.values()) v = 2.0 * unif(rng);
  for (auto& v : sample.target.values()) v = unif(rng);
  return sample;
}

GradientCheckReport gradient_check(const ModelConfig& config, const GradientCheckSample& sample,
                                   const GradientCheckOptions& options) {
  Network<double> net(config, options.seed);
  const std::uint64_t mask_seed = options.seed ^ 0x9e3779b97f4a7c15ULL;
  auto context = [&](Rng& rng) { return ForwardContext{options.mode, options.dropout, &rng}; };
  auto loss = [&]() {
    Rng rng(mask_seed);
    Tape<double> tape;
    BasicTensor<double> y = net.forward(sample.input, context(rng), &tape);
    return Probe{std::move(y), kink_signature(net.layers(), tape)};
  };

  net.zero_grad();
  Rng rng(mask_seed);
  Tape<double> tape;
  const auto result = mse_loss(net.forward(sample.input, context(rng), &tape), sample.target);
  net.backward(result.grad, tape);

  GradientCheckReport report;
  Rng picker(options.seed + 1);
  for (auto& slot : net.parameters()) {
    const BasicTensor<double> analytic = *slot.grad;
    accumulate(report, compare(slot.name, *slot.value, analytic, loss, sample.target, options, picker));
  }
  return report;
}

GradientCheckReport check_layer_gradients(Layer<double>& layer, const BasicTensor<double>& input,
                                          const BasicTensor<double>& target,
                                          const GradientCheckOptions& options) {
  const std::uint64_t mask_seed = options.seed ^ 0x9e3779b97f4a7c15ULL;
  BasicTensor<double> x = input;
  auto loss = [&]() {
    Rng rng(mask_seed);
    ForwardContext ctx{options.mode, options.dropout, &rng};
    return Probe{layer.forward(x, ctx, nullptr), 0};
  };

  for (auto& slot : layer.slots()) {
    if (slot.trainable()) slot.grad->fill(0.0);
  }
  Rng rng(mask_seed);
  ForwardContext ctx{options.mode, options.dropout, &rng};
  LayerCache<double> cache;
  const auto result = mse_loss(layer.forward(x, ctx, &cache), target);
  layer.set_input_grad(true);
  const BasicTensor<double> gx = layer.backward(result.grad, cache);

  GradientCheckReport report;
  Rng picker(options.seed + 1);
  accumulate(report, compare(layer.name() + ".input", x, gx, loss, target, options, picker));
  for (auto& slot : layer.slots()) {
    if (!slot.trainable()) continue;
    const BasicTensor<double> analytic = *slot.grad;
    accumulate(report, compare(slot.name, *slot.value, analytic, loss, target, options, picker));
  }
  return report;
}

GradientCheckReport check_loss_gradient(const BasicTensor<double>& prediction,
                                        const BasicTensor<double>& target,
                                        const GradientCheckOptions& options) {
  BasicTensor<double> p = prediction;
  const auto analytic = mse_loss(p, target).grad;
  auto loss = [&]() { return Probe{p, 0}; };
  GradientCheckReport report;
  Rng picker(options.seed + 1);
  accumulate(report, compare("loss.input", p, analytic, loss, target, options, picker));
  return report;
}

}  // namespace edmlift::nn
