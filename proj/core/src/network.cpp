#include "chf/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chf/errors.hpp"
#include "chf/rng.hpp"

namespace chf {

namespace {

// ---- raw kernels -----------------------------------------------------
// Activation buffers are (batch, length, channels) row-major; conv weights
// are (out_channels, kernel, in_channels). For a window of consecutive
// kernel taps both the weight row and the input slice are contiguous, so
// each output element is one dense dot product.

/// Dot product with four explicit partial sums. The fixed summation order
/// keeps results bit-reproducible while breaking the add dependency chain
/// the plain loop would serialize on.
inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
  }
  for (; j < n; ++j) s0 += a[j] * b[j];
  return (s0 + s1) + (s2 + s3);
}

void conv1d_forward_kernel(const double* x, double* y, const double* w,
                           const double* b, std::size_t n, std::size_t len,
                           std::size_t ic, std::size_t oc, std::size_t k) {
  const std::size_t half = k / 2;
  // Output channel as the middle loop keeps one weight row hot across the
  // whole sequence, so the weight matrix streams once per sample.
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x + s * len * ic;
    double* ys = y + s * len * oc;
    for (std::size_t o = 0; o < oc; ++o) {
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t k_lo = t >= half ? 0 : half - t;
        const std::size_t k_hi = std::min(k, len + half - t);
        const double* window = xs + (t + k_lo - half) * ic;
        const std::size_t span = (k_hi - k_lo) * ic;
        const double* wrow = w + (o * k + k_lo) * ic;
        ys[t * oc + o] = b[o] + dot(wrow, window, span);
      }
    }
  }
}

void conv1d_backward_kernel(const double* __restrict x,
                            const double* __restrict dy,
                            const double* __restrict w,
                            double* __restrict dx, double* __restrict dw,
                            double* __restrict db, std::size_t n,
                            std::size_t len, std::size_t ic, std::size_t oc,
                            std::size_t k) {
  const std::size_t half = k / 2;
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x + s * len * ic;
    double* dxs = dx + s * len * ic;
    const double* dys = dy + s * len * oc;
    for (std::size_t o = 0; o < oc; ++o) {
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t k_lo = t >= half ? 0 : half - t;
        const std::size_t k_hi = std::min(k, len + half - t);
        const double* window = xs + (t + k_lo - half) * ic;
        double* dwindow = dxs + (t + k_lo - half) * ic;
        const std::size_t span = (k_hi - k_lo) * ic;
        const double g = dys[t * oc + o];
        db[o] += g;
        const double* wrow = w + (o * k + k_lo) * ic;
        double* dwrow = dw + (o * k + k_lo) * ic;
        for (std::size_t j = 0; j < span; ++j) {
          dwindow[j] += g * wrow[j];
          dwrow[j] += g * window[j];
        }
      }
    }
  }
}

void dense_forward_kernel(const double* x, double* y, const double* w,
                          const double* b, std::size_t n, std::size_t in_f,
                          std::size_t out_f) {
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x + s * in_f;
    double* ys = y + s * out_f;
    for (std::size_t o = 0; o < out_f; ++o) {
      ys[o] = b[o] + dot(w + o * in_f, xs, in_f);
    }
  }
}

void dense_backward_kernel(const double* __restrict x,
                           const double* __restrict dy,
                           const double* __restrict w, double* __restrict dx,
                           double* __restrict dw, double* __restrict db,
                           std::size_t n, std::size_t in_f,
                           std::size_t out_f) {
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x + s * in_f;
    double* dxs = dx + s * in_f;
    const double* dys = dy + s * out_f;
    for (std::size_t o = 0; o < out_f; ++o) {
      const double g = dys[o];
      db[o] += g;
      const double* wrow = w + o * in_f;
      double* dwrow = dw + o * in_f;
      for (std::size_t i = 0; i < in_f; ++i) {
        dxs[i] += g * wrow[i];
        dwrow[i] += g * xs[i];
      }
    }
  }
}

std::vector<std::size_t> batch_shape(const std::vector<std::size_t>& per_sample,
                                     std::size_t n) {
  std::vector<std::size_t> shape{n};
  shape.insert(shape.end(), per_sample.begin(), per_sample.end());
  return shape;
}

struct ForwardTrace {
  // activations[i] is the input of layer i; activations.back() the output.
  std::vector<Tensor> activations;
};

void check_batch_shape(const NetworkModel& model, const Tensor& batch) {
  const auto& expect = model.input_shape();
  bool ok = batch.rank() == expect.size() + 1 && batch.extent(0) > 0;
  for (std::size_t d = 0; ok && d < expect.size(); ++d) {
    ok = batch.extent(d + 1) == expect[d];
  }
  if (!ok) {
    throw ValidationError("batch shape does not match the model input shape");
  }
}

ForwardTrace run_forward(const NetworkModel& model, const Tensor& batch) {
  check_batch_shape(model, batch);
  const std::size_t n = batch.extent(0);

  ForwardTrace trace;
  trace.activations.reserve(model.layers().size() + 1);
  trace.activations.push_back(batch);

  std::vector<std::size_t> sample_shape = model.input_shape();
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    const LayerSpec& spec = model.layers()[li];
    const Tensor& in = trace.activations.back();
    std::vector<std::size_t> out_shape = layer_output_shape(spec, sample_shape);

    switch (spec.kind) {
      case LayerKind::conv1d: {
        Tensor out(batch_shape(out_shape, n));
        conv1d_forward_kernel(in.data(), out.data(),
                              model.weights(li).data(),
                              model.biases(li).data(), n, sample_shape[0],
                              spec.in_channels, spec.out_channels,
                              spec.kernel_size);
        trace.activations.push_back(std::move(out));
        break;
      }
      case LayerKind::dense: {
        Tensor out(batch_shape(out_shape, n));
        dense_forward_kernel(in.data(), out.data(), model.weights(li).data(),
                             model.biases(li).data(), n, spec.in_features,
                             spec.out_features);
        trace.activations.push_back(std::move(out));
        break;
      }
      case LayerKind::activation: {
        Tensor out(batch_shape(out_shape, n));
        const double* src = in.data();
        double* dst = out.data();
        if (spec.fn == ActivationFn::relu) {
          for (std::size_t i = 0; i < in.size(); ++i) {
            dst[i] = src[i] > 0.0 ? src[i] : 0.0;
          }
        } else {
          for (std::size_t i = 0; i < in.size(); ++i) {
            dst[i] = std::tanh(src[i]);
          }
        }
        trace.activations.push_back(std::move(out));
        break;
      }
      case LayerKind::flatten: {
        trace.activations.push_back(in.reshaped(batch_shape(out_shape, n)));
        break;
      }
    }
    sample_shape = std::move(out_shape);
  }
  return trace;
}

Gradients zero_gradients(const NetworkModel& model) {
  Gradients g;
  g.weights.reserve(model.layers().size());
  g.biases.reserve(model.layers().size());
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    g.weights.emplace_back(Tensor(model.weights(li).shape()));
    g.biases.emplace_back(Tensor(model.biases(li).shape()));
  }
  return g;
}

Gradients backward_from_trace(const NetworkModel& model,
                              const ForwardTrace& trace,
                              const Tensor& target) {
  const Tensor& output = trace.activations.back();
  if (!output.same_shape(target)) {
    throw ValidationError("target shape does not match the model output");
  }

  Gradients grads = zero_gradients(model);

  // d(mean squared error)/d(output)
  Tensor delta(output.shape());
  const double scale = 2.0 / static_cast<double>(output.size());
  for (std::size_t i = 0; i < output.size(); ++i) {
    delta[i] = scale * (output[i] - target[i]);
  }

  const std::size_t n = output.extent(0);
  for (std::size_t li = model.layers().size(); li-- > 0;) {
    const LayerSpec& spec = model.layers()[li];
    const Tensor& in = trace.activations[li];
    Tensor din(in.shape());

    switch (spec.kind) {
      case LayerKind::conv1d:
        conv1d_backward_kernel(in.data(), delta.data(),
                               model.weights(li).data(), din.data(),
                               grads.weights[li].data(),
                               grads.biases[li].data(), n, in.extent(1),
                               spec.in_channels, spec.out_channels,
                               spec.kernel_size);
        break;
      case LayerKind::dense:
        dense_backward_kernel(in.data(), delta.data(),
                              model.weights(li).data(), din.data(),
                              grads.weights[li].data(),
                              grads.biases[li].data(), n, spec.in_features,
                              spec.out_features);
        break;
      case LayerKind::activation: {
        const double* src = in.data();
        const double* dy = delta.data();
        double* dx = din.data();
        if (spec.fn == ActivationFn::relu) {
          for (std::size_t i = 0; i < in.size(); ++i) {
            dx[i] = src[i] > 0.0 ? dy[i] : 0.0;
          }
        } else {
          for (std::size_t i = 0; i < in.size(); ++i) {
            const double th = std::tanh(src[i]);
            dx[i] = dy[i] * (1.0 - th * th);
          }
        }
        break;
      }
      case LayerKind::flatten:
        din = delta.reshaped(in.shape());
        break;
    }
    delta = std::move(din);
  }
  return grads;
}

}  // namespace

// ---- layer specs ------------------------------------------------------

LayerSpec LayerSpec::conv1d(std::size_t in_channels, std::size_t out_channels,
                            std::size_t kernel_size) {
  if (in_channels == 0 || out_channels == 0 || kernel_size == 0) {
    throw ValidationError("conv1d extents must be positive");
  }
  if (kernel_size % 2 == 0) {
    throw ValidationError("conv1d with same padding needs an odd kernel");
  }
  LayerSpec s;
  s.kind = LayerKind::conv1d;
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  s.kernel_size = kernel_size;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t in_features, std::size_t out_features) {
  if (in_features == 0 || out_features == 0) {
    throw ValidationError("dense extents must be positive");
  }
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.in_features = in_features;
  s.out_features = out_features;
  return s;
}

LayerSpec LayerSpec::activation(ActivationFn fn) {
  LayerSpec s;
  s.kind = LayerKind::activation;
  s.fn = fn;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::flatten;
  return s;
}

std::vector<std::size_t> layer_output_shape(
    const LayerSpec& spec, const std::vector<std::size_t>& input) {
  switch (spec.kind) {
    case LayerKind::conv1d:
      if (input.size() != 2 || input[1] != spec.in_channels) {
        throw ValidationError("conv1d expects (length, " +
                              std::to_string(spec.in_channels) + ") input");
      }
      return {input[0], spec.out_channels};
    case LayerKind::dense:
      if (input.size() != 1 || input[0] != spec.in_features) {
        throw ValidationError("dense expects (" +
                              std::to_string(spec.in_features) + ") input");
      }
      return {spec.out_features};
    case LayerKind::activation:
      return input;
    case LayerKind::flatten:
      if (input.size() != 2) {
        throw ValidationError("flatten expects a (length, channels) input");
      }
      return {input[0] * input[1]};
  }
  throw ValidationError("unknown layer kind");
}

// ---- model ------------------------------------------------------------

NetworkModel::NetworkModel(std::vector<LayerSpec> layers,
                           std::vector<std::size_t> input_shape,
                           std::uint64_t rng_seed)
    : layers_(std::move(layers)),
      input_shape_(std::move(input_shape)),
      rng_seed_(rng_seed) {
  if (layers_.empty()) {
    throw ValidationError("a network needs at least one layer");
  }
  std::vector<std::size_t> shape = input_shape_;
  Rng rng(rng_seed_);
  for (const LayerSpec& spec : layers_) {
    shape = layer_output_shape(spec, shape);
    Tensor w, b;
    if (spec.kind == LayerKind::conv1d) {
      w = Tensor({spec.out_channels, spec.kernel_size, spec.in_channels});
      b = Tensor({spec.out_channels});
      const double limit = std::sqrt(
          6.0 / static_cast<double>(spec.in_channels * spec.kernel_size));
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = rng.uniform(-limit, limit);
      }
    } else if (spec.kind == LayerKind::dense) {
      w = Tensor({spec.out_features, spec.in_features});
      b = Tensor({spec.out_features});
      const double limit =
          std::sqrt(6.0 / static_cast<double>(spec.in_features));
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = rng.uniform(-limit, limit);
      }
    }
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
  }
  output_shape_ = std::move(shape);
}

std::size_t NetworkModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    n += weights_[li].size() + biases_[li].size();
  }
  return n;
}

std::vector<double> NetworkModel::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    flat.insert(flat.end(), weights_[li].storage().begin(),
                weights_[li].storage().end());
    flat.insert(flat.end(), biases_[li].storage().begin(),
                biases_[li].storage().end());
  }
  return flat;
}

void NetworkModel::set_flat_parameters(const std::vector<double>& values) {
  if (values.size() != parameter_count()) {
    throw ValidationError("flat parameter count mismatch: expected " +
                          std::to_string(parameter_count()) + ", got " +
                          std::to_string(values.size()));
  }
  std::size_t pos = 0;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    for (std::size_t i = 0; i < weights_[li].size(); ++i) {
      weights_[li][i] = values[pos++];
    }
    for (std::size_t i = 0; i < biases_[li].size(); ++i) {
      biases_[li][i] = values[pos++];
    }
  }
}

// ---- forward / loss / backward -----------------------------------------

Tensor forward(const NetworkModel& model, const Tensor& batch) {
  ForwardTrace trace = run_forward(model, batch);
  return std::move(trace.activations.back());
}

double mse_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) {
    throw ValidationError("mse_loss shape mismatch");
  }
  if (pred.size() == 0) {
    throw ValidationError("mse_loss needs at least one element");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

Gradients backward(const NetworkModel& model, const Tensor& batch,
                   const Tensor& target) {
  ForwardTrace trace = run_forward(model, batch);
  return backward_from_trace(model, trace, target);
}

// ---- Adam ---------------------------------------------------------------

AdamState::AdamState(const NetworkModel& model) {
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    m_weights.emplace_back(Tensor(model.weights(li).shape()));
    v_weights.emplace_back(Tensor(model.weights(li).shape()));
    m_biases.emplace_back(Tensor(model.biases(li).shape()));
    v_biases.emplace_back(Tensor(model.biases(li).shape()));
  }
}

namespace {

void adam_update(double* p, const double* g, double* m, double* v,
                 std::size_t count, double lr, double beta1, double beta2,
                 double eps, double bias1, double bias2) {
  for (std::size_t i = 0; i < count; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

void adam_step(NetworkModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg) {
  if (grads.weights.size() != model.layers().size() ||
      grads.biases.size() != model.layers().size()) {
    throw ValidationError("gradient layer count mismatch");
  }
  state.step += 1;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    if (!grads.weights[li].same_shape(model.weights(li)) ||
        !grads.biases[li].same_shape(model.biases(li))) {
      throw ValidationError("gradient shape mismatch at layer " +
                            std::to_string(li));
    }
    adam_update(model.weights(li).data(), grads.weights[li].data(),
                state.m_weights[li].data(), state.v_weights[li].data(),
                model.weights(li).size(), cfg.learning_rate, cfg.beta1,
                cfg.beta2, cfg.epsilon, bias1, bias2);
    adam_update(model.biases(li).data(), grads.biases[li].data(),
                state.m_biases[li].data(), state.v_biases[li].data(),
                model.biases(li).size(), cfg.learning_rate, cfg.beta1,
                cfg.beta2, cfg.epsilon, bias1, bias2);
  }
}

// ---- training loop ------------------------------------------------------

namespace {

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (cfg.epochs < 1) throw ValidationError("epoch count must be >= 1");
  if (!(cfg.learning_rate > 0.0)) {
    throw ValidationError("learning rate must be positive");
  }
}

Tensor gather_rows(const Tensor& source, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end) {
  const std::size_t row = source.size() / source.extent(0);
  std::vector<std::size_t> shape = source.shape();
  shape[0] = end - begin;
  Tensor out(std::move(shape));
  for (std::size_t i = begin; i < end; ++i) {
    const double* src = source.data() + order[i] * row;
    std::copy(src, src + row, out.data() + (i - begin) * row);
  }
  return out;
}

}  // namespace

TrainHistory train(NetworkModel& model, const Tensor& train_inputs,
                   const Tensor& train_targets, const Tensor& valid_inputs,
                   const Tensor& valid_targets, const TrainConfig& cfg,
                   const EpochCallback& on_epoch) {
  validate_train_config(cfg);
  check_batch_shape(model, train_inputs);
  check_batch_shape(model, valid_inputs);
  const std::size_t n = train_inputs.extent(0);
  if (train_targets.extent(0) != n ||
      valid_targets.extent(0) != valid_inputs.extent(0)) {
    throw ValidationError("input and target sample counts differ");
  }

  AdamState state(model);
  Rng shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainHistory history;
  history.train_loss.reserve(cfg.epochs);
  history.valid_loss.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double sq_sum = 0.0;
    std::size_t element_count = 0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      Tensor xb = gather_rows(train_inputs, order, begin, end);
      Tensor yb = gather_rows(train_targets, order, begin, end);

      ForwardTrace trace = run_forward(model, xb);
      const double loss = mse_loss(trace.activations.back(), yb);
      if (!std::isfinite(loss)) {
        throw TrainingDivergence(epoch, batch_index, loss);
      }
      Gradients grads = backward_from_trace(model, trace, yb);
      adam_step(model, grads, state, cfg);

      sq_sum += loss * static_cast<double>(yb.size());
      element_count += yb.size();
      ++batch_index;
    }
    history.train_loss.push_back(sq_sum / static_cast<double>(element_count));
    history.valid_loss.push_back(
        mse_loss(forward(model, valid_inputs), valid_targets));
    if (on_epoch) {
      on_epoch(epoch + 1, history.train_loss.back(), history.valid_loss.back());
    }
  }
  return history;
}

// ---- finite-difference verification --------------------------------------

double gradient_check(const NetworkModel& model, const Tensor& batch,
                      const Tensor& target) {
  const Gradients analytic = backward(model, batch, target);
  std::vector<double> analytic_flat;
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    analytic_flat.insert(analytic_flat.end(),
                         analytic.weights[li].storage().begin(),
                         analytic.weights[li].storage().end());
    analytic_flat.insert(analytic_flat.end(),
                         analytic.biases[li].storage().begin(),
                         analytic.biases[li].storage().end());
  }

  NetworkModel probe = model;
  std::vector<double> params = probe.flat_parameters();
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    probe.set_flat_parameters(params);
    const double loss_plus = mse_loss(forward(probe, batch), target);
    params[i] = saved - h;
    probe.set_flat_parameters(params);
    const double loss_minus = mse_loss(forward(probe, batch), target);
    params[i] = saved;

    const double numeric = (loss_plus - loss_minus) / (2.0 * h);
    const double denom = std::max(
        {std::abs(analytic_flat[i]), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(analytic_flat[i] - numeric) / denom);
  }
  return worst;
}

// ---- reference architecture ----------------------------------------------

NetworkModel build_dcnn(std::size_t input_length, std::uint64_t seed) {
  if (input_length < 3 || input_length > 6) {
    throw ValidationError("unsupported input length " +
                          std::to_string(input_length) +
                          " (supported: 3..6)");
  }
  const std::size_t channels[] = {16, 32, 64, 64, 32};
  std::vector<LayerSpec> layers;
  std::size_t in_ch = 1;
  for (std::size_t c : channels) {
    layers.push_back(LayerSpec::conv1d(in_ch, c, 3));
    layers.push_back(LayerSpec::activation(ActivationFn::relu));
    in_ch = c;
  }
  layers.push_back(LayerSpec::flatten());
  layers.push_back(LayerSpec::dense(32 * input_length, 64));
  layers.push_back(LayerSpec::activation(ActivationFn::relu));
  layers.push_back(LayerSpec::dense(64, 16));
  layers.push_back(LayerSpec::activation(ActivationFn::relu));
  layers.push_back(LayerSpec::dense(16, 1));
  return NetworkModel(std::move(layers), {input_length, 1}, seed);
}

// ---- enum names -----------------------------------------------------------

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::dense: return "dense";
    case LayerKind::activation: return "activation";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

std::string to_string(ActivationFn fn) {
  return fn == ActivationFn::relu ? "relu" : "tanh";
}

LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "conv1d") return LayerKind::conv1d;
  if (s == "dense") return LayerKind::dense;
  if (s == "activation") return LayerKind::activation;
  if (s == "flatten") return LayerKind::flatten;
  throw ValidationError("unknown layer kind: " + s);
}

ActivationFn activation_from_string(const std::string& s) {
  if (s == "relu") return ActivationFn::relu;
  if (s == "tanh") return ActivationFn::tanh;
  throw ValidationError("unknown activation: " + s);
}

}  // namespace chf
