#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "chf/errors.hpp"
#include "chf/network.hpp"
#include "chf/rng.hpp"

using namespace chf;

namespace {

// Straightforward per-element reference evaluation, written directly from
// the layer definitions with no shared code: used to cross-check forward().
std::vector<std::vector<double>> reference_forward_sample(
    const NetworkModel& model, std::vector<std::vector<double>> activation) {
  // activation is (length, channels) for conv stacks; a dense input is a
  // single row.
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    const LayerSpec& spec = model.layers()[li];
    if (spec.kind == LayerKind::conv1d) {
      const long len = static_cast<long>(activation.size());
      const long half = static_cast<long>(spec.kernel_size) / 2;
      std::vector<std::vector<double>> next(
          activation.size(), std::vector<double>(spec.out_channels, 0.0));
      for (long t = 0; t < len; ++t) {
        for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
          double acc = model.biases(li)[oc];
          for (long k = 0; k < static_cast<long>(spec.kernel_size); ++k) {
            const long s = t + k - half;
            if (s < 0 || s >= len) continue;
            for (std::size_t ic = 0; ic < spec.in_channels; ++ic) {
              const double w = model.weights(li)[(oc * spec.kernel_size +
                                                  static_cast<std::size_t>(k)) *
                                                     spec.in_channels +
                                                 ic];
              acc += w * activation[static_cast<std::size_t>(s)][ic];
            }
          }
          next[static_cast<std::size_t>(t)][oc] = acc;
        }
      }
      activation = next;
    } else if (spec.kind == LayerKind::dense) {
      std::vector<double> next(spec.out_features, 0.0);
      for (std::size_t o = 0; o < spec.out_features; ++o) {
        double acc = model.biases(li)[o];
        for (std::size_t i = 0; i < spec.in_features; ++i) {
          acc += model.weights(li)[o * spec.in_features + i] * activation[0][i];
        }
        next[o] = acc;
      }
      activation = {next};
    } else if (spec.kind == LayerKind::activation) {
      for (auto& row : activation) {
        for (double& v : row) {
          v = spec.fn == ActivationFn::relu ? std::max(0.0, v) : std::tanh(v);
        }
      }
    } else {  // flatten
      std::vector<double> flat;
      for (const auto& row : activation) {
        flat.insert(flat.end(), row.begin(), row.end());
      }
      activation = {flat};
    }
  }
  return activation;
}

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double lo,
                     double hi) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("identity dense layer passes its input through") {
  NetworkModel model({LayerSpec::dense(3, 3)}, {3}, 1);
  model.weights(0).fill(0.0);
  for (std::size_t i = 0; i < 3; ++i) model.weights(0).at(i, i) = 1.0;
  model.biases(0).fill(0.0);

  Tensor batch({2, 3}, {1, 2, 3, -4, 0.5, 6});
  Tensor out = forward(model, batch);
  CHECK(out.shape() == std::vector<std::size_t>{2, 3});
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(out[i] == batch[i]);
}

TEST_CASE("conv1d with zero kernels emits its bias everywhere") {
  NetworkModel model({LayerSpec::conv1d(1, 2, 3)}, {4, 1}, 1);
  model.weights(0).fill(0.0);
  model.biases(0)[0] = 2.5;
  model.biases(0)[1] = -1.25;

  Rng rng(11);
  Tensor batch = random_tensor(rng, {3, 4, 1}, -5, 5);
  Tensor out = forward(model, batch);
  CHECK(out.shape() == std::vector<std::size_t>{3, 4, 2});
  for (std::size_t n = 0; n < 3; ++n) {
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(out.at(n, t, 0) == 2.5);
      CHECK(out.at(n, t, 1) == -1.25);
    }
  }
}

TEST_CASE("forward matches the naive per-element reference") {
  Rng rng(12);
  SUBCASE("conv stack") {
    NetworkModel model(
        {LayerSpec::conv1d(1, 4, 3), LayerSpec::activation(ActivationFn::relu),
         LayerSpec::conv1d(4, 3, 3), LayerSpec::flatten(),
         LayerSpec::dense(15, 2)},
        {5, 1}, 77);
    Tensor batch = random_tensor(rng, {6, 5, 1}, -2, 2);
    Tensor out = forward(model, batch);
    for (std::size_t n = 0; n < 6; ++n) {
      std::vector<std::vector<double>> sample(5, std::vector<double>(1));
      for (std::size_t t = 0; t < 5; ++t) sample[t][0] = batch.at(n, t, 0);
      auto want = reference_forward_sample(model, sample);
      for (std::size_t o = 0; o < 2; ++o) {
        CHECK(out.at(n, o) == doctest::Approx(want[0][o]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("dense tanh stack") {
    NetworkModel model(
        {LayerSpec::dense(3, 8), LayerSpec::activation(ActivationFn::tanh),
         LayerSpec::dense(8, 2)},
        {3}, 78);
    Tensor batch = random_tensor(rng, {4, 3}, -1, 1);
    Tensor out = forward(model, batch);
    for (std::size_t n = 0; n < 4; ++n) {
      std::vector<std::vector<double>> sample{
          {batch.at(n, 0), batch.at(n, 1), batch.at(n, 2)}};
      auto want = reference_forward_sample(model, sample);
      for (std::size_t o = 0; o < 2; ++o) {
        CHECK(out.at(n, o) == doctest::Approx(want[0][o]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("forward is pure and validates batch shapes") {
  NetworkModel model = build_dcnn(3, 5);
  Rng rng(13);
  Tensor batch = random_tensor(rng, {2, 3, 1}, -1, 1);
  Tensor a = forward(model, batch);
  Tensor b = forward(model, batch);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  CHECK_THROWS_AS(forward(model, random_tensor(rng, {2, 4, 1}, -1, 1)),
                  ValidationError);
  CHECK_THROWS_AS(forward(model, random_tensor(rng, {2, 3}, -1, 1)),
                  ValidationError);
}

TEST_CASE("mse_loss hand cases and the term-by-term oracle") {
  Tensor a({2, 1}, {1, 2});
  CHECK(mse_loss(a, a) == 0.0);

  Tensor zeros({2, 1}, {0, 0});
  Tensor ones({2, 1}, {1, 1});
  CHECK(mse_loss(zeros, ones) == 1.0);

  Rng rng(14);
  Tensor p = random_tensor(rng, {7, 3}, -5, 5);
  Tensor t = random_tensor(rng, {7, 3}, -5, 5);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += (p[i] - t[i]) * (p[i] - t[i]);
  }
  CHECK(mse_loss(p, t) == doctest::Approx(sum / 21.0).epsilon(1e-12));

  Tensor wrong({3, 1}, {0, 0, 0});
  CHECK_THROWS_AS(mse_loss(p, wrong), ValidationError);
}

TEST_CASE("mse_loss is invariant under a common element permutation") {
  Rng rng(141);
  Tensor p({40, 1});
  Tensor t({40, 1});
  for (std::size_t i = 0; i < 40; ++i) {
    p[i] = rng.uniform(-10, 10);
    t[i] = rng.uniform(-10, 10);
  }
  const double base = mse_loss(p, t);

  std::vector<std::size_t> order(40);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  Tensor ps({40, 1});
  Tensor ts({40, 1});
  for (std::size_t i = 0; i < 40; ++i) {
    ps[i] = p[order[i]];
    ts[i] = t[order[i]];
  }
  CHECK(mse_loss(ps, ts) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("backward on an all-zero setup returns zero gradients") {
  NetworkModel model({LayerSpec::dense(2, 1)}, {2}, 1);
  model.weights(0).fill(0.0);
  Tensor batch({3, 2});   // zeros
  Tensor target({3, 1});  // zeros
  Gradients g = backward(model, batch, target);
  for (std::size_t i = 0; i < g.weights[0].size(); ++i) {
    CHECK(g.weights[0][i] == 0.0);
  }
  CHECK(g.biases[0][0] == 0.0);
}

TEST_CASE("duplicating every sample leaves the mean-loss gradients unchanged") {
  Rng rng(15);
  NetworkModel model(
      {LayerSpec::conv1d(1, 3, 3), LayerSpec::activation(ActivationFn::relu),
       LayerSpec::flatten(), LayerSpec::dense(12, 1)},
      {4, 1}, 42);
  Tensor batch = random_tensor(rng, {5, 4, 1}, -1, 1);
  Tensor target = random_tensor(rng, {5, 1}, -1, 1);

  Tensor doubled({10, 4, 1});
  Tensor doubled_t({10, 1});
  for (std::size_t n = 0; n < 5; ++n) {
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t t = 0; t < 4; ++t) {
        doubled.at(n + 5 * r, t, 0) = batch.at(n, t, 0);
      }
      doubled_t.at(n + 5 * r, 0) = target.at(n, 0);
    }
  }

  Gradients g1 = backward(model, batch, target);
  Gradients g2 = backward(model, doubled, doubled_t);
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    for (std::size_t i = 0; i < g1.weights[li].size(); ++i) {
      CHECK(g2.weights[li][i] ==
            doctest::Approx(g1.weights[li][i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradient check: every layer kind within 1e-4") {
  Rng rng(16);
  SUBCASE("conv + relu + dense") {
    NetworkModel model(
        {LayerSpec::conv1d(1, 4, 3), LayerSpec::activation(ActivationFn::relu),
         LayerSpec::conv1d(4, 2, 3), LayerSpec::activation(ActivationFn::relu),
         LayerSpec::flatten(), LayerSpec::dense(8, 4),
         LayerSpec::activation(ActivationFn::relu), LayerSpec::dense(4, 1)},
        {4, 1}, 101);
    Tensor batch = random_tensor(rng, {6, 4, 1}, -2, 2);
    Tensor target = random_tensor(rng, {6, 1}, -2, 2);
    CHECK(gradient_check(model, batch, target) <= 1e-4);
  }
  SUBCASE("dense tanh autoencoder-shaped stack") {
    NetworkModel model(
        {LayerSpec::dense(3, 8), LayerSpec::activation(ActivationFn::tanh),
         LayerSpec::dense(8, 2), LayerSpec::dense(2, 8),
         LayerSpec::activation(ActivationFn::tanh), LayerSpec::dense(8, 3)},
        {3}, 102);
    Tensor batch = random_tensor(rng, {5, 3}, -1.5, 1.5);
    CHECK(gradient_check(model, batch, batch) <= 1e-4);
  }
}

TEST_CASE("gradient check: purely linear model within 1e-7") {
  Rng rng(17);
  NetworkModel model({LayerSpec::dense(4, 3), LayerSpec::dense(3, 1)}, {4},
                     103);
  Tensor batch = random_tensor(rng, {6, 4}, -2, 2);
  Tensor target = random_tensor(rng, {6, 1}, -2, 2);
  CHECK(gradient_check(model, batch, target) <= 1e-7);
}

TEST_CASE("a corrupted gradient entry is flagged by the comparison rule") {
  Rng rng(18);
  NetworkModel model({LayerSpec::dense(3, 2), LayerSpec::dense(2, 1)}, {3},
                     104);
  Tensor batch = random_tensor(rng, {4, 3}, -1, 1);
  Tensor target = random_tensor(rng, {4, 1}, -1, 1);

  Gradients analytic = backward(model, batch, target);
  const double corrupted = analytic.weights[0][0] + 1.0;

  // test-side central difference for that one entry
  NetworkModel probe = model;
  const double h = 1e-5;
  probe.weights(0)[0] = model.weights(0)[0] + h;
  const double lp = mse_loss(forward(probe, batch), target);
  probe.weights(0)[0] = model.weights(0)[0] - h;
  const double lm = mse_loss(forward(probe, batch), target);
  const double numeric = (lp - lm) / (2 * h);

  const double err = std::abs(corrupted - numeric) /
                     std::max({std::abs(corrupted), std::abs(numeric), 1e-12});
  CHECK(err > 1e-2);
}

TEST_CASE("adam: zero gradients leave parameters and moments untouched") {
  NetworkModel model({LayerSpec::dense(2, 2)}, {2}, 105);
  const std::vector<double> before = model.flat_parameters();
  AdamState state(model);
  Gradients zero{{Tensor({2, 2})}, {Tensor({2})}};
  TrainConfig cfg;
  adam_step(model, zero, state, cfg);
  CHECK(model.flat_parameters() == before);
  CHECK(state.step == 1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(state.m_weights[0][i] == 0.0);
}

TEST_CASE("adam: hand-evaluated bias-corrected first step") {
  // parameter 0, gradient 1, lr 1e-3: m_hat = 1, v_hat = 1,
  // new value = -1e-3 / (1 + 1e-8)
  NetworkModel model({LayerSpec::dense(1, 1)}, {1}, 106);
  model.weights(0)[0] = 0.0;
  model.biases(0)[0] = 0.0;
  AdamState state(model);
  Gradients g{{Tensor({1, 1}, {1.0})}, {Tensor({1}, {0.0})}};
  TrainConfig cfg;
  adam_step(model, g, state, cfg);
  CHECK(model.weights(0)[0] ==
        doctest::Approx(-0.00099999999).epsilon(1e-9));
}

TEST_CASE("adam: constant gradient moves monotonically against it") {
  NetworkModel model({LayerSpec::dense(1, 1)}, {1}, 107);
  model.weights(0)[0] = 0.5;
  AdamState state(model);
  Gradients g{{Tensor({1, 1}, {2.0})}, {Tensor({1}, {0.0})}};
  TrainConfig cfg;
  double prev = model.weights(0)[0];
  for (int step = 0; step < 2; ++step) {
    adam_step(model, g, state, cfg);
    CHECK(model.weights(0)[0] < prev);
    prev = model.weights(0)[0];
  }
}

TEST_CASE("adam rejects mismatched gradient shapes") {
  NetworkModel model({LayerSpec::dense(2, 2)}, {2}, 108);
  AdamState state(model);
  Gradients bad{{Tensor({1, 2})}, {Tensor({2})}};
  CHECK_THROWS_AS(adam_step(model, bad, state, TrainConfig{}), ValidationError);
}

TEST_CASE("training fits a small linear synthetic problem to R^2 > 0.99") {
  // y = 2 p - g + 3 x + noise(0.01)
  Rng rng(19);
  const std::size_t n = 400;
  Tensor x({n, 3});
  Tensor y({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    const double p = rng.uniform(-1, 1);
    const double g = rng.uniform(-1, 1);
    const double q = rng.uniform(-1, 1);
    x.at(i, 0) = p;
    x.at(i, 1) = g;
    x.at(i, 2) = q;
    y.at(i, 0) = 2 * p - g + 3 * q + 0.01 * (rng.uniform(-1, 1));
  }
  Tensor x_valid({80, 3});
  Tensor y_valid({80, 1});
  for (std::size_t i = 0; i < 80; ++i) {
    const double p = rng.uniform(-1, 1);
    const double g = rng.uniform(-1, 1);
    const double q = rng.uniform(-1, 1);
    x_valid.at(i, 0) = p;
    x_valid.at(i, 1) = g;
    x_valid.at(i, 2) = q;
    y_valid.at(i, 0) = 2 * p - g + 3 * q;
  }

  NetworkModel model(
      {LayerSpec::dense(3, 16), LayerSpec::activation(ActivationFn::relu),
       LayerSpec::dense(16, 1)},
      {3}, 2024);
  TrainConfig cfg;
  cfg.epochs = 120;
  cfg.batch_size = 32;
  cfg.seed = 5;
  TrainHistory hist = train(model, x, y, x_valid, y_valid, cfg);
  CHECK(hist.train_loss.size() == 120);
  CHECK(hist.valid_loss.size() == 120);
  CHECK(hist.train_loss.back() < hist.train_loss.front());

  // held-out R^2
  Tensor pred = forward(model, x_valid);
  double mean = 0.0;
  for (std::size_t i = 0; i < 80; ++i) mean += y_valid.at(i, 0);
  mean /= 80;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < 80; ++i) {
    ss_res += (y_valid.at(i, 0) - pred.at(i, 0)) * (y_valid.at(i, 0) - pred.at(i, 0));
    ss_tot += (y_valid.at(i, 0) - mean) * (y_valid.at(i, 0) - mean);
  }
  CHECK(1.0 - ss_res / ss_tot > 0.99);
}

TEST_CASE("training is bitwise reproducible for a fixed seed") {
  Rng rng(20);
  Tensor x = random_tensor(rng, {64, 3, 1}, -1, 1);
  Tensor y = random_tensor(rng, {64, 1}, -1, 1);

  auto run = [&] {
    NetworkModel model = build_dcnn(3, 31415);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 27182;
    train(model, x, y, x, y, cfg);
    return model.flat_parameters();
  };
  CHECK(run() == run());  // bitwise
}

TEST_CASE("training aborts with a diagnostic when the loss diverges") {
  Rng rng(21);
  Tensor x = random_tensor(rng, {32, 2}, 1e3, 1e4);
  Tensor y = random_tensor(rng, {32, 1}, 1e3, 1e4);
  NetworkModel model({LayerSpec::dense(2, 1)}, {2}, 1);
  TrainConfig cfg;
  cfg.epochs = 50;
  // Adam moves parameters by about the learning rate per step, so the rate
  // must be extreme enough that the squared error overflows a double.
  cfg.learning_rate = 1e200;
  try {
    train(model, x, y, x, y, cfg);
    FAIL("expected TrainingDivergence");
  } catch (const TrainingDivergence& e) {
    CHECK_FALSE(std::isfinite(e.loss()));
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("build_dcnn wires the published architecture family") {
  for (std::size_t len : {3u, 4u, 5u, 6u}) {
    NetworkModel model = build_dcnn(len, 1);
    std::size_t weight_layers = 0;
    std::size_t conv_layers = 0;
    for (const LayerSpec& spec : model.layers()) {
      if (spec.has_parameters()) ++weight_layers;
      if (spec.kind == LayerKind::conv1d) ++conv_layers;
    }
    CHECK(weight_layers == 8);
    CHECK(conv_layers == 5);
    CHECK(model.input_shape() == std::vector<std::size_t>{len, 1});
    CHECK(model.output_shape() == std::vector<std::size_t>{1});
    CHECK(model.parameter_count() > 0);

    Rng rng(22);
    Tensor batch = random_tensor(rng, {2, len, 1}, -1, 1);
    Tensor out = forward(model, batch);
    CHECK(out.shape() == std::vector<std::size_t>{2, 1});
  }
  CHECK_THROWS_AS(build_dcnn(2, 1), ValidationError);
  CHECK_THROWS_AS(build_dcnn(7, 1), ValidationError);

  MESSAGE("build_dcnn(3) parameter count: ",
          build_dcnn(3, 1).parameter_count());
  MESSAGE("build_dcnn(6) parameter count: ",
          build_dcnn(6, 1).parameter_count());
}

TEST_CASE("gradient check holds on the full regression architectures") {
  Rng rng(23);
  for (std::size_t len : {3u, 6u}) {
    NetworkModel model = build_dcnn(len, 7 + len);
    Tensor batch = random_tensor(rng, {2, len, 1}, -1.5, 1.5);
    Tensor target = random_tensor(rng, {2, 1}, -1, 1);
    CHECK(gradient_check(model, batch, target) <= 1e-4);
  }
}

TEST_CASE("layer spec validation") {
  CHECK_THROWS_AS(LayerSpec::conv1d(1, 4, 2), ValidationError);  // even kernel
  CHECK_THROWS_AS(LayerSpec::conv1d(0, 4, 3), ValidationError);
  CHECK_THROWS_AS(LayerSpec::dense(0, 4), ValidationError);
  CHECK_THROWS_AS(
      NetworkModel({LayerSpec::dense(3, 4), LayerSpec::dense(5, 1)}, {3}, 1),
      ValidationError);  // broken chain
  CHECK_THROWS_AS(NetworkModel({}, {3}, 1), ValidationError);
}
