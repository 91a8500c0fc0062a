#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "headliner/trainer.hpp"

using namespace headliner;

namespace {

Parameter& scalar_param(ParameterStore& store, const std::string& name, double value, bool regularized = true) {
  Parameter& p = store.add(name, 1, 1, Init::kZero, regularized);
  p.value[0] = value;
  return p;
}

// (x - target)^2 for a 1 x 1 parameter
Expr squared_distance(Graph& g, Parameter& x, double target) {
  Expr d = sub(g.param(x), g.constant(Matrix(1, 1, target)));
  return sum(mul(d, d));
}

}  // namespace

TEST_CASE("adam first step moves each coordinate by about lr") {
  ParameterStore store;
  Parameter& p = store.add("w", 1, 3, Init::kZero);
  p.grad[0] = 2.0;
  p.grad[1] = -0.01;
  p.grad[2] = 50.0;
  adam_amsgrad_step(store, 0.003, 0.0);
  CHECK(p.value[0] == doctest::Approx(-0.003).epsilon(1e-6));
  CHECK(p.value[1] == doctest::Approx(0.003).epsilon(1e-5));
  CHECK(p.value[2] == doctest::Approx(-0.003).epsilon(1e-6));
}

TEST_CASE("adam leaves values unchanged under a zero gradient") {
  ParameterStore store;
  Parameter& p = store.add("w", 2, 2);
  const Matrix before = p.value;
  for (int i = 0; i < 5; ++i) adam_amsgrad_step(store, 0.003, 0.0);
  CHECK(p.value == before);
}

TEST_CASE("amsgrad keeps a non-decreasing second-moment maximum") {
  ParameterStore store;
  Parameter& p = store.add("w", 1, 4, Init::kZero);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 3.0);
  Matrix previous(1, 4);
  for (int step = 0; step < 100; ++step) {
    for (double& g : p.grad.values()) g = noise(rng) * (step < 50 ? 1.0 : 0.01);
    adam_amsgrad_step(store);
    const Matrix& vmax = p.slots[2];
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(vmax[i] >= previous[i]);
      CHECK(vmax[i] >= p.slots[1][i]);
    }
    previous = vmax;
  }
}

TEST_CASE("sgd with momentum: first step, hand trace and velocity limit") {
  ParameterStore store;
  Parameter& x = scalar_param(store, "x", 1.0);

  x.grad[0] = 1.0;
  sgd_momentum_step(store, 0.25, 0.9);
  CHECK(x.value[0] == doctest::Approx(0.75));

  x.grad[0] = 2.0;
  sgd_momentum_step(store, 0.25, 0.9);
  // velocity 0.9 * 1 + 2 = 2.9
  CHECK(x.slots[0][0] == doctest::Approx(2.9));
  CHECK(x.value[0] == doctest::Approx(0.75 - 0.25 * 2.9));

  ParameterStore other;
  Parameter& y = scalar_param(other, "y", 0.0);
  for (int i = 0; i < 400; ++i) {
    y.grad[0] = 0.5;
    sgd_momentum_step(other, 0.25, 0.9);
  }
  CHECK(y.slots[0][0] == doctest::Approx(0.5 / (1.0 - 0.9)).epsilon(1e-9));
}

TEST_CASE("l2 decays regularized values geometrically and skips biases") {
  ParameterStore store;
  Parameter& w = scalar_param(store, "w", 2.0);
  Parameter& b = scalar_param(store, "b", 2.0, false);
  for (int i = 0; i < 10; ++i) sgd_momentum_step(store, 0.5, 0.0, 0.1);
  CHECK(w.value[0] == doctest::Approx(2.0 * std::pow(1.0 - 0.05, 10)).epsilon(1e-12));
  CHECK(b.value[0] == 2.0);
}

TEST_CASE("adagrad starts from the initial accumulator") {
  ParameterStore store;
  Parameter& x = scalar_param(store, "x", 0.0);
  x.grad[0] = 0.3;
  adagrad_step(store, 0.15, 0.1);
  CHECK(x.slots[0][0] == doctest::Approx(0.1 + 0.09));
  CHECK(x.value[0] == doctest::Approx(-0.15 * 0.3 / std::sqrt(0.19)));
  x.grad[0] = 0.3;
  adagrad_step(store, 0.15, 0.1);
  CHECK(x.slots[0][0] == doctest::Approx(0.1 + 0.18));
}

TEST_CASE("frozen tensors are never updated") {
  ParameterStore store;
  Parameter& f = store.add_frozen("table", Matrix(1, 2, {1.0, 2.0}));
  f.grad.fill(5.0);
  adam_amsgrad_step(store);
  sgd_momentum_step(store);
  CHECK(f.value == Matrix(1, 2, {1.0, 2.0}));
}

TEST_CASE("optimizer names round-trip") {
  for (auto k : {OptimizerKind::kAdamAmsgrad, OptimizerKind::kSgdMomentum, OptimizerKind::kAdagrad}) {
    CHECK(parse_optimizer(to_string(k)) == k);
  }
  CHECK_THROWS(parse_optimizer("rmsprop"));
  const auto lm = TrainerConfig::language_model();
  CHECK(lm.optimizer == OptimizerKind::kSgdMomentum);
  CHECK(lm.lr == 0.25);
}

TEST_CASE("schedule: halve every two stale epochs, stop after three") {
  using A = ScheduleAction;
  auto act = [](std::vector<double> h) { return schedule_update(h); };
  CHECK(act({5.0}) == A::kContinue);
  CHECK(act({5.0, 4.0, 3.0}) == A::kContinue);
  CHECK(act({5.0, 4.0, 4.5}) == A::kContinue);
  CHECK(act({5.0, 4.0, 4.5, 4.2}) == A::kHalve);
  CHECK(act({5.0, 4.0, 4.5, 4.2, 4.1}) == A::kStop);
  // equal loss is not an improvement
  CHECK(act({5.0, 4.0, 4.0, 4.0}) == A::kHalve);
  // a new minimum resets the count
  CHECK(act({5.0, 4.0, 4.5, 4.2, 3.9}) == A::kContinue);
  CHECK(act({5.0, 4.0, 4.5, 4.2, 3.9, 4.0}) == A::kContinue);
  CHECK_THROWS(act({}));
}

TEST_CASE("fit converges on a quadratic and restores the best parameters") {
  ParameterStore store;
  Parameter& x = scalar_param(store, "x", 0.0);
  const std::vector<double> targets{2.0, 3.0, 4.0};
  TrainerConfig config;
  config.optimizer = OptimizerKind::kSgdMomentum;
  config.lr = 0.01;
  config.l2 = 0.0;
  config.batch_size = 2;
  config.max_epochs = 100;
  auto dev = [&](std::size_t) {
    Graph g;
    return squared_distance(g, x, 3.0).scalar();
  };
  const auto result = fit(
      store, targets.size(), [&](Graph& g, std::size_t i) { return squared_distance(g, x, targets[i]); }, 1, dev,
      config);
  CHECK(result.epochs.size() <= 100);
  CHECK(x.value[0] == doctest::Approx(3.0).epsilon(0.05));
  CHECK(dev(0) == doctest::Approx(result.best_dev_loss));
  for (const auto& e : result.epochs) CHECK(e.dev_loss >= result.best_dev_loss);
}

TEST_CASE("fit is deterministic for a fixed seed and writes the csv log") {
  const auto log_path = std::filesystem::temp_directory_path() / "headliner_fit_log.csv";
  auto run = [&](std::uint64_t seed, bool log) {
    ParameterStore store;
    Parameter& w = store.add("w", 1, 3);
    TrainerConfig config;
    config.seed = seed;
    config.max_epochs = 6;
    config.batch_size = 3;
    if (log) config.log_path = log_path.string();
    const std::vector<double> data{0.5, -1.0, 2.0, 0.1, 0.7, -0.3, 1.1};
    auto loss = [&](Graph& g, std::size_t i) {
      Expr h = dropout(g.param(w), 0.5);
      Expr d = sub(h, g.constant(Matrix(1, 3, data[i])));
      return sum(mul(d, d));
    };
    fit(store, data.size(), loss, 0, {}, config);
    return w.value;
  };
  const Matrix a = run(11, true);
  CHECK(run(11, false) == a);
  CHECK_FALSE(run(12, false) == a);

  std::ifstream in(log_path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "epoch,split,loss,lr,seconds");
  CHECK(row.rfind("1,train,", 0) == 0);
}

TEST_CASE("fit stops early when the dev loss stalls") {
  ParameterStore store;
  Parameter& x = scalar_param(store, "x", 0.0);
  TrainerConfig config;
  config.max_epochs = 50;
  int calls = 0;
  // dev loss never improves after the first epoch
  auto dev = [&](std::size_t) { return calls++ == 0 ? 1.0 : 2.0; };
  const auto result = fit(
      store, 1, [&](Graph& g, std::size_t) { return squared_distance(g, x, 1.0); }, 1, dev, config);
  REQUIRE(result.epochs.size() == 4);
  CHECK(result.epochs[2].action == ScheduleAction::kHalve);
  CHECK(result.epochs[3].action == ScheduleAction::kStop);
  CHECK(result.epochs[3].lr == doctest::Approx(config.lr / 2));
  CHECK(result.best_epoch == 1);
}

TEST_CASE("example seeds differ across epochs and examples") {
  std::set<std::uint64_t> seen;
  for (int e = 0; e < 5; ++e) {
    for (std::size_t i = 0; i < 50; ++i) seen.insert(example_seed(3, e, i));
  }
  CHECK(seen.size() == 250);
  CHECK(example_seed(3, 1, 2) == example_seed(3, 1, 2));
}

TEST_CASE("mean_loss is identical across thread counts") {
  auto f = [](std::size_t i) { return 1.0 / static_cast<double>(i + 1); };
  const double serial = mean_loss(1000, f, 1);
  CHECK(mean_loss(1000, f, 4) == serial);
  CHECK(mean_loss(0, f, 4) == 0.0);
}
