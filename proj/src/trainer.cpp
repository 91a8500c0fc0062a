#include "headliner/trainer.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace headliner {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam_amsgrad") return OptimizerKind::kAdamAmsgrad;
  if (name == "sgd_momentum") return OptimizerKind::kSgdMomentum;
  if (name == "adagrad") return OptimizerKind::kAdagrad;
  throw std::invalid_argument("unknown optimizer: " + name);
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kAdamAmsgrad: return "adam_amsgrad";
    case OptimizerKind::kSgdMomentum: return "sgd_momentum";
    case OptimizerKind::kAdagrad: return "adagrad";
  }
  return "?";
}

TrainerConfig TrainerConfig::language_model() {
  TrainerConfig c;
  c.optimizer = OptimizerKind::kSgdMomentum;
  c.lr = 0.25;
  c.l2 = 0.0;
  return c;
}

void TrainerConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (l2 < 0.0) throw std::invalid_argument("l2 weight must be non-negative");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience_halve < 1 || patience_halve >= patience_stop) {
    throw std::invalid_argument("need 1 <= patience_halve < patience_stop");
  }
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0, 1)");
}

namespace {

// Sizes the optimizer state on first use; true when freshly created.
bool ensure_slots(Parameter& p, std::size_t count) {
  if (p.slots.size() == count) return false;
  p.slots.assign(count, Matrix(p.value.rows(), p.value.cols()));
  p.steps = 0;
  return true;
}

double regularized_grad(const Parameter& p, std::size_t i, double l2) {
  return p.grad[i] + (p.regularized ? l2 * p.value[i] : 0.0);
}

}  // namespace

void adam_amsgrad_step(ParameterStore& params, double lr, double l2, double beta1, double beta2, double eps) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params.at(k);
    if (!p.trainable) continue;
    ensure_slots(p, 3);
    ++p.steps;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(p.steps));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(p.steps));
    Matrix& m = p.slots[0];
    Matrix& v = p.slots[1];
    Matrix& vmax = p.slots[2];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = regularized_grad(p, i, l2);
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      vmax[i] = std::max(vmax[i], v[i]);
      p.value[i] -= lr * (m[i] / c1) / (std::sqrt(vmax[i] / c2) + eps);
    }
  }
}

void sgd_momentum_step(ParameterStore& params, double lr, double momentum, double l2) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params.at(k);
    if (!p.trainable) continue;
    ensure_slots(p, 1);
    ++p.steps;
    Matrix& velocity = p.slots[0];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      velocity[i] = momentum * velocity[i] + regularized_grad(p, i, l2);
      p.value[i] -= lr * velocity[i];
    }
  }
}

void adagrad_step(ParameterStore& params, double lr, double initial_accumulator, double l2, double eps) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params.at(k);
    if (!p.trainable) continue;
    if (ensure_slots(p, 1)) p.slots[0].fill(initial_accumulator);
    ++p.steps;
    Matrix& acc = p.slots[0];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = regularized_grad(p, i, l2);
      acc[i] += g * g;
      p.value[i] -= lr * g / (std::sqrt(acc[i]) + eps);
    }
  }
}

void optimizer_step(OptimizerKind kind, ParameterStore& params, double lr, double l2) {
  switch (kind) {
    case OptimizerKind::kAdamAmsgrad: adam_amsgrad_step(params, lr, l2); break;
    case OptimizerKind::kSgdMomentum: sgd_momentum_step(params, lr, 0.9, l2); break;
    case OptimizerKind::kAdagrad: adagrad_step(params, lr, 0.1, l2); break;
  }
}

std::string to_string(ScheduleAction action) {
  switch (action) {
    case ScheduleAction::kContinue: return "continue";
    case ScheduleAction::kHalve: return "halve_lr";
    case ScheduleAction::kStop: return "stop";
  }
  return "?";
}

ScheduleAction schedule_update(std::span<const double> history, int patience_halve, int patience_stop) {
  if (history.empty()) throw std::invalid_argument("schedule_update: empty history");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] < history[best]) best = i;
  }
  const auto stale = static_cast<int>(history.size() - 1 - best);
  if (stale >= patience_stop) return ScheduleAction::kStop;
  if (stale > 0 && stale % patience_halve == 0) return ScheduleAction::kHalve;
  return ScheduleAction::kContinue;
}

std::uint64_t example_seed(std::uint64_t seed, int epoch, std::size_t example) {
  // splitmix64 over the packed triple
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch) * 0xBF58476D1CE4E5B9ULL +
                    static_cast<std::uint64_t>(example) * 0x94D049BB133111EBULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double mean_loss(std::size_t n, const DevLoss& loss, int threads) {
  if (n == 0) return 0.0;
  std::vector<double> losses(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads))
  for (std::int64_t i = 0; i < count; ++i) losses[static_cast<std::size_t>(i)] = loss(static_cast<std::size_t>(i));
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
}

FitResult fit(ParameterStore& params, std::size_t num_train, const ExampleLoss& train_loss, std::size_t num_dev,
              const DevLoss& dev_loss, const TrainerConfig& config) {
  config.validate();
  if (num_train == 0) throw std::invalid_argument("fit: no training examples");

  std::ofstream log;
  if (!config.log_path.empty()) {
    log.open(config.log_path);
    if (!log) throw std::runtime_error("cannot write training log: " + config.log_path);
    log << "epoch,split,loss,lr,seconds\n";
  }

  std::vector<Matrix> best_values;
  auto snapshot = [&] {
    best_values.clear();
    for (std::size_t k = 0; k < params.size(); ++k) best_values.push_back(params.at(k).value);
  };

  FitResult result;
  std::vector<double> history;
  std::vector<std::size_t> order(num_train);
  std::iota(order.begin(), order.end(), 0);
  double lr = config.lr;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::mt19937_64 shuffle_rng(example_seed(config.seed, epoch, num_train));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double total = 0.0;
    for (std::size_t begin = 0; begin < num_train; begin += config.batch_size) {
      const std::size_t end = std::min(num_train, begin + config.batch_size);
      params.zero_grads();
      for (std::size_t b = begin; b < end; ++b) {
        Graph g(true, example_seed(config.seed, epoch, order[b]));
        Expr loss = train_loss(g, order[b]);
        total += loss.scalar();
        g.backward(loss);
      }
      params.scale_grads(1.0 / static_cast<double>(end - begin));
      optimizer_step(config.optimizer, params, lr, config.l2);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = total / static_cast<double>(num_train);
    rec.dev_loss = num_dev > 0 ? mean_loss(num_dev, dev_loss, config.threads) : rec.train_loss;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (history.empty() || rec.dev_loss < result.best_dev_loss) {
      result.best_dev_loss = rec.dev_loss;
      result.best_epoch = epoch;
      snapshot();
    }
    history.push_back(rec.dev_loss);
    rec.action = schedule_update(history, config.patience_halve, config.patience_stop);
    spdlog::info("epoch {} train {:.5f} dev {:.5f} lr {:.5g} ({:.2f}s) {}", epoch, rec.train_loss, rec.dev_loss,
                 lr, rec.seconds, to_string(rec.action));
    if (log) {
      log << epoch << ",train," << rec.train_loss << ',' << lr << ',' << rec.seconds << '\n';
      if (num_dev > 0) log << epoch << ",dev," << rec.dev_loss << ',' << lr << ',' << rec.seconds << '\n';
    }
    result.epochs.push_back(rec);
    if (rec.action == ScheduleAction::kStop) break;
    if (rec.action == ScheduleAction::kHalve) lr *= 0.5;
  }

  for (std::size_t k = 0; k < params.size(); ++k) params.at(k).value = best_values[k];
  params.zero_grads();
  return result;
}

}  // namespace headliner
