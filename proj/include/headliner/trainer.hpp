#ifndef HEADLINER_TRAINER_HPP_
#define HEADLINER_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "headliner/autodiff.hpp"
#include "headliner/parameters.hpp"

namespace headliner {

enum class OptimizerKind { kAdamAmsgrad, kSgdMomentum, kAdagrad };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

struct TrainerConfig {
  OptimizerKind optimizer = OptimizerKind::kAdamAmsgrad;
  double lr = 0.003;
  double l2 = 0.001;
  int max_epochs = 50;
  int patience_stop = 3;
  int patience_halve = 2;
  double dropout = 0.5;
  std::uint64_t seed = 1;
  std::size_t batch_size = 32;
  // Threads for read-only dev evaluation; updates are always serial.
  int threads = 1;
  // CSV of epoch,split,loss,lr,seconds; empty disables the log.
  std::string log_path;

  // Settings for the language model: SGD, momentum 0.9, lr 0.25, no l2.
  static TrainerConfig language_model();
  void validate() const;
};

// Each step adds l2 * value to the gradient of regularized tensors before
// the update, then leaves gradients untouched. Frozen tensors are skipped.
// Adam slots: m, v, running max of v.
void adam_amsgrad_step(ParameterStore& params, double lr = 0.003, double l2 = 0.001, double beta1 = 0.9,
                       double beta2 = 0.999, double eps = 1e-8);
// velocity <- momentum * velocity + grad; value <- value - lr * velocity.
void sgd_momentum_step(ParameterStore& params, double lr = 0.25, double momentum = 0.9, double l2 = 0.0);
void adagrad_step(ParameterStore& params, double lr = 0.15, double initial_accumulator = 0.1,
                  double l2 = 0.0, double eps = 1e-10);
void optimizer_step(OptimizerKind kind, ParameterStore& params, double lr, double l2);

enum class ScheduleAction { kContinue, kHalve, kStop };

std::string to_string(ScheduleAction action);

// Decision after the last entry of `history` (validation losses, one per
// epoch). An epoch improves only on a new strict minimum. Stop after
// patience_stop epochs without one; otherwise halve every patience_halve.
ScheduleAction schedule_update(std::span<const double> history, int patience_halve = 2,
                               int patience_stop = 3);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
  ScheduleAction action = ScheduleAction::kContinue;
};

struct FitResult {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_dev_loss = 0.0;
};

// Loss of training example i on a training-mode graph.
using ExampleLoss = std::function<Expr(Graph& g, std::size_t example)>;
// Loss of dev example i; called on eval-mode graphs, possibly concurrently.
using DevLoss = std::function<double(std::size_t example)>;

// Mini-batch training with gradient averaging, per-epoch shuffling, the
// halve/stop schedule and a restore of the best-dev parameters at the end.
// Without dev examples the training loss drives the schedule.
FitResult fit(ParameterStore& params, std::size_t num_train, const ExampleLoss& train_loss,
              std::size_t num_dev, const DevLoss& dev_loss, const TrainerConfig& config);

// Mean of dev_loss over [0, n), evaluated in parallel but summed in order.
double mean_loss(std::size_t n, const DevLoss& loss, int threads);

// Graph seed for one example, distinct per (seed, epoch, example).
std::uint64_t example_seed(std::uint64_t seed, int epoch, std::size_t example);

}  // namespace headliner

#endif  // HEADLINER_TRAINER_HPP_
