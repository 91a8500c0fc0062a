#ifndef HEADLINER_PARAMETERS_HPP_
#define HEADLINER_PARAMETERS_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "headliner/tensor.hpp"

namespace headliner {

// A named trainable (or frozen) tensor. Gradients always share the value shape.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  // Optimizer state; sized lazily by the optimizer that owns the layout.
  std::vector<Matrix> slots;
  std::uint64_t steps = 0;
  bool trainable = true;
  // l2 applies to every trainable tensor except biases.
  bool regularized = true;
};

enum class Init { kZero, kUniform, kOne };

// Insertion-ordered set of parameters with stable addresses.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 1) : rng_(seed) {}
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  // Values drawn from uniform(-init_scale, init_scale) in creation order.
  Parameter& add(const std::string& name, std::size_t rows, std::size_t cols,
                 Init init = Init::kUniform, bool regularized = true);
  Parameter& add_frozen(const std::string& name, Matrix value);

  bool contains(const std::string& name) const { return index_.contains(name); }
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  Parameter& at(std::size_t i) { return *params_[i]; }
  const Parameter& at(std::size_t i) const { return *params_[i]; }

  void zero_grads();
  void scale_grads(double k);
  double grad_norm() const;
  // Set every value to v; used for the zero-model edge cases.
  void fill_values(double v);
  std::size_t num_values() const;

  double init_scale = 0.1;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
  std::mt19937_64 rng_;
};

}  // namespace headliner

#endif  // HEADLINER_PARAMETERS_HPP_
