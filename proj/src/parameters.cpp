#include "headliner/parameters.hpp"

#include <cmath>
#include <stdexcept>

namespace headliner {

Parameter& ParameterStore::add(const std::string& name, std::size_t rows, std::size_t cols,
                               Init init, bool regularized) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Matrix(rows, cols);
  p->grad = Matrix(rows, cols);
  p->regularized = regularized;
  if (init == Init::kUniform) {
    std::uniform_real_distribution<double> dist(-init_scale, init_scale);
    for (double& v : p->value.values()) v = dist(rng_);
  } else if (init == Init::kOne) {
    p->value.fill(1.0);
  }
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::add_frozen(const std::string& name, Matrix value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Matrix(value.rows(), value.cols());
  p->value = std::move(value);
  p->trainable = false;
  p->regularized = false;
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return *params_[it->second];
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) p->grad.fill(0.0);
}

void ParameterStore::scale_grads(double k) {
  for (auto& p : params_) p->grad *= k;
}

double ParameterStore::grad_norm() const {
  double acc = 0.0;
  for (const auto& p : params_) {
    if (!p->trainable) continue;
    for (double g : p->grad.values()) acc += g * g;
  }
  return std::sqrt(acc);
}

void ParameterStore::fill_values(double v) {
  for (auto& p : params_) p->value.fill(v);
}

std::size_t ParameterStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

}  // namespace headliner
