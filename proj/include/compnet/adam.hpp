#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "compnet/tensor.hpp"

namespace compnet {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter moment accumulators. The step counter advances only when the
// parameter is actually touched, so modules absent from a batch keep their
// bias correction aligned with their own update count.
template <typename T>
struct AdamState {
  std::vector<T> m, v;
  std::int64_t step = 0;
};

template <typename T>
void adam_step(Parameter<T>& p, AdamState<T>& s, const AdamConfig& cfg) {
  const std::size_t n = p.value.size();
  if (s.m.size() != n) {
    s.m.assign(n, T(0));
    s.v.assign(n, T(0));
  }
  ++s.step;
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T corr1 = static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(s.step)));
  const T corr2 = static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(s.step)));
  const T lr = static_cast<T>(cfg.lr), eps = static_cast<T>(cfg.epsilon);
  for (std::size_t i = 0; i < n; ++i) {
    const T g = p.grad[i];
    s.m[i] = b1 * s.m[i] + (T(1) - b1) * g;
    s.v[i] = b2 * s.v[i] + (T(1) - b2) * g * g;
    const T mh = s.m[i] / corr1;
    const T vh = s.v[i] / corr2;
    p.value[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

// Optimizer state for a set of parameters, keyed by identity.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }

  void step(Parameter<T>& p) { adam_step(p, slots_[&p], cfg_); }

  AdamState<T>& slot(Parameter<T>& p) { return slots_[&p]; }
  const AdamState<T>* find(const Parameter<T>* p) const {
    auto it = slots_.find(const_cast<Parameter<T>*>(p));
    return it == slots_.end() ? nullptr : &it->second;
  }

 private:
  AdamConfig cfg_;
  std::map<Parameter<T>*, AdamState<T>> slots_;
};

}  // namespace compnet
