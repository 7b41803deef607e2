#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "compnet/rng.hpp"
#include "compnet/tensor.hpp"

namespace compnet {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0, numeric = 0.0;
  int checked = 0;
};

// |a-b| relative to the larger magnitude, floored so that near-zero gradient
// pairs compare absolutely instead of amplifying finite-difference noise.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

// Central-difference check of the analytic gradients already accumulated in
// `params[i]->grad` against the loss closure. `loss` must recompute the full
// forward pass from current parameter values (gradient-free). Checks up to
// `max_per_param` elements per tensor: always the largest-|grad| element plus
// a deterministic sample of the rest; pass a large value to sweep every
// element of small tensors.
template <typename T>
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::vector<Parameter<T>*>& params,
                           double h = 1e-5, int max_per_param = 1 << 30,
                           std::uint64_t sample_seed = 0) {
  GradCheckReport rep;
  Rng rng(Rng::derive(sample_seed, 0x67636863ULL));
  for (Parameter<T>* p : params) {
    const std::size_t n = p->value.size();
    std::vector<std::size_t> idx;
    if (static_cast<int>(n) <= max_per_param) {
      idx.resize(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    } else {
      std::size_t argmax = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (std::abs(p->grad[i]) > std::abs(p->grad[argmax])) argmax = i;
      idx.push_back(argmax);
      while (static_cast<int>(idx.size()) < max_per_param)
        idx.push_back(rng.below(n));
      std::sort(idx.begin(), idx.end());
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    }
    for (std::size_t i : idx) {
      const T saved = p->value[i];
      p->value[i] = static_cast<T>(saved + h);
      const double lp = loss();
      p->value[i] = static_cast<T>(saved - h);
      const double lm = loss();
      p->value[i] = saved;
      const double numeric = (lp - lm) / (2.0 * h);
      const double analytic = static_cast<double>(p->grad[i]);
      const double e = rel_err(analytic, numeric);
      ++rep.checked;
      if (e > rep.max_rel_err) {
        rep.max_rel_err = e;
        rep.worst_param = p->name;
        rep.worst_index = i;
        rep.analytic = analytic;
        rep.numeric = numeric;
      }
    }
  }
  return rep;
}

}  // namespace compnet
