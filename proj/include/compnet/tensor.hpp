#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "compnet/rng.hpp"

namespace compnet {

using Shape = std::vector<int>;

inline std::int64_t numel(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

// Shape mismatches are programming errors at call sites; the message names
// the offending op and the shapes involved.
class DimError : public std::runtime_error {
 public:
  explicit DimError(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// A trainable tensor that persists across forward passes. Gradients
// accumulate into `grad` until the optimizer consumes them.
template <typename T>
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;

  Parameter() = default;
  Parameter(std::string n, Shape s)
      : name(std::move(n)),
        shape(std::move(s)),
        value(static_cast<std::size_t>(numel(shape)), T(0)),
        grad(static_cast<std::size_t>(numel(shape)), T(0)) {}

  std::int64_t size() const { return numel(shape); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

// Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]; biases stay zero.
template <typename T>
void init_uniform_fan_in(Parameter<T>& p, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : p.value) v = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace compnet
