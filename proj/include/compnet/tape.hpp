#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "compnet/tensor.hpp"

namespace compnet {

using VarId = int;

// Reverse-mode tape, rebuilt per forward pass. Network topology changes with
// every command, so the graph is dynamic: ops record a backward closure as
// they execute. When grads are disabled the same ops run value-only.
template <typename T>
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  // ---- leaves ----

  VarId input(Shape shape, const T* data) {
    VarId id = alloc(std::move(shape), false);
    std::copy_n(data, vars_[id].val.size(), vars_[id].val.begin());
    return id;
  }

  VarId input(Shape shape, const std::vector<T>& data) {
    return input(std::move(shape), data.data());
  }

  VarId zeros(Shape shape) { return alloc(std::move(shape), false); }

  // Binds a parameter as a leaf. A parameter used at several sites binds to
  // one var, so its gradient accumulates across all uses before being
  // flushed back in backward().
  VarId param(Parameter<T>& p) {
    auto it = bound_.find(&p);
    if (it != bound_.end()) return it->second;
    VarId id = alloc(p.shape, grad_enabled_);
    std::copy(p.value.begin(), p.value.end(), vars_[id].val.begin());
    bound_.emplace(&p, id);
    flush_.push_back({&p, id});
    return id;
  }

  // ---- access ----

  // Parameters bound to this tape (each once), in first-use order.
  const std::vector<std::pair<Parameter<T>*, VarId>>& bound() const { return flush_; }

  const Shape& shape(VarId id) const { return vars_[id].shape; }
  std::span<const T> val(VarId id) const { return vars_[id].val; }
  std::span<const T> grad(VarId id) const { return vars_[id].grad; }
  T scalar(VarId id) const { return vars_[id].val[0]; }

  // ---- elementwise ----

  VarId add(VarId a, VarId b) {
    check_same("add", a, b);
    VarId y = alloc(vars_[a].shape, needs(a, b));
    const std::size_t n = vars_[y].val.size();
    for (std::size_t i = 0; i < n; ++i) vars_[y].val[i] = vars_[a].val[i] + vars_[b].val[i];
    if (vars_[y].needs_grad)
      record([this, a, b, y, n] {
        for (std::size_t i = 0; i < n; ++i) {
          const T g = vars_[y].grad[i];
          if (vars_[a].needs_grad) vars_[a].grad[i] += g;
          if (vars_[b].needs_grad) vars_[b].grad[i] += g;
        }
      });
    return y;
  }

  VarId mul(VarId a, VarId b) {
    check_same("mul", a, b);
    VarId y = alloc(vars_[a].shape, needs(a, b));
    const std::size_t n = vars_[y].val.size();
    for (std::size_t i = 0; i < n; ++i) vars_[y].val[i] = vars_[a].val[i] * vars_[b].val[i];
    if (vars_[y].needs_grad)
      record([this, a, b, y, n] {
        for (std::size_t i = 0; i < n; ++i) {
          const T g = vars_[y].grad[i];
          if (vars_[a].needs_grad) vars_[a].grad[i] += g * vars_[b].val[i];
          if (vars_[b].needs_grad) vars_[b].grad[i] += g * vars_[a].val[i];
        }
      });
    return y;
  }

  VarId one_minus(VarId a) {
    VarId y = alloc(vars_[a].shape, needs(a));
    const std::size_t n = vars_[y].val.size();
    for (std::size_t i = 0; i < n; ++i) vars_[y].val[i] = T(1) - vars_[a].val[i];
    if (vars_[y].needs_grad)
      record([this, a, y, n] {
        for (std::size_t i = 0; i < n; ++i) vars_[a].grad[i] -= vars_[y].grad[i];
      });
    return y;
  }

  VarId scale(VarId a, T c) {
    VarId y = alloc(vars_[a].shape, needs(a));
    const std::size_t n = vars_[y].val.size();
    for (std::size_t i = 0; i < n; ++i) vars_[y].val[i] = c * vars_[a].val[i];
    if (vars_[y].needs_grad)
      record([this, a, y, n, c] {
        for (std::size_t i = 0; i < n; ++i) vars_[a].grad[i] += c * vars_[y].grad[i];
      });
    return y;
  }

  VarId relu(VarId a) {
    VarId y = alloc(vars_[a].shape, needs(a));
    const std::size_t n = vars_[y].val.size();
    for (std::size_t i = 0; i < n; ++i) vars_[y].val[i] = vars_[a].val[i] > T(0) ? vars_[a].val[i] : T(0);
    if (vars_[y].needs_grad)
      record([this, a, y, n] {
        for (std::size_t i = 0; i < n; ++i)
          if (vars_[a].val[i] > T(0)) vars_[a].grad[i] += vars_[y].grad[i];
      });
    return y;
  }

  VarId sigmoid(VarId a) {
    VarId y = alloc(vars_[a].shape, needs(a));
    const std::size_t n = vars_[y].val.size();
    for (std::size_t i = 0; i < n; ++i) {
      const T x = vars_[a].val[i];
      vars_[y].val[i] = x >= T(0) ? T(1) / (T(1) + std::exp(-x))
                                  : std::exp(x) / (T(1) + std::exp(x));
    }
    if (vars_[y].needs_grad)
      record([this, a, y, n] {
        for (std::size_t i = 0; i < n; ++i) {
          const T s = vars_[y].val[i];
          vars_[a].grad[i] += vars_[y].grad[i] * s * (T(1) - s);
        }
      });
    return y;
  }

  VarId tanh(VarId a) {
    VarId y = alloc(vars_[a].shape, needs(a));
    const std::size_t n = vars_[y].val.size();
    for (std::size_t i = 0; i < n; ++i) vars_[y].val[i] = std::tanh(vars_[a].val[i]);
    if (vars_[y].needs_grad)
      record([this, a, y, n] {
        for (std::size_t i = 0; i < n; ++i) {
          const T t = vars_[y].val[i];
          vars_[a].grad[i] += vars_[y].grad[i] * (T(1) - t * t);
        }
      });
    return y;
  }

  // ---- shape ops ----

  VarId slice(VarId a, int offset, int len) {
    VarId y = alloc(Shape{len}, needs(a));
    for (int i = 0; i < len; ++i) vars_[y].val[i] = vars_[a].val[offset + i];
    if (vars_[y].needs_grad)
      record([this, a, y, offset, len] {
        for (int i = 0; i < len; ++i) vars_[a].grad[offset + i] += vars_[y].grad[i];
      });
    return y;
  }

  VarId concat(const std::vector<VarId>& parts) {
    int total = 0;
    bool ng = false;
    for (VarId p : parts) {
      total += static_cast<int>(vars_[p].val.size());
      ng = ng || vars_[p].needs_grad;
    }
    VarId y = alloc(Shape{total}, ng && grad_enabled_);
    int at = 0;
    for (VarId p : parts) {
      std::copy(vars_[p].val.begin(), vars_[p].val.end(), vars_[y].val.begin() + at);
      at += static_cast<int>(vars_[p].val.size());
    }
    if (vars_[y].needs_grad)
      record([this, parts, y] {
        int off = 0;
        for (VarId p : parts) {
          const int n = static_cast<int>(vars_[p].val.size());
          if (vars_[p].needs_grad)
            for (int i = 0; i < n; ++i) vars_[p].grad[i] += vars_[y].grad[off + i];
          off += n;
        }
      });
    return y;
  }

  // ---- reductions / picks ----

  VarId sum(VarId a) {
    VarId y = alloc(Shape{1}, needs(a));
    T s = 0;
    for (T v : vars_[a].val) s += v;
    vars_[y].val[0] = s;
    if (vars_[y].needs_grad)
      record([this, a, y] {
        const T g = vars_[y].grad[0];
        for (auto& d : vars_[a].grad) d += g;
      });
    return y;
  }

  VarId pick(VarId a, int index) {
    if (index < 0 || index >= static_cast<int>(vars_[a].val.size()))
      throw DimError("pick: index " + std::to_string(index) + " out of range for " +
                     shape_str(vars_[a].shape));
    VarId y = alloc(Shape{1}, needs(a));
    vars_[y].val[0] = vars_[a].val[index];
    if (vars_[y].needs_grad)
      record([this, a, y, index] { vars_[a].grad[index] += vars_[y].grad[0]; });
    return y;
  }

  VarId add_n(const std::vector<VarId>& xs) {
    VarId y = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) y = add(y, xs[i]);
    return y;
  }

  // ---- linear algebra ----

  // y = W x + b. The input is consumed in flattened (row-major) form.
  VarId linear(VarId x, VarId w, VarId b) {
    const Shape& ws = vars_[w].shape;
    if (ws.size() != 2)
      throw DimError("linear: weight must be 2-d, got " + shape_str(ws));
    const int n_out = ws[0], n_in = ws[1];
    if (static_cast<int>(vars_[x].val.size()) != n_in ||
        static_cast<int>(vars_[b].val.size()) != n_out)
      throw DimError("linear: shapes do not conform: x=" + shape_str(vars_[x].shape) +
                     " W=" + shape_str(ws) + " b=" + shape_str(vars_[b].shape));
    VarId y = alloc(Shape{n_out}, needs(x, w, b));
    const T* xv = vars_[x].val.data();
    const T* wv = vars_[w].val.data();
    for (int i = 0; i < n_out; ++i) {
      T acc = vars_[b].val[i];
      const T* row = wv + static_cast<std::size_t>(i) * n_in;
      for (int j = 0; j < n_in; ++j) acc += row[j] * xv[j];
      vars_[y].val[i] = acc;
    }
    if (vars_[y].needs_grad)
      record([this, x, w, b, y, n_out, n_in] {
        const T* g = vars_[y].grad.data();
        const T* xv2 = vars_[x].val.data();
        const T* wv2 = vars_[w].val.data();
        if (vars_[x].needs_grad) {
          T* dx = vars_[x].grad.data();
          for (int i = 0; i < n_out; ++i) {
            const T gi = g[i];
            const T* row = wv2 + static_cast<std::size_t>(i) * n_in;
            for (int j = 0; j < n_in; ++j) dx[j] += gi * row[j];
          }
        }
        if (vars_[w].needs_grad) {
          T* dw = vars_[w].grad.data();
          for (int i = 0; i < n_out; ++i) {
            const T gi = g[i];
            T* row = dw + static_cast<std::size_t>(i) * n_in;
            for (int j = 0; j < n_in; ++j) row[j] += gi * xv2[j];
          }
        }
        if (vars_[b].needs_grad) {
          T* db = vars_[b].grad.data();
          for (int i = 0; i < n_out; ++i) db[i] += g[i];
        }
      });
    return y;
  }

  // Cross-correlation with zero padding that preserves the 6x6 grid.
  // x: [C_in,6,6], k: [C_out,C_in,kh,kw] (odd kernel), b: [C_out].
  VarId conv2d_same(VarId x, VarId k, VarId b) {
    const Shape& xs = vars_[x].shape;
    const Shape& ks = vars_[k].shape;
    if (xs.size() != 3 || xs[1] != kGrid || xs[2] != kGrid)
      throw DimError("conv2d_same: input must be [C," + std::to_string(kGrid) + "," +
                     std::to_string(kGrid) + "], got " + shape_str(xs));
    if (ks.size() != 4 || ks[1] != xs[0] || ks[2] % 2 == 0 || ks[3] % 2 == 0)
      throw DimError("conv2d_same: kernel " + shape_str(ks) + " does not match input " +
                     shape_str(xs));
    const int c_out = ks[0], c_in = ks[1], kh = ks[2], kw = ks[3];
    if (static_cast<int>(vars_[b].val.size()) != c_out)
      throw DimError("conv2d_same: bias " + shape_str(vars_[b].shape) + " vs C_out " +
                     std::to_string(c_out));
    const int ph = kh / 2, pw = kw / 2;
    VarId y = alloc(Shape{c_out, kGrid, kGrid}, needs(x, k, b));
    T* yv = vars_[y].val.data();
    const T* xv = vars_[x].val.data();
    const T* kv = vars_[k].val.data();
    for (int co = 0; co < c_out; ++co) {
      const T bias = vars_[b].val[co];
      T* out = yv + static_cast<std::size_t>(co) * kGrid * kGrid;
      for (int i = 0; i < kGrid * kGrid; ++i) out[i] = bias;
      for (int ci = 0; ci < c_in; ++ci) {
        const T* in = xv + static_cast<std::size_t>(ci) * kGrid * kGrid;
        const T* ker = kv + (static_cast<std::size_t>(co) * c_in + ci) * kh * kw;
        for (int ky = 0; ky < kh; ++ky) {
          const int y0 = std::max(0, ph - ky), y1 = std::min(kGrid - 1, kGrid - 1 + ph - ky);
          for (int kx = 0; kx < kw; ++kx) {
            const T wgt = ker[ky * kw + kx];
            if (wgt == T(0)) continue;
            const int x0 = std::max(0, pw - kx), x1 = std::min(kGrid - 1, kGrid - 1 + pw - kx);
            for (int oy = y0; oy <= y1; ++oy) {
              const T* irow = in + (oy + ky - ph) * kGrid + (kx - pw);
              T* orow = out + oy * kGrid;
              for (int ox = x0; ox <= x1; ++ox) orow[ox] += wgt * irow[ox];
            }
          }
        }
      }
    }
    if (vars_[y].needs_grad)
      record([this, x, k, b, y, c_out, c_in, kh, kw, ph, pw] {
        const T* g = vars_[y].grad.data();
        const T* xv2 = vars_[x].val.data();
        const T* kv2 = vars_[k].val.data();
        const bool nx = vars_[x].needs_grad, nk = vars_[k].needs_grad;
        for (int co = 0; co < c_out; ++co) {
          const T* gout = g + static_cast<std::size_t>(co) * kGrid * kGrid;
          if (vars_[b].needs_grad) {
            T acc = 0;
            for (int i = 0; i < kGrid * kGrid; ++i) acc += gout[i];
            vars_[b].grad[co] += acc;
          }
          for (int ci = 0; ci < c_in; ++ci) {
            const T* in = xv2 + static_cast<std::size_t>(ci) * kGrid * kGrid;
            const T* ker = kv2 + (static_cast<std::size_t>(co) * c_in + ci) * kh * kw;
            T* dker = nk ? vars_[k].grad.data() +
                               (static_cast<std::size_t>(co) * c_in + ci) * kh * kw
                         : nullptr;
            T* din = nx ? vars_[x].grad.data() + static_cast<std::size_t>(ci) * kGrid * kGrid
                        : nullptr;
            for (int ky = 0; ky < kh; ++ky) {
              const int y0 = std::max(0, ph - ky), y1 = std::min(kGrid - 1, kGrid - 1 + ph - ky);
              for (int kx = 0; kx < kw; ++kx) {
                const int x0 = std::max(0, pw - kx), x1 = std::min(kGrid - 1, kGrid - 1 + pw - kx);
                const T wgt = ker[ky * kw + kx];
                T wacc = 0;
                for (int oy = y0; oy <= y1; ++oy) {
                  const T* grow = gout + oy * kGrid;
                  const T* irow = in + (oy + ky - ph) * kGrid + (kx - pw);
                  T* drow = din ? din + (oy + ky - ph) * kGrid + (kx - pw) : nullptr;
                  for (int ox = x0; ox <= x1; ++ox) {
                    wacc += grow[ox] * irow[ox];
                    if (drow) drow[ox] += grow[ox] * wgt;
                  }
                }
                if (dker) dker[ky * kw + kx] += wacc;
              }
            }
          }
        }
      });
    return y;
  }

  // ---- softmax family ----

  // Max-subtracted softmax over the flattened input; output sums to 1.
  VarId softmax(VarId a) {
    const std::size_t n = vars_[a].val.size();
    VarId y = alloc(vars_[a].shape, needs(a));
    T m = vars_[a].val[0];
    for (T v : vars_[a].val) m = std::max(m, v);
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      vars_[y].val[i] = std::exp(vars_[a].val[i] - m);
      s += vars_[y].val[i];
    }
    const T inv = T(1) / s;
    for (std::size_t i = 0; i < n; ++i) vars_[y].val[i] *= inv;
    if (vars_[y].needs_grad)
      record([this, a, y, n] {
        T dot = 0;
        for (std::size_t i = 0; i < n; ++i) dot += vars_[y].grad[i] * vars_[y].val[i];
        for (std::size_t i = 0; i < n; ++i)
          vars_[a].grad[i] += vars_[y].val[i] * (vars_[y].grad[i] - dot);
      });
    return y;
  }

  VarId log_softmax(VarId a) {
    const std::size_t n = vars_[a].val.size();
    VarId y = alloc(vars_[a].shape, needs(a));
    T m = vars_[a].val[0];
    for (T v : vars_[a].val) m = std::max(m, v);
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(vars_[a].val[i] - m);
    const T lse = m + std::log(s);
    for (std::size_t i = 0; i < n; ++i) vars_[y].val[i] = vars_[a].val[i] - lse;
    if (vars_[y].needs_grad)
      record([this, a, y, n] {
        T gsum = 0;
        for (std::size_t i = 0; i < n; ++i) gsum += vars_[y].grad[i];
        for (std::size_t i = 0; i < n; ++i)
          vars_[a].grad[i] += vars_[y].grad[i] - std::exp(vars_[y].val[i]) * gsum;
      });
    return y;
  }

  // ---- spatial ops (C x 36 feature maps vs 36-cell attention maps) ----

  // y[c,i] = x[c,i] * m[i]; broadcasts a cell map over channels.
  VarId scale_spatial(VarId x, VarId m) {
    const Shape& xs = vars_[x].shape;
    const int cells = static_cast<int>(vars_[m].val.size());
    if (xs.size() != 3 || xs[1] * xs[2] != cells)
      throw DimError("scale_spatial: x=" + shape_str(xs) + " map=" + shape_str(vars_[m].shape));
    const int c = xs[0];
    VarId y = alloc(xs, needs(x, m));
    const T* xv = vars_[x].val.data();
    const T* mv = vars_[m].val.data();
    T* yv = vars_[y].val.data();
    for (int ch = 0; ch < c; ++ch)
      for (int i = 0; i < cells; ++i) yv[ch * cells + i] = xv[ch * cells + i] * mv[i];
    if (vars_[y].needs_grad)
      record([this, x, m, y, c, cells] {
        const T* g = vars_[y].grad.data();
        const T* xv2 = vars_[x].val.data();
        const T* mv2 = vars_[m].val.data();
        if (vars_[x].needs_grad) {
          T* dx = vars_[x].grad.data();
          for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < cells; ++i) dx[ch * cells + i] += g[ch * cells + i] * mv2[i];
        }
        if (vars_[m].needs_grad) {
          T* dm = vars_[m].grad.data();
          for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < cells; ++i) dm[i] += g[ch * cells + i] * xv2[ch * cells + i];
        }
      });
    return y;
  }

  // y[c] = sum_i x[c,i]: collapses the grid, keeping channels.
  VarId sum_spatial(VarId x) {
    const Shape& xs = vars_[x].shape;
    if (xs.size() != 3) throw DimError("sum_spatial: need [C,H,W], got " + shape_str(xs));
    const int c = xs[0], cells = xs[1] * xs[2];
    VarId y = alloc(Shape{c}, needs(x));
    const T* xv = vars_[x].val.data();
    for (int ch = 0; ch < c; ++ch) {
      T acc = 0;
      for (int i = 0; i < cells; ++i) acc += xv[ch * cells + i];
      vars_[y].val[ch] = acc;
    }
    if (vars_[y].needs_grad)
      record([this, x, y, c, cells] {
        T* dx = vars_[x].grad.data();
        for (int ch = 0; ch < c; ++ch) {
          const T g = vars_[y].grad[ch];
          for (int i = 0; i < cells; ++i) dx[ch * cells + i] += g;
        }
      });
    return y;
  }

  // ---- backward ----

  // Seeds d(loss)/d(loss)=1, replays ops in reverse execution order, then
  // flushes accumulated gradients into every bound parameter.
  void backward(VarId loss) {
    if (!grad_enabled_) throw UsageError("backward: tape was created with grads disabled");
    if (vars_[loss].val.size() != 1)
      throw UsageError("backward: loss must be scalar, got " + shape_str(vars_[loss].shape));
    if (!vars_[loss].needs_grad)
      throw UsageError("backward: loss does not depend on any parameter");
    vars_[loss].grad[0] = T(1);
    for (auto it = back_.rbegin(); it != back_.rend(); ++it) (*it)();
    for (auto& [p, id] : flush_) {
      const auto& g = vars_[id].grad;
      for (std::size_t i = 0; i < g.size(); ++i) p->grad[i] += g[i];
    }
  }

  static constexpr int kGrid = 6;

 private:
  struct Var {
    Shape shape;
    std::vector<T> val;
    std::vector<T> grad;
    bool needs_grad = false;
  };

  VarId alloc(Shape shape, bool needs_grad) {
    Var v;
    v.shape = std::move(shape);
    v.val.assign(static_cast<std::size_t>(numel(v.shape)), T(0));
    v.needs_grad = needs_grad && grad_enabled_;
    if (v.needs_grad) v.grad.assign(v.val.size(), T(0));
    vars_.push_back(std::move(v));
    return static_cast<VarId>(vars_.size() - 1);
  }

  bool needs(VarId a) const { return vars_[a].needs_grad; }
  bool needs(VarId a, VarId b) const { return vars_[a].needs_grad || vars_[b].needs_grad; }
  bool needs(VarId a, VarId b, VarId c) const {
    return vars_[a].needs_grad || vars_[b].needs_grad || vars_[c].needs_grad;
  }

  void check_same(const char* op, VarId a, VarId b) const {
    if (vars_[a].val.size() != vars_[b].val.size())
      throw DimError(std::string(op) + ": size mismatch " + shape_str(vars_[a].shape) + " vs " +
                     shape_str(vars_[b].shape));
  }

  void record(std::function<void()> fn) { back_.push_back(std::move(fn)); }

  std::vector<Var> vars_;
  std::vector<std::function<void()>> back_;
  std::map<Parameter<T>*, VarId> bound_;
  std::vector<std::pair<Parameter<T>*, VarId>> flush_;
  bool grad_enabled_;
};

// Stacked-GRU building block. Gate layout follows the r,z,n convention:
//   r = sig(Wx_r x + Wh_r h),  z = sig(Wx_z x + Wh_z h)
//   n = tanh(Wx_n x + r * Wh_n h),  h' = z*h + (1-z)*n
// so a large positive update-gate bias makes the cell carry h through.
template <typename T>
VarId gru_cell(Tape<T>& t, VarId x, VarId h, VarId w_ih, VarId w_hh, VarId b_ih, VarId b_hh) {
  const int hidden = t.shape(h).back();
  if (t.shape(w_ih)[0] != 3 * hidden || t.shape(w_hh)[0] != 3 * hidden)
    throw DimError("gru_cell: gate weights " + shape_str(t.shape(w_ih)) + "/" +
                   shape_str(t.shape(w_hh)) + " vs hidden " + std::to_string(hidden));
  const VarId gx = t.linear(x, w_ih, b_ih);
  const VarId gh = t.linear(h, w_hh, b_hh);
  const VarId r = t.sigmoid(t.add(t.slice(gx, 0, hidden), t.slice(gh, 0, hidden)));
  const VarId z = t.sigmoid(t.add(t.slice(gx, hidden, hidden), t.slice(gh, hidden, hidden)));
  const VarId n = t.tanh(t.add(t.slice(gx, 2 * hidden, hidden),
                               t.mul(r, t.slice(gh, 2 * hidden, hidden))));
  return t.add(t.mul(z, h), t.mul(t.one_minus(z), n));
}

}  // namespace compnet
