#include "compnet/tape.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "compnet/adam.hpp"
#include "compnet/grad_check.hpp"
#include "compnet/rng.hpp"

using namespace compnet;

namespace {

Parameter<double> rand_param(const std::string& name, Shape shape, Rng& rng,
                             double lo = -1.0, double hi = 1.0) {
  Parameter<double> p(name, std::move(shape));
  for (auto& v : p.value) v = rng.uniform(lo, hi);
  return p;
}

// Independent direct cross-correlation used as the oracle for conv tests:
// explicit bounds checks, no range precomputation shared with the tape op.
std::vector<double> conv_oracle(const std::vector<double>& x, int c_in,
                                const std::vector<double>& k, int c_out, int kh, int kw,
                                const std::vector<double>& b) {
  const int g = 6;
  std::vector<double> out(static_cast<std::size_t>(c_out) * g * g, 0.0);
  for (int co = 0; co < c_out; ++co)
    for (int oy = 0; oy < g; ++oy)
      for (int ox = 0; ox < g; ++ox) {
        double acc = b[co];
        for (int ci = 0; ci < c_in; ++ci)
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
              const int iy = oy + ky - kh / 2, ix = ox + kx - kw / 2;
              if (iy < 0 || iy >= g || ix < 0 || ix >= g) continue;
              acc += k[((co * c_in + ci) * kh + ky) * kw + kx] * x[(ci * g + iy) * g + ix];
            }
        out[(co * g + oy) * g + ox] = acc;
      }
  return out;
}

TEST(Linear, IdentityLikeCase) {
  Tape<double> t(false);
  const std::vector<double> x{1, 0}, w{2, 0, 0, 3}, b{0, 0};
  VarId y = t.linear(t.input({2}, x), t.input({2, 2}, w), t.input({2}, b));
  EXPECT_DOUBLE_EQ(t.val(y)[0], 2.0);
  EXPECT_DOUBLE_EQ(t.val(y)[1], 0.0);
}

TEST(Linear, ZeroInputGivesBias) {
  Rng rng(3);
  Tape<double> t(false);
  auto w = rand_param("w", {3, 5}, rng);
  auto b = rand_param("b", {3}, rng);
  const std::vector<double> x(5, 0.0);
  VarId y = t.linear(t.input({5}, x), t.param(w), t.param(b));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(t.val(y)[i], b.value[i]);
}

TEST(Linear, ShapeMismatchNamesOp) {
  Tape<double> t(false);
  const std::vector<double> x{1, 2, 3}, w{1, 2, 3, 4}, b{0, 0};
  try {
    t.linear(t.input({3}, x), t.input({2, 2}, w), t.input({2}, b));
    FAIL() << "expected DimError";
  } catch (const DimError& e) {
    EXPECT_NE(std::string(e.what()).find("linear"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[2x2]"), std::string::npos);
  }
}

TEST(Linear, GradMatchesFiniteDifferences) {
  Rng rng(7);
  auto w = rand_param("w", {3, 5}, rng);
  auto b = rand_param("b", {3}, rng);
  auto x = rand_param("x", {5}, rng);
  auto loss = [&](bool grad) {
    Tape<double> t(grad);
    VarId y = t.linear(t.param(x), t.param(w), t.param(b));
    VarId l = t.sum(t.mul(y, y));
    if (grad) t.backward(l);
    return t.scalar(l);
  };
  loss(true);
  auto rep = grad_check<double>([&] { return loss(false); }, {&w, &b, &x});
  EXPECT_LT(rep.max_rel_err, 1e-6) << rep.worst_param << "[" << rep.worst_index << "]";
}

TEST(Conv, DeltaKernelIsIdentity) {
  Rng rng(11);
  std::vector<double> x(36);
  for (auto& v : x) v = rng.uniform(-1, 1);
  std::vector<double> k(49, 0.0);
  k[3 * 7 + 3] = 1.0;  // center tap
  const std::vector<double> b{0.0};
  Tape<double> t(false);
  VarId y = t.conv2d_same(t.input({1, 6, 6}, x), t.input({1, 1, 7, 7}, k), t.input({1}, b));
  for (int i = 0; i < 36; ++i) EXPECT_DOUBLE_EQ(t.val(y)[i], x[i]);
}

TEST(Conv, AllOnesCoverageCounts) {
  const std::vector<double> x(36, 1.0), k(49, 1.0), b{0.0};
  Tape<double> t(false);
  VarId y = t.conv2d_same(t.input({1, 6, 6}, x), t.input({1, 1, 7, 7}, k), t.input({1}, b));
  EXPECT_DOUBLE_EQ(t.val(y)[0], 16.0);       // corner (0,0): 4x4 window in bounds
  EXPECT_DOUBLE_EQ(t.val(y)[2 * 6 + 2], 36.0);  // center: full grid covered
  auto oracle = conv_oracle(x, 1, k, 1, 7, 7, b);
  for (int i = 0; i < 36; ++i) EXPECT_DOUBLE_EQ(t.val(y)[i], oracle[i]);
}

TEST(Conv, MatchesDirectOracleOnRandomInput) {
  Rng rng(13);
  auto x = rand_param("x", {2, 6, 6}, rng);
  auto k = rand_param("k", {3, 2, 7, 7}, rng);
  auto b = rand_param("b", {3}, rng);
  Tape<double> t(false);
  VarId y = t.conv2d_same(t.param(x), t.param(k), t.param(b));
  auto oracle = conv_oracle(x.value, 2, k.value, 3, 7, 7, b.value);
  for (int i = 0; i < 3 * 36; ++i) EXPECT_NEAR(t.val(y)[i], oracle[i], 1e-12);
}

TEST(Conv, RejectsWrongSpatialSize) {
  Tape<double> t(false);
  const std::vector<double> x(25, 0.0), k(49, 0.0), b{0.0};
  EXPECT_THROW(
      t.conv2d_same(t.input({1, 5, 5}, x), t.input({1, 1, 7, 7}, k), t.input({1}, b)),
      DimError);
}

TEST(Conv, GradMatchesFiniteDifferences) {
  Rng rng(17);
  auto x = rand_param("x", {2, 6, 6}, rng);
  auto k = rand_param("k", {2, 2, 7, 7}, rng, -0.2, 0.2);
  auto b = rand_param("b", {2}, rng);
  auto probe = rand_param("probe", {2, 6, 6}, rng);
  auto loss = [&](bool grad) {
    Tape<double> t(grad);
    VarId y = t.conv2d_same(t.param(x), t.param(k), t.param(b));
    VarId l = t.sum(t.mul(y, t.param(probe)));
    if (grad) t.backward(l);
    return t.scalar(l);
  };
  loss(true);
  auto rep = grad_check<double>([&] { return loss(false); }, {&x, &k, &b});
  EXPECT_LT(rep.max_rel_err, 1e-6) << rep.worst_param << "[" << rep.worst_index << "]";
}

TEST(Softmax, UniformCase) {
  Tape<double> t(false);
  const std::vector<double> x{0, 0, 0, 0};
  VarId y = t.softmax(t.input({4}, x));
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(t.val(y)[i], 0.25);
}

TEST(Softmax, NoOverflowOnLargeLogits) {
  Tape<double> t(false);
  const std::vector<double> x{1000.0, 0.0};
  VarId y = t.softmax(t.input({2}, x));
  EXPECT_NEAR(t.val(y)[0], 1.0, 1e-12);
  EXPECT_NEAR(t.val(y)[1], 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(t.val(y)[0]) && std::isfinite(t.val(y)[1]));
}

TEST(Softmax, SumsToOneAndPositive) {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(36);
    for (auto& v : x) v = rng.uniform(-40, 40);
    Tape<double> t(false);
    VarId y = t.softmax(t.input({36}, x));
    double s = 0;
    for (double v : t.val(y)) {
      EXPECT_GT(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Softmax, GradMatchesFiniteDifferences) {
  Rng rng(23);
  auto x = rand_param("x", {36}, rng, -2, 2);
  auto probe = rand_param("probe", {36}, rng);
  auto loss = [&](bool grad) {
    Tape<double> t(grad);
    VarId l = t.sum(t.mul(t.softmax(t.param(x)), t.param(probe)));
    if (grad) t.backward(l);
    return t.scalar(l);
  };
  loss(true);
  auto rep = grad_check<double>([&] { return loss(false); }, {&x});
  EXPECT_LT(rep.max_rel_err, 1e-6);
}

TEST(LogSoftmax, MatchesLogOfSoftmax) {
  Rng rng(29);
  std::vector<double> x(6);
  for (auto& v : x) v = rng.uniform(-5, 5);
  Tape<double> t(false);
  VarId a = t.log_softmax(t.input({6}, x));
  VarId b = t.softmax(t.input({6}, x));
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(t.val(a)[i], std::log(t.val(b)[i]), 1e-12);
}

struct GruParams {
  Parameter<double> w_ih, w_hh, b_ih, b_hh;
  std::vector<Parameter<double>*> all() { return {&w_ih, &w_hh, &b_ih, &b_hh}; }
};

GruParams make_gru(int in, int hidden, Rng& rng, double scale = 0.5) {
  GruParams g{Parameter<double>("w_ih", {3 * hidden, in}),
              Parameter<double>("w_hh", {3 * hidden, hidden}),
              Parameter<double>("b_ih", {3 * hidden}),
              Parameter<double>("b_hh", {3 * hidden})};
  for (auto* p : {&g.w_ih, &g.w_hh})
    for (auto& v : p->value) v = rng.uniform(-scale, scale);
  return g;
}

TEST(Gru, LargeUpdateGateBiasCarriesStateThrough) {
  Rng rng(31);
  const int hidden = 20;
  auto g = make_gru(10, hidden, rng);
  for (int i = hidden; i < 2 * hidden; ++i) g.b_ih.value[i] = 50.0;  // z ~= 1
  std::vector<double> x(10), h(hidden);
  for (auto& v : x) v = rng.uniform(-1, 1);
  for (auto& v : h) v = rng.uniform(-1, 1);
  Tape<double> t(false);
  VarId hn = gru_cell(t, t.input({10}, x), t.input({hidden}, h), t.param(g.w_ih),
                      t.param(g.w_hh), t.param(g.b_ih), t.param(g.b_hh));
  for (int i = 0; i < hidden; ++i) EXPECT_NEAR(t.val(hn)[i], h[i], 1e-9);
}

TEST(Gru, ZeroParamsZeroStateGivesZero) {
  const int hidden = 20;
  GruParams g{Parameter<double>("w_ih", {3 * hidden, 10}),
              Parameter<double>("w_hh", {3 * hidden, hidden}),
              Parameter<double>("b_ih", {3 * hidden}),
              Parameter<double>("b_hh", {3 * hidden})};
  Rng rng(37);
  std::vector<double> x(10), h(hidden, 0.0);
  for (auto& v : x) v = rng.uniform(-1, 1);
  Tape<double> t(false);
  VarId hn = gru_cell(t, t.input({10}, x), t.input({hidden}, h), t.param(g.w_ih),
                      t.param(g.w_hh), t.param(g.b_ih), t.param(g.b_hh));
  // candidate tanh(0)=0 and update gate 0.5 blend h_prev=0 with it
  for (int i = 0; i < hidden; ++i) EXPECT_DOUBLE_EQ(t.val(hn)[i], 0.0);
}

TEST(Gru, RejectsMismatchedHidden) {
  Rng rng(39);
  auto g = make_gru(10, 8, rng);
  std::vector<double> x(10, 0.0), h(20, 0.0);
  Tape<double> t(false);
  EXPECT_THROW(gru_cell(t, t.input({10}, x), t.input({20}, h), t.param(g.w_ih),
                        t.param(g.w_hh), t.param(g.b_ih), t.param(g.b_hh)),
               DimError);
}

TEST(Gru, GradThroughThreeChainedSteps) {
  Rng rng(41);
  const int hidden = 6;
  auto g = make_gru(4, hidden, rng);
  auto probe = rand_param("probe", {hidden}, rng);
  std::vector<Parameter<double>> xs;
  for (int s = 0; s < 3; ++s) xs.push_back(rand_param("x" + std::to_string(s), {4}, rng));
  auto loss = [&](bool grad) {
    Tape<double> t(grad);
    VarId h = t.zeros({hidden});
    for (int s = 0; s < 3; ++s)
      h = gru_cell(t, t.param(xs[s]), h, t.param(g.w_ih), t.param(g.w_hh), t.param(g.b_ih),
                   t.param(g.b_hh));
    VarId l = t.sum(t.mul(h, t.param(probe)));
    if (grad) t.backward(l);
    return t.scalar(l);
  };
  loss(true);
  std::vector<Parameter<double>*> ps = g.all();
  for (auto& x : xs) ps.push_back(&x);
  auto rep = grad_check<double>([&] { return loss(false); }, ps);
  EXPECT_LT(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Backward, LinearLossHasOuterProductGradient) {
  Rng rng(43);
  auto w = rand_param("w", {3, 4}, rng);
  std::vector<double> x(4);
  for (auto& v : x) v = rng.uniform(-1, 1);
  Tape<double> t;
  const std::vector<double> b(3, 0.0);
  VarId y = t.linear(t.input({4}, x), t.param(w), t.input({3}, b));
  t.backward(t.sum(y));
  // d(sum(Wx))/dW[i][j] = x[j]
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(w.grad[i * 4 + j], x[j]);
}

TEST(Backward, SharedParameterAccumulatesBothPaths) {
  Rng rng(47);
  auto w = rand_param("w", {3, 4}, rng);
  auto x = rand_param("x", {4}, rng);
  const std::vector<double> b(3, 0.0);

  auto run_once = [&](int uses) {
    w.zero_grad();
    Tape<double> t;
    std::vector<VarId> sums;
    for (int u = 0; u < uses; ++u) {
      VarId y = t.linear(t.param(x), t.param(w), t.input({3}, b));
      sums.push_back(t.sum(y));
    }
    t.backward(t.add_n(sums));
    return w.grad;
  };
  auto twice = run_once(2);
  auto once = run_once(1);
  for (std::size_t i = 0; i < twice.size(); ++i) EXPECT_DOUBLE_EQ(twice[i], 2.0 * once[i]);
}

TEST(Backward, NonScalarLossIsUsageError) {
  Rng rng(53);
  auto w = rand_param("w", {3, 4}, rng);
  auto x = rand_param("x", {4}, rng);
  const std::vector<double> b(3, 0.0);
  Tape<double> t;
  VarId y = t.linear(t.param(x), t.param(w), t.input({3}, b));
  EXPECT_THROW(t.backward(y), UsageError);
}

TEST(Backward, UnusedParameterKeepsZeroGradient) {
  Rng rng(59);
  auto used = rand_param("used", {4}, rng);
  auto unused = rand_param("unused", {4}, rng);
  Tape<double> t;
  t.backward(t.sum(t.mul(t.param(used), t.param(used))));
  for (double g : unused.grad) EXPECT_DOUBLE_EQ(g, 0.0);
}

TEST(Backward, DeterministicForward) {
  Rng rng(61);
  auto w = rand_param("w", {8, 8}, rng);
  auto x = rand_param("x", {8}, rng);
  const std::vector<double> b(8, 0.0);
  auto run = [&] {
    Tape<double> t(false);
    VarId y = t.softmax(t.linear(t.param(x), t.param(w), t.input({8}, b)));
    return std::vector<double>(t.val(y).begin(), t.val(y).end());
  };
  auto a = run(), c = run();
  EXPECT_EQ(a, c);  // bit-identical
}

// Every differentiable op, 20 random instances each, rel err < 1e-4.
TEST(Backward, AllOpsMatchFiniteDifferencesOnRandomInstances) {
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng(1000 + inst);
    auto a = rand_param("a", {12}, rng);
    auto c = rand_param("c", {12}, rng);
    auto w = rand_param("w", {5, 12}, rng);
    auto wb = rand_param("wb", {5}, rng);
    auto img = rand_param("img", {2, 6, 6}, rng);
    auto ker = rand_param("ker", {1, 2, 3, 3}, rng);
    auto kb = rand_param("kb", {1}, rng);
    auto map = rand_param("map", {36}, rng, 0.0, 1.0);
    auto loss = [&](bool grad) {
      Tape<double> t(grad);
      VarId va = t.param(a), vc = t.param(c);
      VarId mix = t.add(t.mul(t.sigmoid(va), t.tanh(vc)), t.one_minus(t.relu(va)));
      VarId lin = t.linear(mix, t.param(w), t.param(wb));
      VarId sm = t.softmax(lin);
      VarId lsm = t.log_softmax(lin);
      VarId conv = t.conv2d_same(t.param(img), t.param(ker), t.param(kb));
      VarId weighted = t.scale_spatial(conv, t.param(map));
      VarId pooled = t.sum_spatial(weighted);
      VarId parts = t.concat({sm, pooled, t.slice(lsm, 1, 3)});
      VarId l = t.add(t.sum(t.mul(parts, parts)), t.scale(t.pick(lsm, 2), 0.5));
      if (grad) t.backward(l);
      return t.scalar(l);
    };
    loss(true);
    auto rep = grad_check<double>(
        [&] { return loss(false); }, {&a, &c, &w, &wb, &img, &ker, &kb, &map});
    EXPECT_LT(rep.max_rel_err, 1e-4)
        << "instance " << inst << " worst " << rep.worst_param << "[" << rep.worst_index << "]"
        << " analytic=" << rep.analytic << " numeric=" << rep.numeric;
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Parameter<double> p("p", {3});
  p.value = {1.0, -2.0, 0.5};
  auto before = p.value;
  Adam<double> opt;
  opt.step(p);
  EXPECT_EQ(p.value, before);
}

TEST(Adam, FirstStepMagnitudeIsLearningRate) {
  Parameter<double> p("p", {4});
  p.value = {1.0, 1.0, 1.0, 1.0};
  p.grad = {0.3, -0.7, 2.0, -0.001};
  AdamConfig cfg;
  Adam<double> opt(cfg);
  opt.step(p);
  // bias-corrected first step: lr * g / (|g| + eps) ~= lr * sign(g)
  for (int i = 0; i < 4; ++i)
    EXPECT_NEAR(std::abs(p.value[i] - 1.0), cfg.lr, cfg.lr * 1e-4);
}

TEST(Adam, QuadraticBowlConverges) {
  Parameter<double> p("w", {1});
  p.value = {1.0};
  AdamConfig cfg;
  cfg.lr = 0.01;
  Adam<double> opt(cfg);
  for (int step = 0; step < 200; ++step) {
    p.zero_grad();
    p.grad[0] = 2.0 * p.value[0];  // d/dw w^2
    opt.step(p);
  }
  EXPECT_LT(std::abs(p.value[0]), 0.1);
}

TEST(Adam, GradAccumulationAcrossSitesEqualsSumOfParts) {
  Rng rng(71);
  auto w = rand_param("w", {4, 4}, rng);
  auto x1 = rand_param("x1", {4}, rng);
  auto x2 = rand_param("x2", {4}, rng);
  auto x3 = rand_param("x3", {4}, rng);
  const std::vector<double> b(4, 0.0);

  auto site_grad = [&](Parameter<double>& x) {
    w.zero_grad();
    Tape<double> t;
    VarId y = t.linear(t.param(x), t.param(w), t.input({4}, b));
    t.backward(t.sum(t.mul(y, y)));
    return w.grad;
  };
  auto g1 = site_grad(x1), g2 = site_grad(x2), g3 = site_grad(x3);

  w.zero_grad();
  Tape<double> t;
  std::vector<VarId> ls;
  for (auto* x : {&x1, &x2, &x3}) {
    VarId y = t.linear(t.param(*x), t.param(w), t.input({4}, b));
    ls.push_back(t.sum(t.mul(y, y)));
  }
  t.backward(t.add_n(ls));
  for (std::size_t i = 0; i < w.grad.size(); ++i)
    EXPECT_NEAR(w.grad[i], g1[i] + g2[i] + g3[i], 1e-12);
}

}  // namespace
