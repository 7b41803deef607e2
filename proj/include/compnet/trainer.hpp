#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "compnet/adam.hpp"
#include "compnet/dataset.hpp"
#include "compnet/network.hpp"
#include "compnet/parse.hpp"

namespace compnet {

class TrainError : public std::runtime_error {
 public:
  explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainConfig {
  int steps = 20000;
  int batch_size = 16;
  AdamConfig adam;
  double lambda = 1.0;  // antonym auxiliary loss weight
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // 0 = only at the end
};

// Maps a command to its normalized parse DAG; selects between the built-in
// semantic parser and ingested external parses.
using ParserFn = std::function<ParseDag(const Command&)>;

inline ParserFn semantic_parser(AdjectiveOrder order = AdjectiveOrder::SizeOutsideColor) {
  return [order](const Command& c) { return normalize_dag(semantic_parse(c, order)); };
}

// External parses are keyed by the command string with spaces replaced by
// underscores (parse-block ids cannot contain whitespace).
inline ParserFn ingest_parser(const std::map<std::string, ParseDag>& table) {
  return [table](const Command& c) {
    std::string key = c.text();
    for (auto& ch : key)
      if (ch == ' ') ch = '_';
    auto it = table.find(key);
    if (it == table.end())
      throw ParseError("no ingested parse for command: " + c.text());
    return normalize_dag(it->second);
  };
}

// Product intensity of two attention maps: zero iff their supports are
// disjoint, so minimizing it pushes antonym heads apart.
template <typename T>
T antonym_loss(const std::vector<T>& att_a, const std::vector<T>& att_b) {
  if (att_a.size() != att_b.size()) throw DimError("antonym_loss: map sizes differ");
  T s = 0;
  for (std::size_t i = 0; i < att_a.size(); ++i) s += att_a[i] * att_b[i];
  return s;
}

template <typename T>
struct TeacherLoss {
  VarId loss_var = -1;  // nll + lambda * aux, on tape
  double nll = 0.0;     // per-step mean
  double aux = 0.0;     // per-step mean of the product-intensity term
  double total = 0.0;
  std::vector<std::vector<T>> per_step_dists;
};

// Teacher forcing: the environment advances with the ground-truth action
// while the model is scored on predicting it. The inactive antonym head runs
// only to produce the auxiliary term; it never enters the message flow.
template <typename T>
TeacherLoss<T> teacher_forced_loss(Tape<T>& t, Lexicon<T>& lex, const NetworkInstance<T>& net,
                                   const Episode& ep, double lambda,
                                   bool want_aux_metric = true) {
  bool has_dual = false;
  for (const auto& node : net.nodes) has_dual = has_dual || node.module->dual;
  const bool eval_inactive = has_dual && (lambda != 0.0 || want_aux_metric);

  TeacherLoss<T> out;
  auto states = initial_states(t, net, lex.config().hidden);
  GridWorld world = ep.world;
  std::vector<VarId> nll_terms, aux_terms;
  for (std::size_t step_i = 0; step_i < ep.actions.size(); ++step_i) {
    ForwardOpts opts;
    opts.eval_inactive = eval_inactive;
    opts.step_index = static_cast<int>(step_i);
    auto res = network_forward_step(t, lex, net, embed_observation(t, lex, world), states, opts);
    const int label = static_cast<int>(ep.actions[step_i]);
    nll_terms.push_back(t.scale(t.pick(t.log_softmax(res.logits), label), T(-1)));
    for (VarId a : res.aux_products) aux_terms.push_back(a);
    out.per_step_dists.push_back(std::move(res.action_dist));
    world = step(world, ep.actions[step_i]);
  }
  const T inv_steps = T(1) / static_cast<T>(ep.actions.size());
  const VarId nll_mean = t.scale(t.add_n(nll_terms), inv_steps);
  out.nll = static_cast<double>(t.scalar(nll_mean));
  VarId loss = nll_mean;
  if (!aux_terms.empty()) {
    const VarId aux_mean = t.scale(t.add_n(aux_terms), inv_steps);
    out.aux = static_cast<double>(t.scalar(aux_mean));
    if (lambda != 0.0) loss = t.add(loss, t.scale(aux_mean, static_cast<T>(lambda)));
  }
  out.loss_var = loss;
  out.total = static_cast<double>(t.scalar(loss));
  return out;
}

// Episodes sharing a command string share one assembled topology.
template <typename T>
class NetworkCache {
 public:
  NetworkCache(Lexicon<T>& lex, ParserFn parser) : lex_(lex), parser_(std::move(parser)) {}

  const NetworkInstance<T>& get(const Command& c, bool at_eval = false) {
    const std::string key = c.text();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, assemble_network(parser_(c), lex_, at_eval)).first->second;
  }

 private:
  Lexicon<T>& lex_;
  ParserFn parser_;
  std::map<std::string, NetworkInstance<T>> cache_;
};

struct TraceRow {
  int step = 0;
  double nll = 0.0, aux = 0.0, total = 0.0;
};

inline std::string format_trace_row(const TraceRow& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d\t%.17g\t%.17g\t%.17g\n", r.step, r.nll, r.aux, r.total);
  return buf;
}

// One optimizer step over a sampled batch: groups episodes by command,
// accumulates gradients episode by episode in a fixed order, then updates
// exactly the touched parameters.
template <typename T>
TraceRow train_step(Lexicon<T>& lex, Adam<T>& opt, NetworkCache<T>& nets,
                    const std::vector<Episode>& data, const TrainConfig& cfg, Rng& batch_rng,
                    int step_index) {
  if (data.empty()) throw TrainError("train: dataset is empty");
  std::map<std::string, std::vector<int>> groups;  // command -> episode indices
  for (int b = 0; b < cfg.batch_size; ++b) {
    const int idx = batch_rng.index(static_cast<int>(data.size()));
    groups[data[idx].command.text()].push_back(idx);
  }
  lex.zero_grads();
  std::set<Parameter<T>*> touched;
  TraceRow row;
  row.step = step_index;
  int episodes = 0;
  for (const auto& [cmd, indices] : groups) {
    const NetworkInstance<T>& net = nets.get(data[indices[0]].command);
    for (int idx : indices) {
      Tape<T> t;
      auto tl = teacher_forced_loss(t, lex, net, data[idx], cfg.lambda);
      if (!std::isfinite(tl.total))
        throw TrainError("train: non-finite loss at step " + std::to_string(step_index) +
                         ", episode seed " + std::to_string(data[idx].seed) + " ('" + cmd + "')");
      t.backward(tl.loss_var);
      for (const auto& [p, id] : t.bound()) touched.insert(p);
      row.nll += tl.nll;
      row.aux += tl.aux;
      row.total += tl.total;
      ++episodes;
    }
  }
  for (Parameter<T>* p : touched) opt.step(*p);
  row.nll /= episodes;
  row.aux /= episodes;
  row.total /= episodes;
  return row;
}

// Full training loop; resumable by passing the step to start from. The trace
// stream receives one `step<TAB>nll<TAB>aux<TAB>total` row per step.
template <typename T>
std::vector<TraceRow> train(Lexicon<T>& lex, Adam<T>& opt, const std::vector<Episode>& data,
                            const TrainConfig& cfg, const ParserFn& parser, Rng& batch_rng,
                            std::ostream* trace_out = nullptr, int start_step = 0,
                            const std::function<void(int)>& after_step = {}) {
  NetworkCache<T> nets(lex, parser);
  std::vector<TraceRow> trace;
  for (int s = start_step; s < cfg.steps; ++s) {
    TraceRow row = train_step(lex, opt, nets, data, cfg, batch_rng, s);
    trace.push_back(row);
    if (trace_out) *trace_out << format_trace_row(row);
    if (after_step) after_step(s);
  }
  return trace;
}

}  // namespace compnet
