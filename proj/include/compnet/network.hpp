#pragma once

#include <string>
#include <vector>

#include "compnet/gridworld.hpp"
#include "compnet/lexicon.hpp"
#include "compnet/tape.hpp"

namespace compnet {

// Hidden state of one node: two stacked GRU layers, as tape vars.
struct NodeVars {
  VarId h1 = -1, h2 = -1;
};

// One inter-node message as actually passed: attention map values, hidden
// state values, or their concatenation, depending on the message kind.
struct MessageRecord {
  int child = -1, parent = -1, step = 0;
  std::size_t size = 0;
};

template <typename T>
struct StepResult {
  VarId logits = -1;               // root action logits (pre-softmax)
  std::vector<T> action_dist;      // softmax over the six actions
  std::vector<std::vector<T>> maps;          // active attention map per node
  std::vector<VarId> map_vars;               // same, as tape vars
  std::vector<std::vector<T>> other_maps;    // inactive head (dual modules, on request)
  std::vector<VarId> aux_products;           // sum(att_A * att_B) per dual node
};

struct ForwardOpts {
  bool eval_inactive = false;  // run the inactive antonym head (aux loss / inspection)
  std::vector<MessageRecord>* messages = nullptr;
  int step_index = 0;
};

template <typename T>
VarId embed_observation(Tape<T>& t, Lexicon<T>& lex, const GridWorld& w) {
  const auto raw = encode_observation<T>(w);
  const VarId x = t.input({kObsChannels, kGridSize, kGridSize}, raw);
  return t.relu(t.conv2d_same(x, t.param(lex.cnn_k), t.param(lex.cnn_b)));
}

// One synchronous tick of the whole network: every node predicts its
// attention map from its children's messages, then updates its GRU stack
// from the map-weighted observation; the root's state decodes to an action
// distribution. Nodes are visited leaves-to-root (the instance ordering).
template <typename T>
StepResult<T> network_forward_step(Tape<T>& t, Lexicon<T>& lex, const NetworkInstance<T>& net,
                                   VarId obs, std::vector<NodeVars>& states,
                                   const ForwardOpts& opts = {}) {
  const ModelConfig& cfg = lex.config();
  const int n = static_cast<int>(net.nodes.size());
  if (static_cast<int>(states.size()) != n)
    throw UsageError("network_forward_step: state count does not match network");
  StepResult<T> res;
  res.maps.resize(n);
  res.map_vars.assign(n, -1);
  res.other_maps.resize(n);
  VarId pooled_obs = -1;  // lazy mean over cells, shared by all leaves

  for (int i = 0; i < n; ++i) {
    const NetNode<T>& node = net.nodes[i];
    WordModule<T>& m = *node.module;
    if (static_cast<int>(node.children.size()) != m.arity)
      throw UsageError("assembly error: node '" + node.label + "' has " +
                       std::to_string(node.children.size()) + " children, module arity " +
                       std::to_string(m.arity));

    // Input slots: the children's messages (or the raw observation for a leaf).
    std::vector<VarId> parts;
    const VarId h_prev_top = states[i].h2;
    parts.push_back(t.relu(t.linear(h_prev_top, t.param(m.hid_w), t.param(m.hid_b))));
    if (m.arity == 0) {
      if (pooled_obs < 0)
        pooled_obs = t.scale(t.sum_spatial(obs), T(1) / T(kCells));
      parts.push_back(t.relu(t.linear(pooled_obs, t.param(m.slot_w[0]), t.param(m.slot_b[0]))));
    } else {
      for (int s = 0; s < m.arity; ++s) {
        const int c = node.children[s];
        VarId u = -1;
        switch (cfg.message) {
          case MessageKind::Attention:
            u = t.sum_spatial(t.scale_spatial(obs, res.map_vars[c]));
            break;
          case MessageKind::State:
            u = states[c].h2;
            break;
          case MessageKind::StateAttention:
            u = t.concat({t.sum_spatial(t.scale_spatial(obs, res.map_vars[c])), states[c].h2});
            break;
        }
        if (opts.messages) {
          const std::size_t sz = cfg.message == MessageKind::Attention ? kCells
                                 : cfg.message == MessageKind::State
                                     ? static_cast<std::size_t>(cfg.hidden)
                                     : kCells + static_cast<std::size_t>(cfg.hidden);
          opts.messages->push_back({c, i, opts.step_index, sz});
        }
        parts.push_back(t.relu(t.linear(u, t.param(m.slot_w[s]), t.param(m.slot_b[s]))));
      }
    }
    const VarId z = t.relu(t.linear(t.concat(parts), t.param(m.comb_w), t.param(m.comb_b)));
    const VarId att = t.softmax(
        t.linear(z, t.param(m.head_w[node.head]), t.param(m.head_b[node.head])));
    res.map_vars[i] = att;
    res.maps[i].assign(t.val(att).begin(), t.val(att).end());
    if (m.dual && opts.eval_inactive) {
      const int other = 1 - node.head;
      const VarId att_other =
          t.softmax(t.linear(z, t.param(m.head_w[other]), t.param(m.head_b[other])));
      res.other_maps[i].assign(t.val(att_other).begin(), t.val(att_other).end());
      res.aux_products.push_back(t.sum(t.mul(att, att_other)));
    }

    // State update from the map-weighted observation (geometry preserved).
    const VarId x =
        t.linear(t.scale_spatial(obs, att), t.param(m.upd_w), t.param(m.upd_b));
    states[i].h1 = gru_cell(t, x, states[i].h1, t.param(m.gru_w_ih[0]), t.param(m.gru_w_hh[0]),
                            t.param(m.gru_b_ih[0]), t.param(m.gru_b_hh[0]));
    states[i].h2 = gru_cell(t, states[i].h1, states[i].h2, t.param(m.gru_w_ih[1]),
                            t.param(m.gru_w_hh[1]), t.param(m.gru_b_ih[1]),
                            t.param(m.gru_b_hh[1]));
  }

  res.logits = t.linear(states[net.root].h2, t.param(lex.dec_w), t.param(lex.dec_b));
  const VarId dist = t.softmax(res.logits);
  res.action_dist.assign(t.val(dist).begin(), t.val(dist).end());
  return res;
}

template <typename T>
std::vector<NodeVars> initial_states(Tape<T>& t, const NetworkInstance<T>& net, int hidden) {
  std::vector<NodeVars> states(net.nodes.size());
  for (auto& s : states) {
    s.h1 = t.zeros({hidden});
    s.h2 = t.zeros({hidden});
  }
  return states;
}

// Per-(node, step) attention snapshot collected during a rollout.
template <typename T>
struct RolloutTrace {
  // maps[step][node]: active head; other_maps[step][node]: inactive head of
  // dual modules, empty otherwise.
  std::vector<std::vector<std::vector<T>>> maps;
  std::vector<std::vector<std::vector<T>>> other_maps;
  std::vector<std::vector<T>> action_dists;
};

// Greedy closed-loop execution: argmax action each step (lowest index wins
// ties), environment stepped after each action, stops at Stay or max_steps.
template <typename T>
std::vector<Action> rollout(Lexicon<T>& lex, const NetworkInstance<T>& net, GridWorld world,
                            int max_steps = 100, RolloutTrace<T>* trace = nullptr) {
  const int hidden = lex.config().hidden;
  const int n = static_cast<int>(net.nodes.size());
  std::vector<std::vector<T>> h1(n, std::vector<T>(hidden, T(0)));
  std::vector<std::vector<T>> h2 = h1;
  std::vector<Action> actions;
  for (int s = 0; s < max_steps; ++s) {
    Tape<T> t(false);
    std::vector<NodeVars> states(n);
    for (int i = 0; i < n; ++i) {
      states[i].h1 = t.input({hidden}, h1[i]);
      states[i].h2 = t.input({hidden}, h2[i]);
    }
    const VarId obs = embed_observation(t, lex, world);
    ForwardOpts opts;
    opts.eval_inactive = trace != nullptr;
    opts.step_index = s;
    StepResult<T> res = network_forward_step(t, lex, net, obs, states, opts);
    if (trace) {
      trace->maps.push_back(res.maps);
      trace->other_maps.push_back(res.other_maps);
      trace->action_dists.push_back(res.action_dist);
    }
    int best = 0;
    for (int a = 1; a < kNumActions; ++a)
      if (res.action_dist[a] > res.action_dist[best]) best = a;
    const Action act = static_cast<Action>(best);
    actions.push_back(act);
    if (act == Action::Stay) break;
    world = step(world, act);
    for (int i = 0; i < n; ++i) {
      h1[i].assign(t.val(states[i].h1).begin(), t.val(states[i].h1).end());
      h2[i].assign(t.val(states[i].h2).begin(), t.val(states[i].h2).end());
    }
  }
  return actions;
}

// Signed comparison of an antonym pair's maps: (-att_small + att_large) / 2.
// Values land in [-1/2, 1/2]; lighter means larger.
template <typename T>
std::vector<T> size_ordering_map(const std::vector<T>& att_small,
                                 const std::vector<T>& att_large) {
  if (att_small.size() != att_large.size())
    throw DimError("size_ordering_map: map sizes differ");
  std::vector<T> out(att_small.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (-att_small[i] + att_large[i]) / T(2);
  return out;
}

}  // namespace compnet
