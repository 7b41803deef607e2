#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "compnet/errors.hpp"
#include "compnet/gridworld.hpp"
#include "compnet/parse.hpp"
#include "compnet/tensor.hpp"

namespace compnet {

// ---- lexical relations and merge classes ----

// Static stand-in for WordNet lookups: `SYN a b` / `ANT a b` lines.
struct LexicalRelations {
  std::vector<std::pair<std::string, std::string>> synonyms;
  std::vector<std::pair<std::string, std::string>> antonyms;

  static LexicalRelations parse(const std::string& text) {
    LexicalRelations r;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::string tag, a, b;
      if (!(ls >> tag) || tag[0] == '#') continue;
      if (!(ls >> a >> b))
        throw FormatError("relations line " + std::to_string(line_no) + ": need two labels");
      if (tag == "SYN") r.synonyms.emplace_back(a, b);
      else if (tag == "ANT") r.antonyms.emplace_back(a, b);
      else throw FormatError("relations line " + std::to_string(line_no) + ": unknown tag " + tag);
    }
    return r;
  }
};

// Transitive closure over synonym and antonym links. Every label maps to a
// class (its lexicographically smallest member) plus a polarity; antonymy
// flips polarity, synonymy preserves it. A class with both polarities
// populated gets a dual-headed module.
class MergeClassTable {
 public:
  struct Entry {
    std::string class_id;
    int polarity = 0;  // 0 = A, 1 = B (relative to the class representative)
    bool dual = false;
  };

  MergeClassTable() = default;

  Entry lookup(const std::string& label) const {
    auto it = entries_.find(label);
    if (it != entries_.end()) return it->second;
    return {label, 0, false};
  }

  const std::map<std::string, Entry>& entries() const { return entries_; }

  static MergeClassTable build(const LexicalRelations& rel) {
    // Union-find with parity to the root; parity 1 means "antonym side".
    std::map<std::string, std::string> parent;
    std::map<std::string, int> parity;
    std::function<std::pair<std::string, int>(const std::string&)> find =
        [&](const std::string& x) -> std::pair<std::string, int> {
      if (parent[x] == x) return {x, 0};
      auto [root, p] = find(parent[x]);
      parent[x] = root;
      parity[x] = (parity[x] + p) % 2;
      return {root, parity[x]};
    };
    auto ensure = [&](const std::string& x) {
      if (!parent.count(x)) {
        parent[x] = x;
        parity[x] = 0;
      }
    };
    auto unite = [&](const std::string& a, const std::string& b, int rel_parity,
                     const char* kind) {
      ensure(a);
      ensure(b);
      auto [ra, pa] = find(a);
      auto [rb, pb] = find(b);
      if (ra == rb) {
        if ((pa + pb) % 2 != rel_parity)
          throw ConfigError("inconsistent polarity: " + std::string(kind) + " " + a + " " + b +
                            " closes an odd antonym cycle");
        return;
      }
      parent[rb] = ra;
      parity[rb] = (pa + pb + rel_parity) % 2;
    };
    for (const auto& [a, b] : rel.synonyms) unite(a, b, 0, "SYN");
    for (const auto& [a, b] : rel.antonyms) unite(a, b, 1, "ANT");

    // Canonicalize: the representative is the lexicographically smallest
    // member, which makes the table independent of relation listing order.
    // In a dual class the representative's side is named B and the opposite
    // side A; single-sided classes are all A.
    std::map<std::string, std::vector<std::string>> groups;
    for (auto& [label, _] : parent) groups[find(label).first].push_back(label);
    MergeClassTable t;
    for (auto& [root, members] : groups) {
      std::sort(members.begin(), members.end());
      const std::string& rep = members.front();
      const int rep_parity = find(rep).second;
      bool dual = false;
      for (const auto& m : members)
        if ((find(m).second + rep_parity) % 2 == 1) dual = true;
      for (const auto& m : members) {
        const bool rep_side = (find(m).second + rep_parity) % 2 == 0;
        t.entries_[m] = {rep, dual ? (rep_side ? 1 : 0) : 0, dual};
      }
    }
    return t;
  }

 private:
  std::map<std::string, Entry> entries_;
};

inline MergeClassTable build_merge_classes(const LexicalRelations& rel) {
  return MergeClassTable::build(rel);
}

// ---- module parameters ----

enum class MessageKind { Attention, State, StateAttention };

inline const char* to_string(MessageKind m) {
  switch (m) {
    case MessageKind::Attention: return "attention";
    case MessageKind::State: return "state";
    default: return "state+attention";
  }
}

inline MessageKind message_kind_from_string(const std::string& s) {
  for (int i = 0; i < 3; ++i)
    if (s == to_string(static_cast<MessageKind>(i))) return static_cast<MessageKind>(i);
  throw ConfigError("unknown message kind: " + s);
}

struct ModelConfig {
  int cnn_channels = 50;
  int kernel = 7;
  int hidden = 20;  // per GRU layer, 2 layers
  int proj = 10;
  MessageKind message = MessageKind::Attention;

  bool operator==(const ModelConfig&) const = default;

  // Width of one per-child input slot before projection.
  int child_slot_width() const {
    switch (message) {
      case MessageKind::Attention: return cnn_channels;
      case MessageKind::State: return hidden;
      default: return cnn_channels + hidden;
    }
  }
};

// Shared parameters for one concept at one arity: per-slot input projections,
// the combiner MLP, one or two attention heads, and the two-layer GRU stack.
template <typename T>
struct WordModule {
  std::string class_id;
  int arity = 0;
  bool dual = false;
  bool created_at_eval = false;  // instantiated outside training (condition G boundary)

  std::vector<Parameter<T>> slot_w, slot_b;  // max(arity,1) input slots
  Parameter<T> hid_w, hid_b;
  Parameter<T> comb_w, comb_b;
  Parameter<T> head_w[2], head_b[2];
  Parameter<T> upd_w, upd_b;
  Parameter<T> gru_w_ih[2], gru_w_hh[2], gru_b_ih[2], gru_b_hh[2];

  std::vector<Parameter<T>*> params() {
    std::vector<Parameter<T>*> out;
    for (auto& p : slot_w) out.push_back(&p);
    for (auto& p : slot_b) out.push_back(&p);
    out.insert(out.end(), {&hid_w, &hid_b, &comb_w, &comb_b, &head_w[0], &head_b[0]});
    if (dual) out.insert(out.end(), {&head_w[1], &head_b[1]});
    out.insert(out.end(), {&upd_w, &upd_b});
    for (int l = 0; l < 2; ++l)
      out.insert(out.end(), {&gru_w_ih[l], &gru_w_hh[l], &gru_b_ih[l], &gru_b_hh[l]});
    return out;
  }
};

struct ConceptKey {
  std::string class_id;
  int arity = 0;
  auto operator<=>(const ConceptKey&) const = default;

  std::string str() const { return class_id + "|" + std::to_string(arity); }
};

// Persistent store of word modules plus the globally shared observation CNN
// and root action decoder. Modules are created once per concept key and
// shared by every network that mentions the concept.
template <typename T>
class Lexicon {
 public:
  Lexicon(ModelConfig cfg, MergeClassTable classes, std::uint64_t init_seed)
      : cfg_(cfg),
        classes_(std::move(classes)),
        init_rng_(Rng::derive(init_seed, 0x6c6578ULL)),
        cnn_k("cnn.kernel", {cfg.cnn_channels, kObsChannels, cfg.kernel, cfg.kernel}),
        cnn_b("cnn.bias", {cfg.cnn_channels}),
        dec_w("decoder.weight", {kNumActions, cfg.hidden}),
        dec_b("decoder.bias", {kNumActions}) {
    init_uniform_fan_in(cnn_k, kObsChannels * cfg.kernel * cfg.kernel, init_rng_);
    init_uniform_fan_in(dec_w, cfg.hidden, init_rng_);
  }

  const ModelConfig& config() const { return cfg_; }
  const MergeClassTable& classes() const { return classes_; }
  Rng& init_rng() { return init_rng_; }

  ConceptKey key_for(const std::string& label, int arity) const {
    return {classes_.lookup(label).class_id, arity};
  }

  int head_for(const std::string& label) const { return classes_.lookup(label).polarity; }

  bool has_module(const ConceptKey& key) const { return by_key_.count(key) > 0; }

  WordModule<T>& get_or_create(const ConceptKey& key, bool at_eval = false) {
    auto it = by_key_.find(key);
    if (it != by_key_.end()) return *it->second;
    auto mod = std::make_unique<WordModule<T>>();
    mod->class_id = key.class_id;
    mod->arity = key.arity;
    mod->created_at_eval = at_eval;
    // A class whose members span both polarities exposes two heads.
    bool dual = false;
    for (const auto& [label, entry] : classes_.entries())
      if (entry.class_id == key.class_id && entry.dual) dual = true;
    mod->dual = dual;
    init_module(*mod);
    WordModule<T>* raw = mod.get();
    modules_.push_back(std::move(mod));
    by_key_.emplace(key, raw);
    return *raw;
  }

  const std::vector<std::unique_ptr<WordModule<T>>>& modules() const { return modules_; }

  // CNN, decoder, then module parameters in creation order; the canonical
  // enumeration for optimizers and checkpoints.
  std::vector<Parameter<T>*> all_params() {
    std::vector<Parameter<T>*> out{&cnn_k, &cnn_b, &dec_w, &dec_b};
    for (auto& m : modules_) {
      auto ps = m->params();
      out.insert(out.end(), ps.begin(), ps.end());
    }
    return out;
  }

  void zero_grads() {
    for (auto* p : all_params()) p->zero_grad();
  }

  Parameter<T> cnn_k, cnn_b, dec_w, dec_b;

 private:
  void init_module(WordModule<T>& m) {
    const std::string prefix = "mod(" + m.class_id + "|" + std::to_string(m.arity) + ").";
    const int slots = std::max(m.arity, 1);
    const int slot_in = m.arity == 0 ? cfg_.cnn_channels : cfg_.child_slot_width();
    for (int s = 0; s < slots; ++s) {
      m.slot_w.emplace_back(prefix + "slot" + std::to_string(s) + ".w",
                            Shape{cfg_.proj, slot_in});
      m.slot_b.emplace_back(prefix + "slot" + std::to_string(s) + ".b", Shape{cfg_.proj});
      init_uniform_fan_in(m.slot_w.back(), slot_in, init_rng_);
    }
    m.hid_w = Parameter<T>(prefix + "hid.w", {cfg_.proj, cfg_.hidden});
    m.hid_b = Parameter<T>(prefix + "hid.b", {cfg_.proj});
    init_uniform_fan_in(m.hid_w, cfg_.hidden, init_rng_);
    const int comb_in = cfg_.proj * (slots + 1);
    m.comb_w = Parameter<T>(prefix + "comb.w", {cfg_.proj, comb_in});
    m.comb_b = Parameter<T>(prefix + "comb.b", {cfg_.proj});
    init_uniform_fan_in(m.comb_w, comb_in, init_rng_);
    const int heads = m.dual ? 2 : 1;
    for (int h = 0; h < heads; ++h) {
      const char* tag = h == 0 ? "headA" : "headB";
      m.head_w[h] = Parameter<T>(prefix + tag + ".w", {kCells, cfg_.proj});
      m.head_b[h] = Parameter<T>(prefix + tag + ".b", {kCells});
      init_uniform_fan_in(m.head_w[h], cfg_.proj, init_rng_);
    }
    const int upd_in = cfg_.cnn_channels * kCells;
    m.upd_w = Parameter<T>(prefix + "upd.w", {cfg_.proj, upd_in});
    m.upd_b = Parameter<T>(prefix + "upd.b", {cfg_.proj});
    init_uniform_fan_in(m.upd_w, upd_in, init_rng_);
    for (int l = 0; l < 2; ++l) {
      const int in = l == 0 ? cfg_.proj : cfg_.hidden;
      const std::string layer = "gru" + std::to_string(l + 1);
      m.gru_w_ih[l] = Parameter<T>(prefix + layer + ".w_ih", {3 * cfg_.hidden, in});
      m.gru_w_hh[l] = Parameter<T>(prefix + layer + ".w_hh", {3 * cfg_.hidden, cfg_.hidden});
      m.gru_b_ih[l] = Parameter<T>(prefix + layer + ".b_ih", {3 * cfg_.hidden});
      m.gru_b_hh[l] = Parameter<T>(prefix + layer + ".b_hh", {3 * cfg_.hidden});
      init_uniform_fan_in(m.gru_w_ih[l], in, init_rng_);
      init_uniform_fan_in(m.gru_w_hh[l], cfg_.hidden, init_rng_);
    }
  }

  ModelConfig cfg_;
  MergeClassTable classes_;
  Rng init_rng_;
  std::vector<std::unique_ptr<WordModule<T>>> modules_;
  std::map<ConceptKey, WordModule<T>*> by_key_;
};

// ---- parse-to-network assembly ----

template <typename T>
struct NetNode {
  std::string label;
  int dag_index = -1;
  WordModule<T>* module = nullptr;
  int head = 0;                // antonym head selected by the surface label
  std::vector<int> children;  // indices into NetworkInstance::nodes, arc order
};

// Immutable per-command view over shared module parameters, topologically
// ordered leaves-to-root (information flows against the parse arcs).
template <typename T>
struct NetworkInstance {
  std::vector<NetNode<T>> nodes;
  int root = -1;
  bool uses_untrained = false;
};

template <typename T>
NetworkInstance<T> assemble_network(const ParseDag& dag, Lexicon<T>& lex,
                                    bool at_eval = false) {
  const auto roots = dag.roots();
  if (roots.size() != 1)
    throw UsageError("assemble_network: dag must be normalized to a single root");
  const int n = static_cast<int>(dag.nodes.size());

  // Children in arc order, by dag node index.
  std::vector<std::vector<int>> children(n);
  for (int i = 0; i < n; ++i)
    for (const DagArc* a : dag.children_of(dag.nodes[i].id))
      children[i].push_back(dag.node_index(a->child));

  // Kahn order, children before parents, smallest dag index first.
  std::vector<int> unplaced(n);
  std::vector<std::vector<int>> parents(n);
  for (int i = 0; i < n; ++i) {
    unplaced[i] = static_cast<int>(children[i].size());
    for (int c : children[i]) parents[c].push_back(i);
  }
  std::set<int> ready;
  for (int i = 0; i < n; ++i)
    if (unplaced[i] == 0) ready.insert(i);
  std::vector<int> order;
  std::vector<int> pos_in_net(n, -1);
  NetworkInstance<T> net;
  while (!ready.empty()) {
    const int i = *ready.begin();
    ready.erase(ready.begin());
    pos_in_net[i] = static_cast<int>(net.nodes.size());
    NetNode<T> node;
    node.label = dag.nodes[i].label;
    node.dag_index = i;
    const ConceptKey key = lex.key_for(node.label, static_cast<int>(children[i].size()));
    if (!lex.has_module(key)) net.uses_untrained = net.uses_untrained || at_eval;
    node.module = &lex.get_or_create(key, at_eval);
    node.head = node.module->dual ? lex.head_for(node.label) : 0;
    for (int c : children[i]) node.children.push_back(pos_in_net[c]);
    net.nodes.push_back(std::move(node));
    for (int p : parents[i])
      if (--unplaced[p] == 0) ready.insert(p);
  }
  if (static_cast<int>(net.nodes.size()) != n)
    throw UsageError("assemble_network: dag is cyclic");
  net.root = pos_in_net[dag.node_index(roots[0])];
  return net;
}

}  // namespace compnet
