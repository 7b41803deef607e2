#pragma once

#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "compnet/dataset.hpp"
#include "compnet/errors.hpp"
#include "compnet/planner.hpp"

namespace compnet {

enum class Condition { A, B, C, D, E, F, G, H, I };

inline const char* to_string(Condition c) {
  static const char* names[] = {"A", "B", "C", "D", "E", "F", "G", "H", "I"};
  return names[static_cast<int>(c)];
}

inline Condition condition_from_string(const std::string& s) {
  for (int i = 0; i < 9; ++i)
    if (s == to_string(static_cast<Condition>(i))) return static_cast<Condition>(i);
  throw ConfigError("unknown condition: " + s);
}

// Parameters for the systematic hold-outs. Defaults follow the gSCAN
// condition descriptions; each is configurable.
struct SplitSpec {
  Condition condition = Condition::A;
  ObjColor b_color = ObjColor::Yellow;  // B: reference pair never co-mentioned
  ObjShape b_noun = ObjShape::Square;
  ObjColor c_color = ObjColor::Red;  // C: class never referenced as a target
  ObjShape c_noun = ObjShape::Square;
  ObjShape e_noun = ObjShape::Circle;  // E: 'small <e_noun>' never resolves to this size
  int e_size = 2;
  Verb f_verb = Verb::Push;  // F: held-out verb+noun+size triple
  ObjShape f_noun = ObjShape::Square;
  int f_size = 3;
  Adverb g_adverb = Adverb::Cautiously;  // G: few-shot adverb
  int g_k = 5;
  Verb h_verb = Verb::Pull;  // H: held-out verb+adverb pair
  Adverb h_adverb = Adverb::WhileSpinning;
  int i_train_max_len = 15;  // I: action-length threshold (terminal stay included)
  int i_test_min_len = 16;
  int i_test_max_len = std::numeric_limits<int>::max();

  std::string describe() const {
    std::ostringstream os;
    os << "condition " << to_string(condition);
    switch (condition) {
      case Condition::B: os << " held-out reference " << to_string(b_color) << " " << to_string(b_noun); break;
      case Condition::C: os << " held-out target " << to_string(c_color) << " " << to_string(c_noun); break;
      case Condition::D: os << " held-out direction south-west"; break;
      case Condition::E: os << " held-out small " << to_string(e_noun) << " = size " << e_size; break;
      case Condition::F: os << " held-out " << to_string(f_verb) << " " << to_string(f_noun) << " size " << f_size; break;
      case Condition::G: os << " few-shot " << to_string(g_adverb) << " k=" << g_k; break;
      case Condition::H: os << " held-out " << to_string(h_verb) << " + " << to_string(h_adverb); break;
      case Condition::I: os << " train length <= " << i_train_max_len; break;
      default: break;
    }
    return os.str();
  }
};

// The held-out predicate: false on train episodes, true on test episodes.
// Condition A has no predicate (sample-level disjointness only); condition
// G's k injected train episodes are the deliberate exception.
inline bool held_out(const SplitSpec& s, const Episode& e) {
  const Object* target = e.world.object_by_id(e.target_id);
  switch (s.condition) {
    case Condition::A:
      return false;
    case Condition::B:
      return e.command.color_adj == s.b_color && e.command.noun == s.b_noun;
    case Condition::C:
      return target->color == s.c_color && target->shape == s.c_noun;
    case Condition::D:
      return target->pos.row > e.world.agent.pos.row && target->pos.col < e.world.agent.pos.col;
    case Condition::E:
      return e.command.size_adj == SizeAdj::Small && e.command.noun == s.e_noun &&
             target->size == s.e_size;
    case Condition::F:
      return e.command.verb == s.f_verb && e.command.noun == s.f_noun && target->size == s.f_size;
    case Condition::G:
      return e.command.adverb == s.g_adverb;
    case Condition::H:
      return e.command.verb == s.h_verb && e.command.adverb == s.h_adverb;
    case Condition::I:
      return static_cast<int>(e.actions.size()) > s.i_train_max_len;
  }
  return false;
}

// Content key for sample-level disjointness between train and test.
inline std::string episode_key(const Episode& e) {
  std::ostringstream os;
  os << e.command.text() << '|' << e.world.agent.pos.row << ',' << e.world.agent.pos.col << ','
     << static_cast<int>(e.world.agent.dir);
  for (const auto& o : e.world.objects)
    os << '|' << o.id << ',' << static_cast<int>(o.shape) << ',' << static_cast<int>(o.color)
       << ',' << o.size << ',' << o.pos.row << ',' << o.pos.col;
  return os.str();
}

// Draws one episode from the per-episode seed stream: command and world are
// resampled jointly until the reference is informative and unique and the
// caller's filter accepts the episode.
inline Episode generate_episode(std::uint64_t seed, const GrammarConfig& grammar,
                                const AdverbRules& rules,
                                const std::function<bool(const Episode&)>& accept,
                                const std::string& constraint_name, int max_tries = 10000) {
  Rng rng(seed);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Episode e;
    e.seed = seed;
    e.command = generate_command(rng, grammar);
    e.world = sample_world(rng);
    // A size adjective must discriminate between at least two candidates; a
    // bare reference must be unique.
    int candidates = 0;
    for (const auto& o : e.world.objects)
      if (o.shape == e.command.noun &&
          (!e.command.color_adj || o.color == *e.command.color_adj))
        ++candidates;
    if (e.command.size_adj ? candidates < 2 : candidates != 1) continue;
    try {
      e.target_id = resolve_target(e.command, e.world);
    } catch (const ResolutionError&) {
      continue;  // tie at the size extreme
    }
    e.actions = oracle_plan(e.command, e.world, rules);
    if (!accept(e)) continue;
    return e;
  }
  throw GenerationError("generate_episode: constraint unsatisfiable after " +
                        std::to_string(max_tries) + " tries: " + constraint_name);
}

struct SplitDataset {
  std::vector<Episode> train;
  std::vector<Episode> test;
  std::vector<int> injected_train_ids;  // condition G
};

namespace detail {

// Narrows generator slots toward the test predicate so rare hold-outs do not
// rely on blind rejection.
inline GrammarConfig narrowed_for_test(const SplitSpec& s, GrammarConfig g) {
  switch (s.condition) {
    case Condition::B:
      g.color_options = {s.b_color};
      g.nouns = {s.b_noun};
      break;
    case Condition::C:
      g.nouns = {s.c_noun};
      break;
    case Condition::E:
      g.size_options = {SizeAdj::Small};
      g.nouns = {s.e_noun};
      break;
    case Condition::F:
      g.verbs = {s.f_verb};
      g.nouns = {s.f_noun};
      break;
    case Condition::G:
      g.adverb_options = {s.g_adverb};
      break;
    case Condition::H:
      g.verbs = {s.h_verb};
      g.adverb_options = {s.h_adverb};
      break;
    default:
      break;
  }
  return g;
}

inline GrammarConfig narrowed_for_train(const SplitSpec& s, GrammarConfig g) {
  if (s.condition == Condition::G) {
    std::erase_if(g.adverb_options,
                  [&](const std::optional<Adverb>& a) { return a == s.g_adverb; });
  }
  return g;
}

}  // namespace detail

// Carves disjoint train/test sets for one condition. Deterministic in
// (spec, grammar, n_train, n_test, seed); per-episode seeds are derived
// streams so regeneration of any single episode is independent.
inline SplitDataset carve_splits(const SplitSpec& spec, const GrammarConfig& grammar,
                                 const AdverbRules& rules, int n_train, int n_test,
                                 std::uint64_t seed) {
  SplitDataset out;
  std::set<std::string> seen;
  const std::string tag = to_string(spec.condition);

  const GrammarConfig train_grammar = detail::narrowed_for_train(spec, grammar);
  const GrammarConfig test_grammar = detail::narrowed_for_test(spec, grammar);

  const int n_injected = spec.condition == Condition::G ? std::min(spec.g_k, n_train) : 0;
  const int n_base = n_train - n_injected;
  for (int i = 0; i < n_train; ++i) {
    const bool injected = i >= n_base;
    auto accept = [&](const Episode& e) {
      if (injected ? !held_out(spec, e) : held_out(spec, e)) return false;
      return seen.insert(episode_key(e)).second;
    };
    Episode e = generate_episode(Rng::derive(seed, 0x1000000ULL + i),
                                 injected ? test_grammar : train_grammar, rules, accept,
                                 spec.describe() + (injected ? " (injected)" : " (train)"));
    e.split_tag = tag + ":train";
    if (injected) out.injected_train_ids.push_back(i);
    out.train.push_back(std::move(e));
  }

  for (int i = 0; i < n_test; ++i) {
    auto accept = [&](const Episode& e) {
      const int len = static_cast<int>(e.actions.size());
      if (spec.condition == Condition::I) {
        if (len < spec.i_test_min_len || len > spec.i_test_max_len) return false;
      } else if (spec.condition != Condition::A && !held_out(spec, e)) {
        return false;
      }
      return seen.insert(episode_key(e)).second;
    };
    Episode e = generate_episode(Rng::derive(seed, 0x2000000ULL + i), test_grammar, rules,
                                 accept, spec.describe() + " (test)");
    e.split_tag = tag + ":test";
    out.test.push_back(std::move(e));
  }
  return out;
}

}  // namespace compnet
