#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "compnet/errors.hpp"
#include "compnet/grammar.hpp"
#include "compnet/gridworld.hpp"

namespace compnet {

// Filters objects by the command's noun and color; a size adjective then
// selects the unique extreme of the filtered set. Relative size is therefore
// judged within the color+shape class, never globally.
inline int resolve_target(const Command& c, const GridWorld& w) {
  std::vector<const Object*> cand;
  for (const auto& o : w.objects) {
    if (o.shape != c.noun) continue;
    if (c.color_adj && o.color != *c.color_adj) continue;
    cand.push_back(&o);
  }
  if (cand.empty()) throw ResolutionError("resolve_target: no object matches '" + c.text() + "'");
  if (!c.size_adj) {
    if (cand.size() > 1)
      throw ResolutionError("resolve_target: ambiguous reference '" + c.text() + "'");
    return cand[0]->id;
  }
  const bool want_small = *c.size_adj == SizeAdj::Small;
  const Object* best = cand[0];
  bool tie = false;
  for (std::size_t i = 1; i < cand.size(); ++i) {
    const bool better = want_small ? cand[i]->size < best->size : cand[i]->size > best->size;
    if (better) {
      best = cand[i];
      tie = false;
    } else if (cand[i]->size == best->size) {
      tie = true;
    }
  }
  if (tie)
    throw ResolutionError("resolve_target: size tie, ambiguous reference '" + c.text() + "'");
  return best->id;
}

struct NavPlan {
  std::vector<Action> actions;
  AgentPose end;
};

// Shortest action sequence (turns included) over the pose graph, by BFS with
// a fixed Walk/TurnLeft/TurnRight expansion order so ties break canonically.
inline NavPlan plan_navigation(AgentPose start, Position goal) {
  auto idx = [](const AgentPose& p) {
    return (p.pos.row * kGridSize + p.pos.col) * 4 + static_cast<int>(p.dir);
  };
  constexpr int kPoses = kCells * 4;
  std::array<int, kPoses> prev_state;
  std::array<Action, kPoses> prev_action;
  prev_state.fill(-2);  // unvisited
  std::deque<AgentPose> queue{start};
  prev_state[idx(start)] = -1;
  while (!queue.empty()) {
    const AgentPose cur = queue.front();
    queue.pop_front();
    if (cur.pos == goal) {
      std::vector<Action> actions;
      int at = idx(cur);
      while (prev_state[at] != -1) {
        actions.push_back(prev_action[at]);
        at = prev_state[at];
      }
      std::reverse(actions.begin(), actions.end());
      return {std::move(actions), cur};
    }
    const AgentPose moves[3] = {{step_toward(cur.pos, cur.dir), cur.dir},
                                {cur.pos, left_of(cur.dir)},
                                {cur.pos, right_of(cur.dir)}};
    const Action acts[3] = {Action::Walk, Action::TurnLeft, Action::TurnRight};
    for (int k = 0; k < 3; ++k) {
      if (!in_bounds(moves[k].pos)) continue;
      if (prev_state[idx(moves[k])] != -2) continue;
      prev_state[idx(moves[k])] = idx(cur);
      prev_action[idx(moves[k])] = acts[k];
      queue.push_back(moves[k]);
    }
  }
  throw GenerationError("plan_navigation: goal unreachable");
}

inline std::vector<Action> turns_toward(Heading from, Heading to) {
  if (from == to) return {};
  if (left_of(from) == to) return {Action::TurnLeft};
  if (right_of(from) == to) return {Action::TurnRight};
  return {Action::TurnRight, Action::TurnRight};
}

// Zigzag route: horizontal and vertical unit moves alternate (horizontal
// first) while both displacements are nonzero, then straight.
inline NavPlan plan_navigation_zigzag(AgentPose start, Position goal) {
  NavPlan plan;
  AgentPose cur = start;
  bool horizontal = true;
  while (cur.pos != goal) {
    const int dr = goal.row - cur.pos.row, dc = goal.col - cur.pos.col;
    bool go_horizontal;
    if (dr != 0 && dc != 0) {
      go_horizontal = horizontal;
      horizontal = !horizontal;
    } else {
      go_horizontal = dc != 0;
    }
    const Heading want = go_horizontal ? (dc > 0 ? Heading::East : Heading::West)
                                       : (dr > 0 ? Heading::South : Heading::North);
    for (Action t : turns_toward(cur.dir, want)) plan.actions.push_back(t);
    plan.actions.push_back(Action::Walk);
    cur.dir = want;
    cur.pos = step_toward(cur.pos, want);
  }
  plan.end = cur;
  return plan;
}

// Named, config-overridable manner rewrites.
enum class RewriteRule {
  SpinBeforeWalkSegments,   // four TurnLeft before every maximal Walk run
  StayAfterMoves,           // Stay after every Walk/Push/Pull
  LookBothWaysBeforeWalk,   // TurnLeft,TurnRight,TurnRight,TurnLeft before every Walk
  ZigzagNavigation,         // applied at navigation-planning time
};

inline RewriteRule rewrite_rule_from_name(const std::string& name) {
  if (name == "spin-before-walk-segments") return RewriteRule::SpinBeforeWalkSegments;
  if (name == "stay-after-moves") return RewriteRule::StayAfterMoves;
  if (name == "look-both-ways") return RewriteRule::LookBothWaysBeforeWalk;
  if (name == "zigzag-navigation") return RewriteRule::ZigzagNavigation;
  throw ConfigError("unknown rewrite rule: " + name);
}

struct AdverbRules {
  std::map<Adverb, RewriteRule> rules{
      {Adverb::WhileSpinning, RewriteRule::SpinBeforeWalkSegments},
      {Adverb::Hesitantly, RewriteRule::StayAfterMoves},
      {Adverb::Cautiously, RewriteRule::LookBothWaysBeforeWalk},
      {Adverb::WhileZigzagging, RewriteRule::ZigzagNavigation},
  };

  RewriteRule rule_for(Adverb a) const {
    auto it = rules.find(a);
    if (it == rules.end())
      throw ConfigError(std::string("no rewrite rule configured for adverb: ") + to_string(a));
    return it->second;
  }
};

// Deterministic manner rewrite of a plan. Zigzag routing changes the arrival
// pose and with it any interaction suffix, so it is handled when navigation
// is planned; here it leaves the (already zigzag) plan unchanged. Guarantees
// a terminal Stay even on an empty movement plan.
inline std::vector<Action> apply_adverb_rewrite(const std::vector<Action>& plan,
                                                std::optional<Adverb> adverb,
                                                const AdverbRules& rules = {}) {
  std::vector<Action> out;
  if (!adverb) {
    out = plan;
  } else {
    switch (rules.rule_for(*adverb)) {
      case RewriteRule::SpinBeforeWalkSegments: {
        bool in_walk_run = false;
        for (Action a : plan) {
          if (a == Action::Walk && !in_walk_run)
            out.insert(out.end(), 4, Action::TurnLeft);
          in_walk_run = a == Action::Walk;
          out.push_back(a);
        }
        break;
      }
      case RewriteRule::StayAfterMoves: {
        for (Action a : plan) {
          out.push_back(a);
          if (a == Action::Walk || a == Action::Push || a == Action::Pull)
            out.push_back(Action::Stay);
        }
        break;
      }
      case RewriteRule::LookBothWaysBeforeWalk: {
        for (Action a : plan) {
          if (a == Action::Walk)
            out.insert(out.end(), {Action::TurnLeft, Action::TurnRight, Action::TurnRight,
                                   Action::TurnLeft});
          out.push_back(a);
        }
        break;
      }
      case RewriteRule::ZigzagNavigation:
        out = plan;
        break;
    }
  }
  if (out.empty() || out.back() != Action::Stay) out.push_back(Action::Stay);
  return out;
}

// Demonstration trajectory: navigate to the target (zigzag-aware), interact
// until blocked for push/pull (heavy objects take action pairs), apply the
// manner rewrite, terminate with Stay.
inline std::vector<Action> oracle_plan(const Command& c, const GridWorld& w,
                                       const AdverbRules& rules = {}) {
  const int target_id = resolve_target(c, w);
  const Object& target = *w.object_by_id(target_id);
  const bool zigzag =
      c.adverb && rules.rule_for(*c.adverb) == RewriteRule::ZigzagNavigation;
  NavPlan nav = zigzag ? plan_navigation_zigzag(w.agent, target.pos)
                       : plan_navigation(w.agent, target.pos);
  std::vector<Action> plan = nav.actions;
  if (c.verb != Verb::WalkTo) {
    const Heading move_dir = c.verb == Verb::Push ? nav.end.dir : opposite(nav.end.dir);
    int free_cells = 0;
    for (Position p = step_toward(target.pos, move_dir);
         in_bounds(p) && w.object_at(p) == nullptr; p = step_toward(p, move_dir))
      ++free_cells;
    const int per_cell = is_heavy(target) ? 2 : 1;
    const Action act = c.verb == Verb::Push ? Action::Push : Action::Pull;
    plan.insert(plan.end(), static_cast<std::size_t>(free_cells) * per_cell, act);
  }
  plan.push_back(Action::Stay);
  return apply_adverb_rewrite(plan, c.adverb, rules);
}

struct Validation {
  bool ok = true;
  std::string diagnosis;
};

namespace detail {

inline Validation fail(std::string why) { return {false, std::move(why)}; }

inline Validation check_manner(const std::vector<Action>& acts, const Command& c,
                               const AdverbRules& rules, const GridWorld& world,
                               Position goal) {
  if (!c.adverb) {
    for (std::size_t i = 0; i + 1 < acts.size(); ++i)
      if (acts[i] == Action::Stay) return fail("unexpected mid-sequence stay");
    return {};
  }
  switch (rules.rule_for(*c.adverb)) {
    case RewriteRule::StayAfterMoves:
      for (std::size_t i = 0; i < acts.size(); ++i)
        if (acts[i] == Action::Walk || acts[i] == Action::Push || acts[i] == Action::Pull)
          if (i + 1 >= acts.size() || acts[i + 1] != Action::Stay)
            return fail("hesitant manner violated at step " + std::to_string(i));
      return {};
    case RewriteRule::SpinBeforeWalkSegments:
      for (std::size_t i = 0; i < acts.size(); ++i) {
        if (acts[i] != Action::Walk || (i > 0 && acts[i - 1] == Action::Walk)) continue;
        if (i < 4) return fail("walk segment without spin prefix");
        for (std::size_t k = i - 4; k < i; ++k)
          if (acts[k] != Action::TurnLeft) return fail("walk segment without spin prefix");
      }
      return {};
    case RewriteRule::LookBothWaysBeforeWalk: {
      const Action look[4] = {Action::TurnLeft, Action::TurnRight, Action::TurnRight,
                              Action::TurnLeft};
      for (std::size_t i = 0; i < acts.size(); ++i) {
        if (acts[i] != Action::Walk) continue;
        if (i < 4) return fail("walk without look-both-ways prefix");
        for (int k = 0; k < 4; ++k)
          if (acts[i - 4 + k] != look[k]) return fail("walk without look-both-ways prefix");
      }
      return {};
    }
    case RewriteRule::ZigzagNavigation: {
      // Walk axes must alternate while both displacement components remain.
      GridWorld w = world;
      int prev_axis = -1;
      bool prev_both = false;
      for (Action a : acts) {
        if (a == Action::Walk) {
          const int dr = goal.row - w.agent.pos.row, dc = goal.col - w.agent.pos.col;
          const bool both = dr != 0 && dc != 0;
          const int axis =
              (w.agent.dir == Heading::East || w.agent.dir == Heading::West) ? 0 : 1;
          if (both && prev_both && axis == prev_axis) return fail("zigzag axis repeated");
          prev_axis = axis;
          prev_both = both;
        }
        w = step(w, a);
      }
      return {};
    }
  }
  return {};
}

}  // namespace detail

// Replays the episode and checks that every action was effective, that the
// terminal state satisfies the command, and that the adverb manner holds.
inline Validation validate_episode(const GridWorld& world, const Command& c, int target_id,
                                   const std::vector<Action>& acts,
                                   const AdverbRules& rules = {}) {
  using detail::fail;
  if (acts.empty()) return fail("empty action sequence");
  if (acts.back() != Action::Stay) return fail("sequence does not end with stay");

  int resolved;
  try {
    resolved = resolve_target(c, world);
  } catch (const ResolutionError& e) {
    return fail(e.what());
  }
  if (resolved != target_id) return fail("recorded target does not match resolution");
  const Position goal = world.object_by_id(target_id)->pos;

  GridWorld w = world;
  int interactions = 0;
  std::optional<Heading> first_move_dir;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const Action a = acts[i];
    const GridWorld before = w;
    w = step(w, a);
    switch (a) {
      case Action::Walk:
        if (w.agent.pos == before.agent.pos)
          return fail("walk blocked at step " + std::to_string(i));
        break;
      case Action::Push:
      case Action::Pull: {
        if (c.verb == Verb::WalkTo) return fail("interaction in a walk command");
        if ((c.verb == Verb::Push) != (a == Action::Push))
          return fail("wrong interaction kind at step " + std::to_string(i));
        const Object* obj = before.object_at(before.agent.pos);
        if (obj == nullptr || obj->id != target_id)
          return fail("interaction without target at step " + std::to_string(i));
        const Heading dir =
            a == Action::Push ? before.agent.dir : opposite(before.agent.dir);
        if (!first_move_dir) first_move_dir = dir;
        const bool moved = w.object_by_id(target_id)->pos != obj->pos;
        const ArmState kind = a == Action::Push ? ArmState::Push : ArmState::Pull;
        const bool armed = !moved && is_heavy(*obj) && w.arm == kind && before.arm != kind;
        if (!moved && !armed)
          return fail("ineffective interaction at step " + std::to_string(i));
        ++interactions;
        break;
      }
      default:
        break;
    }
  }

  const Object& target_end = *w.object_by_id(target_id);
  if (w.agent.pos != target_end.pos) return fail("agent did not end at target");
  if (c.verb == Verb::WalkTo) {
    if (target_end.pos != goal) return fail("target moved in a walk command");
  } else {
    const Heading dir = first_move_dir.value_or(
        c.verb == Verb::Push ? w.agent.dir : opposite(w.agent.dir));
    const Position next = step_toward(target_end.pos, dir);
    if (in_bounds(next) && w.object_at(next) == nullptr)
      return fail("object not moved until blocked");
    const int moved = std::abs(target_end.pos.row - goal.row) +
                      std::abs(target_end.pos.col - goal.col);
    const int per_cell = is_heavy(target_end) ? 2 : 1;
    if (interactions != moved * per_cell)
      return fail("interaction count " + std::to_string(interactions) + " inconsistent with " +
                  std::to_string(moved) + " moved cells");
  }

  return detail::check_manner(acts, c, rules, world, goal);
}

}  // namespace compnet
