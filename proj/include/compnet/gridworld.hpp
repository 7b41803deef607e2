#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "compnet/errors.hpp"
#include "compnet/rng.hpp"

namespace compnet {

constexpr int kGridSize = 6;
constexpr int kCells = kGridSize * kGridSize;

enum class ObjShape { Circle, Square, Cylinder };
enum class ObjColor { Red, Green, Blue, Yellow };
enum class Heading { North, East, South, West };
enum class Action { Walk, TurnLeft, TurnRight, Push, Pull, Stay };

constexpr int kNumShapes = 3;
constexpr int kNumColors = 4;
constexpr int kNumSizes = 4;  // sizes 1..4
constexpr int kNumActions = 6;

inline const char* to_string(ObjShape s) {
  switch (s) {
    case ObjShape::Circle: return "circle";
    case ObjShape::Square: return "square";
    default: return "cylinder";
  }
}
inline const char* to_string(ObjColor c) {
  switch (c) {
    case ObjColor::Red: return "red";
    case ObjColor::Green: return "green";
    case ObjColor::Blue: return "blue";
    default: return "yellow";
  }
}
inline const char* to_string(Heading h) {
  switch (h) {
    case Heading::North: return "north";
    case Heading::East: return "east";
    case Heading::South: return "south";
    default: return "west";
  }
}
inline const char* to_string(Action a) {
  switch (a) {
    case Action::Walk: return "walk";
    case Action::TurnLeft: return "turn-left";
    case Action::TurnRight: return "turn-right";
    case Action::Push: return "push";
    case Action::Pull: return "pull";
    default: return "stay";
  }
}

struct Position {
  int row = 0, col = 0;
  bool operator==(const Position&) const = default;
};

inline bool in_bounds(Position p) {
  return p.row >= 0 && p.row < kGridSize && p.col >= 0 && p.col < kGridSize;
}

// Row 0 is the north edge.
inline Position step_toward(Position p, Heading h) {
  switch (h) {
    case Heading::North: return {p.row - 1, p.col};
    case Heading::East: return {p.row, p.col + 1};
    case Heading::South: return {p.row + 1, p.col};
    default: return {p.row, p.col - 1};
  }
}

inline Heading left_of(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }
inline Heading right_of(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }
inline Heading opposite(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 2) % 4); }

struct Object {
  int id = 0;
  ObjShape shape = ObjShape::Circle;
  ObjColor color = ObjColor::Red;
  int size = 1;  // 1..4; sizes 3 and 4 are heavy
  Position pos;
  bool operator==(const Object&) const = default;
};

inline bool is_heavy(const Object& o) { return o.size >= 3; }

struct AgentPose {
  Position pos;
  Heading dir = Heading::North;
  bool operator==(const AgentPose&) const = default;
};

// Pending two-step interaction with a heavy object. Stay preserves it; any
// movement or turn cancels it. Not part of the observable world identity.
enum class ArmState { None, Push, Pull };

struct GridWorld {
  std::vector<Object> objects;
  AgentPose agent;
  ArmState arm = ArmState::None;

  // Observable identity: the arm flag is execution bookkeeping.
  bool operator==(const GridWorld& o) const {
    return objects == o.objects && agent == o.agent;
  }

  const Object* object_at(Position p) const {
    for (const auto& o : objects)
      if (o.pos == p) return &o;
    return nullptr;
  }
  Object* object_at(Position p) {
    for (auto& o : objects)
      if (o.pos == p) return &o;
    return nullptr;
  }
  const Object* object_by_id(int id) const {
    for (const auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }
};

// Environment transition. Illegal moves are no-ops so that rollouts of
// imperfect policies stay total.
inline GridWorld step(GridWorld w, Action a) {
  // Agent and object are co-located during an interaction and move together.
  auto try_move_object = [&w](Object& obj, Heading dir) {
    const Position dest = step_toward(obj.pos, dir);
    if (!in_bounds(dest) || w.object_at(dest) != nullptr) return false;
    obj.pos = dest;
    w.agent.pos = dest;
    return true;
  };
  switch (a) {
    case Action::Stay:
      return w;  // nothing changes, including a pending arm
    case Action::Walk: {
      const Position dest = step_toward(w.agent.pos, w.agent.dir);
      if (in_bounds(dest)) w.agent.pos = dest;
      w.arm = ArmState::None;
      return w;
    }
    case Action::TurnLeft:
      w.agent.dir = left_of(w.agent.dir);
      w.arm = ArmState::None;
      return w;
    case Action::TurnRight:
      w.agent.dir = right_of(w.agent.dir);
      w.arm = ArmState::None;
      return w;
    case Action::Push:
    case Action::Pull: {
      const ArmState kind = a == Action::Push ? ArmState::Push : ArmState::Pull;
      Object* obj = w.object_at(w.agent.pos);
      if (obj == nullptr) {
        w.arm = ArmState::None;
        return w;
      }
      const Heading move_dir = a == Action::Push ? w.agent.dir : opposite(w.agent.dir);
      if (!is_heavy(*obj)) {
        try_move_object(*obj, move_dir);
        w.arm = ArmState::None;
      } else if (w.arm == kind) {
        try_move_object(*obj, move_dir);  // second of the pair moves (or fails)
        w.arm = ArmState::None;
      } else {
        w.arm = kind;  // first of the pair arms
      }
      return w;
    }
  }
  return w;
}

// One-hot channel groups: shape(3), color(4), size(4), agent(1), heading(4).
constexpr int kObsChannels = kNumShapes + kNumColors + kNumSizes + 1 + 4;  // 16

template <typename T>
std::vector<T> encode_observation(const GridWorld& w) {
  std::vector<T> obs(static_cast<std::size_t>(kObsChannels) * kCells, T(0));
  auto at = [&obs](int ch, Position p) -> T& {
    return obs[static_cast<std::size_t>(ch) * kCells + p.row * kGridSize + p.col];
  };
  for (const auto& o : w.objects) {
    at(static_cast<int>(o.shape), o.pos) = T(1);
    at(kNumShapes + static_cast<int>(o.color), o.pos) = T(1);
    at(kNumShapes + kNumColors + (o.size - 1), o.pos) = T(1);
  }
  at(kNumShapes + kNumColors + kNumSizes, w.agent.pos) = T(1);
  at(kNumShapes + kNumColors + kNumSizes + 1 + static_cast<int>(w.agent.dir), w.agent.pos) = T(1);
  return obs;
}

// Uniformly sampled world: 2..8 objects on distinct cells, agent anywhere.
inline GridWorld sample_world(Rng& rng) {
  GridWorld w;
  const int n = 2 + rng.index(7);
  std::vector<int> cells(kCells);
  for (int i = 0; i < kCells; ++i) cells[i] = i;
  for (int i = 0; i < n; ++i) {  // partial Fisher-Yates over free cells
    const int j = i + rng.index(kCells - i);
    std::swap(cells[i], cells[j]);
    Object o;
    o.id = i;
    o.shape = static_cast<ObjShape>(rng.index(kNumShapes));
    o.color = static_cast<ObjColor>(rng.index(kNumColors));
    o.size = 1 + rng.index(kNumSizes);
    o.pos = {cells[i] / kGridSize, cells[i] % kGridSize};
    w.objects.push_back(o);
  }
  w.agent.pos = {rng.index(kGridSize), rng.index(kGridSize)};
  w.agent.dir = static_cast<Heading>(rng.index(4));
  return w;
}

// Rejection-samples a world satisfying `accept`; the constraint name makes
// unsatisfiable configurations diagnosable.
inline GridWorld sample_world(Rng& rng, const std::function<bool(const GridWorld&)>& accept,
                              const std::string& constraint_name,
                              int max_tries = 10000) {
  for (int tries = 0; tries < max_tries; ++tries) {
    GridWorld w = sample_world(rng);
    if (accept(w)) return w;
  }
  throw GenerationError("sample_world: constraint unsatisfiable after " +
                        std::to_string(max_tries) + " tries: " + constraint_name);
}

}  // namespace compnet
