#include "compnet/gridworld.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <tuple>

#include "compnet/dataset.hpp"
#include "compnet/planner.hpp"
#include "compnet/splits.hpp"

using namespace compnet;

namespace {

GridWorld simple_world() {
  GridWorld w;
  w.agent = {{2, 2}, Heading::East};
  return w;
}

Object make_obj(int id, ObjShape s, ObjColor c, int size, int row, int col) {
  return Object{id, s, c, size, {row, col}};
}

// Decoder oracle: reconstructs the observable world from the feature tensor.
// Object ids are not encoded, so worlds compare as attribute sets plus agent.
struct DecodedWorld {
  std::set<std::tuple<int, int, int, int, int>> objects;  // shape,color,size,row,col
  AgentPose agent;
};

DecodedWorld decode_observation(const std::vector<double>& obs) {
  DecodedWorld d;
  auto at = [&obs](int ch, int row, int col) {
    return obs[static_cast<std::size_t>(ch) * kCells + row * kGridSize + col];
  };
  for (int row = 0; row < kGridSize; ++row)
    for (int col = 0; col < kGridSize; ++col) {
      int shape = -1, color = -1, size = -1;
      for (int s = 0; s < kNumShapes; ++s)
        if (at(s, row, col) == 1.0) shape = s;
      for (int c = 0; c < kNumColors; ++c)
        if (at(kNumShapes + c, row, col) == 1.0) color = c;
      for (int s = 0; s < kNumSizes; ++s)
        if (at(kNumShapes + kNumColors + s, row, col) == 1.0) size = s + 1;
      if (shape >= 0) d.objects.insert({shape, color, size, row, col});
      if (at(kNumShapes + kNumColors + kNumSizes, row, col) == 1.0) {
        d.agent.pos = {row, col};
        for (int h = 0; h < 4; ++h)
          if (at(kNumShapes + kNumColors + kNumSizes + 1 + h, row, col) == 1.0)
            d.agent.dir = static_cast<Heading>(h);
      }
    }
  return d;
}

DecodedWorld observable(const GridWorld& w) {
  DecodedWorld d;
  d.agent = w.agent;
  for (const auto& o : w.objects)
    d.objects.insert({static_cast<int>(o.shape), static_cast<int>(o.color), o.size, o.pos.row,
                      o.pos.col});
  return d;
}

// Independent distance oracle over the pose graph (plain frontier BFS, no
// path reconstruction; shares nothing with plan_navigation).
int bfs_pose_distance(AgentPose start, Position goal) {
  std::set<std::tuple<int, int, int>> visited;
  std::vector<AgentPose> frontier{start};
  visited.insert({start.pos.row, start.pos.col, static_cast<int>(start.dir)});
  for (int depth = 0; depth < 200; ++depth) {
    std::vector<AgentPose> next;
    for (const auto& p : frontier) {
      if (p.pos == goal) return depth;
      AgentPose cands[3] = {{step_toward(p.pos, p.dir), p.dir},
                            {p.pos, left_of(p.dir)},
                            {p.pos, right_of(p.dir)}};
      for (const auto& c : cands) {
        if (!in_bounds(c.pos)) continue;
        if (visited.insert({c.pos.row, c.pos.col, static_cast<int>(c.dir)}).second)
          next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  return -1;
}

TEST(World, SampleIsDeterministicPerSeed) {
  Rng a(7), b(7);
  EXPECT_TRUE(sample_world(a) == sample_world(b));
  Rng c(8);
  Rng d(7);
  sample_world(d);  // advance
  EXPECT_FALSE(sample_world(c) == sample_world(d));
}

TEST(World, ConstrainedSamplingExcludesRedSquares) {
  Rng rng(21);
  auto no_red_squares = [](const GridWorld& w) {
    for (const auto& o : w.objects)
      if (o.color == ObjColor::Red && o.shape == ObjShape::Square) return false;
    return true;
  };
  for (int i = 0; i < 1000; ++i) {
    GridWorld w = sample_world(rng, no_red_squares, "no red squares");
    EXPECT_TRUE(no_red_squares(w));
  }
}

TEST(World, UnsatisfiableConstraintNamesItself) {
  Rng rng(22);
  try {
    sample_world(rng, [](const GridWorld&) { return false; }, "always-false", 50);
    FAIL() << "expected GenerationError";
  } catch (const GenerationError& e) {
    EXPECT_NE(std::string(e.what()).find("always-false"), std::string::npos);
  }
}

TEST(Observation, EmptyWorldHasAgentChannelsOnly) {
  GridWorld w;
  w.agent = {{0, 0}, Heading::North};
  auto obs = encode_observation<double>(w);
  int nonzero = 0;
  for (double v : obs) nonzero += v != 0.0;
  EXPECT_EQ(nonzero, 2);
  EXPECT_EQ(obs[(kNumShapes + kNumColors + kNumSizes) * kCells], 1.0);      // agent-present
  EXPECT_EQ(obs[(kNumShapes + kNumColors + kNumSizes + 1) * kCells], 1.0);  // facing north
}

TEST(Observation, SingleObjectHasThreeChannels) {
  GridWorld w;
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Red, 2, 3, 3));
  w.agent = {{0, 0}, Heading::North};
  auto obs = encode_observation<double>(w);
  const int cell = 3 * kGridSize + 3;
  int nonzero_at_cell = 0;
  for (int ch = 0; ch < kObsChannels; ++ch) nonzero_at_cell += obs[ch * kCells + cell] != 0.0;
  EXPECT_EQ(nonzero_at_cell, 3);
  EXPECT_EQ(obs[0 * kCells + cell], 1.0);                        // circle
  EXPECT_EQ(obs[(kNumShapes + 0) * kCells + cell], 1.0);         // red
  EXPECT_EQ(obs[(kNumShapes + kNumColors + 1) * kCells + cell], 1.0);  // size 2
}

TEST(Observation, DecodeInvertsEncodeOnRandomWorlds) {
  Rng rng(33);
  for (int i = 0; i < 1000; ++i) {
    GridWorld w = sample_world(rng);
    DecodedWorld d = decode_observation(encode_observation<double>(w));
    DecodedWorld expect = observable(w);
    EXPECT_EQ(d.objects, expect.objects);
    EXPECT_TRUE(d.agent == expect.agent);
  }
}

TEST(Step, WalkMovesAlongHeading) {
  GridWorld w = simple_world();
  GridWorld after = step(w, Action::Walk);
  EXPECT_TRUE(after.agent.pos == (Position{2, 3}));
  EXPECT_EQ(after.agent.dir, Heading::East);
}

TEST(Step, WalkIntoBoundaryIsNoOp) {
  GridWorld w;
  w.agent = {{0, 3}, Heading::North};
  EXPECT_TRUE(step(w, Action::Walk) == w);
}

TEST(Step, TurnsRotateNinetyDegrees) {
  GridWorld w = simple_world();
  EXPECT_EQ(step(w, Action::TurnLeft).agent.dir, Heading::North);
  EXPECT_EQ(step(w, Action::TurnRight).agent.dir, Heading::South);
  EXPECT_TRUE(step(w, Action::TurnLeft).agent.pos == w.agent.pos);
}

TEST(Step, PushLightObjectMovesObjectAndAgent) {
  GridWorld w = simple_world();
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Blue, 2, 2, 2));
  GridWorld after = step(w, Action::Push);
  EXPECT_TRUE(after.objects[0].pos == (Position{2, 3}));
  EXPECT_TRUE(after.agent.pos == (Position{2, 3}));
}

TEST(Step, PullLightObjectMovesBackwardWithAgent) {
  GridWorld w = simple_world();  // facing east at (2,2)
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Blue, 1, 2, 2));
  GridWorld after = step(w, Action::Pull);
  EXPECT_TRUE(after.objects[0].pos == (Position{2, 1}));
  EXPECT_TRUE(after.agent.pos == (Position{2, 1}));
}

TEST(Step, HeavyObjectNeedsTwoPushes) {
  GridWorld w = simple_world();
  w.objects.push_back(make_obj(0, ObjShape::Square, ObjColor::Red, 3, 2, 2));
  GridWorld once = step(w, Action::Push);
  EXPECT_TRUE(once == w);  // observable state unchanged
  EXPECT_EQ(once.arm, ArmState::Push);
  GridWorld twice = step(once, Action::Push);
  EXPECT_TRUE(twice.objects[0].pos == (Position{2, 3}));
  EXPECT_TRUE(twice.agent.pos == (Position{2, 3}));
  EXPECT_EQ(twice.arm, ArmState::None);
}

TEST(Step, StayPreservesArmTurnCancelsIt) {
  GridWorld w = simple_world();
  w.objects.push_back(make_obj(0, ObjShape::Square, ObjColor::Red, 4, 2, 2));
  GridWorld armed = step(w, Action::Push);
  EXPECT_EQ(step(armed, Action::Stay).arm, ArmState::Push);
  EXPECT_EQ(step(armed, Action::TurnLeft).arm, ArmState::None);
  // armed + stay + push still completes the pair
  GridWorld done = step(step(armed, Action::Stay), Action::Push);
  EXPECT_TRUE(done.objects[0].pos == (Position{2, 3}));
}

TEST(Step, PushBlockedByObjectIsNoOp) {
  GridWorld w = simple_world();
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Blue, 1, 2, 2));
  w.objects.push_back(make_obj(1, ObjShape::Square, ObjColor::Red, 1, 2, 3));
  GridWorld after = step(w, Action::Push);
  EXPECT_TRUE(after == w);
}

TEST(Step, NeverProducesOverlapsOrOutOfBounds) {
  Rng rng(44);
  for (int trial = 0; trial < 300; ++trial) {
    GridWorld w = sample_world(rng);
    for (int t = 0; t < 40; ++t) {
      w = step(w, static_cast<Action>(rng.index(kNumActions)));
      EXPECT_TRUE(in_bounds(w.agent.pos));
      std::set<std::pair<int, int>> cells;
      for (const auto& o : w.objects) {
        EXPECT_TRUE(in_bounds(o.pos));
        EXPECT_TRUE(cells.insert({o.pos.row, o.pos.col}).second);
      }
    }
  }
}

TEST(Resolve, BareNounNeedsUniqueMatch) {
  GridWorld w = simple_world();
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Blue, 1, 0, 0));
  Command c = Command::from_text("walk to a circle");
  EXPECT_EQ(resolve_target(c, w), 0);
  w.objects.push_back(make_obj(1, ObjShape::Circle, ObjColor::Red, 2, 1, 1));
  EXPECT_THROW(resolve_target(c, w), ResolutionError);
}

TEST(Resolve, SmallSelectsMinimumWithinColorShapeClass) {
  GridWorld w = simple_world();
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Green, 3, 0, 0));
  w.objects.push_back(make_obj(1, ObjShape::Circle, ObjColor::Green, 1, 1, 1));
  w.objects.push_back(make_obj(2, ObjShape::Circle, ObjColor::Red, 1, 2, 3));  // other color
  EXPECT_EQ(resolve_target(Command::from_text("pull a small green circle"), w), 1);
}

TEST(Resolve, BigSelectsMaximumAcrossColors) {
  GridWorld w = simple_world();
  w.objects.push_back(make_obj(0, ObjShape::Square, ObjColor::Blue, 2, 0, 0));
  w.objects.push_back(make_obj(1, ObjShape::Square, ObjColor::Red, 4, 1, 1));
  EXPECT_EQ(resolve_target(Command::from_text("push a big square"), w), 1);
}

TEST(Resolve, SizeTieIsAmbiguous) {
  GridWorld w = simple_world();
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Green, 2, 0, 0));
  w.objects.push_back(make_obj(1, ObjShape::Circle, ObjColor::Green, 2, 1, 1));
  EXPECT_THROW(resolve_target(Command::from_text("walk to a small circle"), w),
               ResolutionError);
}

TEST(Oracle, StraightWalkEast) {
  GridWorld w;
  w.agent = {{0, 0}, Heading::East};
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Red, 1, 0, 3));
  auto plan = oracle_plan(Command::from_text("walk to a circle"), w);
  const std::vector<Action> expect{Action::Walk, Action::Walk, Action::Walk, Action::Stay};
  EXPECT_EQ(plan, expect);
}

TEST(Oracle, PullAdjacentLightTarget) {
  GridWorld w;
  w.agent = {{2, 2}, Heading::East};
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Green, 1, 2, 3));
  Command c = Command::from_text("pull a small green circle");
  w.objects.push_back(make_obj(1, ObjShape::Circle, ObjColor::Green, 3, 5, 5));
  auto plan = oracle_plan(c, w);
  // walk east onto the target, then pull west until the boundary blocks
  const std::vector<Action> expect{Action::Walk, Action::Pull, Action::Pull, Action::Pull,
                                   Action::Stay};
  EXPECT_EQ(plan, expect);
  auto v = validate_episode(w, c, 0, plan);
  EXPECT_TRUE(v.ok) << v.diagnosis;
}

TEST(Oracle, WalkOnlyPlanLengthIsPoseDistancePlusOne) {
  Rng rng(55);
  GrammarConfig g;
  g.verbs = {Verb::WalkTo};
  g.adverb_options = {std::nullopt};
  for (int i = 0; i < 500; ++i) {
    Episode e = generate_episode(Rng::derive(999, i), g, {}, [](const Episode&) { return true; },
                                 "walk-only");
    const Object* target = e.world.object_by_id(e.target_id);
    EXPECT_EQ(static_cast<int>(e.actions.size()),
              bfs_pose_distance(e.world.agent, target->pos) + 1);
  }
}

TEST(Rewrite, HesitantlyInsertsStayAfterMoves) {
  const std::vector<Action> in{Action::Walk, Action::Stay};
  const std::vector<Action> expect{Action::Walk, Action::Stay, Action::Stay};
  EXPECT_EQ(apply_adverb_rewrite(in, Adverb::Hesitantly), expect);
}

TEST(Rewrite, SpinningPrefixesWalkSegments) {
  const std::vector<Action> in{Action::Walk, Action::Stay};
  const std::vector<Action> expect{Action::TurnLeft, Action::TurnLeft, Action::TurnLeft,
                                   Action::TurnLeft, Action::Walk, Action::Stay};
  EXPECT_EQ(apply_adverb_rewrite(in, Adverb::WhileSpinning), expect);
  // one spin per maximal run of walks
  const std::vector<Action> run{Action::Walk, Action::Walk, Action::TurnRight, Action::Walk,
                                Action::Stay};
  auto out = apply_adverb_rewrite(run, Adverb::WhileSpinning);
  EXPECT_EQ(std::count(out.begin(), out.end(), Action::TurnLeft), 8);
}

TEST(Rewrite, CautiouslyLooksBothWaysBeforeEveryWalk) {
  const std::vector<Action> in{Action::Walk, Action::Walk, Action::Stay};
  auto out = apply_adverb_rewrite(in, Adverb::Cautiously);
  const std::vector<Action> expect{Action::TurnLeft, Action::TurnRight, Action::TurnRight,
                                   Action::TurnLeft, Action::Walk,      Action::TurnLeft,
                                   Action::TurnRight, Action::TurnRight, Action::TurnLeft,
                                   Action::Walk,      Action::Stay};
  EXPECT_EQ(out, expect);
}

TEST(Rewrite, EmptyPlanBecomesStay) {
  for (auto adv : {Adverb::Hesitantly, Adverb::WhileSpinning, Adverb::Cautiously,
                   Adverb::WhileZigzagging}) {
    const std::vector<Action> expect{Action::Stay};
    EXPECT_EQ(apply_adverb_rewrite({}, adv), expect);
  }
}

TEST(Rewrite, ZigzagAlternatesAxes) {
  GridWorld w;
  w.agent = {{0, 0}, Heading::East};
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Red, 1, 3, 3));
  Command c = Command::from_text("walk to a circle while zigzagging");
  auto plan = oracle_plan(c, w);
  auto v = validate_episode(w, c, 0, plan);
  EXPECT_TRUE(v.ok) << v.diagnosis;
  // horizontal first: walk east, then turn and walk south, alternating
  const std::vector<Action> expect{Action::Walk,     Action::TurnRight, Action::Walk,
                                   Action::TurnLeft, Action::Walk,      Action::TurnRight,
                                   Action::Walk,     Action::TurnLeft,  Action::Walk,
                                   Action::TurnRight, Action::Walk,     Action::Stay};
  EXPECT_EQ(plan, expect);
  // with one displacement component zero the route is the plain straight walk
  GridWorld straight = w;
  straight.objects[0].pos = {0, 3};
  EXPECT_EQ(oracle_plan(c, straight), oracle_plan(Command::from_text("walk to a circle"), straight));
}

TEST(Validate, OracleEpisodesAreValid) {
  GrammarConfig g;
  for (int i = 0; i < 2000; ++i) {
    Episode e = generate_episode(Rng::derive(77, i), g, {}, [](const Episode&) { return true; },
                                 "any");
    auto v = validate_episode(e.world, e.command, e.target_id, e.actions);
    ASSERT_TRUE(v.ok) << e.command.text() << ": " << v.diagnosis;
  }
}

TEST(Validate, DeletedActionIsDetected) {
  GrammarConfig g;
  int checked = 0;
  for (int i = 0; checked < 300; ++i) {
    Episode e = generate_episode(Rng::derive(88, i), g, {}, [](const Episode&) { return true; },
                                 "any");
    if (e.actions.size() < 2) continue;
    // Delete one movement/turn action at a deterministic position. Dropping
    // one of two adjacent trailing Stays would yield a semantically
    // equivalent sequence, which a replay validator cannot and should not
    // reject.
    std::vector<int> non_stay;
    for (std::size_t k = 0; k < e.actions.size(); ++k)
      if (e.actions[k] != Action::Stay) non_stay.push_back(static_cast<int>(k));
    if (non_stay.empty()) continue;
    Rng rng(Rng::derive(880, i));
    const int cut = non_stay[rng.index(static_cast<int>(non_stay.size()))];
    std::vector<Action> mutated = e.actions;
    mutated.erase(mutated.begin() + cut);
    auto v = validate_episode(e.world, e.command, e.target_id, mutated);
    EXPECT_FALSE(v.ok) << e.command.text() << " survived deleting index " << cut;
    ++checked;
  }
}

TEST(Validate, EmptyActionsOnNontrivialCommandFails) {
  GridWorld w;
  w.agent = {{0, 0}, Heading::East};
  w.objects.push_back(make_obj(0, ObjShape::Circle, ObjColor::Red, 1, 0, 3));
  EXPECT_FALSE(validate_episode(w, Command::from_text("walk to a circle"), 0, {}).ok);
}

TEST(Grammar, GenerateIsDeterministicAndCoversPairs) {
  GrammarConfig g;
  Rng a(5), b(5);
  for (int i = 0; i < 50; ++i) EXPECT_TRUE(generate_command(a, g) == generate_command(b, g));
  std::set<std::pair<int, int>> pairs;
  Rng rng(6);
  for (int i = 0; i < 10000; ++i) {
    Command c = generate_command(rng, g);
    pairs.insert({static_cast<int>(c.verb), static_cast<int>(c.noun)});
  }
  EXPECT_EQ(pairs.size(), 9u);  // every (verb, noun) pair
}

TEST(Grammar, SingleChoiceGrammarIsConstant) {
  GrammarConfig g;
  g.verbs = {Verb::WalkTo};
  g.nouns = {ObjShape::Circle};
  g.size_options = {std::nullopt};
  g.color_options = {std::nullopt};
  g.adverb_options = {std::nullopt};
  Rng rng(1);
  EXPECT_EQ(generate_command(rng, g).text(), "walk to a circle");
}

TEST(Grammar, TokensRoundTripThroughStructuredView) {
  GrammarConfig g;
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    Command c = generate_command(rng, g);
    EXPECT_TRUE(Command::from_tokens(c.tokens()) == c) << c.text();
  }
  EXPECT_THROW(Command::from_text("walk to a dragon"), ParseError);
  EXPECT_THROW(Command::from_text("walk to a circle quickly"), ParseError);
}

TEST(Splits, ConditionBExcludesReferencePairInTrain) {
  SplitSpec spec;
  spec.condition = Condition::B;
  auto ds = carve_splits(spec, {}, {}, 300, 60, 1234);
  for (const auto& e : ds.train)
    EXPECT_FALSE(e.command.color_adj == ObjColor::Yellow && e.command.noun == ObjShape::Square)
        << e.command.text();
  for (const auto& e : ds.test) {
    EXPECT_EQ(e.command.color_adj, ObjColor::Yellow);
    EXPECT_EQ(e.command.noun, ObjShape::Square);
  }
}

TEST(Splits, ConditionILengthThresholds) {
  SplitSpec spec;
  spec.condition = Condition::I;
  spec.i_train_max_len = 12;
  spec.i_test_min_len = 13;
  auto ds = carve_splits(spec, {}, {}, 200, 40, 99);
  int max_train = 0, min_test = 1 << 30;
  for (const auto& e : ds.train) max_train = std::max(max_train, static_cast<int>(e.actions.size()));
  for (const auto& e : ds.test) min_test = std::min(min_test, static_cast<int>(e.actions.size()));
  EXPECT_LE(max_train, 12);
  EXPECT_GE(min_test, 13);
}

TEST(Splits, ConditionGInjectsExactlyK) {
  SplitSpec spec;
  spec.condition = Condition::G;
  spec.g_k = 5;
  auto ds = carve_splits(spec, {}, {}, 200, 30, 7);
  int cautious = 0;
  for (const auto& e : ds.train) cautious += e.command.adverb == Adverb::Cautiously;
  EXPECT_EQ(cautious, 5);
  EXPECT_EQ(ds.injected_train_ids.size(), 5u);
  for (const auto& e : ds.test) EXPECT_EQ(e.command.adverb, Adverb::Cautiously);
}

TEST(Splits, HeldOutPredicateDisjointness) {
  for (Condition cond : {Condition::B, Condition::C, Condition::D, Condition::E, Condition::F,
                         Condition::H}) {
    SplitSpec spec;
    spec.condition = cond;
    auto ds = carve_splits(spec, {}, {}, 150, 30, 42 + static_cast<int>(cond));
    for (const auto& e : ds.train)
      EXPECT_FALSE(held_out(spec, e)) << to_string(cond) << " train: " << e.command.text();
    for (const auto& e : ds.test)
      EXPECT_TRUE(held_out(spec, e)) << to_string(cond) << " test: " << e.command.text();
  }
}

TEST(Splits, SamplesAreDisjointAndDeterministic) {
  SplitSpec spec;  // condition A
  auto a = carve_splits(spec, {}, {}, 120, 40, 2024);
  auto b = carve_splits(spec, {}, {}, 120, 40, 2024);
  ASSERT_EQ(a.train.size(), b.train.size());
  std::set<std::string> keys;
  for (const auto& e : a.train) EXPECT_TRUE(keys.insert(episode_key(e)).second);
  for (const auto& e : a.test) EXPECT_TRUE(keys.insert(episode_key(e)).second);
  for (std::size_t i = 0; i < a.train.size(); ++i)
    EXPECT_EQ(episode_to_json(a.train[i]).dump(), episode_to_json(b.train[i]).dump());
}

TEST(Dataset, JsonlRoundTripAndVersionCheck) {
  GrammarConfig g;
  std::vector<Episode> eps;
  for (int i = 0; i < 20; ++i) {
    Episode e = generate_episode(Rng::derive(4242, i), g, {}, [](const Episode&) { return true; },
                                 "any");
    e.split_tag = "A:train";
    eps.push_back(e);
  }
  const std::string path = ::testing::TempDir() + "/ds.jsonl";
  write_dataset(path, eps);
  auto back = read_dataset(path);
  ASSERT_EQ(back.size(), eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i)
    EXPECT_EQ(episode_to_json(back[i]).dump(), episode_to_json(eps[i]).dump());

  std::ofstream bad(path);
  bad << "{\"format\":\"compnet-dataset\",\"version\":99}\n";
  bad.close();
  EXPECT_THROW(read_dataset(path), FormatError);
}

}  // namespace
