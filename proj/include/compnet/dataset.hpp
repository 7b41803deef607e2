#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "compnet/errors.hpp"
#include "compnet/grammar.hpp"
#include "compnet/gridworld.hpp"

namespace compnet {

// One supervised training unit. `seed` is the per-episode generator stream,
// recorded so any single episode can be regenerated in isolation.
struct Episode {
  GridWorld world;
  Command command;
  int target_id = 0;
  std::vector<Action> actions;
  std::string split_tag;
  std::uint64_t seed = 0;
};

inline Action action_from_string(const std::string& s) {
  for (int i = 0; i < kNumActions; ++i)
    if (s == to_string(static_cast<Action>(i))) return static_cast<Action>(i);
  throw FormatError("unknown action name: " + s);
}

inline Heading heading_from_string(const std::string& s) {
  for (int i = 0; i < 4; ++i)
    if (s == to_string(static_cast<Heading>(i))) return static_cast<Heading>(i);
  throw FormatError("unknown heading name: " + s);
}

inline ObjShape shape_from_string(const std::string& s) {
  for (int i = 0; i < kNumShapes; ++i)
    if (s == to_string(static_cast<ObjShape>(i))) return static_cast<ObjShape>(i);
  throw FormatError("unknown shape name: " + s);
}

inline ObjColor color_from_string(const std::string& s) {
  for (int i = 0; i < kNumColors; ++i)
    if (s == to_string(static_cast<ObjColor>(i))) return static_cast<ObjColor>(i);
  throw FormatError("unknown color name: " + s);
}

inline nlohmann::json world_to_json(const GridWorld& w) {
  nlohmann::json objs = nlohmann::json::array();
  for (const auto& o : w.objects)
    objs.push_back({{"id", o.id},
                    {"shape", to_string(o.shape)},
                    {"color", to_string(o.color)},
                    {"size", o.size},
                    {"row", o.pos.row},
                    {"col", o.pos.col}});
  return {{"agent",
           {{"row", w.agent.pos.row}, {"col", w.agent.pos.col}, {"dir", to_string(w.agent.dir)}}},
          {"objects", objs}};
}

inline GridWorld world_from_json(const nlohmann::json& j) {
  GridWorld w;
  w.agent.pos = {j.at("agent").at("row").get<int>(), j.at("agent").at("col").get<int>()};
  w.agent.dir = heading_from_string(j.at("agent").at("dir").get<std::string>());
  for (const auto& jo : j.at("objects")) {
    Object o;
    o.id = jo.at("id").get<int>();
    o.shape = shape_from_string(jo.at("shape").get<std::string>());
    o.color = color_from_string(jo.at("color").get<std::string>());
    o.size = jo.at("size").get<int>();
    o.pos = {jo.at("row").get<int>(), jo.at("col").get<int>()};
    w.objects.push_back(o);
  }
  return w;
}

inline nlohmann::json episode_to_json(const Episode& e) {
  nlohmann::json acts = nlohmann::json::array();
  for (Action a : e.actions) acts.push_back(to_string(a));
  return {{"world", world_to_json(e.world)},
          {"command", e.command.text()},
          {"target_id", e.target_id},
          {"actions", acts},
          {"split_tag", e.split_tag},
          {"seed", e.seed}};
}

inline Episode episode_from_json(const nlohmann::json& j) {
  Episode e;
  e.world = world_from_json(j.at("world"));
  e.command = Command::from_text(j.at("command").get<std::string>());
  e.target_id = j.at("target_id").get<int>();
  for (const auto& ja : j.at("actions"))
    e.actions.push_back(action_from_string(ja.get<std::string>()));
  e.split_tag = j.value("split_tag", "");
  e.seed = j.value("seed", std::uint64_t{0});
  return e;
}

constexpr int kDatasetVersion = 1;

// Newline-delimited records behind a version header line.
inline void write_dataset(const std::string& path, const std::vector<Episode>& eps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset: " + path);
  out << nlohmann::json{{"format", "compnet-dataset"}, {"version", kDatasetVersion}}.dump()
      << "\n";
  for (const auto& e : eps) out << episode_to_json(e).dump() << "\n";
}

inline std::vector<Episode> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset is empty: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("dataset header is not valid json: " + std::string(e.what()));
  }
  if (header.value("format", "") != "compnet-dataset" ||
      header.value("version", -1) != kDatasetVersion)
    throw FormatError("dataset version mismatch in " + path + ": " + line);
  std::vector<Episode> eps;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      eps.push_back(episode_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return eps;
}

}  // namespace compnet
