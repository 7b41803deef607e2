#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "compnet/errors.hpp"
#include "compnet/grammar.hpp"

namespace compnet {

enum class NodeKind { Word, Predicate, DummyRoot };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Word: return "word";
    case NodeKind::Predicate: return "predicate";
    default: return "dummy-root";
  }
}

inline NodeKind node_kind_from_string(const std::string& s) {
  for (int i = 0; i < 3; ++i)
    if (s == to_string(static_cast<NodeKind>(i))) return static_cast<NodeKind>(i);
  throw FormatError("unknown node kind: " + s);
}

struct DagNode {
  std::string id;
  std::string label;
  NodeKind kind = NodeKind::Word;
  bool operator==(const DagNode&) const = default;
};

struct DagArc {
  std::string parent, child;
  std::string label;
  int order = 0;
  bool operator==(const DagArc&) const = default;
};

// Labeled DAG unifying constituency, dependency, and semantic parses.
// Children of a node are ordered by the arc order index.
struct ParseDag {
  std::vector<DagNode> nodes;
  std::vector<DagArc> arcs;

  bool operator==(const ParseDag&) const = default;

  int node_index(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
  }

  // Outgoing arcs of `id`, sorted by order index.
  std::vector<const DagArc*> children_of(const std::string& id) const {
    std::vector<const DagArc*> out;
    for (const auto& a : arcs)
      if (a.parent == id) out.push_back(&a);
    std::sort(out.begin(), out.end(),
              [](const DagArc* a, const DagArc* b) { return a->order < b->order; });
    return out;
  }

  std::vector<std::string> roots() const {
    std::vector<std::string> out;
    for (const auto& n : nodes) {
      bool has_parent = false;
      for (const auto& a : arcs)
        if (a.child == n.id) has_parent = true;
      if (!has_parent) out.push_back(n.id);
    }
    return out;
  }
};

// Structural validation shared by ingestion and direct construction.
// `line_of` supplies source lines for diagnostics (0 when unknown).
inline void validate_dag(const ParseDag& d,
                         const std::function<int(const DagArc&)>& line_of =
                             [](const DagArc&) { return 0; },
                         int block_line = 0) {
  auto at_line = [](int line) {
    return line > 0 ? " (line " + std::to_string(line) + ")" : std::string();
  };
  if (d.nodes.empty()) throw FormatError("parse dag has no nodes" + at_line(block_line));
  std::map<std::string, int> index;
  for (const auto& n : d.nodes) {
    if (!index.emplace(n.id, 0).second)
      throw FormatError("duplicate node id: " + n.id + at_line(block_line));
  }
  std::map<std::string, std::vector<int>> orders;
  for (const auto& a : d.arcs) {
    if (!index.count(a.parent))
      throw FormatError("dangling arc parent: " + a.parent + at_line(line_of(a)));
    if (!index.count(a.child))
      throw FormatError("dangling arc child: " + a.child + at_line(line_of(a)));
    auto& seen = orders[a.parent];
    if (std::find(seen.begin(), seen.end(), a.order) != seen.end())
      throw FormatError("duplicate order index " + std::to_string(a.order) + " under " +
                        a.parent + at_line(line_of(a)));
    seen.push_back(a.order);
  }
  for (auto& [parent, seen] : orders) {
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (seen[i] != static_cast<int>(i))
        throw FormatError("order indices under " + parent + " are not 0..n-1" +
                          at_line(block_line));
  }
  // Kahn's algorithm detects cycles.
  std::map<std::string, int> indeg;
  for (const auto& n : d.nodes) indeg[n.id] = 0;
  for (const auto& a : d.arcs) ++indeg[a.child];
  std::vector<std::string> queue;
  for (const auto& n : d.nodes)
    if (indeg[n.id] == 0) queue.push_back(n.id);
  std::size_t done = 0;
  while (done < queue.size()) {
    const std::string id = queue[done++];
    for (const auto& a : d.arcs)
      if (a.parent == id && --indeg[a.child] == 0) queue.push_back(a.child);
  }
  if (done != d.nodes.size())
    throw FormatError("cycle detected in parse dag" + at_line(block_line));
}

// Semantic-parse adjective nesting. The default keeps color closest to the
// noun so relative size is judged over the color+shape-filtered set, matching
// target resolution.
enum class AdjectiveOrder { SizeOutsideColor, ColorOutsideSize };

// Unary predicate chain: noun leaf, adjectives, verb, then adverb as root.
// Determiners are dropped.
inline ParseDag semantic_parse(const Command& c,
                               AdjectiveOrder order = AdjectiveOrder::SizeOutsideColor) {
  std::vector<std::string> chain;  // root first
  if (c.adverb) chain.push_back(to_string(*c.adverb));
  chain.push_back(to_string(c.verb));
  const std::string size_label = c.size_adj ? to_string(*c.size_adj) : "";
  const std::string color_label = c.color_adj ? to_string(*c.color_adj) : "";
  if (order == AdjectiveOrder::SizeOutsideColor) {
    if (!size_label.empty()) chain.push_back(size_label);
    if (!color_label.empty()) chain.push_back(color_label);
  } else {
    if (!color_label.empty()) chain.push_back(color_label);
    if (!size_label.empty()) chain.push_back(size_label);
  }
  chain.push_back(to_string(c.noun));

  ParseDag d;
  for (std::size_t i = 0; i < chain.size(); ++i)
    d.nodes.push_back({"n" + std::to_string(i), chain[i], NodeKind::Predicate});
  for (std::size_t i = 0; i + 1 < chain.size(); ++i)
    d.arcs.push_back({d.nodes[i].id, d.nodes[i + 1].id, "arg", 0});
  return d;
}

constexpr const char* kDummyRootLabel = "<root>";

// Canonical form: a single root (synthesizing a dummy root over multitrees)
// and child order as a pure function of (arc label, child label). Idempotent.
inline ParseDag normalize_dag(const ParseDag& in) {
  ParseDag d = in;
  validate_dag(d);
  const auto roots = d.roots();
  if (roots.size() > 1) {
    std::string id = "root";
    while (d.node_index(id) >= 0) id += "_";
    d.nodes.push_back({id, kDummyRootLabel, NodeKind::DummyRoot});
    for (const auto& r : roots) d.arcs.push_back({id, r, "root", 0});
  }
  std::map<std::string, const DagNode*> by_id;
  for (const auto& n : d.nodes) by_id[n.id] = &n;
  // Sort key: arc label, then child label; prior order breaks ties between
  // same-labeled siblings, which keeps the result idempotent.
  std::stable_sort(d.arcs.begin(), d.arcs.end(), [&](const DagArc& a, const DagArc& b) {
    const int pa = d.node_index(a.parent), pb = d.node_index(b.parent);
    if (pa != pb) return pa < pb;
    if (a.label != b.label) return a.label < b.label;
    if (by_id[a.child]->label != by_id[b.child]->label)
      return by_id[a.child]->label < by_id[b.child]->label;
    return a.order < b.order;
  });
  int prev_parent = -1;
  int next_order = 0;
  for (auto& a : d.arcs) {
    const int p = d.node_index(a.parent);
    if (p != prev_parent) {
      prev_parent = p;
      next_order = 0;
    }
    a.order = next_order++;
  }
  return d;
}

// ---- parse-DAG file format ----
//
//   PARSE <id> <formalism>
//   N <node_id> <label> <kind>
//   A <parent_id> <child_id> <arc_label> <order>
//   END
//
// Whitespace-delimited, UTF-8, one block per parse. Multi-root blocks are
// accepted (they normalize later).

struct ParseBlock {
  std::string id;
  std::string formalism;
  ParseDag dag;
};

inline std::vector<ParseBlock> ingest_parse_blocks(const std::string& text) {
  std::vector<ParseBlock> out;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  std::optional<ParseBlock> cur;
  int block_line = 0;
  std::vector<int> arc_line_list;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "PARSE") {
      if (cur) throw FormatError("line " + std::to_string(line_no) + ": PARSE inside block");
      cur.emplace();
      block_line = line_no;
      arc_line_list.clear();
      if (!(ls >> cur->id >> cur->formalism))
        throw FormatError("line " + std::to_string(line_no) + ": PARSE needs <id> <formalism>");
    } else if (tag == "N") {
      if (!cur) throw FormatError("line " + std::to_string(line_no) + ": N outside block");
      DagNode n;
      std::string kind;
      if (!(ls >> n.id >> n.label >> kind))
        throw FormatError("line " + std::to_string(line_no) + ": N needs <id> <label> <kind>");
      try {
        n.kind = node_kind_from_string(kind);
      } catch (const FormatError& e) {
        throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
      }
      cur->dag.nodes.push_back(std::move(n));
    } else if (tag == "A") {
      if (!cur) throw FormatError("line " + std::to_string(line_no) + ": A outside block");
      DagArc a;
      if (!(ls >> a.parent >> a.child >> a.label >> a.order))
        throw FormatError("line " + std::to_string(line_no) +
                          ": A needs <parent> <child> <arc_label> <order>");
      cur->dag.arcs.push_back(std::move(a));
      arc_line_list.push_back(line_no);
    } else if (tag == "END") {
      if (!cur) throw FormatError("line " + std::to_string(line_no) + ": END outside block");
      validate_dag(
          cur->dag,
          [&](const DagArc& a) {
            for (std::size_t i = 0; i < cur->dag.arcs.size(); ++i)
              if (&cur->dag.arcs[i] == &a) return arc_line_list[i];
            return 0;
          },
          block_line);
      out.push_back(std::move(*cur));
      cur.reset();
    } else {
      throw FormatError("line " + std::to_string(line_no) + ": unknown record tag: " + tag);
    }
  }
  if (cur) throw FormatError("line " + std::to_string(block_line) + ": block missing END");
  return out;
}

// Single-parse convenience; the text must contain exactly one block.
inline ParseDag ingest_parse_dag(const std::string& text) {
  auto blocks = ingest_parse_blocks(text);
  if (blocks.size() != 1)
    throw FormatError("expected exactly one parse block, got " +
                      std::to_string(blocks.size()));
  return std::move(blocks[0].dag);
}

inline std::string serialize_parse_dag(const ParseDag& d, const std::string& id,
                                       const std::string& formalism) {
  std::ostringstream os;
  os << "PARSE " << id << " " << formalism << "\n";
  for (const auto& n : d.nodes)
    os << "N " << n.id << " " << n.label << " " << to_string(n.kind) << "\n";
  for (const auto& a : d.arcs)
    os << "A " << a.parent << " " << a.child << " " << a.label << " " << a.order << "\n";
  os << "END\n";
  return os.str();
}

}  // namespace compnet
