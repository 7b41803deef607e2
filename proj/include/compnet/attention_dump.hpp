#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "compnet/dataset.hpp"
#include "compnet/network.hpp"

namespace compnet {

// P2 (plain text) portable graymap, 6x6, values 0..255. Attention maps are
// rescaled so the peak maps to 255 (the scale is kept in a comment); signed
// size-ordering maps use the fixed encoding 128 = zero.
template <typename T>
void write_pgm(const std::string& path, const std::vector<T>& map, bool signed_map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write pgm: " + path);
  os << "P2\n";
  double scale = 1.0;
  if (!signed_map) {
    scale = 0.0;
    for (T v : map) scale = std::max(scale, static_cast<double>(v));
    if (scale <= 0.0) scale = 1.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "# scale %.17g\n", scale);
    os << buf;
  } else {
    os << "# signed 128=zero\n";
  }
  os << kGridSize << " " << kGridSize << "\n255\n";
  for (int r = 0; r < kGridSize; ++r) {
    for (int c = 0; c < kGridSize; ++c) {
      const double v = static_cast<double>(map[r * kGridSize + c]);
      const int pixel = signed_map ? static_cast<int>(std::lround((v + 0.5) * 255.0))
                                   : static_cast<int>(std::lround(v / scale * 255.0));
      os << std::clamp(pixel, 0, 255) << (c + 1 < kGridSize ? " " : "\n");
    }
  }
}

template <typename T>
struct PgmImage {
  std::vector<T> values;
  bool signed_map = false;
};

template <typename T>
PgmImage<T> read_pgm(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read pgm: " + path);
  std::string magic;
  is >> magic;
  if (magic != "P2") throw FormatError("not a P2 pgm: " + path);
  PgmImage<T> img;
  double scale = 1.0;
  is >> std::ws;
  while (is.peek() == '#') {
    std::string comment;
    std::getline(is, comment);
    if (comment.find("signed") != std::string::npos) img.signed_map = true;
    const auto at = comment.find("scale ");
    if (at != std::string::npos) scale = std::stod(comment.substr(at + 6));
    is >> std::ws;
  }
  int w = 0, h = 0, maxval = 0;
  is >> w >> h >> maxval;
  if (w != kGridSize || h != kGridSize || maxval != 255)
    throw FormatError("unexpected pgm geometry in " + path);
  img.values.resize(kCells);
  for (auto& v : img.values) {
    int pixel = 0;
    is >> pixel;
    v = img.signed_map ? static_cast<T>(pixel / 255.0 - 0.5)
                       : static_cast<T>(pixel / 255.0 * scale);
  }
  return img;
}

struct DumpSummary {
  int files = 0;
  int steps = 0;
  std::string index_path;
};

// One graymap per (node, timestep) under out_dir/episode_id/step/label.pgm,
// plus the inactive head and the signed ordering map for antonym-merged
// modules. The index lists every file with its node label and step.
template <typename T>
DumpSummary dump_attention(Lexicon<T>& lex, const NetworkInstance<T>& net, const Episode& ep,
                           const std::string& out_dir, const std::string& episode_id,
                           int max_steps = 100) {
  namespace fs = std::filesystem;
  RolloutTrace<T> trace;
  rollout(lex, net, ep.world, max_steps, &trace);

  // Duplicate labels (constituency parses) get a disambiguating suffix.
  std::vector<std::string> file_label(net.nodes.size());
  std::map<std::string, int> label_count;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) ++label_count[net.nodes[i].label];
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const std::string& l = net.nodes[i].label;
    file_label[i] = label_count[l] > 1 ? l + "~" + std::to_string(seen[l]++) : l;
  }

  DumpSummary sum;
  sum.steps = static_cast<int>(trace.maps.size());
  const fs::path base = fs::path(out_dir) / episode_id;
  fs::create_directories(base);
  std::ofstream index(base / "index.txt");
  if (!index) throw IoError("cannot write attention index under " + base.string());
  index << "episode " << episode_id << "\ncommand " << ep.command.text() << "\nsteps "
        << sum.steps << "\n";
  for (int s = 0; s < sum.steps; ++s) {
    const fs::path step_dir = base / std::to_string(s);
    fs::create_directories(step_dir);
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
      const std::string name = file_label[i] + ".pgm";
      write_pgm(((step_dir / name)).string(), trace.maps[s][i], false);
      index << s << " " << net.nodes[i].label << " " << (fs::path(std::to_string(s)) / name).string()
            << "\n";
      ++sum.files;
      if (!trace.other_maps[s][i].empty()) {
        const auto& active = trace.maps[s][i];
        const auto& other = trace.other_maps[s][i];
        const std::string other_name = file_label[i] + ".other.pgm";
        write_pgm((step_dir / other_name).string(), other, false);
        index << s << " " << net.nodes[i].label << " "
              << (fs::path(std::to_string(s)) / other_name).string() << "\n";
        ++sum.files;
        // att_A is the polarity-A side; for small&big that is "small".
        const auto& att_a = net.nodes[i].head == 0 ? active : other;
        const auto& att_b = net.nodes[i].head == 0 ? other : active;
        const std::string ord_name = file_label[i] + ".ordering.pgm";
        write_pgm((step_dir / ord_name).string(), size_ordering_map(att_a, att_b), true);
        index << s << " " << net.nodes[i].label << " "
              << (fs::path(std::to_string(s)) / ord_name).string() << "\n";
        ++sum.files;
      }
    }
  }
  sum.index_path = (base / "index.txt").string();
  return sum;
}

}  // namespace compnet
