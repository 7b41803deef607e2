#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "compnet/dataset.hpp"
#include "compnet/network.hpp"
#include "compnet/trainer.hpp"

namespace compnet {

// Binary metric: predicted sequence equals the demonstration exactly,
// terminal Stay included.
inline bool exact_match(const std::vector<Action>& predicted,
                        const std::vector<Action>& target) {
  return predicted == target;
}

struct EvalOutcome {
  int n = 0;
  int matches = 0;
  std::map<std::string, int> failure_categories;  // mismatch / untrained-module / max-steps

  double pct() const { return n == 0 ? 0.0 : 100.0 * matches / n; }
};

// Rolls the model out on every episode and scores exact match. Words never
// seen in training get fresh random modules and the episode is tagged with
// the distinguished untrained-module category instead of crashing. Networks
// are assembled serially (module creation mutates the lexicon); rollouts are
// read-only and parallelize across episodes.
template <typename T>
EvalOutcome evaluate(Lexicon<T>& lex, const std::vector<Episode>& episodes,
                     const ParserFn& parser, int max_steps = 100, int workers = 1) {
  struct Job {
    const NetworkInstance<T>* net;
    bool untrained;
  };
  NetworkCache<T> nets(lex, parser);
  std::vector<Job> jobs;
  jobs.reserve(episodes.size());
  for (const auto& ep : episodes) {
    const NetworkInstance<T>& net = nets.get(ep.command, /*at_eval=*/true);
    jobs.push_back({&net, net.uses_untrained});
  }

  std::vector<int> match(episodes.size(), 0);
  std::vector<int> category(episodes.size(), 0);  // 0 none, 1 mismatch, 2 untrained, 3 max-steps
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto actions = rollout(lex, *jobs[i].net, episodes[i].world, max_steps);
      if (exact_match(actions, episodes[i].actions)) {
        match[i] = 1;
      } else if (jobs[i].untrained) {
        category[i] = 2;
      } else if (static_cast<int>(actions.size()) >= max_steps &&
                 actions.back() != Action::Stay) {
        category[i] = 3;
      } else {
        category[i] = 1;
      }
    }
  };
  if (workers <= 1 || episodes.size() < 2) {
    run_range(0, episodes.size());
  } else {
    const int w = std::min<int>(workers, static_cast<int>(episodes.size()));
    std::vector<std::thread> threads;
    const std::size_t chunk = (episodes.size() + w - 1) / w;
    for (int k = 0; k < w; ++k) {
      const std::size_t lo = k * chunk, hi = std::min(episodes.size(), (k + 1) * chunk);
      if (lo < hi) threads.emplace_back(run_range, lo, hi);
    }
    for (auto& th : threads) th.join();
  }

  EvalOutcome out;
  out.n = static_cast<int>(episodes.size());
  static const char* names[4] = {"", "mismatch", "untrained-module", "max-steps"};
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    out.matches += match[i];
    if (category[i] != 0) ++out.failure_categories[names[category[i]]];
  }
  return out;
}

// Aggregate over independent runs (e.g. seeds): mean and sample stddev of
// the exact-match percentage.
struct EvalAggregate {
  double mean_pct = 0.0;
  double stddev_pct = 0.0;
  int runs = 0;
};

inline EvalAggregate aggregate_outcomes(const std::vector<EvalOutcome>& outs) {
  EvalAggregate a;
  a.runs = static_cast<int>(outs.size());
  if (outs.empty()) return a;
  for (const auto& o : outs) a.mean_pct += o.pct();
  a.mean_pct /= a.runs;
  if (a.runs > 1) {
    double ss = 0;
    for (const auto& o : outs) ss += (o.pct() - a.mean_pct) * (o.pct() - a.mean_pct);
    a.stddev_pct = std::sqrt(ss / (a.runs - 1));
  }
  return a;
}

// Structured-text report with a stable schema.
inline std::string format_report(const std::string& condition, const EvalOutcome& o,
                                 double stddev = 0.0) {
  char buf[160];
  std::string s;
  s += "report-version 1\n";
  s += "condition " + condition + "\n";
  std::snprintf(buf, sizeof buf, "n %d\n", o.n);
  s += buf;
  std::snprintf(buf, sizeof buf, "exact_match_pct %.4f\n", o.pct());
  s += buf;
  std::snprintf(buf, sizeof buf, "stddev %.4f\n", stddev);
  s += buf;
  s += "failures";
  for (const auto& [name, count] : o.failure_categories) {
    std::snprintf(buf, sizeof buf, " %s=%d", name.c_str(), count);
    s += buf;
  }
  s += "\n";
  return s;
}

inline void write_report(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write report: " + path);
  os << text;
}

}  // namespace compnet
