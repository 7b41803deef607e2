#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "compnet/errors.hpp"
#include "compnet/gridworld.hpp"
#include "compnet/rng.hpp"

namespace compnet {

enum class Verb { WalkTo, Push, Pull };
enum class SizeAdj { Small, Big };
enum class Adverb { WhileSpinning, WhileZigzagging, Hesitantly, Cautiously };

// Canonical predicate names; these double as parse-node labels.
inline const char* to_string(Verb v) {
  switch (v) {
    case Verb::WalkTo: return "walk-to";
    case Verb::Push: return "push";
    default: return "pull";
  }
}
inline const char* to_string(SizeAdj s) { return s == SizeAdj::Small ? "small" : "big"; }
inline const char* to_string(Adverb a) {
  switch (a) {
    case Adverb::WhileSpinning: return "while-spinning";
    case Adverb::WhileZigzagging: return "while-zigzagging";
    case Adverb::Hesitantly: return "hesitantly";
    default: return "cautiously";
  }
}

// Structured view of a command. The surface token list follows the template
// "VERB <det> [SIZE] [COLOR] NOUN [ADVERB]" and the two representations are
// mutually derivable.
struct Command {
  Verb verb = Verb::WalkTo;
  std::optional<SizeAdj> size_adj;
  std::optional<ObjColor> color_adj;
  ObjShape noun = ObjShape::Circle;
  std::optional<Adverb> adverb;
  std::string determiner = "a";

  bool operator==(const Command&) const = default;

  std::vector<std::string> tokens() const {
    std::vector<std::string> out;
    switch (verb) {
      case Verb::WalkTo: out = {"walk", "to"}; break;
      case Verb::Push: out = {"push"}; break;
      case Verb::Pull: out = {"pull"}; break;
    }
    out.push_back(determiner);
    if (size_adj) out.push_back(to_string(*size_adj));
    if (color_adj) out.push_back(to_string(*color_adj));
    out.push_back(to_string(noun));
    if (adverb) {
      switch (*adverb) {
        case Adverb::WhileSpinning: out.insert(out.end(), {"while", "spinning"}); break;
        case Adverb::WhileZigzagging: out.insert(out.end(), {"while", "zigzagging"}); break;
        case Adverb::Hesitantly: out.push_back("hesitantly"); break;
        case Adverb::Cautiously: out.push_back("cautiously"); break;
      }
    }
    return out;
  }

  std::string text() const {
    std::ostringstream os;
    const auto ts = tokens();
    for (std::size_t i = 0; i < ts.size(); ++i) os << (i ? " " : "") << ts[i];
    return os.str();
  }

  static Command from_tokens(const std::vector<std::string>& toks);
  static Command from_text(const std::string& text) {
    std::istringstream is(text);
    std::vector<std::string> toks;
    std::string t;
    while (is >> t) toks.push_back(t);
    return from_tokens(toks);
  }
};

inline Command Command::from_tokens(const std::vector<std::string>& toks) {
  Command c;
  std::size_t i = 0;
  auto need = [&](const char* what) -> const std::string& {
    if (i >= toks.size()) throw ParseError(std::string("command ended before ") + what);
    return toks[i];
  };
  const std::string& v = need("verb");
  if (v == "walk") {
    ++i;
    if (need("'to'") != "to") throw ParseError("unknown token after 'walk': " + toks[i]);
    c.verb = Verb::WalkTo;
  } else if (v == "push") {
    c.verb = Verb::Push;
  } else if (v == "pull") {
    c.verb = Verb::Pull;
  } else {
    throw ParseError("unknown verb token: " + v);
  }
  ++i;
  const std::string& det = need("determiner");
  if (det != "a" && det != "the") throw ParseError("unknown determiner token: " + det);
  c.determiner = det;
  ++i;
  if (need("noun") == "small") c.size_adj = SizeAdj::Small, ++i;
  else if (toks[i] == "big") c.size_adj = SizeAdj::Big, ++i;
  const std::string& col = need("noun");
  if (col == "red") c.color_adj = ObjColor::Red, ++i;
  else if (col == "green") c.color_adj = ObjColor::Green, ++i;
  else if (col == "blue") c.color_adj = ObjColor::Blue, ++i;
  else if (col == "yellow") c.color_adj = ObjColor::Yellow, ++i;
  const std::string& n = need("noun");
  if (n == "circle") c.noun = ObjShape::Circle;
  else if (n == "square") c.noun = ObjShape::Square;
  else if (n == "cylinder") c.noun = ObjShape::Cylinder;
  else throw ParseError("unknown noun token: " + n);
  ++i;
  if (i < toks.size()) {
    if (toks[i] == "hesitantly") c.adverb = Adverb::Hesitantly, ++i;
    else if (toks[i] == "cautiously") c.adverb = Adverb::Cautiously, ++i;
    else if (toks[i] == "while") {
      ++i;
      const std::string& w = need("adverb after 'while'");
      if (w == "spinning") c.adverb = Adverb::WhileSpinning;
      else if (w == "zigzagging") c.adverb = Adverb::WhileZigzagging;
      else throw ParseError("unknown adverb token: " + w);
      ++i;
    } else {
      throw ParseError("unknown token: " + toks[i]);
    }
  }
  if (i != toks.size()) throw ParseError("unexpected trailing token: " + toks[i]);
  return c;
}

// Slot choices for command sampling; nullopt entries mean "slot absent".
struct GrammarConfig {
  std::vector<Verb> verbs{Verb::WalkTo, Verb::Push, Verb::Pull};
  std::vector<std::optional<SizeAdj>> size_options{std::nullopt, SizeAdj::Small, SizeAdj::Big};
  std::vector<std::optional<ObjColor>> color_options{std::nullopt, ObjColor::Red, ObjColor::Green,
                                                     ObjColor::Blue, ObjColor::Yellow};
  std::vector<ObjShape> nouns{ObjShape::Circle, ObjShape::Square, ObjShape::Cylinder};
  std::vector<std::optional<Adverb>> adverb_options{std::nullopt, Adverb::WhileSpinning,
                                                    Adverb::WhileZigzagging, Adverb::Hesitantly,
                                                    Adverb::Cautiously};
  std::string determiner = "a";

  std::size_t num_commands() const {
    return verbs.size() * size_options.size() * color_options.size() * nouns.size() *
           adverb_options.size();
  }
};

inline Command generate_command(Rng& rng, const GrammarConfig& g) {
  if (g.verbs.empty() || g.nouns.empty() || g.size_options.empty() || g.color_options.empty() ||
      g.adverb_options.empty())
    throw ConfigError("generate_command: grammar has an empty slot");
  Command c;
  c.verb = g.verbs[rng.index(static_cast<int>(g.verbs.size()))];
  c.size_adj = g.size_options[rng.index(static_cast<int>(g.size_options.size()))];
  c.color_adj = g.color_options[rng.index(static_cast<int>(g.color_options.size()))];
  c.noun = g.nouns[rng.index(static_cast<int>(g.nouns.size()))];
  c.adverb = g.adverb_options[rng.index(static_cast<int>(g.adverb_options.size()))];
  c.determiner = g.determiner;
  return c;
}

}  // namespace compnet
