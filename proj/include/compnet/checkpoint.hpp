#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "compnet/adam.hpp"
#include "compnet/errors.hpp"
#include "compnet/lexicon.hpp"
#include "compnet/rng.hpp"

namespace compnet {

// Versioned binary checkpoint: model config, merge classes, module registry,
// every parameter tensor, Adam state, trainer step, and both RNG streams.
// Raw little-endian scalar bytes make the save/load round trip bit-exact.

constexpr char kCheckpointMagic[8] = {'C', 'P', 'N', 'T', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

namespace ckpt_detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void write_str(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
template <typename T>
void write_data(std::ostream& os, const std::vector<T>& v) {
  write_u64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(T)));
}

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw FormatError("checkpoint: truncated file");
  return v;
}
inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw FormatError("checkpoint: truncated file");
  return v;
}
inline double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw FormatError("checkpoint: truncated file");
  return v;
}
inline std::string read_str(std::istream& is) {
  const std::uint32_t n = read_u32(is);
  if (n > (1u << 24)) throw FormatError("checkpoint: implausible string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw FormatError("checkpoint: truncated file");
  return s;
}
template <typename T>
std::vector<T> read_data(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  if (n > (1ull << 32)) throw FormatError("checkpoint: implausible tensor size");
  std::vector<T> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!is) throw FormatError("checkpoint: truncated file");
  return v;
}

inline void write_rng(std::ostream& os, const Rng& rng) {
  for (std::uint64_t w : rng.state()) write_u64(os, w);
}
inline Rng read_rng(std::istream& is) {
  std::array<std::uint64_t, 4> st;
  for (auto& w : st) w = read_u64(is);
  Rng r;
  r.set_state(st);
  return r;
}

}  // namespace ckpt_detail

template <typename T>
struct TrainerState {
  std::unique_ptr<Lexicon<T>> lexicon;
  Adam<T> optimizer;
  Rng batch_rng;
  std::int64_t step = 0;
  std::string config_text;  // resolved run configuration, recorded verbatim
};

template <typename T>
void save_checkpoint(const std::string& path, Lexicon<T>& lex, Adam<T>& opt,
                     const Rng& batch_rng, std::int64_t step, const std::string& config_text) {
  using namespace ckpt_detail;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  write_u32(os, kCheckpointVersion);
  write_u32(os, static_cast<std::uint32_t>(sizeof(T)));
  const ModelConfig& cfg = lex.config();
  write_u32(os, static_cast<std::uint32_t>(cfg.message));
  write_u32(os, static_cast<std::uint32_t>(cfg.cnn_channels));
  write_u32(os, static_cast<std::uint32_t>(cfg.kernel));
  write_u32(os, static_cast<std::uint32_t>(cfg.hidden));
  write_u32(os, static_cast<std::uint32_t>(cfg.proj));
  write_u64(os, static_cast<std::uint64_t>(step));
  write_str(os, config_text);
  write_rng(os, lex.init_rng());
  write_rng(os, batch_rng);
  const AdamConfig& ac = opt.config();
  write_f64(os, ac.lr);
  write_f64(os, ac.beta1);
  write_f64(os, ac.beta2);
  write_f64(os, ac.epsilon);

  const auto& entries = lex.classes().entries();
  write_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [label, e] : entries) {
    write_str(os, label);
    write_str(os, e.class_id);
    write_u32(os, static_cast<std::uint32_t>(e.polarity));
    write_u32(os, e.dual ? 1 : 0);
  }

  write_u32(os, static_cast<std::uint32_t>(lex.modules().size()));
  for (const auto& m : lex.modules()) {
    write_str(os, m->class_id);
    write_u32(os, static_cast<std::uint32_t>(m->arity));
    write_u32(os, m->dual ? 1 : 0);
    write_u32(os, m->created_at_eval ? 1 : 0);
  }

  auto params = lex.all_params();
  write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (Parameter<T>* p : params) {
    write_str(os, p->name);
    write_u32(os, static_cast<std::uint32_t>(p->shape.size()));
    for (int d : p->shape) write_u32(os, static_cast<std::uint32_t>(d));
    write_data(os, p->value);
    const AdamState<T>* slot = opt.find(p);
    write_u32(os, slot != nullptr && slot->step > 0 ? 1 : 0);
    if (slot != nullptr && slot->step > 0) {
      write_u64(os, static_cast<std::uint64_t>(slot->step));
      write_data(os, slot->m);
      write_data(os, slot->v);
    }
  }
  if (!os) throw IoError("checkpoint write failed: " + path);
}

template <typename T>
TrainerState<T> load_checkpoint(const std::string& path) {
  using namespace ckpt_detail;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw FormatError("checkpoint: bad magic in " + path);
  const std::uint32_t version = read_u32(is);
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: version " + std::to_string(version) + " unsupported (want " +
                      std::to_string(kCheckpointVersion) + ")");
  const std::uint32_t scalar = read_u32(is);
  if (scalar != sizeof(T))
    throw FormatError("checkpoint: precision mismatch: file has " + std::to_string(scalar * 8) +
                      "-bit scalars");
  ModelConfig cfg;
  cfg.message = static_cast<MessageKind>(read_u32(is));
  cfg.cnn_channels = static_cast<int>(read_u32(is));
  cfg.kernel = static_cast<int>(read_u32(is));
  cfg.hidden = static_cast<int>(read_u32(is));
  cfg.proj = static_cast<int>(read_u32(is));

  TrainerState<T> st;
  st.step = static_cast<std::int64_t>(read_u64(is));
  st.config_text = read_str(is);
  const Rng init_rng = read_rng(is);
  st.batch_rng = read_rng(is);
  AdamConfig ac;
  ac.lr = read_f64(is);
  ac.beta1 = read_f64(is);
  ac.beta2 = read_f64(is);
  ac.epsilon = read_f64(is);
  st.optimizer = Adam<T>(ac);

  // Merge classes are stored denormalized; rebuilding the table from its own
  // entries avoids depending on the relations file at load time.
  const std::uint32_t n_entries = read_u32(is);
  LexicalRelations rel;
  for (std::uint32_t i = 0; i < n_entries; ++i) {
    const std::string label = read_str(is);
    const std::string class_id = read_str(is);
    const int polarity = static_cast<int>(read_u32(is));
    const bool dual = read_u32(is) != 0;
    if (label == class_id) continue;
    // In a dual class the representative's side is polarity B (1).
    if (dual && polarity == 0)
      rel.antonyms.emplace_back(class_id, label);
    else
      rel.synonyms.emplace_back(class_id, label);
  }
  st.lexicon = std::make_unique<Lexicon<T>>(cfg, build_merge_classes(rel), 0);

  const std::uint32_t n_modules = read_u32(is);
  for (std::uint32_t i = 0; i < n_modules; ++i) {
    const std::string class_id = read_str(is);
    const int arity = static_cast<int>(read_u32(is));
    const bool dual = read_u32(is) != 0;
    const bool at_eval = read_u32(is) != 0;
    auto& m = st.lexicon->get_or_create({class_id, arity}, at_eval);
    if (m.dual != dual)
      throw FormatError("checkpoint: module " + class_id + " head count mismatch");
  }

  const std::uint32_t n_params = read_u32(is);
  auto params = st.lexicon->all_params();
  if (n_params != params.size())
    throw FormatError("checkpoint: parameter count mismatch: file " + std::to_string(n_params) +
                      " vs model " + std::to_string(params.size()));
  for (Parameter<T>* p : params) {
    const std::string name = read_str(is);
    if (name != p->name)
      throw FormatError("checkpoint: parameter order mismatch: " + name + " vs " + p->name);
    Shape shape(read_u32(is));
    for (auto& d : shape) d = static_cast<int>(read_u32(is));
    if (shape != p->shape) throw FormatError("checkpoint: shape mismatch for " + name);
    p->value = read_data<T>(is);
    if (static_cast<std::int64_t>(p->value.size()) != numel(shape))
      throw FormatError("checkpoint: data size mismatch for " + name);
    if (read_u32(is) != 0) {
      AdamState<T>& slot = st.optimizer.slot(*p);
      slot.step = static_cast<std::int64_t>(read_u64(is));
      slot.m = read_data<T>(is);
      slot.v = read_data<T>(is);
    }
  }
  st.lexicon->init_rng().set_state(init_rng.state());
  return st;
}

}  // namespace compnet
