#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ae/bandit/checkpoint.hpp"
#include "ae/io/binary.hpp"
#include "ae/neural/training.hpp"

namespace ae::nn {

inline constexpr std::uint32_t kTrainerCheckpointVersion = 1;

/// Replay contents are not stored, only enough to check a resume is sane.
struct ReplayMeta {
  std::uint64_t size = 0;
  std::uint64_t capacity = 0;
};

struct TrainerCheckpoint {
  TrainerState state;
  ReplayMeta replay;
};

namespace detail {

inline void write_elim_config(io::BinaryWriter& w, const EliminationConfig& c) {
  w.f64(c.lambda);
  w.f64(c.delta);
  w.f64(c.r_subgauss);
  w.f64(c.s_bound);
  w.f64(c.l_context);
  w.f64(c.ell);
  w.u32(c.u ? 1 : 0);
  w.f64(c.u.value_or(0.0));
  w.u64(c.num_actions);
  w.u32(static_cast<std::uint32_t>(c.beta_mode));
  w.f64(c.fixed_beta);
}

inline EliminationConfig read_elim_config(io::BinaryReader& r) {
  EliminationConfig c;
  c.lambda = r.f64();
  c.delta = r.f64();
  c.r_subgauss = r.f64();
  c.s_bound = r.f64();
  c.l_context = r.f64();
  c.ell = r.f64();
  const bool has_u = r.u32() != 0;
  const double u = r.f64();
  if (has_u) c.u = u;
  c.num_actions = r.u64();
  const auto mode = r.u32();
  if (mode > static_cast<std::uint32_t>(BetaMode::Fixed)) throw Error("trainer checkpoint: unknown beta mode");
  c.beta_mode = static_cast<BetaMode>(mode);
  c.fixed_beta = r.f64();
  return c;
}

}  // namespace detail

/// "AETRAIN" + version, counters, replay metadata, the three networks and the
/// optional bandit snapshot (frozen AEN, elimination config, arms).
inline void write_checkpoint(std::ostream& os, const TrainerCheckpoint& ck) {
  io::BinaryWriter w(os);
  w.magic("AETRAIN", kTrainerCheckpointVersion);
  w.u64(ck.state.step);
  w.u64(ck.state.episodes);
  w.u64(ck.replay.size);
  w.u64(ck.replay.capacity);
  ck.state.q.write(w);
  ck.state.q_target.write(w);
  const bool has_aen = ck.state.aen.num_layers() > 0;
  w.u32(has_aen ? 1 : 0);
  if (has_aen) ck.state.aen.write(w);
  w.u32(ck.state.snapshot ? 1 : 0);
  if (ck.state.snapshot) {
    ck.state.snapshot->aen_target.write(w);
    detail::write_elim_config(w, ck.state.snapshot->cfg);
    w.check();
    write_arms(os, ck.state.snapshot->arms);
  }
  w.check();
}

inline TrainerCheckpoint read_checkpoint(std::istream& is) {
  io::BinaryReader r(is);
  if (r.magic("AETRAIN") != kTrainerCheckpointVersion) throw Error("trainer checkpoint: unsupported version");
  TrainerCheckpoint ck;
  ck.state.step = r.u64();
  ck.state.episodes = r.u64();
  ck.replay.size = r.u64();
  ck.replay.capacity = r.u64();
  if (ck.replay.size > ck.replay.capacity) throw Error("trainer checkpoint: replay size exceeds capacity");
  ck.state.q = Net::read(r);
  ck.state.q_target = Net::read(r);
  if (r.u32()) ck.state.aen = Net::read(r);
  if (r.u32()) {
    BanditSnapshot snap;
    snap.aen_target = Net::read(r);
    snap.cfg = detail::read_elim_config(r);
    snap.arms = read_arms(is);
    if (snap.arms.size() != snap.aen_target.output_dim() || snap.cfg.num_actions != snap.arms.size())
      throw Error("trainer checkpoint: snapshot arm count does not match the network");
    ck.state.snapshot = std::move(snap);
  }
  if (ck.state.q.output_dim() != ck.state.q_target.output_dim())
    throw Error("trainer checkpoint: Q and target networks disagree on the action count");
  return ck;
}

inline void save_checkpoint(const std::string& path, const TrainerCheckpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  write_checkpoint(os, ck);
}

inline TrainerCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_checkpoint(is);
}

}  // namespace ae::nn
