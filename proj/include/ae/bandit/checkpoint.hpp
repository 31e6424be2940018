#pragma once

#include <istream>
#include <ostream>
#include <vector>

#include "ae/bandit/eliminator.hpp"
#include "ae/io/binary.hpp"

namespace ae {

inline constexpr std::uint32_t kArmCheckpointVersion = 1;

/// Binary checkpoint of an arm set: "AEARMS" + version, then per arm
/// lambda, V, V^{-1}, log det, update count and b. Round-trips bit-exactly.
inline void write_arms(std::ostream& os, const std::vector<ArmModel>& arms) {
  io::BinaryWriter w(os);
  w.magic("AEARMS", kArmCheckpointVersion);
  w.u64(arms.size());
  for (const auto& arm : arms) {
    const auto& d = arm.design();
    w.f64(d.lambda());
    w.matrix(d.v());
    w.matrix(d.v_inv());
    w.f64(d.log_det());
    w.u64(d.update_count());
    w.matrix(arm.b());
  }
  w.check();
}

inline std::vector<ArmModel> read_arms(std::istream& is) {
  io::BinaryReader r(is);
  const auto version = r.magic("AEARMS");
  if (version != kArmCheckpointVersion) throw Error("arm checkpoint: unsupported version");
  const auto n = r.u64();
  std::vector<ArmModel> arms;
  arms.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double lambda = r.f64();
    auto v = r.matrix<Matrix>();
    auto v_inv = r.matrix<Matrix>();
    const double log_det = r.f64();
    const auto count = r.u64();
    auto b = r.matrix<Vector>();
    arms.push_back(ArmModel::from_parts(
        SpdMatrix::from_parts(lambda, std::move(v), std::move(v_inv), log_det, count), std::move(b)));
  }
  return arms;
}

}  // namespace ae
