#pragma once

#include <cstdint>
#include <optional>

namespace ae {

/// One row of a learning curve.
struct EpisodeRecord {
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;
  std::uint64_t global_step = 0;
  double train_return = 0.0;
  std::optional<double> eval_return;
  std::uint64_t length = 0;
  double mean_admissible = 0.0;
  std::uint64_t eliminated_valid = 0;
};

}  // namespace ae
