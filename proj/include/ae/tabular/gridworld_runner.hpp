#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ae/env/gridworld.hpp"
#include "ae/harness/records.hpp"
#include "ae/tabular/agent.hpp"

namespace ae {

/// Train a tabular agent on the grid world for a number of episodes,
/// emitting one record per episode. The category map comes from the grid
/// config; `seed` drives exploration and transition noise only.
inline void run_gridworld_tabular(const GridConfig& grid_cfg, const TabularConfig& agent_cfg, std::uint64_t seed,
                                  std::uint64_t episodes, const std::function<void(const EpisodeRecord&)>& emit) {
  const GridWorld world(grid_cfg);
  TabularAgent agent(world.num_states(), world.num_actions(), agent_cfg,
                     [&world](std::size_t s, int a) { return world.action_valid(world.cell_of(s), a); });
  std::mt19937_64 rng(seed);
  std::vector<int> adm;
  std::uint64_t global_step = 0;

  for (std::uint64_t ep = 0; ep < episodes; ++ep) {
    GridState s = world.reset();
    EpisodeRecord rec;
    rec.seed = seed;
    rec.episode = ep;
    double adm_total = 0.0;
    bool done = false;
    while (!done) {
      const std::size_t si = world.state_index(s.cell);
      agent.admissible(si, adm);
      adm_total += static_cast<double>(adm.size());
      for (int c = 0; c < 4; ++c) {
        const int a = GridWorld::make_action(s.category, static_cast<Direction>(c));
        if (agent.eliminated(si, a)) {
          ++rec.eliminated_valid;
          break;
        }
      }
      const int a = agent.select_action(si, rng);
      const GridStep step = world.step(s, a, rng);
      agent.update({si, a, step.reward, static_cast<double>(step.elim), world.state_index(step.next.cell),
                    step.terminal});
      rec.train_return += step.reward;
      ++rec.length;
      ++global_step;
      s = step.next;
      done = step.done;
    }
    rec.global_step = global_step;
    rec.mean_admissible = adm_total / static_cast<double>(rec.length);
    emit(rec);
  }
}

}  // namespace ae
