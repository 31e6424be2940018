#pragma once
// Exhaustive breadth-first search over command sequences, used to check that
// commands on shortest winning routes are never flagged as invalid.

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "ae/env/minizork.hpp"

namespace oracle {

struct SoundnessReport {
  std::size_t states = 0;          // distinct world states within the depth bound
  std::size_t expansions = 0;      // (state, command) pairs executed
  int optimum = -1;                // shortest winning length from the start, -1 if none within depth
  std::size_t optimal_moves = 0;   // (state, command) pairs lying on some shortest route
  std::vector<std::string> violations;
};

/// `win` decides whether a step result completes the quest. Sequences longer
/// than `depth` are not explored; the step counter is ignored when comparing states.
template <typename Win>
SoundnessReport check_soundness(const ae::zork::Game& game, const std::vector<std::string>& commands, int depth, Win win) {
  using ae::zork::GameState;
  struct Edge {
    std::size_t to;  // index into nodes, or npos when the step won
    std::size_t command;
    int elim;
  };
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<GameState> nodes;
  std::vector<int> level;
  std::vector<std::vector<Edge>> edges;
  std::unordered_map<std::string, std::size_t> index;

  auto normalize = [](GameState s) {
    s.steps = 0;
    return s;
  };
  nodes.push_back(normalize(game.initial_state()));
  level.push_back(0);
  index.emplace(nodes.front().key(), 0);
  SoundnessReport rep;

  // Forward BFS, recording every edge out of states at depth < bound.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    edges.emplace_back();
    if (level[i] >= depth) continue;
    for (std::size_t c = 0; c < commands.size(); ++c) {
      const auto r = game.execute(nodes[i], commands[c]);
      ++rep.expansions;
      if (win(r)) {
        edges[i].push_back({npos, c, r.elim});
        continue;
      }
      if (r.terminal) continue;  // lost
      auto next = normalize(r.next);
      auto key = next.key();
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(std::move(key), nodes.size()).first;
        nodes.push_back(std::move(next));
        level.push_back(level[i] + 1);
      }
      if (it->second != i) edges[i].push_back({it->second, c, r.elim});
    }
  }
  rep.states = nodes.size();

  // Distance-to-win by repeated relaxation (graph is small; depth-bounded).
  constexpr int inf = 1 << 29;
  std::vector<int> togo(nodes.size(), inf);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (const auto& e : edges[i]) {
        const int d = e.to == npos ? 1 : (togo[e.to] == inf ? inf : togo[e.to] + 1);
        if (d < togo[i]) {
          togo[i] = d;
          changed = true;
        }
      }
  }
  if (togo[0] <= depth) rep.optimum = togo[0];

  // A command is on a shortest route from state i when it cuts the distance by one.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (togo[i] == inf || level[i] + togo[i] > depth) continue;
    for (const auto& e : edges[i]) {
      const bool optimal = e.to == npos ? togo[i] == 1 : togo[e.to] == togo[i] - 1;
      if (!optimal) continue;
      ++rep.optimal_moves;
      if (e.elim != 0)
        rep.violations.push_back("'" + commands[e.command] + "' flagged at state " + nodes[i].key() +
                                 " (" + std::to_string(togo[i]) + " from the goal)");
    }
  }
  return rep;
}

}  // namespace oracle
