#pragma once

#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "ae/env/minizork.hpp"

namespace ae::zork {

/// Line-oriented debugging loop for world authors. Besides game commands it
/// understands :state (the fixed-width state text), :reset and :quit.
inline void run_repl(const Game& game, std::istream& in, std::ostream& out, std::uint64_t seed = 0, bool hazards = false) {
  std::mt19937_64 rng(seed);
  GameState s = game.initial_state();
  double total = 0.0;
  out << game.room_description(s) << "\n> " << std::flush;
  std::string line;
  while (std::getline(in, line)) {
    const auto cmd = detail::trim(line);
    if (cmd == ":quit" || cmd == ":q") break;
    if (cmd.empty()) {
      out << "> " << std::flush;
      continue;
    }
    if (cmd == ":reset") {
      s = game.initial_state();
      total = 0.0;
      rng.seed(seed);
      out << game.room_description(s) << "\n> " << std::flush;
      continue;
    }
    if (cmd == ":state") {
      out << game.render_state_text(s) << "\n> " << std::flush;
      continue;
    }
    auto r = game.execute(s, cmd, hazards ? &rng : nullptr);
    s = std::move(r.next);
    total += r.reward;
    out << r.observation << "\n[reward " << r.reward << ", elim " << r.elim << ", score " << s.score << ", steps " << s.steps
        << ", return " << total << "]\n";
    if (r.done) {
      out << (r.terminal ? "*** The episode has ended. ***" : "*** Out of time. ***") << " Type :reset to play again.\n";
    }
    out << "> " << std::flush;
  }
  out << '\n';
}

}  // namespace ae::zork
