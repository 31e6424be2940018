#pragma once

#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ae/bandit/simulation.hpp"
#include "ae/env/minizork.hpp"
#include "ae/harness/config.hpp"
#include "ae/harness/csv.hpp"
#include "ae/neural/training.hpp"
#include "ae/tabular/gridworld_runner.hpp"

#ifndef AE_WORLDS_DIR
#define AE_WORLDS_DIR "worlds"
#endif

namespace ae {

/// A bare name like "egg" maps to the bundled world file; anything with a
/// slash or a ".world" suffix is taken as a path.
inline std::string resolve_world_path(const std::string& world) {
  if (world.find('/') != std::string::npos || world.ends_with(".world")) return world;
  return std::string(AE_WORLDS_DIR) + "/" + world + ".world";
}

inline zork::WorldSpec load_world_for(const ZorkConfig& z) {
  auto spec = zork::load_world(resolve_world_path(z.world));
  if (z.horizon) {
    if (*z.horizon < 1) throw ConfigError("zork.horizon: must be positive");
    spec.horizon = *z.horizon;
  }
  return spec;
}

/// Rows for one seed: every episode for gridworld-tabular, every eval
/// checkpoint for minizork-dqn.
inline std::vector<EpisodeRecord> run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::vector<EpisodeRecord> rows;
  switch (cfg.kind) {
    case ExperimentKind::GridworldTabular: {
      TabularConfig t = cfg.tabular;
      t.elimination_mode = cfg.variant == Variant::Vanilla ? EliminationMode::Off
                           : cfg.variant == Variant::Ae   ? EliminationMode::CountConfidence
                                                          : EliminationMode::Oracle;
      rows.reserve(cfg.episodes);
      run_gridworld_tabular(cfg.grid, t, seed, cfg.episodes, [&](const EpisodeRecord& r) { rows.push_back(r); });
      break;
    }
    case ExperimentKind::MinizorkDqn: {
      const zork::Game game(load_world_for(cfg.zork));
      zork::ZorkEnv env(game, game.build_action_set(cfg.zork.take_distractors, cfg.zork.template_mode), cfg.zork.hazards);
      nn::AgentConfig a = cfg.agent;
      a.use_aen = cfg.variant == Variant::Ae;
      // Ground-truth validity for the eliminated-valid counter, memoized per world state.
      std::map<std::string, std::vector<std::int8_t>> memo;
      auto valid = [&memo](const zork::ZorkEnv& e, std::size_t action) {
        auto& v = memo[e.state().key()];
        if (v.empty()) v.assign(e.num_actions(), -1);
        if (v[action] < 0) v[action] = e.game().execute(e.state(), e.actions().commands[action]).elim == 0;
        return v[action] == 1;
      };
      nn::run_training<zork::ZorkEnv>(
          env, a, seed,
          [&](const EpisodeRecord& r) {
            if (r.eval_return) rows.push_back(r);
          },
          valid);
      break;
    }
    case ExperimentKind::BanditSim:
      throw InvalidArgument("run_seed: bandit-sim has no per-seed learning curve");
  }
  return rows;
}

/// Row-wise arithmetic mean over seeds. Rows must line up across seeds.
inline std::string aggregate_csv(const std::vector<std::vector<EpisodeRecord>>& per_seed) {
  if (per_seed.empty()) throw InvalidArgument("aggregate_csv: no seeds");
  const std::size_t n = per_seed.front().size();
  for (const auto& s : per_seed)
    if (s.size() != n) throw Error("aggregate_csv: seeds produced different row counts");
  std::ostringstream os;
  os << kCsvHeader << '\n';
  const double k = static_cast<double>(per_seed.size());
  for (std::size_t i = 0; i < n; ++i) {
    double ep = 0, step = 0, tr = 0, ev = 0, len = 0, adm = 0, elim = 0;
    bool has_eval = true;
    for (const auto& s : per_seed) {
      const auto& r = s[i];
      ep += static_cast<double>(r.episode);
      step += static_cast<double>(r.global_step);
      tr += r.train_return;
      if (r.eval_return) ev += *r.eval_return;
      else has_eval = false;
      len += static_cast<double>(r.length);
      adm += r.mean_admissible;
      elim += static_cast<double>(r.eliminated_valid);
    }
    os << "mean," << format_double(ep / k) << ',' << format_double(step / k) << ',' << format_double(tr / k) << ','
       << (has_eval ? format_double(ev / k) : std::string{}) << ',' << format_double(len / k) << ','
       << format_double(adm / k) << ',' << format_double(elim / k) << '\n';
  }
  return os.str();
}

inline std::string bandit_summary_text(const BanditSimSummary& s, const BanditSimConfig& cfg) {
  std::ostringstream os;
  os << "trials                    " << s.trials << '\n'
     << "false-elimination trials  " << s.false_elimination_trials << '\n'
     << "false-elimination rate    " << format_double(s.false_elimination_rate()) << " (delta = " << format_double(cfg.delta)
     << ")\n"
     << "confidence-failure trials " << s.confidence_failure_trials << '\n'
     << "conditioned trials        " << s.conditioned_trials << '\n'
     << "visit-bound checks        " << s.bound_checks << '\n'
     << "visit-bound violations    " << s.bound_violations << '\n'
     << "max pulls / bound         " << format_double(s.max_bound_ratio) << '\n'
     << "visit-bound verdict       " << (s.bound_violations == 0 ? "holds" : "VIOLATED") << '\n';
  return os.str();
}

struct ExperimentOutput {
  std::vector<std::string> files;
  std::string summary;
};

/// Run every seed (in parallel threads) and write CSVs plus the resolved config.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + cfg.out + (ec ? ": " + ec.message() : ""));

  ExperimentOutput out;
  auto write_file = [&](const std::string& name, const std::string& content) {
    const auto p = (dir / name).string();
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write " + p);
    os << content;
    if (!os) throw Error("write failed: " + p);
    out.files.push_back(p);
  };
  write_file("config.json", to_json(cfg).dump(2) + "\n");

  if (cfg.kind == ExperimentKind::BanditSim) {
    const auto s = run_bandit_sim(cfg.bandit, cfg.trials, cfg.base_seed);
    out.summary = bandit_summary_text(s, cfg.bandit);
    Json j;
    j["trials"] = s.trials;
    j["false_elimination_trials"] = s.false_elimination_trials;
    j["false_elimination_rate"] = s.false_elimination_rate();
    j["confidence_failure_trials"] = s.confidence_failure_trials;
    j["conditioned_trials"] = s.conditioned_trials;
    j["bound_checks"] = s.bound_checks;
    j["bound_violations"] = s.bound_violations;
    j["max_bound_ratio"] = s.max_bound_ratio;
    j["visit_bound_holds"] = s.bound_violations == 0;
    write_file("summary.json", j.dump(2) + "\n");
    write_file("summary.txt", out.summary);
    return out;
  }

  std::vector<std::vector<EpisodeRecord>> per_seed(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(cfg.seeds.size(), std::thread::hardware_concurrency()));
  std::mutex m;
  std::size_t next = 0;
  auto work = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(m);
        if (next == cfg.seeds.size()) return;
        i = next++;
      }
      try {
        per_seed[i] = run_seed(cfg, cfg.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const auto p = (dir / ("seed_" + std::to_string(cfg.seeds[i]) + ".csv")).string();
    write_csv(p, per_seed[i]);
    out.files.push_back(p);
  }
  write_file("aggregate.csv", aggregate_csv(per_seed));

  std::ostringstream sum;
  sum << to_string(cfg.kind) << " / " << to_string(cfg.variant) << ": " << cfg.seeds.size() << " seeds\n";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const auto& rows = per_seed[i];
    if (rows.empty()) continue;
    const auto& last = rows.back();
    sum << "  seed " << cfg.seeds[i] << ": final "
        << (last.eval_return ? "eval return " + format_double(*last.eval_return) : "train return " + format_double(last.train_return))
        << '\n';
  }
  out.summary = sum.str();
  return out;
}

}  // namespace ae
