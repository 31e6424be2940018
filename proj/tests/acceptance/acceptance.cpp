// End-to-end checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ae/bandit/simulation.hpp"
#include "ae/harness/experiment.hpp"
#include "ae/harness/plot.hpp"
#include "ae/linalg/spd_matrix.hpp"
#include "ae/tabular/gridworld_runner.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "reference_dqn.hpp"
#include "zork_search.hpp"

using namespace ae;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1, 2

Outcome sherman_morrison() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 8), len(1, 500);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.01, 10.0);
  double worst = 0.0;
  for (int seq = 0; seq < 100; ++seq) {
    const int d = dim(rng), n = len(rng);
    SpdMatrix m(static_cast<std::size_t>(d), lam(rng));
    for (int t = 0; t < n; ++t) {
      Vector x(d);
      for (int i = 0; i < d; ++i) x(i) = g(rng);
      m.rank1_update(x);
    }
    oracle::Dense v(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(d)));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) v[i][j] = m.v()(i, j);
    const auto inv = oracle::inverse(v);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) worst = std::max(worst, std::abs(inv[i][j] - m.v_inv()(i, j)));
  }
  return {worst < 1e-9, fmt("max |inverse error| = %.3g over 100 sequences", worst)};
}

Outcome quad_form_bound() {
  Vector x(4);
  x << 0.5, -0.5, 0.5, 0.5;
  SpdMatrix m(4, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 1; t <= 10000; ++t) {
    m.rank1_update(x);
    worst = std::max(worst, m.quad_form(x) - 1.0 / t);
  }
  return {worst <= 1e-12, fmt("max (quad_form - 1/T) = %.3g for T in [1, 1e4]", worst)};
}

// ---------------------------------------------------------------- 3, 4

BanditSimSummary g_bandit;  // shared by 3 and the bound half of 4
bool g_bandit_done = false;

const BanditSimSummary& bandit_summary() {
  if (!g_bandit_done) {
    BanditSimConfig c;  // d=8, k=20, 5 valid, R=0.1, delta=0.1, ExactDet, u=0.8, ell=0.4
    g_bandit = run_bandit_sim(c, 1000, 1);
    g_bandit_done = true;
  }
  return g_bandit;
}

Outcome delta_correctness() {
  const auto& s = bandit_summary();
  return {s.false_elimination_rate() <= 0.12,
          fmt("false-elimination rate %.4f (%zu/%zu trials), %zu trials with a confidence failure", s.false_elimination_rate(),
              s.false_elimination_trials, s.trials, s.confidence_failure_trials)};
}

Outcome visit_bound() {
  const auto& s = bandit_summary();
  BanditSimConfig quiet;
  quiet.noise = 0.0;
  quiet.steps = 10000;
  quiet.checkpoints = {5000, 10000};
  std::size_t frozen = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto r = run_bandit_trial(quiet, seed);
    bool same = true;
    for (std::size_t a = quiet.num_valid; a < quiet.num_arms; ++a) same = same && r.pulls_at_checkpoint[0][a] == r.pulls_at_checkpoint[1][a];
    frozen += same;
  }
  return {s.bound_violations == 0 && s.bound_checks > 0 && frozen == 100,
          fmt("%zu violations in %zu checks over %zu conditioned trials (max pulls/bound %.3f); noiseless: invalid pulls frozen "
              "5000->10000 in %zu/100 seeds",
              s.bound_violations, s.bound_checks, s.conditioned_trials, s.max_bound_ratio, frozen)};
}

// ---------------------------------------------------------------- 5, 6

SmoothedSeries grid_curve(const GridConfig& g, EliminationMode mode, std::uint64_t episodes, const char* label) {
  TabularConfig t;
  t.elimination_mode = mode;
  std::vector<std::vector<EpisodeRecord>> per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    per_seed.emplace_back();
    run_gridworld_tabular(g, t, seed, episodes, [&](const EpisodeRecord& r) { per_seed.back().push_back(r); });
  }
  return smooth(make_series(label, per_seed, Metric::TrainReturn), 200);
}

// Episodes needed to reach `level` (x is the 0-based episode index), or
// nullopt if the run never gets there.
std::optional<double> episodes_to(const SmoothedSeries& s, double level) {
  const auto x = first_crossing(s, level);
  if (!x) return std::nullopt;
  return *x + 1.0;
}

Outcome grid_ordering() {
  const GridConfig g;  // 30x30, K=10, T=150
  const std::uint64_t episodes = 30000;
  const auto van = grid_curve(g, EliminationMode::Off, episodes, "vanilla");
  const auto ae = grid_curve(g, EliminationMode::CountConfidence, episodes, "ae");
  const auto orc = grid_curve(g, EliminationMode::Oracle, episodes, "oracle");
  const double fv = van.mean.back(), fa = ae.mean.back(), fo = orc.mean.back();
  const bool ordered = fv <= fa && fa <= fo;
  // Returns are negative; measure "90% of the oracle" on (R + T) / T.
  const double T = g.horizon;
  const double level = -T + 0.9 * (fo + T);
  const auto xa = episodes_to(ae, level), xv = episodes_to(van, level);
  // A vanilla run that never gets there needs more than `episodes`.
  const bool faster = xa && (xv ? *xa <= 0.6 * *xv : *xa <= 0.6 * static_cast<double>(episodes));
  auto show = [](const std::optional<double>& x) { return x ? fmt("%.0f", *x) : std::string("never"); };
  return {ordered && faster, fmt("final smoothed return vanilla %.1f, ae %.1f, oracle %.1f (%s); level %.1f reached by ae at %s, "
                                 "vanilla at %s (need ae <= 60%%)",
                                 fv, fa, fo, ordered ? "ordered" : "NOT ordered", level, show(xa).c_str(), show(xv).c_str())};
}

Outcome category_growth() {
  // Horizon 300 as in the paper's category sweep, so vanilla gets far enough to measure.
  const std::uint64_t episodes = 30000;
  double ratio[2] = {0, 0};
  std::string detail;
  const int ks[2] = {10, 25};
  for (int i = 0; i < 2; ++i) {
    GridConfig g;
    g.k_categories = ks[i];
    g.horizon = 300;
    const auto van = grid_curve(g, EliminationMode::Off, episodes, "vanilla");
    const auto ae = grid_curve(g, EliminationMode::CountConfidence, episodes, "ae");
    // Threshold: vanilla's own final smoothed return.
    const double level = van.mean.back();
    const double xv = *episodes_to(van, level);
    const auto xa = episodes_to(ae, level);
    ratio[i] = xa ? xv / *xa : 0.0;
    detail += fmt("K=%d: level %.1f, vanilla %.0f ep, ae %s ep, ratio %.2f; ", ks[i], level, xv,
                  xa ? fmt("%.0f", *xa).c_str() : "never", ratio[i]);
  }
  return {ratio[1] > ratio[0], detail + (ratio[1] > ratio[0] ? "ratio grows with K" : "ratio does NOT grow with K")};
}

// ---------------------------------------------------------------- 7

Outcome tabular_convergence() {
  GridConfig g;
  g.width = 5;
  g.height = 5;
  g.rooms = false;
  g.k_categories = 1;
  g.p_correct_same = 1.0;
  const GridWorld w(g);
  TabularConfig t;
  t.elimination_mode = EliminationMode::Off;
  t.epsilon = t.epsilon_final = 1.0;  // off-policy: uniform behaviour covers every pair
  TabularAgent agent(w.num_states(), w.num_actions(), t);
  std::mt19937_64 rng(11);
  auto s = w.reset();
  for (int step = 0; step < 200000; ++step) {
    const std::size_t si = w.state_index(s.cell);
    const int a = agent.select_action(si, rng);
    const auto r = w.step(s, a, rng);
    agent.update({si, a, r.reward, static_cast<double>(r.elim), w.state_index(r.next.cell), r.terminal});
    s = r.done ? w.reset() : r.next;
  }
  std::vector<std::vector<std::vector<oracle::Outcome>>> mdp(w.num_states());
  for (std::size_t i = 0; i < w.num_states(); ++i) {
    mdp[i].resize(4);
    if (w.cell_of(i) == w.goal()) continue;
    for (int d = 0; d < 4; ++d) {
      const Cell n = w.move(w.cell_of(i), static_cast<Direction>(d));
      mdp[i][static_cast<std::size_t>(d)] = {{1.0, w.state_index(n), -1.0, n == w.goal()}};
    }
  }
  const auto q = oracle::q_value_iteration(mdp, 1.0);
  double err = 0.0;
  for (std::size_t i = 0; i < w.num_states(); ++i) {
    if (w.cell_of(i) == w.goal()) continue;
    for (int a = 0; a < 4; ++a) err = std::max(err, std::abs(agent.q(i, a) - q[i][static_cast<std::size_t>(a)]));
  }
  return {err < 0.1, fmt("max |Q - Q*| = %.4g after 2e5 steps", err)};
}

// ---------------------------------------------------------------- 8

Outcome gradients() {
  std::mt19937_64 rng(88);
  const std::size_t k = 109;
  double worst = 0.0;
  for (int point = 0; point < 10; ++point) {
    nn::Net::Batch xs;
    std::vector<nn::SparseVec> store(4);
    std::uniform_int_distribution<std::uint32_t> idx(0, 511);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (auto& s : store) {
      std::set<std::uint32_t> used;
      while (used.size() < 12) used.insert(idx(rng));
      for (auto i : used) {
        s.idx.push_back(i);
        s.val.push_back(val(rng));
      }
    }
    for (const auto& s : store) xs.push_back(&s);
    std::uniform_int_distribution<std::size_t> act(0, k - 1);
    std::vector<std::size_t> actions;
    std::vector<double> y;
    for (std::size_t j = 0; j < store.size(); ++j) {
      actions.push_back(act(rng));
      y.push_back(3.0 * val(rng));
    }
    const nn::Net q(nn::layer_sizes(512, {128, 128}, k), rng());
    const nn::Net aen(nn::layer_sizes(512, {128, 32}, k), rng());
    worst = std::max(worst, oracle::max_gradient_error(q, xs, actions, y, rng));
    worst = std::max(worst, oracle::max_gradient_error(aen, xs, actions, y, rng));
  }
  return {worst < 1e-4, fmt("max relative error %.3g over 10 points, both networks", worst)};
}

// ---------------------------------------------------------------- 9, 10, 11

const zork::Game& egg() {
  static const zork::Game g(zork::load_world(resolve_world_path("egg")));
  return g;
}

Outcome equivalence() {
  const auto set = egg().build_action_set(100, false);
  nn::AgentConfig cfg;
  cfg.total_steps = 5000;
  cfg.eval_interval = 0;
  std::size_t mismatches = 0, compared = 0;
  for (const bool aen_running : {true, false}) {
    cfg.use_aen = aen_running;
    cfg.beta = std::numeric_limits<double>::infinity();
    auto log = std::make_shared<std::vector<oracle::StepLog>>();
    nn::run_training<oracle::LoggingEnv<zork::ZorkEnv>>(oracle::LoggingEnv<zork::ZorkEnv>(zork::ZorkEnv(egg(), set), log), cfg, 17,
                                                        [](const EpisodeRecord&) {});
    const auto ref = oracle::reference_dqn(zork::ZorkEnv(egg(), set), cfg, 17);
    compared += ref.size();
    if (log->size() != ref.size()) {
      mismatches += std::max(log->size(), ref.size());
      continue;
    }
    for (std::size_t t = 0; t < ref.size(); ++t) mismatches += !((*log)[t] == ref[t]);
  }
  return {mismatches == 0 && compared == 10000,
          fmt("%zu mismatching steps out of %zu (AEN trained with beta=inf, and no AEN)", mismatches, compared)};
}

SmoothedSeries egg_curve(bool use_aen) {
  const auto set = egg().build_action_set(100, false);
  nn::AgentConfig cfg;  // 2e5 steps, eval every 1000
  cfg.use_aen = use_aen;
  std::vector<std::vector<EpisodeRecord>> per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    per_seed.emplace_back();
    nn::run_training<zork::ZorkEnv>(zork::ZorkEnv(egg(), set), cfg, seed, [&](const EpisodeRecord& r) {
      if (r.eval_return) per_seed.back().push_back(r);
    });
  }
  return smooth(make_series(use_aen ? "ae-dqn" : "dqn", per_seed, Metric::EvalReturn), 10);
}

Outcome egg_speedup() {
  const auto ae = egg_curve(true);
  const auto van = egg_curve(false);
  const auto xa = first_crossing(ae, 85.0), xv = first_crossing(van, 85.0);
  const double horizon_steps = ae.x.back();
  const bool faster = xa && (xv ? *xa <= 0.6 * *xv : *xa <= 0.6 * horizon_steps);
  double worst_lead = -std::numeric_limits<double>::infinity();
  std::size_t over = 0;
  for (std::size_t i = 0; i < ae.x.size(); ++i) {
    const double lead = van.mean[i] - ae.mean[i];
    worst_lead = std::max(worst_lead, lead - std::max(ae.band[i], van.band[i]));
    over += lead > std::max(ae.band[i], van.band[i]);
  }
  auto show = [](const std::optional<double>& x) { return x ? fmt("%.0f", *x) : std::string("never"); };
  return {faster && over == 0,
          fmt("smoothed eval >= 85 at step %s (ae-dqn) vs %s (dqn); final %.1f vs %.1f; vanilla ahead by more than a band at "
              "%zu checkpoints",
              show(xa).c_str(), show(xv).c_str(), ae.mean.back(), van.mean.back(), over)};
}

Outcome egg_soundness() {
  const auto set = egg().build_action_set(0, true);  // every verb x dictionary word, plus the fixed commands
  const auto rep =
      oracle::check_soundness(egg(), set.commands, 8, [](const zork::StepResult& r) { return r.terminal && !r.next.dead; });
  std::string detail = fmt("%zu commands, %zu states, %zu expansions, optimum %d, %zu optimal moves, %zu violations",
                           set.commands.size(), rep.states, rep.expansions, rep.optimum, rep.optimal_moves, rep.violations.size());
  if (!rep.violations.empty()) detail += "; first: " + rep.violations.front();
  return {rep.optimum == 6 && rep.optimal_moves > 0 && rep.violations.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "Sherman-Morrison inverse matches direct inverse", sherman_morrison},
      {2, "quadratic form of a repeated context is at most 1/T", quad_form_bound},
      {3, "valid-arm false-elimination rate at most delta + 0.02", delta_correctness},
      {4, "invalid-arm visit bound, and frozen pulls without noise", visit_bound},
      {5, "grid world: vanilla <= AE <= oracle, and AE reaches the level in <= 60% of vanilla's episodes", grid_ordering},
      {6, "grid world: AE speedup grows from K=10 to K=25", category_growth},
      {7, "tabular Q-learning converges to value iteration", tabular_convergence},
      {8, "MLP gradients match finite differences", gradients},
      {9, "elimination disabled: trainer matches reference DQN step for step", equivalence},
      {10, "egg quest: AE-DQN reaches 85 in <= 60% of DQN's steps and is never beaten by more than a band", egg_speedup},
      {11, "egg quest: no command on a shortest winning route is flagged", egg_soundness},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << " -- " << o.detail << " (" << fmt("%.1f", secs)
              << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
