#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "ae/bandit/eliminator.hpp"

namespace ae {

/// Synthetic realizable elimination problem: a finite set of unit-norm
/// states, k arms of which the first num_valid have expected signal at most
/// ell everywhere and the rest at least u everywhere. Signals are
/// theta_a^T x(s) plus uniform noise on [-R, R] (R-subgaussian).
struct BanditSimConfig {
  std::size_t dim = 8;
  std::size_t num_states = 8;
  std::size_t num_arms = 20;
  std::size_t num_valid = 5;
  std::size_t steps = 5000;
  double noise = 0.1;  // R
  double delta = 0.1;
  double lambda = 0.1;
  double ell = 0.4;
  double u = 0.8;
  BetaMode beta_mode = BetaMode::ExactDet;
  std::vector<std::size_t> checkpoints{500, 1000, 5000};

  void validate() const {
    if (dim == 0 || num_states == 0 || num_states > dim)
      throw ConfigError("bandit-sim: need 1 <= num_states <= dim");
    if (num_valid == 0 || num_valid > num_arms) throw ConfigError("bandit-sim: need 1 <= num_valid <= num_arms");
    if (!(noise >= 0.0 && noise < 0.5)) throw ConfigError("bandit-sim: noise must lie in [0, 0.5)");
    if (!(ell >= noise && u > ell && u <= 1.0 - noise))
      throw ConfigError("bandit-sim: need noise <= ell < u <= 1 - noise so signals stay in [0,1]");
  }

  /// Parameter-norm bound implied by the construction.
  double s_bound() const { return std::sqrt(static_cast<double>(num_states)) * (1.0 - noise); }

  EliminationConfig elimination() const {
    EliminationConfig c;
    c.lambda = lambda;
    c.delta = delta;
    c.r_subgauss = noise;
    c.s_bound = s_bound();
    c.l_context = 1.0;
    c.ell = ell;
    c.u = u;
    c.num_actions = num_arms;
    c.beta_mode = beta_mode;
    return c;
  }
};

struct BanditWorld {
  std::vector<Vector> states;        // unit contexts
  std::vector<Vector> theta_star;    // per arm
  std::vector<std::vector<double>> mean;  // [state][arm]

  bool valid(std::size_t arm, std::size_t num_valid) const { return arm < num_valid; }
};

inline BanditWorld make_bandit_world(const BanditSimConfig& cfg, std::mt19937_64& rng) {
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = gauss(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();

  BanditWorld w;
  for (std::size_t s = 0; s < cfg.num_states; ++s) w.states.push_back(q.col(static_cast<Eigen::Index>(s)));

  std::uniform_real_distribution<double> valid_mean(cfg.noise, cfg.ell);
  std::uniform_real_distribution<double> invalid_mean(cfg.u, 1.0 - cfg.noise);
  w.mean.assign(cfg.num_states, std::vector<double>(cfg.num_arms, 0.0));
  for (std::size_t a = 0; a < cfg.num_arms; ++a) {
    Vector theta = Vector::Zero(d);
    for (std::size_t s = 0; s < cfg.num_states; ++s) {
      const double m = a < cfg.num_valid ? valid_mean(rng) : invalid_mean(rng);
      theta += m * w.states[s];
    }
    // Recompute means from theta so rounding matches what the learner sees.
    for (std::size_t s = 0; s < cfg.num_states; ++s) w.mean[s][a] = theta.dot(w.states[s]);
    w.theta_star.push_back(std::move(theta));
  }
  return w;
}

struct BanditTrialResult {
  bool false_elimination = false;   // some valid arm eliminated at some step
  bool confidence_failure = false;  // |theta_hat^T x - theta*^T x| > width for some arm
  std::size_t bound_checks = 0;
  std::size_t bound_violations = 0;
  double max_bound_ratio = 0.0;  // max pulls / bound over checks
  std::vector<std::vector<std::size_t>> pulls_at_checkpoint;  // [checkpoint][arm]
};

/// One trial of forced uniform play over the admissible set.
inline BanditTrialResult run_bandit_trial(const BanditSimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  const BanditWorld world = make_bandit_world(cfg, rng);
  const EliminationConfig ecfg = cfg.elimination();
  auto arms = make_arms(cfg.num_arms, cfg.dim, cfg.lambda);

  std::vector<std::vector<std::size_t>> state_pulls(cfg.num_states, std::vector<std::size_t>(cfg.num_arms, 0));
  std::uniform_int_distribution<std::size_t> pick_state(0, cfg.num_states - 1);
  std::uniform_real_distribution<double> noise(-cfg.noise, cfg.noise);
  const double gap2 = (cfg.u - cfg.ell) * (cfg.u - cfg.ell);

  BanditTrialResult res;
  std::vector<std::size_t> admissible;
  admissible.reserve(cfg.num_arms);

  for (std::size_t t = 1; t <= cfg.steps; ++t) {
    const std::size_t s = pick_state(rng);
    const Vector& x = world.states[s];

    admissible.clear();
    std::size_t fallback = 0;
    double fallback_lower = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < cfg.num_arms; ++a) {
      const auto sc = score(ecfg, arms[a], x);
      if (std::abs(sc.mean - world.mean[s][a]) > sc.width) res.confidence_failure = true;
      if (sc.eliminated) {
        if (a < cfg.num_valid) res.false_elimination = true;
      } else {
        admissible.push_back(a);
      }
      if (sc.lower() < fallback_lower) {
        fallback_lower = sc.lower();
        fallback = a;
      }
    }
    if (admissible.empty()) admissible.push_back(fallback);

    std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
    const std::size_t a = admissible[pick(rng)];
    const double e = std::clamp(world.mean[s][a] + (cfg.noise > 0.0 ? noise(rng) : 0.0), 0.0, 1.0);
    arms[a].observe(x, e, 1.0);
    ++state_pulls[s][a];

    if (std::find(cfg.checkpoints.begin(), cfg.checkpoints.end(), t) != cfg.checkpoints.end()) {
      std::vector<std::size_t> per_arm(cfg.num_arms, 0);
      for (std::size_t arm = 0; arm < cfg.num_arms; ++arm) {
        per_arm[arm] = arms[arm].pulls();
        if (arm < cfg.num_valid) continue;
        const double bound = 4.0 * beta(ecfg, arms[arm], t) / gap2 + 1.0;
        for (std::size_t st = 0; st < cfg.num_states; ++st) {
          ++res.bound_checks;
          const double pulls = static_cast<double>(state_pulls[st][arm]);
          res.max_bound_ratio = std::max(res.max_bound_ratio, pulls / bound);
          if (pulls > bound) ++res.bound_violations;
        }
      }
      res.pulls_at_checkpoint.push_back(std::move(per_arm));
    }
  }
  return res;
}

struct BanditSimSummary {
  std::size_t trials = 0;
  std::size_t false_elimination_trials = 0;
  std::size_t confidence_failure_trials = 0;
  std::size_t conditioned_trials = 0;  // trials without confidence failure
  std::size_t bound_checks = 0;
  std::size_t bound_violations = 0;
  double max_bound_ratio = 0.0;

  double false_elimination_rate() const {
    return trials ? static_cast<double>(false_elimination_trials) / static_cast<double>(trials) : 0.0;
  }
};

inline BanditSimSummary run_bandit_sim(const BanditSimConfig& cfg, std::size_t trials, std::uint64_t base_seed) {
  BanditSimSummary sum;
  for (std::size_t i = 0; i < trials; ++i) {
    const auto r = run_bandit_trial(cfg, base_seed + i);
    ++sum.trials;
    sum.false_elimination_trials += r.false_elimination;
    sum.confidence_failure_trials += r.confidence_failure;
    if (!r.confidence_failure) {
      ++sum.conditioned_trials;
      sum.bound_checks += r.bound_checks;
      sum.bound_violations += r.bound_violations;
      sum.max_bound_ratio = std::max(sum.max_bound_ratio, r.max_bound_ratio);
    }
  }
  return sum;
}

}  // namespace ae
