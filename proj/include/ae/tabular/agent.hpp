#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "ae/error.hpp"

namespace ae {

enum class EliminationMode { Off, CountConfidence, Oracle };

/// How the count-based confidence radius grows with total visits.
enum class RadiusForm {
  Uct,        // sqrt(c * ln(sum_a N(s,a)) / N(s,a))
  AsPrinted,  // sqrt(c * sum_a N(s,a) / N(s,a))
};

struct TabularConfig {
  double ell = 0.5;
  double epsilon = 0.1;
  double epsilon_final = 0.1;          // linear decay target
  std::size_t epsilon_decay_steps = 0; // 0 keeps epsilon constant
  double gamma = 1.0;
  double lr_exponent = 0.51;            // alpha = 1 / N(s,a)^omega
  EliminationMode elimination_mode = EliminationMode::CountConfidence;
  RadiusForm radius_form = RadiusForm::Uct;
  double radius_scale = 2.0;

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0) || !(epsilon_final >= 0.0 && epsilon_final <= 1.0))
      throw ConfigError("tabular: epsilon must lie in [0,1]");
    if (!(lr_exponent > 0.5 && lr_exponent <= 1.0)) throw ConfigError("tabular: lr_exponent must lie in (0.5,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("tabular: gamma must lie in [0,1]");
    if (!(radius_scale > 0.0)) throw ConfigError("tabular: radius_scale must be positive");
  }
};

struct TabularTransition {
  std::size_t state = 0;
  int action = 0;
  double reward = 0.0;
  double elim = 0.0;
  std::size_t next_state = 0;
  bool terminal = false;
};

/// Q-learning over a finite MDP with per-(s,a) count-based elimination.
class TabularAgent {
 public:
  /// Ground-truth validity, consulted only in Oracle mode.
  using ValidityOracle = std::function<bool(std::size_t state, int action)>;

  TabularAgent(std::size_t num_states, int num_actions, TabularConfig cfg, ValidityOracle oracle = {})
      : num_states_(num_states), num_actions_(num_actions), cfg_(cfg), oracle_(std::move(oracle)) {
    cfg_.validate();
    if (num_states == 0 || num_actions <= 0) throw ConfigError("tabular: empty state or action space");
    if (cfg_.elimination_mode == EliminationMode::Oracle && !oracle_)
      throw ConfigError("tabular: Oracle mode requires a validity oracle");
    const std::size_t n = num_states * static_cast<std::size_t>(num_actions);
    q_.assign(n, 0.0);
    visits_.assign(n, 0);
    elim_sum_.assign(n, 0.0);
    state_visits_.assign(num_states, 0);
  }

  const TabularConfig& config() const { return cfg_; }
  int num_actions() const { return num_actions_; }
  std::size_t num_states() const { return num_states_; }

  double q(std::size_t s, int a) const { return q_[idx(s, a)]; }
  double& q_mut(std::size_t s, int a) { return q_[idx(s, a)]; }
  std::size_t visits(std::size_t s, int a) const { return visits_[idx(s, a)]; }
  std::size_t state_visits(std::size_t s) const { return state_visits_[s]; }
  double elim_mean(std::size_t s, int a) const {
    const auto n = visits(s, a);
    return n ? elim_sum_[idx(s, a)] / static_cast<double>(n) : 0.0;
  }
  std::size_t steps() const { return steps_; }

  double current_epsilon() const {
    if (cfg_.epsilon_decay_steps == 0) return cfg_.epsilon;
    const double frac = std::min(1.0, static_cast<double>(steps_) / static_cast<double>(cfg_.epsilon_decay_steps));
    return cfg_.epsilon + frac * (cfg_.epsilon_final - cfg_.epsilon);
  }

  /// Confidence radius; unvisited pairs have infinite radius.
  double radius(std::size_t s, int a) const {
    const auto n = visits(s, a);
    if (n == 0) return std::numeric_limits<double>::infinity();
    const double total = static_cast<double>(state_visits_[s]);
    const double growth = cfg_.radius_form == RadiusForm::Uct ? std::log(total) : total;
    return std::sqrt(cfg_.radius_scale * growth / static_cast<double>(n));
  }

  bool eliminated(std::size_t s, int a) const {
    switch (cfg_.elimination_mode) {
      case EliminationMode::Off: return false;
      case EliminationMode::Oracle: return !oracle_(s, a);
      case EliminationMode::CountConfidence: {
        const auto n = visits(s, a);
        return n > 0 && count_test(elim_mean(s, a), static_cast<double>(n), growth_term(s));
      }
    }
    return false;
  }

  /// Admissible actions at s, falling back to all actions when none survive.
  void admissible(std::size_t s, std::vector<int>& out) const {
    out.clear();
    if (cfg_.elimination_mode == EliminationMode::CountConfidence) {
      const double cg = growth_term(s);  // hoisted out of the per-action test
      const std::size_t base = idx(s, 0);
      for (int a = 0; a < num_actions_; ++a) {
        const auto n = visits_[base + static_cast<std::size_t>(a)];
        const bool gone =
            n > 0 && count_test(elim_sum_[base + static_cast<std::size_t>(a)] / static_cast<double>(n),
                                static_cast<double>(n), cg);
        if (!gone) out.push_back(a);
      }
    } else {
      for (int a = 0; a < num_actions_; ++a)
        if (!eliminated(s, a)) out.push_back(a);
    }
    if (out.empty())
      for (int a = 0; a < num_actions_; ++a) out.push_back(a);
  }

  std::vector<int> admissible(std::size_t s) const {
    std::vector<int> out;
    admissible(s, out);
    return out;
  }

  /// Epsilon-greedy over the admissible set, random tie-breaking.
  template <typename Rng>
  int select_action(std::size_t s, Rng& rng) {
    admissible(s, scratch_);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < current_epsilon()) {
      std::uniform_int_distribution<std::size_t> pick(0, scratch_.size() - 1);
      return scratch_[pick(rng)];
    }
    double best = -std::numeric_limits<double>::infinity();
    ties_.clear();
    for (int a : scratch_) {
      const double v = q(s, a);
      if (v > best) {
        best = v;
        ties_.clear();
        ties_.push_back(a);
      } else if (v == best) {
        ties_.push_back(a);
      }
    }
    if (ties_.size() == 1) return ties_.front();
    std::uniform_int_distribution<std::size_t> pick(0, ties_.size() - 1);
    return ties_[pick(rng)];
  }

  /// Max of Q over the admissible set at s.
  double admissible_max(std::size_t s) {
    admissible(s, scratch_);
    double best = -std::numeric_limits<double>::infinity();
    for (int a : scratch_) best = std::max(best, q(s, a));
    return best;
  }

  void update(const TabularTransition& t) {
    if (t.state >= num_states_ || t.next_state >= num_states_ || t.action < 0 || t.action >= num_actions_)
      throw InvalidArgument("tabular: transition out of range");
    if (!std::isfinite(t.reward) || !(t.elim >= 0.0 && t.elim <= 1.0))
      throw InvalidArgument("tabular: non-finite reward or signal outside [0,1]");
    const auto i = idx(t.state, t.action);
    ++visits_[i];
    ++state_visits_[t.state];
    elim_sum_[i] += t.elim;
    ++steps_;

    const double alpha = 1.0 / std::pow(static_cast<double>(visits_[i]), cfg_.lr_exponent);
    const double bootstrap = t.terminal ? 0.0 : cfg_.gamma * admissible_max(t.next_state);
    q_[i] += alpha * (t.reward + bootstrap - q_[i]);
  }

 private:
  double growth_term(std::size_t s) const {
    const double total = static_cast<double>(state_visits_[s]);
    return cfg_.radius_scale * (cfg_.radius_form == RadiusForm::Uct ? std::log(total) : total);
  }
  // mean - sqrt(c g / n) > ell
  bool count_test(double mean, double n, double cg) const { return mean - std::sqrt(cg / n) > cfg_.ell; }

  std::size_t idx(std::size_t s, int a) const { return s * static_cast<std::size_t>(num_actions_) + static_cast<std::size_t>(a); }

  std::size_t num_states_;
  int num_actions_;
  TabularConfig cfg_;
  ValidityOracle oracle_;
  std::vector<double> q_;
  std::vector<std::size_t> visits_;
  std::vector<double> elim_sum_;
  std::vector<std::size_t> state_visits_;
  std::size_t steps_ = 0;
  std::vector<int> scratch_;
  std::vector<int> ties_;
};

}  // namespace ae
