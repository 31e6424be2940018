#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ae/error.hpp"
#include "ae/linalg/spd_matrix.hpp"

namespace ae {

enum class BetaMode { ExactDet, SimplifiedDim, Fixed };

/// Confidence-bound parameters for linear-bandit action elimination.
struct EliminationConfig {
  double lambda = 1.0;
  double delta = 0.1;
  double r_subgauss = 0.1;
  double s_bound = 1.0;
  double l_context = 1.0;
  double ell = 0.5;
  std::optional<double> u;  // only used by bound checks, never by decisions
  std::size_t num_actions = 1;
  BetaMode beta_mode = BetaMode::ExactDet;
  double fixed_beta = 0.5;

  /// Per-arm failure probability after the union bound over actions.
  double delta_per_arm() const { return delta / static_cast<double>(num_actions); }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("EliminationConfig: " + m); };
    if (!(lambda > 0.0)) fail("lambda must be positive");
    if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0,1)");
    if (!(r_subgauss >= 0.0 && r_subgauss <= 1.0)) fail("r_subgauss must lie in [0,1]");
    if (!(s_bound > 0.0)) fail("s_bound must be positive");
    if (!(l_context > 0.0)) fail("l_context must be positive");
    if (!(ell >= 0.0 && ell < 1.0)) fail("ell must lie in [0,1)");
    if (u && !(*u > ell && *u <= 1.0)) fail("u must lie in (ell,1]");
    if (num_actions == 0) fail("num_actions must be positive");
    if (beta_mode == BetaMode::Fixed && !(fixed_beta >= 0.0)) fail("fixed beta must be nonnegative");
  }

  /// Configuration whose admissible set is always the full action set.
  static EliminationConfig disabled(std::size_t num_actions) {
    EliminationConfig c;
    c.num_actions = num_actions;
    c.beta_mode = BetaMode::Fixed;
    c.fixed_beta = std::numeric_limits<double>::infinity();
    c.l_context = std::numeric_limits<double>::infinity();
    return c;
  }
};

/// Ridge-regression state of one action: V_a, b_a and the cached estimate.
class ArmModel {
 public:
  ArmModel(std::size_t dim, double lambda) : design_(dim, lambda), b_(Vector::Zero(static_cast<Eigen::Index>(dim))) {}

  std::size_t dim() const { return design_.dim(); }
  const SpdMatrix& design() const { return design_; }
  const Vector& b() const { return b_; }
  std::size_t pulls() const { return design_.update_count(); }

  /// Record elimination signal e in [0,1] observed at context x.
  void observe(const Vector& x, double e, double l_context = std::numeric_limits<double>::infinity()) {
    if (!(e >= 0.0 && e <= 1.0)) throw InvalidArgument("ArmModel::observe: signal outside [0,1]");
    if (!x.allFinite()) throw InvalidArgument("ArmModel::observe: non-finite context");
    if (x.norm() > l_context * (1.0 + 1e-12))
      throw InvalidArgument("ArmModel::observe: context norm exceeds the configured bound L");
    design_.rank1_update(x);
    b_.noalias() += e * x;
    theta_.reset();
  }

  /// theta_hat = V^{-1} b, recomputed lazily after observations.
  const Vector& theta_hat() const {
    if (!theta_) theta_ = design_.solve(b_);
    return *theta_;
  }

  static ArmModel from_parts(SpdMatrix design, Vector b) {
    ArmModel arm(design.dim(), design.lambda());
    if (static_cast<std::size_t>(b.size()) != design.dim())
      throw InvalidArgument("ArmModel::from_parts: b has wrong dimension");
    arm.design_ = std::move(design);
    arm.b_ = std::move(b);
    return arm;
  }

 private:
  SpdMatrix design_;
  Vector b_;
  mutable std::optional<Vector> theta_;
};

/// Squared confidence radius beta for one arm.
///
/// ExactDet:      sqrt(beta) = R sqrt(log det V - d log lambda + 2 log(1/delta')) + sqrt(lambda) S
/// SimplifiedDim: sqrt(beta) = R sqrt(d log((1 + t L^2 / lambda) / delta'))      + sqrt(lambda) S
/// with delta' = delta / num_actions.
inline double beta(const EliminationConfig& cfg, const ArmModel& arm, std::size_t t) {
  const double sqrt_lambda_s = std::sqrt(cfg.lambda) * cfg.s_bound;
  const double d = static_cast<double>(arm.dim());
  const double dt = cfg.delta_per_arm();
  double inner = 0.0;
  switch (cfg.beta_mode) {
    case BetaMode::Fixed:
      return cfg.fixed_beta;
    case BetaMode::ExactDet:
      inner = arm.design().log_det() - d * std::log(cfg.lambda) + 2.0 * std::log(1.0 / dt);
      break;
    case BetaMode::SimplifiedDim: {
      const double l2 = cfg.l_context * cfg.l_context;
      inner = d * std::log((1.0 + static_cast<double>(t) * l2 / cfg.lambda) / dt);
      break;
    }
  }
  const double root = cfg.r_subgauss * std::sqrt(std::max(0.0, inner)) + sqrt_lambda_s;
  return root * root;
}

inline double beta(const EliminationConfig& cfg, const ArmModel& arm) {
  return beta(cfg, arm, arm.pulls());
}

struct EliminationScore {
  double mean = 0.0;
  double width = 0.0;
  bool eliminated = false;

  double lower() const { return mean - width; }
};

/// Width sqrt(beta * q); an infinite beta yields an infinite width even at q == 0.
inline double confidence_width(double beta_value, double q) {
  if (std::isinf(beta_value)) return std::numeric_limits<double>::infinity();
  return std::sqrt(beta_value * q);
}

/// Eliminate when mean - width > ell, using data observed strictly before x.
inline EliminationScore score(const EliminationConfig& cfg, const ArmModel& arm, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != arm.dim())
    throw InvalidArgument("score: context dimension mismatch");
  EliminationScore s;
  s.mean = arm.theta_hat().dot(x);
  s.width = confidence_width(beta(cfg, arm), arm.design().quad_form(x));
  s.eliminated = s.mean - s.width > cfg.ell;
  return s;
}

/// Indices of arms not eliminated at x. Never empty: when every arm is
/// eliminated, the arm with the smallest lower bound is returned alone.
inline std::vector<std::size_t> admissible_set(const EliminationConfig& cfg,
                                               const std::vector<ArmModel>& arms,
                                               const Vector& x) {
  if (arms.size() != cfg.num_actions)
    throw InvalidArgument("admissible_set: arm count differs from num_actions");
  std::vector<std::size_t> out;
  out.reserve(arms.size());
  std::size_t best = 0;
  double best_lower = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const auto s = score(cfg, arms[a], x);
    if (!s.eliminated) out.push_back(a);
    if (s.lower() < best_lower) {
      best_lower = s.lower();
      best = a;
    }
  }
  if (out.empty()) out.push_back(best);
  return out;
}

inline std::vector<ArmModel> make_arms(std::size_t count, std::size_t dim, double lambda) {
  std::vector<ArmModel> arms;
  arms.reserve(count);
  for (std::size_t i = 0; i < count; ++i) arms.emplace_back(dim, lambda);
  return arms;
}

}  // namespace ae
