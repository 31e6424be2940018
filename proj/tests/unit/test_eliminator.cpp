#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ae/bandit/checkpoint.hpp"
#include "ae/bandit/eliminator.hpp"
#include "ae/bandit/simulation.hpp"

using namespace ae;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Vector unit_random(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector x(d);
  for (int i = 0; i < d; ++i) x(i) = n(rng);
  return x.normalized();
}

EliminationConfig fixed_cfg(double beta, double ell, std::size_t k = 1, double lambda = 1.0) {
  EliminationConfig c;
  c.beta_mode = BetaMode::Fixed;
  c.fixed_beta = beta;
  c.ell = ell;
  c.num_actions = k;
  c.lambda = lambda;
  return c;
}

// One-dimensional arm with n observations of x=1, all with signal e.
ArmModel scalar_arm(int n, double e) {
  ArmModel arm(1, 1.0);
  for (int i = 0; i < n; ++i) arm.observe(vec({1.0}), e);
  return arm;
}

}  // namespace

TEST(ArmModel, ClosedFormRidgeAfterOneObservation) {
  ArmModel arm(2, 1.0);
  arm.observe(vec({1.0, 0.0}), 1.0);
  EXPECT_NEAR(arm.theta_hat()(0), 0.5, 1e-15);
  EXPECT_NEAR(arm.theta_hat()(1), 0.0, 1e-15);
  EXPECT_EQ(arm.pulls(), 1u);
}

TEST(ArmModel, ZeroSignalsNeverPredictPositive) {
  std::mt19937_64 rng(1);
  ArmModel arm(4, 0.5);
  for (int i = 0; i < 200; ++i) {
    const Vector x = unit_random(rng, 4);
    arm.observe(x, 0.0);
    EXPECT_LE(arm.theta_hat().dot(unit_random(rng, 4)), 1e-12);
    EXPECT_GE(arm.theta_hat().dot(x), -1e-12);
  }
}

TEST(ArmModel, EstimateErrorShrinksWithData) {
  // Known theta*, uniform noise on [-R, R] (R-subgaussian); mean error over
  // seeds at 10, 100 and 1000 samples must decrease.
  const int d = 4;
  const double R = 0.1;
  double err[3] = {0, 0, 0};
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> noise(-R, R);
    Vector theta = Vector::Constant(d, 0.2);
    ArmModel arm(d, 1.0);
    for (int t = 1; t <= 1000; ++t) {
      Vector x = unit_random(rng, d).cwiseAbs();
      const double e = std::clamp(theta.dot(x) + noise(rng), 0.0, 1.0);
      arm.observe(x, e, 1.0);
      if (t == 10) err[0] += (arm.theta_hat() - theta).norm();
      if (t == 100) err[1] += (arm.theta_hat() - theta).norm();
      if (t == 1000) err[2] += (arm.theta_hat() - theta).norm();
    }
  }
  EXPECT_GT(err[0], err[1]);
  EXPECT_GT(err[1], err[2]);
}

TEST(ArmModel, ThetaSolvesNormalEquations) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ArmModel arm(6, 0.3);
  for (int i = 0; i < 700; ++i) {
    arm.observe(unit_random(rng, 6), u(rng));
    if (i % 50 == 0) {
      const Vector r = arm.design().v() * arm.theta_hat() - arm.b();
      EXPECT_LT(r.norm(), 1e-8 * (1.0 + arm.b().norm()));
      EXPECT_EQ(arm.pulls(), arm.design().update_count());
    }
  }
}

TEST(ArmModel, RejectsOutOfContractObservations) {
  ArmModel arm(2, 1.0);
  EXPECT_THROW(arm.observe(vec({2.0, 0.0}), 0.5, 1.0), InvalidArgument);
  EXPECT_THROW(arm.observe(vec({0.1, 0.0}), 1.5), InvalidArgument);
  EXPECT_THROW(arm.observe(vec({0.1, 0.0}), -0.1), InvalidArgument);
  EXPECT_THROW(arm.observe(vec({NAN, 0.0}), 0.5), InvalidArgument);
  EXPECT_EQ(arm.pulls(), 0u);
}

TEST(Beta, NoiselessIsLambdaSSquared) {
  EliminationConfig c;
  c.r_subgauss = 0.0;
  c.lambda = 1.0;
  c.s_bound = 2.0;
  ArmModel arm(3, 1.0);
  for (auto mode : {BetaMode::ExactDet, BetaMode::SimplifiedDim}) {
    c.beta_mode = mode;
    for (std::size_t t : {0u, 1u, 100u, 100000u}) EXPECT_DOUBLE_EQ(beta(c, arm, t), 4.0);
  }
}

TEST(Beta, FixedModeReturnsConstant) {
  auto c = fixed_cfg(0.5, 0.6);
  ArmModel arm(2, 1.0);
  arm.observe(vec({1.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(beta(c, arm, 0), 0.5);
  EXPECT_DOUBLE_EQ(beta(c, arm, 123456), 0.5);
}

TEST(Beta, HandComputedExactDet) {
  EliminationConfig c;
  c.lambda = 1.0;
  c.delta = 0.1;
  c.num_actions = 2;
  c.r_subgauss = 0.5;
  c.s_bound = 1.0;
  ArmModel arm(2, 1.0);
  arm.observe(vec({1.0, 0.0}), 1.0);  // det V = 2
  const double inner = std::log(2.0) + 2.0 * std::log(2.0 / 0.1);
  const double root = 0.5 * std::sqrt(inner) + 1.0;
  EXPECT_NEAR(beta(c, arm), root * root, 1e-12);
}

TEST(Beta, ExactDetNeverExceedsSimplifiedDim) {
  // Holds for d >= 2 (the simplified form drops a factor d of the delta term).
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 7;
    EliminationConfig c;
    c.lambda = 0.1 + 0.2 * (trial % 5);
    c.r_subgauss = 0.1;
    c.num_actions = 1 + trial % 20;
    c.l_context = 1.0;
    ArmModel arm(static_cast<std::size_t>(d), c.lambda);
    for (int t = 0; t <= 400; ++t) {
      c.beta_mode = BetaMode::ExactDet;
      const double exact = beta(c, arm);
      c.beta_mode = BetaMode::SimplifiedDim;
      const double simple = beta(c, arm);
      ASSERT_LE(exact, simple * (1 + 1e-12)) << "d=" << d << " t=" << t;
      std::uniform_real_distribution<double> scale(0.0, 1.0);
      arm.observe(unit_random(rng, d) * scale(rng), 0.5, 1.0);
    }
  }
}

TEST(Score, FreshArmWidthAndNoElimination) {
  auto c = fixed_cfg(0.7, 0.0, 1, 2.0);
  ArmModel arm(3, 2.0);
  const Vector x = vec({1.0, -2.0, 0.5});
  const auto s = score(c, arm, x);
  EXPECT_DOUBLE_EQ(s.mean, 0.0);
  EXPECT_NEAR(s.width, std::sqrt(0.7 * x.squaredNorm() / 2.0), 1e-15);
  EXPECT_FALSE(s.eliminated);
}

TEST(Score, EliminatesWhenLowerBoundAboveThreshold) {
  // Nine observations of x=1 with e=1 on a scalar arm (lambda=1):
  // theta = 9/10, x^T V^-1 x = 1/10.
  const ArmModel arm = scalar_arm(9, 1.0);
  const auto narrow = score(fixed_cfg(0.1, 0.6), arm, vec({1.0}));
  EXPECT_NEAR(narrow.mean, 0.9, 1e-12);
  EXPECT_NEAR(narrow.width, 0.1, 1e-12);
  EXPECT_TRUE(narrow.eliminated);
  const auto wide = score(fixed_cfg(2.5, 0.6), arm, vec({1.0}));
  EXPECT_NEAR(wide.width, 0.5, 1e-12);
  EXPECT_FALSE(wide.eliminated);
}

TEST(Score, DimensionMismatchThrows) {
  ArmModel arm(2, 1.0);
  EXPECT_THROW(score(fixed_cfg(1.0, 0.5), arm, vec({1.0})), InvalidArgument);
}

TEST(Score, EliminatedFlagMatchesDefinition) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    auto c = fixed_cfg(u(rng), u(rng) * 0.99);
    ArmModel arm(3, 1.0);
    const int n = static_cast<int>(u(rng) * 50);
    for (int j = 0; j < n; ++j) arm.observe(unit_random(rng, 3), u(rng) > 0.3 ? 1.0 : 0.0);
    const auto s = score(c, arm, unit_random(rng, 3));
    EXPECT_EQ(s.eliminated, s.mean - s.width > c.ell);
    EXPECT_GE(s.width, 0.0);
  }
}

TEST(Score, WidthNonIncreasingInObservations) {
  std::mt19937_64 rng(8);
  auto c = fixed_cfg(0.5, 0.5);
  ArmModel arm(5, 1.0);
  const Vector x = unit_random(rng, 5);
  double last = score(c, arm, x).width;
  for (int i = 0; i < 300; ++i) {
    arm.observe(unit_random(rng, 5), 0.5);
    const double w = score(c, arm, x).width;
    EXPECT_LE(w, last * (1 + 1e-12));
    last = w;
  }
}

TEST(Score, EllOneNeverEliminates) {
  // With one-hot contexts the ridge prediction is n*mean(e)/(n + lambda) <= 1,
  // so nothing can clear ell ~ 1.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coord(0, 2);
  EliminationConfig c;
  c.ell = 0.999999999;  // the config requires ell < 1
  c.num_actions = 1;
  ArmModel arm(3, 1.0);
  for (int i = 0; i < 500; ++i) {
    Vector x = Vector::Zero(3);
    x(coord(rng)) = 1.0;
    arm.observe(x, i % 3 ? 1.0 : u(rng), 1.0);
    const auto s = score(c, arm, x);
    ASSERT_GT(s.width, 0.0);
    ASSERT_LE(s.mean, 1.0);
    EXPECT_FALSE(s.eliminated);
  }
  // General contexts: whenever the prediction stays <= 1 nothing is eliminated.
  ArmModel dense(3, 1.0);
  for (int i = 0; i < 500; ++i) {
    Vector x = unit_random(rng, 3).cwiseAbs();
    dense.observe(x, 1.0, 1.0);
    const auto s = score(c, dense, x);
    if (s.mean <= 1.0) EXPECT_FALSE(s.eliminated);
  }
}

TEST(Admissible, AllFreshArmsAreAdmissible) {
  auto c = fixed_cfg(0.5, 0.5, 6);
  const auto arms = make_arms(6, 3, 1.0);
  const auto adm = admissible_set(c, arms, vec({0.2, 0.3, 0.1}));
  EXPECT_EQ(adm, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(Admissible, FallbackWhenEverythingIsEliminated) {
  auto c = fixed_cfg(0.01, 0.1, 3);
  std::vector<ArmModel> arms{scalar_arm(50, 1.0), scalar_arm(5, 1.0), scalar_arm(20, 1.0)};
  for (const auto& a : arms) ASSERT_TRUE(score(c, a, vec({1.0})).eliminated);
  const auto adm = admissible_set(c, arms, vec({1.0}));
  ASSERT_EQ(adm.size(), 1u);
  // Lowest mean - width: the arm with the fewest observations.
  EXPECT_EQ(adm.front(), 1u);
}

TEST(Admissible, InfiniteBetaKeepsEverything) {
  auto c = EliminationConfig::disabled(3);
  std::vector<ArmModel> arms{scalar_arm(50, 1.0), scalar_arm(50, 1.0), scalar_arm(50, 1.0)};
  EXPECT_EQ(admissible_set(c, arms, vec({1.0})).size(), 3u);
  EXPECT_EQ(admissible_set(c, arms, vec({0.0})).size(), 3u);
}

TEST(Admissible, ArmCountMismatchThrows) {
  auto c = fixed_cfg(0.5, 0.5, 4);
  EXPECT_THROW(admissible_set(c, make_arms(3, 2, 1.0), vec({1.0, 0.0})), InvalidArgument);
}

TEST(Admissible, ValidArmsSurviveMonteCarlo) {
  BanditSimConfig cfg;
  cfg.steps = 2000;
  cfg.checkpoints = {2000};
  const auto sum = run_bandit_sim(cfg, 1000, 7000);
  EXPECT_LE(sum.false_elimination_rate(), cfg.delta);
}

TEST(EliminationConfig, ValidationRejectsBadValues) {
  EliminationConfig c;
  c.delta = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = EliminationConfig{};
  c.ell = 0.7;
  c.u = 0.6;
  EXPECT_THROW(c.validate(), ConfigError);
  c = EliminationConfig{};
  c.r_subgauss = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = EliminationConfig{};
  c.lambda = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(EliminationConfig{}.validate());
}

TEST(Checkpoint, ArmsRoundTripBitExactly) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto arms = make_arms(4, 5, 0.7);
  for (int i = 0; i < 400; ++i) arms[static_cast<std::size_t>(i % 4)].observe(unit_random(rng, 5), u(rng));
  std::stringstream ss;
  write_arms(ss, arms);
  const auto back = read_arms(ss);
  ASSERT_EQ(back.size(), arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) {
    EXPECT_EQ(back[a].design().v(), arms[a].design().v());
    EXPECT_EQ(back[a].design().v_inv(), arms[a].design().v_inv());
    EXPECT_EQ(back[a].design().log_det(), arms[a].design().log_det());
    EXPECT_EQ(back[a].pulls(), arms[a].pulls());
    EXPECT_EQ(back[a].b(), arms[a].b());
    EXPECT_EQ(back[a].theta_hat(), arms[a].theta_hat());
  }
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::stringstream bad("NOTARMS");
  EXPECT_THROW(read_arms(bad), Error);
  auto arms = make_arms(2, 2, 1.0);
  std::stringstream ss;
  write_arms(ss, arms);
  std::string data = ss.str();
  data.resize(data.size() / 2);
  std::stringstream truncated(data);
  EXPECT_THROW(read_arms(truncated), Error);
}
