#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "ae/bandit/eliminator.hpp"
#include "ae/error.hpp"
#include "ae/neural/mlp.hpp"
#include "ae/neural/replay.hpp"

namespace ae::nn {

using Net = Mlp<double>;

struct AgentConfig {
  double gamma_train = 0.8;
  double gamma_eval = 1.0;
  double epsilon_start = 1.0;
  double epsilon_final = 0.1;
  double epsilon_anneal_fraction = 0.2;  // of total_steps
  std::size_t minibatch = 32;
  std::size_t target_sync = 500;      // C
  std::size_t bandit_refresh = 2500;  // L
  std::size_t replay_capacity = 50000;
  double lambda = 1.0;
  double beta = 0.5;  // +inf disables elimination
  double ell = 0.6;
  double lr_q = 1e-3;
  double lr_aen = 1e-3;
  double grad_clip = 10.0;
  std::size_t train_every = 1;
  std::size_t hash_dim = 512;
  std::vector<std::size_t> q_hidden{128, 128};
  std::vector<std::size_t> aen_hidden{128, 32};
  std::size_t total_steps = 200000;
  std::size_t eval_interval = 1000;
  std::size_t eval_episodes = 1;
  bool use_aen = true;  // false: vanilla DQN, no AEN is trained at all

  bool elimination_enabled() const { return use_aen && !std::isinf(beta); }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("agent: " + m); };
    if (!(gamma_train > 0.0 && gamma_train < 1.0)) fail("gamma_train must lie in (0,1)");
    if (!(gamma_eval > 0.0 && gamma_eval <= 1.0)) fail("gamma_eval must lie in (0,1]");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_final >= 0.0 && epsilon_final <= 1.0))
      fail("epsilon values must lie in [0,1]");
    if (!(epsilon_anneal_fraction >= 0.0 && epsilon_anneal_fraction <= 1.0)) fail("epsilon_anneal_fraction must lie in [0,1]");
    if (minibatch == 0) fail("minibatch must be positive");
    if (target_sync == 0) fail("target_sync (C) must be positive");
    if (bandit_refresh == 0) fail("bandit_refresh (L) must be positive");
    if (replay_capacity < minibatch) fail("replay_capacity must be at least the minibatch size");
    if (!(lambda > 0.0)) fail("lambda must be positive");
    if (!(beta >= 0.0)) fail("beta must be nonnegative");
    if (!(ell >= 0.0 && ell < 1.0)) fail("ell must lie in [0,1)");
    if (!(lr_q >= 0.0 && lr_aen >= 0.0)) fail("learning rates must be nonnegative");
    if (train_every == 0) fail("train_every must be positive");
    if (hash_dim == 0) fail("hash_dim must be positive");
    if (aen_hidden.empty()) fail("aen_hidden needs at least one layer");
    if (total_steps == 0) fail("total_steps must be positive");
  }

  EliminationConfig elimination(std::size_t num_actions) const {
    EliminationConfig c;
    c.lambda = lambda;
    c.ell = ell;
    c.num_actions = num_actions;
    c.beta_mode = BetaMode::Fixed;
    c.fixed_beta = beta;
    c.l_context = std::numeric_limits<double>::infinity();
    return c;
  }
};

inline std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

/// Frozen AEN copy plus per-action ridge models fitted on its features.
/// Immutable after construction, so concurrent readers are safe.
struct BanditSnapshot {
  Net aen_target;
  EliminationConfig cfg;
  std::vector<ArmModel> arms;

  Vector features(const SparseVec& s) const {
    return aen_target.last_hidden(Net::Batch{&s}).col(0);
  }
  std::vector<std::size_t> admissible(const Vector& phi) const { return admissible_set(cfg, arms, phi); }
  std::vector<std::size_t> admissible(const SparseVec& s) const { return admissible(features(s)); }
};

inline std::vector<std::size_t> all_actions(std::size_t k) {
  std::vector<std::size_t> out(k);
  for (std::size_t a = 0; a < k; ++a) out[a] = a;
  return out;
}

/// A' at s; the full set before the first snapshot exists.
inline std::vector<std::size_t> admissible_actions(const SparseVec& s, const BanditSnapshot* snap, std::size_t k) {
  return snap ? snap->admissible(s) : all_actions(k);
}

/// Epsilon-greedy over the admissible set; greedy ties go to the lowest index.
/// Always consumes one uniform draw, plus one more when exploring.
template <typename Rng>
std::size_t select_action(const Eigen::VectorXd& q, const std::vector<std::size_t>& adm, double epsilon, Rng& rng) {
  if (adm.empty()) throw InvalidArgument("select_action: empty admissible set");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < epsilon) return adm[std::uniform_int_distribution<std::size_t>(0, adm.size() - 1)(rng)];
  std::size_t best = adm.front();
  for (auto a : adm)
    if (q(static_cast<Eigen::Index>(a)) > q(static_cast<Eigen::Index>(best))) best = a;
  return best;
}

template <typename Rng>
std::size_t act(const SparseVec& s, const Net& q_net, const BanditSnapshot* snap, double epsilon, Rng& rng) {
  return select_action(q_net.forward(s), admissible_actions(s, snap, q_net.output_dim()), epsilon, rng);
}

/// y_j = r_j for terminal transitions, else r_j + gamma max_{a in A'(s'_j)} Q_target(s'_j, a).
inline std::vector<double> compute_targets(const std::vector<const Transition*>& batch, const Net& q_target,
                                           const std::vector<std::vector<std::size_t>>& next_admissible, double gamma) {
  if (batch.empty()) throw InvalidArgument("compute_targets: empty batch");
  if (next_admissible.size() != batch.size()) throw InvalidArgument("compute_targets: admissible sets do not match batch");
  Net::Batch xs;
  for (const auto* t : batch) xs.push_back(t->s_next.get());
  const Eigen::MatrixXd q = q_target.forward(xs);
  std::vector<double> y(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& t = *batch[j];
    if (t.terminal) {
      y[j] = t.reward;
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (auto a : next_admissible[j]) best = std::max(best, q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)));
    y[j] = t.reward + gamma * best;
  }
  return y;
}

inline std::vector<double> compute_targets(const std::vector<const Transition*>& batch, const Net& q_target,
                                           const BanditSnapshot* snap, double gamma) {
  std::vector<std::vector<std::size_t>> adm;
  for (const auto* t : batch) adm.push_back(admissible_actions(*t->s_next, snap, q_target.output_dim()));
  return compute_targets(batch, q_target, adm, gamma);
}

struct LossPair {
  double q = 0.0;
  double aen = 0.0;
};

/// Scratch buffers reused across training steps.
struct TrainScratch {
  Net::Cache q_cache, aen_cache;
  Net::Grads q_grads, aen_grads;
  Eigen::MatrixXd d_out;
};

namespace detail {

// One SGD step on sum_j (label_j - net(s_j)[a_j])^2; returns the loss before the step.
inline double regress_taken_action(Net& net, const std::vector<const Transition*>& batch, const std::vector<double>& labels,
                                   double lr, double clip, Net::Cache& cache, Net::Grads& grads, Eigen::MatrixXd& d_out) {
  Net::Batch xs;
  for (const auto* t : batch) xs.push_back(t->s.get());
  net.forward(xs, cache);
  const Eigen::MatrixXd& out = cache.act.back();
  d_out.setZero(out.rows(), out.cols());
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto a = static_cast<Eigen::Index>(batch[j]->action);
    const auto c = static_cast<Eigen::Index>(j);
    const double r = labels[j] - out(a, c);
    loss += r * r;
    d_out(a, c) = -2.0 * r;
  }
  if (!std::isfinite(loss)) throw DivergenceError("training diverged: non-finite loss (lower the learning rate)");
  if (grads.w.empty()) grads = net.make_grads();
  net.backward(xs, cache, d_out, grads);
  net.sgd_step(grads, lr, clip);
  return loss;
}

}  // namespace detail

/// One gradient step on the Q-network (targets y) and, when given, the AEN (labels e).
inline LossPair train_step(Net& q_net, Net* aen, const std::vector<const Transition*>& batch, const std::vector<double>& targets,
                           const AgentConfig& cfg, TrainScratch& scratch) {
  if (targets.size() != batch.size()) throw InvalidArgument("train_step: targets and batch differ in length");
  LossPair out;
  out.q = detail::regress_taken_action(q_net, batch, targets, cfg.lr_q, cfg.grad_clip, scratch.q_cache, scratch.q_grads,
                                       scratch.d_out);
  if (aen) {
    std::vector<double> labels;
    for (const auto* t : batch) labels.push_back(t->elim);
    out.aen = detail::regress_taken_action(*aen, batch, labels, cfg.lr_aen, cfg.grad_clip, scratch.aen_cache,
                                           scratch.aen_grads, scratch.d_out);
  }
  return out;
}

/// Freeze the AEN, refit one ridge model per action on its last-hidden
/// features over the whole replay, and write theta_a into the frozen head.
inline BanditSnapshot aen_update(const Net& aen, const ReplayBuffer& replay, const AgentConfig& cfg) {
  if (replay.empty()) throw InvalidArgument("aen_update: empty replay");
  BanditSnapshot snap{aen, cfg.elimination(aen.output_dim()), {}};
  const std::size_t k = aen.output_dim();
  const auto d = static_cast<Eigen::Index>(aen.sizes()[aen.sizes().size() - 2]);

  std::vector<Matrix> v(k, Matrix::Identity(d, d) * cfg.lambda);
  std::vector<Vector> b(k, Vector::Zero(d));
  std::vector<std::size_t> count(k, 0);

  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < replay.size(); start += kChunk) {
    const std::size_t end = std::min(replay.size(), start + kChunk);
    Net::Batch xs;
    for (std::size_t i = start; i < end; ++i) xs.push_back(replay[i].s.get());
    const Eigen::MatrixXd phi = snap.aen_target.last_hidden(xs);
    for (std::size_t i = start; i < end; ++i) {
      const auto& t = replay[i];
      const auto col = phi.col(static_cast<Eigen::Index>(i - start));
      v[t.action].noalias() += col * col.transpose();
      b[t.action].noalias() += t.elim * col;
      ++count[t.action];
    }
  }

  auto& head_w = snap.aen_target.weight(snap.aen_target.num_layers() - 1);
  auto& head_b = snap.aen_target.bias(snap.aen_target.num_layers() - 1);
  snap.arms.reserve(k);
  for (std::size_t a = 0; a < k; ++a) {
    SpdMatrix design = SpdMatrix::from_parts(cfg.lambda, v[a], v[a], 0.0, count[a]);
    design.refresh();
    snap.arms.push_back(ArmModel::from_parts(std::move(design), std::move(b[a])));
    const Vector& theta = snap.arms.back().theta_hat();  // also fills the cache before sharing
    head_w.row(static_cast<Eigen::Index>(a)) = theta.transpose();
    head_b(static_cast<Eigen::Index>(a)) = 0.0;
  }
  return snap;
}

/// Memoizes A'(s) per distinct feature vector for one snapshot.
class AdmissibleCache {
 public:
  void reset() { map_.clear(); }

  const std::vector<std::size_t>& get(const SparseVec& s, const BanditSnapshot* snap, std::size_t k) {
    if (!snap) {
      if (all_.size() != k) all_ = all_actions(k);
      return all_;
    }
    std::string key(reinterpret_cast<const char*>(s.idx.data()), s.idx.size() * sizeof(std::uint32_t));
    key.append(reinterpret_cast<const char*>(s.val.data()), s.val.size() * sizeof(double));
    auto it = map_.find(key);
    if (it == map_.end()) it = map_.emplace(std::move(key), snap->admissible(s)).first;
    return it->second;
  }

 private:
  std::unordered_map<std::string, std::vector<std::size_t>> map_;
  std::vector<std::size_t> all_;
};

}  // namespace ae::nn
