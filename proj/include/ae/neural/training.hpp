#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "ae/harness/records.hpp"
#include "ae/neural/agent.hpp"
#include "ae/neural/features.hpp"

namespace ae::nn {

/// Live training state; exposed so checkpoints can capture it.
struct TrainerState {
  Net q, q_target, aen;
  std::optional<BanditSnapshot> snapshot;
  std::uint64_t step = 0;
  std::uint64_t episodes = 0;
};

inline double epsilon_at(const AgentConfig& cfg, std::uint64_t step) {
  const double horizon = cfg.epsilon_anneal_fraction * static_cast<double>(cfg.total_steps);
  if (horizon <= 0.0) return cfg.epsilon_final;
  const double frac = std::min(1.0, static_cast<double>(step) / horizon);
  return cfg.epsilon_start + frac * (cfg.epsilon_final - cfg.epsilon_start);
}

/// Greedy rollout with the current networks; returns (return, length, mean |A'|).
template <typename Env>
EpisodeRecord evaluate(Env env, const TrainerState& st, const FeatureEncoder& enc, const AgentConfig& cfg,
                       std::uint64_t seed, AdmissibleCache& cache) {
  EpisodeRecord rec;
  std::mt19937_64 rng(seed);
  const BanditSnapshot* snap = st.snapshot ? &*st.snapshot : nullptr;
  double ret = 0.0, discount = 1.0, adm_total = 0.0;
  std::uint64_t len = 0;
  for (std::size_t e = 0; e < cfg.eval_episodes; ++e) {
    env.reset(seed + e);
    FrameHistory hist;
    hist.reset(env.state_text());
    discount = 1.0;
    bool done = false;
    while (!done) {
      const SparseVec s = enc.encode(hist.frames());
      const auto& adm = cache.get(s, snap, env.num_actions());
      adm_total += static_cast<double>(adm.size());
      const std::size_t a = select_action(st.q.forward(s), adm, 0.0, rng);
      const auto out = env.step(a);
      ret += discount * out.reward;
      discount *= cfg.gamma_eval;
      ++len;
      done = out.done;
      hist.push(env.state_text());
    }
  }
  const double n = static_cast<double>(cfg.eval_episodes);
  rec.eval_return = ret / n;
  rec.length = static_cast<std::uint64_t>(static_cast<double>(len) / n + 0.5);
  rec.mean_admissible = len ? adm_total / static_cast<double>(len) : 0.0;
  return rec;
}

/// Algorithm-1 training loop. Emits one record per finished training
/// episode and one record (with eval_return set) every eval_interval steps.
///
/// Env must provide reset(seed), step(action) -> {reward, elim, done,
/// terminal}, num_actions() and state_text(); it is copied for evaluation.
/// `valid` (optional) reports whether an action is valid in the current
/// state, for counting eliminated-valid incidents. When `final_state` is
/// given it receives the networks and snapshot at the end of the run.
template <typename Env>
void run_training(Env env, const AgentConfig& cfg, std::uint64_t seed, const std::function<void(const EpisodeRecord&)>& emit,
                  const std::function<bool(const Env&, std::size_t)>& valid = {}, TrainerState* final_state = nullptr) {
  cfg.validate();
  const std::size_t k = env.num_actions();
  const FeatureEncoder enc(cfg.hash_dim);
  std::mt19937_64 rng(seed);
  std::seed_seq init_seq{seed, std::uint64_t{0x51ed}};
  std::uint64_t init_seeds[2];
  init_seq.generate(init_seeds, init_seeds + 2);

  TrainerState st;
  st.q = Net(layer_sizes(cfg.hash_dim, cfg.q_hidden, k), init_seeds[0]);
  st.q_target = st.q;
  if (cfg.use_aen) st.aen = Net(layer_sizes(cfg.hash_dim, cfg.aen_hidden, k), init_seeds[1]);

  ReplayBuffer replay(cfg.replay_capacity);
  TrainScratch scratch;
  AdmissibleCache cache;
  std::vector<const Transition*> batch;
  std::vector<std::vector<std::size_t>> next_adm;

  FrameHistory hist;
  auto start_episode = [&] {
    env.reset(seed * 1000003ULL + st.episodes);
    hist.reset(env.state_text());
  };
  start_episode();
  FeaturePtr s = std::make_shared<const SparseVec>(enc.encode(hist.frames()));

  EpisodeRecord rec;
  double adm_total = 0.0;
  double last_train_return = 0.0;

  for (st.step = 1; st.step <= cfg.total_steps; ++st.step) {
    const BanditSnapshot* snap = st.snapshot ? &*st.snapshot : nullptr;
    const auto& adm = cache.get(*s, snap, k);
    adm_total += static_cast<double>(adm.size());
    if (valid && snap) {
      for (std::size_t a = 0, j = 0; a < k; ++a) {
        while (j < adm.size() && adm[j] < a) ++j;
        const bool kept = j < adm.size() && adm[j] == a;
        if (!kept && valid(env, a)) {
          ++rec.eliminated_valid;
          break;
        }
      }
    }
    const std::size_t a = select_action(st.q.forward(*s), adm, epsilon_at(cfg, st.step - 1), rng);
    const auto out = env.step(a);
    hist.push(env.state_text());
    FeaturePtr s_next = std::make_shared<const SparseVec>(enc.encode(hist.frames()));
    replay.push(Transition{s, a, out.reward, static_cast<double>(out.elim), s_next, out.terminal});
    rec.train_return += out.reward;
    ++rec.length;

    if (replay.size() >= cfg.minibatch && st.step % cfg.train_every == 0) {
      const auto idx = replay.sample_indices(cfg.minibatch, rng);
      batch.clear();
      next_adm.clear();
      for (auto i : idx) {
        batch.push_back(&replay[i]);
        next_adm.push_back(cache.get(*replay[i].s_next, snap, k));
      }
      const auto y = compute_targets(batch, st.q_target, next_adm, cfg.gamma_train);
      train_step(st.q, cfg.use_aen ? &st.aen : nullptr, batch, y, cfg, scratch);
    }
    if (st.step % cfg.target_sync == 0) st.q_target = st.q;
    if (cfg.use_aen && st.step % cfg.bandit_refresh == 0) {
      st.snapshot = aen_update(st.aen, replay, cfg);
      cache.reset();
    }

    if (out.done) {
      rec.seed = seed;
      rec.episode = st.episodes;
      rec.global_step = st.step;
      rec.mean_admissible = adm_total / static_cast<double>(rec.length);
      last_train_return = rec.train_return;
      emit(rec);
      ++st.episodes;
      rec = EpisodeRecord{};
      adm_total = 0.0;
      start_episode();
      s = std::make_shared<const SparseVec>(enc.encode(hist.frames()));
    } else {
      s = std::move(s_next);
    }

    if (cfg.eval_interval > 0 && st.step % cfg.eval_interval == 0) {
      if (!st.q.all_finite() || (cfg.use_aen && !st.aen.all_finite()))
        throw DivergenceError("training diverged: non-finite parameters at step " + std::to_string(st.step));
      EpisodeRecord ev = evaluate(env, st, enc, cfg, 0x9e3779b97f4a7c15ULL ^ seed, cache);
      ev.seed = seed;
      ev.episode = st.episodes;
      ev.global_step = st.step;
      ev.train_return = last_train_return;
      emit(ev);
    }
  }
  if (final_state) {
    st.step = cfg.total_steps;
    *final_state = std::move(st);
  }
}

}  // namespace ae::nn
