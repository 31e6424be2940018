#pragma once
// Central finite differences against the analytic gradient of the
// taken-action squared error sum_j (y_j - net(s_j)[a_j])^2.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ae/neural/agent.hpp"

namespace oracle {

struct GradSample {
  std::size_t layer;
  bool bias;
  Eigen::Index row, col;
};

inline double taken_action_loss(const ae::nn::Net& net, const ae::nn::Net::Batch& xs, const std::vector<std::size_t>& actions,
                                const std::vector<double>& y) {
  const Eigen::MatrixXd out = net.forward(xs);
  double loss = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double r = y[j] - out(static_cast<Eigen::Index>(actions[j]), static_cast<Eigen::Index>(j));
    loss += r * r;
  }
  return loss;
}

// Which hidden units are active; finite differences across a ReLU kink are meaningless.
inline std::vector<bool> activation_pattern(const ae::nn::Net& net, const ae::nn::Net::Batch& xs) {
  ae::nn::Net::Cache c;
  net.forward(xs, c);
  std::vector<bool> out;
  for (std::size_t l = 1; l < net.num_layers(); ++l)
    for (Eigen::Index i = 0; i < c.act[l].size(); ++i) out.push_back(c.act[l].data()[i] > 0.0);
  return out;
}

/// Largest relative error over `per_layer` random weights and biases of each
/// layer, skipping perturbations that flip a ReLU. First-layer weights are
/// sampled among columns the batch touches.
inline double max_gradient_error(ae::nn::Net net, const ae::nn::Net::Batch& xs, const std::vector<std::size_t>& actions,
                                 const std::vector<double>& y, std::mt19937_64& rng, std::size_t per_layer = 25,
                                 double h = 1e-5) {
  ae::nn::Net::Cache cache;
  net.forward(xs, cache);
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(net.output_dim()), static_cast<Eigen::Index>(xs.size()));
  const Eigen::MatrixXd& out = cache.act.back();
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const auto a = static_cast<Eigen::Index>(actions[j]);
    const auto c = static_cast<Eigen::Index>(j);
    d_out(a, c) = -2.0 * (y[j] - out(a, c));
  }
  auto g = net.make_grads();
  net.backward(xs, cache, d_out, g);

  std::vector<std::uint32_t> cols;
  for (const auto* x : xs) cols.insert(cols.end(), x->idx.begin(), x->idx.end());

  double worst = 0.0;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto& w = net.weight(l);
    auto& b = net.bias(l);
    std::uniform_int_distribution<Eigen::Index> row(0, w.rows() - 1);
    std::uniform_int_distribution<Eigen::Index> col(0, w.cols() - 1);
    std::uniform_int_distribution<std::size_t> touched(0, cols.size() - 1);
    for (std::size_t n = 0; n < 2 * per_layer; ++n) {
      const bool bias = n >= per_layer;
      const Eigen::Index r = row(rng);
      const Eigen::Index c = bias ? 0 : (l == 0 ? static_cast<Eigen::Index>(cols[touched(rng)]) : col(rng));
      double& p = bias ? b(r) : w(r, c);
      const double saved = p;
      p = saved + h;
      const double up = taken_action_loss(net, xs, actions, y);
      const auto pattern_up = activation_pattern(net, xs);
      p = saved - h;
      const double down = taken_action_loss(net, xs, actions, y);
      const auto pattern_down = activation_pattern(net, xs);
      p = saved;
      if (pattern_up != pattern_down) continue;
      const double fd = (up - down) / (2.0 * h);
      const double an = bias ? g.b[l](r) : g.w[l](r, c);
      const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
      worst = std::max(worst, std::abs(fd - an) / scale);
    }
  }
  return worst;
}

}  // namespace oracle
