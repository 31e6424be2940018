#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "ae/error.hpp"
#include "ae/io/binary.hpp"
#include "ae/neural/features.hpp"

namespace ae::nn {

/// Fully connected network with ReLU hidden layers and a linear output.
/// The first layer consumes sparse inputs directly.
template <typename Scalar>
class Mlp {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Batch = std::vector<const SparseVec*>;

  /// Post-activation outputs of every layer for one minibatch
  /// (column j belongs to sample j); act[0] is unused.
  struct Cache {
    std::vector<Mat> act;
  };

  struct Grads {
    std::vector<Mat> w;
    std::vector<Vec> b;
    std::vector<std::uint32_t> touched;  // first-layer columns with nonzero gradient
    std::vector<std::uint8_t> mark;
  };

  Mlp() = default;

  /// He-uniform weights, zero biases.
  Mlp(std::vector<std::size_t> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ConfigError("Mlp: need at least input and output sizes");
    for (auto s : sizes_)
      if (s == 0) throw ConfigError("Mlp: layer sizes must be positive");
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const auto in = static_cast<Eigen::Index>(sizes_[l]);
      const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
      const double bound = std::sqrt(6.0 / static_cast<double>(in));
      std::uniform_real_distribution<double> u(-bound, bound);
      Mat w(out, in);
      for (Eigen::Index c = 0; c < in; ++c)
        for (Eigen::Index r = 0; r < out; ++r) w(r, c) = static_cast<Scalar>(u(rng));
      w_.push_back(std::move(w));
      b_.push_back(Vec::Zero(out));
    }
  }

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t num_layers() const { return w_.size(); }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  const Mat& weight(std::size_t l) const { return w_[l]; }
  const Vec& bias(std::size_t l) const { return b_[l]; }
  Mat& weight(std::size_t l) { return w_[l]; }
  Vec& bias(std::size_t l) { return b_[l]; }

  void forward(const Batch& xs, Cache& c) const {
    const auto m = static_cast<Eigen::Index>(xs.size());
    const std::size_t L = num_layers();
    c.act.resize(L + 1);
    Mat& h1 = c.act[1];
    h1.resize(w_[0].rows(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
      auto col = h1.col(j);
      col = b_[0];
      const SparseVec& x = *xs[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < x.idx.size(); ++k) {
        if (x.idx[k] >= input_dim()) throw InvalidArgument("Mlp: sparse index out of range");
        col.noalias() += static_cast<Scalar>(x.val[k]) * w_[0].col(x.idx[k]);
      }
    }
    if (L > 1) h1 = h1.cwiseMax(Scalar(0));
    for (std::size_t l = 1; l < L; ++l) {
      c.act[l + 1].noalias() = w_[l] * c.act[l];
      c.act[l + 1].colwise() += b_[l];
      if (l + 1 < L) c.act[l + 1] = c.act[l + 1].cwiseMax(Scalar(0));
    }
  }

  Mat forward(const Batch& xs) const {
    Cache c;
    forward(xs, c);
    return std::move(c.act.back());
  }

  Vec forward(const SparseVec& x) const {
    Cache c;
    forward(Batch{&x}, c);
    return c.act.back().col(0);
  }

  /// Activations of the last hidden layer (no bias term appended).
  Mat last_hidden(const Batch& xs) const {
    if (num_layers() < 2) throw InvalidArgument("Mlp::last_hidden: network has no hidden layer");
    Cache c;
    forward(xs, c);
    return std::move(c.act[num_layers() - 1]);
  }

  Grads make_grads() const {
    Grads g;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      g.w.push_back(Mat::Zero(w_[l].rows(), w_[l].cols()));
      g.b.push_back(Vec::Zero(b_[l].size()));
    }
    g.mark.assign(input_dim(), 0);
    return g;
  }

  /// Accumulate parameter gradients given dLoss/dOutput (output_dim x m).
  void backward(const Batch& xs, const Cache& c, const Mat& d_out, Grads& g) const {
    const std::size_t L = num_layers();
    Mat delta = d_out;
    for (std::size_t l = L; l-- > 1;) {
      g.w[l].noalias() += delta * c.act[l].transpose();
      g.b[l] += delta.rowwise().sum();
      Mat prev = w_[l].transpose() * delta;
      prev = prev.cwiseProduct((c.act[l].array() > Scalar(0)).template cast<Scalar>().matrix());
      delta = std::move(prev);
    }
    g.b[0] += delta.rowwise().sum();
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const SparseVec& x = *xs[j];
      for (std::size_t k = 0; k < x.idx.size(); ++k) {
        const auto col = x.idx[k];
        g.w[0].col(col).noalias() += static_cast<Scalar>(x.val[k]) * delta.col(static_cast<Eigen::Index>(j));
        if (!g.mark[col]) {
          g.mark[col] = 1;
          g.touched.push_back(col);
        }
      }
    }
  }

  static double grad_norm(const Grads& g) {
    double s = 0.0;
    for (std::size_t l = 1; l < g.w.size(); ++l) s += static_cast<double>(g.w[l].squaredNorm());
    for (const auto& b : g.b) s += static_cast<double>(b.squaredNorm());
    for (auto col : g.touched) s += static_cast<double>(g.w[0].col(col).squaredNorm());
    return std::sqrt(s);
  }

  /// Plain SGD with global-norm clipping; resets the gradient buffers.
  void sgd_step(Grads& g, double lr, double clip) {
    const double n = grad_norm(g);
    if (!std::isfinite(n)) throw DivergenceError("Mlp: non-finite gradient");
    const double scale = (clip > 0.0 && n > clip) ? clip / n : 1.0;
    const auto step = static_cast<Scalar>(lr * scale);
    for (std::size_t l = 1; l < num_layers(); ++l) {
      w_[l].noalias() -= step * g.w[l];
      g.w[l].setZero();
    }
    for (std::size_t l = 0; l < num_layers(); ++l) {
      b_[l].noalias() -= step * g.b[l];
      g.b[l].setZero();
    }
    for (auto col : g.touched) {
      w_[0].col(col).noalias() -= step * g.w[0].col(col);
      g.w[0].col(col).setZero();
      g.mark[col] = 0;
    }
    g.touched.clear();
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < num_layers(); ++l)
      if (!w_[l].allFinite() || !b_[l].allFinite()) return false;
    return true;
  }

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out;
    out.sizes_ = sizes_;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      out.w_.push_back(w_[l].template cast<Other>());
      out.b_.push_back(b_[l].template cast<Other>());
    }
    return out;
  }

  bool operator==(const Mlp& o) const {
    if (sizes_ != o.sizes_) return false;
    for (std::size_t l = 0; l < num_layers(); ++l)
      if (w_[l] != o.w_[l] || b_[l] != o.b_[l]) return false;
    return true;
  }

  void write(io::BinaryWriter& w) const {
    w.magic("AEMLP", 1);
    w.u32(sizeof(Scalar));
    w.u64(sizes_.size());
    for (auto s : sizes_) w.u64(s);
    for (std::size_t l = 0; l < num_layers(); ++l) {
      w.matrix(w_[l]);
      w.matrix(b_[l]);
    }
  }

  static Mlp read(io::BinaryReader& r) {
    if (r.magic("AEMLP") != 1) throw Error("Mlp checkpoint: unsupported version");
    if (r.u32() != sizeof(Scalar)) throw Error("Mlp checkpoint: scalar type mismatch");
    Mlp out;
    const auto n = r.u64();
    if (n < 2 || n > 64) throw Error("Mlp checkpoint: implausible layer count");
    for (std::uint64_t i = 0; i < n; ++i) out.sizes_.push_back(r.u64());
    for (std::size_t l = 0; l + 1 < out.sizes_.size(); ++l) {
      out.w_.push_back(r.template matrix<Mat>());
      out.b_.push_back(r.template matrix<Vec>());
      if (static_cast<std::size_t>(out.w_.back().rows()) != out.sizes_[l + 1] ||
          static_cast<std::size_t>(out.w_.back().cols()) != out.sizes_[l] ||
          static_cast<std::size_t>(out.b_.back().size()) != out.sizes_[l + 1])
        throw Error("Mlp checkpoint: layer shape mismatch");
    }
    return out;
  }

 private:
  template <typename>
  friend class Mlp;

  std::vector<std::size_t> sizes_;
  std::vector<Mat> w_;
  std::vector<Vec> b_;
};

}  // namespace ae::nn
