#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ae/error.hpp"

namespace ae {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool all_finite(const Vector& x) { return x.allFinite(); }

/// Regularized design matrix V = lambda*I + sum x x^T, with its inverse and
/// log-determinant maintained incrementally under rank-1 updates.
///
/// The inverse is carried by Sherman-Morrison; every kRefreshInterval
/// updates it is recomputed from a Cholesky factorization of V so rounding
/// drift stays bounded over long runs.
class SpdMatrix {
 public:
  static constexpr std::size_t kRefreshInterval = 256;
  static constexpr double kMinDenominator = 1e-12;

  SpdMatrix(std::size_t dim, double lambda) : dim_(dim), lambda_(lambda) {
    if (dim == 0) throw InvalidArgument("SpdMatrix: dimension must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw InvalidArgument("SpdMatrix: lambda must be a positive finite number");
    const auto n = static_cast<Eigen::Index>(dim);
    v_ = Matrix::Identity(n, n) * lambda;
    v_inv_ = Matrix::Identity(n, n) / lambda;
    log_det_ = static_cast<double>(dim) * std::log(lambda);
  }

  std::size_t dim() const { return dim_; }
  double lambda() const { return lambda_; }
  const Matrix& v() const { return v_; }
  const Matrix& v_inv() const { return v_inv_; }
  double log_det() const { return log_det_; }
  std::size_t update_count() const { return update_count_; }

  /// V <- V + x x^T.
  void rank1_update(const Vector& x) {
    check_dim(x, "rank1_update");
    if (!x.allFinite()) throw InvalidArgument("rank1_update: non-finite context");

    const Vector u = v_inv_ * x;
    const double q = std::max(0.0, x.dot(u));
    const double denom = 1.0 + q;
    if (denom < kMinDenominator)
      throw InvalidArgument("rank1_update: degenerate Sherman-Morrison denominator");

    const auto n = static_cast<Eigen::Index>(dim_);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        const double vv = v_(i, j) + x(i) * x(j);
        v_(i, j) = vv;
        v_(j, i) = vv;
        const double w = v_inv_(i, j) - u(i) * u(j) / denom;
        v_inv_(i, j) = w;
        v_inv_(j, i) = w;
      }
    }
    log_det_ += std::log1p(q);
    ++update_count_;
    if (update_count_ % kRefreshInterval == 0) refresh();
  }

  /// x^T V^{-1} x, clamped at zero.
  double quad_form(const Vector& x) const {
    check_dim(x, "quad_form");
    return std::max(0.0, x.dot(v_inv_ * x));
  }

  /// V^{-1} b using the maintained inverse.
  Vector solve(const Vector& b) const {
    check_dim(b, "solve");
    return v_inv_ * b;
  }

  /// Rebuild inverse and log-determinant from V directly.
  void refresh() {
    Eigen::LLT<Matrix> llt(v_);
    if (llt.info() != Eigen::Success)
      throw Error("SpdMatrix: Cholesky factorization failed (matrix lost definiteness)");
    const auto n = static_cast<Eigen::Index>(dim_);
    v_inv_ = llt.solve(Matrix::Identity(n, n));
    v_inv_ = 0.5 * (v_inv_ + v_inv_.transpose()).eval();
    const Matrix& l = llt.matrixLLT();
    double ld = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ld += std::log(l(i, i));
    log_det_ = 2.0 * ld;
  }

  /// Reassemble from serialized parts (no validation beyond shapes).
  static SpdMatrix from_parts(double lambda, Matrix v, Matrix v_inv, double log_det,
                              std::size_t update_count) {
    if (v.rows() != v.cols() || v_inv.rows() != v.rows() || v_inv.cols() != v.cols())
      throw InvalidArgument("SpdMatrix::from_parts: shape mismatch");
    SpdMatrix m(static_cast<std::size_t>(v.rows()), lambda);
    m.v_ = std::move(v);
    m.v_inv_ = std::move(v_inv);
    m.log_det_ = log_det;
    m.update_count_ = update_count;
    return m;
  }

 private:
  void check_dim(const Vector& x, const char* op) const {
    if (static_cast<std::size_t>(x.size()) != dim_)
      throw InvalidArgument(std::string(op) + ": dimension mismatch (expected " +
                            std::to_string(dim_) + ", got " + std::to_string(x.size()) + ")");
  }

  std::size_t dim_;
  double lambda_;
  Matrix v_;
  Matrix v_inv_;
  double log_det_ = 0.0;
  std::size_t update_count_ = 0;
};

}  // namespace ae
