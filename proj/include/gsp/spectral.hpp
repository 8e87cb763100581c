#pragma once

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "gsp/error.hpp"
#include "gsp/graph.hpp"

namespace gsp {

/// Eigendecomposition L = V diag(eigenvalues) V^T of a symmetric graph
/// operator. Eigenvalues ascend; column n of `eigenvectors` is the n-th
/// Fourier mode, so the forward transform is V^T and the inverse is V.
template <typename Scalar>
struct SpectralBasis {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector eigenvalues;
  Matrix eigenvectors;

  Eigen::Index size() const { return eigenvalues.size(); }
};

/// Gain applied per graph frequency.
template <typename Scalar>
struct BasicFilterSpec {
  std::string name;
  std::function<Scalar(Scalar)> response;
};

using FilterSpec = BasicFilterSpec<double>;

/// g(x) = 1 / (1 + c x); c = 0.5 is the default smoothing low-pass.
template <typename Scalar = double>
BasicFilterSpec<Scalar> lowpass_filter(Scalar coefficient = Scalar(0.5)) {
  return {"lowpass:" + std::to_string(static_cast<double>(coefficient)),
          [coefficient](Scalar x) { return Scalar(1) / (Scalar(1) + coefficient * x); }};
}

template <typename Scalar = double>
BasicFilterSpec<Scalar> identity_filter() {
  return {"identity", [](Scalar) { return Scalar(1); }};
}

/// Parses "lowpass:C", "heat:T" (exp(-T x)) or "identity".
FilterSpec parse_filter(const std::string& text);

/// Symmetric eigendecomposition with a deterministic sign convention: the
/// largest-magnitude entry of every eigenvector is positive, ties going to
/// the lowest row index.
template <typename Derived>
SpectralBasis<typename Derived::Scalar> decompose(const Eigen::MatrixBase<Derived>& operator_matrix) {
  using Scalar = typename Derived::Scalar;
  using Matrix = typename SpectralBasis<Scalar>::Matrix;
  const Matrix op = operator_matrix;
  if (op.rows() != op.cols()) throw Error(Errc::NotSymmetric, "operator is not square");
  const Scalar asym = op.size() == 0 ? Scalar(0) : (op - op.transpose()).cwiseAbs().maxCoeff();
  if (asym > Scalar(1e-10)) throw Error(Errc::NotSymmetric, "max |L - L^T| = " + std::to_string(static_cast<double>(asym)));

  SpectralBasis<Scalar> basis;
  if (op.rows() == 0) return basis;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(op, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error(Errc::NotSymmetric, "eigensolver did not converge");
  basis.eigenvalues = solver.eigenvalues();
  basis.eigenvectors = solver.eigenvectors();
  for (Eigen::Index c = 0; c < basis.eigenvectors.cols(); ++c) {
    auto column = basis.eigenvectors.col(c);
    const Scalar largest = column.cwiseAbs().maxCoeff();
    const Scalar tie = largest * Scalar(1e-12);
    Eigen::Index pivot = 0;
    while (std::abs(column(pivot)) < largest - tie) ++pivot;
    if (column(pivot) < Scalar(0)) column = -column;
  }
  return basis;
}

template <typename Scalar>
SpectralBasis<Scalar> decompose(const BasicSensorGraph<Scalar>& g) {
  return decompose(laplacian(g));
}

namespace detail {
template <typename Scalar, typename Derived>
void check_rows(const SpectralBasis<Scalar>& basis, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != basis.size())
    throw Error(Errc::DimensionMismatch, "signal has " + std::to_string(x.rows()) +
                                             " rows, basis has " + std::to_string(basis.size()));
}
}  // namespace detail

/// Graph Fourier transform V^T s. Columns of a matrix argument are
/// transformed independently.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> gft(
    const SpectralBasis<Scalar>& basis, const Eigen::MatrixBase<Derived>& signal) {
  detail::check_rows(basis, signal);
  return basis.eigenvectors.transpose() * signal;
}

/// Inverse graph Fourier transform V s_hat.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> igft(
    const SpectralBasis<Scalar>& basis, const Eigen::MatrixBase<Derived>& spectrum) {
  detail::check_rows(basis, spectrum);
  return basis.eigenvectors * spectrum;
}

/// Diagonal of filter gains g(lambda_n). Throws NonFiniteGain.
template <typename Scalar>
typename SpectralBasis<Scalar>::Vector filter_gains(const SpectralBasis<Scalar>& basis,
                                                    const BasicFilterSpec<Scalar>& filter) {
  typename SpectralBasis<Scalar>::Vector gains(basis.size());
  for (Eigen::Index n = 0; n < basis.size(); ++n) {
    gains(n) = filter.response(basis.eigenvalues(n));
    if (!std::isfinite(static_cast<double>(gains(n))))
      throw Error(Errc::NonFiniteGain, filter.name + " at eigenvalue " +
                                           std::to_string(static_cast<double>(basis.eigenvalues(n))));
  }
  return gains;
}

/// V diag(g(lambda)) V^T as an explicit matrix.
template <typename Scalar>
typename SpectralBasis<Scalar>::Matrix filter_operator(const SpectralBasis<Scalar>& basis,
                                                       const BasicFilterSpec<Scalar>& filter) {
  const auto gains = filter_gains(basis, filter);
  return basis.eigenvectors * gains.asDiagonal() * basis.eigenvectors.transpose();
}

/// Point-wise spectral filtering: V diag(g(lambda)) V^T s.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> apply_filter(
    const SpectralBasis<Scalar>& basis, const Eigen::MatrixBase<Derived>& signal,
    const BasicFilterSpec<Scalar>& filter) {
  detail::check_rows(basis, signal);
  const auto gains = filter_gains(basis, filter);
  return basis.eigenvectors * (gains.asDiagonal() * (basis.eigenvectors.transpose() * signal));
}

enum class ShiftOperator {
  RowNormalized,  ///< D^{-1} A; constants are fixed points
  Adjacency,      ///< raw weighted A
};

/// Shift matrix used by the total-variation diagnostic. Rows of isolated
/// nodes are zero under RowNormalized.
template <typename Scalar>
typename BasicSensorGraph<Scalar>::Matrix shift_matrix(const BasicSensorGraph<Scalar>& g,
                                                       ShiftOperator shift) {
  typename BasicSensorGraph<Scalar>::Matrix s = g.weights();
  if (shift == ShiftOperator::RowNormalized) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const Scalar degree = s.row(i).sum();
      if (degree > Scalar(0)) s.row(i) /= degree;
    }
  }
  return s;
}

/// Per-node total variation |s_i - (S s)_i|. Isolated nodes score 0 under
/// the row-normalized shift. Matrix arguments give one column per timestep.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> node_total_variation(
    const BasicSensorGraph<Scalar>& g, const Eigen::MatrixBase<Derived>& signal,
    ShiftOperator shift = ShiftOperator::RowNormalized) {
  if (signal.rows() != g.size())
    throw Error(Errc::DimensionMismatch, "signal has " + std::to_string(signal.rows()) +
                                             " rows, graph has " + std::to_string(g.size()) + " nodes");
  const auto s = shift_matrix(g, shift);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> tv = (signal - s * signal).cwiseAbs();
  if (shift == ShiftOperator::RowNormalized)
    for (Eigen::Index i = 0; i < g.size(); ++i)
      if (g.weights().row(i).sum() == Scalar(0)) tv.row(i).setZero();
  return tv;
}

/// Global total variation ||s - S s||_1.
template <typename Scalar, typename Derived>
Scalar total_variation(const BasicSensorGraph<Scalar>& g, const Eigen::MatrixBase<Derived>& signal,
                       ShiftOperator shift = ShiftOperator::RowNormalized) {
  static_assert(Derived::ColsAtCompileTime == 1, "total_variation takes a single signal vector");
  return node_total_variation(g, signal, shift).sum();
}

}  // namespace gsp
