#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsp/error.hpp"
#include "gsp/graph.hpp"
#include "gsp/sensors.hpp"

namespace gsp {

/// Binary selection over the sensors of a graph.
struct SampleMask {
  std::vector<bool> selected;
  std::size_t budget = 0;

  static SampleMask from_indices(std::size_t n, const std::vector<Eigen::Index>& indices,
                                 std::size_t budget = 0);
  static SampleMask full(std::size_t n);

  std::size_t size() const { return selected.size(); }
  std::size_t count() const;
  std::vector<Eigen::Index> indices() const;
  std::vector<Eigen::Index> complement() const;
  /// Canonical key: comma-joined ascending selected indices.
  std::string key() const;

  bool operator==(const SampleMask& other) const { return selected == other.selected; }
};

/// Component id of every node (ids follow connected_components order).
template <typename Scalar>
std::vector<int> component_labels(const BasicSensorGraph<Scalar>& g) {
  std::vector<int> labels(static_cast<std::size_t>(g.size()), 0);
  int id = 0;
  for (const auto& component : connected_components(g)) {
    for (const auto v : component) labels[static_cast<std::size_t>(v)] = id;
    ++id;
  }
  return labels;
}

/// Throws SingularSystem naming the first connected component that holds no
/// selected node.
template <typename Scalar>
void require_sampled_components(const BasicSensorGraph<Scalar>& g, const SampleMask& mask) {
  for (const auto& component : connected_components(g)) {
    bool sampled = false;
    for (const auto v : component) sampled = sampled || mask.selected[static_cast<std::size_t>(v)];
    if (!sampled) {
      std::string members;
      for (const auto v : component) members += (members.empty() ? "" : ",") + g.nodes()[v].id;
      throw Error(Errc::SingularSystem, "connected component {" + members + "} has no sampled node");
    }
  }
}

/// Linear reconstruction operator for a fixed (graph, mask, tau).
///
/// tau > 0 minimizes ||Mx - y||^2 + tau x^T L x through (M^T M + tau L) x = M^T y.
/// tau = 0 interpolates: x_S = y and L_UU x_U = -L_US y on the unsampled set U.
/// Either way x = R y for an N x |S| matrix R, which is what this class holds.
template <typename Scalar_>
class TikhonovReconstructor {
 public:
  using Scalar = Scalar_;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  TikhonovReconstructor(const BasicSensorGraph<Scalar>& g, const SampleMask& mask, Scalar tau) {
    if (static_cast<Eigen::Index>(mask.size()) != g.size())
      throw Error(Errc::DimensionMismatch, "mask covers " + std::to_string(mask.size()) +
                                               " nodes, graph has " + std::to_string(g.size()));
    if (mask.count() == 0) throw Error(Errc::EmptyMask, "no sensor selected");
    require_sampled_components(g, mask);
    compute(laplacian(g), mask, tau);
  }

  /// Skips the component diagnostics; an unsampled component surfaces as a
  /// failed factorization (SingularSystem without node names).
  TikhonovReconstructor(const Matrix& lap, const SampleMask& mask, Scalar tau) {
    if (static_cast<Eigen::Index>(mask.size()) != lap.rows())
      throw Error(Errc::DimensionMismatch, "mask covers " + std::to_string(mask.size()) +
                                               " nodes, Laplacian has " + std::to_string(lap.rows()));
    compute(lap, mask, tau);
  }

  /// N x |S| map from observed values (ascending sensor index order) to the
  /// full signal.
  const Matrix& operator_matrix() const { return operator_; }
  const std::vector<Eigen::Index>& sampled() const { return sampled_; }

  /// Reconstruct one signal (vector) or many (one column per timestep).
  template <typename Derived>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> operator()(
      const Eigen::MatrixBase<Derived>& observed) const {
    if (observed.rows() != static_cast<Eigen::Index>(sampled_.size()))
      throw Error(Errc::DimensionMismatch, "observed has " + std::to_string(observed.rows()) +
                                               " rows, mask selects " + std::to_string(sampled_.size()));
    return operator_ * observed;
  }

 private:
  void compute(const Matrix& lap, const SampleMask& mask, Scalar tau) {
    if (!(tau >= Scalar(0))) throw Error(Errc::ConfigInvalid, "tau must be non-negative");
    sampled_ = mask.indices();
    if (sampled_.empty()) throw Error(Errc::EmptyMask, "no sensor selected");
    const Eigen::Index n = lap.rows();
    const auto s = static_cast<Eigen::Index>(sampled_.size());
    operator_ = Matrix::Zero(n, s);
    if (tau > Scalar(0)) {
      Matrix system = tau * lap;
      Matrix rhs = Matrix::Zero(n, s);
      for (Eigen::Index c = 0; c < s; ++c) {
        system(sampled_[c], sampled_[c]) += Scalar(1);
        rhs(sampled_[c], c) = Scalar(1);
      }
      Eigen::LLT<Matrix> llt(system);
      if (llt.info() != Eigen::Success) throw Error(Errc::SingularSystem, "regularized system not positive definite");
      operator_ = llt.solve(rhs);
    } else {
      const auto unsampled = mask.complement();
      const auto u = static_cast<Eigen::Index>(unsampled.size());
      for (Eigen::Index c = 0; c < s; ++c) operator_(sampled_[c], c) = Scalar(1);
      if (u > 0) {
        const Matrix l_uu = lap(unsampled, unsampled);
        const Matrix l_us = lap(unsampled, sampled_);
        // LDLT avoids square roots, so rational cases such as a path midpoint come out exact
        Eigen::LDLT<Matrix> ldlt(l_uu);
        const auto d = ldlt.vectorD();
        if (ldlt.info() != Eigen::Success || !(d.minCoeff() > Scalar(1e-12) * d.cwiseAbs().maxCoeff()))
          throw Error(Errc::SingularSystem, "L[U,U] not positive definite");
        const Matrix interior = -ldlt.solve(l_us);
        for (Eigen::Index r = 0; r < u; ++r) operator_.row(unsampled[r]) = interior.row(r);
      }
    }
  }

  std::vector<Eigen::Index> sampled_;
  Matrix operator_;
};
template <typename Scalar>
struct ReconstructionProblem {
  BasicSensorGraph<Scalar> graph;
  SampleMask mask;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> observed;
  Scalar tau = Scalar(0);
};

/// Full graph signal from the observed values at the selected nodes.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> tikhonov_reconstruct(
    const BasicSensorGraph<Scalar>& g, const SampleMask& mask, const Eigen::MatrixBase<Derived>& observed,
    Scalar tau = Scalar(0)) {
  return TikhonovReconstructor<Scalar>(g, mask, tau)(observed);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tikhonov_reconstruct(const ReconstructionProblem<Scalar>& p) {
  return tikhonov_reconstruct(p.graph, p.mask, p.observed, p.tau);
}

/// Ascending list of timesteps covered by any window. Throws EmptyWindows
/// and RangeOutOfBounds.
std::vector<Eigen::Index> window_steps(const std::vector<EventWindow>& windows, Eigen::Index num_steps);

/// RMSE pooled over all sensors and the union of the event-window steps.
double reconstruction_rmse(const Eigen::MatrixXd& original, const Eigen::MatrixXd& reconstructed,
                           const std::vector<EventWindow>& windows);

}  // namespace gsp
