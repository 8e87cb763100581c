#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gsp/error.hpp"
#include "gsp/sensors.hpp"

namespace gsp {

/// Weighted undirected sensor graph stored as a dense adjacency matrix.
///
/// Invariants (checked on construction): weights is square with one row per
/// node, symmetric, has a zero diagonal and no negative entries.
template <typename Scalar_>
class BasicSensorGraph {
 public:
  using Scalar = Scalar_;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicSensorGraph() = default;

  BasicSensorGraph(std::vector<SensorInfo> nodes, Matrix weights)
      : nodes_(std::move(nodes)), weights_(std::move(weights)) {
    validate();
  }

  /// Graph over `n` default-named nodes.
  explicit BasicSensorGraph(const Matrix& weights)
      : BasicSensorGraph(default_sensors(static_cast<std::size_t>(weights.rows())), weights) {}

  Eigen::Index size() const { return weights_.rows(); }
  const Matrix& weights() const { return weights_; }
  const std::vector<SensorInfo>& nodes() const { return nodes_; }

  std::size_t edge_count() const {
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < size(); ++j)
      for (Eigen::Index i = 0; i < j; ++i)
        if (weights_(i, j) != Scalar(0)) ++count;
    return count;
  }

 private:
  void validate() const {
    if (weights_.rows() != weights_.cols())
      throw Error(Errc::InvalidGraph, "adjacency matrix is not square");
    if (static_cast<Eigen::Index>(nodes_.size()) != weights_.rows())
      throw Error(Errc::InvalidGraph, "node count " + std::to_string(nodes_.size()) +
                                          " does not match adjacency dimension " +
                                          std::to_string(weights_.rows()));
    for (Eigen::Index i = 0; i < size(); ++i) {
      if (weights_(i, i) != Scalar(0))
        throw Error(Errc::InvalidGraph, "nonzero diagonal at node " + nodes_[i].id);
      for (Eigen::Index j = 0; j < i; ++j) {
        const Scalar w = weights_(i, j);
        if (w != weights_(j, i))
          throw Error(Errc::InvalidGraph, "asymmetric weight between " + nodes_[i].id + " and " +
                                              nodes_[j].id);
        if (!(w >= Scalar(0)) || !std::isfinite(static_cast<double>(w)))
          throw Error(Errc::InvalidGraph, "negative or non-finite weight between " +
                                              nodes_[i].id + " and " + nodes_[j].id);
      }
    }
  }

  std::vector<SensorInfo> nodes_;
  Matrix weights_;
};

using SensorGraph = BasicSensorGraph<double>;

template <typename Scalar>
typename BasicSensorGraph<Scalar>::Matrix degree_matrix(const BasicSensorGraph<Scalar>& g) {
  return g.weights().rowwise().sum().asDiagonal();
}

/// Combinatorial Laplacian D - A.
template <typename Scalar>
typename BasicSensorGraph<Scalar>::Matrix laplacian(const BasicSensorGraph<Scalar>& g) {
  typename BasicSensorGraph<Scalar>::Matrix lap = -g.weights();
  lap.diagonal() = g.weights().rowwise().sum();
  return lap;
}

/// Renormalized adjacency used by graph convolutions:
/// Dhat^{-1/2} (A + I) Dhat^{-1/2}, with Dhat the degree matrix of A + I.
template <typename Scalar>
typename BasicSensorGraph<Scalar>::Matrix normalized_adjacency(const BasicSensorGraph<Scalar>& g) {
  using Matrix = typename BasicSensorGraph<Scalar>::Matrix;
  const Eigen::Index n = g.size();
  Matrix a_hat = g.weights() + Matrix::Identity(n, n);
  const auto inv_sqrt = a_hat.rowwise().sum().cwiseSqrt().cwiseInverse().eval();
  return inv_sqrt.asDiagonal() * a_hat * inv_sqrt.asDiagonal();
}

/// Connected components as lists of node indices, ordered by smallest member.
template <typename Scalar>
std::vector<std::vector<Eigen::Index>> connected_components(const BasicSensorGraph<Scalar>& g) {
  const Eigen::Index n = g.size();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<Eigen::Index>> components;
  for (Eigen::Index root = 0; root < n; ++root) {
    if (label[root] >= 0) continue;
    const int id = static_cast<int>(components.size());
    std::vector<Eigen::Index> members{root};
    label[root] = id;
    for (std::size_t head = 0; head < members.size(); ++head) {
      const Eigen::Index u = members[head];
      for (Eigen::Index v = 0; v < n; ++v) {
        if (label[v] < 0 && g.weights()(u, v) != Scalar(0)) {
          label[v] = id;
          members.push_back(v);
        }
      }
    }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }
  return components;
}

}  // namespace gsp
