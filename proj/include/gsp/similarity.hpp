#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "gsp/graph.hpp"
#include "gsp/sensors.hpp"

namespace gsp {

enum class SimilarityKind { Correlation, DtwDistance };

/// Pairwise scores between sensors. Correlation keeps its sign here; the
/// graph builder ranks by affinity instead.
struct SimilarityMatrix {
  Eigen::MatrixXd scores;
  SimilarityKind kind = SimilarityKind::Correlation;
};

/// Pearson correlation coefficient. Throws LengthMismatch, ZeroVariance.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Dynamic time warping distance with |x_i - y_j| local cost, unconstrained
/// window and both series' endpoints matched. O(n*m) time, O(m) memory.
double dtw_distance(std::span<const double> x, std::span<const double> y);

SimilarityMatrix similarity_matrix(const SignalMatrix& signals, SimilarityKind kind);

/// Ranking score used for edge selection: |r| for correlation, 1/(1+d) for DTW.
double affinity(SimilarityKind kind, double score);

struct GraphBuild {
  SensorGraph graph;
  /// Per-node top-k picks counted individually (N * min(k, N-1)).
  std::size_t edge_selections = 0;
  SimilarityMatrix similarity;
};

/// Each node picks its top-k neighbors by affinity (ties to the lower index);
/// the union of picks becomes an undirected graph weighted by affinity.
GraphBuild build_graph(const SignalMatrix& signals, SimilarityKind kind, std::size_t k = 3);

/// Same selection rule on a precomputed similarity matrix.
GraphBuild build_graph(const SimilarityMatrix& similarity, std::vector<SensorInfo> nodes,
                       std::size_t k = 3);

}  // namespace gsp
