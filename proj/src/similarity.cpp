#include "gsp/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace gsp {

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(Errc::LengthMismatch, "series lengths " + std::to_string(x.size()) + " and " +
                                          std::to_string(y.size()));
  if (x.size() < 2) throw Error(Errc::LengthMismatch, "correlation needs at least 2 samples");
  const auto n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::ZeroVariance, "constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double dtw_distance(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error(Errc::EmptySeries, "dtw on empty series");
  const std::size_t m = y.size();
  std::vector<double> prev(m), curr(m);
  // first row: only horizontal moves
  prev[0] = std::abs(x[0] - y[0]);
  for (std::size_t j = 1; j < m; ++j) prev[j] = prev[j - 1] + std::abs(x[0] - y[j]);
  for (std::size_t i = 1; i < x.size(); ++i) {
    curr[0] = prev[0] + std::abs(x[i] - y[0]);
    for (std::size_t j = 1; j < m; ++j)
      curr[j] = std::abs(x[i] - y[j]) + std::min({prev[j], curr[j - 1], prev[j - 1]});
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

double affinity(SimilarityKind kind, double score) {
  return kind == SimilarityKind::Correlation ? std::abs(score) : 1.0 / (1.0 + score);
}

SimilarityMatrix similarity_matrix(const SignalMatrix& signals, SimilarityKind kind) {
  signals.validate();
  const Eigen::Index n = signals.num_sensors();
  // Row-major copy so each sensor's series is contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = signals.values;
  const auto series = [&](Eigen::Index i) {
    return std::span<const double>(rows.row(i).data(), static_cast<std::size_t>(rows.cols()));
  };
  SimilarityMatrix out;
  out.kind = kind;
  out.scores = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (kind == SimilarityKind::Correlation) out.scores(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double score = 0.0;
      try {
        score = kind == SimilarityKind::Correlation ? pearson_correlation(series(i), series(j))
                                                    : dtw_distance(series(i), series(j));
      } catch (const Error& e) {
        throw Error(e.code(), "sensors " + signals.sensors[i].id + " / " + signals.sensors[j].id +
                                  ": " + e.what());
      }
      out.scores(i, j) = score;
      out.scores(j, i) = score;
    }
  }
  return out;
}

GraphBuild build_graph(const SimilarityMatrix& similarity, std::vector<SensorInfo> nodes, std::size_t k) {
  const Eigen::Index n = similarity.scores.rows();
  if (n < 2) throw Error(Errc::ShapeMismatch, "graph construction needs at least 2 sensors");
  if (similarity.scores.cols() != n || static_cast<Eigen::Index>(nodes.size()) != n)
    throw Error(Errc::ShapeMismatch, "similarity matrix and node list disagree");
  if (k == 0) throw Error(Errc::ConfigInvalid, "topk must be positive");
  const std::size_t picks = std::min<std::size_t>(k, static_cast<std::size_t>(n - 1));

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::Index> candidates;
  for (Eigen::Index i = 0; i < n; ++i) {
    candidates.clear();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) candidates.push_back(j);
    const auto score = [&](Eigen::Index j) { return affinity(similarity.kind, similarity.scores(i, j)); };
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return score(a) > score(b); });
    for (std::size_t p = 0; p < picks; ++p) {
      const Eigen::Index j = candidates[p];
      weights(i, j) = score(j);
      weights(j, i) = score(j);
    }
  }

  GraphBuild out{SensorGraph(std::move(nodes), std::move(weights)), picks * static_cast<std::size_t>(n),
                 similarity};
  return out;
}

GraphBuild build_graph(const SignalMatrix& signals, SimilarityKind kind, std::size_t k) {
  if (signals.num_sensors() < 2) throw Error(Errc::ShapeMismatch, "graph construction needs at least 2 sensors");
  return build_graph(similarity_matrix(signals, kind), signals.sensors, k);
}

}  // namespace gsp
