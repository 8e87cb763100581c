#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "gsp/graph.hpp"
#include "gsp/reconstruct.hpp"
#include "gsp/sensors.hpp"
#include "gsp/spectral.hpp"

namespace gsp {

enum class SearchAlgorithm { Random, BottomUp, TopDown };

std::string_view to_string(SearchAlgorithm algorithm);
SearchAlgorithm parse_search_algorithm(std::string_view text);

struct SearchConfig {
  double budget_fraction = 0.25;
  std::size_t iterations = 500;
  std::size_t top_pool = 3;
  std::uint64_t rng_seed = 0;
  bool filtered = false;
  double filter_coefficient = 0.5;
  double tau = 0.0;

  /// ceil(budget_fraction * n), at least 1.
  std::size_t budget(std::size_t n) const;
  void validate() const;
};

/// Seed of restart `i`: rng_seed XOR i * 0x9E3779B97F4A7C15.
std::uint64_t restart_seed(std::uint64_t rng_seed, std::uint64_t restart);

struct TracePoint {
  std::size_t iteration = 0;
  double best_rmse = 0.0;
  double seconds = 0.0;  ///< wall clock spent in this iteration
};

struct SearchResult {
  SampleMask mask;
  double rmse = 0.0;
  SearchAlgorithm algorithm = SearchAlgorithm::Random;
  /// Best-so-far objective after every iteration (draw or restart).
  std::vector<TracePoint> iteration_trace;
  /// Objective after each greedy step of the climb that produced `mask`.
  std::vector<double> climb_trace;
  std::size_t unique_solutions = 0;
  std::size_t evaluations = 0;
};

/// Event-window reconstruction RMSE of a mask, the objective every search
/// minimizes. Reconstruction is linear (x = R y_S), so the squared error over
/// the window steps is computed from the window Gram matrix G = Y Y^T:
///   ||R Y_S - Y||^2 = tr(R G_SS R^T) - 2 tr(R G_S*) + tr(G).
/// With tau = 0 only the unsampled rows U carry error, Y_U - X Y_S with
/// X = -L_UU^{-1} L_US, which also equals L_UU^{-1} (L Y)_U. The cheaper of the
/// two forms is used: the Gram form costs ~|U||S|^2, the second ~|U|^3 via
/// H = L G L.
class MaskObjective {
 public:
  MaskObjective(const SensorGraph& graph, const SignalMatrix& signals, const std::vector<EventWindow>& windows,
                bool filtered, double tau, double filter_coefficient = 0.5);

  /// Throws SingularSystem / EmptyMask for infeasible masks.
  double operator()(const SampleMask& mask) const;
  /// nullopt where operator() would throw SingularSystem or EmptyMask.
  std::optional<double> try_evaluate(const SampleMask& mask) const;

  /// RMSE of the mask on each window separately, by explicit reconstruction.
  std::vector<double> per_window(const SampleMask& mask) const;

  /// The signal the objective compares against (filtered when requested).
  const Eigen::MatrixXd& reference() const { return reference_; }
  Eigen::Index size() const { return graph_.size(); }
  const SensorGraph& graph() const { return graph_; }

 private:
  SensorGraph graph_;
  Eigen::MatrixXd laplacian_;
  std::vector<int> labels_;
  int components_ = 0;
  std::vector<EventWindow> windows_;
  double tau_;
  Eigen::MatrixXd reference_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd smoothed_gram_;  // L G L, used when tau = 0
  double total_energy_ = 0.0;
  double samples_ = 0.0;
};

double evaluate_mask(const SensorGraph& graph, const SignalMatrix& signals, const std::vector<EventWindow>& windows,
                     const SampleMask& mask, bool filtered, double tau);

/// Memoizes objective values by mask within one search run.
class ObjectiveCache {
 public:
  explicit ObjectiveCache(const MaskObjective& objective) : objective_(objective) {}
  /// +infinity for infeasible masks.
  double operator()(const SampleMask& mask);
  std::size_t evaluations() const { return evaluations_; }

 private:
  const MaskObjective& objective_;
  std::unordered_map<std::vector<bool>, double> values_;
  std::size_t evaluations_ = 0;
};

SearchResult random_search(const SensorGraph& graph, const SignalMatrix& signals,
                           const std::vector<EventWindow>& windows, const SearchConfig& config);
SearchResult bottom_up(const SensorGraph& graph, const SignalMatrix& signals, const std::vector<EventWindow>& windows,
                       const SearchConfig& config);
SearchResult top_down(const SensorGraph& graph, const SignalMatrix& signals, const std::vector<EventWindow>& windows,
                      const SearchConfig& config);

SearchResult run_search(SearchAlgorithm algorithm, const SensorGraph& graph, const SignalMatrix& signals,
                        const std::vector<EventWindow>& windows, const SearchConfig& config);

/// Same searches on a prebuilt objective (lets callers share the filtering
/// and Gram precomputation across runs).
SearchResult run_search(SearchAlgorithm algorithm, const MaskObjective& objective, const SearchConfig& config);

}  // namespace gsp
