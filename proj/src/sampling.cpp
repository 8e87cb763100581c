#include "gsp/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

namespace gsp {

namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_inputs(const SensorGraph& graph, const SignalMatrix& signals) {
  signals.validate();
  if (signals.num_sensors() != graph.size())
    throw Error(Errc::DimensionMismatch, "signals have " + std::to_string(signals.num_sensors()) +
                                             " sensors, graph has " + std::to_string(graph.size()) + " nodes");
}

}  // namespace

std::string_view to_string(SearchAlgorithm algorithm) {
  switch (algorithm) {
    case SearchAlgorithm::Random: return "random";
    case SearchAlgorithm::BottomUp: return "bottomup";
    case SearchAlgorithm::TopDown: return "topdown";
  }
  return "random";
}

SearchAlgorithm parse_search_algorithm(std::string_view text) {
  if (text == "random") return SearchAlgorithm::Random;
  if (text == "bottomup") return SearchAlgorithm::BottomUp;
  if (text == "topdown") return SearchAlgorithm::TopDown;
  throw Error(Errc::ConfigInvalid, "algo: expected random, bottomup or topdown, got '" + std::string(text) + "'");
}

std::size_t SearchConfig::budget(std::size_t n) const {
  const double raw = std::ceil(budget_fraction * static_cast<double>(n) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

void SearchConfig::validate() const {
  if (!(budget_fraction > 0.0 && budget_fraction <= 1.0))
    throw Error(Errc::ConfigInvalid, "budget: fraction must be in (0, 1]");
  if (iterations == 0) throw Error(Errc::ConfigInvalid, "iters: must be positive");
  if (top_pool == 0) throw Error(Errc::ConfigInvalid, "top_pool: must be positive");
  if (!(tau >= 0.0)) throw Error(Errc::ConfigInvalid, "tau: must be non-negative");
}

std::uint64_t restart_seed(std::uint64_t rng_seed, std::uint64_t restart) {
  return rng_seed ^ (restart * 0x9E3779B97F4A7C15ULL);
}

MaskObjective::MaskObjective(const SensorGraph& graph, const SignalMatrix& signals,
                             const std::vector<EventWindow>& windows, bool filtered, double tau,
                             double filter_coefficient)
    : graph_(graph), windows_(windows), tau_(tau) {
  check_inputs(graph, signals);
  laplacian_ = laplacian(graph_);
  labels_ = component_labels(graph_);
  components_ = labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end()) + 1;
  const auto steps = window_steps(windows, signals.num_steps());
  reference_ = signals.values;
  if (filtered) {
    const auto basis = decompose(graph_);
    reference_ = apply_filter(basis, signals.values, lowpass_filter(filter_coefficient));
  }
  const Eigen::MatrixXd window_values = reference_(Eigen::all, steps);
  gram_ = window_values * window_values.transpose();
  total_energy_ = gram_.trace();
  if (tau_ == 0.0) smoothed_gram_ = laplacian_ * gram_ * laplacian_;
  samples_ = static_cast<double>(window_values.size());
}

double MaskObjective::operator()(const SampleMask& mask) const {
  if (static_cast<Eigen::Index>(mask.size()) != graph_.size())
    throw Error(Errc::DimensionMismatch, "mask does not match graph size");
  if (mask.count() == 0) throw Error(Errc::EmptyMask, "no sensor selected");
  std::vector<bool> covered(static_cast<std::size_t>(components_), false);
  int hit = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask.selected[i] && !covered[static_cast<std::size_t>(labels_[i])]) {
      covered[static_cast<std::size_t>(labels_[i])] = true;
      ++hit;
    }
  if (hit != components_) require_sampled_components(graph_, mask);  // throws with diagnostics
  if (tau_ > 0.0) {
    const TikhonovReconstructor<double> solver(laplacian_, mask, tau_);
    const auto& r = solver.operator_matrix();
    const auto& s = solver.sampled();
    const Eigen::MatrixXd g_ss = gram_(s, s);
    const double fitted = (r * g_ss).cwiseProduct(r).sum();
    const double cross = r.cwiseProduct(gram_(Eigen::all, s)).sum();
    return std::sqrt(std::max(0.0, fitted - 2.0 * cross + total_energy_) / samples_);
  }
  const auto u = mask.complement();
  if (u.empty()) return 0.0;
  const auto s = mask.indices();
  Eigen::LLT<Eigen::MatrixXd> llt(laplacian_(u, u));
  if (llt.info() != Eigen::Success) throw Error(Errc::SingularSystem, "L[U,U] not positive definite");
  double squared = 0.0;
  if (s.size() >= u.size()) {
    const Eigen::MatrixXd k = llt.solve(smoothed_gram_(u, u));
    squared = llt.solve(k.transpose()).trace();
  } else {
    const Eigen::MatrixXd x = -llt.solve(laplacian_(u, s));
    const double fitted = (x * gram_(s, s)).cwiseProduct(x).sum();
    const double cross = x.cwiseProduct(gram_(u, s)).sum();
    squared = fitted - 2.0 * cross + gram_(u, u).trace();
  }
  return std::sqrt(std::max(0.0, squared) / samples_);
}

std::optional<double> MaskObjective::try_evaluate(const SampleMask& mask) const {
  try {
    return (*this)(mask);
  } catch (const Error& e) {
    if (e.code() == Errc::SingularSystem || e.code() == Errc::EmptyMask) return std::nullopt;
    throw;
  }
}

std::vector<double> MaskObjective::per_window(const SampleMask& mask) const {
  const TikhonovReconstructor<double> solver(graph_, mask, tau_);
  std::vector<double> out;
  for (const auto& w : windows_) {
    const auto block = reference_.middleCols(static_cast<Eigen::Index>(w.start), static_cast<Eigen::Index>(w.length()));
    const Eigen::MatrixXd observed = block(solver.sampled(), Eigen::all);
    const Eigen::MatrixXd rebuilt = solver(observed);
    out.push_back(std::sqrt((rebuilt - block).squaredNorm() / static_cast<double>(block.size())));
  }
  return out;
}

double evaluate_mask(const SensorGraph& graph, const SignalMatrix& signals, const std::vector<EventWindow>& windows,
                     const SampleMask& mask, bool filtered, double tau) {
  return MaskObjective(graph, signals, windows, filtered, tau)(mask);
}

double ObjectiveCache::operator()(const SampleMask& mask) {
  const auto found = values_.find(mask.selected);
  if (found != values_.end()) return found->second;
  ++evaluations_;
  const double value = objective_.try_evaluate(mask).value_or(kInfeasible);
  values_.emplace(mask.selected, value);
  return value;
}

namespace {

struct Candidate {
  Eigen::Index index;
  double rmse;
};

class SearchRun {
 public:
  SearchRun(const MaskObjective& objective, const SearchConfig& config, SearchAlgorithm algorithm)
      : config_(config), cache_(objective), n_(static_cast<std::size_t>(objective.size())) {
    config.validate();
    budget_ = config.budget(n_);
    if (budget_ >= n_)
      throw Error(Errc::BudgetTooLarge, "budget " + std::to_string(budget_) + " must be below sensor count " +
                                            std::to_string(n_));
    result_.algorithm = algorithm;
    result_.rmse = kInfeasible;
  }

  SearchResult run() {
    for (std::size_t i = 0; i < config_.iterations; ++i) {
      const auto start = Clock::now();
      std::mt19937_64 rng(restart_seed(config_.rng_seed, i));
      std::vector<double> climb;
      const auto mask = result_.algorithm == SearchAlgorithm::Random ? draw(rng) : climb_once(rng, climb);
      if (mask) offer(*mask, std::move(climb));
      result_.iteration_trace.push_back({i, result_.rmse, seconds_since(start)});
    }
    if (!std::isfinite(result_.rmse))
      throw Error(Errc::SingularSystem, "no feasible mask found; every candidate leaves a component unsampled");
    result_.mask.budget = budget_;
    result_.unique_solutions = seen_.size();
    result_.evaluations = cache_.evaluations();
    return result_;
  }

 private:
  std::optional<SampleMask> draw(std::mt19937_64& rng) {
    std::vector<Eigen::Index> order(n_);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (std::size_t k = 0; k < budget_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n_ - 1);
      std::swap(order[k], order[pick(rng)]);
    }
    order.resize(budget_);
    return SampleMask::from_indices(n_, order, budget_);
  }

  std::optional<SampleMask> climb_once(std::mt19937_64& rng, std::vector<double>& climb) {
    const bool forward = result_.algorithm == SearchAlgorithm::BottomUp;
    SampleMask mask;
    mask.selected.assign(n_, !forward);
    const std::size_t steps = forward ? budget_ : n_ - budget_;
    std::vector<Candidate> candidates;
    for (std::size_t step = 0; step < steps; ++step) {
      candidates.clear();
      for (std::size_t j = 0; j < n_; ++j) {
        if (mask.selected[j] != !forward) continue;  // adding unselected / removing selected
        mask.selected[j] = forward;
        candidates.push_back({static_cast<Eigen::Index>(j), cache_(mask)});
        mask.selected[j] = !forward;
      }
      std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.rmse < b.rmse || (a.rmse == b.rmse && a.index < b.index);
      });
      std::size_t feasible = 0;
      while (feasible < candidates.size() && std::isfinite(candidates[feasible].rmse)) ++feasible;
      if (feasible == 0) {
        // Only reachable while growing a mask that still misses a component:
        // every addition is equally infeasible, so choose among all of them.
        if (!forward) return std::nullopt;
        feasible = candidates.size();
      }
      std::uniform_int_distribution<std::size_t> pick(0, std::min(config_.top_pool, feasible) - 1);
      const Candidate chosen = candidates[pick(rng)];
      mask.selected[static_cast<std::size_t>(chosen.index)] = forward;
      climb.push_back(chosen.rmse);
    }
    mask.budget = budget_;
    return mask;
  }

  void offer(const SampleMask& mask, std::vector<double> climb) {
    const double value = cache_(mask);
    if (!std::isfinite(value)) return;
    seen_.insert(mask.key());
    if (value < result_.rmse) {
      result_.rmse = value;
      result_.mask = mask;
      result_.climb_trace = std::move(climb);
    }
  }

  SearchConfig config_;
  ObjectiveCache cache_;
  std::size_t n_;
  std::size_t budget_ = 0;
  SearchResult result_;
  std::unordered_set<std::string> seen_;
};

}  // namespace

SearchResult run_search(SearchAlgorithm algorithm, const MaskObjective& objective, const SearchConfig& config) {
  return SearchRun(objective, config, algorithm).run();
}

SearchResult run_search(SearchAlgorithm algorithm, const SensorGraph& graph, const SignalMatrix& signals,
                        const std::vector<EventWindow>& windows, const SearchConfig& config) {
  config.validate();
  const MaskObjective objective(graph, signals, windows, config.filtered, config.tau, config.filter_coefficient);
  return run_search(algorithm, objective, config);
}

SearchResult random_search(const SensorGraph& graph, const SignalMatrix& signals,
                           const std::vector<EventWindow>& windows, const SearchConfig& config) {
  return run_search(SearchAlgorithm::Random, graph, signals, windows, config);
}

SearchResult bottom_up(const SensorGraph& graph, const SignalMatrix& signals, const std::vector<EventWindow>& windows,
                       const SearchConfig& config) {
  return run_search(SearchAlgorithm::BottomUp, graph, signals, windows, config);
}

SearchResult top_down(const SensorGraph& graph, const SignalMatrix& signals, const std::vector<EventWindow>& windows,
                      const SearchConfig& config) {
  return run_search(SearchAlgorithm::TopDown, graph, signals, windows, config);
}

}  // namespace gsp
