#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "run.hpp"

namespace gsp::cli {

// Every option struct mirrors one subcommand's flags; its JSON form is the
// config snapshot stored in the manifest and replayed by `rerun`.

struct EventOptions {
  double event_threshold = 2.0;
  std::size_t merge_gap = 10;
  std::size_t pad = 10;
  std::size_t top_n = 10;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EventOptions, event_threshold, merge_gap, pad, top_n)

struct SimulateOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::size_t girder_lines = 2;
  std::size_t sensors_per_girder = 12;
  std::size_t deck_rows = 3;
  std::size_t deck_cols = 6;
  double span = 100.0;
  double width = 12.0;
  double duration = 300.0;
  double sample_rate = 100.0;
  std::size_t vehicles = 40;
  double truck_fraction = 0.25;
  double min_speed = 15.0;
  double max_speed = 25.0;
  double noise_sd = 0.02;
  double deck_factor = 0.5;
  double lateral_sd = 6.0;
  double local_sd = 3.0;
  double local_gain = 0.5;
  double bin = 0.1;
  EventOptions events;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SimulateOptions, seed, out, girder_lines, sensors_per_girder, deck_rows,
                                                deck_cols, span, width, duration, sample_rate, vehicles, truck_fraction,
                                                min_speed, max_speed, noise_sd, deck_factor, lateral_sd, local_sd,
                                                local_gain, bin, events)

struct PreprocessOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string in;
  std::string sensors;
  double sample_rate = 0.0;  // 0: infer from the t column
  double bin = 0.1;
  std::vector<std::string> exclude;
  std::string align_reference;
  int max_lag = 20;
  bool no_standardize = false;
  EventOptions events;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PreprocessOptions, seed, out, in, sensors, sample_rate, bin, exclude,
                                                align_reference, max_lag, no_standardize, events)

struct BuildGraphOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string in;
  std::string sensors;
  std::string metric = "corr";
  std::size_t topk = 3;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BuildGraphOptions, seed, out, in, sensors, metric, topk)

struct SampleOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string algo = "topdown";
  std::string graph;
  std::string signals;
  std::string events;
  double budget = 0.25;
  std::size_t iters = 500;
  std::size_t top_pool = 3;
  bool filtered = false;
  double filter_coefficient = 0.5;
  double tau = 0.0;
  bool timings = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SampleOptions, seed, out, algo, graph, signals, events, budget, iters,
                                                top_pool, filtered, filter_coefficient, tau, timings)

struct ReconstructOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string graph;
  std::string signals;
  std::string mask;
  double tau = 0.0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ReconstructOptions, seed, out, graph, signals, mask, tau)

struct FilterOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string graph;
  std::string signals;
  std::string filter = "lowpass:0.5";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FilterOptions, seed, out, graph, signals, filter)

struct TvOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string graph;
  std::string signals;
  bool per_node = false;
  std::string shift = "rownorm";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TvOptions, seed, out, graph, signals, per_node, shift)

struct ForecastOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string graph;
  std::string signals;
  std::string mask;
  std::string checkpoint;
  bool filtered = false;
  double filter_coefficient = 0.5;
  long input_length = 10;
  long horizon = 12;
  double split = 0.8;
  std::size_t epochs = 100;
  std::size_t batch = 32;
  double lr = 1e-3;
  std::size_t patience = 20;
  bool timings = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ForecastOptions, seed, out, graph, signals, mask, checkpoint, filtered,
                                                filter_coefficient, input_length, horizon, split, epochs, batch, lr,
                                                patience, timings)

struct GridOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string signals;
  std::string sensors;
  std::string events;
  std::vector<std::string> algos{"random", "topdown", "bottomup"};
  std::vector<std::string> metrics{"corr", "dtw"};
  std::vector<std::string> conditions{"filtered", "unfiltered"};
  std::vector<std::string> subsets{"XStrain", "YStrain", "Combined"};
  double budget = 0.25;
  std::size_t iters = 500;
  std::size_t topk = 3;
  EventOptions detect;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GridOptions, seed, out, signals, sensors, events, algos, metrics,
                                                conditions, subsets, budget, iters, topk, detect)

struct SnapshotOptions {
  std::uint64_t seed = 1;
  std::string out;
  std::string graph;
  std::string signals;
  long from = 0;
  long to = 1;
  bool tv = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SnapshotOptions, seed, out, graph, signals, from, to, tv)

void run_simulate(const SimulateOptions& o);
void run_preprocess(const PreprocessOptions& o);
void run_buildgraph(const BuildGraphOptions& o);
void run_sample(const SampleOptions& o);
void run_reconstruct(const ReconstructOptions& o);
void run_filter(const FilterOptions& o);
void run_tv(const TvOptions& o);
void run_forecast(const ForecastOptions& o);
void run_grid(const GridOptions& o);
void run_snapshot(const SnapshotOptions& o);

/// Re-executes the command recorded in a manifest and compares the new
/// output digests with the recorded ones. Returns the mismatching paths.
std::vector<std::string> rerun(const std::string& manifest_path);

}  // namespace gsp::cli
