#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>

#include "gsp/dataio.hpp"
#include "gsp/io.hpp"
#include "gsp/reconstruct.hpp"
#include "gsp/sampling.hpp"
#include "gsp/similarity.hpp"
#include "gsp/spectral.hpp"
#include "gsp/tgcn.hpp"

namespace gsp::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

void require(const std::string& value, const char* key) {
  if (value.empty()) throw Error(Errc::ConfigInvalid, std::string(key) + ": required");
}

EventConfig event_config(const EventOptions& o) {
  EventConfig c;
  c.threshold = o.event_threshold;
  c.merge_gap = o.merge_gap;
  c.pad = o.pad;
  c.top_n = o.top_n;
  return c;
}

SignalMatrix load_signals(const std::string& path, const std::string& sensors, Run& run) {
  run.input(path);
  if (sensors.empty()) return io::read_signals_csv(path);
  run.input(sensors);
  const auto meta = io::read_sensors(sensors);
  return io::read_signals_csv(path, &meta);
}

SensorGraph load_graph(const std::string& path, Run& run) {
  require(path, "graph");
  run.input(path);
  return io::read_graph(path);
}

/// Rows reordered to the graph's node order; metadata taken from the graph.
SignalMatrix match_graph(const SignalMatrix& signals, const SensorGraph& graph) {
  std::vector<Eigen::Index> rows;
  for (const auto& node : graph.nodes()) {
    const auto i = signals.index_of(node.id);
    if (i < 0) throw Error(Errc::DimensionMismatch, "graph node '" + node.id + "' has no signal column");
    rows.push_back(i);
  }
  auto out = signals.select_rows(rows);
  out.sensors = graph.nodes();
  return out;
}

/// Accepts a sample result ({mask_indices} or {mask: [ids]}) or a bare list
/// of ids or indices.
SampleMask load_mask(const std::string& path, const SensorGraph& graph, Run& run) {
  run.input(path);
  const auto doc = io::read_json(path);
  const auto n = static_cast<std::size_t>(graph.size());
  const io::json* list = &doc;
  if (doc.is_object()) {
    if (doc.contains("mask_indices"))
      list = &doc.at("mask_indices");
    else if (doc.contains("mask"))
      list = &doc.at("mask");
    else
      throw Error(Errc::ParseError, path + ": expected mask_indices or mask");
  }
  if (!list->is_array()) throw Error(Errc::ParseError, path + ": mask must be a list");
  std::vector<Eigen::Index> indices;
  for (const auto& item : *list) {
    if (item.is_number_integer()) {
      const auto i = item.get<Eigen::Index>();
      if (i < 0 || static_cast<std::size_t>(i) >= n)
        throw Error(Errc::RangeOutOfBounds, "mask index " + std::to_string(i) + " outside graph");
      indices.push_back(i);
    } else if (item.is_string()) {
      const auto id = item.get<std::string>();
      Eigen::Index found = -1;
      for (Eigen::Index i = 0; i < graph.size(); ++i)
        if (graph.nodes()[static_cast<std::size_t>(i)].id == id) found = i;
      if (found < 0) throw Error(Errc::ConfigInvalid, "mask sensor '" + id + "' not in graph");
      indices.push_back(found);
    } else {
      throw Error(Errc::ParseError, path + ": mask entries must be ids or indices");
    }
  }
  return SampleMask::from_indices(n, indices, indices.size());
}

SimilarityKind parse_metric(const std::string& metric) {
  if (metric == "corr") return SimilarityKind::Correlation;
  if (metric == "dtw") return SimilarityKind::DtwDistance;
  throw Error(Errc::ConfigInvalid, "metric: expected corr or dtw, got '" + metric + "'");
}

ShiftOperator parse_shift(const std::string& shift) {
  if (shift == "rownorm") return ShiftOperator::RowNormalized;
  if (shift == "adjacency") return ShiftOperator::Adjacency;
  throw Error(Errc::ConfigInvalid, "shift: expected rownorm or adjacency, got '" + shift + "'");
}

std::vector<std::string> ids_of(const std::vector<SensorInfo>& sensors) {
  std::vector<std::string> ids;
  for (const auto& s : sensors) ids.push_back(s.id);
  return ids;
}

fs::path prepare_dir(const std::string& out) {
  require(out, "out");
  const fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void prepare_file(const std::string& out) {
  require(out, "out");
  const fs::path p(out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

io::json sample_json(const SearchResult& r, const MaskObjective& objective, double fraction, bool timings) {
  io::json doc;
  doc["algorithm"] = std::string(to_string(r.algorithm));
  doc["budget_fraction"] = fraction;
  doc["budget"] = r.mask.count();
  doc["rmse"] = r.rmse;
  doc["mask"] = io::json::array();
  for (const auto i : r.mask.indices()) doc["mask"].push_back(objective.graph().nodes()[static_cast<std::size_t>(i)].id);
  doc["mask_indices"] = r.mask.indices();
  doc["per_window_rmse"] = objective.per_window(r.mask);
  doc["iterations"] = r.iteration_trace.size();
  doc["unique_solutions"] = r.unique_solutions;
  doc["evaluations"] = r.evaluations;
  doc["climb_trace"] = r.climb_trace;
  doc["trace"] = io::json::array();
  for (const auto& p : r.iteration_trace) {
    io::json point{{"iteration", p.iteration}, {"best_rmse", p.best_rmse}};
    if (timings) point["seconds"] = p.seconds;
    doc["trace"].push_back(point);
  }
  return doc;
}

}  // namespace

void run_simulate(const SimulateOptions& o) {
  const auto dir = prepare_dir(o.out);
  Run run("simulate", o, manifest_for_dir(dir));
  SynthConfig cfg;
  cfg.girder_lines = o.girder_lines;
  cfg.sensors_per_girder = o.sensors_per_girder;
  cfg.deck_rows = o.deck_rows;
  cfg.deck_cols = o.deck_cols;
  cfg.span = o.span;
  cfg.width = o.width;
  cfg.duration = o.duration;
  cfg.sample_rate = o.sample_rate;
  cfg.vehicles = o.vehicles;
  cfg.truck_fraction = o.truck_fraction;
  cfg.min_speed = o.min_speed;
  cfg.max_speed = o.max_speed;
  cfg.noise_sd = o.noise_sd;
  cfg.deck_factor = o.deck_factor;
  cfg.lateral_sd = o.lateral_sd;
  cfg.local_sd = o.local_sd;
  cfg.local_gain = o.local_gain;
  cfg.seed = o.seed;

  auto start = Clock::now();
  const auto bridge = synth_bridge(cfg);
  run.timings()["synthesize_seconds"] = seconds_since(start);

  io::write_signals_csv(dir / "recording.csv", bridge.recording.as_signals());
  io::write_sensors(dir / "sensors.json", bridge.recording.sensors);
  io::write_graph(dir / "truth_graph.json", bridge.truth);
  io::json vehicles = io::json::array();
  for (const auto& v : bridge.vehicles)
    vehicles.push_back({{"entry_time", v.entry_time}, {"speed", v.speed}, {"lane_y", v.lane_y}, {"load", v.load}});
  io::write_json(dir / "vehicles.json", vehicles);

  start = Clock::now();
  PreprocessConfig pc;
  pc.bin_seconds = o.bin;
  const auto signals = preprocess(bridge.recording, pc);
  const auto events = detect_events(signals, event_config(o.events));
  run.timings()["preprocess_seconds"] = seconds_since(start);
  io::write_signals_csv(dir / "signals.csv", signals);
  io::write_events(dir / "events.json", events);

  for (const char* name : {"recording.csv", "sensors.json", "truth_graph.json", "vehicles.json", "signals.csv", "events.json"})
    run.output(dir / name);
  run.finish();
}

void run_preprocess(const PreprocessOptions& o) {
  require(o.in, "in");
  const auto dir = prepare_dir(o.out);
  Run run("preprocess", o, manifest_for_dir(dir));
  const auto raw = load_signals(o.in, o.sensors, run);
  RawRecording rec;
  rec.values = raw.values;
  rec.sensors = raw.sensors;
  rec.sample_rate = o.sample_rate;
  if (rec.sample_rate <= 0.0) {
    if (raw.times.size() < 2) throw Error(Errc::SeriesTooShort, "cannot infer sample rate from fewer than 2 rows");
    const double span = raw.times.back() - raw.times.front();
    if (!(span > 0.0)) throw Error(Errc::ConfigInvalid, "sample_rate: t column is not increasing");
    rec.sample_rate = std::round(static_cast<double>(raw.times.size() - 1) / span * 1e6) / 1e6;
  }
  PreprocessConfig pc;
  pc.bin_seconds = o.bin;
  pc.exclude = o.exclude;
  pc.align_reference = o.align_reference;
  pc.max_lag = o.max_lag;
  pc.standardize = !o.no_standardize;
  AlignmentReport report;
  const auto signals = preprocess(rec, pc, &report);
  io::write_signals_csv(dir / "signals.csv", signals);
  io::write_sensors(dir / "sensors.json", signals.sensors);
  run.output(dir / "signals.csv");
  run.output(dir / "sensors.json");
  if (!o.align_reference.empty()) {
    io::json doc = io::json::array();
    for (std::size_t i = 0; i < report.lags.size(); ++i)
      doc.push_back({{"id", signals.sensors[i].id},
                     {"lag", report.lags[i]},
                     {"confidence", report.confidence[i]},
                     {"low_confidence", static_cast<bool>(report.low_confidence[i])}});
    io::write_json(dir / "alignment.json", doc);
    run.output(dir / "alignment.json");
    for (std::size_t i = 0; i < report.lags.size(); ++i)
      if (report.low_confidence[i])
        std::cerr << "warning: alignment of " << signals.sensors[i].id << " has low confidence ("
                  << report.confidence[i] << ")\n";
  }
  io::write_events(dir / "events.json", detect_events(signals, event_config(o.events)));
  run.output(dir / "events.json");
  run.finish();
}

void run_buildgraph(const BuildGraphOptions& o) {
  require(o.in, "in");
  prepare_file(o.out);
  Run run("buildgraph", o, manifest_for_file(o.out));
  const auto kind = parse_metric(o.metric);
  const auto signals = load_signals(o.in, o.sensors, run);
  const auto start = Clock::now();
  const auto built = build_graph(signals, kind, o.topk);
  run.timings()["build_seconds"] = seconds_since(start);
  io::write_graph(o.out, built.graph, built.edge_selections);
  run.output(o.out);
  run.finish();
}

void run_sample(const SampleOptions& o) {
  require(o.signals, "signals");
  require(o.events, "events");
  prepare_file(o.out);
  Run run("sample", o, manifest_for_file(o.out));
  const auto graph = load_graph(o.graph, run);
  const auto signals = match_graph(load_signals(o.signals, "", run), graph);
  run.input(o.events);
  const auto events = io::read_events(o.events);

  SearchConfig cfg;
  cfg.budget_fraction = o.budget;
  cfg.iterations = o.iters;
  cfg.top_pool = o.top_pool;
  cfg.rng_seed = o.seed;
  cfg.filtered = o.filtered;
  cfg.filter_coefficient = o.filter_coefficient;
  cfg.tau = o.tau;
  cfg.validate();
  const auto algorithm = parse_search_algorithm(o.algo);

  const auto start = Clock::now();
  const MaskObjective objective(graph, signals, events, cfg.filtered, cfg.tau, cfg.filter_coefficient);
  const auto result = run_search(algorithm, objective, cfg);
  run.timings()["search_seconds"] = seconds_since(start);
  io::json per_iteration = io::json::array();
  for (const auto& p : result.iteration_trace) per_iteration.push_back(p.seconds);
  run.timings()["iteration_seconds"] = per_iteration;

  io::write_json(o.out, sample_json(result, objective, o.budget, o.timings));
  run.output(o.out);
  run.finish();
}

void run_reconstruct(const ReconstructOptions& o) {
  require(o.signals, "signals");
  require(o.mask, "mask");
  prepare_file(o.out);
  Run run("reconstruct", o, manifest_for_file(o.out));
  const auto graph = load_graph(o.graph, run);
  const auto signals = match_graph(load_signals(o.signals, "", run), graph);
  const auto mask = load_mask(o.mask, graph, run);
  const auto start = Clock::now();
  const TikhonovReconstructor<double> solver(graph, mask, o.tau);
  SignalMatrix out = signals;
  out.values = solver(signals.values(mask.indices(), Eigen::all));
  run.timings()["solve_seconds"] = seconds_since(start);
  io::write_signals_csv(o.out, out);
  run.output(o.out);
  run.finish();
}

void run_filter(const FilterOptions& o) {
  require(o.signals, "signals");
  prepare_file(o.out);
  Run run("filter", o, manifest_for_file(o.out));
  const auto graph = load_graph(o.graph, run);
  const auto spec = parse_filter(o.filter);
  SignalMatrix signals = match_graph(load_signals(o.signals, "", run), graph);
  signals.values = apply_filter(decompose(graph), signals.values, spec);
  io::write_signals_csv(o.out, signals);
  run.output(o.out);
  run.finish();
}

void run_tv(const TvOptions& o) {
  require(o.signals, "signals");
  prepare_file(o.out);
  Run run("tv", o, manifest_for_file(o.out));
  const auto graph = load_graph(o.graph, run);
  const auto shift = parse_shift(o.shift);
  const auto signals = match_graph(load_signals(o.signals, "", run), graph);
  const Eigen::MatrixXd per_node = node_total_variation(graph, signals.values, shift);
  if (o.per_node)
    io::write_table_csv(o.out, ids_of(signals.sensors), signals.times, per_node.transpose());
  else
    io::write_table_csv(o.out, {"tv"}, signals.times, per_node.colwise().sum().transpose());
  run.output(o.out);
  run.finish();
}

void run_forecast(const ForecastOptions& o) {
  require(o.signals, "signals");
  prepare_file(o.out);
  Run run("forecast", o, manifest_for_file(o.out));
  auto graph = load_graph(o.graph, run);
  auto signals = match_graph(load_signals(o.signals, "", run), graph);
  if (o.filtered) signals.values = apply_filter(decompose(graph), signals.values, lowpass_filter(o.filter_coefficient));
  if (!o.mask.empty()) {
    const auto rows = load_mask(o.mask, graph, run).indices();
    std::vector<SensorInfo> nodes;
    for (const auto r : rows) nodes.push_back(graph.nodes()[static_cast<std::size_t>(r)]);
    graph = SensorGraph(nodes, graph.weights()(rows, rows));
    signals = signals.select_rows(rows);
  }

  const auto ws = tgcn::make_windows(signals.values, o.input_length, o.horizon, o.split);
  tgcn::ModelShape shape;
  shape.nodes = graph.size();
  shape.input_length = o.input_length;
  const auto initial = tgcn::init_model(normalized_adjacency(graph), shape, o.seed);
  tgcn::TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch;
  tc.learning_rate = o.lr;
  tc.patience = o.patience;
  tc.seed = o.seed;
  const auto start = Clock::now();
  const auto trained = tgcn::train(initial, ws, tc);
  run.timings()["train_seconds"] = seconds_since(start);
  run.timings()["ms_per_epoch"] = trained.ms_per_epoch;
  if (ws.test.empty()) throw Error(Errc::ConfigInvalid, "split: leaves no test windows");

  const auto targets = ws.targets(ws.test);
  const double model_rmse = tgcn::forecast_rmse(tgcn::predict(trained.model, ws, ws.test), targets);
  const double bench_rmse = tgcn::forecast_rmse(tgcn::benchmark_last_value(ws, ws.test), targets);
  io::json metrics;
  metrics["tgcn_rmse"] = model_rmse;
  metrics["benchmark_rmse"] = bench_rmse;
  metrics["improvement_pct"] = bench_rmse > 0.0 ? 100.0 * (bench_rmse - model_rmse) / bench_rmse : 0.0;
  metrics["trainable_params"] = trained.model.trainable_count();
  metrics["nodes"] = graph.size();
  metrics["train_windows"] = ws.train.size();
  metrics["test_windows"] = ws.test.size();
  metrics["epochs_run"] = trained.curve.size();
  metrics["best_epoch"] = trained.best_epoch;
  metrics["best_validation_loss"] = trained.curve[trained.best_epoch].validation_loss;
  if (o.timings) metrics["ms_per_epoch"] = trained.ms_per_epoch;
  io::write_json(o.out, metrics);
  run.output(o.out);
  if (!o.checkpoint.empty()) {
    tgcn::save_checkpoint(o.checkpoint, trained.model);
    run.output(o.checkpoint);
  }
  run.finish();
}

void run_grid(const GridOptions& o) {
  require(o.signals, "signals");
  prepare_file(o.out);
  Run run("grid", o, manifest_for_file(o.out));
  const auto signals = load_signals(o.signals, o.sensors, run);
  std::vector<EventWindow> events;
  if (o.events.empty()) {
    events = detect_events(signals, event_config(o.detect));
  } else {
    run.input(o.events);
    events = io::read_events(o.events);
  }

  std::vector<SearchAlgorithm> algos;
  for (const auto& a : o.algos) algos.push_back(parse_search_algorithm(a));
  std::vector<SimilarityKind> metrics;
  for (const auto& m : o.metrics) metrics.push_back(parse_metric(m));
  for (const auto& c : o.conditions)
    if (c != "filtered" && c != "unfiltered")
      throw Error(Errc::ConfigInvalid, "conditions: expected filtered or unfiltered, got '" + c + "'");
  std::vector<std::vector<Eigen::Index>> subset_rows;
  for (const auto& s : o.subsets) {
    std::vector<Eigen::Index> rows;
    const bool all = s == "Combined";
    const auto kind = all ? SensorKind::XStrain : parse_sensor_kind(s);
    for (Eigen::Index i = 0; i < signals.num_sensors(); ++i)
      if (all || signals.sensors[static_cast<std::size_t>(i)].kind == kind) rows.push_back(i);
    subset_rows.push_back(std::move(rows));
  }

  // cell values keyed by (algo, condition) row, then column
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t columns = metrics.size() * o.subsets.size();
  std::vector<std::vector<std::array<double, 3>>> table(algos.size() * o.conditions.size(),
                                                        std::vector<std::array<double, 3>>(columns, {nan, nan, nan}));
  io::json errors = io::json::array();
  io::json cell_seconds = io::json::object();

  for (std::size_t m = 0; m < metrics.size(); ++m) {
    auto start = Clock::now();
    const auto similarity = similarity_matrix(signals, metrics[m]);
    run.timings()[o.metrics[m] + "_similarity_seconds"] = seconds_since(start);
    for (std::size_t s = 0; s < o.subsets.size(); ++s) {
      const std::size_t column = m * o.subsets.size() + s;
      const auto& rows = subset_rows[s];
      const auto sub_signals = signals.select_rows(rows);
      std::optional<SensorGraph> graph;
      try {
        if (rows.size() < 2) throw Error(Errc::ConfigInvalid, "subset " + o.subsets[s] + " has fewer than 2 sensors");
        SimilarityMatrix sub{similarity.scores(rows, rows), similarity.kind};
        graph = build_graph(sub, sub_signals.sensors, o.topk).graph;
      } catch (const Error& e) {
        errors.push_back({{"metric", o.metrics[m]}, {"subset", o.subsets[s]}, {"error", e.what()}});
        std::cerr << "grid: " << o.metrics[m] << "/" << o.subsets[s] << ": " << e.what() << "\n";
        continue;
      }
      for (std::size_t c = 0; c < o.conditions.size(); ++c) {
        const bool filtered = o.conditions[c] == "filtered";
        const MaskObjective objective(*graph, sub_signals, events, filtered, 0.0);
        for (std::size_t a = 0; a < algos.size(); ++a) {
          const std::string key = o.algos[a] + "/" + o.conditions[c] + "/" + o.metrics[m] + "/" + o.subsets[s];
          start = Clock::now();
          try {
            SearchConfig cfg;
            cfg.budget_fraction = o.budget;
            cfg.iterations = o.iters;
            cfg.rng_seed = o.seed;
            cfg.filtered = filtered;
            const auto result = run_search(algos[a], objective, cfg);
            const auto per = objective.per_window(result.mask);
            double mean = 0.0;
            for (const double r : per) mean += r;
            mean /= static_cast<double>(per.size());
            double var = 0.0;
            for (const double r : per) var += (r - mean) * (r - mean);
            const double sd = per.size() > 1 ? std::sqrt(var / static_cast<double>(per.size() - 1)) : 0.0;
            table[a * o.conditions.size() + c][column] = {mean, sd, result.rmse};
          } catch (const Error& e) {
            errors.push_back({{"cell", key}, {"error", e.what()}});
            std::cerr << "grid: " << key << ": " << e.what() << "\n";
          }
          cell_seconds[key] = seconds_since(start);
        }
      }
    }
  }
  run.timings()["cell_seconds"] = cell_seconds;

  std::string csv = "algorithm,condition";
  for (const auto& m : o.metrics)
    for (const auto& s : o.subsets) csv += "," + m + "_" + s + "_mean," + m + "_" + s + "_sd," + m + "_" + s + "_pooled";
  csv += "\n";
  const auto cell = [](double v) { return std::isnan(v) ? std::string("NaN") : io::format_double(v); };
  for (std::size_t a = 0; a < algos.size(); ++a)
    for (std::size_t c = 0; c < o.conditions.size(); ++c) {
      csv += o.algos[a] + "," + o.conditions[c];
      for (const auto& v : table[a * o.conditions.size() + c]) csv += "," + cell(v[0]) + "," + cell(v[1]) + "," + cell(v[2]);
      csv += "\n";
    }
  std::FILE* f = std::fopen(o.out.c_str(), "wb");
  if (!f) throw Error(Errc::ParseError, "cannot write " + o.out);
  std::fwrite(csv.data(), 1, csv.size(), f);
  std::fclose(f);
  run.output(o.out);

  const fs::path log = fs::path(o.out).concat(".errors.json");
  io::write_json(log, errors);
  run.output(log);
  run.finish();
}

void run_snapshot(const SnapshotOptions& o) {
  require(o.signals, "signals");
  const auto dir = prepare_dir(o.out);
  Run run("snapshot", o, manifest_for_dir(dir));
  const auto graph = load_graph(o.graph, run);
  const auto signals = match_graph(load_signals(o.signals, "", run), graph);
  if (o.from < 0 || o.to > signals.num_steps() || o.from >= o.to)
    throw Error(Errc::RangeOutOfBounds, "frames [" + std::to_string(o.from) + ", " + std::to_string(o.to) +
                                            ") outside [0, " + std::to_string(signals.num_steps()) + ")");
  io::json positions = io::json::array();
  for (const auto& s : signals.sensors) positions.push_back({{"id", s.id}, {"x", s.x}, {"y", s.y}});
  for (long step = o.from; step < o.to; ++step) {
    const Eigen::VectorXd column = signals.values.col(step);
    io::json frame;
    frame["step"] = step;
    frame["t"] = signals.times[static_cast<std::size_t>(step)];
    frame["values"] = std::vector<double>(column.data(), column.data() + column.size());
    frame["positions"] = positions;
    if (o.tv) {
      const Eigen::VectorXd tv = node_total_variation(graph, column);
      frame["tv"] = std::vector<double>(tv.data(), tv.data() + tv.size());
    }
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06ld.json", step);
    io::write_json(dir / name, frame);
    run.output(dir / name);
  }
  run.finish();
}

std::vector<std::string> rerun(const std::string& manifest_path) {
  const auto manifest = io::read_json(manifest_path);
  const auto command = manifest.at("command").get<std::string>();
  const auto& options = manifest.at("options");
  std::map<std::string, std::string> recorded;
  for (const auto& out : manifest.at("outputs")) recorded[out.at("path")] = out.at("fnv1a64");

  if (command == "simulate") run_simulate(options.get<SimulateOptions>());
  else if (command == "preprocess") run_preprocess(options.get<PreprocessOptions>());
  else if (command == "buildgraph") run_buildgraph(options.get<BuildGraphOptions>());
  else if (command == "sample") run_sample(options.get<SampleOptions>());
  else if (command == "reconstruct") run_reconstruct(options.get<ReconstructOptions>());
  else if (command == "filter") run_filter(options.get<FilterOptions>());
  else if (command == "tv") run_tv(options.get<TvOptions>());
  else if (command == "forecast") run_forecast(options.get<ForecastOptions>());
  else if (command == "grid") run_grid(options.get<GridOptions>());
  else if (command == "snapshot") run_snapshot(options.get<SnapshotOptions>());
  else throw Error(Errc::ConfigInvalid, "command: unknown '" + command + "' in manifest");

  std::vector<std::string> mismatched;
  for (const auto& [path, digest] : recorded)
    if (!fs::exists(path) || io::file_digest(path) != digest) mismatched.push_back(path);
  return mismatched;
}

}  // namespace gsp::cli
