// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset. Exit status is the number of failures.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsp/dataio.hpp"
#include "gsp/graph.hpp"
#include "gsp/io.hpp"
#include "gsp/reconstruct.hpp"
#include "gsp/sampling.hpp"
#include "gsp/similarity.hpp"
#include "gsp/spectral.hpp"
#include "gsp/tgcn.hpp"

using namespace gsp;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

SensorGraph random_graph(std::mt19937_64& rng, Index n, bool connected) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  MatrixXd a = MatrixXd::Zero(n, n);
  if (connected) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 1; i < order.size(); ++i) a(order[i - 1], order[i]) = a(order[i], order[i - 1]) = weight(rng);
  }
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i)
      if (a(i, j) == 0.0 && coin(rng) < 0.3) a(i, j) = a(j, i) = weight(rng);
  return SensorGraph(a);
}

MatrixXd gaussian(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return MatrixXd::NullaryExpr(rows, cols, [&] { return normal(rng); });
}

struct Dataset {
  SignalMatrix signals;
  std::vector<EventWindow> events;
  SensorGraph graph;
};

/// Default synthetic benchmark: simulate, preprocess, detect events and
/// build the top-3 correlation graph.
Dataset benchmark(std::uint64_t seed, const SynthConfig& base = {}) {
  SynthConfig cfg = base;
  cfg.seed = seed;
  const auto bridge = synth_bridge(cfg);
  Dataset d{preprocess(bridge.recording, PreprocessConfig{}), {}, SensorGraph(MatrixXd::Zero(1, 1))};
  d.events = detect_events(d.signals);
  d.graph = build_graph(d.signals, SimilarityKind::Correlation, 3).graph;
  return d;
}

// 1. Edge selections of the top-k construction.
Verdict graph_counts() {
  std::mt19937_64 rng(1);
  std::string detail;
  bool ok = true;
  for (const Index n : {42, 37, 79, 4, 10, 25}) {
    SignalMatrix s;
    s.values = gaussian(rng, n, 200);
    s.sensors = default_sensors(static_cast<std::size_t>(n));
    for (Index t = 0; t < 200; ++t) s.times.push_back(0.1 * static_cast<double>(t));
    for (const auto kind : {SimilarityKind::Correlation, SimilarityKind::DtwDistance}) {
      const auto built = build_graph(s, kind, 3);
      ok = ok && built.edge_selections == static_cast<std::size_t>(3 * n);
      if (kind == SimilarityKind::Correlation && (n == 42 || n == 37 || n == 79))
        detail += fmt("N=%ld:%zu ", static_cast<long>(n), built.edge_selections);
    }
  }
  return {ok, detail + "(expect 126/111/237, all N exact 3N for corr and dtw)"};
}

// 2. Spectral invariants on random graphs.
Verdict spectral_invariants() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<Index> size(1, 20);
  double psd = 0.0, round_trip = 0.0, parseval = 0.0, rebuild = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_graph(rng, size(rng), trial % 2 == 0);
    const MatrixXd lap = laplacian(g);
    const auto basis = decompose(g);
    psd = std::max(psd, -basis.eigenvalues.minCoeff());
    const MatrixXd x = gaussian(rng, g.size(), 3);
    const MatrixXd spectrum = gft(basis, x);
    round_trip = std::max(round_trip, (igft(basis, spectrum) - x).cwiseAbs().maxCoeff());
    for (Index c = 0; c < 3; ++c)
      parseval = std::max(parseval, std::abs(x.col(c).squaredNorm() - spectrum.col(c).squaredNorm()));
    const MatrixXd vlv = basis.eigenvectors * basis.eigenvalues.asDiagonal() * basis.eigenvectors.transpose();
    rebuild = std::max(rebuild, (vlv - lap).cwiseAbs().maxCoeff());
  }
  const bool ok = psd <= 1e-9 && round_trip <= 1e-10 && parseval <= 1e-9 && rebuild <= 1e-8;
  return {ok, fmt("min eig >= -%.2e, round trip %.2e, Parseval %.2e, V L V^T %.2e", psd, round_trip, parseval, rebuild)};
}

// 3. tau = 0 reconstruction against an independent KKT solve.
Verdict tikhonov_oracle() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Index> size(3, 16);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = size(rng);
    const auto g = random_graph(rng, n, true);
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const auto s = std::uniform_int_distribution<Index>(1, n - 1)(rng);
    std::vector<Index> sampled(order.begin(), order.begin() + s);
    std::sort(sampled.begin(), sampled.end());
    const VectorXd y = gaussian(rng, s, 1);

    // minimize x^T L x subject to x_S = y:  [2L M^T; M 0] [x; mu] = [0; y]
    const MatrixXd lap = laplacian(g);
    MatrixXd kkt = MatrixXd::Zero(n + s, n + s);
    VectorXd rhs = VectorXd::Zero(n + s);
    kkt.topLeftCorner(n, n) = 2.0 * lap;
    for (Index k = 0; k < s; ++k) {
      kkt(n + k, sampled[static_cast<std::size_t>(k)]) = 1.0;
      kkt(sampled[static_cast<std::size_t>(k)], n + k) = 1.0;
      rhs(n + k) = y(k);
    }
    const VectorXd expected = Eigen::FullPivLU<MatrixXd>(kkt).solve(rhs).head(n);
    const auto mask = SampleMask::from_indices(static_cast<std::size_t>(n), sampled);
    const VectorXd got = tikhonov_reconstruct(g, mask, y, 0.0);
    worst = std::max(worst, (got - expected).cwiseAbs().maxCoeff());
  }
  MatrixXd path = MatrixXd::Zero(3, 3);
  path(0, 1) = path(1, 0) = path(1, 2) = path(2, 1) = 1.0;
  const VectorXd ends = (VectorXd(2) << 0.0, 2.0).finished();
  const VectorXd mid = tikhonov_reconstruct(SensorGraph(path), SampleMask::from_indices(3, {0, 2}), ends, 0.0);
  const bool exact = mid(0) == 0.0 && mid(1) == 1.0 && mid(2) == 2.0;
  return {worst <= 1e-8 && exact,
          fmt("max |x - x_kkt| = %.2e over 100 triples; path-3 gives (%g, %.17g, %g)", worst, mid(0), mid(1), mid(2))};
}

// 4. Ordering of the search algorithms on the default benchmark.
Verdict sampling_ordering() {
  const std::vector<SearchAlgorithm> algos{SearchAlgorithm::TopDown, SearchAlgorithm::BottomUp,
                                           SearchAlgorithm::Random};
  std::map<std::pair<int, bool>, double> sum;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto d = benchmark(static_cast<std::uint64_t>(seed));
    for (const bool filtered : {false, true}) {
      const MaskObjective objective(d.graph, d.signals, d.events, filtered, 0.0);
      for (std::size_t a = 0; a < algos.size(); ++a) {
        SearchConfig cfg;
        cfg.rng_seed = static_cast<std::uint64_t>(seed);
        cfg.filtered = filtered;
        sum[{static_cast<int>(a), filtered}] += run_search(algos[a], objective, cfg).rmse;
      }
    }
  }
  const auto mean = [&](int a, bool f) { return sum[{a, f}] / seeds; };
  bool ok = true;
  for (const bool f : {false, true}) ok = ok && mean(0, f) <= mean(1, f) && mean(1, f) <= mean(2, f);
  for (int a = 0; a < 3; ++a) ok = ok && mean(a, true) <= mean(a, false);
  return {ok, fmt("pooled mean RMSE unfiltered td %.4f bu %.4f rnd %.4f | filtered td %.4f bu %.4f rnd %.4f",
                  mean(0, false), mean(1, false), mean(2, false), mean(0, true), mean(1, true), mean(2, true))};
}

// 5. Top-down on an 8-sensor bridge against exhaustive enumeration.
Verdict tiny_optimality() {
  SynthConfig small;
  small.girder_lines = 1;
  small.sensors_per_girder = 4;
  small.deck_rows = 2;
  small.deck_cols = 2;
  int hits = 0;
  std::string worst;
  double worst_ratio = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto d = benchmark(static_cast<std::uint64_t>(seed), small);
    // explicit reconstruction for every pair; infeasible pairs never win
    const auto score = [&](const SampleMask& mask) {
      try {
        const MatrixXd x = TikhonovReconstructor<double>(d.graph, mask, 0.0)(d.signals.values(mask.indices(), Eigen::all));
        return reconstruction_rmse(d.signals.values, x, d.events);
      } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    double optimum = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < 8; ++i)
      for (Index j = i + 1; j < 8; ++j) optimum = std::min(optimum, score(SampleMask::from_indices(8, {i, j})));
    SearchConfig cfg;
    cfg.iterations = 50;
    cfg.rng_seed = static_cast<std::uint64_t>(seed);
    const MaskObjective objective(d.graph, d.signals, d.events, false, 0.0);
    const auto found = run_search(SearchAlgorithm::TopDown, objective, cfg);
    const double ratio = score(found.mask) / optimum;
    hits += found.mask.count() == 2 && ratio <= 1.05;
    worst_ratio = std::max(worst_ratio, ratio);
  }
  return {hits >= 18, fmt("%d/20 seeds within 5%% of the exhaustive optimum (worst ratio %.4f)", hits, worst_ratio)};
}

// 6. Parameter audit at N = 42.
Verdict parameter_audit() {
  std::mt19937_64 rng(6);
  const auto g = random_graph(rng, 42, true);
  tgcn::ModelShape shape;
  const auto m = tgcn::init_model(normalized_adjacency(g), shape, 1);
  const std::vector<std::size_t> got{m.gcn1.parameter_count(), m.gcn2.parameter_count(), m.lstm1.parameter_count(),
                                     m.lstm2.parameter_count(), m.dense.parameter_count()};
  const std::vector<std::size_t> expected{1886, 1870, 18600, 20200, 2142};
  const bool ok = got == expected && m.trainable_count() == 41170 && tgcn::expected_trainable_count(shape) == 41170;
  return {ok, fmt("layers %zu %zu %zu %zu %zu, trainable %zu", got[0], got[1], got[2], got[3], got[4],
                  m.trainable_count())};
}

// 7. Full-model gradients against central differences.
Verdict gradient_check() {
  std::mt19937_64 rng(7);
  const auto g = random_graph(rng, 3, true);
  tgcn::ModelShape shape;
  shape.nodes = 3;
  auto m = tgcn::init_model(normalized_adjacency(g), shape, 7);
  std::normal_distribution<double> jitter(0.0, 0.1);
  tgcn::for_each_trainable([&](const char*, auto& t) { t = t.unaryExpr([&](double v) { return v + jitter(rng); }); },
                           m);
  const auto ws = tgcn::make_windows(0.8 * gaussian(rng, 3, 10 + 12 + 1), 10, 12);
  const std::vector<Index> batch{0, 1};
  tgcn::TgcnModel grads = tgcn::zeros_like(m);
  tgcn::loss_and_gradient(m, ws, batch, &grads);
  tgcn::TgcnModel probe = m;
  const double h = 1e-6;
  double worst = 0.0;
  std::size_t checked = 0;
  tgcn::for_each_trainable(
      [&](const char*, auto& param, const auto& grad) {
        for (Index i = 0; i < param.size(); ++i) {
          const double saved = param.data()[i];
          param.data()[i] = saved + h;
          const double up = tgcn::loss_and_gradient(probe, ws, batch).loss;
          param.data()[i] = saved - h;
          const double down = tgcn::loss_and_gradient(probe, ws, batch).loss;
          param.data()[i] = saved;
          const double numeric = (up - down) / (2.0 * h);
          const double analytic = grad.data()[i];
          worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
          ++checked;
        }
      },
      probe, grads);
  return {worst <= 1e-4,
          fmt("%zu parameters, worst |g - g_fd| / max(|g|, |g_fd|, 1e-6) = %.2e", checked, worst)};
}

struct Forecast {
  double model = 0.0;
  double bench = 0.0;
  std::size_t params = 0;
};

Forecast train_and_score(const SensorGraph& graph, const MatrixXd& series, std::uint64_t seed) {
  const auto ws = tgcn::make_windows(series);
  tgcn::ModelShape shape;
  shape.nodes = graph.size();
  tgcn::TrainConfig cfg;
  cfg.seed = seed;
  const auto trained = tgcn::train(tgcn::init_model(normalized_adjacency(graph), shape, seed), ws, cfg);
  const auto targets = ws.targets(ws.test);
  return {tgcn::forecast_rmse(tgcn::predict(trained.model, ws, ws.test), targets),
          tgcn::forecast_rmse(tgcn::benchmark_last_value(ws, ws.test), targets), trained.model.trainable_count()};
}

std::map<int, Forecast> full_models;  // shared between criteria 8 and 9

// 8. T-GCN against the last-value benchmark.
Verdict forecasting() {
  int wins = 0;
  std::string detail;
  bool oracle = true;
  for (int seed = 0; seed < 5; ++seed) {
    const auto d = benchmark(static_cast<std::uint64_t>(seed));
    const auto f = train_and_score(d.graph, d.signals.values, static_cast<std::uint64_t>(seed));
    full_models[seed] = f;
    wins += f.model <= 0.95 * f.bench;
    detail += fmt("%.3f/%.3f ", f.model, f.bench);

    // last value of each input window, by hand
    const auto ws = tgcn::make_windows(d.signals.values);
    const MatrixXd library = tgcn::benchmark_last_value(ws, ws.test);
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < ws.test.size(); ++k) {
      const Index w = ws.test[k];
      for (Index i = 0; i < d.signals.values.rows(); ++i) {
        const double last = d.signals.values(i, w + 10 - 1);
        oracle = oracle && library(i, static_cast<Index>(k)) == last;
        const double diff = last - d.signals.values(i, w + 10 - 1 + 12);
        sq += diff * diff;
        ++count;
      }
    }
    oracle = oracle && f.bench == std::sqrt(sq / static_cast<double>(count));
  }
  return {wins >= 4 && oracle, fmt("%d/5 seeds with tgcn <= 0.95 x last value; oracle %s; rmse tgcn/bench ", wins,
                                   oracle ? "exact" : "MISMATCH") +
                                   detail};
}

// 9. Training on the top-down 25% subset.
Verdict subset_training() {
  const int seed = 0;
  const auto d = benchmark(seed);
  if (!full_models.count(seed)) full_models[seed] = train_and_score(d.graph, d.signals.values, seed);
  const auto& full = full_models[seed];
  SearchConfig cfg;
  cfg.rng_seed = seed;
  const auto mask = run_search(SearchAlgorithm::TopDown, d.graph, d.signals, d.events, cfg).mask;
  const auto rows = mask.indices();
  std::vector<SensorInfo> nodes;
  for (const auto r : rows) nodes.push_back(d.graph.nodes()[static_cast<std::size_t>(r)]);
  const SensorGraph sub(nodes, d.graph.weights()(rows, rows));
  const auto part = train_and_score(sub, d.signals.values(rows, Eigen::all), seed);
  const double reduction = 1.0 - static_cast<double>(part.params) / static_cast<double>(full.params);
  const double increase = part.model / full.model - 1.0;
  return {reduction >= 0.15 && increase <= 0.15,
          fmt("%zu sensors: params %zu -> %zu (-%.2f%%), test RMSE %.4f -> %.4f (%+.2f%%)", rows.size(), full.params,
              part.params, 100.0 * reduction, full.model, part.model, 100.0 * increase)};
}

// 10. Window count.
Verdict window_count() {
  const auto ws = tgcn::make_windows(MatrixXd::Zero(2, 2935), 10, 12);
  const auto total = ws.train.size() + ws.test.size();
  return {ws.size() == 2914 && total == 2914, fmt("%ld windows (%zu train + %zu test)", static_cast<long>(ws.size()),
                                                  ws.train.size(), ws.test.size())};
}

// 11. Every CLI command replayed from its manifest.
Verdict cli_determinism() {
  const auto dir = fs::temp_directory_path() / "gsp_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto run = [&](const std::string& args) {
    const std::string cmd = "cd '" + dir.string() + "' && '" GSP_CLI_PATH "' " + args + " > /dev/null 2>> cli.log";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const std::vector<std::pair<std::string, std::string>> steps{
      {"simulate --duration 100 --vehicles 10 --seed 5 --out sim", "sim/manifest.json"},
      {"preprocess --in sim/recording.csv --sensors sim/sensors.json --align-reference G0_0 --out prep",
       "prep/manifest.json"},
      {"buildgraph --in sim/signals.csv --sensors sim/sensors.json --metric dtw --out g.json", "g.json.manifest.json"},
      {"sample --algo topdown --graph g.json --signals sim/signals.csv --events sim/events.json --iters 20 "
       "--filtered --out s.json",
       "s.json.manifest.json"},
      {"reconstruct --graph g.json --signals sim/signals.csv --mask s.json --out r.csv", "r.csv.manifest.json"},
      {"filter --graph g.json --signals sim/signals.csv --filter heat:0.5 --out f.csv", "f.csv.manifest.json"},
      {"tv --graph g.json --signals sim/signals.csv --per-node --out tv.csv", "tv.csv.manifest.json"},
      {"forecast --graph g.json --signals sim/signals.csv --mask s.json --epochs 3 --checkpoint m.bin --out fc.json",
       "fc.json.manifest.json"},
      {"grid --signals sim/signals.csv --sensors sim/sensors.json --events sim/events.json --iters 5 --out grid.csv",
       "grid.csv.manifest.json"},
      {"snapshot --graph g.json --signals sim/signals.csv --from 10 --to 13 --tv --out snap", "snap/manifest.json"},
  };
  std::size_t good = 0;
  std::string failed;
  for (const auto& [args, manifest] : steps) {
    const auto name = args.substr(0, args.find(' '));
    if (run(args) != 0) {
      failed += " " + name + "(run)";
      continue;
    }
    if (run("rerun --manifest " + manifest) != 0) {
      failed += " " + name + "(drift)";
      continue;
    }
    ++good;
  }
  return {good == steps.size(), fmt("%zu/%zu commands byte-identical on replay", good, steps.size()) + failed};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "graph construction counts", 1.0, graph_counts},
      {2, "spectral invariants", 10.0, spectral_invariants},
      {3, "Tikhonov oracle", 10.0, tikhonov_oracle},
      {4, "sampling ordering", 300.0, sampling_ordering},
      {5, "tiny-instance optimality", 60.0, tiny_optimality},
      {6, "T-GCN parameter audit", 1.0, parameter_audit},
      {7, "gradient correctness", 30.0, gradient_check},
      {8, "forecasting improvement", 600.0, forecasting},
      {9, "subset training", 600.0, subset_training},
      {10, "window count", 1.0, window_count},
      {11, "CLI determinism", 60.0, cli_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = seconds <= c.limit_seconds;
    const bool pass = v.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %s: %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                seconds, c.limit_seconds, in_time ? "" : ", OVER TIME");
    std::fflush(stdout);
  }
  return failures;
}
