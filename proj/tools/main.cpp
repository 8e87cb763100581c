#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "gsp/error.hpp"

namespace {

using namespace gsp::cli;

int exit_code(gsp::Errc code) {
  switch (code) {
    case gsp::Errc::SingularSystem:
    case gsp::Errc::NonFiniteGain:
    case gsp::Errc::DivergedLoss:
    case gsp::Errc::ZeroVariance:
    case gsp::Errc::NoEvents:
      return 3;
    default:
      return 2;
  }
}

/// Config files hold `key = value` lines; `#` starts a comment. Keys are the
/// long flag names of the subcommand with '-' or '_' separators. A value
/// given on the command line wins over the file.
void apply_config(CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gsp::Error(gsp::Errc::ConfigInvalid, "config: cannot open " + path);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw gsp::Error(gsp::Errc::ConfigInvalid, path + ":" + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + flag);
    } catch (const CLI::OptionNotFound&) {
    }
    if (opt == nullptr || flag == "config" || flag == "help")
      throw gsp::Error(gsp::Errc::ConfigInvalid, "config key '" + key + "' is not an option of " + sub.get_name());
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw gsp::Error(gsp::Errc::ConfigInvalid, "config key '" + key + "': " + e.what());
    }
  }
}

template <typename Options>
CLI::App* command(CLI::App& app, const std::string& name, const std::string& description, Options& o,
                  std::string& config, void (*run)(const Options&), std::function<void()>& action) {
  auto* sub = app.add_subcommand(name, description);
  sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
  sub->add_option("--out", o.out, "output path")->capture_default_str();
  sub->add_option("--config", config, "key = value file with defaults for any flag");
  sub->callback([sub, &o, &config, run, &action] {
    if (!config.empty()) apply_config(*sub, config);
    action = [&o, run] { run(o); };
  });
  return sub;
}

void event_flags(CLI::App* sub, EventOptions& e) {
  sub->add_option("--event-threshold", e.event_threshold, "mean |z| marking an event")->capture_default_str();
  sub->add_option("--merge-gap", e.merge_gap, "merge marks closer than this many steps")->capture_default_str();
  sub->add_option("--pad", e.pad, "steps added to both sides of an event")->capture_default_str();
  sub->add_option("--top-n", e.top_n, "keep the strongest events")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph signal processing pipeline for bridge sensor networks"};
  app.require_subcommand(1);
  std::function<void()> action;

  SimulateOptions sim;
  std::string sim_config;
  auto* s = command(app, "simulate", "synthesize a bridge recording into --out DIR", sim, sim_config, &run_simulate, action);
  s->add_option("--girder-lines", sim.girder_lines)->capture_default_str();
  s->add_option("--sensors-per-girder", sim.sensors_per_girder)->capture_default_str();
  s->add_option("--deck-rows", sim.deck_rows)->capture_default_str();
  s->add_option("--deck-cols", sim.deck_cols)->capture_default_str();
  s->add_option("--span", sim.span, "m")->capture_default_str();
  s->add_option("--width", sim.width, "m")->capture_default_str();
  s->add_option("--duration", sim.duration, "s")->capture_default_str();
  s->add_option("--sample-rate", sim.sample_rate, "Hz")->capture_default_str();
  s->add_option("--vehicles", sim.vehicles)->capture_default_str();
  s->add_option("--truck-fraction", sim.truck_fraction)->capture_default_str();
  s->add_option("--min-speed", sim.min_speed, "m/s")->capture_default_str();
  s->add_option("--max-speed", sim.max_speed, "m/s")->capture_default_str();
  s->add_option("--noise-sd", sim.noise_sd)->capture_default_str();
  s->add_option("--deck-factor", sim.deck_factor)->capture_default_str();
  s->add_option("--lateral-sd", sim.lateral_sd, "m")->capture_default_str();
  s->add_option("--local-sd", sim.local_sd, "m")->capture_default_str();
  s->add_option("--local-gain", sim.local_gain)->capture_default_str();
  s->add_option("--bin", sim.bin, "downsampling bin for signals.csv, s")->capture_default_str();
  event_flags(s, sim.events);

  PreprocessOptions pre;
  std::string pre_config;
  auto* p = command(app, "preprocess", "downsample, align and standardize a raw CSV into --out DIR", pre, pre_config,
                    &run_preprocess, action);
  p->add_option("--in", pre.in, "raw signal CSV");
  p->add_option("--sensors", pre.sensors, "sensor sidecar JSON");
  p->add_option("--sample-rate", pre.sample_rate, "Hz, 0 infers from t")->capture_default_str();
  p->add_option("--bin", pre.bin, "s")->capture_default_str();
  p->add_option("--exclude", pre.exclude, "sensor ids to drop")->delimiter(',');
  p->add_option("--align-reference", pre.align_reference, "sensor id to align against");
  p->add_option("--max-lag", pre.max_lag, "steps")->capture_default_str();
  p->add_flag("--no-standardize", pre.no_standardize);
  event_flags(p, pre.events);

  BuildGraphOptions bg;
  std::string bg_config;
  auto* b = command(app, "buildgraph", "top-k similarity graph", bg, bg_config, &run_buildgraph, action);
  b->add_option("--in", bg.in, "signal CSV");
  b->add_option("--sensors", bg.sensors, "sensor sidecar JSON");
  b->add_option("--metric", bg.metric, "corr | dtw")->capture_default_str();
  b->add_option("--topk", bg.topk)->capture_default_str();

  SampleOptions sa;
  std::string sa_config;
  auto* sp = command(app, "sample", "search for a sensor subset", sa, sa_config, &run_sample, action);
  sp->add_option("--algo", sa.algo, "random | bottomup | topdown")->capture_default_str();
  sp->add_option("--graph", sa.graph);
  sp->add_option("--signals", sa.signals);
  sp->add_option("--events", sa.events);
  sp->add_option("--budget", sa.budget, "fraction of sensors kept")->capture_default_str();
  sp->add_option("--iters", sa.iters, "draws or restarts")->capture_default_str();
  sp->add_option("--top-pool", sa.top_pool)->capture_default_str();
  sp->add_flag("--filtered", sa.filtered, "score against the low-pass filtered signal");
  sp->add_option("--filter-coefficient", sa.filter_coefficient)->capture_default_str();
  sp->add_option("--tau", sa.tau)->capture_default_str();
  sp->add_flag("--timings", sa.timings, "also write per-iteration seconds into the result");

  ReconstructOptions re;
  std::string re_config;
  auto* r = command(app, "reconstruct", "Tikhonov reconstruction from a mask", re, re_config, &run_reconstruct, action);
  r->add_option("--graph", re.graph);
  r->add_option("--signals", re.signals);
  r->add_option("--mask", re.mask);
  r->add_option("--tau", re.tau)->capture_default_str();

  FilterOptions fi;
  std::string fi_config;
  auto* f = command(app, "filter", "spectral graph filter", fi, fi_config, &run_filter, action);
  f->add_option("--graph", fi.graph);
  f->add_option("--signals", fi.signals);
  f->add_option("--filter", fi.filter, "lowpass:C | heat:T | identity")->capture_default_str();

  TvOptions tv;
  std::string tv_config;
  auto* t = command(app, "tv", "total variation per step", tv, tv_config, &run_tv, action);
  t->add_option("--graph", tv.graph);
  t->add_option("--signals", tv.signals);
  t->add_flag("--per-node", tv.per_node);
  t->add_option("--shift", tv.shift, "rownorm | adjacency")->capture_default_str();

  ForecastOptions fo;
  std::string fo_config;
  auto* fc = command(app, "forecast", "train and evaluate the T-GCN", fo, fo_config, &run_forecast, action);
  fc->add_option("--graph", fo.graph);
  fc->add_option("--signals", fo.signals);
  fc->add_option("--mask", fo.mask, "restrict to a sensor subset");
  fc->add_option("--checkpoint", fo.checkpoint, "write the trained model here");
  fc->add_flag("--filtered", fo.filtered);
  fc->add_option("--filter-coefficient", fo.filter_coefficient)->capture_default_str();
  fc->add_option("--input-length", fo.input_length)->capture_default_str();
  fc->add_option("--horizon", fo.horizon)->capture_default_str();
  fc->add_option("--split", fo.split)->capture_default_str();
  fc->add_option("--epochs", fo.epochs)->capture_default_str();
  fc->add_option("--batch", fo.batch)->capture_default_str();
  fc->add_option("--lr", fo.lr)->capture_default_str();
  fc->add_option("--patience", fo.patience)->capture_default_str();
  fc->add_flag("--timings", fo.timings, "also write ms per epoch into the metrics");

  GridOptions gr;
  std::string gr_config;
  auto* g = command(app, "grid", "algorithm x graph x condition x subset RMSE table", gr, gr_config, &run_grid, action);
  g->add_option("--signals", gr.signals);
  g->add_option("--sensors", gr.sensors, "sensor sidecar JSON (needed for kind subsets)");
  g->add_option("--events", gr.events, "event windows; detected when omitted");
  g->add_option("--algos", gr.algos)->delimiter(',')->capture_default_str();
  g->add_option("--metrics", gr.metrics)->delimiter(',')->capture_default_str();
  g->add_option("--conditions", gr.conditions)->delimiter(',')->capture_default_str();
  g->add_option("--subsets", gr.subsets, "sensor kinds or Combined")->delimiter(',')->capture_default_str();
  g->add_option("--budget", gr.budget)->capture_default_str();
  g->add_option("--iters", gr.iters)->capture_default_str();
  g->add_option("--topk", gr.topk)->capture_default_str();
  event_flags(g, gr.detect);

  SnapshotOptions sn;
  std::string sn_config;
  auto* n = command(app, "snapshot", "per-step node value frames into --out DIR", sn, sn_config, &run_snapshot, action);
  n->add_option("--graph", sn.graph);
  n->add_option("--signals", sn.signals);
  n->add_option("--from", sn.from, "first step")->capture_default_str();
  n->add_option("--to", sn.to, "one past the last step")->capture_default_str();
  n->add_flag("--tv", sn.tv, "add per-node total variation");

  std::string manifest;
  auto* rr = app.add_subcommand("rerun", "replay a manifest and verify identical outputs");
  rr->add_option("--manifest", manifest)->required();
  rr->callback([&] {
    action = [&] {
      const auto mismatched = rerun(manifest);
      for (const auto& path : mismatched) std::cerr << "mismatch: " << path << "\n";
      if (!mismatched.empty()) std::exit(3);
      std::cout << "identical\n";
    };
  });

  try {
    app.parse(argc, argv);
    action();
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const gsp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
