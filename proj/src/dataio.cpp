#include "gsp/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "gsp/similarity.hpp"

namespace gsp {

void RawRecording::validate() const {
  if (!(sample_rate > 0.0)) throw Error(Errc::ConfigInvalid, "sample_rate must be positive");
  if (static_cast<Eigen::Index>(sensors.size()) != values.rows())
    throw Error(Errc::ShapeMismatch, "recording rows and sensor metadata disagree");
}

SignalMatrix RawRecording::as_signals() const {
  validate();
  SignalMatrix out;
  out.values = values;
  out.sensors = sensors;
  out.times.resize(static_cast<std::size_t>(values.cols()));
  for (std::size_t i = 0; i < out.times.size(); ++i) out.times[i] = static_cast<double>(i) / sample_rate;
  return out;
}

SignalMatrix downsample_mean(const RawRecording& recording, double bin_seconds) {
  recording.validate();
  const double samples = bin_seconds * recording.sample_rate;
  if (!(samples >= 1.0 - 1e-9))
    throw Error(Errc::BinTooSmall, "bin of " + std::to_string(bin_seconds) + " s is shorter than one sample");
  const auto per_bin = static_cast<Eigen::Index>(std::llround(samples));
  if (std::abs(samples - static_cast<double>(per_bin)) > 1e-9)
    throw Error(Errc::ConfigInvalid, "bin must span a whole number of samples");

  const Eigen::Index bins = recording.values.cols() / per_bin;
  SignalMatrix out;
  out.sensors = recording.sensors;
  out.values.resize(recording.values.rows(), bins);
  out.times.resize(static_cast<std::size_t>(bins));
  for (Eigen::Index b = 0; b < bins; ++b) {
    out.values.col(b) = recording.values.middleCols(b * per_bin, per_bin).rowwise().mean();
    out.times[static_cast<std::size_t>(b)] = static_cast<double>(b * per_bin) / recording.sample_rate;
  }
  return out;
}

SignalMatrix zscore(const SignalMatrix& signals) {
  signals.validate();
  SignalMatrix out = signals;
  const double t = static_cast<double>(signals.num_steps());
  for (Eigen::Index i = 0; i < signals.num_sensors(); ++i) {
    const double mean = signals.values.row(i).mean();
    const double sd = std::sqrt((signals.values.row(i).array() - mean).square().sum() / t);
    if (!(sd > 0.0)) throw Error(Errc::ZeroVariance, "sensor " + signals.sensors[i].id + " is constant");
    out.values.row(i) = (signals.values.row(i).array() - mean) / sd;
  }
  return out;
}

SignalMatrix exclude_sensors(const SignalMatrix& signals, const std::vector<std::string>& ids) {
  std::set<std::string> drop(ids.begin(), ids.end());
  for (const auto& id : drop)
    if (signals.index_of(id) < 0) throw Error(Errc::ConfigInvalid, "exclude: unknown sensor '" + id + "'");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < signals.num_sensors(); ++i)
    if (!drop.contains(signals.sensors[i].id)) keep.push_back(i);
  return signals.select_rows(keep);
}

namespace {

// Pearson correlation of a(t) with b(t - lag) over the overlapping steps.
double lagged_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int lag) {
  const Eigen::Index t = a.size();
  const Eigen::Index first = std::max<Eigen::Index>(0, lag);
  const Eigen::Index last = std::min<Eigen::Index>(t, t + lag);
  const Eigen::Index len = last - first;
  if (len < 2) return -1.0;
  const auto x = a.segment(first, len);
  const auto y = b.segment(first - lag, len);
  const double mx = x.mean();
  const double my = y.mean();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double sxx = (x.array() - mx).square().sum();
  const double syy = (y.array() - my).square().sum();
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

Alignment align_by_peaks(const SignalMatrix& signals, std::string_view reference_id, int max_lag,
                         double min_confidence) {
  signals.validate();
  const Eigen::Index ref = signals.index_of(reference_id);
  if (ref < 0) throw Error(Errc::ReferenceMissing, "reference sensor '" + std::string(reference_id) + "' not found");
  const Eigen::Index t = signals.num_steps();
  if (max_lag < 0 || 4 * static_cast<Eigen::Index>(max_lag) >= t)
    throw Error(Errc::ConfigInvalid, "max_lag must be in [0, T/4)");

  const Eigen::VectorXd reference = signals.values.row(ref).cwiseAbs().transpose();
  Alignment out{signals, {}};
  for (Eigen::Index i = 0; i < signals.num_sensors(); ++i) {
    const Eigen::VectorXd series = signals.values.row(i).cwiseAbs().transpose();
    int best_lag = 0;
    double best = lagged_correlation(reference, series, 0);
    // 0, -1, +1, -2, +2, ...: ties keep the smaller shift
    for (int step = 1; step <= max_lag; ++step) {
      for (const int lag : {-step, step}) {
        const double c = lagged_correlation(reference, series, lag);
        if (c > best) {
          best = c;
          best_lag = lag;
        }
      }
    }
    auto row = out.signals.values.row(i);
    row.setZero();
    for (Eigen::Index s = 0; s < t; ++s) {
      const Eigen::Index src = s - best_lag;
      if (src >= 0 && src < t) row(s) = signals.values(i, src);
    }
    out.report.lags.push_back(best_lag);
    out.report.confidence.push_back(best);
    out.report.low_confidence.push_back(best < min_confidence);
  }
  return out;
}

Eigen::VectorXd activity_profile(const SignalMatrix& signals) {
  signals.validate();
  const Eigen::Index n = signals.num_sensors();
  const Eigen::Index t = signals.num_steps();
  Eigen::VectorXd activity = Eigen::VectorXd::Zero(t);
  if (n == 0 || t == 0) return activity;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = signals.values.row(i).mean();
    const double sd = std::sqrt((signals.values.row(i).array() - mean).square().sum() / static_cast<double>(t));
    if (sd > 0.0) activity += ((signals.values.row(i).array() - mean).abs() / sd).matrix().transpose();
  }
  return activity / static_cast<double>(n);
}

std::vector<EventWindow> detect_events(const SignalMatrix& signals, const EventConfig& config) {
  const Eigen::Index t = signals.num_steps();
  if (t < 50) throw Error(Errc::SeriesTooShort, "event detection needs at least 50 steps");
  const Eigen::VectorXd activity = activity_profile(signals);

  struct Run {
    Eigen::Index first, last;
    double peak;
  };
  std::vector<Run> runs;
  for (Eigen::Index s = 0; s < t; ++s) {
    if (!(activity(s) > config.threshold)) continue;
    if (!runs.empty() && s - runs.back().last < static_cast<Eigen::Index>(config.merge_gap)) {
      runs.back().last = s;
      runs.back().peak = std::max(runs.back().peak, activity(s));
    } else {
      runs.push_back({s, s, activity(s)});
    }
  }

  std::vector<EventWindow> windows;
  const auto pad = static_cast<Eigen::Index>(config.pad);
  for (const auto& run : runs) {
    EventWindow w{static_cast<std::size_t>(std::max<Eigen::Index>(0, run.first - pad)),
                  static_cast<std::size_t>(std::min<Eigen::Index>(t, run.last + 1 + pad)), run.peak};
    if (!windows.empty() && w.start < windows.back().end) {
      windows.back().end = w.end;
      windows.back().peak_magnitude = std::max(windows.back().peak_magnitude, w.peak_magnitude);
    } else {
      windows.push_back(w);
    }
  }
  if (windows.empty()) throw Error(Errc::NoEvents, "no step exceeds activity threshold " + std::to_string(config.threshold));

  std::stable_sort(windows.begin(), windows.end(),
                   [](const EventWindow& a, const EventWindow& b) { return a.peak_magnitude > b.peak_magnitude; });
  if (windows.size() > config.top_n) windows.resize(config.top_n);
  std::sort(windows.begin(), windows.end(), [](const EventWindow& a, const EventWindow& b) { return a.start < b.start; });
  return windows;
}

void SynthConfig::validate() const {
  const auto bad = [](const std::string& key, const std::string& why) {
    throw Error(Errc::ConfigInvalid, key + ": " + why);
  };
  if (num_sensors() < 2) bad("sensors_per_girder", "layout must contain at least 2 sensors");
  if (!(span > 0)) bad("span", "must be positive");
  if (!(width > 0)) bad("width", "must be positive");
  if (!(sample_rate > 0)) bad("sample_rate", "must be positive");
  if (!(min_speed > 0)) bad("min_speed", "must be positive");
  if (!(max_speed >= min_speed)) bad("max_speed", "must be >= min_speed");
  if (!(noise_sd >= 0)) bad("noise_sd", "must be non-negative");
  if (!(truck_fraction >= 0 && truck_fraction <= 1)) bad("truck_fraction", "must be in [0,1]");
  if (!(lateral_sd > 0)) bad("lateral_sd", "must be positive");
  if (!(local_sd > 0)) bad("local_sd", "must be positive");
  if (!(deck_factor >= 0)) bad("deck_factor", "must be non-negative");
  if (!(duration > span / min_speed)) bad("duration", "must exceed the slowest crossing time");
}

namespace {

std::vector<double> lane_positions(const SynthConfig& config) { return {0.3 * config.width, 0.7 * config.width}; }

bool is_deck_sensor(const SensorInfo& s) { return s.kind == SensorKind::YStrain; }

std::vector<SensorInfo> bridge_layout(const SynthConfig& config) {
  std::vector<SensorInfo> sensors;
  for (std::size_t l = 0; l < config.girder_lines; ++l)
    for (std::size_t i = 0; i < config.sensors_per_girder; ++i)
      sensors.push_back({"G" + std::to_string(l) + "_" + std::to_string(i),
                         config.span * (static_cast<double>(i) + 0.5) / static_cast<double>(config.sensors_per_girder),
                         config.width * (static_cast<double>(l) + 0.5) / static_cast<double>(config.girder_lines),
                         SensorKind::XStrain});
  for (std::size_t r = 0; r < config.deck_rows; ++r)
    for (std::size_t c = 0; c < config.deck_cols; ++c)
      sensors.push_back({"D" + std::to_string(r) + "_" + std::to_string(c),
                         config.span * (static_cast<double>(c) + 0.5) / static_cast<double>(config.deck_cols),
                         config.width * (static_cast<double>(r) + 0.5) / static_cast<double>(config.deck_rows),
                         SensorKind::YStrain});
  return sensors;
}

}  // namespace

double sensor_response(const SynthConfig& config, const SensorInfo& sensor, bool is_deck,
                       const VehiclePass& vehicle, double position) {
  const double span = config.span;
  if (position < 0.0 || position > span) return 0.0;
  // bending-moment influence line of a simply supported beam, peak 1 at midspan
  const double x = sensor.x;
  const double influence = 4.0 * (position <= x ? position * (span - x) : x * (span - position)) / (span * span);
  const double dx = x - position;
  const double local = config.local_gain * std::exp(-dx * dx / (2.0 * config.local_sd * config.local_sd)) *
                       std::sin(std::numbers::pi * position / span);
  const double dy = sensor.y - vehicle.lane_y;
  const double lateral = std::exp(-dy * dy / (2.0 * config.lateral_sd * config.lateral_sd));
  const double strain = vehicle.load * lateral * (influence + local);
  return is_deck ? -config.deck_factor * strain : strain;
}

SynthBridge synth_bridge(const SynthConfig& config) {
  config.validate();
  SynthBridge out;
  auto& rec = out.recording;
  rec.sensors = bridge_layout(config);
  rec.sample_rate = config.sample_rate;
  const auto n = static_cast<Eigen::Index>(rec.sensors.size());
  const auto samples = static_cast<Eigen::Index>(std::floor(config.duration * config.sample_rate));
  rec.values = Eigen::MatrixXd::Zero(n, samples);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto lanes = lane_positions(config);
  const double slowest = config.span / config.min_speed;
  for (std::size_t v = 0; v < config.vehicles; ++v) {
    VehiclePass pass;
    const bool truck = unit(rng) < config.truck_fraction;
    pass.load = truck ? 1.5 + 1.5 * unit(rng) : 0.2 + 0.4 * unit(rng);
    const bool eastbound = unit(rng) < 0.5;
    pass.lane_y = eastbound ? lanes[0] : lanes[1];
    const double speed = config.min_speed + (config.max_speed - config.min_speed) * unit(rng);
    pass.speed = eastbound ? speed : -speed;
    pass.entry_time = (config.duration - slowest) * unit(rng);
    out.vehicles.push_back(pass);
  }
  std::stable_sort(out.vehicles.begin(), out.vehicles.end(),
                   [](const VehiclePass& a, const VehiclePass& b) { return a.entry_time < b.entry_time; });

  for (const auto& pass : out.vehicles) {
    const double crossing = config.span / std::abs(pass.speed);
    const auto first = static_cast<Eigen::Index>(std::ceil(pass.entry_time * config.sample_rate));
    const auto last = std::min<Eigen::Index>(
        samples - 1, static_cast<Eigen::Index>(std::floor((pass.entry_time + crossing) * config.sample_rate)));
    for (Eigen::Index s = first; s <= last; ++s) {
      const double travelled = std::abs(pass.speed) * (static_cast<double>(s) / config.sample_rate - pass.entry_time);
      const double position = pass.speed > 0 ? travelled : config.span - travelled;
      for (Eigen::Index i = 0; i < n; ++i)
        rec.values(i, s) += sensor_response(config, rec.sensors[i], is_deck_sensor(rec.sensors[i]), pass, position);
    }
  }

  if (config.noise_sd > 0.0) {
    std::normal_distribution<double> noise(0.0, config.noise_sd);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index s = 0; s < samples; ++s) rec.values(i, s) += noise(rng);
  }

  // Ground truth from noise-free influence profiles over both lanes.
  const Eigen::Index grid = 101;
  SignalMatrix profiles;
  profiles.sensors = rec.sensors;
  profiles.values.resize(n, grid * static_cast<Eigen::Index>(lanes.size()));
  profiles.times.resize(static_cast<std::size_t>(profiles.values.cols()));
  for (std::size_t l = 0; l < lanes.size(); ++l) {
    const VehiclePass probe{0.0, 1.0, lanes[l], 1.0};
    for (Eigen::Index p = 0; p < grid; ++p) {
      const Eigen::Index col = static_cast<Eigen::Index>(l) * grid + p;
      const double position = config.span * static_cast<double>(p) / static_cast<double>(grid - 1);
      profiles.times[static_cast<std::size_t>(col)] = static_cast<double>(col);
      for (Eigen::Index i = 0; i < n; ++i)
        profiles.values(i, col) = sensor_response(config, rec.sensors[i], is_deck_sensor(rec.sensors[i]), probe, position);
    }
  }
  out.truth = build_graph(profiles, SimilarityKind::Correlation, 3).graph;
  return out;
}

SignalMatrix preprocess(const RawRecording& recording, const PreprocessConfig& config, AlignmentReport* alignment) {
  recording.validate();
  RawRecording kept = recording;
  if (!config.exclude.empty()) {
    const auto reduced = exclude_sensors(recording.as_signals(), config.exclude);
    kept.values = reduced.values;
    kept.sensors = reduced.sensors;
  }
  SignalMatrix signals = downsample_mean(kept, config.bin_seconds);
  if (!config.align_reference.empty()) {
    auto aligned = align_by_peaks(signals, config.align_reference, config.max_lag);
    signals = std::move(aligned.signals);
    if (alignment) *alignment = std::move(aligned.report);
  }
  return config.standardize ? zscore(signals) : signals;
}

}  // namespace gsp
