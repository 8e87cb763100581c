#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gsp/graph.hpp"
#include "gsp/sensors.hpp"

namespace gsp {

/// Sensor series at the source sample rate, one row per sensor.
struct RawRecording {
  Eigen::MatrixXd values;
  std::vector<SensorInfo> sensors;
  double sample_rate = 100.0;  // Hz

  void validate() const;
  /// View as a signal matrix with t = i / sample_rate.
  SignalMatrix as_signals() const;
};

/// Non-overlapping bin means; a trailing partial bin is dropped. The bin must
/// span a whole number (>= 1) of source samples.
SignalMatrix downsample_mean(const RawRecording& recording, double bin_seconds = 0.1);

/// Per-sensor standardization with the population standard deviation.
SignalMatrix zscore(const SignalMatrix& signals);

/// Drop the listed sensor ids (unknown ids are a ConfigInvalid error).
SignalMatrix exclude_sensors(const SignalMatrix& signals, const std::vector<std::string>& ids);

struct AlignmentReport {
  std::vector<int> lags;            ///< aligned(t) = original(t - lag)
  std::vector<double> confidence;   ///< correlation of |signal| with |reference| at the chosen lag
  std::vector<bool> low_confidence; ///< confidence below the threshold
};

struct Alignment {
  SignalMatrix signals;
  AlignmentReport report;
};

/// Shift every sensor by the integer lag in [-max_lag, max_lag] maximizing
/// the correlation of its absolute signal with the reference's; vacated
/// steps are zero-padded.
Alignment align_by_peaks(const SignalMatrix& signals, std::string_view reference_id, int max_lag,
                         double min_confidence = 0.2);

struct EventConfig {
  double threshold = 2.0;       ///< on the cross-sensor mean |z|
  std::size_t merge_gap = 10;   ///< marks closer than this are merged
  std::size_t pad = 10;         ///< steps added on both sides
  std::size_t top_n = 10;
};

/// Traffic-event windows ranked by peak activity, returned in time order.
std::vector<EventWindow> detect_events(const SignalMatrix& signals, const EventConfig& config = {});

/// Cross-sensor mean absolute z-score per step (constant sensors count 0).
Eigen::VectorXd activity_profile(const SignalMatrix& signals);

struct VehiclePass {
  double entry_time = 0.0;  // s, when the front reaches the first support
  double speed = 20.0;      // m/s, signed: positive travels +x
  double lane_y = 0.0;      // m
  double load = 1.0;
};

/// Synthetic bridge: girder lines carry positive strain, the deck above them
/// the opposite sign at reduced magnitude.
struct SynthConfig {
  std::size_t girder_lines = 2;
  std::size_t sensors_per_girder = 12;
  std::size_t deck_rows = 3;
  std::size_t deck_cols = 6;
  double span = 100.0;   // m
  double width = 12.0;   // m
  double duration = 300.0;  // s
  double sample_rate = 100.0;  // Hz
  std::size_t vehicles = 40;
  double truck_fraction = 0.25;
  double min_speed = 15.0;
  double max_speed = 25.0;
  double noise_sd = 0.02;
  double deck_factor = 0.5;
  double lateral_sd = 6.0;   // m
  double local_sd = 3.0;     // m
  double local_gain = 0.5;
  std::uint64_t seed = 1;

  /// Throws ConfigInvalid naming the offending key.
  void validate() const;
  std::size_t num_sensors() const { return girder_lines * sensors_per_girder + deck_rows * deck_cols; }
};

struct SynthBridge {
  RawRecording recording;
  /// Top-3 correlation graph over the noise-free influence profiles.
  SensorGraph truth;
  std::vector<VehiclePass> vehicles;
};

SynthBridge synth_bridge(const SynthConfig& config);

/// Strain response of a sensor to one vehicle at longitudinal position p.
double sensor_response(const SynthConfig& config, const SensorInfo& sensor, bool is_deck,
                       const VehiclePass& vehicle, double position);

struct PreprocessConfig {
  double bin_seconds = 0.1;
  std::vector<std::string> exclude;
  std::string align_reference;  ///< empty disables alignment
  int max_lag = 20;
  bool standardize = true;
};

/// exclude -> downsample -> align -> z-score.
SignalMatrix preprocess(const RawRecording& recording, const PreprocessConfig& config,
                        AlignmentReport* alignment = nullptr);

}  // namespace gsp
