#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gsp/error.hpp"

namespace gsp {

enum class SensorKind { XStrain, YStrain, Vibration, Temperature };

std::string_view to_string(SensorKind kind);
SensorKind parse_sensor_kind(std::string_view text);

/// Per-sensor metadata: identifier, blueprint position in meters and kind.
struct SensorInfo {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  SensorKind kind = SensorKind::XStrain;

  bool operator==(const SensorInfo&) const = default;
};

/// Half-open timestep range [start, end) around a traffic event.
struct EventWindow {
  std::size_t start = 0;
  std::size_t end = 0;
  double peak_magnitude = 0.0;

  std::size_t length() const { return end - start; }
  bool operator==(const EventWindow&) const = default;
};

/// N x T matrix of readings; row i belongs to sensors[i], column t to times[t].
struct SignalMatrix {
  Eigen::MatrixXd values;
  std::vector<SensorInfo> sensors;
  std::vector<double> times;
  std::string unit = "um/m";

  Eigen::Index num_sensors() const { return values.rows(); }
  Eigen::Index num_steps() const { return values.cols(); }

  /// Throws ShapeMismatch if metadata and values disagree.
  void validate() const;

  /// Index of the sensor with the given id, or -1.
  Eigen::Index index_of(std::string_view id) const;

  /// Rows restricted to the given sensor indices, in the given order.
  SignalMatrix select_rows(const std::vector<Eigen::Index>& rows) const;
};

/// Default metadata for n sensors named s0..s{n-1}, laid out on a line.
std::vector<SensorInfo> default_sensors(std::size_t n);

}  // namespace gsp
