#include "gsp/sensors.hpp"

namespace gsp {

std::string_view to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::XStrain: return "XStrain";
    case SensorKind::YStrain: return "YStrain";
    case SensorKind::Vibration: return "Vibration";
    case SensorKind::Temperature: return "Temperature";
  }
  return "XStrain";
}

SensorKind parse_sensor_kind(std::string_view text) {
  if (text == "XStrain") return SensorKind::XStrain;
  if (text == "YStrain") return SensorKind::YStrain;
  if (text == "Vibration") return SensorKind::Vibration;
  if (text == "Temperature") return SensorKind::Temperature;
  throw Error(Errc::ParseError, "unknown sensor kind '" + std::string(text) + "'");
}

void SignalMatrix::validate() const {
  if (static_cast<Eigen::Index>(sensors.size()) != values.rows())
    throw Error(Errc::ShapeMismatch, "signal matrix has " + std::to_string(values.rows()) +
                                         " rows but " + std::to_string(sensors.size()) +
                                         " sensor records");
  if (static_cast<Eigen::Index>(times.size()) != values.cols())
    throw Error(Errc::ShapeMismatch, "signal matrix has " + std::to_string(values.cols()) +
                                         " columns but " + std::to_string(times.size()) +
                                         " timestamps");
}

Eigen::Index SignalMatrix::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < sensors.size(); ++i)
    if (sensors[i].id == id) return static_cast<Eigen::Index>(i);
  return -1;
}

SignalMatrix SignalMatrix::select_rows(const std::vector<Eigen::Index>& rows) const {
  SignalMatrix out;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  out.times = times;
  out.unit = unit;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= values.rows())
      throw Error(Errc::RangeOutOfBounds, "sensor row " + std::to_string(rows[r]));
    out.values.row(static_cast<Eigen::Index>(r)) = values.row(rows[r]);
    out.sensors.push_back(sensors[static_cast<std::size_t>(rows[r])]);
  }
  return out;
}

std::vector<SensorInfo> default_sensors(std::size_t n) {
  std::vector<SensorInfo> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = "s" + std::to_string(i);
    out[i].x = static_cast<double>(i);
  }
  return out;
}

}  // namespace gsp
