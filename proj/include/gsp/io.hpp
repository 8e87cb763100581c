#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsp/graph.hpp"
#include "gsp/sensors.hpp"

namespace gsp::io {

using nlohmann::json;

// Graph files: {nodes:[{id,x,y,kind}], edges:[{src,dst,w}]}, each undirected
// pair listed once with src < dst. `edge_selections` is optional metadata.
json graph_to_json(const SensorGraph& g, std::optional<std::size_t> edge_selections = {});
SensorGraph graph_from_json(const json& doc);
void write_graph(const std::filesystem::path& path, const SensorGraph& g,
                 std::optional<std::size_t> edge_selections = {});
SensorGraph read_graph(const std::filesystem::path& path);

// Sensor sidecar: [{id, kind, x, y}].
json sensors_to_json(const std::vector<SensorInfo>& sensors);
std::vector<SensorInfo> sensors_from_json(const json& doc);
void write_sensors(const std::filesystem::path& path, const std::vector<SensorInfo>& sensors);
std::vector<SensorInfo> read_sensors(const std::filesystem::path& path);

// Events: [{start, end, peak}] with half-open [start, end) step ranges.
json events_to_json(const std::vector<EventWindow>& events);
std::vector<EventWindow> events_from_json(const json& doc);
void write_events(const std::filesystem::path& path, const std::vector<EventWindow>& events);
std::vector<EventWindow> read_events(const std::filesystem::path& path);

/// Signal CSV: header `t,<id>,<id>,...`, one row per timestep. Sensor
/// metadata comes from `sidecar` when given (matched by id), else defaults.
SignalMatrix read_signals_csv(const std::filesystem::path& path,
                              const std::vector<SensorInfo>* sidecar = nullptr);
void write_signals_csv(const std::filesystem::path& path, const SignalMatrix& signals);

/// Generic per-step table written as CSV with a leading `t` column.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const std::vector<double>& times, const Eigen::MatrixXd& rows_by_step);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// 64-bit FNV-1a digest of a file's bytes, hex encoded.
std::string file_digest(const std::filesystem::path& path);

}  // namespace gsp::io
