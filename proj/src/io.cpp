#include "gsp/io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace gsp::io {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::ParseError, "cannot write " + path.string());
  return out;
}

double parse_double(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t'))
    text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(Errc::ParseError, "bad number '" + std::string(text) + "' at " + where);
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

json graph_to_json(const SensorGraph& g, std::optional<std::size_t> edge_selections) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& node : g.nodes())
    doc["nodes"].push_back(
        {{"id", node.id}, {"x", node.x}, {"y", node.y}, {"kind", std::string(to_string(node.kind))}});
  doc["edges"] = json::array();
  for (Eigen::Index i = 0; i < g.size(); ++i)
    for (Eigen::Index j = i + 1; j < g.size(); ++j)
      if (g.weights()(i, j) != 0.0) doc["edges"].push_back({{"src", i}, {"dst", j}, {"w", g.weights()(i, j)}});
  if (edge_selections) doc["edge_selections"] = *edge_selections;
  return doc;
}

SensorGraph graph_from_json(const json& doc) {
  try {
    std::vector<SensorInfo> nodes;
    for (const auto& item : doc.at("nodes")) {
      SensorInfo info;
      info.id = item.at("id").get<std::string>();
      info.x = item.value("x", 0.0);
      info.y = item.value("y", 0.0);
      info.kind = parse_sensor_kind(item.value("kind", std::string("XStrain")));
      nodes.push_back(std::move(info));
    }
    const auto n = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
    for (const auto& edge : doc.at("edges")) {
      const auto src = edge.at("src").get<Eigen::Index>();
      const auto dst = edge.at("dst").get<Eigen::Index>();
      const double w = edge.at("w").get<double>();
      if (src < 0 || dst < 0 || src >= n || dst >= n || src == dst)
        throw Error(Errc::ParseError, "edge endpoints out of range");
      weights(src, dst) = w;
      weights(dst, src) = w;
    }
    return SensorGraph(std::move(nodes), std::move(weights));
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("graph json: ") + e.what());
  }
}

void write_graph(const std::filesystem::path& path, const SensorGraph& g,
                 std::optional<std::size_t> edge_selections) {
  write_json(path, graph_to_json(g, edge_selections));
}

SensorGraph read_graph(const std::filesystem::path& path) { return graph_from_json(read_json(path)); }

json sensors_to_json(const std::vector<SensorInfo>& sensors) {
  json doc = json::array();
  for (const auto& s : sensors)
    doc.push_back({{"id", s.id}, {"kind", std::string(to_string(s.kind))}, {"x", s.x}, {"y", s.y}});
  return doc;
}

std::vector<SensorInfo> sensors_from_json(const json& doc) {
  try {
    std::vector<SensorInfo> out;
    for (const auto& item : doc) {
      SensorInfo info;
      info.id = item.at("id").get<std::string>();
      info.kind = parse_sensor_kind(item.value("kind", std::string("XStrain")));
      info.x = item.value("x", 0.0);
      info.y = item.value("y", 0.0);
      out.push_back(std::move(info));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("sensor json: ") + e.what());
  }
}

void write_sensors(const std::filesystem::path& path, const std::vector<SensorInfo>& sensors) {
  write_json(path, sensors_to_json(sensors));
}

std::vector<SensorInfo> read_sensors(const std::filesystem::path& path) {
  return sensors_from_json(read_json(path));
}

json events_to_json(const std::vector<EventWindow>& events) {
  json doc = json::array();
  for (const auto& e : events) doc.push_back({{"start", e.start}, {"end", e.end}, {"peak", e.peak_magnitude}});
  return doc;
}

std::vector<EventWindow> events_from_json(const json& doc) {
  try {
    std::vector<EventWindow> out;
    for (const auto& item : doc) {
      EventWindow e;
      e.start = item.at("start").get<std::size_t>();
      e.end = item.at("end").get<std::size_t>();
      e.peak_magnitude = item.value("peak", 0.0);
      if (e.start >= e.end) throw Error(Errc::ParseError, "event window with start >= end");
      out.push_back(e);
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("events json: ") + e.what());
  }
}

void write_events(const std::filesystem::path& path, const std::vector<EventWindow>& events) {
  write_json(path, events_to_json(events));
}

std::vector<EventWindow> read_events(const std::filesystem::path& path) {
  return events_from_json(read_json(path));
}

SignalMatrix read_signals_csv(const std::filesystem::path& path, const std::vector<SensorInfo>* sidecar) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::ParseError, path.string() + " is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.front() != "t")
    throw Error(Errc::ParseError, path.string() + ": header must start with 't' and name >= 1 sensor");

  SignalMatrix out;
  std::map<std::string, SensorInfo> meta;
  if (sidecar)
    for (const auto& s : *sidecar) meta[s.id] = s;
  for (std::size_t c = 1; c < header.size(); ++c) {
    SensorInfo info;
    info.id = header[c];
    info.x = static_cast<double>(c - 1);
    if (sidecar) {
      const auto it = meta.find(info.id);
      if (it == meta.end())
        throw Error(Errc::ParseError, "sensor '" + info.id + "' missing from metadata sidecar");
      info = it->second;
    }
    out.sensors.push_back(std::move(info));
  }

  std::vector<std::vector<double>> columns;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(Errc::ParseError, path.string() + ":" + std::to_string(row) + ": expected " +
                                        std::to_string(header.size()) + " fields");
    const std::string where = path.string() + ":" + std::to_string(row);
    out.times.push_back(parse_double(fields[0], where));
    std::vector<double> values(fields.size() - 1);
    for (std::size_t c = 1; c < fields.size(); ++c) values[c - 1] = parse_double(fields[c], where);
    columns.push_back(std::move(values));
  }

  const auto n = static_cast<Eigen::Index>(out.sensors.size());
  const auto t = static_cast<Eigen::Index>(columns.size());
  out.values.resize(n, t);
  for (Eigen::Index j = 0; j < t; ++j)
    for (Eigen::Index i = 0; i < n; ++i) out.values(i, j) = columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  return out;
}

void write_signals_csv(const std::filesystem::path& path, const SignalMatrix& signals) {
  signals.validate();
  std::vector<std::string> ids;
  for (const auto& s : signals.sensors) ids.push_back(s.id);
  write_table_csv(path, ids, signals.times, signals.values.transpose());
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const std::vector<double>& times, const Eigen::MatrixXd& rows_by_step) {
  if (rows_by_step.rows() != static_cast<Eigen::Index>(times.size()) ||
      rows_by_step.cols() != static_cast<Eigen::Index>(columns.size()))
    throw Error(Errc::ShapeMismatch, "table shape does not match headers");
  auto out = open_out(path);
  std::string buffer = "t";
  for (const auto& c : columns) buffer += "," + c;
  buffer += "\n";
  for (Eigen::Index r = 0; r < rows_by_step.rows(); ++r) {
    buffer += format_double(times[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < rows_by_step.cols(); ++c) {
      buffer += ',';
      buffer += format_double(rows_by_step(r, c));
    }
    buffer += '\n';
  }
  out << buffer;
}

json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

std::string file_digest(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[1 << 14];
  while (in) {
    in.read(buffer, sizeof(buffer));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << hash;
  return hex.str();
}

}  // namespace gsp::io
