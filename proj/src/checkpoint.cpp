// Checkpoint layout: a text line "GSPTGCN 1", one line of JSON describing
// every tensor {name, rows, cols, offset} plus model metadata, then the raw
// little-endian float64 payload in the order listed (column-major tensors).

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "gsp/error.hpp"
#include "gsp/tgcn.hpp"

namespace gsp::tgcn {

namespace {

constexpr std::string_view kMagic = "GSPTGCN 1";

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

template <typename F>
void for_each_tensor(TgcnModel& m, F&& f) {
  f("gcn1.mixing", m.gcn1.mixing);
  f("gcn2.mixing", m.gcn2.mixing);
  for_each_trainable(f, m);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TgcnModel& model) {
  TgcnModel m = model;
  nlohmann::json header;
  header["dropout"] = m.dropout;
  header["clip"] = m.scaling.clip;
  header["tensors"] = nlohmann::json::array();
  std::vector<double> payload;
  for_each_tensor(m, [&](const char* name, auto& t) {
    header["tensors"].push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}, {"offset", payload.size()}});
    payload.insert(payload.end(), t.data(), t.data() + t.size());
  });
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::ParseError, "cannot write " + path.string());
  out << kMagic << '\n' << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(double)));
}

TgcnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path.string());
  std::string magic, header_text;
  std::getline(in, magic);
  if (magic != kMagic) throw Error(Errc::ParseError, path.string() + " is not a T-GCN checkpoint");
  std::getline(in, header_text);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("checkpoint header: ") + e.what());
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % sizeof(double) != 0) throw Error(Errc::ParseError, "checkpoint payload is truncated");
  std::vector<double> payload(bytes.size() / sizeof(double));
  std::memcpy(payload.data(), bytes.data(), bytes.size());

  std::map<std::string, nlohmann::json> entries;
  for (const auto& t : header.at("tensors")) entries[t.at("name").get<std::string>()] = t;

  TgcnModel m;
  m.dropout = header.value("dropout", 0.2);
  m.scaling.clip = header.value("clip", 3.0);
  for_each_tensor(m, [&](const char* name, auto& t) {
    const auto found = entries.find(name);
    if (found == entries.end()) throw Error(Errc::ParseError, std::string("checkpoint lacks tensor ") + name);
    const auto rows = found->second.at("rows").get<Eigen::Index>();
    const auto cols = found->second.at("cols").get<Eigen::Index>();
    const auto offset = found->second.at("offset").get<std::size_t>();
    if (offset + static_cast<std::size_t>(rows * cols) > payload.size())
      throw Error(Errc::ParseError, std::string("tensor ") + name + " exceeds payload");
    if constexpr (std::remove_reference_t<decltype(t)>::ColsAtCompileTime == 1) {
      if (cols != 1) throw Error(Errc::ParseError, std::string("tensor ") + name + " must be a vector");
      t.resize(rows);
    } else {
      t.resize(rows, cols);
    }
    std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(offset), rows * cols, t.data());
  });
  return m;
}

}  // namespace gsp::tgcn
