#include "run.hpp"

#include "gsp/io.hpp"

namespace gsp::cli {

Run::Run(std::string command, json options, std::filesystem::path manifest_path)
    : command_(std::move(command)),
      options_(std::move(options)),
      manifest_path_(std::move(manifest_path)),
      start_(std::chrono::steady_clock::now()) {}

void Run::input(const std::filesystem::path& path) { inputs_.push_back(path); }

void Run::output(const std::filesystem::path& path) { outputs_.push_back(path); }

void Run::finish() {
  const auto digest_list = [](const std::vector<std::filesystem::path>& paths) {
    json list = json::array();
    for (const auto& p : paths) list.push_back({{"path", p.generic_string()}, {"fnv1a64", io::file_digest(p)}});
    return list;
  };
  timings_["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  json manifest;
  manifest["format"] = "gsp-manifest/1";
  manifest["command"] = command_;
  manifest["options"] = options_;
  manifest["seed"] = options_.value("seed", std::uint64_t{0});
  manifest["inputs"] = digest_list(inputs_);
  manifest["outputs"] = digest_list(outputs_);
  manifest["timings"] = timings_;
  io::write_json(manifest_path_, manifest);
}

std::filesystem::path manifest_for_file(const std::filesystem::path& out) {
  auto p = out;
  p += ".manifest.json";
  return p;
}

std::filesystem::path manifest_for_dir(const std::filesystem::path& dir) { return dir / "manifest.json"; }

}  // namespace gsp::cli
