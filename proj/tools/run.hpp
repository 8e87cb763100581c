#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace gsp::cli {

using nlohmann::json;

/// Book-keeping for one command invocation: resolved options, the files read
/// and written, and wall-clock timings. Produces the run manifest.
class Run {
 public:
  Run(std::string command, json options, std::filesystem::path manifest_path);

  void input(const std::filesystem::path& path);
  void output(const std::filesystem::path& path);
  /// Timing entries live only in the manifest so outputs stay reproducible.
  json& timings() { return timings_; }

  /// Digests every recorded file and writes the manifest.
  void finish();

  const std::vector<std::filesystem::path>& outputs() const { return outputs_; }

 private:
  std::string command_;
  json options_;
  std::filesystem::path manifest_path_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  json timings_ = json::object();
  std::chrono::steady_clock::time_point start_;
};

/// Manifest next to a file output (`x.json` -> `x.json.manifest.json`) or
/// inside a directory output.
std::filesystem::path manifest_for_file(const std::filesystem::path& out);
std::filesystem::path manifest_for_dir(const std::filesystem::path& dir);

}  // namespace gsp::cli
