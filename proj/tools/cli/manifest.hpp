#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace decompad::cli {

/// SHA-1 of "blob <size>\0<content>", as `git hash-object` prints it.
std::string git_blob_sha1(std::string_view content);
std::string git_blob_sha1_file(const std::filesystem::path& path);

/// Record of one command: the config it ran with, content hashes of what it
/// read and wrote, and how long each stage took.
class RunManifest {
 public:
  RunManifest(std::string command, nlohmann::json config, nlohmann::json arguments);

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  /// Runs `fn` and records its wall time under `stage`.
  template <typename Fn>
  auto time_stage(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      RunManifest* self;
      std::string stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        self->timings_.emplace_back(
            stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
    } record{this, stage, start};
    return fn();
  }

  nlohmann::json to_json() const;
  /// Written atomically.
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::json config_;
  nlohmann::json arguments_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
  std::vector<std::pair<std::string, double>> timings_;
};

}  // namespace decompad::cli
