#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace windplan {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kManifestFile = "manifest.json";

std::string sha256_hex(std::string_view data);
// IoError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

class RunManifest {
 public:
  explicit RunManifest(std::string command);

  // A file is digested as is; a directory contributes each regular file in name order.
  void add_input(const std::filesystem::path& path);
  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  void record_stage(std::string name, double seconds) { stages_.emplace_back(std::move(name), seconds); }

  // Times `body` as stage `name` and returns its result.
  template <typename Body>
  auto stage(std::string name, Body&& body) {
    const auto start = std::chrono::steady_clock::now();
    struct Recorder {
      RunManifest* self;
      std::string name;
      std::chrono::steady_clock::time_point start;
      ~Recorder() {
        self->record_stage(std::move(name),
                           std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
    } recorder{this, std::move(name), start};
    return body();
  }

  nlohmann::json to_json() const;

  // Writes <dir>/manifest.json. An existing manifest there gets this run
  // appended, so a directory never holds more than one manifest.
  void write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  nlohmann::json config_ = nlohmann::json::object();
  std::vector<std::string> warnings_;
  std::vector<std::pair<std::string, double>> stages_;
};

}  // namespace windplan
