#include "windplan/manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "windplan/csv_io.hpp"
#include "windplan/errors.hpp"

namespace windplan {

namespace {

using nlohmann::json;

class Digest {
 public:
  Digest() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw IoError("SHA-256 unavailable");
  }
  void update(const void* data, std::size_t size) { EVP_DigestUpdate(ctx_.get(), data, size); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), out.data(), &len);
    static const char* digits = "0123456789abcdef";
    std::string text;
    for (unsigned int k = 0; k < len; ++k) {
      text += digits[out[k] >> 4];
      text += digits[out[k] & 15];
    }
    return text;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Digest d;
  d.update(data.data(), data.size());
  return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Digest d;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

void RunManifest::add_input(const std::filesystem::path& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().filename() != kManifestFile) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) inputs_.emplace_back(f.string(), sha256_file(f));
    return;
  }
  inputs_.emplace_back(path.string(), sha256_file(path));
}

json RunManifest::to_json() const {
  json inputs = json::array();
  for (const auto& [path, digest] : inputs_) inputs.push_back({{"path", path}, {"sha256", digest}});
  json stages = json::array();
  for (const auto& [name, seconds] : stages_) stages.push_back({{"stage", name}, {"wall_clock_s", seconds}});
  return {{"command", command_}, {"tool_version", kToolVersion}, {"inputs", inputs},
          {"config", config_},   {"stages", stages},             {"warnings", warnings_}};
}

void RunManifest::write(const std::filesystem::path& dir) const {
  const auto path = dir / kManifestFile;
  json doc = {{"tool", "plan"}, {"version", kToolVersion}, {"runs", json::array()}};
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    try {
      json previous = json::parse(read_text_file(path));
      if (previous.is_object() && previous.contains("runs") && previous["runs"].is_array()) doc = previous;
    } catch (const json::parse_error&) {
      // An unreadable manifest is replaced.
    }
  }
  doc["runs"].push_back(to_json());
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace windplan
