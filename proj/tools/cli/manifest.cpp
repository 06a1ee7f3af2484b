#include "cli/manifest.hpp"

#include <array>
#include <memory>

#include <openssl/evp.h>

#include "decompad/io/csv.hpp"

namespace decompad::cli {

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string git_blob_sha1_file(const std::filesystem::path& path) {
  return git_blob_sha1(io::read_file(path));
}

RunManifest::RunManifest(std::string command, nlohmann::json config, nlohmann::json arguments)
    : command_(std::move(command)), config_(std::move(config)), arguments_(std::move(arguments)) {}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs_.emplace_back(path.generic_string(), git_blob_sha1_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.emplace_back(path.generic_string(), git_blob_sha1_file(path));
}

nlohmann::json RunManifest::to_json() const {
  using nlohmann::json;
  auto files = [](const auto& list) {
    json out = json::array();
    for (const auto& [path, hash] : list) out.push_back({{"path", path}, {"sha1", hash}});
    return out;
  };
  json timings = json::array();
  for (const auto& [stage, seconds] : timings_) timings.push_back({{"stage", stage}, {"seconds", seconds}});
  return {{"command", command_}, {"arguments", arguments_}, {"config", config_},
          {"inputs", files(inputs_)}, {"outputs", files(outputs_)}, {"timings", timings}};
}

void RunManifest::write(const std::filesystem::path& path) const {
  io::write_file_atomic(path, to_json().dump(2) + "\n");
}

}  // namespace decompad::cli
