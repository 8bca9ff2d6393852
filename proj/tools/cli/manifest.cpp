#include "cli/manifest.hpp"

#include <ctime>

#include <openssl/evp.h>

#include "gbcm/error.hpp"
#include "gbcm/io.hpp"
#include "gbcm/version.hpp"

namespace gbcm::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw DomainError("sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const std::string& path) {
  inputs.push_back({path, sha256_hex(read_file(path))});
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["parameters"] = parameters;
  j["inputs"] = nlohmann::json::array();
  for (const auto& in : inputs) j["inputs"].push_back({{"path", in.path}, {"sha256", in.sha256}});
  j["library_version"] = library_version.empty() ? std::string(kVersion) : library_version;
  j["seed"] = seed;
  j["started"] = started;
  j["finished"] = finished;
  return j;
}

}  // namespace gbcm::cli
