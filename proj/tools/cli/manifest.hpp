#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gbcm::cli {

std::string sha256_hex(const std::string& bytes);
std::string utc_timestamp();

// Written next to every output so a run can be reproduced and its inputs
// checked.
struct RunManifest {
  struct Input {
    std::string path;
    std::string sha256;
  };

  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<Input> inputs;
  std::string library_version;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;

  // Reads the file and records its digest.
  void add_input(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace gbcm::cli
