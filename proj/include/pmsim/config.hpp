#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmsim/types.hpp"

namespace pmsim {

// Validated, normalized experiment description. `data` is the parsed JSON
// with optional scalars (seed, coupling shape, output block, ...) filled in,
// so serializing and re-parsing it round-trips to an equal config.
struct ExperimentConfig {
  nlohmann::json data;

  std::string command() const { return data.at("command").get<std::string>(); }
  std::uint64_t seed() const { return data.at("seed").get<std::uint64_t>(); }
  std::string output_path() const { return data.at("output").at("path").get<std::string>(); }
  std::string output_format() const { return data.at("output").at("format").get<std::string>(); }

  bool operator==(const ExperimentConfig& o) const { return data == o.data; }
};

// Collects every violation (field path + message) instead of stopping at the
// first. An empty result means parse_config will succeed.
std::vector<std::string> validate_config(const nlohmann::json& j);

// Throws ConfigError carrying the full violation list.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
// IoError when unreadable; ConfigError when invalid.
ExperimentConfig load_config_file(const std::string& path);

}  // namespace pmsim
