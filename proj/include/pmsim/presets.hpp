#pragma once
#include <string>
#include <vector>

#include "pmsim/config.hpp"

namespace pmsim {

struct PresetInfo {
  std::string name;
  std::string description;
  bool builtin = false;  // composite scenario with no config file form
};

const std::vector<PresetInfo>& list_presets();
bool is_preset(const std::string& name);
bool is_builtin_preset(const std::string& name);

// JSON text of a config-backed preset; throws ConfigError for unknown or
// builtin names
std::string preset_text(const std::string& name);
ExperimentConfig preset_config(const std::string& name);

}  // namespace pmsim
