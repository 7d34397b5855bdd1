#pragma once

#include "hdmean_cli/config.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace hdmean::cli {

struct Preset {
  std::string name;
  Command command;
  std::string description;
  nlohmann::json document;
};

/// Every shipped preset, in a stable order.
const std::vector<Preset>& presets();

/// Throws ConfigError (field "preset") for unknown names.
const Preset& find_preset(std::string_view name);

}  // namespace hdmean::cli
