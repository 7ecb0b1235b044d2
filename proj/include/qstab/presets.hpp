#pragma once

#include <string>
#include <variant>
#include <vector>

#include "qstab/nmodel.hpp"
#include "qstab/server_alloc.hpp"

namespace qstab {

using EnvConfig = std::variant<ServerAllocConfig, NModelConfig>;

// Named parameter presets. Throws ConfigError for unknown names.
EnvConfig load_preset(const std::string& name);

const std::vector<std::string>& preset_names();

}  // namespace qstab
