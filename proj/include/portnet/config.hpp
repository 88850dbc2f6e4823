#pragma once

#include <map>
#include <string>

namespace portnet {

/// Flat `key = value` file (TOML subset: comments with '#', optional quotes
/// around strings, no tables). Throws InvalidInput with the line number.
std::map<std::string, std::string> parse_flat_config(const std::string& text);
std::map<std::string, std::string> read_flat_config(const std::string& path);

}  // namespace portnet
