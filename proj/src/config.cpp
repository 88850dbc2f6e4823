#include "portnet/config.hpp"

#include <fstream>
#include <sstream>

#include "portnet/error.hpp"

namespace portnet {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw InvalidInput("expected key = value", "config", lineno);
        const std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw InvalidInput("empty key", "config", lineno);
        if (!value.empty() && (value[0] == '"' || value[0] == '\'')) {
            const auto close = value.find(value[0], 1);
            if (close == std::string::npos) throw InvalidInput("unterminated string", key, lineno);
            const std::string rest = trim(value.substr(close + 1));
            if (!rest.empty() && rest[0] != '#') throw InvalidInput("trailing characters after string", key, lineno);
            value = value.substr(1, close - 1);
        } else if (const auto hash = value.find('#'); hash != std::string::npos) {
            value = trim(value.substr(0, hash));
        }
        if (out.contains(key)) throw InvalidInput("duplicate key '" + key + "'", key, lineno);
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> read_flat_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("cannot read config file " + path, "config");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_flat_config(ss.str());
}

}  // namespace portnet
