#include "ellq/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ellq {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& value) {
    Int v{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + value + "'");
    }
    return v;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& value) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "n") {
        c.n = to_integer<int>(key, value);
    } else if (key == "rhs") {
        c.rhs = value;
    } else if (key == "eps" || key == "epsilon") {
        c.epsilon = to_double(key, value);
    } else if (key == "p0") {
        c.p0 = to_double(key, value);
    } else if (key == "shots") {
        c.shots = to_integer<std::size_t>(key, value);
    } else if (key == "seed") {
        c.seed = to_integer<std::uint64_t>(key, value);
    } else if (key == "t-max") {
        c.t_max = to_double(key, value);
    } else if (key == "theta") {
        c.theta = to_double(key, value);
    } else if (key == "out") {
        c.out = value;
    } else if (key == "nu") {
        c.nu = to_double(key, value);
    } else if (key == "growth") {
        c.growth = to_double(key, value);
    } else if (key == "k-max") {
        c.k_max = to_integer<std::size_t>(key, value);
    } else if (key == "t0") {
        c.t0 = to_double(key, value);
    } else if (key == "cases") {
        c.cases = split_list(value);
    } else if (key == "criteria") {
        c.criteria.clear();
        for (const auto& item : split_list(value)) c.criteria.push_back(to_integer<int>(key, item));
    } else {
        throw ConfigError("config: unknown key '" + raw_key + "'");
    }
}

void validate(const RunConfig& c) {
    if (c.n && *c.n < 2) throw ConfigError("--n must be at least 2");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("--eps must lie in (0, 1)");
    if (c.p0 && !(*c.p0 > 0.0 && *c.p0 < 1.0)) throw ConfigError("--p0 must lie in (0, 1)");
    if (c.shots && *c.shots == 0) throw ConfigError("--shots must be positive");
    if (c.t_max && !(*c.t_max >= 0.0)) throw ConfigError("--t-max must be non-negative");
    if (!(c.theta > 0.0 && c.theta <= 1.0)) throw ConfigError("--theta must lie in (0, 1]");
    if (!(c.nu > 0.0 && c.nu < 1.0)) throw ConfigError("nu must lie in (0, 1)");
    if (!(c.growth > 1.0)) throw ConfigError("growth must exceed 1");
    if (c.k_max == 0) throw ConfigError("k_max must be positive");
    if (c.t0 && !(*c.t0 > 0.0)) throw ConfigError("t0 must be positive");
    if (c.out.empty()) throw ConfigError("--out must not be empty");
    for (int id : c.criteria) {
        if (id < 1 || id > 14) throw ConfigError("criteria ids run from 1 to 14");
    }
}

}  // namespace ellq
