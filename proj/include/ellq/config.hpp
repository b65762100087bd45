#pragma once

#include "ellq/error.hpp"
#include "ellq/relaxation.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ellq {

/// Bad flag, bad config file or bad value. Maps to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::optional<int> n;  ///< unset: 16, or the {4, 8, 16} ladder for `spectral`
    std::optional<std::string> rhs;
    double epsilon = 1e-3;
    std::optional<double> p0;
    std::optional<std::size_t> shots;
    std::uint64_t seed = 1;
    std::optional<double> t_max;
    double theta = kDefaultTheta;
    std::filesystem::path out = "out";
    // config-file only
    double nu = 0.01;
    double growth = 2.0;
    std::size_t k_max = 10;
    std::optional<double> t0;
    std::vector<std::string> cases = {"I", "II", "III", "IV"};
    std::vector<int> criteria;  ///< report: empty means all

    [[nodiscard]] int mesh_n() const { return n.value_or(16); }
};

/// Flat `key = value` lines, `#` starts a comment. Throws ConfigError on
/// malformed lines or duplicate keys.
[[nodiscard]] std::map<std::string, std::string> parse_config_text(const std::string& text);
[[nodiscard]] std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Sets one field from its textual form. Keys use the flag spelling
/// (`t-max` and `t_max` are both accepted). Throws ConfigError.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Range checks shared by every command. Throws ConfigError.
void validate(const RunConfig& config);

}  // namespace ellq
