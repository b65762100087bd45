#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ellq {

/// Plain comma-separated table with a header row. No quoting; every file
/// this project writes is numeric or short labels.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Throws InvalidParameter for an unknown column.
    [[nodiscard]] std::size_t column(const std::string& name) const;
    /// Empty cells come back as nullopt.
    [[nodiscard]] std::vector<std::optional<double>> numbers(const std::string& name) const;
    [[nodiscard]] std::vector<std::string> strings(const std::string& name) const;
};

[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

/// Split on commas, keeping empty trailing fields.
[[nodiscard]] std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace ellq
