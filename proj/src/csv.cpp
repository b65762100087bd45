#include "ellq/csv.hpp"

#include "ellq/error.hpp"

#include <fstream>

namespace ellq {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell.push_back(ch);
        }
    }
    out.push_back(cell);
    return out;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw InvalidParameter("csv: no column named '" + name + "'");
}

std::vector<std::optional<double>> CsvTable::numbers(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<std::optional<double>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (c >= row.size() || row[c].empty()) {
            out.emplace_back();
            continue;
        }
        try {
            out.emplace_back(std::stod(row[c]));
        } catch (const std::exception&) {
            throw InvalidParameter("csv: non-numeric cell '" + row[c] + "' in column " + name);
        }
    }
    return out;
}

std::vector<std::string> CsvTable::strings(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<std::string> out;
    for (const auto& row : rows) out.push_back(c < row.size() ? row[c] : std::string{});
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("csv: cannot open " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) return table;
    table.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split_csv_line(line));
    }
    return table;
}

}  // namespace ellq
