#include "ctmle/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ctmle/errors.hpp"

namespace ctmle {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

} // namespace

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("read_csv: cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw DataError("read_csv: empty file '" + path + "'");
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split_line(line));
    }
    return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("write_csv: cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << table.header[i] << (i + 1 < table.header.size() ? "," : "");
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    if (!out) throw DataError("write_csv: failed writing '" + path + "'");
}

std::vector<double> numeric_column(const CsvTable& table, const std::string& name, int* missing) {
    const int col = table.column_index(name);
    if (col < 0) throw DataError("numeric_column: no column named '" + name + "'");
    std::vector<double> values;
    int dropped = 0;
    for (const auto& row : table.rows) {
        if (col >= static_cast<int>(row.size())) {
            ++dropped;
            continue;
        }
        const std::string& cell = row[col];
        if (cell.empty() || cell == "." || cell == "NA") {
            ++dropped;
            continue;
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size())
            throw DataError("numeric_column: unparseable numeric '" + cell + "' in column " + name);
        values.push_back(v);
    }
    if (missing) *missing = dropped;
    return values;
}

} // namespace ctmle
