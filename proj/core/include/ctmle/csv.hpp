#ifndef CTMLE_CSV_HPP
#define CTMLE_CSV_HPP

#include <string>
#include <vector>

namespace ctmle {

/// Minimal CSV table: header row plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const; // -1 if absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// Extract a numeric column; non-numeric placeholders (".", "", "NA") are
/// dropped. `missing` receives the dropped-row count.
std::vector<double> numeric_column(const CsvTable& table, const std::string& name, int* missing);

} // namespace ctmle

#endif
