#pragma once

#include <string>
#include <vector>

namespace fuelsurr {

// Minimal numeric CSV: one header row of column names, then double-valued rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t col(const std::string& name) const;  // throws if absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// shortest representation that round-trips the exact double
std::string format_double(double v);

}  // namespace fuelsurr
