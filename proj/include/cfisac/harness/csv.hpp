#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cfisac::harness {

/// "%.10g", or "%.17g" when ten digits would not round-trip.
std::string format_number(double x);

class Table {
 public:
  explicit Table(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  /// Throws std::invalid_argument when the cell count differs from the header.
  void add(std::vector<std::string> cells);

  void write(std::ostream& os) const;
  /// Throws std::runtime_error when the file cannot be written.
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses a file written by Table::save (no quoting). Throws on ragged rows.
Table read_csv(const std::string& path);

}  // namespace cfisac::harness
