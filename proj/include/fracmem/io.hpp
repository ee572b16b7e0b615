#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracmem/fracop.hpp"

namespace fracmem::io {

using Json = nlohmann::ordered_json;

/// Shortest form with 17 significant digits ("%.17g"); round-trips exactly.
std::string format_number(double value);

/// JSON text with every floating-point number written by format_number.
/// Non-finite numbers become null.
std::string dump_json(const Json& value, int indent = 2);

/// Writes `content` to a temporary file next to `path`, then renames it.
void write_atomic(const std::filesystem::path& path, const std::string& content);

inline constexpr const char* kSchemaLine = "# fracmem-schema 1";

/// CSV with the schema comment line and a column header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  /// Appends a row; cells are already formatted.
  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Per-cell table: cell, i, j, x, y, u, in_D.
std::string fields_csv(const DomainMask& domain, const Field& u, const Configuration* d);

/// Grayscale heatmap, one rect per inside cell; white at `lo`, black at `hi`.
/// The y axis points up.
std::string svg_heatmap(const DomainMask& domain, const Field& values, double lo, double hi,
                        const std::string& title);

}  // namespace fracmem::io
