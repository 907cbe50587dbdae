#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace deviatile {

// Missing cells are monostate; numbers print at 17 significant digits.
using Cell = std::variant<std::monostate, double, std::string>;

enum class ColumnType { number, text };
std::string to_string(ColumnType t);

struct Report {
  std::vector<std::pair<std::string, std::string>> metadata;  // insertion order
  std::vector<std::string> columns;
  std::vector<ColumnType> types;  // one per column
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> warnings;

  void add_column(std::string name, ColumnType t = ColumnType::number);
  void add_row(std::vector<Cell> row);  // throws on width/type mismatch
  void set_meta(const std::string& key, std::string value);
  const std::string* meta(const std::string& key) const;
  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;

  friend bool operator==(const Report&, const Report&);
};

inline constexpr const char* kReportSchema = "deviatile-report/1";

enum class ReportFormat { dsv, structured };
ReportFormat report_format_from_string(const std::string& s);
// .json -> structured, anything else dsv.
ReportFormat report_format_for_path(const std::string& path);

// Delimiter-separated text:
//   # deviatile-report/1
//   # <key>: <value>           (metadata, in order)
//   # column-types: number,text,...
//   # warning: <text>          (one per warning)
//   col1,col2,...
//   rows
std::string to_dsv(const Report& r, char delim = ',');
Report from_dsv(const std::string& text, char delim = ',');

// JSON document {"schema", "metadata", "columns", "types", "rows", "warnings"}.
// Non-finite numbers are written as the strings "nan", "inf", "-inf".
std::string to_structured(const Report& r);
Report from_structured(const std::string& text);

std::string format_number(double v);

}  // namespace deviatile
