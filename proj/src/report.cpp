#include "deviatile/report.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deviatile/error.hpp"

namespace deviatile {

std::string to_string(ColumnType t) { return t == ColumnType::number ? "number" : "text"; }

void Report::add_column(std::string name, ColumnType t) {
  if (!rows.empty()) throw InvalidArgument("report: cannot add a column after rows");
  columns.push_back(std::move(name));
  types.push_back(t);
}

void Report::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw InvalidArgument("report: row has " + std::to_string(row.size()) + " cells, expected " +
                          std::to_string(columns.size()));
  }
  for (std::size_t j = 0; j < row.size(); ++j) {
    const bool text = std::holds_alternative<std::string>(row[j]);
    const bool num = std::holds_alternative<double>(row[j]);
    if ((types[j] == ColumnType::number && text) || (types[j] == ColumnType::text && num)) {
      throw InvalidArgument("report: cell type does not match column '" + columns[j] + "'");
    }
  }
  rows.push_back(std::move(row));
}

void Report::set_meta(const std::string& key, std::string value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  metadata.emplace_back(key, std::move(value));
}

const std::string* Report::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::size_t Report::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == name) return j;
  }
  throw InvalidArgument("report: no column '" + name + "'");
}

double Report::number(std::size_t row, const std::string& column) const {
  const Cell& c = rows.at(row).at(column_index(column));
  if (const double* d = std::get_if<double>(&c)) return *d;
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

bool same_cell(const Cell& a, const Cell& b) {
  if (a.index() != b.index()) return false;
  if (const double* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return (std::isnan(*x) && std::isnan(y)) || *x == y;
  }
  return a == b;
}

}  // namespace

bool operator==(const Report& a, const Report& b) {
  if (a.metadata != b.metadata || a.columns != b.columns || a.types != b.types ||
      a.warnings != b.warnings || a.rows.size() != b.rows.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].size() != b.rows[i].size()) return false;
    for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
      if (!same_cell(a.rows[i][j], b.rows[i][j])) return false;
    }
  }
  return true;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "dsv" || s == "csv") return ReportFormat::dsv;
  if (s == "structured" || s == "json") return ReportFormat::structured;
  throw InvalidArgument("unknown report format '" + s + "' (expected dsv or structured)");
}

ReportFormat report_format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".json") return ReportFormat::structured;
  return ReportFormat::dsv;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

double parse_number(const std::string& s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(v))) {
    throw ParseError("not a number: '" + s + "'", line);
  }
  return v;
}

void reject_newline(const std::string& s, const char* what) {
  if (s.find_first_of("\r\n") != std::string::npos) {
    throw InvalidArgument(std::string("report: newline in ") + what);
  }
}

std::string quote_if_needed(const std::string& s, char delim) {
  if (!s.empty() && s.find(delim) == std::string::npos && s.find('"') == std::string::npos &&
      s.front() != ' ' && s.back() != ' ') {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct Field {
  std::string text;
  bool quoted = false;
};

std::vector<Field> split_fields(const std::string& line, char delim, std::size_t lineno) {
  std::vector<Field> out;
  std::size_t i = 0;
  while (true) {
    Field f;
    if (i < line.size() && line[i] == '"') {
      f.quoted = true;
      ++i;
      while (true) {
        if (i >= line.size()) throw ParseError("unterminated quoted field", lineno);
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            f.text += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        f.text += line[i++];
      }
      if (i < line.size() && line[i] != delim) {
        throw ParseError("unexpected character after quoted field", lineno);
      }
    } else {
      const auto next = line.find(delim, i);
      const std::size_t stop = next == std::string::npos ? line.size() : next;
      f.text = line.substr(i, stop - i);
      i = stop;
    }
    out.push_back(std::move(f));
    if (i >= line.size()) break;
    ++i;  // delimiter
  }
  return out;
}

std::vector<std::string> split_plain(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) out.push_back(item);
  return out;
}

ColumnType column_type_from_string(const std::string& s, std::size_t line) {
  if (s == "number") return ColumnType::number;
  if (s == "text") return ColumnType::text;
  throw ParseError("unknown column type '" + s + "'", line);
}

}  // namespace

std::string to_dsv(const Report& r, char delim) {
  std::ostringstream out;
  out << "# " << kReportSchema << '\n';
  for (const auto& [k, v] : r.metadata) {
    reject_newline(k, "metadata key");
    reject_newline(v, "metadata value");
    if (k.find(':') != std::string::npos || k == "column-types" || k == "warning") {
      throw InvalidArgument("report: invalid metadata key '" + k + "'");
    }
    out << "# " << k << ": " << v << '\n';
  }
  out << "# column-types: ";
  for (std::size_t j = 0; j < r.types.size(); ++j) {
    out << (j ? "," : "") << to_string(r.types[j]);
  }
  out << '\n';
  for (const auto& w : r.warnings) {
    reject_newline(w, "warning");
    out << "# warning: " << w << '\n';
  }
  for (std::size_t j = 0; j < r.columns.size(); ++j) {
    reject_newline(r.columns[j], "column name");
    out << (j ? std::string(1, delim) : "") << quote_if_needed(r.columns[j], delim);
  }
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << delim;
      if (const double* d = std::get_if<double>(&row[j])) {
        out << format_number(*d);
      } else if (const std::string* s = std::get_if<std::string>(&row[j])) {
        reject_newline(*s, "text cell");
        out << quote_if_needed(*s, delim);
      }
    }
    out << '\n';
  }
  return out.str();
}

Report from_dsv(const std::string& text, char delim) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || line != std::string("# ") + kReportSchema) {
    throw ParseError(std::string("missing '# ") + kReportSchema + "' header", 1);
  }
  ++lineno;
  Report r;
  bool have_types = false;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header && line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ", 2);
      if (colon == std::string::npos) throw ParseError("malformed metadata line", lineno);
      const std::string key = line.substr(2, colon - 2);
      const std::string value = line.substr(colon + 2);
      if (key == "column-types") {
        if (!value.empty()) {
          for (const auto& t : split_plain(value, ',')) {
            r.types.push_back(column_type_from_string(t, lineno));
          }
        }
        have_types = true;
      } else if (key == "warning") {
        r.warnings.push_back(value);
      } else {
        r.metadata.emplace_back(key, value);
      }
      continue;
    }
    if (!have_header) {
      if (!have_types) throw ParseError("missing column-types line", lineno);
      if (!line.empty()) {
        for (auto& f : split_fields(line, delim, lineno)) r.columns.push_back(std::move(f.text));
      }
      if (r.columns.size() != r.types.size()) {
        throw ParseError("header has " + std::to_string(r.columns.size()) +
                             " columns but column-types lists " + std::to_string(r.types.size()),
                         lineno);
      }
      have_header = true;
      continue;
    }
    const auto fields = split_fields(line, delim, lineno);
    if (fields.size() != r.columns.size()) {
      throw ParseError("expected " + std::to_string(r.columns.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    }
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const Field& f = fields[j];
      if (f.text.empty() && !f.quoted) {
        row.emplace_back(std::monostate{});
      } else if (r.types[j] == ColumnType::number) {
        row.emplace_back(parse_number(f.text, lineno));
      } else {
        row.emplace_back(f.text);
      }
    }
    r.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("missing column header line", lineno);
  return r;
}

std::string to_structured(const Report& r) {
  using ojson = nlohmann::ordered_json;
  ojson doc;
  doc["schema"] = kReportSchema;
  ojson meta = ojson::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  doc["metadata"] = meta;
  doc["columns"] = r.columns;
  ojson types = ojson::array();
  for (auto t : r.types) types.push_back(to_string(t));
  doc["types"] = types;
  ojson rows = ojson::array();
  for (const auto& row : r.rows) {
    ojson jr = ojson::array();
    for (const auto& c : row) {
      if (const double* d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) {
          jr.push_back(*d);
        } else {
          jr.push_back(format_number(*d));
        }
      } else if (const std::string* s = std::get_if<std::string>(&c)) {
        jr.push_back(*s);
      } else {
        jr.push_back(nullptr);
      }
    }
    rows.push_back(std::move(jr));
  }
  doc["rows"] = rows;
  doc["warnings"] = r.warnings;
  return doc.dump(2) + "\n";
}

Report from_structured(const std::string& text) {
  using ojson = nlohmann::ordered_json;
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
  }
  try {
    if (doc.at("schema").get<std::string>() != kReportSchema) {
      throw ParseError("unsupported schema '" + doc.at("schema").get<std::string>() + "'", 0);
    }
    Report r;
    for (const auto& [k, v] : doc.at("metadata").items()) {
      r.metadata.emplace_back(k, v.get<std::string>());
    }
    r.columns = doc.at("columns").get<std::vector<std::string>>();
    for (const auto& t : doc.at("types")) r.types.push_back(column_type_from_string(t, 0));
    if (r.types.size() != r.columns.size()) throw ParseError("types/columns length mismatch", 0);
    std::size_t i = 0;
    for (const auto& jr : doc.at("rows")) {
      ++i;
      if (jr.size() != r.columns.size()) {
        throw ParseError("row " + std::to_string(i) + " has the wrong width", 0);
      }
      std::vector<Cell> row;
      for (std::size_t j = 0; j < jr.size(); ++j) {
        const auto& c = jr[j];
        if (c.is_null()) {
          row.emplace_back(std::monostate{});
        } else if (r.types[j] == ColumnType::number) {
          row.emplace_back(c.is_string() ? parse_number(c.get<std::string>(), 0)
                                         : c.get<double>());
        } else {
          row.emplace_back(c.get<std::string>());
        }
      }
      r.rows.push_back(std::move(row));
    }
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const ojson::exception& e) {
    throw ParseError(std::string("report schema violation: ") + e.what(), 0);
  }
}

}  // namespace deviatile
