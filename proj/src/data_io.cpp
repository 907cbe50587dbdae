#include "deviatile/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "deviatile/error.hpp"

namespace deviatile {

SortedSample ReturnSeries::sorted() const {
  return SortedSample::from_unsorted(values, Provenance::file);
}

Transform transform_from_string(const std::string& name, double factor) {
  if (name == "neg_log_return" || name == "neg-log-return") return Transform::neg_log_return(factor);
  if (name == "identity") {
    if (factor != 1.0) return Transform::scale(factor);
    return Transform::identity();
  }
  if (name == "scale") return Transform::scale(factor);
  throw InvalidArgument("unknown transform '" + name +
                        "' (expected neg_log_return, identity or scale)");
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
long days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400 + (m <= 2);
}

std::string iso(long days) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos
                                                                  : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_value(const std::string& s, std::size_t line, const std::string& column) {
  // Underflow to a subnormal is fine; overflow shows up as inf.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ParseError("column '" + column + "': not a finite number: '" + s + "'", line);
  }
  return v;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        std::size_t line) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError("missing column '" + name + "'", line);
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  if (m < 1 || m > 12 || d < 1) return false;
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const unsigned limit = kDays[m - 1] + (m == 2 && leap ? 1 : 0);
  return d <= limit;
}

ReturnSeries parse_csv(const std::string& text, const CsvSchema& schema, const Transform& t,
                       const std::string& source) {
  const bool prices = t.kind == Transform::Kind::neg_log_return;
  const std::optional<std::string>& value_column =
      prices ? schema.price_column : schema.return_column;
  if (!value_column) {
    throw InvalidArgument(prices ? "neg_log_return needs a price column"
                                 : "identity/scale transforms need a return column");
  }
  if (!std::isfinite(t.factor) || t.factor == 0.0) {
    throw InvalidArgument("transform factor must be finite and nonzero");
  }

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  std::size_t date_idx = 0;
  std::size_t value_idx = 0;
  std::vector<std::string> dates;
  std::vector<double> raw;
  std::vector<std::size_t> lines;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    auto fields = split(line, schema.delimiter);
    if (header.empty()) {
      header = std::move(fields);
      date_idx = find_column(header, schema.date_column, lineno);
      value_idx = find_column(header, *value_column, lineno);
      continue;
    }
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    }
    if (!is_iso_date(fields[date_idx])) {
      throw ParseError("invalid date '" + fields[date_idx] + "' (expected YYYY-MM-DD)", lineno);
    }
    dates.push_back(fields[date_idx]);
    raw.push_back(parse_value(fields[value_idx], lineno, *value_column));
    lines.push_back(lineno);
  }
  if (header.empty()) throw ParseError("missing header row", 0);

  // Accept either direction, reject anything non-monotone.
  const bool descending = dates.size() >= 2 && dates[1] < dates[0];
  for (std::size_t i = 1; i < dates.size(); ++i) {
    const bool ok = descending ? dates[i] < dates[i - 1] : dates[i - 1] < dates[i];
    if (!ok) {
      throw ParseError("dates are not strictly monotone ('" + dates[i - 1] + "' then '" +
                           dates[i] + "')",
                       lines[i]);
    }
  }
  if (descending) {
    std::reverse(dates.begin(), dates.end());
    std::reverse(raw.begin(), raw.end());
    std::reverse(lines.begin(), lines.end());
  }

  ReturnSeries out;
  out.source = source;
  if (prices) {
    if (raw.size() < 2) throw ParseError("neg_log_return needs at least two price rows", 0);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!(raw[i] > 0.0)) throw ParseError("price must be positive", lines[i]);
    }
    for (std::size_t i = 1; i < raw.size(); ++i) {
      out.dates.push_back(dates[i]);
      out.values.push_back(-t.factor * std::log(raw[i] / raw[i - 1]));
    }
  } else {
    if (raw.empty()) throw ParseError("no data rows", 0);
    out.dates = std::move(dates);
    out.values = std::move(raw);
    if (t.kind == Transform::Kind::scale) {
      for (double& v : out.values) v *= t.factor;
    }
  }
  return out;
}

ReturnSeries ingest_csv(const std::string& path, const CsvSchema& schema, const Transform& t) {
  try {
    return parse_csv(read_text_file(path), schema, t, path);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::vector<ReturnSeries> split_periods(const ReturnSeries& s,
                                        const std::vector<std::string>& boundaries) {
  for (const auto& b : boundaries) {
    if (!is_iso_date(b)) throw InvalidArgument("invalid boundary date '" + b + "'");
  }
  if (!std::is_sorted(boundaries.begin(), boundaries.end())) {
    throw InvalidArgument("boundaries must be in ascending order");
  }
  std::vector<ReturnSeries> out;
  std::size_t start = 0;
  for (std::size_t j = 0; j <= boundaries.size(); ++j) {
    std::size_t stop = s.size();
    if (j < boundaries.size()) {
      stop = static_cast<std::size_t>(
          std::lower_bound(s.dates.begin(), s.dates.end(), boundaries[j]) - s.dates.begin());
    }
    if (stop <= start) {
      throw InvalidArgument("split_periods: empty period " +
                            (j < boundaries.size() ? "before " + boundaries[j]
                                                   : "after " + boundaries.back()));
    }
    ReturnSeries piece;
    piece.source = s.source;
    piece.dates.assign(s.dates.begin() + static_cast<long>(start),
                       s.dates.begin() + static_cast<long>(stop));
    piece.values.assign(s.values.begin() + static_cast<long>(start),
                        s.values.begin() + static_cast<long>(stop));
    out.push_back(std::move(piece));
    start = stop;
  }
  return out;
}

std::string series_to_csv(const ReturnSeries& s) {
  std::string out = "date,value\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += s.dates[i];
    out += ',';
    out += format_number(s.values[i]);
    out += '\n';
  }
  return out;
}

void export_series(const ReturnSeries& s, const std::string& path) {
  write_text_file(path, series_to_csv(s));
}

void export_report(const Report& r, const std::string& path, ReportFormat format) {
  write_text_file(path, format == ReportFormat::structured ? to_structured(r) : to_dsv(r));
}

Report read_report(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return from_structured(text);
  return from_dsv(text);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

namespace {

std::vector<long> weekdays(int first_year, int last_year) {
  std::vector<long> out;
  const long begin = days_from_civil(first_year, 1, 1);
  const long end = days_from_civil(last_year + 1, 1, 1);
  for (long d = begin; d < end; ++d) {
    const long dow = ((d % 7) + 10) % 7;  // 0 = Monday; 1970-01-01 was a Thursday
    if (dow < 5) out.push_back(d);
  }
  return out;
}

// count dates spread evenly over the weekdays of the range.
std::vector<std::string> trading_dates(int first_year, int last_year, std::size_t count) {
  const auto all = weekdays(first_year, last_year);
  if (count > all.size()) {
    throw InvalidArgument("fixture: " + std::to_string(count) + " dates do not fit in " +
                          std::to_string(first_year) + "-" + std::to_string(last_year));
  }
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(iso(all[i * all.size() / count]));
  return out;
}

}  // namespace

ReturnSeries garch_fixture(const GarchProcess& p, std::size_t first_count,
                           std::size_t second_count, std::uint64_t seed) {
  ReturnSeries s;
  s.dates = trading_dates(2000, 2009, first_count);
  const auto second = trading_dates(2010, 2019, second_count);
  s.dates.insert(s.dates.end(), second.begin(), second.end());
  s.values = simulate_garch(p, first_count + second_count, seed).path;
  s.source = "synthetic GARCH fixture";
  return s;
}

}  // namespace deviatile
