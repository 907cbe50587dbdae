#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deviatile/distributions.hpp"
#include "deviatile/report.hpp"

namespace deviatile {

struct ReturnSeries {
  std::vector<std::string> dates;  // ISO-8601 YYYY-MM-DD, strictly increasing
  std::vector<double> values;
  std::string source;

  std::size_t size() const noexcept { return values.size(); }
  SortedSample sorted() const;
};

struct CsvSchema {
  std::string date_column = "date";
  std::optional<std::string> price_column;   // for neg_log_return
  std::optional<std::string> return_column;  // for identity / scale
  char delimiter = ',';
};

// neg_log_return: x_t = -factor * log(P_t / P_{t-1}).
// identity: x_t = column value. scale: x_t = factor * column value.
struct Transform {
  enum class Kind { neg_log_return, identity, scale };
  Kind kind = Kind::neg_log_return;
  double factor = 1.0;

  static Transform neg_log_return(double factor = 1.0) { return {Kind::neg_log_return, factor}; }
  static Transform identity() { return {Kind::identity, 1.0}; }
  static Transform scale(double c) { return {Kind::scale, c}; }
};

Transform transform_from_string(const std::string& name, double factor = 1.0);

// Strict YYYY-MM-DD with a valid calendar day.
bool is_iso_date(const std::string& s);

// Header row required; lines starting with '#' and blank lines are skipped.
// Rows may be in ascending or descending date order; the result is always
// chronological. Errors carry 1-based line numbers.
ReturnSeries parse_csv(const std::string& text, const CsvSchema& schema, const Transform& t,
                       const std::string& source = "<memory>");
ReturnSeries ingest_csv(const std::string& path, const CsvSchema& schema, const Transform& t);

// Pieces [start, b1), [b1, b2), ..., [bm, end]; every piece must be nonempty.
std::vector<ReturnSeries> split_periods(const ReturnSeries& s,
                                        const std::vector<std::string>& boundaries);

// "date,value" CSV at 17 significant digits; reads back with the schema
// {date, return_column = value} and the identity transform.
std::string series_to_csv(const ReturnSeries& s);
void export_series(const ReturnSeries& s, const std::string& path);

void export_report(const Report& r, const std::string& path, ReportFormat format);
Report read_report(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Synthetic log-loss fixture: a GARCH path on weekday dates with
// first_count dates in [2000, 2009] and second_count in [2010, 2019].
ReturnSeries garch_fixture(const GarchProcess& p, std::size_t first_count,
                           std::size_t second_count, std::uint64_t seed);

}  // namespace deviatile
