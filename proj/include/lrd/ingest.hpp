#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrd/common.hpp"

namespace lrd {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
Date parse_iso_date(std::string_view text);
std::string format_iso_date(Date date);

struct PriceObservation {
  Date date;
  double close = 0.0;
};

/// Closing prices in strictly increasing date order.
struct PriceSeries {
  std::vector<PriceObservation> observations;
  Frequency frequency = Frequency::Daily;
  std::string label;

  std::size_t size() const { return observations.size(); }
  std::vector<double> closes() const;
};

/// Log-returns derived from a PriceSeries; values[t] = ln P[t+1] - ln P[t].
struct ReturnSeries {
  std::vector<double> values;
  Frequency frequency = Frequency::Daily;
  std::string source_label;

  std::size_t size() const { return values.size(); }
};

/// Checks ordering, positivity and that the frequency tag matches the date
/// spacing. Throws InputError naming the first violation.
void validate(const PriceSeries& series);

/// Reads `date,close` rows. A header is expected; a headerless file whose
/// first row parses is accepted and a warning is appended. Extra columns are
/// allowed when the header names `date` and `close` explicitly.
PriceSeries parse_prices(std::istream& in, std::string label,
                         std::vector<std::string>* warnings = nullptr);
PriceSeries load_prices(const std::filesystem::path& path, std::string label,
                        std::vector<std::string>* warnings = nullptr);

/// Keeps the last trading day of every ISO-8601 week (Mon-Sun) or calendar
/// month. Only Daily input is accepted and only Weekly/Monthly targets.
PriceSeries downsample(const PriceSeries& daily, Frequency target);

ReturnSeries log_returns(const PriceSeries& prices);

void write_prices_csv(std::ostream& out, const PriceSeries& prices);

/// `# label=<l> frequency=<f>` comment, a `log_return` header, one value per
/// line at round-trip precision.
void write_returns_csv(std::ostream& out, const ReturnSeries& returns);
ReturnSeries read_returns_csv(std::istream& in);

}  // namespace lrd
