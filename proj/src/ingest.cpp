#include "lrd/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

namespace lrd {

namespace {

using std::chrono::days;
using std::chrono::sys_days;

std::string_view trim(std::string_view value) {
  const auto first = value.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = value.find_last_not_of(" \t\r\n");
  return value.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool parse_int(std::string_view text, int& value) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

bool try_parse_date(std::string_view text, Date& date) {
  text = trim(text);
  // Timestamps such as "1992-01-02 00:00:00-05:00" keep only the date part.
  if (text.size() > 10 && (text[10] == ' ' || text[10] == 'T')) text = text.substr(0, 10);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  int y = 0;
  int m = 0;
  int d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d)) {
    return false;
  }
  date = Date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
  return date.ok();
}

bool try_parse_double(std::string_view text, double& value) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

sys_days iso_week_monday(Date date) {
  const sys_days day{date};
  const std::chrono::weekday wd{day};
  return day - days{wd.iso_encoding() - 1};
}

int month_index(Date date) {
  return static_cast<int>(date.year()) * 12 + static_cast<int>(static_cast<unsigned>(date.month()));
}

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

Date parse_iso_date(std::string_view text) {
  Date date;
  if (!try_parse_date(text, date)) {
    throw InputError("invalid ISO-8601 date '" + std::string(text) + "'");
  }
  return date;
}

std::string format_iso_date(Date date) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buffer;
}

std::vector<double> PriceSeries::closes() const {
  std::vector<double> out;
  out.reserve(observations.size());
  for (const auto& obs : observations) out.push_back(obs.close);
  return out;
}

void validate(const PriceSeries& series) {
  const auto& obs = series.observations;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(obs[i].close > 0.0) || !std::isfinite(obs[i].close)) {
      throw InputError("non-positive price on " + format_iso_date(obs[i].date));
    }
    if (i == 0) continue;
    const auto prev = sys_days{obs[i - 1].date};
    const auto curr = sys_days{obs[i].date};
    if (curr <= prev) {
      throw InputError("dates not strictly increasing at " + format_iso_date(obs[i].date));
    }
    if (series.frequency == Frequency::Weekly &&
        iso_week_monday(obs[i].date) == iso_week_monday(obs[i - 1].date)) {
      throw InputError("weekly series has two observations in the ISO week of " +
                       format_iso_date(obs[i].date));
    }
    if (series.frequency == Frequency::Monthly &&
        month_index(obs[i].date) == month_index(obs[i - 1].date)) {
      throw InputError("monthly series has two observations in the month of " +
                       format_iso_date(obs[i].date));
    }
  }
}

PriceSeries parse_prices(std::istream& in, std::string label, std::vector<std::string>* warnings) {
  PriceSeries series;
  series.label = std::move(label);
  series.frequency = Frequency::Daily;

  std::size_t date_col = 0;
  std::size_t close_col = 1;
  bool layout_known = false;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
      line = trim(line.substr(3));
    }
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');

    if (!layout_known) {
      layout_known = true;
      Date probe;
      if (try_parse_date(fields[0], probe)) {
        if (fields.size() != 2) {
          throw InputError(line_error(line_no, "headerless file must have exactly two columns"));
        }
        if (warnings != nullptr) {
          warnings->push_back("no `date,close` header found; treating columns as date,close");
        }
      } else {
        bool found_date = false;
        bool found_close = false;
        for (std::size_t c = 0; c < fields.size(); ++c) {
          const auto name = lowercase(fields[c]);
          if (name == "date") {
            date_col = c;
            found_date = true;
          } else if (name == "close") {
            close_col = c;
            found_close = true;
          }
        }
        if (!found_date || !found_close) {
          throw InputError(line_error(line_no, "header must name `date` and `close` columns"));
        }
        continue;
      }
    }

    if (fields.size() <= std::max(date_col, close_col)) {
      throw InputError(line_error(line_no, "malformed row (missing columns)"));
    }
    PriceObservation obs;
    if (!try_parse_date(fields[date_col], obs.date)) {
      throw InputError(line_error(line_no, "malformed date '" + std::string(fields[date_col]) + "'"));
    }
    if (!try_parse_double(fields[close_col], obs.close) || !std::isfinite(obs.close)) {
      throw InputError(line_error(line_no, "malformed close '" + std::string(fields[close_col]) + "'"));
    }
    if (obs.close <= 0.0) {
      throw InputError(line_error(line_no, "non-positive price"));
    }
    series.observations.push_back(obs);
  }

  auto& obs = series.observations;
  const auto by_date = [](const PriceObservation& a, const PriceObservation& b) {
    return sys_days{a.date} < sys_days{b.date};
  };
  if (!std::is_sorted(obs.begin(), obs.end(), by_date)) {
    std::stable_sort(obs.begin(), obs.end(), by_date);
    if (warnings != nullptr) warnings->push_back("rows were not in date order; sorted ascending");
  }
  for (std::size_t i = 1; i < obs.size(); ++i) {
    if (obs[i].date == obs[i - 1].date) {
      throw InputError("duplicate date " + format_iso_date(obs[i].date));
    }
  }
  return series;
}

PriceSeries load_prices(const std::filesystem::path& path, std::string label,
                        std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open price file " + path.string());
  return parse_prices(in, std::move(label), warnings);
}

PriceSeries downsample(const PriceSeries& daily, Frequency target) {
  if (daily.frequency != Frequency::Daily) {
    throw InputError("downsample requires a daily series, got " +
                     std::string(to_string(daily.frequency)));
  }
  if (target == Frequency::Daily) {
    throw InputError("downsample target must be weekly or monthly");
  }
  PriceSeries out;
  out.frequency = target;
  out.label = daily.label;

  const auto period_key = [target](Date date) -> long {
    if (target == Frequency::Weekly) return iso_week_monday(date).time_since_epoch().count();
    return month_index(date);
  };
  const auto& obs = daily.observations;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const bool last_in_period = (i + 1 == obs.size()) || period_key(obs[i + 1].date) != period_key(obs[i].date);
    if (last_in_period) out.observations.push_back(obs[i]);
  }
  return out;
}

ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.size() < 2) throw InputError("log_returns needs at least two prices");
  ReturnSeries out;
  out.frequency = prices.frequency;
  out.source_label = prices.label;
  out.values.reserve(prices.size() - 1);
  double prev = std::log(prices.observations.front().close);
  for (std::size_t i = 1; i < prices.size(); ++i) {
    const double curr = std::log(prices.observations[i].close);
    out.values.push_back(curr - prev);
    prev = curr;
  }
  return out;
}

void write_prices_csv(std::ostream& out, const PriceSeries& prices) {
  out << "date,close\n";
  char buffer[64];
  for (const auto& obs : prices.observations) {
    std::snprintf(buffer, sizeof buffer, "%.17g", obs.close);
    out << format_iso_date(obs.date) << ',' << buffer << '\n';
  }
}

void write_returns_csv(std::ostream& out, const ReturnSeries& returns) {
  out << "# label=" << returns.source_label << " frequency=" << to_string(returns.frequency) << '\n';
  out << "log_return\n";
  char buffer[64];
  for (double v : returns.values) {
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    out << buffer << '\n';
  }
}

ReturnSeries read_returns_csv(std::istream& in) {
  ReturnSeries out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream tokens{std::string(line.substr(1))};
      std::string token;
      while (tokens >> token) {
        if (token.rfind("label=", 0) == 0) out.source_label = token.substr(6);
        if (token.rfind("frequency=", 0) == 0) out.frequency = parse_frequency(token.substr(10));
      }
      continue;
    }
    double value = 0.0;
    if (!try_parse_double(line, value)) {
      if (out.values.empty() && lowercase(line) == "log_return") continue;
      throw InputError(line_error(line_no, "malformed return '" + std::string(line) + "'"));
    }
    if (!std::isfinite(value)) throw InputError(line_error(line_no, "non-finite return"));
    out.values.push_back(value);
  }
  return out;
}

}  // namespace lrd
