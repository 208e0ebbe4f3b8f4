#include "lrd/synth_eval.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lrd/hurst_dfa.hpp"
#include "lrd/hurst_rs.hpp"

namespace lrd {

namespace {

constexpr std::array<char, 4> kMagic = {'L', 'M', 'P', '1'};

std::string_view trim(std::string_view value) {
  const auto first = value.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = value.find_last_not_of(" \t\r\n");
  return value.substr(first, last - first + 1);
}

std::string coords(std::size_t row, std::size_t col) {
  return "path " + std::to_string(row) + ", column " + std::to_string(col);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw InputError("ensemble: truncated binary header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes.data(), 8);
}

bool binary_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return false;
  if (ext == ".bin" || ext == ".lmp") return true;
  throw InputError("ensemble file '" + path.string() + "': unknown extension (valid: .csv, .bin, .lmp)");
}

}  // namespace

void validate(const PathEnsemble& ensemble) {
  if (ensemble.paths.empty()) throw InputError("ensemble has no paths");
  const std::size_t length = ensemble.paths.front().size();
  if (length < kMinPathLength) {
    throw InputError("ensemble path length " + std::to_string(length) + " is below the minimum of " +
                     std::to_string(kMinPathLength));
  }
  for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
    const auto& path = ensemble.paths[i];
    if (path.size() != length) {
      throw InputError("ensemble path " + std::to_string(i) + " has length " + std::to_string(path.size()) +
                       ", expected " + std::to_string(length));
    }
    for (std::size_t j = 0; j < length; ++j) {
      if (!std::isfinite(path[j])) throw InputError("ensemble: non-finite value at " + coords(i, j));
    }
  }
}

PathEnsemble read_ensemble_csv(std::istream& in) {
  PathEnsemble ensemble;
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
        if (token.rfind("generator=", 0) == 0) ensemble.generator_label = token.substr(10);
        if (token.rfind("frequency=", 0) == 0) ensemble.frequency = parse_frequency(token.substr(10));
      }
      continue;
    }
    const std::size_t row = ensemble.paths.size();
    std::vector<double> path;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto end = line.find(',', start);
      if (end == std::string_view::npos) end = line.size();
      auto field = trim(line.substr(start, end - start));
      if (!field.empty() && field.front() == '+') field.remove_prefix(1);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw InputError("ensemble line " + std::to_string(line_no) + ": malformed value at " +
                         coords(row, path.size()));
      }
      if (!std::isfinite(value)) throw InputError("ensemble: non-finite value at " + coords(row, path.size()));
      path.push_back(value);
      start = end + 1;
    }
    if (!ensemble.paths.empty() && path.size() != ensemble.paths.front().size()) {
      throw InputError("ensemble line " + std::to_string(line_no) + ": path " + std::to_string(row) +
                       " has length " + std::to_string(path.size()) + ", expected " +
                       std::to_string(ensemble.paths.front().size()));
    }
    ensemble.paths.push_back(std::move(path));
  }
  validate(ensemble);
  return ensemble;
}

PathEnsemble read_ensemble_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw InputError("ensemble: missing LMP1 magic");
  const std::uint32_t count = get_u32(in);
  const std::uint32_t length = get_u32(in);
  PathEnsemble ensemble;
  ensemble.paths.resize(count);
  std::vector<unsigned char> row(static_cast<std::size_t>(length) * 8);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()))) {
      throw InputError("ensemble: binary payload truncated in path " + std::to_string(i));
    }
    auto& path = ensemble.paths[i];
    path.resize(length);
    for (std::uint32_t j = 0; j < length; ++j) {
      std::uint64_t bits = 0;
      for (int b = 7; b >= 0; --b) bits = (bits << 8) | row[static_cast<std::size_t>(j) * 8 + static_cast<std::size_t>(b)];
      path[j] = std::bit_cast<double>(bits);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw InputError("ensemble: trailing bytes after payload");
  validate(ensemble);
  return ensemble;
}

void write_ensemble_csv(std::ostream& out, const PathEnsemble& ensemble) {
  validate(ensemble);
  if (!ensemble.generator_label.empty() || ensemble.frequency) {
    out << '#';
    if (!ensemble.generator_label.empty()) out << " generator=" << ensemble.generator_label;
    if (ensemble.frequency) out << " frequency=" << to_string(*ensemble.frequency);
    out << '\n';
  }
  char buffer[64];
  for (const auto& path : ensemble.paths) {
    for (std::size_t j = 0; j < path.size(); ++j) {
      std::snprintf(buffer, sizeof buffer, "%.17g", path[j]);
      if (j) out << ',';
      out << buffer;
    }
    out << '\n';
  }
}

void write_ensemble_binary(std::ostream& out, const PathEnsemble& ensemble) {
  validate(ensemble);
  if (ensemble.size() > UINT32_MAX || ensemble.length() > UINT32_MAX) {
    throw InputError("ensemble too large for the binary format");
  }
  out.write(kMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(ensemble.size()));
  put_u32(out, static_cast<std::uint32_t>(ensemble.length()));
  for (const auto& path : ensemble.paths) {
    for (double v : path) put_f64(out, v);
  }
}

PathEnsemble load_ensemble(const std::filesystem::path& path) {
  const bool binary = binary_extension(path);
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw InputError("cannot open ensemble file '" + path.string() + "'");
  return binary ? read_ensemble_binary(in) : read_ensemble_csv(in);
}

void save_ensemble(const std::filesystem::path& path, const PathEnsemble& ensemble) {
  const bool binary = binary_extension(path);
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw InputError("cannot write ensemble file '" + path.string() + "'");
  if (binary) {
    write_ensemble_binary(out, ensemble);
  } else {
    write_ensemble_csv(out, ensemble);
  }
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

std::vector<double> log_price_path(std::span<const double> returns) {
  std::vector<double> path(returns.size() + 1, 0.0);
  for (std::size_t t = 0; t < returns.size(); ++t) path[t + 1] = path[t] + returns[t];
  return path;
}

ReturnSeries path_returns(std::span<const double> log_path, Frequency frequency, std::string label) {
  if (log_path.size() < 2) throw InputError("path needs at least 2 log-prices");
  ReturnSeries out;
  out.frequency = frequency;
  out.source_label = std::move(label);
  out.values.reserve(log_path.size() - 1);
  for (std::size_t t = 1; t < log_path.size(); ++t) out.values.push_back(log_path[t] - log_path[t - 1]);
  return out;
}

std::vector<double> anchored_prices(std::span<const double> log_path, double p0) {
  std::vector<double> prices(log_path.size());
  for (std::size_t t = 0; t < log_path.size(); ++t) prices[t] = p0 * std::exp(log_path[t] - log_path[0]);
  return prices;
}

NearestPath select_nearest(const PathEnsemble& ensemble, const PriceSeries& empirical) {
  validate(ensemble);
  if (ensemble.length() != empirical.size()) {
    throw InputError("ensemble path length " + std::to_string(ensemble.length()) +
                     " does not match the empirical series length " + std::to_string(empirical.size()));
  }
  const auto real = empirical.closes();
  NearestPath best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto fake = anchored_prices(ensemble.paths[i], real.front());
    double sum = 0.0;
    for (std::size_t j = 0; j < real.size(); ++j) {
      const double diff = real[j] - fake[j];
      sum += diff * diff;
    }
    const double distance = std::sqrt(sum);
    if (distance < best.distance) best = {i, distance};
  }
  if (!std::isfinite(best.distance)) throw NumericalError("select_nearest: every distance is non-finite");
  return best;
}

TailMass tail_mass(std::span<const double> real, std::span<const double> synthetic) {
  if (real.empty() || synthetic.empty()) throw InputError("tail mass of an empty sample");
  TailMass out;
  out.lower_threshold = percentile(real, 0.01);
  out.upper_threshold = percentile(real, 0.99);
  auto share = [](std::span<const double> v, auto pred) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), pred)) / static_cast<double>(v.size());
  };
  const double lo = out.lower_threshold;
  const double hi = out.upper_threshold;
  out.real_lower = share(real, [lo](double r) { return r < lo; });
  out.real_upper = share(real, [hi](double r) { return r > hi; });
  out.synthetic_lower = share(synthetic, [lo](double r) { return r < lo; });
  out.synthetic_upper = share(synthetic, [hi](double r) { return r > hi; });
  return out;
}

EnsembleHurstSummary ensemble_dfa_summary(const PathEnsemble& ensemble, std::size_t max_paths) {
  validate(ensemble);
  EnsembleHurstSummary summary;
  summary.paths_requested = std::min(max_paths, ensemble.size());
  std::vector<double> hs;
  for (std::size_t k = 0; k < summary.paths_requested; ++k) {
    const std::size_t index = k * ensemble.size() / summary.paths_requested;
    const auto returns = path_returns(ensemble.paths[index], Frequency::Daily, "");
    try {
      hs.push_back(dfa_analysis(returns).estimate.h);
    } catch (const std::runtime_error&) {
      // Degenerate paths are left out of the summary.
    }
  }
  summary.paths_used = hs.size();
  if (hs.empty()) throw NumericalError("ensemble DFA summary: no path produced an estimate");
  double sum = 0.0;
  for (double h : hs) sum += h;
  summary.mean = sum / static_cast<double>(hs.size());
  summary.q05 = percentile(hs, 0.05);
  summary.q25 = percentile(hs, 0.25);
  summary.median = percentile(hs, 0.5);
  summary.q75 = percentile(hs, 0.75);
  summary.q95 = percentile(hs, 0.95);
  return summary;
}

namespace {

template <typename T, typename F>
void run_section(Section<T>& section, F&& body) {
  try {
    section.value = body();
  } catch (const InputError& e) {
    section.error = std::string("input error: ") + e.what();
  } catch (const NumericalError& e) {
    section.error = std::string("numerical error: ") + e.what();
  }
}

}  // namespace

EvaluationReport evaluate(const PathEnsemble& ensemble, const PriceSeries& empirical, const EvaluateOptions& options) {
  if (ensemble.frequency && *ensemble.frequency != empirical.frequency) {
    throw InputError("ensemble frequency '" + std::string(to_string(*ensemble.frequency)) +
                     "' does not match the empirical frequency '" + std::string(to_string(empirical.frequency)) + "'");
  }
  const NearestPath nearest = select_nearest(ensemble, empirical);

  EvaluationReport report;
  report.generator_label = ensemble.generator_label;
  report.frequency = empirical.frequency;
  report.ensemble_size = ensemble.size();
  report.path_length = ensemble.length();
  report.selected_index = nearest.index;
  report.euclidean_distance = nearest.distance;

  const ReturnSeries real = log_returns(empirical);
  const std::string label = ensemble.generator_label.empty() ? "synthetic" : ensemble.generator_label;
  const ReturnSeries synthetic = path_returns(ensemble.paths[nearest.index], empirical.frequency,
                                              label + "#" + std::to_string(nearest.index));

  run_section(report.real_moments, [&] { return moments(real); });
  run_section(report.synthetic_moments, [&] { return moments(synthetic); });
  run_section(report.tails, [&] { return tail_mass(real.values, synthetic.values); });
  run_section(report.rs, [&] { return rs_analysis(synthetic); });
  run_section(report.dfa, [&] { return dfa_analysis(synthetic); });
  if (options.run_fit) {
    run_section(report.arfima_figarch, [&] { return fit(synthetic, options.fit); });
  } else {
    report.arfima_figarch.error = "skipped";
  }
  if (options.supplementary_paths > 0) {
    run_section(report.supplementary, [&] { return ensemble_dfa_summary(ensemble, options.supplementary_paths); });
  } else {
    report.supplementary.error = "skipped";
  }
  return report;
}

}  // namespace lrd
