#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrd/arfima_figarch.hpp"
#include "lrd/common.hpp"
#include "lrd/diagnostics.hpp"
#include "lrd/ingest.hpp"
#include "lrd/scalefit.hpp"

namespace lrd {

inline constexpr std::size_t kMinPathLength = 16;

/// Synthetic log-price trajectories (ln P_t), all of the same length.
struct PathEnsemble {
  std::vector<std::vector<double>> paths;
  std::optional<Frequency> frequency;
  std::string generator_label;

  std::size_t size() const { return paths.size(); }
  std::size_t length() const { return paths.empty() ? 0 : paths.front().size(); }
};

/// Throws InputError for an empty ensemble, ragged rows, paths shorter than
/// kMinPathLength, or a non-finite entry (row and column reported, 0-based).
void validate(const PathEnsemble& ensemble);

/// CSV: optional `# generator=<label> frequency=<f>` line, then one path per
/// row. Binary: "LMP1", u32 path count, u32 length (little endian), then
/// row-major float64. load/save pick the format from the extension: .csv is
/// text, .bin and .lmp are binary.
PathEnsemble read_ensemble_csv(std::istream& in);
PathEnsemble read_ensemble_binary(std::istream& in);
void write_ensemble_csv(std::ostream& out, const PathEnsemble& ensemble);
void write_ensemble_binary(std::ostream& out, const PathEnsemble& ensemble);
PathEnsemble load_ensemble(const std::filesystem::path& path);
void save_ensemble(const std::filesystem::path& path, const PathEnsemble& ensemble);

/// Cumulative sum of returns starting at 0 (length returns.size() + 1).
std::vector<double> log_price_path(std::span<const double> returns);

/// Differences of consecutive log-prices.
ReturnSeries path_returns(std::span<const double> log_path, Frequency frequency, std::string label);

/// P0 * exp(lnP_t - lnP_0).
std::vector<double> anchored_prices(std::span<const double> log_path, double p0);

struct NearestPath {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Euclidean distance between anchored synthetic prices and the empirical
/// closes; ties go to the lowest index.
NearestPath select_nearest(const PathEnsemble& ensemble, const PriceSeries& empirical);

/// Share of returns below the empirical 1st and above the empirical 99th
/// percentile, for the real and the synthetic series.
struct TailMass {
  double lower_threshold = 0.0;
  double upper_threshold = 0.0;
  double real_lower = 0.0;
  double real_upper = 0.0;
  double synthetic_lower = 0.0;
  double synthetic_upper = 0.0;
};

TailMass tail_mass(std::span<const double> real, std::span<const double> synthetic);

/// Per-path DFA H over an evenly spaced subsample of the ensemble.
struct EnsembleHurstSummary {
  std::size_t paths_requested = 0;
  std::size_t paths_used = 0;
  double mean = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

EnsembleHurstSummary ensemble_dfa_summary(const PathEnsemble& ensemble, std::size_t max_paths);

/// One report section: a value, or the error that stopped it.
template <typename T>
struct Section {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

struct EvaluationReport {
  std::string generator_label;
  Frequency frequency = Frequency::Daily;
  std::size_t ensemble_size = 0;
  std::size_t path_length = 0;
  std::size_t selected_index = 0;
  double euclidean_distance = 0.0;
  Section<MomentReport> real_moments;
  Section<MomentReport> synthetic_moments;
  Section<TailMass> tails;
  Section<HurstAnalysis> rs;
  Section<HurstAnalysis> dfa;
  Section<FitResult> arfima_figarch;
  Section<EnsembleHurstSummary> supplementary;
};

struct EvaluateOptions {
  FitOptions fit;
  bool run_fit = true;
  std::size_t supplementary_paths = 200;  // 0 disables
};

/// Selects the nearest path and runs the full battery on its returns. Errors
/// inside a section are recorded there; only incompatible inputs throw.
EvaluationReport evaluate(const PathEnsemble& ensemble, const PriceSeries& empirical,
                          const EvaluateOptions& options = {});

}  // namespace lrd
