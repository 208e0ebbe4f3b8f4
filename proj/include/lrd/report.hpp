#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrd/arfima_figarch.hpp"
#include "lrd/diagnostics.hpp"
#include "lrd/scalefit.hpp"
#include "lrd/synth_eval.hpp"

namespace lrd::report {

using Json = nlohmann::json;

/// Non-finite numbers serialize as null.
Json number(double value);

Json to_json(const MomentReport& m);
Json to_json(const HurstEstimate& e);
Json to_json(const HurstAnalysis& a);
Json to_json(const ArfimaFigarchParams& p);
Json to_json(const FitResult& f);
Json to_json(const TailMass& t);
Json to_json(const EnsembleHurstSummary& s);
Json to_json(const EvaluationReport& r);

/// Reads any subset of the parameter names; missing fields keep `base`.
ArfimaFigarchParams params_from_json(const Json& j, ArfimaFigarchParams base = {});

/// Two-space indented dump followed by a newline.
std::string dump(const Json& j);

// Table rows: an optional header line, then one row.
void write_moments_row(std::ostream& out, const std::string& label, Frequency f, const MomentReport& m, bool header);
void write_hurst_row(std::ostream& out, const std::string& label, Frequency f, const HurstAnalysis& a, bool header);
void write_fit_row(std::ostream& out, const std::string& label, Frequency f, const FitResult& r, bool header);

// Plot data.
void write_loglog_csv(std::ostream& out, const ScaleFit& fit);
void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins);
void write_qq_csv(std::ostream& out, std::span<const QQPoint> points);
/// Long format: path,t,price. The empirical series is written as path -1.
void write_overlay_csv(std::ostream& out, std::span<const double> empirical_prices,
                       const std::vector<std::vector<double>>& synthetic_prices, std::span<const std::size_t> indices);

}  // namespace lrd::report
