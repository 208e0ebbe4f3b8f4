#include "lrd/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace lrd::report {

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.10g", v);
  return buffer;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

Json interval(const std::optional<Interval>& ci) {
  if (!ci) return nullptr;
  return Json::array({number(ci->low), number(ci->high)});
}

template <typename T>
Json section(const Section<T>& s) {
  if (s.value) return to_json(*s.value);
  return Json{{"error", s.error}};
}

}  // namespace

Json number(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }

Json to_json(const MomentReport& m) {
  return Json{{"n", m.n},
              {"mean", number(m.mean)},
              {"std", number(m.stddev)},
              {"skewness", number(m.skewness)},
              {"excess_kurtosis", number(m.excess_kurtosis)},
              {"z_skew", number(m.z_skew)},
              {"z_kurt", number(m.z_kurt)},
              {"k2", number(m.k2)},
              {"p_skew", number(m.p_skew)},
              {"p_kurt", number(m.p_kurt)},
              {"p_omnibus", number(m.p_omnibus)}};
}

Json to_json(const HurstEstimate& e) {
  return Json{{"method", std::string(to_string(e.method))},
              {"h", number(e.h)},
              {"ci_low", number(e.ci_low)},
              {"ci_high", number(e.ci_high)},
              {"p_value", number(e.p_value)},
              {"r_squared", number(e.r_squared)}};
}

Json to_json(const HurstAnalysis& a) {
  Json j = to_json(a.estimate);
  j["slope_se"] = number(a.fit.slope_se);
  j["intercept"] = number(a.fit.intercept);
  j["dof"] = a.fit.dof;
  Json scales = Json::array();
  for (const auto& s : a.scales) {
    scales.push_back(Json{{"scale", s.scale},
                          {"blocks", s.blocks},
                          {"used_blocks", s.used_blocks},
                          {"statistic", number(s.statistic)}});
  }
  j["scales"] = std::move(scales);
  Json points = Json::array();
  for (const auto& p : a.fit.points) points.push_back(Json{{"ln_n", number(p.ln_n)}, {"ln_stat", number(p.ln_stat)}});
  j["points"] = std::move(points);
  j["warnings"] = a.warnings;
  return j;
}

Json to_json(const ArfimaFigarchParams& p) {
  const auto v = to_vector(p);
  Json j = Json::object();
  for (std::size_t i = 0; i < kParamCount; ++i) j[std::string(kParamNames[i])] = number(v[i]);
  return j;
}

Json to_json(const FitResult& f) {
  Json se = Json::object();
  for (std::size_t i = 0; i < kParamCount; ++i) se[std::string(kParamNames[i])] = optional_number(f.se[i]);
  Json trace = Json::array();
  for (double v : f.objective_trace) trace.push_back(number(v));
  return Json{{"params", to_json(f.params)},
              {"log_likelihood", number(f.log_likelihood)},
              {"se", std::move(se)},
              {"p_dm", optional_number(f.p_dm)},
              {"p_dv", optional_number(f.p_dv)},
              {"ci_dm", interval(f.ci_dm)},
              {"ci_dv", interval(f.ci_dv)},
              {"h_mean", number(hurst_from_d(f.params.d_m))},
              {"h_volatility", number(hurst_from_d(f.params.d_v))},
              {"dm_at_boundary", f.dm_at_boundary},
              {"dv_at_boundary", f.dv_at_boundary},
              {"hessian_ok", f.hessian_ok},
              {"converged", f.converged},
              {"iterations", f.iterations},
              {"evaluations", f.evaluations},
              {"gradient_norm", number(f.gradient_norm)},
              {"objective_trace", std::move(trace)},
              {"warnings", f.warnings}};
}

Json to_json(const TailMass& t) {
  return Json{{"lower_threshold", number(t.lower_threshold)}, {"upper_threshold", number(t.upper_threshold)},
              {"real_lower", number(t.real_lower)},           {"real_upper", number(t.real_upper)},
              {"synthetic_lower", number(t.synthetic_lower)}, {"synthetic_upper", number(t.synthetic_upper)}};
}

Json to_json(const EnsembleHurstSummary& s) {
  return Json{{"method", "dfa"},
              {"paths_requested", s.paths_requested},
              {"paths_used", s.paths_used},
              {"mean", number(s.mean)},
              {"q05", number(s.q05)},
              {"q25", number(s.q25)},
              {"median", number(s.median)},
              {"q75", number(s.q75)},
              {"q95", number(s.q95)}};
}

Json to_json(const EvaluationReport& r) {
  return Json{{"generator", r.generator_label},
              {"frequency", std::string(to_string(r.frequency))},
              {"ensemble_size", r.ensemble_size},
              {"path_length", r.path_length},
              {"selected_index", r.selected_index},
              {"euclidean_distance", number(r.euclidean_distance)},
              {"distribution",
               Json{{"real", section(r.real_moments)},
                    {"synthetic", section(r.synthetic_moments)},
                    {"tail_mass", section(r.tails)}}},
              {"rs", section(r.rs)},
              {"dfa", section(r.dfa)},
              {"arfima_figarch", section(r.arfima_figarch)},
              {"supplementary", section(r.supplementary)}};
}

ArfimaFigarchParams params_from_json(const Json& j, ArfimaFigarchParams base) {
  if (!j.is_object()) throw InputError("parameter JSON must be an object");
  auto v = to_vector(base);
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::size_t i = 0;
    while (i < kParamCount && kParamNames[i] != it.key()) ++i;
    if (i == kParamCount) throw InputError("unknown parameter '" + it.key() + "'");
    if (!it.value().is_number()) throw InputError("parameter '" + it.key() + "' must be a number");
    v[i] = it.value().get<double>();
  }
  return from_vector(v);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_moments_row(std::ostream& out, const std::string& label, Frequency f, const MomentReport& m, bool header) {
  if (header) out << "index,frequency,n,mean,std,skewness,excess_kurtosis,z_skew,p_skew,z_kurt,p_kurt,k2,p_omnibus\n";
  out << label << ',' << to_string(f) << ',' << m.n << ',' << fmt(m.mean) << ',' << fmt(m.stddev) << ','
      << fmt(m.skewness) << ',' << fmt(m.excess_kurtosis) << ',' << fmt(m.z_skew) << ',' << fmt(m.p_skew) << ','
      << fmt(m.z_kurt) << ',' << fmt(m.p_kurt) << ',' << fmt(m.k2) << ',' << fmt(m.p_omnibus) << '\n';
}

void write_hurst_row(std::ostream& out, const std::string& label, Frequency f, const HurstAnalysis& a, bool header) {
  if (header) out << "index,frequency,method,h,ci_low,ci_high,p_value,r_squared,scales\n";
  const auto& e = a.estimate;
  out << label << ',' << to_string(f) << ',' << to_string(e.method) << ',' << fmt(e.h) << ',' << fmt(e.ci_low) << ','
      << fmt(e.ci_high) << ',' << fmt(e.p_value) << ',' << fmt(e.r_squared) << ',' << a.scales.size() << '\n';
}

void write_fit_row(std::ostream& out, const std::string& label, Frequency f, const FitResult& r, bool header) {
  if (header) {
    out << "index,frequency,d_m,se_dm,ci_dm_low,ci_dm_high,p_dm,d_v,se_dv,ci_dv_low,ci_dv_high,p_dv,"
           "log_likelihood,converged\n";
  }
  auto lo = [](const std::optional<Interval>& ci) { return ci ? fmt(ci->low) : std::string(); };
  auto hi = [](const std::optional<Interval>& ci) { return ci ? fmt(ci->high) : std::string(); };
  out << label << ',' << to_string(f) << ',' << fmt(r.params.d_m) << ',' << fmt(r.se[3]) << ',' << lo(r.ci_dm) << ','
      << hi(r.ci_dm) << ',' << fmt(r.p_dm) << ',' << fmt(r.params.d_v) << ',' << fmt(r.se[7]) << ','
      << lo(r.ci_dv) << ',' << hi(r.ci_dv) << ',' << fmt(r.p_dv) << ',' << fmt(r.log_likelihood) << ','
      << (r.converged ? "true" : "false") << '\n';
}

void write_loglog_csv(std::ostream& out, const ScaleFit& fit) {
  out << "ln_n,ln_stat,fitted\n";
  for (const auto& p : fit.points) out << fmt(p.ln_n) << ',' << fmt(p.ln_stat) << ',' << fmt(fit.fitted(p.ln_n)) << '\n';
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "lower,upper,count,density,normal_density\n";
  for (const auto& b : bins) {
    out << fmt(b.lower) << ',' << fmt(b.upper) << ',' << b.count << ',' << fmt(b.density) << ','
        << fmt(b.normal_density) << '\n';
  }
}

void write_qq_csv(std::ostream& out, std::span<const QQPoint> points) {
  out << "theoretical,sample,reference\n";
  for (const auto& p : points) out << fmt(p.theoretical) << ',' << fmt(p.sample) << ',' << fmt(p.reference) << '\n';
}

void write_overlay_csv(std::ostream& out, std::span<const double> empirical_prices,
                       const std::vector<std::vector<double>>& synthetic_prices, std::span<const std::size_t> indices) {
  out << "path,t,price\n";
  for (std::size_t t = 0; t < empirical_prices.size(); ++t) out << "-1," << t << ',' << fmt(empirical_prices[t]) << '\n';
  for (std::size_t k = 0; k < synthetic_prices.size(); ++k) {
    const auto& path = synthetic_prices[k];
    for (std::size_t t = 0; t < path.size(); ++t) out << indices[k] << ',' << t << ',' << fmt(path[t]) << '\n';
  }
}

}  // namespace lrd::report
