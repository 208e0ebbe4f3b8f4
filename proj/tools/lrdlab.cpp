#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrd/arfima_figarch.hpp"
#include "lrd/common.hpp"
#include "lrd/diagnostics.hpp"
#include "lrd/hurst_dfa.hpp"
#include "lrd/hurst_rs.hpp"
#include "lrd/ingest.hpp"
#include "lrd/report.hpp"
#include "lrd/synth_eval.hpp"

namespace fs = std::filesystem;
using lrd::report::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

struct Shared {
  std::string data;
  std::string returns;
  std::string frequency = "daily";
  std::string label;
  std::string out_dir = ".";
  std::string format = "json";
  std::size_t truncation_lag = lrd::kDefaultTruncationLag;
  std::uint64_t seed = 1;
};

struct Inputs {
  std::optional<lrd::PriceSeries> prices;  // at the requested frequency
  lrd::ReturnSeries returns;
  std::string label;
  std::vector<std::string> warnings;
};

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

std::string stem_label(const std::string& path) { return fs::path(path).stem().string(); }

Inputs load_inputs(const Shared& s, bool need_prices = false) {
  const auto frequency = lrd::parse_frequency(s.frequency);
  Inputs in;
  if (!s.returns.empty()) {
    if (need_prices) throw lrd::InputError("this command needs --data (a price CSV), not --returns");
    std::ifstream file(s.returns);
    if (!file) throw lrd::InputError("cannot open returns file '" + s.returns + "'");
    in.returns = lrd::read_returns_csv(file);
    if (in.returns.values.empty()) throw lrd::InputError("returns file '" + s.returns + "' has no values");
    in.label = s.label.empty() ? (in.returns.source_label.empty() ? stem_label(s.returns) : in.returns.source_label)
                               : s.label;
    in.returns.source_label = in.label;
    return in;
  }
  if (s.data.empty()) throw lrd::InputError("missing input: pass --data <prices.csv> or --returns <returns.csv>");
  in.label = s.label.empty() ? stem_label(s.data) : s.label;
  auto prices = lrd::load_prices(s.data, in.label, &in.warnings);
  if (frequency != lrd::Frequency::Daily) prices = lrd::downsample(prices, frequency);
  lrd::validate(prices);
  in.returns = lrd::log_returns(prices);
  in.prices = std::move(prices);
  return in;
}

std::string prefix(const Inputs& in) { return in.label + "_" + std::string(lrd::to_string(in.returns.frequency)); }

fs::path out_path(const Shared& s, const std::string& name) {
  fs::create_directories(s.out_dir);
  return fs::path(s.out_dir) / name;
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw lrd::InputError("cannot write '" + path.string() + "'");
  writer(out);
  if (!out) throw lrd::InputError("write failed for '" + path.string() + "'");
  std::cout << path.string() << '\n';
}

void write_json(const fs::path& path, const Json& j) {
  write_file(path, [&](std::ostream& out) { out << lrd::report::dump(j); });
}

Json header(const Inputs& in) {
  Json j{{"index", in.label},
         {"frequency", std::string(lrd::to_string(in.returns.frequency))},
         {"n_returns", in.returns.size()}};
  if (in.prices) j["n_prices"] = in.prices->size();
  j["warnings"] = in.warnings;
  return j;
}

void write_plot_data(const Shared& s, const Inputs& in, const std::string& tag, const lrd::HurstAnalysis& a) {
  write_file(out_path(s, "loglog_" + tag + "_" + prefix(in) + ".csv"),
             [&](std::ostream& out) { lrd::report::write_loglog_csv(out, a.fit); });
}

void write_distribution_plots(const Shared& s, const Inputs& in, std::size_t bins) {
  const auto hist = lrd::histogram(in.returns.values, bins);
  write_file(out_path(s, "histogram_" + prefix(in) + ".csv"),
             [&](std::ostream& out) { lrd::report::write_histogram_csv(out, hist); });
  const auto qq = lrd::normal_qq(in.returns.values);
  write_file(out_path(s, "qq_" + prefix(in) + ".csv"), [&](std::ostream& out) { lrd::report::write_qq_csv(out, qq); });
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Shared& s) {
  const auto in = load_inputs(s, true);
  warn(in.warnings);
  write_file(out_path(s, prefix(in) + "_prices.csv"),
             [&](std::ostream& out) { lrd::write_prices_csv(out, *in.prices); });
  write_file(out_path(s, prefix(in) + "_returns.csv"),
             [&](std::ostream& out) { lrd::write_returns_csv(out, in.returns); });
  return kExitOk;
}

int cmd_diagnose(const Shared& s, std::size_t bins) {
  const auto in = load_inputs(s);
  warn(in.warnings);
  const auto m = lrd::moments(in.returns);
  if (s.format == "json") {
    Json j = header(in);
    j["moments"] = lrd::report::to_json(m);
    write_json(out_path(s, "diagnostics_" + prefix(in) + ".json"), j);
  } else {
    write_file(out_path(s, "diagnostics_" + prefix(in) + ".csv"), [&](std::ostream& out) {
      lrd::report::write_moments_row(out, in.label, in.returns.frequency, m, true);
    });
  }
  write_distribution_plots(s, in, bins);
  return kExitOk;
}

int cmd_hurst(const Shared& s, const std::string& method_text) {
  const auto method = lrd::parse_hurst_method(method_text);
  const auto in = load_inputs(s);
  warn(in.warnings);
  const auto analysis = method == lrd::HurstMethod::RS ? lrd::rs_analysis(in.returns) : lrd::dfa_analysis(in.returns);
  warn(analysis.warnings);
  const std::string tag(lrd::to_string(method));
  if (s.format == "json") {
    Json j = header(in);
    j["hurst"] = lrd::report::to_json(analysis);
    write_json(out_path(s, "hurst_" + tag + "_" + prefix(in) + ".json"), j);
  } else {
    write_file(out_path(s, "hurst_" + tag + "_" + prefix(in) + ".csv"), [&](std::ostream& out) {
      lrd::report::write_hurst_row(out, in.label, in.returns.frequency, analysis, true);
    });
  }
  write_plot_data(s, in, tag, analysis);
  return kExitOk;
}

lrd::FitOptions fit_options(const Shared& s) {
  lrd::FitOptions o;
  o.truncation_lag = s.truncation_lag;
  return o;
}

int cmd_fit(const Shared& s) {
  const auto in = load_inputs(s);
  warn(in.warnings);
  const auto result = lrd::fit(in.returns, fit_options(s));
  warn(result.warnings);
  if (s.format == "json") {
    Json j = header(in);
    j["truncation_lag"] = s.truncation_lag;
    j["fit"] = lrd::report::to_json(result);
    write_json(out_path(s, "fit_" + prefix(in) + ".json"), j);
  } else {
    write_file(out_path(s, "fit_" + prefix(in) + ".csv"), [&](std::ostream& out) {
      lrd::report::write_fit_row(out, in.label, in.returns.frequency, result, true);
    });
  }
  return result.converged ? kExitOk : kExitNumerical;
}

struct SimulateArgs {
  std::string params_file;
  lrd::ArfimaFigarchParams params{0.0, 0.0, 0.0, 0.0, 1e-6, 0.2, 0.5, 0.4, 6.0};
  std::size_t n = 8000;
  std::optional<std::size_t> burn_in;
  std::size_t paths = 1;
  std::string ensemble_out;
  double start_price = 100.0;
  bool write_prices = false;
};

std::vector<lrd::PriceObservation> weekday_prices(std::span<const double> log_path, double p0) {
  // Consecutive weekdays from 2000-01-03; the calendar only matters to the price-file format.
  using namespace std::chrono;
  std::vector<lrd::PriceObservation> out;
  sys_days day{year{2000} / January / 3};
  const auto prices = lrd::anchored_prices(log_path, p0);
  for (double p : prices) {
    while (weekday{day}.iso_encoding() > 5) day += days{1};
    out.push_back({lrd::Date{day}, p});
    day += days{1};
  }
  return out;
}

int cmd_simulate(const Shared& s, SimulateArgs a, const std::vector<std::string>& overrides) {
  if (!a.params_file.empty()) {
    std::ifstream file(a.params_file);
    if (!file) throw lrd::InputError("cannot open parameter file '" + a.params_file + "'");
    Json j;
    try {
      file >> j;
    } catch (const Json::parse_error& e) {
      throw lrd::InputError("parameter file '" + a.params_file + "': " + e.what());
    }
    if (j.contains("params")) j = j["params"];
    a.params = lrd::report::params_from_json(j, a.params);
  }
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw lrd::InputError("--set expects name=value, got '" + item + "'");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw lrd::InputError("--set " + item + ": value is not a number");
    }
    a.params = lrd::report::params_from_json(Json{{item.substr(0, eq), value}}, a.params);
  }
  const auto frequency = lrd::parse_frequency(s.frequency);
  const std::size_t burn_in = a.burn_in.value_or(std::max<std::size_t>(2 * s.truncation_lag, 1));
  if (a.paths > 1 && a.ensemble_out.empty()) throw lrd::InputError("--paths > 1 requires --ensemble-out");
  const std::string label = s.label.empty() ? "simulated" : s.label;

  const auto series = lrd::simulate(a.params, a.n, burn_in, s.seed, s.truncation_lag, frequency);
  auto returns = series;
  returns.source_label = label;
  write_file(out_path(s, label + "_returns.csv"), [&](std::ostream& out) { lrd::write_returns_csv(out, returns); });
  if (a.write_prices) {
    lrd::PriceSeries prices;
    prices.label = label;
    prices.frequency = lrd::Frequency::Daily;
    prices.observations = weekday_prices(lrd::log_price_path(returns.values), a.start_price);
    write_file(out_path(s, label + "_prices.csv"), [&](std::ostream& out) { lrd::write_prices_csv(out, prices); });
  }

  Json sidecar{{"label", label},
               {"frequency", std::string(lrd::to_string(frequency))},
               {"params", lrd::report::to_json(a.params)},
               {"seed", s.seed},
               {"n", a.n},
               {"burn_in", burn_in},
               {"truncation_lag", s.truncation_lag}};
  if (!a.ensemble_out.empty()) {
    lrd::PathEnsemble ensemble;
    ensemble.generator_label = "arfima-figarch";
    ensemble.frequency = frequency;
    for (std::size_t k = 0; k < a.paths; ++k) {
      const auto path = k == 0 ? series : lrd::simulate(a.params, a.n, burn_in, s.seed + k, s.truncation_lag, frequency);
      ensemble.paths.push_back(lrd::log_price_path(path.values));
    }
    lrd::save_ensemble(a.ensemble_out, ensemble);
    std::cout << a.ensemble_out << '\n';
    sidecar["ensemble"] = Json{{"file", a.ensemble_out}, {"paths", a.paths}, {"path_seeds", "seed + path index"}};
  }
  write_json(out_path(s, label + "_returns.json"), sidecar);
  return kExitOk;
}

struct EvaluateArgs {
  std::string ensemble;
  bool no_fit = false;
  std::size_t supplementary_paths = 200;
  std::size_t overlay_paths = 50;
};

int cmd_evaluate(const Shared& s, const EvaluateArgs& a) {
  const auto in = load_inputs(s, true);
  warn(in.warnings);
  const auto ensemble = lrd::load_ensemble(a.ensemble);
  lrd::EvaluateOptions options;
  options.fit = fit_options(s);
  options.run_fit = !a.no_fit;
  options.supplementary_paths = a.supplementary_paths;
  const auto report = lrd::evaluate(ensemble, *in.prices, options);

  const std::string name = "evaluation_" + prefix(in);
  if (s.format == "json") {
    Json j = header(in);
    j["ensemble_file"] = fs::path(a.ensemble).filename().string();
    j["evaluation"] = lrd::report::to_json(report);
    write_json(out_path(s, name + ".json"), j);
  } else {
    write_file(out_path(s, name + ".csv"), [&](std::ostream& out) {
      const std::string label = ensemble.generator_label.empty() ? "synthetic" : ensemble.generator_label;
      if (report.rs.value) lrd::report::write_hurst_row(out, label, in.returns.frequency, *report.rs.value, true);
      if (report.dfa.value) lrd::report::write_hurst_row(out, label, in.returns.frequency, *report.dfa.value, !report.rs.value);
    });
    if (report.arfima_figarch.value) {
      write_file(out_path(s, name + "_fit.csv"), [&](std::ostream& out) {
        lrd::report::write_fit_row(out, "synthetic", in.returns.frequency, *report.arfima_figarch.value, true);
      });
    }
  }

  // Overlay: the empirical series, the selected path, and evenly spaced others.
  const auto real = in.prices->closes();
  std::vector<std::size_t> indices{report.selected_index};
  const std::size_t extra = std::min(a.overlay_paths, ensemble.size());
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t idx = k * ensemble.size() / extra;
    if (idx != report.selected_index) indices.push_back(idx);
  }
  std::vector<std::vector<double>> synthetic;
  for (auto idx : indices) synthetic.push_back(lrd::anchored_prices(ensemble.paths[idx], real.front()));
  write_file(out_path(s, "overlay_" + prefix(in) + ".csv"),
             [&](std::ostream& out) { lrd::report::write_overlay_csv(out, real, synthetic, indices); });

  for (const auto* err : {&report.rs.error, &report.dfa.error, &report.arfima_figarch.error}) {
    if (err->rfind("numerical error", 0) == 0) return kExitNumerical;
  }
  if (report.arfima_figarch.value && !report.arfima_figarch.value->converged) return kExitNumerical;
  return kExitOk;
}

int cmd_report_all(const Shared& s, std::size_t bins) {
  const auto in = load_inputs(s);
  warn(in.warnings);
  Json j = header(in);
  j["truncation_lag"] = s.truncation_lag;
  int status = kExitOk;
  auto fail_section = [&](const char* key, const std::exception& e, bool numerical) {
    j[key] = Json{{"error", std::string(numerical ? "numerical error: " : "input error: ") + e.what()}};
    std::cerr << key << ": " << e.what() << '\n';
    status = std::max(status, numerical ? kExitNumerical : kExitInput);
  };
  std::optional<lrd::MomentReport> m;
  std::optional<lrd::HurstAnalysis> rs;
  std::optional<lrd::HurstAnalysis> dfa;
  std::optional<lrd::FitResult> fit;
  auto guarded = [&](const char* key, auto&& body) {
    try {
      body();
    } catch (const lrd::NumericalError& e) {
      fail_section(key, e, true);
    } catch (const lrd::InputError& e) {
      fail_section(key, e, false);
    }
  };
  guarded("moments", [&] {
    m = lrd::moments(in.returns);
    j["moments"] = lrd::report::to_json(*m);
  });
  guarded("rs", [&] {
    rs = lrd::rs_analysis(in.returns);
    warn(rs->warnings);
    j["rs"] = lrd::report::to_json(*rs);
  });
  guarded("dfa", [&] {
    dfa = lrd::dfa_analysis(in.returns);
    warn(dfa->warnings);
    j["dfa"] = lrd::report::to_json(*dfa);
  });
  guarded("arfima_figarch", [&] {
    fit = lrd::fit(in.returns, fit_options(s));
    warn(fit->warnings);
    j["arfima_figarch"] = lrd::report::to_json(*fit);
    if (!fit->converged) status = std::max(status, kExitNumerical);
  });

  if (s.format == "json") {
    write_json(out_path(s, "report_" + prefix(in) + ".json"), j);
  } else {
    const auto f = in.returns.frequency;
    if (m) write_file(out_path(s, "report_moments_" + prefix(in) + ".csv"), [&](std::ostream& o) { lrd::report::write_moments_row(o, in.label, f, *m, true); });
    if (rs) write_file(out_path(s, "report_rs_" + prefix(in) + ".csv"), [&](std::ostream& o) { lrd::report::write_hurst_row(o, in.label, f, *rs, true); });
    if (dfa) write_file(out_path(s, "report_dfa_" + prefix(in) + ".csv"), [&](std::ostream& o) { lrd::report::write_hurst_row(o, in.label, f, *dfa, true); });
    if (fit) write_file(out_path(s, "report_fit_" + prefix(in) + ".csv"), [&](std::ostream& o) { lrd::report::write_fit_row(o, in.label, f, *fit, true); });
  }
  if (rs) write_plot_data(s, in, "rs", *rs);
  if (dfa) write_plot_data(s, in, "dfa", *dfa);
  if (in.returns.size() >= 2) write_distribution_plots(s, in, bins);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lrdlab: long-range dependence laboratory for financial return series"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");

  Shared s;
  app.add_option("--data", s.data, "Daily price CSV (date,close)")->check(CLI::ExistingFile);
  app.add_option("--returns", s.returns, "Return series CSV as written by `ingest`")
      ->check(CLI::ExistingFile)
      ->excludes("--data");
  app.add_option("--frequency", s.frequency, "daily, weekly or monthly")
      ->check(CLI::IsMember({"daily", "weekly", "monthly"}, CLI::ignore_case))
      ->capture_default_str();
  app.add_option("--label", s.label, "Series label used in output names (default: file stem)");
  app.add_option("--out-dir", s.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", s.format, "Table output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--truncation-lag", s.truncation_lag, "Fractional filter truncation lag")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", s.seed, "Random seed")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Load, validate and resample prices; write prices and returns");
  std::size_t bins = 50;
  auto* diagnose = app.add_subcommand("diagnose", "Moments and normality tests");
  diagnose->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber)->capture_default_str();
  auto* hurst = app.add_subcommand("hurst", "Hurst exponent by R/S or DFA");
  std::string method = "rs";
  hurst->add_option("--method", method, "rs or dfa")->check(CLI::IsMember({"rs", "dfa"}))->capture_default_str();
  auto* fit = app.add_subcommand("fit", "ARFIMA-FIGARCH maximum likelihood");

  auto* simulate = app.add_subcommand("simulate", "Simulate ARFIMA-FIGARCH returns");
  SimulateArgs sim;
  std::vector<std::string> overrides;
  simulate->add_option("--params", sim.params_file, "JSON object of parameters (mu, phi, theta, d_m, omega, alpha, beta, d_v, nu)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--set", overrides, "Override one parameter, e.g. --set d_v=0.4");
  simulate->add_option("-n,--length", sim.n, "Number of returns")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--burn-in", sim.burn_in, "Discarded warm-up steps (default: 2 x truncation lag)");
  simulate->add_option("--paths", sim.paths, "Number of ensemble paths")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--ensemble-out", sim.ensemble_out, "Ensemble file (.csv, .bin or .lmp)");
  simulate->add_flag("--prices", sim.write_prices, "Also write a price CSV on consecutive weekdays");
  simulate->add_option("--start-price", sim.start_price, "Initial price for --prices")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Nearest-path evaluation of a generator ensemble");
  EvaluateArgs ev;
  evaluate->add_option("--ensemble", ev.ensemble, "Ensemble file (.csv, .bin or .lmp)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_flag("--no-fit", ev.no_fit, "Skip the ARFIMA-FIGARCH section");
  evaluate->add_option("--supplementary-paths", ev.supplementary_paths, "Paths in the ensemble DFA summary (0 disables)")
      ->capture_default_str();
  evaluate->add_option("--overlay-paths", ev.overlay_paths, "Paths written to the overlay plot data")
      ->capture_default_str();

  auto* report_all = app.add_subcommand("report-all", "Moments, R/S, DFA and ARFIMA-FIGARCH for one series");
  report_all->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto selected = app.get_subcommands();
    std::cerr << (selected.empty() ? app.help() : selected.front()->help());
    return kExitInput;
  }

  try {
    if (*ingest) return cmd_ingest(s);
    if (*diagnose) return cmd_diagnose(s, bins);
    if (*hurst) return cmd_hurst(s, method);
    if (*fit) return cmd_fit(s);
    if (*simulate) return cmd_simulate(s, sim, overrides);
    if (*evaluate) return cmd_evaluate(s, ev);
    if (*report_all) return cmd_report_all(s, bins);
  } catch (const lrd::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const lrd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
