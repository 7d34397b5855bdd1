#include "hdmean_cli/commands.hpp"

#include "hdmean/errors.hpp"
#include "hdmean_cli/data_file.hpp"
#include "hdmean_cli/presets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace hdmean::cli {

namespace {

using json = nlohmann::json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string signal_kind(const SignalSpec& s) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NullSignal>) return "null";
        if constexpr (std::is_same_v<T, OneSampleScaled>) return "one_sample_scaled";
        if constexpr (std::is_same_v<T, TwoSampleRademacher>) return "two_sample_rademacher";
        return "local";
      },
      s);
}

std::string precision_label(const PrecisionMode& mode) {
  if (const auto* r = std::get_if<InvertRidged>(&mode)) {
    return "invert_ridged(ridge=" + num(r->ridge) + (r->relative ? ",relative" : "") + ")";
  }
  return "oracle";
}

// Distinct values in first-seen order, ';'-joined.
std::string distinct(const std::vector<std::string>& values) {
  std::vector<std::string> seen;
  for (const auto& v : values) {
    if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
  }
  std::string out;
  for (const auto& v : seen) out += (out.empty() ? "" : ";") + v;
  return out;
}

std::string header_comment(const ExperimentFile& file) {
  std::vector<std::string> seeds, modes;
  for (const Experiment& e : file.experiments) {
    seeds.push_back(std::to_string(e.base.seed));
    modes.push_back(precision_label(e.base.precision));
  }
  return "# hdmean " + std::string(command_name(file.command)) + " schema=" + std::to_string(file.schema_version) +
         " config_hash=" + config_hash(file.canonical) + " seed=" + distinct(seeds) + " precision=" + distinct(modes) +
         " sum_tests=upper_one_sided\n";
}

void size_rows(const Run& run, const SizeReport& rep, std::ostream& csv) {
  const SimConfig& c = run.config;
  for (const MethodRate& r : rep.rates) {
    csv << model_name(c.model) << ',' << error_name(c.error) << ',' << c.p << ',' << method_name(r.method) << ','
        << num(r.rate) << ',' << num(r.mc_se) << ',' << c.reps << ',' << c.seed << '\n';
  }
}

void power_rows(const Run& run, const PowerCurve& curve, std::ostream& csv) {
  const SimConfig& c = run.config;
  const double valid = static_cast<double>(c.reps);
  for (std::size_t j = 0; j < curve.m_values.size(); ++j) {
    for (std::size_t k = 0; k < curve.methods.size(); ++k) {
      const double r = curve.rates[k][j];
      csv << model_name(c.model) << ',' << error_name(c.error) << ',' << c.p << ',' << signal_kind(c.signal) << ','
          << (run.exponents.empty() ? "" : num(run.exponents[j])) << ',' << curve.m_values[j] << ','
          << method_name(curve.methods[k]) << ',' << num(r) << ',' << num(std::sqrt(r * (1.0 - r) / valid)) << ','
          << c.reps << '\n';
    }
  }
}

void diag_row(std::ostream& csv, const std::string& label, const std::string& metric, std::optional<GridPoint> at,
              double value) {
  csv << label << ',' << metric << ',';
  if (at) {
    csv << num(at->x) << ',' << num(at->y);
  } else {
    csv << ',';
  }
  csv << ',' << num(value) << '\n';
}

// Returns false when the run is unhealthy.
bool diagnose_rows(const Run& run, std::ostream& csv, std::string& problem) {
  const SimConfig& c = run.config;
  const Experiment& e = *run.experiment;
  switch (e.diagnostic) {
    case DiagnosticKind::Independence: {
      const IndepDiagnostic d = run_independence(c, e.grid);
      for (std::size_t i = 0; i < d.grid.size(); ++i) {
        diag_row(csv, run.label, "joint_cdf", d.grid[i], d.joint_cdf[i]);
        diag_row(csv, run.label, "product_cdf", d.grid[i], d.product_cdf[i]);
        diag_row(csv, run.label, "gap", d.grid[i], std::abs(d.joint_cdf[i] - d.product_cdf[i]));
      }
      diag_row(csv, run.label, "sup_abs_gap", std::nullopt, d.sup_abs_gap);
      diag_row(csv, run.label, "pearson_corr", std::nullopt, d.pearson_corr);
      diag_row(csv, run.label, "ks_sum", std::nullopt, d.ks_sum);
      diag_row(csv, run.label, "ks_max", std::nullopt, d.ks_max);
      diag_row(csv, run.label, "ks_fc", std::nullopt, d.ks_fc);
      diag_row(csv, run.label, "reps", std::nullopt, static_cast<double>(d.reps));
      diag_row(csv, run.label, "failures", std::nullopt, static_cast<double>(d.failures));
      diag_row(csv, run.label, "low_reps", std::nullopt, d.low_reps ? 1.0 : 0.0);
      if (!d.healthy()) {
        problem = run.label + ": " + std::to_string(d.failures) + " failed replications";
        return false;
      }
      return true;
    }
    case DiagnosticKind::QfClt: {
      const SymMatrix a = e.qf_matrix == "identity" ? SymMatrix::identity(c.p)
                                                    : realize_model(covariance_spec(c)).a_matrix;
      const QfCltReport q = run_qf_clt(a, c.error, c.reps, c.seed, c.threads);
      diag_row(csv, run.label, "ks", std::nullopt, q.ks);
      diag_row(csv, run.label, "mean", std::nullopt, q.mean);
      diag_row(csv, run.label, "variance", std::nullopt, q.variance);
      diag_row(csv, run.label, "raw_variance", std::nullopt, q.raw_variance);
      diag_row(csv, run.label, "trace_a", std::nullopt, q.trace_a);
      diag_row(csv, run.label, "sigma_a_sq", std::nullopt, q.sigma_a_sq);
      diag_row(csv, run.label, "reps", std::nullopt, static_cast<double>(q.reps));
      return true;
    }
    case DiagnosticKind::Condition: {
      const ModelConditionReport r = model_condition_report(realize_model(covariance_spec(c)));
      diag_row(csv, run.label, "sup_row_sum_a", std::nullopt, r.sup_row_sum_a);
      diag_row(csv, run.label, "sigma_lambda_min", std::nullopt, r.sigma_lambda_min);
      diag_row(csv, run.label, "sigma_lambda_max", std::nullopt, r.sigma_lambda_max);
      diag_row(csv, run.label, "a_lambda_min", std::nullopt, r.a_lambda_min);
      diag_row(csv, run.label, "a_lambda_max", std::nullopt, r.a_lambda_max);
      diag_row(csv, run.label, "row_sum_suspect", std::nullopt, r.row_sum_suspect ? 1.0 : 0.0);
      return true;
    }
  }
  return true;
}

std::string column_header(Command c) {
  switch (c) {
    case Command::Size: return "model,error,p,method,size,mc_se,reps,seed\n";
    case Command::Power: return "model,error,p,signal,a,m,method,power,mc_se,reps\n";
    case Command::Diagnose: return "experiment,metric,x,y,value\n";
  }
  return "\n";
}

}  // namespace

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

RunResult run_experiments(const ExperimentFile& file, std::ostream* log) {
  const std::vector<Run> runs = expand(file);
  RunResult result;
  std::ostringstream csv;
  csv << header_comment(file) << column_header(file.command);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Run& run = runs[i];
    const auto t0 = std::chrono::steady_clock::now();
    std::string problem;
    switch (file.command) {
      case Command::Size: {
        const SizeReport rep = run_size(run.config);
        size_rows(run, rep, csv);
        if (!rep.healthy()) {
          problem = run.label + ": " + std::to_string(rep.failures) + " failed replications (first: " +
                    rep.first_failure + ")";
        }
        break;
      }
      case Command::Power: {
        const PowerCurve curve = run_power(run.config, run.m_values);
        power_rows(run, curve, csv);
        if (!curve.healthy()) problem = run.label + ": " + std::to_string(curve.failures) + " failed replications";
        break;
      }
      case Command::Diagnose:
        diagnose_rows(run, csv, problem);
        break;
    }
    if (!problem.empty()) {
      result.healthy = false;
      result.problems += problem + "\n";
    }
    if (log) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      *log << "[" << (i + 1) << "/" << runs.size() << "] " << run.label << " (" << std::fixed << std::setprecision(1)
           << secs << "s)" << std::defaultfloat << (problem.empty() ? "" : " UNHEALTHY") << '\n';
    }
  }
  result.csv = csv.str();
  return result;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  ExperimentFile file;
  try {
    if (options.config_path.has_value() == options.preset.has_value()) {
      throw ConfigError("", "give exactly one of --config or --preset");
    }
    json doc;
    if (options.preset) {
      const Preset& p = find_preset(*options.preset);
      if (p.command != options.command) {
        throw ConfigError("preset", "'" + p.name + "' is a " + std::string(command_name(p.command)) +
                                        " preset, not " + std::string(command_name(options.command)));
      }
      doc = p.document;
    } else {
      doc = read_json_file(*options.config_path);
    }
    file = parse_experiment_file(doc, options.command);
    apply_overrides(file, options.seed, options.threads);
  } catch (const ConfigError& e) {
    err << "hdmean " << command_name(options.command) << ": config error: " << e.what() << '\n';
    return kExitUsage;
  }

  RunResult result;
  try {
    result = run_experiments(file, options.quiet ? nullptr : &err);
  } catch (const ConfigError& e) {
    err << "hdmean " << command_name(options.command) << ": config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "hdmean " << command_name(options.command) << ": run failed: " << e.what() << '\n';
    return kExitUnhealthy;
  }

  const std::optional<std::string> path = options.out_path ? options.out_path : file.output;
  if (path && *path != "-") {
    std::ofstream f(*path, std::ios::binary);
    if (!f || !(f << result.csv) || !f.flush()) {
      err << "hdmean " << command_name(options.command) << ": cannot write '" << *path << "'\n";
      return kExitUsage;
    }
  } else {
    out << result.csv;
  }
  if (!result.healthy) {
    err << "hdmean " << command_name(options.command) << ": unhealthy run\n" << result.problems;
    return kExitUnhealthy;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

namespace {

bool needs_precision(Method m) {
  switch (m) {
    case Method::MAX2:
    case Method::MAX3:
    case Method::FC:
    case Method::FC3:
    case Method::MIN:
    case Method::PE:
      return true;
    default:
      return false;
  }
}

void print_outcomes(const std::vector<TestOutcome>& outcomes, const json& meta, bool as_json, std::ostream& out) {
  if (as_json) {
    json doc = meta;
    doc["results"] = json::array();
    for (const TestOutcome& o : outcomes) {
      json details = json::object();
      for (const auto& [k, v] : o.details) details[k] = v;
      doc["results"].push_back({{"method", o.method},
                                {"statistic", o.statistic},
                                {"normalized", o.normalized},
                                {"p_value", o.p_value},
                                {"law", std::string(law_name(o.law))},
                                {"details", details}});
    }
    out << doc.dump(2) << '\n';
    return;
  }
  out << "#";
  for (auto it = meta.begin(); it != meta.end(); ++it) {
    out << ' ' << it.key() << '=' << (it->is_string() ? it->get<std::string>() : it->dump());
  }
  out << '\n';
  out << std::left << std::setw(8) << "method" << std::right << std::setw(17) << "statistic" << std::setw(17)
      << "normalized" << std::setw(17) << "p_value" << "  law\n";
  for (const TestOutcome& o : outcomes) {
    out << std::left << std::setw(8) << o.method << std::right << ' ' << std::setw(16) << num(o.statistic)
        << ' ' << std::setw(16) << num(o.normalized) << ' ' << std::setw(16) << num(o.p_value) << "  " << law_name(o.law) << '\n';
  }
}

}  // namespace

int cmd_test(const TestOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.combine) {
      const auto [p_sum, p_max] = *options.combine;
      TestOutcome fc = fisher_combine(p_sum, p_max);
      TestOutcome mn = min_p_combine(p_sum, p_max);
      print_outcomes({fc, mn}, json{{"mode", "combine"}, {"p_sum", p_sum}, {"p_max", p_max}}, options.json, out);
      return kExitOk;
    }
    if (options.data_paths.empty() || options.data_paths.size() > 2) {
      err << "hdmean test: give one data file (one-sample) or two (two-sample)\n";
      return kExitUsage;
    }
    const SampleMatrix x1(read_matrix_file(options.data_paths[0], options.header));
    std::optional<SampleMatrix> x2;
    if (options.data_paths.size() == 2) {
      x2.emplace(read_matrix_file(options.data_paths[1], options.header));
      if (x2->p() != x1.p()) {
        err << "hdmean test: " << options.data_paths[0] << " has " << x1.p() << " columns but "
            << options.data_paths[1] << " has " << x2->p() << '\n';
        return kExitUsage;
      }
    }
    const Problem problem = x2 ? Problem::TwoSample : Problem::OneSample;
    const std::size_t p = x1.p();

    std::vector<Method> methods;
    for (const std::string& m : options.methods) methods.push_back(parse_method(m));
    if (methods.empty()) {
      if (problem == Problem::OneSample) {
        methods = p < 2 ? std::vector<Method>{Method::SR}
                        : std::vector<Method>{Method::SR,  Method::MAX1, Method::MAX2, Method::MAX3, Method::FC,
                                              Method::FC2, Method::FC3,  Method::MIN,  Method::HC,   Method::PE};
      } else {
        methods = p < 2 ? std::vector<Method>{Method::SKK}
                        : std::vector<Method>{Method::SKK, Method::MAX1, Method::MAX2, Method::MAX3,
                                              Method::FC,  Method::FC2,  Method::FC3,  Method::MIN};
      }
    }

    json meta = {{"problem", std::string(problem_name(problem))},
                 {"n", x1.n()},
                 {"p", p},
                 {"sum_tests", "upper_one_sided"}};
    if (x2) {
      meta["n1"] = x1.n();
      meta["n2"] = x2->n();
      meta.erase("n");
    }

    PrecisionPlugin precision{SymMatrix::identity(p), SymMatrix::identity(p)};
    if (std::any_of(methods.begin(), methods.end(), needs_precision)) {
      if (options.omega_path) {
        const SymMatrix omega(read_matrix_file(*options.omega_path, false));
        if (omega.dim() != p) {
          err << "hdmean test: --omega is " << omega.dim() << "x" << omega.dim() << " but the data have p = " << p
              << '\n';
          return kExitUsage;
        }
        precision = {omega, sqrt_psd(omega)};
        meta["precision"] = "supplied";
      } else {
        const double a = static_cast<double>(x1.n() - 1);
        SymMatrix s = sample_cov(x1);
        if (x2) {
          const double b = static_cast<double>(x2->n() - 1);
          s = SymMatrix((a * s.mat() + b * sample_cov(*x2).mat()) / (a + b));
        }
        const InvertRidged mode{options.ridge, true};
        precision = precision_plugin(mode, s, std::nullopt);
        meta["precision"] = precision_label(mode);
      }
    }

    MethodOptions mo;
    mo.pe_threshold = options.pe_threshold;
    const std::vector<TestOutcome> outcomes = evaluate_methods(methods, x1, x2 ? &*x2 : nullptr, precision, mo);
    print_outcomes(outcomes, meta, options.json, out);
    return kExitOk;
  } catch (const DataError& e) {
    err << "hdmean test: " << e.what() << '\n';
  } catch (const NumericalError& e) {
    err << "hdmean test: numerical failure: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "hdmean test: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace hdmean::cli
