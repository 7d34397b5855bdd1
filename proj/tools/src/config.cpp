#include "hdmean_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hdmean::cli {

namespace {

using json = nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::size_t get_count(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer()) {
    const auto x = v.get<long long>();
    if (x >= 0) return static_cast<std::size_t>(x);
  }
  throw ConfigError(field, "expected a non-negative integer");
}

std::uint64_t get_u64(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError(field, "expected a non-negative integer");
}

double get_real(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(field, "must be finite");
  return d;
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError(field, "expected true or false");
  return v.get<bool>();
}

// Scalar or non-empty list of scalars.
template <class F>
auto one_or_many(const json& v, const std::string& field, F&& parse) {
  using T = decltype(parse(v, field));
  std::vector<T> out;
  if (v.is_array()) {
    if (v.empty()) throw ConfigError(field, "list must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(parse(v[i], field + "[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(parse(v, field));
  }
  return out;
}

template <class F>
auto wrap(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(join(path, it.key()), "unknown field");
    }
  }
}

SignalSpec parse_signal(const json& v, const std::string& path, std::optional<double>& m_exponent) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  check_keys(v, path, {"kind", "m", "m_exponent", "norm_sq", "tau"});
  if (!v.contains("kind")) throw ConfigError(join(path, "kind"), "missing");
  const std::string kind = get_string(v["kind"], join(path, "kind"));
  std::size_t m = 0;
  if (v.contains("m")) m = get_count(v["m"], join(path, "m"));
  if (v.contains("m_exponent")) {
    const double a = get_real(v["m_exponent"], join(path, "m_exponent"));
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError(join(path, "m_exponent"), "must lie in [0, 1]");
    if (v.contains("m")) throw ConfigError(join(path, "m_exponent"), "give either m or m_exponent");
    m_exponent = a;
  }
  if (kind == "null") {
    if (m != 0 || m_exponent) throw ConfigError(join(path, "m"), "the null signal has no support");
    return NullSignal{};
  }
  if (kind == "one_sample_scaled") {
    OneSampleScaled s{m, 0.5};
    if (v.contains("norm_sq")) s.norm_sq = get_real(v["norm_sq"], join(path, "norm_sq"));
    return s;
  }
  if (kind == "two_sample_rademacher") return TwoSampleRademacher{m};
  if (kind == "local") {
    LocalAlternative s{m, 1.0};
    if (v.contains("tau")) s.tau = get_real(v["tau"], join(path, "tau"));
    return s;
  }
  throw ConfigError(join(path, "kind"), "unknown signal kind '" + kind +
                                            "' (null, one_sample_scaled, two_sample_rademacher, local)");
}

PrecisionMode parse_precision(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  check_keys(v, path, {"mode", "ridge", "relative"});
  if (!v.contains("mode")) throw ConfigError(join(path, "mode"), "missing");
  const std::string mode = get_string(v["mode"], join(path, "mode"));
  if (mode == "oracle") {
    if (v.contains("ridge") || v.contains("relative")) {
      throw ConfigError(join(path, "ridge"), "only meaningful for invert_ridged");
    }
    return OraclePrecision{};
  }
  if (mode == "invert_ridged") {
    InvertRidged r{1e-3, true};
    if (v.contains("ridge")) {
      r.ridge = get_real(v["ridge"], join(path, "ridge"));
      if (r.ridge < 0.0) throw ConfigError(join(path, "ridge"), "must be non-negative");
    }
    if (v.contains("relative")) r.relative = get_bool(v["relative"], join(path, "relative"));
    return r;
  }
  throw ConfigError(join(path, "mode"), "unknown precision mode '" + mode + "' (oracle, invert_ridged)");
}

std::vector<Method> default_methods(Command c, Problem p) {
  if (p == Problem::TwoSample) {
    return {Method::SKK, Method::MAX1, Method::MAX2, Method::MAX3, Method::FC};
  }
  if (c == Command::Size) {
    return {Method::SR, Method::MAX1, Method::MAX2, Method::MAX3, Method::FC, Method::HC, Method::PE};
  }
  return {Method::SR, Method::MAX1, Method::MAX2, Method::MAX3, Method::FC, Method::HC};
}

std::vector<Method> diagnostic_methods(Problem p) {
  return {p == Problem::OneSample ? Method::SR : Method::SKK, Method::MAX2, Method::FC};
}

Experiment parse_experiment(const json& v, const std::string& path, Command command, std::size_t index) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  std::set<std::string> allowed = {"name", "problem", "n",    "n1",     "n2",      "p",
                                   "model", "model_seed", "error", "signal", "reps", "alpha",
                                   "seed",  "precision",  "threads"};
  switch (command) {
    case Command::Size:
      allowed.insert({"methods", "pe_threshold", "hc_grid"});
      break;
    case Command::Power:
      allowed.insert({"methods", "pe_threshold", "hc_grid", "m_values", "sparsity_exponents"});
      break;
    case Command::Diagnose:
      allowed.insert({"diagnostic", "grid", "matrix"});
      break;
  }
  check_keys(v, path, allowed);

  Experiment e;
  SimConfig& c = e.base;
  e.name = v.contains("name") ? get_string(v["name"], join(path, "name")) : "experiment" + std::to_string(index);
  if (v.contains("problem")) {
    const std::string s = get_string(v["problem"], join(path, "problem"));
    c.problem = wrap(join(path, "problem"), [&] { return parse_problem(s); });
  }
  if (v.contains("n")) c.n = get_count(v["n"], join(path, "n"));
  if (v.contains("n1")) c.n1 = get_count(v["n1"], join(path, "n1"));
  if (v.contains("n2")) c.n2 = get_count(v["n2"], join(path, "n2"));
  e.p_values = v.contains("p") ? one_or_many(v["p"], join(path, "p"), get_count) : std::vector<std::size_t>{c.p};
  e.models = v.contains("model")
                 ? one_or_many(v["model"], join(path, "model"),
                               [](const json& x, const std::string& f) {
                                 const std::string s = x.is_number_integer() ? std::to_string(x.get<long long>())
                                                                             : get_string(x, f);
                                 return wrap(f, [&] { return parse_model(s); });
                               })
                 : std::vector<CovModel>{c.model};
  e.errors = v.contains("error")
                 ? one_or_many(v["error"], join(path, "error"),
                               [](const json& x, const std::string& f) {
                                 const std::string s = x.is_number_integer() ? std::to_string(x.get<long long>())
                                                                             : get_string(x, f);
                                 return wrap(f, [&] { return parse_error(s); });
                               })
                 : std::vector<ErrorDist>{c.error};
  if (v.contains("model_seed")) c.model_seed = get_u64(v["model_seed"], join(path, "model_seed"));
  if (v.contains("reps")) c.reps = get_count(v["reps"], join(path, "reps"));
  if (v.contains("alpha")) c.alpha = get_real(v["alpha"], join(path, "alpha"));
  if (v.contains("seed")) c.seed = get_u64(v["seed"], join(path, "seed"));
  if (v.contains("threads")) c.threads = get_count(v["threads"], join(path, "threads"));
  if (v.contains("precision")) c.precision = parse_precision(v["precision"], join(path, "precision"));
  if (v.contains("pe_threshold")) c.pe_threshold = get_real(v["pe_threshold"], join(path, "pe_threshold"));
  if (v.contains("hc_grid")) {
    if (!v["hc_grid"].is_array()) throw ConfigError(join(path, "hc_grid"), "expected a list");
    c.hc_grid = one_or_many(v["hc_grid"], join(path, "hc_grid"), get_real);
  }

  if (v.contains("signal")) {
    c.signal = parse_signal(v["signal"], join(path, "signal"), e.m_exponent);
  } else if (command == Command::Power) {
    c.signal = c.problem == Problem::OneSample ? SignalSpec{OneSampleScaled{}} : SignalSpec{TwoSampleRademacher{}};
  }

  if (v.contains("methods")) {
    if (!v["methods"].is_array()) throw ConfigError(join(path, "methods"), "expected a list");
    c.methods = one_or_many(v["methods"], join(path, "methods"), [](const json& x, const std::string& f) {
      const std::string s = get_string(x, f);
      return wrap(f, [&] { return parse_method(s); });
    });
  } else if (command == Command::Diagnose) {
    c.methods = diagnostic_methods(c.problem);
  } else {
    c.methods = default_methods(command, c.problem);
  }

  if (command == Command::Size && !is_null_signal(c.signal)) {
    throw ConfigError(join(path, "signal.kind"), "size runs need the null signal");
  }
  if (command == Command::Power) {
    if (std::holds_alternative<NullSignal>(c.signal)) {
      throw ConfigError(join(path, "signal.kind"), "power runs need a non-null signal kind");
    }
    if (e.m_exponent) throw ConfigError(join(path, "signal.m_exponent"), "power runs take m_values or sparsity_exponents");
    if (v.contains("m_values") && v.contains("sparsity_exponents")) {
      throw ConfigError(join(path, "sparsity_exponents"), "give either m_values or sparsity_exponents");
    }
    if (v.contains("m_values")) {
      if (!v["m_values"].is_array()) throw ConfigError(join(path, "m_values"), "expected a list");
      e.m_values = one_or_many(v["m_values"], join(path, "m_values"), get_count);
    } else if (v.contains("sparsity_exponents")) {
      if (!v["sparsity_exponents"].is_array()) throw ConfigError(join(path, "sparsity_exponents"), "expected a list");
      e.sparsity_exponents = one_or_many(v["sparsity_exponents"], join(path, "sparsity_exponents"), get_real);
      for (double a : e.sparsity_exponents) {
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError(join(path, "sparsity_exponents"), "values must lie in [0, 1]");
      }
    } else {
      for (std::size_t m = 1; m <= 20; ++m) e.m_values.push_back(m);
    }
  }
  if (command == Command::Diagnose) {
    if (!v.contains("diagnostic")) throw ConfigError(join(path, "diagnostic"), "missing (independence, qf_clt, condition)");
    const std::string d = get_string(v["diagnostic"], join(path, "diagnostic"));
    if (d == "independence") {
      e.diagnostic = DiagnosticKind::Independence;
    } else if (d == "qf_clt") {
      e.diagnostic = DiagnosticKind::QfClt;
    } else if (d == "condition") {
      e.diagnostic = DiagnosticKind::Condition;
    } else {
      throw ConfigError(join(path, "diagnostic"), "unknown diagnostic '" + d + "' (independence, qf_clt, condition)");
    }
    if (v.contains("grid")) {
      const json& g = v["grid"];
      if (!g.is_array() || g.empty()) throw ConfigError(join(path, "grid"), "expected a non-empty list of [x, y] pairs");
      for (std::size_t i = 0; i < g.size(); ++i) {
        const std::string f = join(path, "grid") + "[" + std::to_string(i) + "]";
        if (!g[i].is_array() || g[i].size() != 2) throw ConfigError(f, "expected [x, y]");
        e.grid.push_back({get_real(g[i][0], f), get_real(g[i][1], f)});
      }
    } else {
      e.grid = default_independence_grid();
    }
    if (v.contains("matrix")) {
      e.qf_matrix = get_string(v["matrix"], join(path, "matrix"));
      if (e.qf_matrix != "a_matrix" && e.qf_matrix != "identity") {
        throw ConfigError(join(path, "matrix"), "expected a_matrix or identity");
      }
    }
    if (e.diagnostic == DiagnosticKind::QfClt && c.reps < 2) {
      throw ConfigError(join(path, "reps"), "qf_clt needs at least 2 replications");
    }
  }
  return e;
}

}  // namespace

std::string_view command_name(Command c) {
  switch (c) {
    case Command::Size: return "size";
    case Command::Power: return "power";
    case Command::Diagnose: return "diagnose";
  }
  return "?";
}

std::string_view diagnostic_name(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::Independence: return "independence";
    case DiagnosticKind::QfClt: return "qf_clt";
    case DiagnosticKind::Condition: return "condition";
  }
  return "?";
}

ExperimentFile parse_experiment_file(const nlohmann::json& doc, Command command) {
  if (!doc.is_object()) throw ConfigError("", "top level must be a JSON object");
  check_keys(doc, "", {"schema_version", "command", "description", "experiments", "output"});
  ExperimentFile file;
  file.command = command;
  if (!doc.contains("schema_version")) throw ConfigError("schema_version", "missing");
  const std::size_t version = get_count(doc["schema_version"], "schema_version");
  if (version != static_cast<std::size_t>(kSchemaVersion)) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                            std::to_string(kSchemaVersion) + ")");
  }
  file.schema_version = kSchemaVersion;
  if (doc.contains("command")) {
    const std::string c = get_string(doc["command"], "command");
    if (c != command_name(command)) {
      throw ConfigError("command", "file is for '" + c + "' but was given to '" + std::string(command_name(command)) + "'");
    }
  }
  if (doc.contains("output")) file.output = get_string(doc["output"], "output");
  if (!doc.contains("experiments")) throw ConfigError("experiments", "missing");
  const json& list = doc["experiments"];
  if (!list.is_array() || list.empty()) throw ConfigError("experiments", "expected a non-empty list");
  for (std::size_t i = 0; i < list.size(); ++i) {
    file.experiments.push_back(parse_experiment(list[i], "experiments[" + std::to_string(i) + "]", command, i));
  }
  file.canonical = doc;
  file.canonical.erase("output");
  file.canonical["command"] = std::string(command_name(command));
  // Every cell validates before anything runs.
  (void)expand(file);
  return file;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("", path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

void apply_overrides(ExperimentFile& file, std::optional<std::uint64_t> seed, std::optional<std::size_t> threads) {
  for (std::size_t i = 0; i < file.experiments.size(); ++i) {
    Experiment& e = file.experiments[i];
    if (seed) {
      e.base.seed = *seed;
      file.canonical["experiments"][i]["seed"] = *seed;
    }
    if (threads) e.base.threads = *threads;
  }
}

std::vector<Run> expand(const ExperimentFile& file) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < file.experiments.size(); ++i) {
    const Experiment& e = file.experiments[i];
    const std::string path = "experiments[" + std::to_string(i) + "]";
    for (CovModel model : e.models) {
      for (ErrorDist error : e.errors) {
        for (std::size_t p : e.p_values) {
          Run r;
          r.experiment = &e;
          r.config = e.base;
          r.config.name = e.name;
          r.config.model = model;
          r.config.error = error;
          r.config.p = p;
          r.label = e.name + "/" + std::string(model_name(model)) + "/" + std::string(error_name(error)) + "/p" +
                    std::to_string(p);
          if (e.m_exponent) {
            const std::size_t m = sparsity_m_values(p, {*e.m_exponent}).front();
            r.config.signal = wrap(path + ".signal", [&] { return with_support(r.config.signal, m); });
          }
          if (file.command == Command::Power) {
            if (!e.sparsity_exponents.empty()) {
              r.m_values = sparsity_m_values(p, e.sparsity_exponents);
              r.exponents = e.sparsity_exponents;
            } else {
              r.m_values = e.m_values;
            }
            for (std::size_t m : r.m_values) {
              if (m > p) throw ConfigError(path + ".m_values", "entry " + std::to_string(m) + " exceeds p = " + std::to_string(p));
            }
          }
          wrap(path, [&] {
            validate(r.config);
            return 0;
          });
          if (file.command == Command::Diagnose && e.diagnostic != DiagnosticKind::Independence &&
              !is_null_signal(r.config.signal)) {
            throw ConfigError(path + ".signal", "only the independence diagnostic takes a signal");
          }
          runs.push_back(std::move(r));
        }
      }
    }
  }
  return runs;
}

std::string config_hash(const nlohmann::json& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hdmean::cli
