#include "hdmean_cli/presets.hpp"

namespace hdmean::cli {

namespace {

using json = nlohmann::json;

const json kErrors = {"normal", "t5", "mixture"};
const json kModels14 = {"M1", "M2", "M3", "M4"};
const json kModels58 = {"M5", "M6", "M7", "M8"};
const json kAllModels = {"M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8"};

json file_of(Command c, const std::string& description, json experiments) {
  return {{"schema_version", kSchemaVersion},
          {"command", std::string(command_name(c))},
          {"description", description},
          {"experiments", std::move(experiments)}};
}

json one_sample_size(const std::string& name, const json& models, const json& methods) {
  return {{"name", name},       {"problem", "one_sample"}, {"n", 120},      {"p", {100, 200, 300}},
          {"model", models},    {"error", kErrors},        {"reps", 1000},  {"alpha", 0.05},
          {"seed", 1},          {"methods", methods},      {"precision", {{"mode", "oracle"}}}};
}

json two_sample_size(const std::string& name, const json& models) {
  return {{"name", name},
          {"problem", "two_sample"},
          {"n1", 60},
          {"n2", 60},
          {"p", {100, 200, 300}},
          {"model", models},
          {"error", kErrors},
          {"reps", 1000},
          {"alpha", 0.05},
          {"seed", 1},
          {"methods", {"SKK", "MAX1", "MAX2", "MAX3", "FC"}},
          {"precision", {{"mode", "oracle"}}}};
}

json m_range() {
  json m = json::array();
  for (int i = 1; i <= 20; ++i) m.push_back(i);
  return m;
}

json one_sample_power(const std::string& name, const std::string& error) {
  return {{"name", name},
          {"problem", "one_sample"},
          {"n", 120},
          {"p", 200},
          {"model", kAllModels},
          {"error", error},
          {"signal", {{"kind", "one_sample_scaled"}, {"norm_sq", 0.5}}},
          {"m_values", m_range()},
          {"reps", 500},
          {"seed", 1},
          {"methods", {"SR", "MAX1", "MAX2", "MAX3", "FC", "HC"}},
          {"precision", {{"mode", "oracle"}}}};
}

json two_sample_power(const std::string& name, const std::string& error) {
  return {{"name", name},
          {"problem", "two_sample"},
          {"n1", 60},
          {"n2", 60},
          {"p", 100},
          {"model", kAllModels},
          {"error", error},
          {"signal", {{"kind", "two_sample_rademacher"}}},
          {"m_values", m_range()},
          {"reps", 500},
          {"seed", 1},
          {"methods", {"SKK", "MAX1", "MAX2", "MAX3", "FC"}},
          {"precision", {{"mode", "oracle"}}}};
}

json sparsity_power(const std::string& name, double norm_sq) {
  return {{"name", name},
          {"problem", "one_sample"},
          {"n", 120},
          {"p", 200},
          {"model", kAllModels},
          {"error", "normal"},
          {"signal", {{"kind", "one_sample_scaled"}, {"norm_sq", norm_sq}}},
          {"sparsity_exponents", {0.2, 0.4, 0.6, 0.8, 1.0}},
          {"reps", 500},
          {"seed", 1},
          {"methods", {"SR", "MAX1", "MAX2", "MAX3", "HC", "FC", "FC2", "FC3"}},
          {"precision", {{"mode", "oracle"}}}};
}

json independence(const std::string& name, const std::string& problem, const json& signal) {
  json e = {{"name", name},        {"problem", problem},      {"p", 200},
            {"model", {"M1", "M2"}}, {"error", "normal"},     {"signal", signal},
            {"reps", 2000},        {"seed", 1},               {"diagnostic", "independence"},
            {"precision", {{"mode", "oracle"}}}};
  if (problem == "one_sample") {
    e["n"] = 120;
  } else {
    e["n1"] = 60;
    e["n2"] = 60;
  }
  return e;
}

std::vector<Preset> build() {
  std::vector<Preset> out;
  const json one_methods = {"SR", "MAX1", "MAX2", "MAX3", "FC", "HC", "PE"};
  auto add = [&](std::string name, Command c, std::string description, json experiments) {
    json doc = file_of(c, description, std::move(experiments));
    out.push_back({std::move(name), c, std::move(description), std::move(doc)});
  };
  add("table1", Command::Size, "one-sample sizes, models 1-4",
      json::array({one_sample_size("table1", kModels14, one_methods)}));
  add("table2", Command::Size, "one-sample sizes, models 5-8",
      json::array({one_sample_size("table2", kModels58, one_methods)}));
  add("table3", Command::Size, "two-sample sizes, models 1-4", json::array({two_sample_size("table3", kModels14)}));
  add("table4", Command::Size, "two-sample sizes, models 5-8", json::array({two_sample_size("table4", kModels58)}));
  add("t22", Command::Size, "one-sample sizes of FC2 and FC3, models 1-8",
      json::array({one_sample_size("t22", kAllModels, {"FC2", "FC3"})}));
  add("fig1", Command::Power, "one-sample power in m, normal errors",
      json::array({one_sample_power("fig1", "normal")}));
  add("fig2", Command::Power, "one-sample power in m, t(5) errors", json::array({one_sample_power("fig2", "t5")}));
  add("fig3", Command::Power, "one-sample power in m, mixture errors",
      json::array({one_sample_power("fig3", "mixture")}));
  add("fig4", Command::Power, "two-sample power in m, normal errors",
      json::array({two_sample_power("fig4", "normal")}));
  add("fig5", Command::Power, "two-sample power in m, t(5) errors", json::array({two_sample_power("fig5", "t5")}));
  add("fig6", Command::Power, "two-sample power in m, mixture errors",
      json::array({two_sample_power("fig6", "mixture")}));
  add("f22", Command::Power, "one-sample power over m = floor(p^a), ||mu||^2 = 0.5",
      json::array({sparsity_power("f22", 0.5)}));
  add("f23", Command::Power, "one-sample power over m = floor(p^a), ||mu||^2 = 0.8",
      json::array({sparsity_power("f23", 0.8)}));
  add("independence", Command::Diagnose, "joint vs product CDF of sum and max statistics under the null",
      json::array({independence("one_sample_null", "one_sample", {{"kind", "null"}}),
                   independence("two_sample_null", "two_sample", {{"kind", "null"}})}));
  add("independence_local", Command::Diagnose, "joint vs product CDF under sparse local alternatives, m = floor(p^0.3)",
      json::array({independence("one_sample_local", "one_sample", {{"kind", "local"}, {"m_exponent", 0.3}}),
                   independence("two_sample_local", "two_sample", {{"kind", "local"}, {"m_exponent", 0.3}})}));
  add("qf_clt", Command::Diagnose, "standardised quadratic forms z'Az against N(0,1)",
      json::array({json{{"name", "qf_model2"},
                        {"p", 200},
                        {"model", "M2"},
                        {"error", kErrors},
                        {"reps", 2000},
                        {"seed", 1},
                        {"diagnostic", "qf_clt"},
                        {"matrix", "a_matrix"}},
                   json{{"name", "qf_identity"},
                        {"p", 200},
                        {"model", "M1"},
                        {"error", "normal"},
                        {"reps", 2000},
                        {"seed", 1},
                        {"diagnostic", "qf_clt"},
                        {"matrix", "identity"}}}));
  add("condition", Command::Diagnose, "row sums of A and spectral ranges per model",
      json::array({json{{"name", "condition"},
                        {"p", {100, 200, 300}},
                        {"model", kAllModels},
                        {"diagnostic", "condition"}}}));
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const Preset& p : presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const Preset& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (" + known + ")");
}

}  // namespace hdmean::cli
