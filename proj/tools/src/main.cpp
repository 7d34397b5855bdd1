#include "hdmean_cli/commands.hpp"
#include "hdmean_cli/presets.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using hdmean::cli::Command;

void add_run_flags(CLI::App* sub, hdmean::cli::RunOptions& o) {
  sub->add_option("--config", o.config_path, "experiment file (JSON)");
  sub->add_option("--preset", o.preset, "shipped experiment (see `hdmean presets`)");
  sub->add_option("--out", o.out_path, "output CSV path ('-' for stdout)");
  sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
  sub->add_option("--seed", o.seed, "override every experiment's seed");
  sub->add_option("--format", "output format")->check(CLI::IsMember({"csv"}))->default_str("csv");
  sub->add_flag("-q,--quiet", o.quiet, "no progress on stderr");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-dimensional mean tests: simulation harness and data-file mode"};
  app.require_subcommand(1);

  hdmean::cli::RunOptions size_opts, power_opts, diag_opts;
  size_opts.command = Command::Size;
  power_opts.command = Command::Power;
  diag_opts.command = Command::Diagnose;
  CLI::App* size = app.add_subcommand("size", "empirical sizes under the null");
  CLI::App* power = app.add_subcommand("power", "power curves over signal sparsity");
  CLI::App* diagnose = app.add_subcommand("diagnose", "independence, quadratic-form CLT and model diagnostics");
  add_run_flags(size, size_opts);
  add_run_flags(power, power_opts);
  add_run_flags(diagnose, diag_opts);

  hdmean::cli::TestOptions test_opts;
  std::string methods;
  std::vector<double> combine;
  CLI::App* test = app.add_subcommand("test", "apply the tests to data files (one file: one-sample, two: two-sample)");
  test->add_option("data", test_opts.data_paths, "numeric matrix, one observation per row")->expected(0, 2);
  test->add_flag("--header", test_opts.header, "first non-comment line is a header");
  test->add_option("--methods", methods, "comma-separated subset, e.g. SR,MAX2,FC");
  test->add_option("--omega", test_opts.omega_path, "p x p precision matrix to plug in");
  test->add_option("--ridge", test_opts.ridge, "ridge relative to tr(S)/p when estimating the precision")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  test->add_option("--pe-threshold", test_opts.pe_threshold, "PE screening threshold (default log log n sqrt(log p / n))");
  test->add_flag("--json", test_opts.json, "machine-readable output");
  test->add_option("--combine-pvalues", combine, "combine P_SUM P_MAX directly, ignoring data")->expected(2);

  CLI::App* list = app.add_subcommand("presets", "list shipped presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hdmean::cli::kExitUsage;
  }

  if (*size) return hdmean::cli::cmd_run(size_opts, std::cout, std::cerr);
  if (*power) return hdmean::cli::cmd_run(power_opts, std::cout, std::cerr);
  if (*diagnose) return hdmean::cli::cmd_run(diag_opts, std::cout, std::cerr);
  if (*test) {
    test_opts.methods = hdmean::cli::split_list(methods);
    if (!combine.empty()) test_opts.combine = std::make_pair(combine[0], combine[1]);
    return hdmean::cli::cmd_test(test_opts, std::cout, std::cerr);
  }
  if (*list) {
    for (const auto& p : hdmean::cli::presets()) {
      std::cout << p.name << '\t' << hdmean::cli::command_name(p.command) << '\t' << p.description << '\n';
    }
    return 0;
  }
  return hdmean::cli::kExitUsage;
}
