#pragma once

#include "hdmean/estimators.hpp"
#include "hdmean/linalg.hpp"
#include "hdmean/models.hpp"
#include "hdmean/statistics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hdmean {

enum class Problem { OneSample, TwoSample };

std::string_view problem_name(Problem p);
Problem parse_problem(std::string_view s);

/// Tests the harness knows how to run.
///
/// One-sample: SR, MAX1 (A = I), MAX2 (A = Omega^{1/2}), MAX3 (A = Omega),
/// FC (SR + MAX2), FC2 (SR + MAX1), FC3 (SR + MAX3), MIN (min-p of SR and
/// MAX2), HC, PE.
/// Two-sample: SKK, MAX1, MAX2 (W), MAX3, FC (SKK + W), FC2, FC3, MIN.
enum class Method { SR, SKK, MAX1, MAX2, MAX3, FC, FC2, FC3, MIN, HC, PE };

std::string_view method_name(Method m);
Method parse_method(std::string_view s);
bool method_supported(Method m, Problem p);

/// Full description of one simulation experiment.
struct SimConfig {
  std::string name;
  Problem problem = Problem::OneSample;
  std::size_t n = 120;  ///< one-sample size
  std::size_t n1 = 60;  ///< two-sample sizes
  std::size_t n2 = 60;
  std::size_t p = 100;
  CovModel model = CovModel::M1;
  std::uint64_t model_seed = 20240101;
  ErrorDist error = ErrorDist::StdNormal;
  SignalSpec signal = NullSignal{};
  std::size_t reps = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::vector<Method> methods;
  PrecisionMode precision = OraclePrecision{};
  /// PE screening threshold; <= 0 selects default_pe_threshold(n, p).
  double pe_threshold = 0.0;
  /// Empty selects default_hc_grid().
  std::vector<double> hc_grid;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  std::size_t threads = 1;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const SimConfig& config);

CovarianceSpec covariance_spec(const SimConfig& config);

struct MethodRate {
  Method method;
  std::size_t rejections = 0;
  double rate = 0.0;
  double mc_se = 0.0;
};

struct SizeReport {
  std::vector<MethodRate> rates;
  std::size_t reps = 0;
  /// Replications aborted by a degenerate statistic. Healthy runs have none.
  std::size_t failures = 0;
  std::string first_failure;

  bool healthy() const { return failures == 0; }
  const MethodRate& at(Method m) const;
};

struct PowerCurve {
  std::vector<std::size_t> m_values;
  std::vector<Method> methods;
  /// rates[k][j]: method k at m_values[j].
  std::vector<std::vector<double>> rates;
  std::size_t reps = 0;
  std::size_t failures = 0;

  bool healthy() const { return failures == 0; }
  const std::vector<double>& at(Method m) const;
};

struct GridPoint {
  double x = 0.0;
  double y = 0.0;
};

/// x in {-2,-1,0,1,2} times y in {-2,0,2,4,6}.
std::vector<GridPoint> default_independence_grid();

/// Joint versus product empirical CDFs of (sum statistic, normalised max).
struct IndepDiagnostic {
  std::vector<GridPoint> grid;
  std::vector<double> joint_cdf;
  std::vector<double> product_cdf;
  double sup_abs_gap = 0.0;
  double pearson_corr = 0.0;
  /// KS distances of the marginal draws and of the Fisher statistic against
  /// Phi, the Gumbel-type law and chi-square(4).
  double ks_sum = 0.0;
  double ks_max = 0.0;
  double ks_fc = 0.0;
  std::vector<double> sum_draws;
  std::vector<double> max_draws;
  std::vector<double> fc_draws;
  std::size_t reps = 0;
  std::size_t failures = 0;
  bool low_reps = false;  ///< fewer than 1000 replications

  bool healthy() const { return failures == 0; }
};

struct QfCltReport {
  double trace_a = 0.0;
  double sigma_a_sq = 0.0;
  double ks = 0.0;
  double mean = 0.0;      ///< of the standardised draws
  double variance = 0.0;  ///< of the standardised draws
  double raw_variance = 0.0;  ///< of z'Az
  std::size_t reps = 0;
};

struct ModelConditionReport {
  double sup_row_sum_a = 0.0;
  double sigma_lambda_min = 0.0;
  double sigma_lambda_max = 0.0;
  double a_lambda_min = 0.0;
  double a_lambda_max = 0.0;
  /// Row sums of |A| above kRowSumFlag: the bounded-row-sum condition is
  /// doubtful at this dimension.
  bool row_sum_suspect = false;
};

inline constexpr double kRowSumFlag = 5.0;

SizeReport run_size(const SimConfig& config);
PowerCurve run_power(const SimConfig& config, const std::vector<std::size_t>& m_values);
IndepDiagnostic run_independence(const SimConfig& config, const std::vector<GridPoint>& grid);
QfCltReport run_qf_clt(const SymMatrix& a, ErrorDist dist, std::size_t reps, std::uint64_t seed,
                       std::size_t threads = 1);
ModelConditionReport model_condition_report(const ModelRealization& real);

struct MethodOptions {
  /// <= 0 selects default_pe_threshold(n, p).
  double pe_threshold = 0.0;
  /// Empty selects default_hc_grid().
  std::vector<double> hc_grid;
};

/// Applies each method to one data set (two-sample when x2 is non-null).
/// Outcomes are labelled with method_name. `precision` feeds MAX2, MAX3, the
/// combinations built on them and PE.
std::vector<TestOutcome> evaluate_methods(const std::vector<Method>& methods, const SampleMatrix& x1,
                                          const SampleMatrix* x2, const PrecisionPlugin& precision,
                                          const MethodOptions& options = {});

/// floor(p^a) for each exponent, clamped to [1, p].
std::vector<std::size_t> sparsity_m_values(std::size_t p, const std::vector<double>& exponents);

/// Replace the support size of a signal; m = 0 yields the null.
SignalSpec with_support(const SignalSpec& s, std::size_t m);

/// sup_x |F_n(x) - cdf(x)| for the empirical CDF of the draws.
double ks_statistic(std::vector<double> draws, const std::function<double(double)>& cdf);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. fn must only
/// write to per-index state.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace hdmean
