#pragma once

#include "hdmean/limit_laws.hpp"
#include "hdmean/linalg.hpp"
#include "hdmean/models.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hdmean {

/// Result of one test applied to one data set.
///
/// `statistic` is on the method's natural scale (M_A, T_FC, ...),
/// `normalized` is the value handed to the reference law (M - 2 log p +
/// log log p for maxima; equal to `statistic` otherwise) and `p_value` is the
/// upper-tail probability. Sum-type tests are one-sided: large values reject.
struct TestOutcome {
  std::string method;
  double statistic = 0.0;
  double normalized = 0.0;
  double p_value = 1.0;
  LimitLaw law = LimitLaw::StdNormal;
  /// Method-specific extras: constituent p-values, argmax, J0/J1, ...
  std::map<std::string, double> details;
};

/// Floor applied to p-values before taking logs in Fisher combinations.
inline constexpr double kPValueFloor = 1e-300;

// ---------------------------------------------------------------------------
// One-sample
// ---------------------------------------------------------------------------

/// Studentised sum-type statistic
///   [n Xbar' D_s^{-1} Xbar - (n-1)p/(n-3)] /
///   ([2 tr R^2 - p^2/(n-1)]^{1/2} [1 + tr R^2 / p^{3/2}]^{1/2}),
/// R = D_s^{-1/2} S D_s^{-1/2}. Requires n >= 4 and positive column variances.
TestOutcome t_sr(const SampleMatrix& x);

/// M_A = (n-1) max_i (A Xbar)_i^2 / b_ii with B the sample covariance of the
/// transformed rows A X_i. Calibrated against the Gumbel-type law.
TestOutcome max_stat(const SampleMatrix& x, const SymMatrix& a);

/// -2 log p_max - 2 log p_sum against chi-square(4). Arguments must lie in
/// [0, 1]; zeros are floored at kPValueFloor.
TestOutcome fisher_combine(double p_sum, double p_max);

/// min(p_sum, p_max). The reported p-value 1 - (1 - min)^2 is the size under
/// independence, so p_value <= alpha rejects exactly when
/// min <= 1 - sqrt(1 - alpha).
TestOutcome min_p_combine(double p_sum, double p_max);

/// Default threshold grid {0.01, 0.02, ..., 0.99}.
std::vector<double> default_hc_grid();

/// Thresholded sum-of-squares statistic maximised over the grid:
///   max_s (T_2n(s) - mu(s)) / sigma(s),
///   T_2n(s) = sum_j n (Xbar_j / sd_j)^2 I(|Xbar_j| >= sd_j sqrt(lambda_s / n)),
///   lambda_s = 2 s log p.
/// The p-value comes from a simulated null (see hc_null_distribution).
TestOutcome hc2_stat(const SampleMatrix& x, std::span<const double> s_grid);
TestOutcome hc2_stat(const SampleMatrix& x);

/// The HC statistic as a function of the studentised means t_j = sqrt(n) Xbar_j / sd_j.
double hc2_from_tvalues(std::span<const double> t, std::span<const double> s_grid);

/// Sorted draws of hc2 under independent N(0,1) coordinates, cached per
/// (n, p, grid). Computed once per key; concurrent callers share the result.
std::shared_ptr<const std::vector<double>> hc_null_distribution(std::size_t n, std::size_t p,
                                                                 std::span<const double> s_grid);

/// log(log n) * sqrt(log p / n).
double default_pe_threshold(std::size_t n, std::size_t p);

/// Power-enhanced Wald statistic J = J0 + J1,
///   J0 = sqrt(p) sum_j Xbar_j^2 / sd_j^2 I(|Xbar_j| > sd_j delta),
///   J1 = (Xbar' V^{-1} Xbar - p) / (2 sqrt(p)),  V^{-1} = n * omega_hat.
/// omega_hat is the precision of a single observation.
TestOutcome pe_stat(const SampleMatrix& x, double delta_pn, const SymMatrix& omega_hat);

/// Fisher combination of t_sr with max_stat(x, max_transform). The default
/// FC uses A = Omega_hat^{1/2}; FC2 uses I and FC3 uses Omega_hat.
TestOutcome fc_one_sample(const SampleMatrix& x, const SymMatrix& max_transform,
                          std::string method = "FC");

// ---------------------------------------------------------------------------
// Two-sample
// ---------------------------------------------------------------------------

/// Sum-type two-sample statistic with pooled diagonal
/// D = D_1/n1 + D_2/n2, R = D^{-1/2}(S_1/n1 + S_2/n2)D^{-1/2}:
///   [(Xbar1 - Xbar2)' D^{-1} (Xbar1 - Xbar2) - p] / sqrt(p sigma2 c_pn).
TestOutcome t_skk(const SampleMatrix& x1, const SampleMatrix& x2);

/// W = n1 n2 / (n1 + n2) max_i Wbar_i^2, Wbar = Omega_hat^{1/2}(Xbar1 - Xbar2).
TestOutcome w_max_two_sample(const SampleMatrix& x1, const SampleMatrix& x2,
                             const SymMatrix& omega_hat_sqrt);

/// Studentised two-sample maximum n1 n2/(n1+n2) max_i (A(Xbar1-Xbar2))_i^2 / b_ii
/// with B the pooled sample covariance of the transformed rows.
TestOutcome max_stat_two_sample(const SampleMatrix& x1, const SampleMatrix& x2,
                                const SymMatrix& a);

/// Fisher combination of t_skk and w_max_two_sample.
TestOutcome fc_two_sample(const SampleMatrix& x1, const SampleMatrix& x2,
                          const SymMatrix& omega_hat_sqrt);

}  // namespace hdmean
