#pragma once

#include "hdmean/linalg.hpp"
#include "hdmean/models.hpp"

#include <optional>
#include <string_view>
#include <variant>

namespace hdmean {

/// Unbiased (n-1 denominator) sample covariance. Requires n >= 2.
SymMatrix sample_cov(const SampleMatrix& x);

/// Column means.
Vector col_means(const SampleMatrix& x);

/// Column variances with the n-1 denominator (the diagonal of sample_cov,
/// without forming the full matrix). Requires n >= 2.
Vector col_variances(const SampleMatrix& x);

/// Use the population precision matrix supplied with the model realisation.
struct OraclePrecision {};

/// Invert S + ridge * I. With `relative` set the ridge is scaled by tr(S)/p,
/// so {1e-3, true} is the data-analysis default.
struct InvertRidged {
  double ridge = 0.0;
  bool relative = false;
};

using PrecisionMode = std::variant<OraclePrecision, InvertRidged>;

std::string_view precision_mode_name(const PrecisionMode& mode);

/// Default ridge for data analysis: 1e-3 * tr(S) / p.
double default_ridge(const SymMatrix& s);

struct PrecisionPlugin {
  SymMatrix omega_hat;
  SymMatrix omega_hat_sqrt;
};

/// Oracle mode passes `oracle` through (and its square root, computed unless
/// `oracle_sqrt` is given). InvertRidged inverts s + ridge I; a singular
/// result raises NumericalError.
PrecisionPlugin precision_plugin(const PrecisionMode& mode, const SymMatrix& s,
                                 const std::optional<SymMatrix>& oracle,
                                 const std::optional<SymMatrix>& oracle_sqrt = std::nullopt);

/// D_hat = D_1 / n1 + D_2 / n2 with D_k = diag(S_k). Returned as a diagonal
/// SymMatrix. Requires matching dimensions and n1, n2 >= 2.
SymMatrix pooled_diag_two_sample(const SymMatrix& s1, const SymMatrix& s2, std::size_t n1,
                                 std::size_t n2);

}  // namespace hdmean
