#include "hdmean/estimators.hpp"

#include "hdmean/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace hdmean {

SymMatrix sample_cov(const SampleMatrix& x) {
  if (x.n() < 2) {
    throw std::invalid_argument("sample_cov: need at least two observations");
  }
  const Matrix centered = x.values().rowwise() - x.values().colwise().mean();
  const auto p = static_cast<Eigen::Index>(x.p());
  Matrix s = Matrix::Zero(p, p);
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(x.n() - 1));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return SymMatrix(std::move(s));
}

Vector col_means(const SampleMatrix& x) { return x.values().colwise().mean().transpose(); }

Vector col_variances(const SampleMatrix& x) {
  if (x.n() < 2) {
    throw std::invalid_argument("col_variances: need at least two observations");
  }
  const Matrix centered = x.values().rowwise() - x.values().colwise().mean();
  return centered.colwise().squaredNorm().transpose() / static_cast<double>(x.n() - 1);
}

std::string_view precision_mode_name(const PrecisionMode& mode) {
  return std::holds_alternative<OraclePrecision>(mode) ? "oracle" : "invert_ridged";
}

double default_ridge(const SymMatrix& s) {
  return 1e-3 * s.mat().trace() / static_cast<double>(s.dim());
}

PrecisionPlugin precision_plugin(const PrecisionMode& mode, const SymMatrix& s,
                                 const std::optional<SymMatrix>& oracle,
                                 const std::optional<SymMatrix>& oracle_sqrt) {
  if (std::holds_alternative<OraclePrecision>(mode)) {
    if (!oracle) {
      throw std::invalid_argument("precision_plugin: oracle mode requires a population precision matrix");
    }
    if (oracle->dim() != s.dim()) {
      throw std::invalid_argument("precision_plugin: oracle dimension mismatch");
    }
    return {*oracle, oracle_sqrt ? *oracle_sqrt : sqrt_psd(*oracle)};
  }
  const InvertRidged& cfg = std::get<InvertRidged>(mode);
  if (!std::isfinite(cfg.ridge) || cfg.ridge < 0.0) {
    throw std::invalid_argument("precision_plugin: ridge must be finite and non-negative");
  }
  const double ridge = cfg.relative ? cfg.ridge * s.mat().trace() / static_cast<double>(s.dim()) : cfg.ridge;
  const auto p = static_cast<Eigen::Index>(s.dim());
  const SymMatrix regularised(s.mat() + ridge * Matrix::Identity(p, p));
  SymMatrix omega_hat = inverse_psd(regularised);
  SymMatrix root = sqrt_psd(omega_hat);
  return {std::move(omega_hat), std::move(root)};
}

SymMatrix pooled_diag_two_sample(const SymMatrix& s1, const SymMatrix& s2, std::size_t n1,
                                 std::size_t n2) {
  if (s1.dim() != s2.dim()) {
    throw std::invalid_argument("pooled_diag_two_sample: dimension mismatch");
  }
  if (n1 < 2 || n2 < 2) {
    throw std::invalid_argument("pooled_diag_two_sample: sample sizes must be at least 2");
  }
  const Vector d = s1.diag() / static_cast<double>(n1) + s2.diag() / static_cast<double>(n2);
  return SymMatrix::diagonal(d);
}

}  // namespace hdmean
