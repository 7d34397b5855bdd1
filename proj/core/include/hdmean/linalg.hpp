#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace hdmean {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric p x p matrix with exactly mirrored entries.
///
/// Holds covariance, precision, the transform A = Sigma^{1/2} D^{-1} Sigma^{1/2}
/// and correlation matrices. Construction rejects non-finite input and
/// matrices whose asymmetry exceeds the tolerance; accepted input is
/// symmetrised as (M + M^T) / 2 so that m(i,j) == m(j,i) bit for bit.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Throws std::invalid_argument if m is not square, has non-finite entries,
  /// or max|m - m^T| > asym_tol * max(1, max|m|).
  explicit SymMatrix(Matrix m, double asym_tol = 1e-9);

  static SymMatrix identity(std::size_t p);
  static SymMatrix zero(std::size_t p);
  static SymMatrix diagonal(const Vector& d);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& mat() const { return m_; }
  Vector diag() const { return m_.diagonal(); }
  double max_abs() const;

 private:
  Matrix m_;
};

/// Eigenvalues in descending order; vectors(:, k) belongs to values(k).
struct EigenDecomp {
  Vector values;
  Matrix vectors;
};

EigenDecomp eigh(const SymMatrix& m);

/// Default clamp floor for sqrt_psd: 1e-10 times the largest eigenvalue.
inline constexpr double kDefaultClampRelative = 1e-10;

/// Symmetric PSD square root via the spectral decomposition. Eigenvalues below
/// clamp_floor are raised to clamp_floor before taking roots; when clamp_floor
/// is not given it defaults to kDefaultClampRelative * max eigenvalue.
/// Eigenvalues below -1e-8 * max|lambda| are treated as genuinely negative and
/// raise NumericalError.
SymMatrix sqrt_psd(const SymMatrix& m, std::optional<double> clamp_floor = std::nullopt);

/// Inverse of a positive definite matrix. Raises NumericalError when the
/// smallest eigenvalue is at most 1e-10 times the largest.
SymMatrix inverse_psd(const SymMatrix& m);

/// D^{-1/2} m D^{-1/2} with D = diag(m): unit diagonal. Raises
/// std::invalid_argument naming the first non-positive diagonal entry.
SymMatrix correlation_of(const SymMatrix& sigma);

/// sum_{i,j} m_ij^2, which is tr(m^2) for symmetric m.
double trace_sq(const SymMatrix& m);

/// Congruence  l * m * l^T  for a symmetric l, returned as a SymMatrix.
SymMatrix sandwich(const SymMatrix& l, const SymMatrix& m);

}  // namespace hdmean
