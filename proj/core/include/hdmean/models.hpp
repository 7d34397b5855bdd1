#pragma once

#include "hdmean/linalg.hpp"
#include "hdmean/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace hdmean {

// ---------------------------------------------------------------------------
// Covariance models
// ---------------------------------------------------------------------------

/// The eight covariance structures used in the simulation study.
///
///  M1  block-diagonal Sigma, 2x2 blocks with off-diagonal 0.8
///  M2  Sigma_ij = 0.6^|i-j|
///  M3  banded Omega (bandwidth 4), Sigma = Omega^{-1}
///  M4  Omega0_ij = 0.6^|i-j|, Sigma = D^{1/2} Omega0^{-1} D^{1/2}
///  M5  Omega^{1/2}-type block factor B, Omega = D^{1/2} B B D^{1/2}
///  M6  D^{1/2} Sigma* D^{1/2} + E + delta I, E sparse random symmetric
///  M7  Sigma*_ij = |i-j|^{-5} / 2 off the diagonal, scaled by D
///  M8  D^{1/2} (F + u1 u1' + u2 u2' + u3 u3') D^{1/2}, F tridiagonal
///
/// D = diag(d_ii), d_ii ~ Unif(1, 3), drawn once per realisation.
enum class CovModel { M1 = 1, M2, M3, M4, M5, M6, M7, M8 };

std::string_view model_name(CovModel m);
/// Accepts "M1".."M8" (case-insensitive) or "1".."8".
CovModel parse_model(std::string_view s);

/// Which matrix a model defines directly; the others are derived from it.
enum class ModelPrimitive { Sigma, Omega, OmegaFactor };
ModelPrimitive model_primitive(CovModel m);

struct CovarianceSpec {
  CovModel model = CovModel::M1;
  std::size_t dim = 0;
  /// Seeds D (models 4-8), E (model 6) and the u-vectors (model 8).
  std::uint64_t seed_material = 0;
};

/// All population matrices belonging to one realised covariance model.
struct ModelRealization {
  CovarianceSpec spec;
  SymMatrix sigma;
  SymMatrix omega;
  SymMatrix omega_sqrt;
  SymMatrix sigma_sqrt;
  /// A = Sigma^{1/2} D_Sigma^{-1} Sigma^{1/2}, D_Sigma = diag(Sigma).
  SymMatrix a_matrix;
  /// Population correlation D_Sigma^{-1/2} Sigma D_Sigma^{-1/2}.
  SymMatrix r_matrix;
  /// The Unif(1,3) scaling draws (all ones for models 1-3).
  Vector d_scale;
  /// Model 6 ridge; zero elsewhere.
  double ridge_delta = 0.0;
};

/// Deterministic in (model, dim, seed_material). Throws std::invalid_argument
/// for dim < 4 and NumericalError when the realised Sigma is not positive
/// definite.
ModelRealization realize_model(const CovarianceSpec& spec);

// ---------------------------------------------------------------------------
// Error laws
// ---------------------------------------------------------------------------

/// Standardised (mean 0, variance 1) scalar error laws.
enum class ErrorDist {
  StdNormal,     ///< N(0,1)
  StdT5,         ///< t(5) / sqrt(5/3)
  StdMixNormal,  ///< {0.9 N(0,1) + 0.1 N(0,9)} / sqrt(1.8)
};

std::string_view error_name(ErrorDist d);
/// Accepts "normal", "t5", "mixture" and the numeric labels "1", "2", "3".
ErrorDist parse_error(std::string_view s);
/// E(z^4): 3, 9 and 27 / 3.24 respectively.
double fourth_moment(ErrorDist d);

double draw_error(ErrorDist d, RngStream& stream);

// ---------------------------------------------------------------------------
// Samples and signals
// ---------------------------------------------------------------------------

/// n x p observation matrix, one subject per row. Entries must be finite.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  explicit SampleMatrix(Matrix values);

  std::size_t n() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

struct NullSignal {};

/// mu = kappa (1/sqrt(sigma_11), ..., 1/sqrt(sigma_mm), 0, ..., 0) with
/// kappa chosen so that ||mu||^2 = norm_sq.
struct OneSampleScaled {
  std::size_t m = 0;
  double norm_sq = 0.5;
};

/// mu_1 - mu_2 = Sigma^{1/2} theta, theta = (t_1, ..., t_m, 0, ...)/sqrt(m)
/// with t_i = +-1 equiprobable, redrawn on every call.
struct TwoSampleRademacher {
  std::size_t m = 0;
};

/// Local alternative with a sparse transformed mean: Omega^{1/2} mu (or
/// Omega^{1/2}(mu_1 - mu_2)) has m non-zero entries equal to
/// tau * sqrt(log(p) / n_eff), n_eff = n or n1 n2 / (n1 + n2). Equivalent to
/// mu = delta / sqrt(n p) with delta = sqrt(n p) Sigma^{1/2} mu_tilde.
struct LocalAlternative {
  std::size_t m = 0;
  double tau = 1.0;
};

using SignalSpec = std::variant<NullSignal, OneSampleScaled, TwoSampleRademacher, LocalAlternative>;

bool is_null_signal(const SignalSpec& s);
/// Number of nonzero coordinates, 0 for the null.
std::size_t signal_support(const SignalSpec& s);

/// n x p matrix of i.i.d. draws from dist.
SampleMatrix sample_errors(ErrorDist dist, std::size_t n, std::size_t p, RngStream& stream);

/// Mean vector for OneSampleScaled / LocalAlternative (one-sample scaling).
Vector one_sample_mean(const ModelRealization& real, const SignalSpec& signal, std::size_t n);

/// Rows mu + Sigma^{1/2} eps_i. Accepts Null, OneSampleScaled, LocalAlternative.
SampleMatrix gen_one_sample(const ModelRealization& real, ErrorDist dist, std::size_t n,
                            const SignalSpec& signal, RngStream& stream);

/// Mean difference mu_1 - mu_2 for TwoSampleRademacher / LocalAlternative.
/// Draws theta from stream for the Rademacher case.
Vector two_sample_shift(const ModelRealization& real, const SignalSpec& signal, std::size_t n1,
                        std::size_t n2, RngStream& stream);

/// First sample carries the shift, second is centred; shared Sigma.
std::pair<SampleMatrix, SampleMatrix> gen_two_sample(const ModelRealization& real, ErrorDist dist,
                                                     std::size_t n1, std::size_t n2,
                                                     const SignalSpec& signal, RngStream& stream);

}  // namespace hdmean
