#include "hdmean/models.hpp"

#include "hdmean/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hdmean {

namespace {

using Index = Eigen::Index;

double uniform01(RngStream& s) {
  const std::uint64_t hi = s();
  const std::uint64_t lo = s();
  return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// 2x2 blocks with unit diagonal and `off` within each block; an odd trailing
// coordinate is its own 1x1 block.
Matrix paired_blocks(Index p, double off) {
  Matrix m = Matrix::Identity(p, p);
  for (Index k = 0; k + 1 < p; k += 2) {
    m(k, k + 1) = off;
    m(k + 1, k) = off;
  }
  return m;
}

Matrix geometric_toeplitz(Index p, double rho) {
  Matrix m(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      m(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return m;
}

Matrix banded_precision(Index p) {
  static constexpr double kBand[] = {2.0, 0.8, 0.4, 0.4, 0.2};
  Matrix m = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index k = 0; k < 5 && i + k < p; ++k) {
      m(i, i + k) = kBand[k];
      m(i + k, i) = kBand[k];
    }
  }
  return m;
}

Matrix polynomial_decay(Index p) {
  Matrix m = Matrix::Identity(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (i != j) {
        m(i, j) = std::pow(static_cast<double>(std::abs(i - j)), -5.0) / 2.0;
      }
    }
  }
  return m;
}

Matrix sparse_perturbation(Index p, RngStream stream) {
  Matrix e = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      const bool on = uniform01(stream) < 0.3;
      const double v = -0.2 + 0.4 * uniform01(stream);
      if (on) {
        e(i, j) = v;
        e(j, i) = v;
      }
    }
  }
  return e;
}

// Three orthonormal p-vectors: Gram-Schmidt (applied twice) on seeded normals.
Matrix orthonormal_triple(Index p, RngStream stream) {
  std::normal_distribution<double> normal;
  Matrix u(p, 3);
  for (Index c = 0; c < 3; ++c) {
    for (Index i = 0; i < p; ++i) {
      u(i, c) = normal(stream);
    }
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (Index c = 0; c < 3; ++c) {
      for (Index k = 0; k < c; ++k) {
        u.col(c) -= u.col(k).dot(u.col(c)) * u.col(k);
      }
      u.col(c).normalize();
    }
  }
  return u;
}

Matrix tridiagonal_half(Index p) {
  Matrix f = Matrix::Identity(p, p);
  for (Index i = 0; i + 1 < p; ++i) {
    f(i, i + 1) = 0.5;
    f(i + 1, i) = 0.5;
  }
  return f;
}

Matrix scale_both(const Vector& s, const Matrix& m) { return s.asDiagonal() * m * s.asDiagonal(); }

void require_positive_definite(const SymMatrix& sigma, CovModel model) {
  const EigenDecomp e = eigh(sigma);
  const double lmax = e.values(0);
  const double lmin = e.values(e.values.size() - 1);
  if (lmin <= -1e-8 * std::abs(lmax) || lmin <= 0.0) {
    std::ostringstream msg;
    msg << "realize_model: " << model_name(model)
        << " Sigma is not positive definite (min eigenvalue " << lmin << ")";
    throw NumericalError(msg.str());
  }
}

}  // namespace

std::string_view model_name(CovModel m) {
  static constexpr std::string_view kNames[] = {"M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8"};
  return kNames[static_cast<int>(m) - 1];
}

CovModel parse_model(std::string_view s) {
  std::string t = lower(s);
  if (!t.empty() && t.front() == 'm') {
    t.erase(t.begin());
  }
  if (t.size() == 1 && t[0] >= '1' && t[0] <= '8') {
    return static_cast<CovModel>(t[0] - '0');
  }
  throw std::invalid_argument("unknown covariance model '" + std::string(s) + "'");
}

ModelPrimitive model_primitive(CovModel m) {
  switch (m) {
    case CovModel::M3:
    case CovModel::M4:
      return ModelPrimitive::Omega;
    case CovModel::M5:
      return ModelPrimitive::OmegaFactor;
    default:
      return ModelPrimitive::Sigma;
  }
}

ModelRealization realize_model(const CovarianceSpec& spec) {
  if (spec.dim < 4) {
    throw std::invalid_argument("realize_model: dim must be at least 4");
  }
  const auto p = static_cast<Index>(spec.dim);
  const RngStream root(mix64(spec.seed_material), 0x5EEDull);

  Vector d_scale = Vector::Ones(p);
  const bool uses_d = static_cast<int>(spec.model) >= 4;
  if (uses_d) {
    RngStream ds = root.fork(1);
    for (Index i = 0; i < p; ++i) {
      d_scale(i) = 1.0 + 2.0 * uniform01(ds);
    }
  }
  const Vector d_half = d_scale.cwiseSqrt();

  std::optional<SymMatrix> sigma;
  std::optional<SymMatrix> omega;
  double delta = 0.0;

  switch (spec.model) {
    case CovModel::M1:
      sigma = SymMatrix(paired_blocks(p, 0.8));
      break;
    case CovModel::M2:
      sigma = SymMatrix(geometric_toeplitz(p, 0.6));
      break;
    case CovModel::M3:
      omega = SymMatrix(banded_precision(p));
      sigma = inverse_psd(*omega);
      break;
    case CovModel::M4: {
      const SymMatrix omega0(geometric_toeplitz(p, 0.6));
      sigma = SymMatrix(scale_both(d_half, inverse_psd(omega0).mat()), 1e-8);
      omega = SymMatrix(scale_both(d_half.cwiseInverse(), omega0.mat()), 1e-8);
      break;
    }
    case CovModel::M5: {
      const Matrix b = paired_blocks(p, 0.8);
      omega = SymMatrix(scale_both(d_half, b * b), 1e-8);
      sigma = inverse_psd(*omega);
      break;
    }
    case CovModel::M6: {
      const Matrix base = scale_both(d_half, paired_blocks(p, 0.8)) + sparse_perturbation(p, root.fork(2));
      const EigenDecomp e = eigh(SymMatrix(base));
      delta = std::abs(e.values(p - 1)) + 0.05;
      sigma = SymMatrix(base + delta * Matrix::Identity(p, p));
      break;
    }
    case CovModel::M7:
      sigma = SymMatrix(scale_both(d_half, polynomial_decay(p)));
      break;
    case CovModel::M8: {
      const Matrix u = orthonormal_triple(p, root.fork(3));
      sigma = SymMatrix(scale_both(d_half, tridiagonal_half(p) + u * u.transpose()), 1e-8);
      break;
    }
  }

  require_positive_definite(*sigma, spec.model);
  if (!omega) {
    omega = inverse_psd(*sigma);
  }

  ModelRealization out{spec,
                       *sigma,
                       *omega,
                       sqrt_psd(*omega),
                       sqrt_psd(*sigma),
                       SymMatrix::identity(spec.dim),
                       correlation_of(*sigma),
                       d_scale,
                       delta};
  const Vector inv_diag = sigma->diag().cwiseInverse();
  out.a_matrix = SymMatrix(out.sigma_sqrt.mat() * inv_diag.asDiagonal() * out.sigma_sqrt.mat(), 1e-6);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view error_name(ErrorDist d) {
  switch (d) {
    case ErrorDist::StdNormal:
      return "normal";
    case ErrorDist::StdT5:
      return "t5";
    case ErrorDist::StdMixNormal:
      return "mixture";
  }
  return "?";
}

ErrorDist parse_error(std::string_view s) {
  const std::string t = lower(s);
  if (t == "normal" || t == "1") return ErrorDist::StdNormal;
  if (t == "t5" || t == "t" || t == "2") return ErrorDist::StdT5;
  if (t == "mixture" || t == "mix" || t == "3") return ErrorDist::StdMixNormal;
  throw std::invalid_argument("unknown error distribution '" + std::string(s) + "'");
}

double fourth_moment(ErrorDist d) {
  switch (d) {
    case ErrorDist::StdNormal:
      return 3.0;
    case ErrorDist::StdT5:
      // E t_5^4 = 3 * 25 / (3 * 1) = 25, divided by (5/3)^2.
      return 9.0;
    case ErrorDist::StdMixNormal:
      return (0.9 * 3.0 + 0.1 * 3.0 * 81.0) / (1.8 * 1.8);
  }
  return 0.0;
}

namespace {

// Stateful sampler so that a fill loop reuses the cached second normal.
class ErrorSampler {
 public:
  explicit ErrorSampler(ErrorDist d) : dist_(d) {}

  double operator()(RngStream& s) {
    switch (dist_) {
      case ErrorDist::StdNormal:
        return normal_(s);
      case ErrorDist::StdT5:
        return student_(s) * kT5Scale;
      case ErrorDist::StdMixNormal: {
        const double z = normal_(s);
        return (uniform01(s) < 0.1 ? 3.0 * z : z) * kMixScale;
      }
    }
    return 0.0;
  }

 private:
  static inline const double kT5Scale = 1.0 / std::sqrt(5.0 / 3.0);
  static inline const double kMixScale = 1.0 / std::sqrt(1.8);

  ErrorDist dist_;
  std::normal_distribution<double> normal_;
  std::student_t_distribution<double> student_{5.0};
};

}  // namespace

double draw_error(ErrorDist d, RngStream& stream) { return ErrorSampler(d)(stream); }

SampleMatrix::SampleMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw std::invalid_argument("SampleMatrix: need at least one row and one column");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("SampleMatrix: non-finite entry");
  }
}

bool is_null_signal(const SignalSpec& s) {
  return std::holds_alternative<NullSignal>(s) || signal_support(s) == 0;
}

std::size_t signal_support(const SignalSpec& s) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, NullSignal>) {
          return 0;
        } else {
          return v.m;
        }
      },
      s);
}

SampleMatrix sample_errors(ErrorDist dist, std::size_t n, std::size_t p, RngStream& stream) {
  if (n < 1 || p < 1) {
    throw std::invalid_argument("sample_errors: n and p must be positive");
  }
  Matrix e(static_cast<Index>(n), static_cast<Index>(p));
  ErrorSampler draw(dist);
  // Row-major fill order so row i only depends on draws for rows <= i.
  for (Index i = 0; i < e.rows(); ++i) {
    for (Index j = 0; j < e.cols(); ++j) {
      e(i, j) = draw(stream);
    }
  }
  return SampleMatrix(std::move(e));
}

namespace {

void check_support(std::size_t m, std::size_t p) {
  if (m > p) {
    std::ostringstream msg;
    msg << "signal support m=" << m << " exceeds dimension p=" << p;
    throw std::invalid_argument(msg.str());
  }
}

Vector local_shift(const ModelRealization& real, const LocalAlternative& la, double n_eff) {
  const auto p = static_cast<Index>(real.spec.dim);
  check_support(la.m, real.spec.dim);
  Vector tilde = Vector::Zero(p);
  const double mag = la.tau * std::sqrt(std::log(static_cast<double>(p)) / n_eff);
  tilde.head(static_cast<Index>(la.m)).setConstant(mag);
  return real.sigma_sqrt.mat() * tilde;
}

}  // namespace

Vector one_sample_mean(const ModelRealization& real, const SignalSpec& signal, std::size_t n) {
  const auto p = static_cast<Index>(real.spec.dim);
  if (std::holds_alternative<NullSignal>(signal)) {
    return Vector::Zero(p);
  }
  if (const auto* s = std::get_if<OneSampleScaled>(&signal)) {
    check_support(s->m, real.spec.dim);
    if (!(s->norm_sq > 0.0)) {
      throw std::invalid_argument("OneSampleScaled: norm_sq must be positive");
    }
    Vector mu = Vector::Zero(p);
    if (s->m == 0) {
      return mu;
    }
    const auto m = static_cast<Index>(s->m);
    mu.head(m) = real.sigma.diag().head(m).cwiseSqrt().cwiseInverse();
    mu *= std::sqrt(s->norm_sq / mu.squaredNorm());
    return mu;
  }
  if (const auto* la = std::get_if<LocalAlternative>(&signal)) {
    return local_shift(real, *la, static_cast<double>(n));
  }
  throw std::invalid_argument("gen_one_sample: two-sample signal given to a one-sample generator");
}

SampleMatrix gen_one_sample(const ModelRealization& real, ErrorDist dist, std::size_t n,
                            const SignalSpec& signal, RngStream& stream) {
  const Vector mu = one_sample_mean(real, signal, n);
  const SampleMatrix eps = sample_errors(dist, n, real.spec.dim, stream);
  Matrix x = eps.values() * real.sigma_sqrt.mat();
  if (!mu.isZero(0.0)) {
    x.rowwise() += mu.transpose();
  }
  return SampleMatrix(std::move(x));
}

Vector two_sample_shift(const ModelRealization& real, const SignalSpec& signal, std::size_t n1,
                        std::size_t n2, RngStream& stream) {
  const auto p = static_cast<Index>(real.spec.dim);
  if (std::holds_alternative<NullSignal>(signal)) {
    return Vector::Zero(p);
  }
  if (const auto* r = std::get_if<TwoSampleRademacher>(&signal)) {
    check_support(r->m, real.spec.dim);
    Vector theta = Vector::Zero(p);
    if (r->m == 0) {
      return theta;
    }
    const double mag = 1.0 / std::sqrt(static_cast<double>(r->m));
    for (Index i = 0; i < static_cast<Index>(r->m); ++i) {
      theta(i) = (stream() & 1u) ? mag : -mag;
    }
    return real.sigma_sqrt.mat() * theta;
  }
  if (const auto* la = std::get_if<LocalAlternative>(&signal)) {
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);
    return local_shift(real, *la, a * b / (a + b));
  }
  throw std::invalid_argument("gen_two_sample: one-sample signal given to a two-sample generator");
}

std::pair<SampleMatrix, SampleMatrix> gen_two_sample(const ModelRealization& real, ErrorDist dist,
                                                     std::size_t n1, std::size_t n2,
                                                     const SignalSpec& signal, RngStream& stream) {
  RngStream theta_stream = stream.fork(3);
  const Vector shift = two_sample_shift(real, signal, n1, n2, theta_stream);
  RngStream s1 = stream.fork(1);
  RngStream s2 = stream.fork(2);
  Matrix x1 = sample_errors(dist, n1, real.spec.dim, s1).values() * real.sigma_sqrt.mat();
  Matrix x2 = sample_errors(dist, n2, real.spec.dim, s2).values() * real.sigma_sqrt.mat();
  if (!shift.isZero(0.0)) {
    x1.rowwise() += shift.transpose();
  }
  return {SampleMatrix(std::move(x1)), SampleMatrix(std::move(x2))};
}

}  // namespace hdmean
