#include "hdmean/statistics.hpp"

#include "hdmean/errors.hpp"
#include "hdmean/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hdmean {

namespace {

using Index = Eigen::Index;

void require_positive_variances(const Vector& v, const char* who) {
  for (Index j = 0; j < v.size(); ++j) {
    if (!(v(j) > 0.0)) {
      std::ostringstream msg;
      msg << who << ": zero sample variance in column " << j;
      throw NumericalError(msg.str());
    }
  }
}

void require_same_p(const SampleMatrix& x1, const SampleMatrix& x2, const char* who) {
  if (x1.p() != x2.p()) {
    std::ostringstream msg;
    msg << who << ": dimension mismatch (" << x1.p() << " vs " << x2.p() << ")";
    throw std::invalid_argument(msg.str());
  }
}

void require_dim(const SymMatrix& a, std::size_t p, const char* who) {
  if (a.dim() != p) {
    std::ostringstream msg;
    msg << who << ": transform is " << a.dim() << "x" << a.dim() << " but data has p=" << p;
    throw std::invalid_argument(msg.str());
  }
}

bool is_identity(const SymMatrix& a) { return a.mat().isIdentity(0.0); }

// Rows mapped by a symmetric transform: (A x_i)' = x_i' A.
Matrix transform_rows(const Matrix& x, const SymMatrix& a) {
  if (is_identity(a)) return x;
  return x * a.mat();
}

// ||C' C||_F^2 for a centred, scaled n x p matrix, via whichever Gram is smaller.
double gram_trace_sq(const Matrix& c) {
  if (c.rows() < c.cols()) {
    Matrix g = Matrix::Zero(c.rows(), c.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(c);
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g.squaredNorm();
  }
  Matrix g = Matrix::Zero(c.cols(), c.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g.squaredNorm();
}

TestOutcome gumbel_outcome(std::string method, double m, std::size_t p) {
  TestOutcome out;
  out.method = std::move(method);
  out.statistic = m;
  out.normalized = normalize_max(m, p);
  out.law = LimitLaw::GumbelMax;
  out.p_value = limit_sf(LimitLaw::GumbelMax, out.normalized);
  return out;
}

TestOutcome normal_outcome(std::string method, double z) {
  TestOutcome out;
  out.method = std::move(method);
  out.statistic = z;
  out.normalized = z;
  out.law = LimitLaw::StdNormal;
  out.p_value = limit_sf(LimitLaw::StdNormal, z);
  return out;
}

void check_p(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream msg;
    msg << "p-value " << name << "=" << v << " outside [0, 1]";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

TestOutcome t_sr(const SampleMatrix& x) {
  const std::size_t n = x.n();
  const std::size_t p = x.p();
  if (n < 4) {
    throw std::invalid_argument("t_sr: need at least 4 observations");
  }
  const Vector mean = col_means(x);
  Matrix centered = x.values().rowwise() - mean.transpose();
  const Vector var = centered.colwise().squaredNorm().transpose() / static_cast<double>(n - 1);
  require_positive_variances(var, "t_sr");

  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const Vector inv_sd = var.cwiseSqrt().cwiseInverse();
  centered = centered * inv_sd.asDiagonal();
  const double tr_r2 = gram_trace_sq(centered) / ((nd - 1.0) * (nd - 1.0));

  const double quad = nd * mean.cwiseProduct(inv_sd).squaredNorm();
  const double numer = quad - (nd - 1.0) * pd / (nd - 3.0);
  const double var_term = 2.0 * tr_r2 - pd * pd / (nd - 1.0);
  if (!(var_term > 0.0)) {
    throw NumericalError("t_sr: degenerate variance estimate (2 tr R^2 - p^2/(n-1) <= 0)");
  }
  const double correction = 1.0 + tr_r2 / std::pow(pd, 1.5);
  TestOutcome out = normal_outcome("SR", numer / (std::sqrt(var_term) * std::sqrt(correction)));
  out.details["tr_r2"] = tr_r2;
  out.details["quad"] = quad;
  return out;
}

TestOutcome max_stat(const SampleMatrix& x, const SymMatrix& a) {
  if (x.n() < 2) {
    throw std::invalid_argument("max_stat: need at least 2 observations");
  }
  require_dim(a, x.p(), "max_stat");
  Matrix y = transform_rows(x.values(), a);
  const Vector delta = y.colwise().mean().transpose();
  y.rowwise() -= delta.transpose();
  const Vector b = y.colwise().squaredNorm().transpose() / static_cast<double>(x.n() - 1);
  require_positive_variances(b, "max_stat");
  Index arg = 0;
  const double best = delta.cwiseAbs2().cwiseQuotient(b).maxCoeff(&arg);
  TestOutcome out = gumbel_outcome("MAX", static_cast<double>(x.n() - 1) * best, x.p());
  out.details["argmax"] = static_cast<double>(arg);
  return out;
}

TestOutcome fisher_combine(double p_sum, double p_max) {
  check_p(p_sum, "p_sum");
  check_p(p_max, "p_max");
  const double ls = std::log(std::max(p_sum, kPValueFloor));
  const double lm = std::log(std::max(p_max, kPValueFloor));
  TestOutcome out;
  out.method = "FC";
  out.statistic = -2.0 * (lm + ls);
  // Keep exact symmetry in the arguments and avoid -0.0.
  if (out.statistic == 0.0) out.statistic = 0.0;
  out.normalized = out.statistic;
  out.law = LimitLaw::ChiSq4;
  out.p_value = limit_sf(LimitLaw::ChiSq4, out.statistic);
  out.details["p_sum"] = p_sum;
  out.details["p_max"] = p_max;
  return out;
}

TestOutcome min_p_combine(double p_sum, double p_max) {
  check_p(p_sum, "p_sum");
  check_p(p_max, "p_max");
  const double m = std::min(p_sum, p_max);
  TestOutcome out;
  out.method = "MIN";
  out.statistic = m;
  out.normalized = m;
  out.law = LimitLaw::StdNormal;
  out.p_value = -std::expm1(2.0 * std::log1p(-m));
  out.details["p_sum"] = p_sum;
  out.details["p_max"] = p_max;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> default_hc_grid() {
  std::vector<double> g;
  g.reserve(99);
  for (int k = 1; k <= 99; ++k) g.push_back(k / 100.0);
  return g;
}

double hc2_from_tvalues(std::span<const double> t, std::span<const double> s_grid) {
  if (s_grid.empty()) {
    throw std::invalid_argument("hc2: threshold grid is empty");
  }
  const std::size_t p = t.size();
  const double pd = static_cast<double>(p);
  const double logp = std::log(pd);

  std::vector<double> sq(t.size());
  std::transform(t.begin(), t.end(), sq.begin(), [](double v) { return v * v; });
  std::sort(sq.begin(), sq.end(), std::greater<>());
  // tail[k] = sum of the k largest squares.
  std::vector<double> tail(sq.size() + 1, 0.0);
  for (std::size_t k = 0; k < sq.size(); ++k) tail[k + 1] = tail[k] + sq[k];

  double best = -std::numeric_limits<double>::infinity();
  for (double s : s_grid) {
    if (!(s > 0.0 && s < 1.0)) {
      throw std::invalid_argument("hc2: grid values must lie in (0, 1)");
    }
    const double lambda = 2.0 * s * logp;
    const double root = std::sqrt(lambda);
    // Number of squares >= lambda in the descending array.
    const auto count = static_cast<std::size_t>(
        std::upper_bound(sq.begin(), sq.end(), lambda, std::greater<>()) - sq.begin());
    const double t2n = tail[count];
    const double phi = normal_pdf(root);
    const double sf = normal_sf(root);
    const double mu = pd * (2.0 * root * phi + 2.0 * sf);
    const double sigma2 = pd * (2.0 * (lambda * root + 3.0 * root) * phi + 6.0 * sf);
    best = std::max(best, (t2n - mu) / std::sqrt(sigma2));
  }
  return best;
}

TestOutcome hc2_stat(const SampleMatrix& x, std::span<const double> s_grid) {
  if (x.n() < 2) {
    throw std::invalid_argument("hc2: need at least 2 observations");
  }
  if (s_grid.empty()) {
    throw std::invalid_argument("hc2: threshold grid is empty");
  }
  const Vector mean = col_means(x);
  const Vector var = col_variances(x);
  require_positive_variances(var, "hc2");
  const double rn = std::sqrt(static_cast<double>(x.n()));
  std::vector<double> t(x.p());
  for (std::size_t j = 0; j < t.size(); ++j) {
    const auto jj = static_cast<Index>(j);
    t[j] = rn * mean(jj) / std::sqrt(var(jj));
  }
  const double stat = hc2_from_tvalues(t, s_grid);
  const auto null = hc_null_distribution(x.n(), x.p(), s_grid);
  const auto ge = static_cast<double>(null->end() - std::lower_bound(null->begin(), null->end(), stat));

  TestOutcome out;
  out.method = "HC";
  out.statistic = stat;
  out.normalized = stat;
  out.law = LimitLaw::StdNormal;
  out.p_value = (1.0 + ge) / (1.0 + static_cast<double>(null->size()));
  out.details["null_draws"] = static_cast<double>(null->size());
  return out;
}

TestOutcome hc2_stat(const SampleMatrix& x) {
  static const std::vector<double> grid = default_hc_grid();
  return hc2_stat(x, grid);
}

// ---------------------------------------------------------------------------

double default_pe_threshold(std::size_t n, std::size_t p) {
  const double nd = static_cast<double>(n);
  return std::log(std::log(nd)) * std::sqrt(std::log(static_cast<double>(p)) / nd);
}

TestOutcome pe_stat(const SampleMatrix& x, double delta_pn, const SymMatrix& omega_hat) {
  if (!(delta_pn > 0.0)) {
    throw std::invalid_argument("pe_stat: threshold delta_pn must be positive");
  }
  if (x.n() < 2) {
    throw std::invalid_argument("pe_stat: need at least 2 observations");
  }
  require_dim(omega_hat, x.p(), "pe_stat");
  const Vector mean = col_means(x);
  const Vector var = col_variances(x);
  require_positive_variances(var, "pe_stat");

  const double pd = static_cast<double>(x.p());
  double screened = 0.0;
  for (Index j = 0; j < mean.size(); ++j) {
    const double sd = std::sqrt(var(j));
    if (std::abs(mean(j)) > sd * delta_pn) {
      screened += mean(j) * mean(j) / var(j);
    }
  }
  const double j0 = std::sqrt(pd) * screened;
  const double wald = static_cast<double>(x.n()) * mean.dot(omega_hat.mat() * mean);
  const double j1 = (wald - pd) / (2.0 * std::sqrt(pd));
  TestOutcome out = normal_outcome("PE", j0 + j1);
  out.details["J0"] = j0;
  out.details["J1"] = j1;
  return out;
}

TestOutcome fc_one_sample(const SampleMatrix& x, const SymMatrix& max_transform, std::string method) {
  const TestOutcome sum = t_sr(x);
  const TestOutcome mx = max_stat(x, max_transform);
  TestOutcome out = fisher_combine(sum.p_value, mx.p_value);
  out.method = std::move(method);
  out.details["T_sum"] = sum.statistic;
  out.details["M_norm"] = mx.normalized;
  return out;
}

// ---------------------------------------------------------------------------

TestOutcome t_skk(const SampleMatrix& x1, const SampleMatrix& x2) {
  require_same_p(x1, x2, "t_skk");
  const std::size_t n1 = x1.n();
  const std::size_t n2 = x2.n();
  if (n1 < 2 || n2 < 2) {
    throw std::invalid_argument("t_skk: each sample needs at least 2 observations");
  }
  const double a = static_cast<double>(n1);
  const double b = static_cast<double>(n2);
  const double pd = static_cast<double>(x1.p());

  const Vector m1 = col_means(x1);
  const Vector m2 = col_means(x2);
  const Matrix c1 = x1.values().rowwise() - m1.transpose();
  const Matrix c2 = x2.values().rowwise() - m2.transpose();
  const Vector v1 = c1.colwise().squaredNorm().transpose() / (a - 1.0);
  const Vector v2 = c2.colwise().squaredNorm().transpose() / (b - 1.0);
  const Vector d = v1 / a + v2 / b;
  require_positive_variances(d, "t_skk");
  const Vector inv_sd = d.cwiseSqrt().cwiseInverse();

  // S_1/n1 + S_2/n2 = [c1; c2]' [c1; c2] after scaling the blocks by
  // 1/sqrt((n1-1) n1) and 1/sqrt((n2-1) n2).
  Matrix stacked(c1.rows() + c2.rows(), c1.cols());
  stacked.topRows(c1.rows()) = c1 * inv_sd.asDiagonal() / std::sqrt((a - 1.0) * a);
  stacked.bottomRows(c2.rows()) = c2 * inv_sd.asDiagonal() / std::sqrt((b - 1.0) * b);
  const double tr_r2 = gram_trace_sq(stacked);

  const double tr1 = v1.cwiseQuotient(d).sum();
  const double tr2 = v2.cwiseQuotient(d).sum();
  const double sigma2 = 2.0 * tr_r2 / pd - 2.0 * tr1 * tr1 / (pd * (a - 1.0) * a * a) -
                        2.0 * tr2 * tr2 / (pd * (b - 1.0) * b * b);
  if (!(sigma2 > 0.0)) {
    throw NumericalError("t_skk: degenerate variance estimate (sigma^2 <= 0)");
  }
  const double c_pn = 1.0 + tr_r2 / std::pow(pd, 1.5);
  const Vector diff = m1 - m2;
  const double quad = diff.cwiseProduct(inv_sd).squaredNorm();
  TestOutcome out = normal_outcome("SKK", (quad - pd) / std::sqrt(pd * sigma2 * c_pn));
  out.details["tr_r2"] = tr_r2;
  out.details["sigma2"] = sigma2;
  out.details["quad"] = quad;
  return out;
}

TestOutcome w_max_two_sample(const SampleMatrix& x1, const SampleMatrix& x2,
                             const SymMatrix& omega_hat_sqrt) {
  require_same_p(x1, x2, "w_max_two_sample");
  require_dim(omega_hat_sqrt, x1.p(), "w_max_two_sample");
  const double a = static_cast<double>(x1.n());
  const double b = static_cast<double>(x2.n());
  const Vector w = omega_hat_sqrt.mat() * (col_means(x1) - col_means(x2));
  Index arg = 0;
  const double best = w.cwiseAbs2().maxCoeff(&arg);
  TestOutcome out = gumbel_outcome("MAX", a * b / (a + b) * best, x1.p());
  out.details["argmax"] = static_cast<double>(arg);
  return out;
}

TestOutcome max_stat_two_sample(const SampleMatrix& x1, const SampleMatrix& x2, const SymMatrix& a) {
  require_same_p(x1, x2, "max_stat_two_sample");
  require_dim(a, x1.p(), "max_stat_two_sample");
  const std::size_t n1 = x1.n();
  const std::size_t n2 = x2.n();
  if (n1 < 2 || n2 < 2) {
    throw std::invalid_argument("max_stat_two_sample: each sample needs at least 2 observations");
  }
  Matrix y1 = transform_rows(x1.values(), a);
  Matrix y2 = transform_rows(x2.values(), a);
  const Vector m1 = y1.colwise().mean().transpose();
  const Vector m2 = y2.colwise().mean().transpose();
  y1.rowwise() -= m1.transpose();
  y2.rowwise() -= m2.transpose();
  const Vector pooled = (y1.colwise().squaredNorm() + y2.colwise().squaredNorm()).transpose() /
                        static_cast<double>(n1 + n2 - 2);
  require_positive_variances(pooled, "max_stat_two_sample");
  const Vector delta = m1 - m2;
  Index arg = 0;
  const double best = delta.cwiseAbs2().cwiseQuotient(pooled).maxCoeff(&arg);
  const double ad = static_cast<double>(n1);
  const double bd = static_cast<double>(n2);
  TestOutcome out = gumbel_outcome("MAX", ad * bd / (ad + bd) * best, x1.p());
  out.details["argmax"] = static_cast<double>(arg);
  return out;
}

TestOutcome fc_two_sample(const SampleMatrix& x1, const SampleMatrix& x2,
                          const SymMatrix& omega_hat_sqrt) {
  const TestOutcome sum = t_skk(x1, x2);
  const TestOutcome mx = w_max_two_sample(x1, x2, omega_hat_sqrt);
  TestOutcome out = fisher_combine(sum.p_value, mx.p_value);
  out.details["T_sum"] = sum.statistic;
  out.details["M_norm"] = mx.normalized;
  return out;
}

}  // namespace hdmean
