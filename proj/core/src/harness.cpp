#include "hdmean/harness.hpp"

#include "hdmean/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <memory>
#include <span>
#include <stdexcept>
#include <thread>

namespace hdmean {

namespace {

using Index = Eigen::Index;

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw std::invalid_argument(field + ": " + why);
}

}  // namespace

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

std::string_view problem_name(Problem p) {
  return p == Problem::OneSample ? "one_sample" : "two_sample";
}

Problem parse_problem(std::string_view s) {
  if (s == "one_sample" || s == "one-sample" || s == "one") return Problem::OneSample;
  if (s == "two_sample" || s == "two-sample" || s == "two") return Problem::TwoSample;
  throw std::invalid_argument("unknown problem '" + std::string(s) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::SR: return "SR";
    case Method::SKK: return "SKK";
    case Method::MAX1: return "MAX1";
    case Method::MAX2: return "MAX2";
    case Method::MAX3: return "MAX3";
    case Method::FC: return "FC";
    case Method::FC2: return "FC2";
    case Method::FC3: return "FC3";
    case Method::MIN: return "MIN";
    case Method::HC: return "HC";
    case Method::PE: return "PE";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  static constexpr Method kAll[] = {Method::SR,  Method::SKK, Method::MAX1, Method::MAX2,
                                    Method::MAX3, Method::FC,  Method::FC2,  Method::FC3,
                                    Method::MIN, Method::HC,  Method::PE};
  const std::string u = upper(s);
  for (Method m : kAll) {
    if (u == method_name(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

bool method_supported(Method m, Problem p) {
  switch (m) {
    case Method::SR:
    case Method::HC:
    case Method::PE:
      return p == Problem::OneSample;
    case Method::SKK:
      return p == Problem::TwoSample;
    default:
      return true;
  }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void validate(const SimConfig& c) {
  if (c.p < 4) bad_field("p", "must be at least 4");
  if (c.problem == Problem::OneSample) {
    if (c.n < 4) bad_field("n", "must be at least 4");
  } else {
    if (c.n1 < 2) bad_field("n1", "must be at least 2");
    if (c.n2 < 2) bad_field("n2", "must be at least 2");
  }
  if (c.reps < 1) bad_field("reps", "must be at least 1");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) bad_field("alpha", "must lie in (0, 1]");
  if (c.methods.empty()) bad_field("methods", "must not be empty");
  for (Method m : c.methods) {
    if (!method_supported(m, c.problem)) {
      bad_field("methods", std::string(method_name(m)) + " is not available for " +
                               std::string(problem_name(c.problem)));
    }
  }
  const std::size_t m = signal_support(c.signal);
  if (m > c.p) bad_field("signal.m", "exceeds p");
  if (c.problem == Problem::OneSample && std::holds_alternative<TwoSampleRademacher>(c.signal)) {
    bad_field("signal.kind", "two-sample signal in a one-sample experiment");
  }
  if (c.problem == Problem::TwoSample && std::holds_alternative<OneSampleScaled>(c.signal)) {
    bad_field("signal.kind", "one-sample signal in a two-sample experiment");
  }
  if (const auto* s = std::get_if<OneSampleScaled>(&c.signal); s && !(s->norm_sq > 0.0)) {
    bad_field("signal.norm_sq", "must be positive");
  }
  if (const auto* r = std::get_if<InvertRidged>(&c.precision); r && !(r->ridge >= 0.0 && std::isfinite(r->ridge))) {
    bad_field("precision.ridge", "must be finite and non-negative");
  }
  for (double s : c.hc_grid) {
    if (!(s > 0.0 && s < 1.0)) bad_field("hc_grid", "values must lie in (0, 1)");
  }
}

CovarianceSpec covariance_spec(const SimConfig& c) { return {c.model, c.p, c.model_seed}; }

const MethodRate& SizeReport::at(Method m) const {
  for (const auto& r : rates) {
    if (r.method == m) return r;
  }
  throw std::out_of_range("SizeReport: method not in report");
}

const std::vector<double>& PowerCurve::at(Method m) const {
  for (std::size_t k = 0; k < methods.size(); ++k) {
    if (methods[k] == m) return rates[k];
  }
  throw std::out_of_range("PowerCurve: method not in curve");
}

// ---------------------------------------------------------------------------
// Parallel driver
// ---------------------------------------------------------------------------

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Per-replication evaluation
// ---------------------------------------------------------------------------

namespace {

struct Context {
  const SimConfig& cfg;
  ModelRealization real;
  std::vector<double> hc_grid;
  double pe_delta;
  SymMatrix identity;
  PrecisionPlugin oracle;

  explicit Context(const SimConfig& c)
      : cfg(c),
        real(realize_model(covariance_spec(c))),
        hc_grid(c.hc_grid.empty() ? default_hc_grid() : c.hc_grid),
        pe_delta(c.pe_threshold > 0.0 ? c.pe_threshold : default_pe_threshold(c.n, c.p)),
        identity(SymMatrix::identity(c.p)),
        oracle{real.omega, real.omega_sqrt} {}
};

SymMatrix pooled_cov(const SampleMatrix& x1, const SampleMatrix& x2) {
  const double a = static_cast<double>(x1.n() - 1);
  const double b = static_cast<double>(x2.n() - 1);
  return SymMatrix((a * sample_cov(x1).mat() + b * sample_cov(x2).mat()) / (a + b));
}

// Computes each constituent at most once per data set. The precision plug-in
// is requested only by methods that need it.
class Evaluator {
 public:
  using PrecisionSource = std::function<const PrecisionPlugin&()>;

  Evaluator(const SampleMatrix& x1, const SampleMatrix* x2, const SymMatrix& identity,
            std::span<const double> hc_grid, double pe_delta, PrecisionSource precision)
      : x1_(x1), x2_(x2), identity_(identity), hc_grid_(hc_grid), pe_delta_(pe_delta),
        precision_(std::move(precision)) {}

  bool two_sample() const { return x2_ != nullptr; }

  const TestOutcome& sum() {
    if (!sum_) sum_ = two_sample() ? t_skk(x1_, *x2_) : t_sr(x1_);
    return *sum_;
  }
  const TestOutcome& max1() {
    if (!max1_) max1_ = two_sample() ? max_stat_two_sample(x1_, *x2_, identity_) : max_stat(x1_, identity_);
    return *max1_;
  }
  const TestOutcome& max2() {
    if (!max2_) {
      const SymMatrix& root = precision_().omega_hat_sqrt;
      max2_ = two_sample() ? w_max_two_sample(x1_, *x2_, root) : max_stat(x1_, root);
    }
    return *max2_;
  }
  const TestOutcome& max3() {
    if (!max3_) {
      const SymMatrix& omega = precision_().omega_hat;
      max3_ = two_sample() ? max_stat_two_sample(x1_, *x2_, omega) : max_stat(x1_, omega);
    }
    return *max3_;
  }

  TestOutcome outcome(Method m) {
    TestOutcome out = [&] {
      switch (m) {
        case Method::SR:
        case Method::SKK:
          return sum();
        case Method::MAX1:
          return max1();
        case Method::MAX2:
          return max2();
        case Method::MAX3:
          return max3();
        case Method::FC:
          return fisher_combine(sum().p_value, max2().p_value);
        case Method::FC2:
          return fisher_combine(sum().p_value, max1().p_value);
        case Method::FC3:
          return fisher_combine(sum().p_value, max3().p_value);
        case Method::MIN:
          return min_p_combine(sum().p_value, max2().p_value);
        case Method::HC:
          return hc2_stat(x1_, hc_grid_);
        case Method::PE:
          return pe_stat(x1_, pe_delta_, precision_().omega_hat);
      }
      throw std::logic_error("unhandled method");
    }();
    out.method = std::string(method_name(m));
    return out;
  }

  double p_value(Method m) {
    switch (m) {
      case Method::SR:
      case Method::SKK:
        return sum().p_value;
      case Method::MAX1:
        return max1().p_value;
      case Method::MAX2:
        return max2().p_value;
      case Method::MAX3:
        return max3().p_value;
      default:
        return outcome(m).p_value;
    }
  }

 private:
  const SampleMatrix& x1_;
  const SampleMatrix* x2_;
  const SymMatrix& identity_;
  std::span<const double> hc_grid_;
  double pe_delta_;
  PrecisionSource precision_;
  std::optional<TestOutcome> sum_, max1_, max2_, max3_;
};

// One replication's data plus the state its evaluator borrows.
struct Replication {
  SampleMatrix x1;
  std::optional<SampleMatrix> x2;
  std::optional<PrecisionPlugin> estimated;
};

Replication draw_replication(const Context& ctx, const SignalSpec& signal, std::size_t rep) {
  const SimConfig& c = ctx.cfg;
  RngStream stream(mix64(c.seed), rep);
  if (c.problem == Problem::OneSample) {
    return {gen_one_sample(ctx.real, c.error, c.n, signal, stream), std::nullopt, std::nullopt};
  }
  auto [x1, x2] = gen_two_sample(ctx.real, c.error, c.n1, c.n2, signal, stream);
  return {std::move(x1), std::move(x2), std::nullopt};
}

Evaluator make_evaluator(const Context& ctx, Replication& r) {
  const SampleMatrix* x2 = r.x2 ? &*r.x2 : nullptr;
  Evaluator::PrecisionSource source = [&ctx, &r]() -> const PrecisionPlugin& {
    if (std::holds_alternative<OraclePrecision>(ctx.cfg.precision)) return ctx.oracle;
    if (!r.estimated) {
      const SymMatrix s = r.x2 ? pooled_cov(r.x1, *r.x2) : sample_cov(r.x1);
      r.estimated = precision_plugin(ctx.cfg.precision, s, std::nullopt);
    }
    return *r.estimated;
  };
  return Evaluator(r.x1, x2, ctx.identity, ctx.hc_grid, ctx.pe_delta, std::move(source));
}

struct RepOutcome {
  std::vector<double> p_values;
  bool failed = false;
  std::string error;
};

// p-values for every configured method over all replications, in rep order.
std::vector<RepOutcome> simulate(const Context& ctx, const SignalSpec& signal) {
  const SimConfig& c = ctx.cfg;
  std::vector<RepOutcome> out(c.reps);
  parallel_for(c.reps, c.threads, [&](std::size_t rep) {
    RepOutcome& r = out[rep];
    try {
      Replication data = draw_replication(ctx, signal, rep);
      Evaluator ev = make_evaluator(ctx, data);
      r.p_values.reserve(c.methods.size());
      for (Method m : c.methods) r.p_values.push_back(ev.p_value(m));
    } catch (const std::exception& e) {
      r.failed = true;
      r.error = e.what();
    }
  });
  return out;
}

// Ensure HC null tables exist before workers start so the cache build is
// not serialised behind the first replication.
void warm_caches(const Context& ctx) {
  const SimConfig& c = ctx.cfg;
  if (c.problem == Problem::OneSample &&
      std::find(c.methods.begin(), c.methods.end(), Method::HC) != c.methods.end()) {
    hc_null_distribution(c.n, c.p, ctx.hc_grid);
  }
}

SizeReport tally(const SimConfig& c, const std::vector<RepOutcome>& reps) {
  SizeReport rep;
  rep.reps = c.reps;
  std::vector<std::size_t> counts(c.methods.size(), 0);
  for (const RepOutcome& r : reps) {
    if (r.failed) {
      if (rep.failures++ == 0) rep.first_failure = r.error;
      continue;
    }
    for (std::size_t k = 0; k < c.methods.size(); ++k) {
      if (r.p_values[k] <= c.alpha) ++counts[k];
    }
  }
  const std::size_t valid = c.reps - rep.failures;
  for (std::size_t k = 0; k < c.methods.size(); ++k) {
    MethodRate mr{c.methods[k], counts[k], 0.0, 0.0};
    if (valid > 0) {
      mr.rate = static_cast<double>(counts[k]) / static_cast<double>(valid);
      mr.mc_se = std::sqrt(mr.rate * (1.0 - mr.rate) / static_cast<double>(valid));
    }
    rep.rates.push_back(mr);
  }
  return rep;
}

}  // namespace

std::vector<TestOutcome> evaluate_methods(const std::vector<Method>& methods, const SampleMatrix& x1,
                                          const SampleMatrix* x2, const PrecisionPlugin& precision,
                                          const MethodOptions& options) {
  const Problem problem = x2 ? Problem::TwoSample : Problem::OneSample;
  for (Method m : methods) {
    if (!method_supported(m, problem)) {
      bad_field("methods", std::string(method_name(m)) + " is not available for " +
                               std::string(problem_name(problem)));
    }
  }
  if (x2 && x2->p() != x1.p()) {
    throw std::invalid_argument("evaluate_methods: samples differ in dimension");
  }
  const std::vector<double> grid = options.hc_grid.empty() ? default_hc_grid() : options.hc_grid;
  const double delta = options.pe_threshold > 0.0 ? options.pe_threshold : default_pe_threshold(x1.n(), x1.p());
  const SymMatrix identity = SymMatrix::identity(x1.p());
  Evaluator ev(x1, x2, identity, grid, delta, [&precision]() -> const PrecisionPlugin& { return precision; });
  std::vector<TestOutcome> out;
  out.reserve(methods.size());
  for (Method m : methods) out.push_back(ev.outcome(m));
  return out;
}

SizeReport run_size(const SimConfig& config) {
  validate(config);
  if (!is_null_signal(config.signal)) {
    throw std::invalid_argument("signal: run_size requires the null signal");
  }
  const Context ctx(config);
  warm_caches(ctx);
  return tally(config, simulate(ctx, NullSignal{}));
}

SignalSpec with_support(const SignalSpec& s, std::size_t m) {
  if (m == 0) return NullSignal{};
  return std::visit(
      [m](auto v) -> SignalSpec {
        if constexpr (std::is_same_v<decltype(v), NullSignal>) {
          throw std::invalid_argument("signal: power curves need a non-null signal kind");
        } else {
          v.m = m;
          return v;
        }
      },
      s);
}

PowerCurve run_power(const SimConfig& config, const std::vector<std::size_t>& m_values) {
  validate(config);
  if (m_values.empty()) bad_field("m_values", "must not be empty");
  for (std::size_t m : m_values) {
    if (m > config.p) bad_field("m_values", "entry exceeds p");
  }
  const Context ctx(config);
  warm_caches(ctx);
  PowerCurve curve;
  curve.m_values = m_values;
  curve.methods = config.methods;
  curve.rates.assign(config.methods.size(), std::vector<double>(m_values.size(), 0.0));
  curve.reps = config.reps;
  for (std::size_t j = 0; j < m_values.size(); ++j) {
    // Common random numbers across m: every point reuses the same streams.
    const SizeReport r = tally(config, simulate(ctx, with_support(config.signal, m_values[j])));
    curve.failures += r.failures;
    for (std::size_t k = 0; k < config.methods.size(); ++k) curve.rates[k][j] = r.rates[k].rate;
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Independence diagnostics
// ---------------------------------------------------------------------------

std::vector<GridPoint> default_independence_grid() {
  std::vector<GridPoint> g;
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    for (double y : {-2.0, 0.0, 2.0, 4.0, 6.0}) g.push_back({x, y});
  }
  return g;
}

double ks_statistic(std::vector<double> draws, const std::function<double(double)>& cdf) {
  if (draws.empty()) return 0.0;
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<Index>(a.size());
  if (n < 2) return 0.0;
  const Eigen::Map<const Vector> x(a.data(), n);
  const Eigen::Map<const Vector> y(b.data(), n);
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  const double denom = xc.norm() * yc.norm();
  return denom > 0.0 ? xc.dot(yc) / denom : 0.0;
}

}  // namespace

IndepDiagnostic run_independence(const SimConfig& config, const std::vector<GridPoint>& grid) {
  validate(config);
  const Context ctx(config);

  struct Draw {
    double sum = 0.0, max = 0.0, fc = 0.0;
    bool failed = false;
  };
  std::vector<Draw> draws(config.reps);
  parallel_for(config.reps, config.threads, [&](std::size_t rep) {
    try {
      Replication data = draw_replication(ctx, config.signal, rep);
      Evaluator ev = make_evaluator(ctx, data);
      draws[rep].sum = ev.sum().statistic;
      draws[rep].max = ev.max2().normalized;
      draws[rep].fc = fisher_combine(ev.sum().p_value, ev.max2().p_value).statistic;
    } catch (const std::exception&) {
      draws[rep].failed = true;
    }
  });

  IndepDiagnostic d;
  d.grid = grid;
  d.reps = config.reps;
  d.low_reps = config.reps < 1000;
  for (const Draw& dr : draws) {
    if (dr.failed) {
      ++d.failures;
      continue;
    }
    d.sum_draws.push_back(dr.sum);
    d.max_draws.push_back(dr.max);
    d.fc_draws.push_back(dr.fc);
  }
  const double valid = static_cast<double>(d.sum_draws.size());
  for (const GridPoint& g : grid) {
    std::size_t both = 0, s_only = 0, m_only = 0;
    for (std::size_t i = 0; i < d.sum_draws.size(); ++i) {
      const bool s = d.sum_draws[i] <= g.x;
      const bool m = d.max_draws[i] <= g.y;
      both += s && m;
      s_only += s;
      m_only += m;
    }
    const double joint = valid > 0 ? static_cast<double>(both) / valid : 0.0;
    const double prod = valid > 0 ? (static_cast<double>(s_only) / valid) * (static_cast<double>(m_only) / valid) : 0.0;
    d.joint_cdf.push_back(joint);
    d.product_cdf.push_back(prod);
    d.sup_abs_gap = std::max(d.sup_abs_gap, std::abs(joint - prod));
  }
  d.pearson_corr = pearson(d.sum_draws, d.max_draws);
  d.ks_sum = ks_statistic(d.sum_draws, [](double v) { return limit_cdf(LimitLaw::StdNormal, v); });
  d.ks_max = ks_statistic(d.max_draws, [](double v) { return limit_cdf(LimitLaw::GumbelMax, v); });
  d.ks_fc = ks_statistic(d.fc_draws, [](double v) { return limit_cdf(LimitLaw::ChiSq4, v); });
  return d;
}

// ---------------------------------------------------------------------------
// Quadratic-form CLT
// ---------------------------------------------------------------------------

QfCltReport run_qf_clt(const SymMatrix& a, ErrorDist dist, std::size_t reps, std::uint64_t seed,
                       std::size_t threads) {
  if (reps < 2) bad_field("reps", "must be at least 2");
  QfCltReport rep;
  rep.reps = reps;
  rep.trace_a = a.mat().trace();
  const double diag_sq = a.mat().diagonal().squaredNorm();
  rep.sigma_a_sq = 2.0 * trace_sq(a) + diag_sq * (fourth_moment(dist) - 3.0);
  if (!(rep.sigma_a_sq > 0.0)) {
    throw NumericalError("run_qf_clt: sigma_A^2 <= 0");
  }
  const double sigma = std::sqrt(rep.sigma_a_sq);
  std::vector<double> q(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    RngStream stream(mix64(seed), r);
    const SampleMatrix z = sample_errors(dist, 1, a.dim(), stream);
    const Vector zv = z.values().row(0).transpose();
    q[r] = zv.dot(a.mat() * zv);
  });
  const auto n = static_cast<Index>(reps);
  const Eigen::Map<const Vector> qv(q.data(), n);
  const double qmean = qv.mean();
  rep.raw_variance = (qv.array() - qmean).square().sum() / static_cast<double>(reps - 1);
  std::vector<double> std_draws(reps);
  for (std::size_t r = 0; r < reps; ++r) std_draws[r] = (q[r] - rep.trace_a) / sigma;
  const Eigen::Map<const Vector> sv(std_draws.data(), n);
  rep.mean = sv.mean();
  rep.variance = (sv.array() - rep.mean).square().sum() / static_cast<double>(reps - 1);
  rep.ks = ks_statistic(std::move(std_draws), [](double v) { return limit_cdf(LimitLaw::StdNormal, v); });
  return rep;
}

ModelConditionReport model_condition_report(const ModelRealization& real) {
  ModelConditionReport r;
  r.sup_row_sum_a = real.a_matrix.mat().cwiseAbs().rowwise().sum().maxCoeff();
  const EigenDecomp es = eigh(real.sigma);
  r.sigma_lambda_max = es.values(0);
  r.sigma_lambda_min = es.values(es.values.size() - 1);
  const EigenDecomp ea = eigh(real.a_matrix);
  r.a_lambda_max = ea.values(0);
  r.a_lambda_min = ea.values(ea.values.size() - 1);
  r.row_sum_suspect = r.sup_row_sum_a > kRowSumFlag;
  return r;
}

std::vector<std::size_t> sparsity_m_values(std::size_t p, const std::vector<double>& exponents) {
  std::vector<std::size_t> out;
  out.reserve(exponents.size());
  for (double a : exponents) {
    const double v = std::floor(std::pow(static_cast<double>(p), a) + 1e-9);
    out.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(v), 1, p));
  }
  return out;
}

}  // namespace hdmean
