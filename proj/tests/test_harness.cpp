#include "hdmean/errors.hpp"
#include "hdmean/harness.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

using namespace hdmean;

namespace {

SimConfig small_one_sample() {
  SimConfig c;
  c.name = "unit";
  c.n = 30;
  c.p = 20;
  c.model = CovModel::M2;
  c.reps = 40;
  c.methods = {Method::SR, Method::MAX1, Method::MAX2, Method::MAX3, Method::FC, Method::FC2,
               Method::FC3, Method::MIN, Method::HC, Method::PE};
  c.hc_grid = {0.25, 0.5, 0.75};
  return c;
}

SimConfig small_two_sample() {
  SimConfig c = small_one_sample();
  c.problem = Problem::TwoSample;
  c.n1 = 15;
  c.n2 = 18;
  c.methods = {Method::SKK, Method::MAX1, Method::MAX2, Method::MAX3, Method::FC, Method::FC2, Method::FC3, Method::MIN};
  return c;
}

std::string field_of(const SimConfig& c) {
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    const std::string w = e.what();
    return w.substr(0, w.find(':'));
  }
  return "";
}

}  // namespace

TEST(Names, ProblemsAndMethods) {
  EXPECT_EQ(parse_problem("one-sample"), Problem::OneSample);
  EXPECT_EQ(parse_problem("two_sample"), Problem::TwoSample);
  EXPECT_THROW(parse_problem("three"), std::invalid_argument);
  for (Method m : {Method::SR, Method::SKK, Method::MAX1, Method::MAX2, Method::MAX3, Method::FC, Method::FC2,
                   Method::FC3, Method::MIN, Method::HC, Method::PE}) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_EQ(parse_method("fc"), Method::FC);
  EXPECT_THROW(parse_method("LRT"), std::invalid_argument);
  EXPECT_TRUE(method_supported(Method::HC, Problem::OneSample));
  EXPECT_FALSE(method_supported(Method::HC, Problem::TwoSample));
  EXPECT_FALSE(method_supported(Method::SKK, Problem::OneSample));
  EXPECT_FALSE(method_supported(Method::SR, Problem::TwoSample));
}

TEST(Validate, NamesTheOffendingField) {
  EXPECT_EQ(field_of(small_one_sample()), "");
  EXPECT_EQ(field_of(small_two_sample()), "");
  SimConfig c = small_one_sample();
  c.alpha = 1.5;
  EXPECT_EQ(field_of(c), "alpha");
  c = small_one_sample();
  c.alpha = 0.0;
  EXPECT_EQ(field_of(c), "alpha");
  c = small_one_sample();
  c.p = 3;
  EXPECT_EQ(field_of(c), "p");
  c = small_one_sample();
  c.n = 3;
  EXPECT_EQ(field_of(c), "n");
  c = small_two_sample();
  c.n2 = 1;
  EXPECT_EQ(field_of(c), "n2");
  c = small_one_sample();
  c.reps = 0;
  EXPECT_EQ(field_of(c), "reps");
  c = small_one_sample();
  c.methods = {Method::SKK};
  EXPECT_EQ(field_of(c), "methods");
  c = small_one_sample();
  c.signal = OneSampleScaled{21, 0.5};
  EXPECT_EQ(field_of(c), "signal.m");
  c = small_one_sample();
  c.signal = TwoSampleRademacher{2};
  EXPECT_EQ(field_of(c), "signal.kind");
  c = small_one_sample();
  c.signal = OneSampleScaled{2, 0.0};
  EXPECT_EQ(field_of(c), "signal.norm_sq");
  c = small_one_sample();
  c.precision = InvertRidged{-1.0, false};
  EXPECT_EQ(field_of(c), "precision.ridge");
  c = small_one_sample();
  c.hc_grid = {0.5, 1.0};
  EXPECT_EQ(field_of(c), "hc_grid");
}

TEST(RunSize, AlphaOneAlwaysRejects) {
  SimConfig c = small_one_sample();
  c.alpha = 1.0;
  c.reps = 10;
  const SizeReport r = run_size(c);
  ASSERT_TRUE(r.healthy()) << r.first_failure;
  for (const auto& m : r.rates) EXPECT_EQ(m.rate, 1.0) << method_name(m.method);
}

TEST(RunSize, SingleReplicationGivesZeroOrOne) {
  SimConfig c = small_two_sample();
  c.reps = 1;
  const SizeReport r = run_size(c);
  EXPECT_EQ(r.reps, 1u);
  for (const auto& m : r.rates) {
    EXPECT_TRUE(m.rate == 0.0 || m.rate == 1.0);
    EXPECT_EQ(m.mc_se, 0.0);
  }
}

TEST(RunSize, RequiresNullSignal) {
  SimConfig c = small_one_sample();
  c.signal = OneSampleScaled{3, 0.5};
  EXPECT_THROW(run_size(c), std::invalid_argument);
}

TEST(RunSize, IdenticalAcrossThreadCounts) {
  for (SimConfig c : {small_one_sample(), small_two_sample()}) {
    c.threads = 1;
    const SizeReport a = run_size(c);
    c.threads = 8;
    const SizeReport b = run_size(c);
    ASSERT_EQ(a.rates.size(), b.rates.size());
    for (std::size_t k = 0; k < a.rates.size(); ++k) {
      EXPECT_EQ(a.rates[k].rejections, b.rates[k].rejections);
      EXPECT_EQ(a.rates[k].rate, b.rates[k].rate);
      EXPECT_EQ(a.rates[k].mc_se, b.rates[k].mc_se);
    }
  }
}

TEST(RunSize, McStandardErrorFormula) {
  SimConfig c = small_one_sample();
  c.reps = 100;
  const SizeReport r = run_size(c);
  for (const auto& m : r.rates) {
    EXPECT_NEAR(m.mc_se, std::sqrt(m.rate * (1.0 - m.rate) / 100.0), 1e-15);
    EXPECT_EQ(m.rate, static_cast<double>(m.rejections) / 100.0);
  }
}

TEST(RunSize, RidgedPrecisionRunsHealthy) {
  SimConfig c = small_two_sample();
  c.precision = InvertRidged{1e-3, true};
  c.reps = 10;
  EXPECT_TRUE(run_size(c).healthy());
}

TEST(RunPower, EmptySupportReproducesTheNullRun) {
  SimConfig c = small_one_sample();
  c.methods = {Method::SR, Method::MAX2, Method::FC};
  c.reps = 200;
  const SizeReport size = run_size(c);
  c.signal = OneSampleScaled{1, 0.5};
  const PowerCurve curve = run_power(c, {0, 1, 5});
  for (Method m : c.methods) {
    const MethodRate& s = size.at(m);
    EXPECT_EQ(curve.at(m)[0], s.rate);
    EXPECT_LE(std::abs(curve.at(m)[0] - s.rate), 2.0 * s.mc_se + 1e-12);
  }
  EXPECT_EQ(curve.m_values, (std::vector<std::size_t>{0, 1, 5}));
}

TEST(RunPower, DeterministicAndSignalSensitive) {
  SimConfig c = small_two_sample();
  c.methods = {Method::SKK, Method::MAX2, Method::FC};
  c.signal = TwoSampleRademacher{1};
  c.reps = 60;
  const PowerCurve a = run_power(c, {1, 10});
  c.threads = 4;
  const PowerCurve b = run_power(c, {1, 10});
  EXPECT_EQ(a.rates, b.rates);
  c.signal = NullSignal{};
  EXPECT_THROW(run_power(c, {1}), std::invalid_argument);
}

TEST(RunPower, StrongSignalIsDetected) {
  SimConfig c = small_one_sample();
  c.methods = {Method::SR, Method::MAX2, Method::FC};
  c.signal = OneSampleScaled{1, 25.0};
  c.reps = 30;
  const PowerCurve p = run_power(c, {1});
  for (Method m : c.methods) EXPECT_GE(p.at(m)[0], 0.9) << method_name(m);
}

TEST(WithSupport, ReplacesSupport) {
  EXPECT_TRUE(is_null_signal(with_support(OneSampleScaled{3, 0.5}, 0)));
  const SignalSpec s = with_support(LocalAlternative{3, 2.0}, 7);
  EXPECT_EQ(signal_support(s), 7u);
  EXPECT_EQ(std::get<LocalAlternative>(s).tau, 2.0);
  EXPECT_THROW(with_support(NullSignal{}, 2), std::invalid_argument);
}

TEST(SparsityValues, FloorOfPowers) {
  EXPECT_EQ(sparsity_m_values(200, {0.2, 0.4, 0.6, 0.8, 1.0}),
            (std::vector<std::size_t>{2, 8, 24, 69, 200}));
  EXPECT_EQ(sparsity_m_values(100, {0.0, 0.5, 1.0}), (std::vector<std::size_t>{1, 10, 100}));
}

TEST(KsStatistic, HandCases) {
  const auto unif = [](double u) { return std::clamp(u, 0.0, 1.0); };
  EXPECT_NEAR(ks_statistic({0.5}, unif), 0.5, 1e-15);
  EXPECT_NEAR(ks_statistic({0.25, 0.75}, unif), 0.25, 1e-15);
  EXPECT_NEAR(ks_statistic({0.1, 0.2, 0.3}, unif), 0.7, 1e-15);
}

TEST(ParallelFor, CoversEveryIndexAndPropagatesErrors) {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 1000);
  std::atomic<int> calls{0};
  EXPECT_THROW(parallel_for(50, 3,
                            [&](std::size_t i) {
                              ++calls;
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

// ---------------------------------------------------------------------------

TEST(Independence, SmallRunShapeAndTrivialGridPoint) {
  SimConfig c = small_one_sample();
  c.methods = {Method::SR, Method::MAX2, Method::FC};
  c.reps = 200;
  std::vector<GridPoint> grid = default_independence_grid();
  EXPECT_EQ(grid.size(), 25u);
  grid.push_back({1e6, 1e6});
  const IndepDiagnostic d = run_independence(c, grid);
  ASSERT_TRUE(d.healthy());
  EXPECT_TRUE(d.low_reps);
  EXPECT_EQ(d.sum_draws.size(), 200u);
  EXPECT_EQ(d.joint_cdf.back(), 1.0);
  EXPECT_EQ(d.product_cdf.back(), 1.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_LE(std::abs(d.joint_cdf[k] - d.product_cdf[k]), d.sup_abs_gap + 1e-15);
  }
  EXPECT_LE(std::abs(d.pearson_corr), 1.0);
}

TEST(Independence, TwoSampleRunsAndIsDeterministic) {
  SimConfig c = small_two_sample();
  c.methods = {Method::SKK, Method::MAX2, Method::FC};
  c.reps = 100;
  const IndepDiagnostic a = run_independence(c, default_independence_grid());
  c.threads = 3;
  const IndepDiagnostic b = run_independence(c, default_independence_grid());
  EXPECT_EQ(a.joint_cdf, b.joint_cdf);
  EXPECT_EQ(a.fc_draws, b.fc_draws);
}

TEST(QfClt, IdentityNormalVarianceIsTwoP) {
  const std::size_t p = 50;
  const QfCltReport r = run_qf_clt(SymMatrix::identity(p), ErrorDist::StdNormal, 4000, 3);
  EXPECT_DOUBLE_EQ(r.sigma_a_sq, 2.0 * p);
  EXPECT_DOUBLE_EQ(r.trace_a, static_cast<double>(p));
  EXPECT_NEAR(r.raw_variance / (2.0 * p), 1.0, 0.08);
  EXPECT_LE(r.ks, 0.05);
}

TEST(QfClt, ScalarChiSquareStandardisation) {
  const std::size_t reps = 20000;
  const QfCltReport r = run_qf_clt(SymMatrix::identity(1), ErrorDist::StdNormal, reps, 4);
  EXPECT_LE(std::abs(r.mean), 3.0 / std::sqrt(static_cast<double>(reps)));
  EXPECT_NEAR(r.variance, 1.0, 0.1);
}

TEST(QfClt, FourthMomentCorrection) {
  const QfCltReport r = run_qf_clt(SymMatrix::identity(10), ErrorDist::StdT5, 10, 1);
  EXPECT_DOUBLE_EQ(r.sigma_a_sq, 20.0 + 10.0 * 6.0);
  EXPECT_THROW(run_qf_clt(SymMatrix::zero(3), ErrorDist::StdNormal, 10, 1), NumericalError);
  EXPECT_THROW(run_qf_clt(SymMatrix::identity(3), ErrorDist::StdNormal, 1, 1), std::invalid_argument);
}

TEST(ConditionReport, IdentityAndBlockModels) {
  ModelRealization id;
  id.sigma = id.omega = id.a_matrix = SymMatrix::identity(10);
  const ModelConditionReport ri = model_condition_report(id);
  EXPECT_NEAR(ri.sup_row_sum_a, 1.0, 1e-15);
  EXPECT_NEAR(ri.sigma_lambda_min, 1.0, 1e-12);
  EXPECT_NEAR(ri.sigma_lambda_max, 1.0, 1e-12);
  EXPECT_FALSE(ri.row_sum_suspect);

  const ModelConditionReport r1 = model_condition_report(realize_model({CovModel::M1, 100, 1}));
  EXPECT_NEAR(r1.sigma_lambda_min, 0.2, 1e-9);
  EXPECT_NEAR(r1.sigma_lambda_max, 1.8, 1e-9);
}

TEST(ConditionReport, ToeplitzRowSumStaysBounded) {
  const double a = model_condition_report(realize_model({CovModel::M2, 100, 1})).sup_row_sum_a;
  const double b = model_condition_report(realize_model({CovModel::M2, 300, 1})).sup_row_sum_a;
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_LT(a, kRowSumFlag);
  EXPECT_NEAR(a, b, 0.05 * a);
}

TEST(EvaluateMethods, LabelsAndValidation) {
  testing_util::Gen g(5);
  const SampleMatrix x(g.gaussian(20, 6));
  const PrecisionPlugin pp{SymMatrix::identity(6), SymMatrix::identity(6)};
  const auto out = evaluate_methods({Method::SR, Method::MAX1, Method::FC, Method::PE}, x, nullptr, pp);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].method, "SR");
  EXPECT_EQ(out[1].method, "MAX1");
  EXPECT_EQ(out[2].method, "FC");
  EXPECT_EQ(out[2].statistic, fisher_combine(out[0].p_value, out[1].p_value).statistic);
  EXPECT_THROW(evaluate_methods({Method::SKK}, x, nullptr, pp), std::invalid_argument);
  const SampleMatrix y(g.gaussian(20, 5));
  EXPECT_THROW(evaluate_methods({Method::SKK}, x, &y, pp), std::invalid_argument);
}
