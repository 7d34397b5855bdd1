#include "hdmean/errors.hpp"
#include "hdmean/models.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hdmean;
using testing_util::max_abs_diff;

namespace {

constexpr std::uint64_t kSeed = 20240101;

ModelRealization make(CovModel m, std::size_t p, std::uint64_t seed = kSeed) { return realize_model({m, p, seed}); }

Matrix unscaled(const ModelRealization& r) {
  const Vector s = r.d_scale.cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * r.sigma.mat() * s.asDiagonal();
}

const CovModel kAll[] = {CovModel::M1, CovModel::M2, CovModel::M3, CovModel::M4,
                         CovModel::M5, CovModel::M6, CovModel::M7, CovModel::M8};

}  // namespace

TEST(ModelNames, RoundTripAndReject) {
  for (CovModel m : kAll) {
    EXPECT_EQ(parse_model(model_name(m)), m);
  }
  EXPECT_EQ(parse_model("m3"), CovModel::M3);
  EXPECT_EQ(parse_model("7"), CovModel::M7);
  EXPECT_THROW(parse_model("M9"), std::invalid_argument);
  EXPECT_THROW(parse_model(""), std::invalid_argument);
  EXPECT_EQ(parse_error("t5"), ErrorDist::StdT5);
  EXPECT_EQ(parse_error("3"), ErrorDist::StdMixNormal);
  EXPECT_THROW(parse_error("cauchy"), std::invalid_argument);
}

TEST(RealizeModel, RejectsTinyDimension) { EXPECT_THROW(make(CovModel::M2, 3), std::invalid_argument); }

TEST(RealizeModel, Model1BlockStructure) {
  const ModelRealization r = make(CovModel::M1, 4);
  Matrix want(4, 4);
  want << 1, 0.8, 0, 0, 0.8, 1, 0, 0, 0, 0, 1, 0.8, 0, 0, 0.8, 1;
  EXPECT_EQ(max_abs_diff(r.sigma.mat(), want), 0.0);
  const EigenDecomp e = eigh(r.sigma);
  EXPECT_NEAR(e.values(0), 1.8, 1e-12);
  EXPECT_NEAR(e.values(3), 0.2, 1e-12);
}

TEST(RealizeModel, OddDimensionLeavesIsolatedLastCoordinate) {
  const ModelRealization r = make(CovModel::M1, 5);
  EXPECT_EQ(r.sigma(4, 4), 1.0);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(r.sigma(4, j), 0.0);
  EXPECT_EQ(r.sigma(2, 3), 0.8);
}

TEST(RealizeModel, Model2Toeplitz) {
  const ModelRealization r = make(CovModel::M2, 4);
  EXPECT_DOUBLE_EQ(r.sigma(0, 1), 0.6);
  EXPECT_DOUBLE_EQ(r.sigma(0, 2), 0.36);
  EXPECT_DOUBLE_EQ(r.sigma(1, 2), 0.6);
  EXPECT_DOUBLE_EQ(r.sigma(0, 3), 0.216);
  EXPECT_EQ(r.d_scale, Vector::Ones(4));
  // Already unit diagonal.
  EXPECT_LE(max_abs_diff(r.r_matrix.mat(), r.sigma.mat()), 1e-15);
}

TEST(RealizeModel, Model3BandedPrecision) {
  const ModelRealization r = make(CovModel::M3, 6);
  EXPECT_EQ(r.omega(0, 0), 2.0);
  EXPECT_EQ(r.omega(0, 1), 0.8);
  EXPECT_EQ(r.omega(0, 2), 0.4);
  EXPECT_EQ(r.omega(0, 3), 0.4);
  EXPECT_EQ(r.omega(0, 4), 0.2);
  EXPECT_EQ(r.omega(0, 5), 0.0);
  EXPECT_EQ(r.omega(5, 1), 0.2);
}

TEST(RealizeModel, Model4ScaledToeplitzPrecision) {
  const ModelRealization r = make(CovModel::M4, 30);
  const Vector h = r.d_scale.cwiseSqrt();
  const Matrix omega0 = h.asDiagonal() * r.omega.mat() * h.asDiagonal();
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 30; ++j)
      EXPECT_NEAR(omega0(i, j), std::pow(0.6, std::abs(static_cast<double>(i - j))), 1e-12);
}

TEST(RealizeModel, Model5PrecisionFromBlockFactor) {
  const ModelRealization r = make(CovModel::M5, 6);
  const Vector s = r.d_scale.cwiseSqrt().cwiseInverse();
  const Matrix b2 = s.asDiagonal() * r.omega.mat() * s.asDiagonal();
  // Square of a 2x2 block [[1,.8],[.8,1]] is [[1.64,1.6],[1.6,1.64]].
  EXPECT_NEAR(b2(0, 0), 1.64, 1e-12);
  EXPECT_NEAR(b2(0, 1), 1.6, 1e-12);
  EXPECT_NEAR(b2(0, 2), 0.0, 1e-12);
}

TEST(RealizeModel, Model6PerturbationAndRidge) {
  const std::size_t p = 100;
  const ModelRealization r = make(CovModel::M6, p);
  EXPECT_GT(r.ridge_delta, 0.05);
  const Matrix base = r.sigma.mat() - r.ridge_delta * Matrix::Identity(p, p);
  const EigenDecomp e = eigh(SymMatrix(base, 1e-8));
  EXPECT_NEAR(std::abs(e.values(static_cast<Eigen::Index>(p) - 1)) + 0.05, r.ridge_delta, 1e-9);
  // Entries outside the 2x2 blocks are exactly E: density near 0.3, |e| <= 0.2.
  std::size_t on = 0, total = 0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) {
      if (i / 2 == j / 2) continue;
      ++total;
      const double v = r.sigma(i, j);
      EXPECT_LE(std::abs(v), 0.2);
      on += v != 0.0;
    }
  const double frac = static_cast<double>(on) / static_cast<double>(total);
  EXPECT_NEAR(frac, 0.3, 4.0 * std::sqrt(0.21 / static_cast<double>(total)));
}

TEST(RealizeModel, Model7PolynomialDecay) {
  const ModelRealization r = make(CovModel::M7, 12);
  const Matrix s = unscaled(r);
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = 0; j < 12; ++j) {
      const double want = i == j ? 1.0 : std::pow(std::abs(static_cast<double>(i - j)), -5.0) / 2.0;
      EXPECT_NEAR(s(i, j), want, 1e-12);
    }
}

TEST(RealizeModel, Model8LowRankPartIsAnOrthogonalProjection) {
  const std::size_t p = 40;
  const ModelRealization r = make(CovModel::M8, p);
  Matrix f = Matrix::Identity(p, p);
  for (std::size_t i = 0; i + 1 < p; ++i) f(i, i + 1) = f(i + 1, i) = 0.5;
  const Matrix uu = unscaled(r) - f;
  // U U' with orthonormal U: idempotent of trace 3.
  EXPECT_LE(max_abs_diff(uu * uu, uu), 1e-10);
  EXPECT_NEAR(uu.trace(), 3.0, 1e-10);
}

TEST(RealizeModel, ScalingDrawsWithinRange) {
  for (CovModel m : kAll) {
    const ModelRealization r = make(m, 20);
    if (m == CovModel::M1 || m == CovModel::M2 || m == CovModel::M3) {
      EXPECT_EQ(r.d_scale, Vector::Ones(20));
    } else {
      EXPECT_GE(r.d_scale.minCoeff(), 1.0);
      EXPECT_LE(r.d_scale.maxCoeff(), 3.0);
      EXPECT_GT(r.d_scale.maxCoeff() - r.d_scale.minCoeff(), 0.1);
    }
  }
}

class AllModels : public ::testing::TestWithParam<std::tuple<CovModel, std::size_t>> {};

TEST_P(AllModels, PopulationMatricesAreConsistent) {
  const auto [model, p] = GetParam();
  const ModelRealization r = make(model, p);
  const auto pi = static_cast<Eigen::Index>(p);
  const EigenDecomp e = eigh(r.sigma);
  EXPECT_GT(e.values(pi - 1), 0.0);
  EXPECT_GT(r.sigma.diag().minCoeff(), 0.0);
  EXPECT_LE(max_abs_diff(r.omega.mat() * r.sigma.mat(), Matrix::Identity(pi, pi)), 1e-6);
  EXPECT_LE(max_abs_diff(r.omega_sqrt.mat() * r.omega_sqrt.mat(), r.omega.mat()), 1e-6 * r.omega.max_abs());
  EXPECT_LE(max_abs_diff(r.sigma_sqrt.mat() * r.sigma_sqrt.mat(), r.sigma.mat()), 1e-6 * r.sigma.max_abs());
  const Vector inv = r.sigma.diag().cwiseInverse();
  EXPECT_LE(max_abs_diff(r.a_matrix.mat(), r.sigma_sqrt.mat() * inv.asDiagonal() * r.sigma_sqrt.mat()), 1e-9);
  for (Eigen::Index k = 0; k < pi; ++k) EXPECT_EQ(r.r_matrix(k, k), 1.0);
}

TEST_P(AllModels, DeterministicInSeedMaterial) {
  const auto [model, p] = GetParam();
  const ModelRealization a = make(model, p, 77);
  const ModelRealization b = make(model, p, 77);
  EXPECT_EQ(a.sigma.mat(), b.sigma.mat());
  EXPECT_EQ(a.omega_sqrt.mat(), b.omega_sqrt.mat());
  if (model >= CovModel::M4) {
    EXPECT_NE(make(model, p, 78).sigma.mat(), a.sigma.mat());
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, AllModels,
                         ::testing::Combine(::testing::ValuesIn(kAll), ::testing::Values(20, 21, 60, 100)),
                         [](const auto& info) {
                           return std::string(model_name(std::get<0>(info.param))) + "_p" +
                                  std::to_string(std::get<1>(info.param));
                         });

// ---------------------------------------------------------------------------

class ErrorMoments : public ::testing::TestWithParam<ErrorDist> {};

TEST_P(ErrorMoments, FirstFourMomentsAtOneMillionDraws) {
  const ErrorDist d = GetParam();
  RngStream s(mix64(314), 0);
  constexpr int kN = 1000000;
  std::vector<double> z(kN);
  for (double& v : z) v = draw_error(d, s);
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0, m8 = 0;
  for (double v : z) {
    const double v2 = v * v;
    m1 += v;
    m2 += v2;
    m3 += v2 * v;
    m4 += v2 * v2;
    m8 += v2 * v2 * v2 * v2;
  }
  m1 /= kN;
  m2 /= kN;
  m3 /= kN;
  m4 /= kN;
  m8 /= kN;
  const double n = kN;
  EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
  EXPECT_LE(std::abs(m1), 0.005);
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt((m4 - 1.0) / n));
  EXPECT_NEAR(m3, 0.0, 4.0 * std::sqrt(m4 * m2 / n) + 0.05);
  // Empirical standard error of the fourth moment; for t(5) the population
  // eighth moment is infinite, so this is a finite-sample proxy.
  EXPECT_NEAR(m4, fourth_moment(d), 4.0 * std::sqrt((m8 - m4 * m4) / n));
  if (d == ErrorDist::StdT5) {
    EXPECT_GE(m2, 0.99);
    EXPECT_LE(m2, 1.01);
  }
}

INSTANTIATE_TEST_SUITE_P(Laws, ErrorMoments,
                         ::testing::Values(ErrorDist::StdNormal, ErrorDist::StdT5, ErrorDist::StdMixNormal),
                         [](const auto& info) { return std::string(error_name(info.param)); });

TEST(ErrorMoments, FourthMomentConstants) {
  EXPECT_EQ(fourth_moment(ErrorDist::StdNormal), 3.0);
  EXPECT_EQ(fourth_moment(ErrorDist::StdT5), 9.0);
  EXPECT_NEAR(fourth_moment(ErrorDist::StdMixNormal), (0.9 * 3 + 0.1 * 3 * 81) / (1.8 * 1.8), 1e-12);
}

TEST(SampleErrors, ShapeAndDeterminism) {
  RngStream a(1, 2), b(1, 2);
  const SampleMatrix x = sample_errors(ErrorDist::StdT5, 7, 3, a);
  EXPECT_EQ(x.n(), 7u);
  EXPECT_EQ(x.p(), 3u);
  EXPECT_EQ(x.values(), sample_errors(ErrorDist::StdT5, 7, 3, b).values());
  EXPECT_THROW(SampleMatrix(Matrix(0, 3)), std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(SampleMatrix{bad}, std::invalid_argument);
}

// ---------------------------------------------------------------------------

TEST(Signals, OneSampleScaledHasRequestedNorm) {
  const ModelRealization r = make(CovModel::M4, 50);
  const Vector mu = one_sample_mean(r, OneSampleScaled{5, 0.5}, 120);
  EXPECT_NEAR(mu.squaredNorm(), 0.5, 1e-14);
  // Proportional to 1/sqrt(sigma_ii) on the support, zero elsewhere.
  const double kappa = mu(0) * std::sqrt(r.sigma(0, 0));
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(mu(i) * std::sqrt(r.sigma(i, i)), kappa, 1e-14);
  EXPECT_EQ(mu.tail(45).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Signals, EmptySupportMatchesNull) {
  const ModelRealization r = make(CovModel::M2, 10);
  RngStream a(3, 1), b(3, 1);
  const SampleMatrix x0 = gen_one_sample(r, ErrorDist::StdNormal, 20, NullSignal{}, a);
  const SampleMatrix xm = gen_one_sample(r, ErrorDist::StdNormal, 20, OneSampleScaled{0, 0.5}, b);
  EXPECT_EQ(x0.values(), xm.values());
}

TEST(Signals, SupportLargerThanDimensionFails) {
  const ModelRealization r = make(CovModel::M2, 10);
  RngStream s(3, 1);
  EXPECT_THROW(gen_one_sample(r, ErrorDist::StdNormal, 20, OneSampleScaled{11, 0.5}, s), std::invalid_argument);
  EXPECT_THROW(gen_two_sample(r, ErrorDist::StdNormal, 5, 5, TwoSampleRademacher{11}, s), std::invalid_argument);
}

TEST(Signals, NullColumnMeansConcentrate) {
  const ModelRealization r = make(CovModel::M7, 10);
  RngStream s(mix64(8), 0);
  const std::size_t n = 100000;
  const SampleMatrix x = gen_one_sample(r, ErrorDist::StdMixNormal, n, NullSignal{}, s);
  const Vector m = x.values().colwise().mean();
  for (Eigen::Index j = 0; j < 10; ++j) {
    EXPECT_LE(std::abs(m(j)), 3.0 / std::sqrt(static_cast<double>(n)) * std::sqrt(r.sigma(j, j)));
  }
}

TEST(Signals, ShiftedRowsCarryTheMean) {
  const ModelRealization r = make(CovModel::M1, 8);
  RngStream a(4, 4), b(4, 4);
  const SampleMatrix x0 = gen_one_sample(r, ErrorDist::StdNormal, 6, NullSignal{}, a);
  const SampleMatrix x1 = gen_one_sample(r, ErrorDist::StdNormal, 6, OneSampleScaled{3, 0.5}, b);
  const Vector mu = one_sample_mean(r, OneSampleScaled{3, 0.5}, 6);
  EXPECT_LE(max_abs_diff(x1.values().rowwise() - mu.transpose(), x0.values()), 1e-14);
}

TEST(Signals, RademacherThetaHasUnitNorm) {
  const ModelRealization r = make(CovModel::M2, 20);
  for (std::size_t m : {1u, 4u, 9u}) {
    RngStream s(mix64(m), 0);
    const Vector shift = two_sample_shift(r, TwoSampleRademacher{m}, 30, 30, s);
    const Vector theta = r.omega_sqrt.mat() * shift;
    EXPECT_NEAR(theta.squaredNorm(), 1.0, 1e-9);
    for (Eigen::Index i = 0; i < 20; ++i) {
      const double want = static_cast<std::size_t>(i) < m ? 1.0 / std::sqrt(static_cast<double>(m)) : 0.0;
      EXPECT_NEAR(std::abs(theta(i)), want, 1e-9);
    }
  }
}

TEST(Signals, RademacherSignsVaryAcrossReplications) {
  const ModelRealization r = make(CovModel::M1, 10);
  std::set<std::vector<int>> patterns;
  for (std::uint64_t rep = 0; rep < 40; ++rep) {
    RngStream s(9, rep);
    const Vector theta = r.omega_sqrt.mat() * two_sample_shift(r, TwoSampleRademacher{4}, 10, 10, s);
    std::vector<int> signs;
    for (Eigen::Index i = 0; i < 4; ++i) signs.push_back(theta(i) > 0 ? 1 : -1);
    patterns.insert(signs);
  }
  EXPECT_GE(patterns.size(), 8u);
}

TEST(Signals, LocalAlternativeTransformedMeanIsSparse) {
  const ModelRealization r = make(CovModel::M3, 30);
  const std::size_t n = 120;
  const Vector mu = one_sample_mean(r, LocalAlternative{4, 1.5}, n);
  const Vector t = r.omega_sqrt.mat() * mu;
  const double level = 1.5 * std::sqrt(std::log(30.0) / static_cast<double>(n));
  for (Eigen::Index i = 0; i < 30; ++i) EXPECT_NEAR(t(i), i < 4 ? level : 0.0, 1e-9);

  RngStream s(1, 1);
  const Vector d = r.omega_sqrt.mat() * two_sample_shift(r, LocalAlternative{4, 1.0}, 60, 60, s);
  EXPECT_NEAR(d(0), std::sqrt(std::log(30.0) / 30.0), 1e-9);
  EXPECT_NEAR(d(5), 0.0, 1e-9);
}

TEST(Signals, TwoSampleSecondSampleIsCentred) {
  const ModelRealization r = make(CovModel::M2, 6);
  RngStream a(5, 5), b(5, 5);
  const auto [x1, x2] = gen_two_sample(r, ErrorDist::StdNormal, 4, 5, NullSignal{}, a);
  const auto [y1, y2] = gen_two_sample(r, ErrorDist::StdNormal, 4, 5, TwoSampleRademacher{3}, b);
  EXPECT_EQ(x2.values(), y2.values());
  EXPECT_EQ(x1.n(), 4u);
  EXPECT_EQ(x2.n(), 5u);
  const Vector diff = (y1.values() - x1.values()).row(0).transpose();
  for (Eigen::Index i = 1; i < 4; ++i) {
    EXPECT_LE(((y1.values() - x1.values()).row(i).transpose() - diff).cwiseAbs().maxCoeff(), 1e-14);
  }
}
