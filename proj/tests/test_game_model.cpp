#include <cmath>

#include <gtest/gtest.h>

#include "oligo/game_model.hpp"
#include "oligo/numerics/finite_difference.hpp"

using namespace oligo;

namespace {

GameSpec cobb_douglas(double a, double b, int N) {
  GameSpec g;
  g.N = N;
  g.utility = CobbDouglas{a, b};
  return g;
}

}  // namespace

TEST(Partials, CobbDouglasAtUnitRates) {
  const auto d = partials(CobbDouglas{0.5, 0.5}, 2, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(d.L_own, 1.0);
  EXPECT_DOUBLE_EQ(d.L_own_own, -0.5);
  EXPECT_DOUBLE_EQ(d.L_cross, 2.0 * 0.5);
}

TEST(Partials, CobbDouglasMatchesFiniteDifferences) {
  const CobbDouglas cd{0.6, 0.8};
  const double u = 1.3, v = 0.7;
  auto L = [&](double a, double b) { return partials(cd, 3, a, b).L; };
  const auto d = partials(cd, 3, u, v);
  EXPECT_NEAR(d.L_own, numerics::fd_derivative([&](double a) { return L(a, v); }, u), 1e-9);
  // L_cross is per rival; all rivals move together in L(·, v)
  EXPECT_NEAR(2.0 * d.L_cross, numerics::fd_derivative([&](double b) { return L(u, b); }, v), 1e-9);
}

TEST(Partials, AdditiveExponentialAtZero) {
  const AdditiveSeparable as{ScalarFunction::exp(-1.0, -2.0), ScalarFunction::zero()};
  const auto d = partials(as, 2, 0.0, 0.0, {0.0, 10.0});
  EXPECT_DOUBLE_EQ(d.L_own, 2.0);
}

TEST(Partials, IsoelasticPricingMatchesDemandFormula) {
  const IsoelasticPricing ip{1.0, 0.5, ScalarFunction::zero()};
  const auto d = partials(ip, 2, 1.0, 1.0);
  const double Q = 2.0, p = std::pow(Q, -0.5), dp = -0.5 * std::pow(Q, -1.5);
  EXPECT_NEAR(d.L_own, p + dp, 1e-15);
  auto L = [&](double u) { return partials(ip, 2, u, 1.0).L; };
  EXPECT_NEAR(d.L_own, numerics::fd_derivative(L, 1.0), 1e-10);
}

TEST(Partials, RatesOutsideDomainRejected) {
  EXPECT_THROW(partials(CobbDouglas{0.6, 0.8}, 2, -1.0, 1.0), DomainError);
}

TEST(Partials, CustomUtilityByDifferences) {
  Custom c;
  c.L = [](double u, double v, int N) { return std::pow(u, 0.4) / 0.4 * std::pow(v, (N - 1) * 0.2); };
  const auto d = partials(c, 2, 1.5, 0.8);
  const auto e = partials(CobbDouglas{0.6, 0.8}, 2, 1.5, 0.8);
  EXPECT_NEAR(d.L_own, e.L_own, 1e-9);
  EXPECT_NEAR(d.L_own_own, e.L_own_own, 1e-6);
  EXPECT_NEAR(d.L_own_cross, e.L_own_cross, 1e-6);
}

TEST(RiskIndex, CobbDouglasOwnAndCross) {
  const auto g = cobb_douglas(0.6, 0.8, 2);
  EXPECT_NEAR(risk_index_own(g, 1.0), 2.5, 1e-14);
  EXPECT_NEAR(risk_index_cross(g, 1.0), 1.25, 1e-14);
}

TEST(RiskIndex, IsoelasticOwnIsRateOverQ) {
  for (int N : {1, 2, 3}) {
    GameSpec g;
    g.N = N;
    g.utility = IsoelasticPricing{1.0, 2.0, ScalarFunction::zero()};
    if (N == 2) continue;  // q = N is singular
    EXPECT_NEAR(risk_index_own(g, 1.0), 0.5, 1e-13) << "N=" << N;
  }
}

TEST(RiskIndex, IsoelasticCrossFromDirectEvaluation) {
  GameSpec g;
  g.N = 3;
  g.utility = IsoelasticPricing{1.0, 0.5, ScalarFunction::zero()};
  EXPECT_NEAR(risk_index_cross(g, 1.0), 1.0 / (0.5 - 3.0), 1e-13);
}

TEST(RiskIndex, AdditiveExponentialOwnIsInverseCurvature) {
  GameSpec g;
  g.utility = AdditiveSeparable{ScalarFunction::exp(-1.0, -2.0), ScalarFunction::linear(-0.5)};
  for (double u : {0.1, 1.0, 4.0}) {
    EXPECT_NEAR(risk_index_own(g, u), 0.5, 1e-14);
    // −cross′/own″ with own″ = −4e^{−2u}
    EXPECT_NEAR(risk_index_cross(g, u), -0.5 / (4.0 * std::exp(-2.0 * u)), 1e-12 * std::exp(2.0 * u));
  }
}

TEST(RiskIndex, MonopolyHasNoCrossIndex) {
  EXPECT_EQ(risk_index_cross(cobb_douglas(0.6, 0.8, 1), 2.0), 0.0);
}

TEST(RiskIndex, NonPositiveOwnIndexRejected) {
  // −α + (N−1)(1−β) > 0 flips the sign of e1
  EXPECT_THROW(risk_index_own(cobb_douglas(0.2, 0.1, 3), 1.0), SignError);
}

TEST(SymmetricReduce, CobbDouglasIsLinear) {
  const auto p = symmetric_reduce(cobb_douglas(0.6, 0.8, 2));
  ASSERT_TRUE(p.linear());
  EXPECT_NEAR(*p.eta1, 2.5, 1e-15);
  EXPECT_NEAR(*p.eta2, 1.25, 1e-15);
  EXPECT_NEAR(p.e1(3.0), 7.5, 1e-14);
}

TEST(SymmetricReduce, MonopolyCrossIsZero) {
  GameSpec g;
  g.N = 1;
  g.utility = AdditiveSeparable{ScalarFunction::log(1.0), ScalarFunction::linear(1.0)};
  const auto p = symmetric_reduce(g);
  EXPECT_EQ(p.e_minus_1(2.0), 0.0);
  EXPECT_NEAR(p.e1(2.0), 2.0, 1e-14);
}

TEST(SymmetricReduce, CustomIsTabulatedAccurately) {
  GameSpec g;
  g.rate_domain = {0.05, 20.0};
  Custom c;
  c.L = [](double u, double v, int N) { return std::pow(u, 0.4) / 0.4 * std::pow(v, (N - 1) * 0.2); };
  g.utility = c;
  const auto p = symmetric_reduce(g);
  EXPECT_EQ(p.e1.kind(), CurveKind::tabulated);
  for (double u : {0.1, 1.0, 7.0}) EXPECT_NEAR(p.e1(u) / (2.5 * u), 1.0, 1e-5);
}

TEST(SymmetricReduce, IsoelasticQEqualNIsSingular) {
  GameSpec g;
  g.N = 2;
  g.utility = IsoelasticPricing{1.0, 2.0, ScalarFunction::zero()};
  EXPECT_THROW(symmetric_reduce(g), SingularityError);
}
