#include <cmath>

#include <gtest/gtest.h>

#include "oligo/curve.hpp"
#include "oligo/numerics/grid.hpp"

using namespace oligo;

TEST(Curve, PowerLawDerivatives) {
  const Curve c = Curve::power(2.0, -0.5, {0.1, 10.0});
  EXPECT_DOUBLE_EQ(c(4.0), 1.0);
  EXPECT_DOUBLE_EQ(c.slope(4.0), -0.125);
  EXPECT_NEAR(c.second(4.0), 2.0 * 0.75 * std::pow(4.0, -2.5), 1e-15);
}

TEST(Curve, OutsideDomainThrows) {
  const Curve c = Curve::affine(1.0, 0.0, {0.0, 1.0});
  EXPECT_THROW(c(1.5), DomainError);
  EXPECT_NO_THROW(c(1.0 + 1e-14));
}

TEST(Curve, SplineReproducesCubic) {
  const auto x = numerics::linspace(0.0, 2.0, 41);
  std::vector<double> y;
  for (double v : x) y.push_back(v * v * v - v);
  const Curve c = Curve::spline(x, y);
  EXPECT_EQ(c.kind(), CurveKind::tabulated);
  for (double v : {0.013, 0.77, 1.91}) {
    EXPECT_NEAR(c(v), v * v * v - v, 1e-10);
    EXPECT_NEAR(c.slope(v), 3 * v * v - 1, 1e-8);
  }
}

TEST(Curve, HermiteUsesGivenSlopes) {
  const Curve c = Curve::hermite({0.0, 1.0}, {0.0, 1.0}, {0.0, 3.0}, Provenance::quadrature);
  EXPECT_NEAR(c(0.5), 0.125, 1e-15);
  EXPECT_NEAR(c.slope(1.0), 3.0, 1e-15);
  EXPECT_EQ(c.provenance(), Provenance::quadrature);
}

TEST(Curve, ClosedFormWithoutSlopeFallsBackToDifferences) {
  const Curve c = Curve::closed_form("sin", {}, {0.0, 3.0}, [](double x) { return std::sin(x); });
  EXPECT_NEAR(c.slope(1.0), std::cos(1.0), 1e-10);
  EXPECT_NEAR(c.second(1.0), -std::sin(1.0), 1e-6);
}

TEST(Curve, ScaledKeepsTag) {
  const Curve c = Curve::power(1.0, 2.0, {0.0, 2.0}).scaled(-3.0);
  EXPECT_EQ(c.tag(), "power");
  EXPECT_DOUBLE_EQ(c(2.0), -12.0);
}

TEST(Curve, SplineNeedsIncreasingNodes) {
  EXPECT_THROW(Curve::spline({0.0, 1.0, 1.0, 2.0}, {0, 0, 0, 0}), ValueError);
}
