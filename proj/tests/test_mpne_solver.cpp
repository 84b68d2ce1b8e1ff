#include <cmath>

#include <gtest/gtest.h>

#include "oligo/mpne_solver.hpp"
#include "oligo/numerics/grid.hpp"

using namespace oligo;

namespace {

GameSpec cd_game(double T = 0.0) {
  GameSpec g;
  g.N = 2;
  g.r = 0.05;
  g.utility = CobbDouglas{0.6, 0.8};
  // B_x = x^{-0.4} matches L_own(u,u) = u^{-0.4}, so φ(x) = x
  if (T > 0.0) g.horizon = FiniteHorizon{T, ScalarFunction::power(1.0 / 0.6, 0.6)};
  return g;
}

// backward characteristics of the duopoly above: u = ξe^{κs}, x = ξ(1 + 6(e^{κs} − 1)), κ = rη1
double cd_exact(double s, double x) {
  const double g = std::exp(0.125 * s);
  return x * g / (1.0 + 6.0 * (g - 1.0));
}

}  // namespace

TEST(Stationary, CobbDouglasLinearSlope) {
  const auto g = cd_game();
  const auto p = symmetric_reduce(g);
  const auto s = stationary_mpne(g, p, numerics::linspace(0.0, 10.0, 41));
  ASSERT_TRUE(s.stationary());
  EXPECT_EQ(s.provenance, "ODE");
  for (double x : {0.0, 0.25, 3.0, 10.0}) EXPECT_NEAR(s.curve()(x), x / 6.0, 1e-10);
  EXPECT_NEAR(s.curve().slope(5.0), 1.0 / 6.0, 1e-9);
}

TEST(Stationary, NonlinearPathFindsSeedByBisection) {
  // own = u^{0.4}/0.4 gives e1 = u/0.6 through the general path; slope rη1/(N − η1) = 0.25
  GameSpec g;
  g.N = 2;
  g.r = 0.05;
  g.rate_domain = {1e-9, 1e3};
  g.utility = AdditiveSeparable{ScalarFunction::power(2.5, 0.4), ScalarFunction::zero()};
  const auto p = symmetric_reduce(g);
  ASSERT_FALSE(p.linear());
  const auto s = stationary_mpne(g, p, numerics::linspace(0.1, 4.0, 40));
  for (double x : {0.1, 1.0, 4.0}) EXPECT_NEAR(s.curve()(x), 0.25 * x, 1e-8);
}

TEST(Stationary, ZeroDiscountNeedsSeed) {
  auto g = cd_game();
  g.r = 0.0;
  const auto p = symmetric_reduce(g);
  const auto xs = numerics::linspace(0.0, 1.0, 11);
  EXPECT_THROW(stationary_mpne(g, p, xs), ParameterError);
  StationaryOptions o;
  o.seed_rate = 0.7;
  const auto s = stationary_mpne(g, p, xs, o);
  EXPECT_EQ(s.provenance, "ansatz");
  EXPECT_EQ(s.curve()(0.3), 0.7);
  EXPECT_LT(game_pde_residual(s, g, p).sup, 1e-12);
}

TEST(Stationary, RejectsFiniteHorizonAndBadGrid) {
  const auto g = cd_game();
  const auto p = symmetric_reduce(g);
  EXPECT_THROW(stationary_mpne(cd_game(1.0), p, numerics::linspace(0.1, 1.0, 5)), ParameterError);
  EXPECT_THROW(stationary_mpne(g, p, {0.1, 0.5, 0.3}), ValueError);
  EXPECT_THROW(stationary_mpne(g, p, {-1.0, 0.5, 1.0}), DomainError);
}

TEST(Stationary, NegativeOwnIndexRejected) {
  // α = 0.2, β = 0.2: k = 0.6 > 0 so η1 < 0, rejected at reduction
  GameSpec g = cd_game();
  g.utility = CobbDouglas{0.2, 0.2};
  EXPECT_THROW(symmetric_reduce(g), SignError);
}

TEST(Characteristics, MatchesImplicitSolution) {
  const auto g = cd_game(2.0);
  const auto p = symmetric_reduce(g);
  const auto phi = terminal_strategy(g, numerics::logspace(0.05, 5.0, 200));
  const auto ts = numerics::linspace(0.0, 2.0, 9);
  const auto xs = numerics::linspace(0.5, 3.0, 11);
  const auto s = characteristics_mpne(g, p, phi, ts, xs);
  ASSERT_FALSE(s.stationary());
  const auto& gd = s.grid();
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) EXPECT_NEAR(gd.u[i][j], cd_exact(2.0 - ts[i], xs[j]), 1e-9);
}

TEST(Characteristics, TerminalSliceIsPhi) {
  const auto g = cd_game(1.0);
  const auto p = symmetric_reduce(g);
  const auto phi = terminal_strategy(g, numerics::logspace(0.1, 5.0, 100));
  const auto s = characteristics_mpne(g, p, phi, {0.5, 1.0}, {1.0, 2.0, 3.0});
  for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(s.grid().u[1][j], s.grid().x[j]);
  EXPECT_NEAR(s.grid().at(0.75, 1.5), 0.5 * (cd_exact(0.5, 1.5) + 1.5), 1e-12);
}

TEST(Characteristics, ConstantTerminalRateStaysUniformInStock) {
  auto g = cd_game(1.0);
  g.horizon = FiniteHorizon{1.0, ScalarFunction::linear(1.0)};  // φ ≡ 1
  const auto p = symmetric_reduce(g);
  const auto phi = terminal_strategy(g, numerics::linspace(0.01, 5.0, 60));
  const auto s = characteristics_mpne(g, p, phi, {0.0}, {1.0, 2.0, 3.0});
  for (double u : s.grid().u[0]) EXPECT_NEAR(u, std::exp(0.125), 1e-10);
}

TEST(Characteristics, CrossingRaisesShock) {
  // convex bequest: B_x = 2x, φ decreasing, characteristics converge backward
  auto g = cd_game(40.0);
  g.horizon = FiniteHorizon{40.0, ScalarFunction::quadratic(1.0, 0.0, 0.0)};
  const auto p = symmetric_reduce(g);
  const auto phi = terminal_strategy(g, numerics::linspace(0.2, 5.0, 50));
  EXPECT_THROW(characteristics_mpne(g, p, phi, numerics::linspace(0.0, 40.0, 41), {1.0, 2.0}), ShockError);
}

TEST(Characteristics, UncoveredStockIsDomainError) {
  const auto g = cd_game(1.0);
  const auto p = symmetric_reduce(g);
  const auto phi = terminal_strategy(g, numerics::linspace(1.0, 2.0, 20));
  EXPECT_THROW(characteristics_mpne(g, p, phi, {0.0, 1.0}, {0.1, 1.5}), DomainError);
}

TEST(GamePde, ExactLinearStrategyHasNoResidual) {
  const auto g = cd_game();
  const auto p = symmetric_reduce(g);
  FeedbackStrategy s{StationaryStrategy{Curve::affine(1.0 / 6.0, 0.0, {0.1, 10.0})}, "ansatz"};
  const auto n = game_pde_residual(s, g, p);
  EXPECT_LT(n.sup, 1e-12);
  EXPECT_EQ(n.nodes, 199u);
  EXPECT_FALSE(n.degenerate);
}

TEST(GamePde, WrongSlopeIsDetected) {
  const auto g = cd_game();
  const auto p = symmetric_reduce(g);
  FeedbackStrategy s{StationaryStrategy{Curve::affine(1.0 / 3.0, 0.0, {0.1, 10.0})}, "ansatz"};
  const auto n = game_pde_residual(s, g, p);
  // −0.75(x/3)(1/3) + 0.125x/3 = −x/24
  EXPECT_NEAR(n.sup, n.worst_x / 24.0, 1e-12);
  EXPECT_GT(n.sup, 0.3);
}

TEST(GamePde, CharacteristicsSolutionIsSmallAndShrinks) {
  const auto g = cd_game(2.0);
  const auto p = symmetric_reduce(g);
  const auto phi = terminal_strategy(g, numerics::logspace(0.05, 5.0, 200));
  const auto xs = numerics::linspace(0.5, 3.0, 21);
  const auto coarse = characteristics_mpne(g, p, phi, numerics::linspace(0.0, 2.0, 9), xs);
  const auto fine = characteristics_mpne(g, p, phi, numerics::linspace(0.0, 2.0, 33), xs);
  const double rc = game_pde_residual(coarse, g, p).sup, rf = game_pde_residual(fine, g, p).sup;
  EXPECT_LT(rf, rc);
  EXPECT_LT(rf, 1e-3);
}

TEST(GamePde, TooFewNodesIsDegenerate) {
  const auto g = cd_game();
  const auto p = symmetric_reduce(g);
  FeedbackStrategy s{StationaryStrategy{Curve::hermite({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}, {1.0, 1.0, 1.0})}, "ODE"};
  EXPECT_TRUE(game_pde_residual(s, g, p).degenerate);
}
