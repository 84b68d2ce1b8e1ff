#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "oligo/curve.hpp"
#include "oligo/errors.hpp"
#include "oligo/numerics/finite_difference.hpp"
#include "oligo/numerics/grid.hpp"
#include "oligo/numerics/ode.hpp"
#include "oligo/numerics/quadrature.hpp"
#include "oligo/numerics/roots.hpp"
#include "oligo/scalar_function.hpp"
#include "oligo/symmetric_equiv.hpp"

namespace oligo {

/// Duopoly with Lⁱ(uⁱ, uʲ) = own_i(uⁱ) + cross_i(uʲ), null discount, horizon T and bequests Bⁱ(x).
struct AdditiveSpec {
  ScalarFunction own1, own2;
  ScalarFunction cross1, cross2;
  double T = 1.0;
  ScalarFunction B1, B2;
  Interval rate_domain{1e-6, 1e6};

  void validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("horizon T must be positive and finite");
    if (!(rate_domain.lo < rate_domain.hi)) throw ParameterError("rate domain is empty");
  }
};

enum class Branch { plus, minus };
enum class ThetaConvention { displayed, natural };

inline const char* branch_name(Branch b) { return b == Branch::plus ? "plus" : "minus"; }

using Matrix2 = std::array<std::array<double, 2>, 2>;
using Vector2 = std::array<double, 2>;

namespace additive {

inline double own_curvature(const ScalarFunction& own, double u) {
  const double d2 = own.d2(u);
  if (d2 == 0.0 || !std::isfinite(d2)) throw SingularityError("own utility has zero curvature", u);
  return d2;
}

}  // namespace additive

/// Eᵢ(uᵢ) = −L′ᵢₒ/L″ᵢₒ.
inline double E_own(const ScalarFunction& own, double u) { return -own.d1(u) / additive::own_curvature(own, u); }

/// Eᵢⱼ(uᵢ, uⱼ) = −L′ᵢᵣ(uⱼ)/L″ᵢₒ(uᵢ).
inline double E_cross(const ScalarFunction& own, const ScalarFunction& cross, double ui, double uj) {
  return -cross.d1(uj) / additive::own_curvature(own, ui);
}

struct OffDiagonal {
  double a = 0.0;  // E1 − E12
  double b = 0.0;  // E2 − E21
  bool a_zero = false;
  bool b_zero = false;
};

inline OffDiagonal off_diagonal(const AdditiveSpec& s, double u1, double u2) {
  const double E1 = E_own(s.own1, u1), E12 = E_cross(s.own1, s.cross1, u1, u2);
  const double E2 = E_own(s.own2, u2), E21 = E_cross(s.own2, s.cross2, u2, u1);
  OffDiagonal o{E1 - E12, E2 - E21, false, false};
  o.a_zero = std::abs(o.a) <= 1e-12 * (std::abs(E1) + std::abs(E12));
  o.b_zero = std::abs(o.b) <= 1e-12 * (std::abs(E2) + std::abs(E21));
  return o;
}

inline Matrix2 build_matrix_A(const AdditiveSpec& s, double u1, double u2) {
  const auto o = off_diagonal(s, u1, u2);
  const double F = -(u1 + u2);
  return {{{F, o.a}, {o.b, F}}};
}

inline double discriminant(const AdditiveSpec& s, double u1, double u2) {
  const auto o = off_diagonal(s, u1, u2);
  if (o.a_zero || o.b_zero) return 0.0;
  return o.a * o.b;
}

struct EigenSample {
  double u1 = 0.0, u2 = 0.0;
  double lambda = 0.0, mu = 0.0;
  Vector2 s_lambda{1.0, 0.0}, s_mu{1.0, 0.0};
  double discriminant = 0.0;
};

/// λ, μ = F ± √disc with right eigenvectors (1, ±√disc/(E1−E12)).
inline EigenSample eigen_pair(const AdditiveSpec& s, double u1, double u2) {
  const auto o = off_diagonal(s, u1, u2);
  const double disc = (o.a_zero || o.b_zero) ? 0.0 : o.a * o.b;
  if (disc < 0.0) throw ComplexEigenError("discriminant is negative: complex eigenvalues", u1);
  if (disc == 0.0) throw DegenerateError("discriminant vanishes: repeated eigenvalue", u1);
  const double F = -(u1 + u2), sq = std::sqrt(disc);
  EigenSample e;
  e.u1 = u1;
  e.u2 = u2;
  e.lambda = F + sq;
  e.mu = F - sq;
  e.s_lambda = {1.0, sq / o.a};
  e.s_mu = {1.0, -sq / o.a};
  e.discriminant = disc;
  return e;
}

/// Row vector w with w·A = eig·w, normalized to w[0] = 1.
inline Vector2 left_eigenvector(const AdditiveSpec& s, double u1, double u2, Branch br) {
  const auto o = off_diagonal(s, u1, u2);
  const double disc = (o.a_zero || o.b_zero) ? 0.0 : o.a * o.b;
  if (disc < 0.0) throw ComplexEigenError("discriminant is negative: complex eigenvalues", u1);
  if (disc == 0.0) throw DegenerateError("discriminant vanishes: repeated eigenvalue", u1);
  const double sq = std::sqrt(disc);
  return {1.0, (br == Branch::plus ? sq : -sq) / o.b};
}

inline Vector2 mat_vec(const Matrix2& A, const Vector2& v) {
  return {A[0][0] * v[0] + A[0][1] * v[1], A[1][0] * v[0] + A[1][1] * v[1]};
}

inline Vector2 vec_mat(const Vector2& w, const Matrix2& A) {
  return {w[0] * A[0][0] + w[1] * A[1][0], w[0] * A[0][1] + w[1] * A[1][1]};
}

enum class Rationalizability { Candidate, NotRationalizable, Mixed };

inline const char* rationalizability_name(Rationalizability v) {
  switch (v) {
    case Rationalizability::Candidate: return "Candidate";
    case Rationalizability::NotRationalizable: return "NotRationalizable";
    case Rationalizability::Mixed: return "Mixed";
  }
  return "Mixed";
}

struct DiscriminantSample {
  double u1 = 0.0, u2 = 0.0, discriminant = 0.0;
};

struct RationalizabilityReport {
  Rationalizability verdict = Rationalizability::Mixed;
  std::size_t positive = 0, negative = 0, zero = 0;
  double min_discriminant = 0.0, max_discriminant = 0.0;
  std::vector<DiscriminantSample> witnesses;  // negative samples
  std::vector<DiscriminantSample> degenerate; // zero samples
  bool degenerate_flag = false;
};

/// Sign of (E1−E12)(E2−E21) on an n×n grid over box1 × box2.
inline RationalizabilityReport rationalizability_test(const AdditiveSpec& s, Interval box1, Interval box2,
                                                      std::size_t n = 50, std::size_t max_witnesses = 16) {
  RationalizabilityReport rep;
  rep.min_discriminant = std::numeric_limits<double>::infinity();
  rep.max_discriminant = -std::numeric_limits<double>::infinity();
  const auto g1 = numerics::linspace(box1.lo, box1.hi, n);
  const auto g2 = numerics::linspace(box2.lo, box2.hi, n);
  for (double u1 : g1) {
    for (double u2 : g2) {
      const double d = discriminant(s, u1, u2);
      rep.min_discriminant = std::min(rep.min_discriminant, d);
      rep.max_discriminant = std::max(rep.max_discriminant, d);
      if (d > 0.0) {
        ++rep.positive;
      } else if (d < 0.0) {
        ++rep.negative;
        if (rep.witnesses.size() < max_witnesses) rep.witnesses.push_back({u1, u2, d});
      } else {
        ++rep.zero;
        if (rep.degenerate.size() < max_witnesses) rep.degenerate.push_back({u1, u2, d});
      }
    }
  }
  rep.degenerate_flag = rep.zero > 0;
  const std::size_t total = rep.positive + rep.negative + rep.zero;
  if (rep.positive == total) {
    rep.verdict = Rationalizability::Candidate;
  } else if (rep.negative == total) {
    rep.verdict = Rationalizability::NotRationalizable;
  } else {
    rep.verdict = Rationalizability::Mixed;
  }
  return rep;
}

struct ThetaOptions {
  ThetaConvention convention = ThetaConvention::displayed;
  std::size_t points = 201;
  numerics::OdeOptions ode{};
};

namespace additive {

/// Numerator and denominator indices of θ′ under the chosen argument convention.
inline std::pair<double, double> theta_indices(const AdditiveSpec& s, double u, double th, ThetaConvention c) {
  if (c == ThetaConvention::displayed) {
    const double num = E_own(s.own2, u) - E_cross(s.own2, s.cross2, th, th);
    const double den = E_own(s.own1, u) - E_cross(s.own1, s.cross1, th, th);
    return {num, den};
  }
  const double num = E_own(s.own2, th) - E_cross(s.own2, s.cross2, th, u);
  const double den = E_own(s.own1, u) - E_cross(s.own1, s.cross1, u, th);
  return {num, den};
}

}  // namespace additive

/// θ′ = ±√|E2 − E21| / √|E1 − E12| from the anchor (u1₀, u2₀) across `range`.
inline Curve theta_ode(const AdditiveSpec& s, Branch br, std::pair<double, double> anchor, Interval range,
                       const ThetaOptions& o = {}) {
  s.validate();
  const auto [u0, th0] = anchor;
  if (!range.contains(u0)) throw DomainError("anchor lies outside the requested range", u0);
  if (!(o.points >= 4)) throw ValueError("theta_ode needs at least 4 output points");
  const double sign = br == Branch::plus ? 1.0 : -1.0;
  const Interval dom = s.rate_domain;
  const auto [num0, den0] = additive::theta_indices(s, u0, th0, o.convention);
  auto rhs = [&](double u, const numerics::State<1>& y) -> numerics::State<1> {
    const double th = y[0];
    if (!(th > dom.lo && th < dom.hi)) throw DomainError("theta left the rate domain", u);
    const auto [num, den] = additive::theta_indices(s, u, th, o.convention);
    // a step can jump over the zero, so a sign flip counts as hitting it
    if (!(std::abs(den) > 1e-12 * std::max(1.0, std::abs(num))) || (den > 0.0) != (den0 > 0.0))
      throw BranchSingularError("denominator index vanishes along theta", u);
    if ((num > 0.0) != (num0 > 0.0)) throw BranchSingularError("numerator index changes sign along theta", u);
    return {sign * std::sqrt(std::abs(num)) / std::sqrt(std::abs(den))};
  };
  auto guard = [&](double u, const numerics::State<1>& y) {
    if (!std::isfinite(y[0]) || !(y[0] > dom.lo && y[0] < dom.hi))
      throw DomainError("theta left the rate domain", u);
  };

  const auto grid = numerics::linspace(range.lo, range.hi, o.points);
  std::vector<double> y(grid.size()), dy(grid.size());
  std::vector<double> up, down;
  for (double u : grid) (u >= u0 ? up : down).push_back(u);
  std::reverse(down.begin(), down.end());
  const std::size_t split = down.size();
  if (!up.empty()) {
    const auto tr = numerics::dopri5<1>(rhs, u0, {th0}, up, o.ode, guard);
    for (std::size_t i = 0; i < up.size(); ++i) {
      y[split + i] = tr.y[i][0];
      dy[split + i] = tr.dy[i][0];
    }
  }
  if (!down.empty()) {
    const auto tr = numerics::dopri5<1>(rhs, u0, {th0}, down, o.ode, guard);
    for (std::size_t i = 0; i < down.size(); ++i) {
      y[split - 1 - i] = tr.y[i][0];
      dy[split - 1 - i] = tr.dy[i][0];
    }
  }
  return Curve::hermite(grid, y, dy, Provenance::quadrature);
}

/// (L′)⁻¹(y) for a strictly monotone marginal on [lo, hi].
template <class Fn>
double invert_monotone(Fn&& g, double y, Interval range, const char* what) {
  const double glo = g(range.lo) - y, ghi = g(range.hi) - y;
  if (!std::isfinite(glo) || !std::isfinite(ghi) || glo * ghi > 0.0) {
    throw InversionError(std::string(what) + " is not invertible at the requested value", y);
  }
  if (glo == 0.0) return range.lo;
  if (ghi == 0.0) return range.hi;
  return numerics::brent([&](double u) { return g(u) - y; }, range.lo, range.hi, {1e-15, 1e-15, 400});
}

struct LinkCheck {
  bool ok = false;
  double defect = 0.0;
  double worst_x = 0.0;
};

/// Compare (L′₂ₒ)⁻¹(B²_x(x)) with θ((L′₁ₒ)⁻¹(B¹_x(x))) on a stock grid.
inline LinkCheck bequest_link_check(const AdditiveSpec& s, const Curve& theta, const std::vector<double>& xs,
                                    double tol = 1e-8, std::optional<Interval> search = std::nullopt) {
  const Interval r1 = search.value_or(theta.domain());
  const Interval r2 = search.value_or(s.rate_domain);
  LinkCheck c;
  for (double x : xs) {
    const double u1 = invert_monotone([&](double u) { return s.own1.d1(u); }, s.B1.d1(x), r1, "L1o'");
    const double u2 = invert_monotone([&](double u) { return s.own2.d1(u); }, s.B2.d1(x), r2, "L2o'");
    const double d = std::abs(u2 - theta(u1));
    if (!(d <= c.defect)) {
      c.defect = d;
      c.worst_x = x;
    }
  }
  c.ok = c.defect <= tol;
  return c;
}

enum class BequestShape { increasing_convex, decreasing_convex, increasing_concave };

inline const char* bequest_shape_name(BequestShape b) {
  switch (b) {
    case BequestShape::increasing_convex: return "increasing_convex";
    case BequestShape::decreasing_convex: return "decreasing_convex";
    case BequestShape::increasing_concave: return "increasing_concave";
  }
  return "";
}

/// Template b on [x_lo, x_hi] with |b′| within [1/√2, 2].
inline Curve bequest_template(BequestShape shape, double x_lo, double x_hi) {
  const double w = x_hi > x_lo ? x_hi - x_lo : 1.0;
  const Interval dom{x_lo, x_hi};
  switch (shape) {
    case BequestShape::increasing_convex: {
      const double sc = 0.5 / w;
      return Curve::closed_form(
          "increasing_convex", {{"w", w}, {"x_lo", x_lo}}, dom,
          [=](double x) { return sc * (x - x_lo + w) * (x - x_lo + w); },
          [=](double x) { return 2.0 * sc * (x - x_lo + w); }, [=](double) { return 2.0 * sc; });
    }
    case BequestShape::decreasing_convex: {
      const double sc = 0.5 / w;
      return Curve::closed_form(
          "decreasing_convex", {{"w", w}, {"x_hi", x_hi}}, dom,
          [=](double x) { return sc * (x_hi + w - x) * (x_hi + w - x); },
          [=](double x) { return -2.0 * sc * (x_hi + w - x); }, [=](double) { return 2.0 * sc; });
    }
    case BequestShape::increasing_concave:
      return Curve::closed_form(
          "increasing_concave", {{"w", w}, {"x_lo", x_lo}}, dom,
          [=](double x) { return 2.0 * std::sqrt(w * (x - x_lo + w)); },
          [=](double x) { return std::sqrt(w / (x - x_lo + w)); },
          [=](double x) { return -0.5 * std::sqrt(w) * std::pow(x - x_lo + w, -1.5); });
  }
  throw ValueError("unknown bequest shape");
}

struct AdditiveOcOptions {
  std::size_t points = 101;
  Interval x_search{-50.0, 50.0};  // where (B¹_x)⁻¹ is sought
  numerics::QuadratureOptions quad{};
};

struct AdditiveOc {
  MonopolyProblem problem;
  Curve psi;
  BequestShape shape = BequestShape::increasing_convex;
  double fprime_psiprime_sign = 0.0;
  bool f_convex = true;
};

/// Eigenvalue of the chosen branch along (u, θ(u)).
inline double branch_eigenvalue(const AdditiveSpec& s, double u, double th, Branch br) {
  const auto e = eigen_pair(s, u, th);
  return br == Branch::plus ? e.lambda : e.mu;
}

/// (ℓ, ρ = 0, f, b) from the eigenvalue along θ and the four-case sign table.
inline AdditiveOc construct_additive_oc(const AdditiveSpec& s, const Curve& theta, Branch br,
                                        const AdditiveOcOptions& o = {}) {
  s.validate();
  const Interval ur = theta.domain();
  const auto us = numerics::linspace(ur.lo, ur.hi, o.points);
  const Curve th = theta;
  const AdditiveSpec spec = s;

  const Curve f = Curve::closed_form(
      std::string("eigenvalue_") + branch_name(br), {}, ur,
      [=](double u) { return branch_eigenvalue(spec, u, th(u), br); }, {}, {}, Provenance::quadrature);

  // hypothesis: f strictly monotone and of one convexity class
  std::vector<double> f1(us.size()), f2(us.size());
  double fscale = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    f1[i] = f.slope(us[i]);
    f2[i] = f.second(us[i]);
    fscale = std::max(fscale, std::abs(f(us[i])));
  }
  const double mono_tol = 1e-8 * std::max(1.0, fscale);
  const bool inc = std::all_of(f1.begin(), f1.end(), [&](double v) { return v > mono_tol; });
  const bool dec = std::all_of(f1.begin(), f1.end(), [&](double v) { return v < -mono_tol; });
  if (!inc && !dec) throw HypothesisError("eigenvalue along theta is not strictly monotone");
  double f1max = 0.0;
  for (double v : f1) f1max = std::max(f1max, std::abs(v));
  const double curv_tol = 1e-6 * std::max(1.0, f1max);
  const bool convex = std::all_of(f2.begin(), f2.end(), [&](double v) { return v >= -curv_tol; });
  const bool concave = std::all_of(f2.begin(), f2.end(), [&](double v) { return v <= curv_tol; });
  if (!convex && !concave) throw HypothesisError("eigenvalue along theta changes convexity");

  // ψ(u) = (B¹_x)⁻¹(L′₁ₒ(u)), ψ′ = L″₁ₒ/B¹_xx(ψ)
  std::vector<double> psi(us.size()), dpsi(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) {
    psi[i] = invert_monotone([&](double x) { return s.B1.d1(x); }, s.own1.d1(us[i]), o.x_search, "B1_x");
    const double bxx = s.B1.d2(psi[i]);
    if (bxx == 0.0) throw InversionError("bequest curvature vanishes", psi[i]);
    dpsi[i] = s.own1.d2(us[i]) / bxx;
  }
  const Curve psi_c = Curve::hermite(us, psi, dpsi, Provenance::quadrature);

  if (std::any_of(dpsi.begin(), dpsi.end(), [](double v) { return v == 0.0; }))
    throw HypothesisError("psi' vanishes on the range");
  const double sgn0 = f1.front() * dpsi.front();
  for (std::size_t i = 0; i < us.size(); ++i)
    if (f1[i] * dpsi[i] * sgn0 <= 0.0) throw HypothesisError("sign of f'psi' is not constant on the range");

  BequestShape shape;
  if (sgn0 > 0.0) {
    shape = convex ? BequestShape::increasing_convex : BequestShape::decreasing_convex;
  } else {
    shape = convex ? BequestShape::increasing_concave : BequestShape::decreasing_convex;
  }
  const auto [pmin, pmax] = std::minmax_element(psi.begin(), psi.end());
  const Curve b = bequest_template(shape, *pmin, *pmax);

  auto dl = [=](double u) { return -f.slope(u) * b.slope(psi_c(u)); };
  auto d2l = [=](double u) {
    return -(f.second(u) * b.slope(psi_c(u)) + f.slope(u) * b.second(psi_c(u)) * psi_c.slope(u));
  };

  // strict concavity of ℓ on the grid
  std::optional<double> bad_lo, bad_hi;
  for (double u : us) {
    if (!(d2l(u) < 0.0)) {
      if (!bad_lo) bad_lo = u;
      bad_hi = u;
    }
  }
  if (bad_lo) {
    throw ConcavityError(std::string("no sign-table case gives l'' < 0 (shape ") + bequest_shape_name(shape) +
                             ", failing on [" + std::to_string(*bad_lo) + ", " + std::to_string(*bad_hi) + "])",
                         *bad_lo);
  }

  const auto lv = numerics::cumulative_integral(dl, us, o.quad);
  std::vector<double> ldv(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) ldv[i] = dl(us[i]);
  const Curve table = Curve::hermite(us, lv, ldv, Provenance::quadrature);
  const Curve ell = Curve::closed_form(
      "payoff", {}, ur, [=](double u) { return table(u); }, dl, d2l, Provenance::quadrature);

  AdditiveOc out;
  out.psi = psi_c;
  out.shape = shape;
  out.fprime_psiprime_sign = sgn0 > 0.0 ? 1.0 : -1.0;
  out.f_convex = convex;
  MonopolyProblem& oc = out.problem;
  oc.ell = ell;
  oc.rho = 0.0;
  oc.f = f;
  oc.bequest = b;
  oc.C = 1.0;
  oc.gamma = Curve::closed_form(
      "coestate", {}, ur, [=](double u) { return b.slope(psi_c(u)); },
      [=](double u) { return b.second(psi_c(u)) * psi_c.slope(u); }, {}, Provenance::quadrature);
  oc.r = 0.0;
  oc.N = 2;
  oc.provenance = Provenance::quadrature;
  oc.work_range = ur;
  oc.notes.push_back(std::string("branch ") + branch_name(br) + ", bequest shape " + bequest_shape_name(shape));
  return out;
}

}  // namespace oligo
