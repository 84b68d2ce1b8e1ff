#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oligo/curve.hpp"
#include "oligo/errors.hpp"
#include "oligo/game_model.hpp"
#include "oligo/symmetric_equiv.hpp"

namespace oligo {

/// Cobb–Douglas duopoly with L¹ = u^{1−α1} v^{1−β}/(1−α1), L² = v^{1−α2} u^{1−β}/(1−α2).
struct AsymParams {
  double alpha1 = 0.6;
  double alpha2 = 0.6;
  double beta = 0.8;
  double r1 = 0.05;
  double r2 = 0.05;

  double det() const { return alpha1 * alpha2 - (1.0 - beta) * (1.0 - beta); }
  double epsilon() const { return 1.0 / det(); }
  // right-hand side coefficients of the two rows (before ε)
  double R1() const { return alpha2 * r1 + (1.0 - beta) * r2; }
  double R2() const { return alpha1 * r2 + (1.0 - beta) * r1; }
  double default_rho() const { return 0.5 * (r1 + r2); }

  void validate() const {
    for (double v : {alpha1, alpha2, beta})
      if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("alpha1, alpha2, beta must be positive and finite");
    if (!(r1 >= 0.0) || !(r2 >= 0.0)) throw ParameterError("discount rates must be nonnegative");
    if (alpha1 == 1.0 || alpha2 == 1.0) throw ParameterError("alpha_i = 1 divides by 1 - alpha_i");
    const double b = 1.0 - beta;
    if (std::abs(det()) <= 1e-12 * std::max(std::abs(alpha1 * alpha2), b * b)) throw ParameterError("alpha1*alpha2 - (1-beta)^2 must be nonzero");
  }
};

namespace asym {

/// Coefficient of u·u_x in the first row along v = δu.
inline double row1_coefficient(const AsymParams& p, double d) {
  const double e = p.epsilon(), b = 1.0 - p.beta;
  return -(1.0 + d) + e * (b / (1.0 - p.alpha2)) * ((1.0 - p.alpha2) - b * d) +
         e * (p.alpha2 / (1.0 - p.alpha1)) * ((1.0 - p.alpha1) * d - b);
}

/// Coefficient of δu·u_x in the second row along v = δu.
inline double row2_coefficient(const AsymParams& p, double d) {
  const double e = p.epsilon(), b = 1.0 - p.beta;
  return e * (p.alpha1 / (1.0 - p.alpha2)) * ((1.0 - p.alpha2) - b * d) - (1.0 + d) +
         e * (b / (1.0 - p.alpha1)) * ((1.0 - p.alpha1) * d - b);
}

}  // namespace asym

/// Relative defect of Num′(δ)/Den′(δ) = R1/R2.
inline double delta_ratio_residual(const AsymParams& p, double d) {
  const double n = asym::row1_coefficient(p, d), m = asym::row2_coefficient(p, d);
  const double lhs = p.R2() * n, rhs = p.R1() * m;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

/// δ in θ(u) = δu; the equation R2·Num′(δ) = R1·Den′(δ) is linear in δ.
inline double solve_delta(const AsymParams& p) {
  p.validate();
  const double n0 = asym::row1_coefficient(p, 0.0), n1 = asym::row1_coefficient(p, 1.0) - n0;
  const double d0 = asym::row2_coefficient(p, 0.0), d1 = asym::row2_coefficient(p, 1.0) - d0;
  const double R1 = p.R1(), R2 = p.R2();
  const double lead = R2 * n1 - R1 * d1;
  const double scale = std::abs(R2 * n1) + std::abs(R1 * d1);
  if (!(std::abs(lead) > 1e-13 * scale)) throw DegenerateError("linear coefficient of the delta equation vanishes");
  const double d = (R1 * d0 - R2 * n0) / lead;
  if (!(d > 0.0)) throw InfeasibleError("delta must be positive, got " + std::to_string(d), d);
  return d;
}

/// Slope ξ of the fictitious dynamics f(u) = ξu.
inline double asym_xi(const AsymParams& p, double delta) { return asym::row1_coefficient(p, delta); }

/// Cross-multiplied residual of the θ ratio equation at u with θ = δu, θ′ = δ.
inline double theta_ratio_residual(const AsymParams& p, double delta, double u) {
  const double e = p.epsilon(), b = 1.0 - p.beta, a1 = p.alpha1, a2 = p.alpha2;
  const double th = delta * u, dth = delta;
  const double num = -(u + th) + e * (b / (1.0 - a2)) * ((1.0 - a2) * u - b * th) +
                     e * dth * (u / th) * (a2 / (1.0 - a1)) * ((1.0 - a1) * th - b * u);
  const double den = e * (th / u) * (a1 / (1.0 - a2)) * ((1.0 - a2) * u - b * th) +
                     dth * (-(u + th) + e * (b / (1.0 - a1)) * ((1.0 - a1) * th - b * u));
  const double lhs = num * th * p.R2(), rhs = den * u * p.R1();
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

/// Both rows of the stationary system at (u, δu) with u_x = ux, scaled by |ε·R1·u|.
struct RowResidual {
  double row1 = 0.0;
  double row2 = 0.0;
};

inline RowResidual asym_row_residual(const AsymParams& p, double delta, double u, double ux) {
  const double e = p.epsilon();
  const double scale = std::abs(e * p.R1() * u);
  const double r1 = u * asym::row1_coefficient(p, delta) * ux + e * p.R1() * u;
  const double r2 = delta * u * asym::row2_coefficient(p, delta) * ux + e * p.R2() * delta * u;
  return {std::abs(r1) / scale, std::abs(r2) / scale};
}

/// Linear MPNE slope of player 1: u = c·x with c = −ε·R1/ξ.
inline double asym_mpne_slope(const AsymParams& p, double delta) {
  return -p.epsilon() * p.R1() / asym_xi(p, delta);
}

/// Fictitious monopoly for the linear θ branch: f = ξu, γ = C(u/u_ref)^{−p},
/// ℓ anchored as in the symmetric builder so that ℓ′ = −f′γ.
inline MonopolyProblem asym_fictitious(const AsymParams& p, double delta, double rho, double C, double u_ref = 1.0,
                                       Interval dom = kDefaultRateDomain) {
  p.validate();
  if (!(delta > 0.0)) throw InfeasibleError("delta must be positive", delta);
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ParameterError("rho must be finite and nonnegative");
  if (C == 0.0) throw ParameterError("integration constant C must be nonzero");
  const double xi = asym_xi(p, delta);
  const double eR1 = p.epsilon() * p.R1();
  if (rho > 0.0 && eR1 == 0.0) throw ParameterError("rho > 0 needs a nonzero epsilon*(alpha2 r1 + (1-beta) r2)");
  const double ex = rho > 0.0 ? rho / eR1 : 0.0;
  if (std::abs(ex - 1.0) < 1e-14) throw ExponentError("payoff exponent rho/(eps*R1) equals 1", ex);

  MonopolyProblem oc;
  oc.rho = rho;
  oc.C = C;
  oc.u_ref = u_ref;
  oc.r = p.r1;
  oc.N = 2;
  oc.m = ex;
  oc.k_f = xi;
  oc.provenance = Provenance::analytic;
  oc.f = Curve::affine(xi, 0.0, dom);
  oc.gamma = Curve::closed_form(
      "power", {{"C", C}, {"m", ex}, {"u_ref", u_ref}}, dom, [=](double u) { return C * std::pow(u / u_ref, -ex); },
      [=](double u) { return -ex * C * std::pow(u / u_ref, -ex) / u; },
      [=](double u) { return ex * (ex + 1.0) * C * std::pow(u / u_ref, -ex) / (u * u); });
  const double base = xi * C * std::pow(u_ref, ex);
  oc.ell = Curve::closed_form(
      "power", {{"k_f", xi}, {"C", C}, {"m", ex}, {"u_ref", u_ref}}, dom,
      [=](double u) { return -base * (std::pow(u, 1.0 - ex) - ex * std::pow(u_ref, 1.0 - ex)) / (1.0 - ex); },
      [=](double u) { return -base * std::pow(u, -ex); }, [=](double u) { return ex * base * std::pow(u, -ex - 1.0); });
  oc.notes.push_back("linear theta branch v = delta*u, delta = " + std::to_string(delta));
  return oc;
}

}  // namespace oligo
