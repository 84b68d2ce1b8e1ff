#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oligo {

enum class ErrorKind {
  domain,
  singularity,
  sign,
  quadrature,
  singular_payoff,
  no_root,
  non_unique,
  blow_up,
  stall,
  shock,
  parameter,
  degenerate,
  infeasible,
  exponent,
  complex_eigen,
  branch_singular,
  inversion,
  concavity,
  hypothesis,
  schema,
  value,
};

inline std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "DomainError";
    case ErrorKind::singularity: return "SingularityError";
    case ErrorKind::sign: return "SignError";
    case ErrorKind::quadrature: return "QuadratureError";
    case ErrorKind::singular_payoff: return "SingularPayoffError";
    case ErrorKind::no_root: return "NoRootError";
    case ErrorKind::non_unique: return "NonUniqueError";
    case ErrorKind::blow_up: return "BlowUpError";
    case ErrorKind::stall: return "StallError";
    case ErrorKind::shock: return "ShockError";
    case ErrorKind::parameter: return "ParameterError";
    case ErrorKind::degenerate: return "DegenerateError";
    case ErrorKind::infeasible: return "InfeasibleError";
    case ErrorKind::exponent: return "ExponentError";
    case ErrorKind::complex_eigen: return "ComplexEigenError";
    case ErrorKind::branch_singular: return "BranchSingularError";
    case ErrorKind::inversion: return "InversionError";
    case ErrorKind::concavity: return "ConcavityError";
    case ErrorKind::hypothesis: return "HypothesisError";
    case ErrorKind::schema: return "SchemaError";
    case ErrorKind::value: return "ValueError";
  }
  return "Error";
}

/// Base of every failure raised by the library. `where` carries the offending
/// rate/stock when one exists (NaN otherwise); `stage` names the pipeline step.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, double where = std::numeric_limits<double>::quiet_NaN(),
        std::string stage = {})
      : std::runtime_error(message), kind_(kind), where_(where), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view kind_name() const noexcept { return error_kind_name(kind_); }
  double where() const noexcept { return where_; }
  const std::string& stage() const noexcept { return stage_; }
  bool has_where() const noexcept { return !std::isnan(where_); }

 private:
  ErrorKind kind_;
  double where_;
  std::string stage_;
};

template <ErrorKind K>
class KindError : public Error {
 public:
  explicit KindError(const std::string& message, double where = std::numeric_limits<double>::quiet_NaN(),
                     std::string stage = {})
      : Error(K, message, where, std::move(stage)) {}
};

using DomainError = KindError<ErrorKind::domain>;
using SingularityError = KindError<ErrorKind::singularity>;
using SignError = KindError<ErrorKind::sign>;
using QuadratureError = KindError<ErrorKind::quadrature>;
using SingularPayoffError = KindError<ErrorKind::singular_payoff>;
using NoRootError = KindError<ErrorKind::no_root>;
using NonUniqueError = KindError<ErrorKind::non_unique>;
using BlowUpError = KindError<ErrorKind::blow_up>;
using StallError = KindError<ErrorKind::stall>;
using ShockError = KindError<ErrorKind::shock>;
using ParameterError = KindError<ErrorKind::parameter>;
using DegenerateError = KindError<ErrorKind::degenerate>;
using InfeasibleError = KindError<ErrorKind::infeasible>;
using ExponentError = KindError<ErrorKind::exponent>;
using ComplexEigenError = KindError<ErrorKind::complex_eigen>;
using BranchSingularError = KindError<ErrorKind::branch_singular>;
using InversionError = KindError<ErrorKind::inversion>;
using ConcavityError = KindError<ErrorKind::concavity>;
using HypothesisError = KindError<ErrorKind::hypothesis>;
using SchemaError = KindError<ErrorKind::schema>;
using ValueError = KindError<ErrorKind::value>;

/// Rethrows `e` as the same concrete type with `stage` attached (kept if already set).
[[noreturn]] inline void rethrow_with_stage(const Error& e, const std::string& stage) {
  const std::string s = e.stage().empty() ? stage : e.stage();
  const std::string msg = e.what();
  const double w = e.where();
  switch (e.kind()) {
    case ErrorKind::domain: throw DomainError(msg, w, s);
    case ErrorKind::singularity: throw SingularityError(msg, w, s);
    case ErrorKind::sign: throw SignError(msg, w, s);
    case ErrorKind::quadrature: throw QuadratureError(msg, w, s);
    case ErrorKind::singular_payoff: throw SingularPayoffError(msg, w, s);
    case ErrorKind::no_root: throw NoRootError(msg, w, s);
    case ErrorKind::non_unique: throw NonUniqueError(msg, w, s);
    case ErrorKind::blow_up: throw BlowUpError(msg, w, s);
    case ErrorKind::stall: throw StallError(msg, w, s);
    case ErrorKind::shock: throw ShockError(msg, w, s);
    case ErrorKind::parameter: throw ParameterError(msg, w, s);
    case ErrorKind::degenerate: throw DegenerateError(msg, w, s);
    case ErrorKind::infeasible: throw InfeasibleError(msg, w, s);
    case ErrorKind::exponent: throw ExponentError(msg, w, s);
    case ErrorKind::complex_eigen: throw ComplexEigenError(msg, w, s);
    case ErrorKind::branch_singular: throw BranchSingularError(msg, w, s);
    case ErrorKind::inversion: throw InversionError(msg, w, s);
    case ErrorKind::concavity: throw ConcavityError(msg, w, s);
    case ErrorKind::hypothesis: throw HypothesisError(msg, w, s);
    case ErrorKind::schema: throw SchemaError(msg, w, s);
    case ErrorKind::value: throw ValueError(msg, w, s);
  }
  throw Error(e.kind(), msg, w, s);
}

/// Runs `fn`, tagging any library error escaping it with `stage`.
template <class Fn>
decltype(auto) in_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    rethrow_with_stage(e, stage);
  }
}

}  // namespace oligo
