#pragma once

// Young functions of exponential and logarithmic type, Luxemburg norms via
// bisection on the modular inequality, and the factor-2 Hoelder pairing.
// All integrals use the normalized measure dx/|Omega|.

#include <algorithm>
#include <cmath>
#include <limits>

#include <entroreg/error.hpp>
#include <entroreg/grid.hpp>

namespace entroreg {

enum class YoungKind { Exp, Log };

// Exp: t on [0,1), e^(t-1) from 1 on. Log: t ln t from 1 on, 0 below.
inline double young_eval(YoungKind kind, double t) {
  if (!(t >= 0.0)) throw InputError("young function: argument must be >= 0");
  if (kind == YoungKind::Exp) return t < 1.0 ? t : std::exp(t - 1.0);
  return t <= 1.0 ? 0.0 : t * std::log(t);
}

namespace detail {

// Mean of Phi(|f|/g) under the normalized measure, with early +inf on
// exponent overflow so the bisection predicate stays meaningful for tiny g.
inline double young_modular(const ScalarField& f, YoungKind kind, double gamma) {
  double acc = 0.0;
  bool overflow = false;
  for_each_node(f.grid, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    if (overflow) return;
    const double t = std::abs(f.values[lin]) / gamma;
    if (kind == YoungKind::Exp && t > 710.0) {
      overflow = true;
      return;
    }
    acc += f.grid.weight(mi) * young_eval(kind, t);
  });
  if (overflow) return std::numeric_limits<double>::infinity();
  return acc / f.grid.domain_measure();
}

}  // namespace detail

// inf { g > 0 : mean Phi(|f|/g) <= 1 }, bisected to relative width tol.
inline double luxemburg_norm(const ScalarField& f, YoungKind kind,
                             double tol = 1e-10) {
  if (!(tol > 0.0)) throw InputError("luxemburg_norm: tol must be positive");
  f.check_finite("luxemburg_norm");
  const double peak = max_abs(f);
  if (peak == 0.0) return 0.0;

  double hi = peak + 1.0;
  int expand = 0;
  while (detail::young_modular(f, kind, hi) > 1.0) {
    hi *= 2.0;
    if (++expand > 64)
      throw InternalError("luxemburg_norm: bracket expansion failed");
  }
  double lo = 1e-300;
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (detail::young_modular(f, kind, mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

struct HolderPair {
  double lhs;  // mean of f*g
  double rhs;  // 2 ||f||_exp ||g||_log
};

inline HolderPair holder_pair(const ScalarField& f, const ScalarField& g) {
  if (!f.grid.same_geometry(g.grid))
    throw InputError("holder_pair: fields live on different grids");
  double lhs = 0.0;
  for_each_node(f.grid, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    lhs += f.grid.weight(mi) * f.values[lin] * g.values[lin];
  });
  lhs /= f.grid.domain_measure();
  const double rhs = 2.0 * luxemburg_norm(f, YoungKind::Exp) *
                     luxemburg_norm(g, YoungKind::Log);
  return {lhs, rhs};
}

}  // namespace entroreg
