#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "subgrad/matrix.hpp"
#include "subgrad/objective.hpp"

namespace subgrad {

// Exact landscape machinery for the rank-one symmetric model
// f(x) = (1/2)||xx^T - uu^T||_1. Its critical points are the global minima
// {+u, -u} together with the spurious set
//   A = { z : <sgn(u), z> = 0, |z_i| <= |u_i| for all i }.

inline double sgn(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

struct CriticalClass {
  enum class Tag { GlobalMinPlus, GlobalMinMinus, SpuriousA, NotCritical };
  Tag tag = Tag::NotCritical;
  double distance = 0.0;  // to the named set; for NotCritical, to the whole critical set
};

inline const char* to_string(CriticalClass::Tag t) {
  switch (t) {
    case CriticalClass::Tag::GlobalMinPlus: return "global_min_plus";
    case CriticalClass::Tag::GlobalMinMinus: return "global_min_minus";
    case CriticalClass::Tag::SpuriousA: return "spurious_a";
    default: return "not_critical";
  }
}

namespace detail {
inline void require_nonzero(const Vec& u) {
  for (double v : u)
    if (v != 0.0) return;
  throw ParameterError("landscape: u must be nonzero");
}
}  // namespace detail

/// Euclidean projection onto A, the intersection of the hyperplane
/// <sgn(u), z> = 0 with the box |z_i| <= |u_i| (a nonempty convex set; it
/// always contains 0). The box projection is separable, so the projection is
/// z(mu) = clip(x - mu sgn(u)) with the multiplier mu chosen to land on the
/// hyperplane; <sgn(u), z(mu)> is nonincreasing in mu and changes sign, so mu
/// is found by bracket widening plus bisection to 1e-12.
inline std::pair<Vec, double> project_to_A(const Vec& u, const Vec& x) {
  detail::require_nonzero(u);
  if (x.size() != u.size()) throw ParameterError("project_to_A: dimension mismatch");
  const std::size_t n = u.size();
  Vec s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = sgn(u[i]);

  auto clipped = [&](double mu) {
    Vec z(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double lim = std::abs(u[i]);
      z[i] = std::clamp(x[i] - mu * s[i], -lim, lim);
    }
    return z;
  };
  auto plane = [&](double mu) { return dot(s, clipped(mu)); };

  double lo = -1.0, hi = 1.0;
  while (plane(lo) < 0.0) lo *= 2.0;
  while (plane(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (plane(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  Vec z = clipped(0.5 * (lo + hi));
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - z[i];
    d2 += d * d;
  }
  return {std::move(z), std::sqrt(d2)};
}

/// Classify x against the critical set of the rank-one symmetric model:
/// GlobalMinPlus/Minus when within tau of +-u, else SpuriousA when the
/// A-membership inequalities hold within tau, else NotCritical.
inline CriticalClass classify_critical(const Vec& u, const Vec& x, double tau = 1e-6) {
  detail::require_nonzero(u);
  if (x.size() != u.size()) throw ParameterError("classify_critical: dimension mismatch");
  const std::size_t n = u.size();

  double dp2 = 0.0, dm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dp2 += (x[i] - u[i]) * (x[i] - u[i]);
    dm2 += (x[i] + u[i]) * (x[i] + u[i]);
  }
  const double dplus = std::sqrt(dp2), dminus = std::sqrt(dm2);

  CriticalClass out;
  if (dplus <= tau) {
    out.tag = CriticalClass::Tag::GlobalMinPlus;
    out.distance = dplus;
    return out;
  }
  if (dminus <= tau) {
    out.tag = CriticalClass::Tag::GlobalMinMinus;
    out.distance = dminus;
    return out;
  }
  double plane = 0.0;
  bool in_box = true;
  for (std::size_t i = 0; i < n; ++i) {
    plane += sgn(u[i]) * x[i];
    if (std::abs(x[i]) > std::abs(u[i]) + tau) in_box = false;
  }
  const double dist_a = project_to_A(u, x).second;
  if (std::abs(plane) <= tau && in_box) {
    out.tag = CriticalClass::Tag::SpuriousA;
    out.distance = dist_a;
    return out;
  }
  out.tag = CriticalClass::Tag::NotCritical;
  out.distance = std::min({dplus, dminus, dist_a});
  return out;
}

/// Membership in the wedge T = { |x_i| < |x_1|/(n+1) for all i != 1 }, the
/// region captured toward the spurious point 0 when u_1 = 0. The inequality
/// is strict, so the origin is not a member.
inline bool wedge_membership(const Vec& x) {
  if (x.size() < 2) throw ParameterError("wedge_membership: need dimension >= 2");
  const double gate = std::abs(x[0]) / static_cast<double>(x.size() + 1);
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(std::abs(x[i]) < gate)) return false;
  return true;
}

/// Index partition relative to a reference point x* near A:
/// S_plus = {i : x*_i = u_i}, S_minus = {i : x*_i = -u_i}, rest S_zero,
/// matched within tau. When u_i = 0 both conditions coincide; the index goes
/// to S_plus and is reported as ambiguous (spurious-point avoidance needs
/// u_i != 0 throughout, so this path is diagnostic only).
struct SignPartition {
  std::vector<std::size_t> s_plus, s_minus, s_zero;
  std::vector<std::size_t> ambiguous;

  bool in_plus(std::size_t i) const { return std::find(s_plus.begin(), s_plus.end(), i) != s_plus.end(); }
  bool in_minus(std::size_t i) const { return std::find(s_minus.begin(), s_minus.end(), i) != s_minus.end(); }
};

inline SignPartition partition_signs(const Vec& u, const Vec& x_star, double tau = 1e-6) {
  detail::require_nonzero(u);
  if (x_star.size() != u.size()) throw ParameterError("partition_signs: dimension mismatch");
  SignPartition part;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const bool plus = std::abs(x_star[i] - u[i]) <= tau;
    const bool minus = std::abs(x_star[i] + u[i]) <= tau;
    if (plus && minus) {
      part.s_plus.push_back(i);
      part.ambiguous.push_back(i);
    } else if (plus) {
      part.s_plus.push_back(i);
    } else if (minus) {
      part.s_minus.push_back(i);
    } else {
      part.s_zero.push_back(i);
    }
  }
  return part;
}

/// A linear functional g(x) = <c, x> whose value is nonincreasing along
/// subgradient steps near a reference point in A: c_i = sgn(u_i)/|S+| on
/// S_plus and -sgn(u_i)/|S-| on S_minus (or, in the single-index variant,
/// -sgn(u_j) on one coordinate j outside S_plus).
struct MonotoneFunctional {
  Vec coefficients;
  double operator()(const Vec& x) const { return dot(coefficients, x); }
};

inline MonotoneFunctional monotone_functional(const Vec& u, const SignPartition& part) {
  if (part.s_plus.empty() || part.s_minus.empty())
    throw ParameterError("monotone_functional: S+ and S- must both be nonempty");
  MonotoneFunctional g;
  g.coefficients.assign(u.size(), 0.0);
  for (std::size_t i : part.s_plus) g.coefficients[i] = sgn(u[i]) / static_cast<double>(part.s_plus.size());
  for (std::size_t i : part.s_minus) g.coefficients[i] = -sgn(u[i]) / static_cast<double>(part.s_minus.size());
  return g;
}

inline MonotoneFunctional monotone_functional(const Vec& u, const SignPartition& part, std::size_t j) {
  if (part.s_plus.empty()) throw ParameterError("monotone_functional: S+ must be nonempty");
  if (j >= u.size() || part.in_plus(j)) throw ParameterError("monotone_functional: j must lie outside S+");
  MonotoneFunctional g;
  g.coefficients.assign(u.size(), 0.0);
  for (std::size_t i : part.s_plus) g.coefficients[i] = sgn(u[i]) / static_cast<double>(part.s_plus.size());
  g.coefficients[j] -= sgn(u[j]);
  return g;
}

struct MonotoneGap {
  double gap = 0.0;    // averaged signed partial-derivative difference
  double delta = 0.0;  // the reference gap 2 min_i |u_i| / n
};

/// The monotone-functional gap
///   (1/|I+|) sum_{i in I+} sgn(u_i) d_i f(x) - (1/|I-|) sum_{i in I-} sgn(u_i) d_i f(x)
/// evaluated with the coordinate partial d_i f(x) = sum_j sign(x_i x_j - u_i u_j) x_j.
/// The sets must satisfy I+ within I \ S_minus and I- within I \ S_plus, where
/// S_+- is the partition of the reference point x*; near x* the gap is
/// nonnegative, and at least delta when some |x_i| exceeds |u_i| on I+ u I-.
inline MonotoneGap monotone_gap(const Vec& u, const Vec& x_star, const Vec& x,
                                const std::vector<std::size_t>& i_plus,
                                const std::vector<std::size_t>& i_minus, double tau = 1e-6,
                                SignPolicy policy = SignPolicy::Zero) {
  detail::require_nonzero(u);
  const std::size_t n = u.size();
  if (x.size() != n || x_star.size() != n) throw ParameterError("monotone_gap: dimension mismatch");
  if (i_plus.empty() || i_minus.empty()) throw ParameterError("monotone_gap: index sets must be nonempty");
  const SignPartition part = partition_signs(u, x_star, tau);
  for (std::size_t i : i_plus) {
    if (i >= n) throw ParameterError("monotone_gap: index out of range");
    if (part.in_minus(i)) throw ParameterError("monotone_gap: I+ must avoid S-");
  }
  for (std::size_t i : i_minus) {
    if (i >= n) throw ParameterError("monotone_gap: index out of range");
    if (part.in_plus(i)) throw ParameterError("monotone_gap: I- must avoid S+");
  }

  auto partial = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += resolve_sign(x[i] * x[j] - u[i] * u[j], policy) * x[j];
    return s;
  };
  double plus = 0.0, minus = 0.0;
  for (std::size_t i : i_plus) plus += sgn(u[i]) * partial(i);
  for (std::size_t i : i_minus) minus += sgn(u[i]) * partial(i);

  MonotoneGap out;
  out.gap = plus / static_cast<double>(i_plus.size()) - minus / static_cast<double>(i_minus.size());
  double umin = std::numeric_limits<double>::infinity();
  for (double v : u) umin = std::min(umin, std::abs(v));
  out.delta = 2.0 * umin / static_cast<double>(n);
  return out;
}

/// The desingularization map psi(lambda) = sgn(lambda) |lambda|^{1-theta}.
inline double psi(double lambda, double theta) {
  if (theta <= 0.0 || theta >= 1.0) throw ParameterError("psi: theta must lie in (0,1)");
  if (lambda == 0.0) return 0.0;
  return sgn(lambda) * std::pow(std::abs(lambda), 1.0 - theta);
}

/// psi(lambda1) - psi(lambda2); nondecreasing in theta on (0, theta0) when
/// lambda1 >= lambda2 and both magnitudes stay within exp(1/(theta0 - 1)).
inline double psi_gap(double lambda1, double lambda2, double theta) {
  return psi(lambda1, theta) - psi(lambda2, theta);
}

}  // namespace subgrad
