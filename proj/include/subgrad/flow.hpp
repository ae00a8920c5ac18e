#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "subgrad/objective.hpp"
#include "subgrad/rip.hpp"
#include "subgrad/run.hpp"

namespace subgrad {

/// Time-discretized subgradient trajectory x' in -df(x), integrated by
/// explicit Euler on the policy-selected subgradient. There is no event
/// detection at tie crossings: ties form a null set, the invariant checks
/// carry h-dependent slack, and Euler keeps the discrete/continuous
/// correspondence exact (one Euler step equals one subgradient step with
/// alpha = h, bitwise).
///
/// Monitor columns by variant:
///   phase      monitor1 = || P_perp x(t) - P_perp x(0) ||   (conserved component)
///              monitor2 = || x_V(t) ||^2                    (certified-bound quantity)
///   rpca/sensing monitor1 = || phi(t) - phi(0) ||_F, phi = X^T X - Y^T Y
///              monitor2 = || X Y^T ||_F^2
///   symrankone monitor1 = tie distance, monitor2 = 0
struct FlowRecord {
  double h = 0.0;
  std::vector<double> t;
  std::vector<double> f;
  std::vector<double> x_norm;
  std::vector<double> length;    // accumulated sum ||x'|| h
  std::vector<double> energy;    // accumulated sum ||x'||^2 h
  std::vector<double> monitor1;
  std::vector<double> monitor2;
  std::vector<Vec> states;       // x(t_j) for every recorded time

  bool stopped_at_critical = false;  // selected-subgradient norm fell below 1e-10

  std::size_t size() const { return t.size(); }
};

/// Integration failed on a non-finite state; the record holds the trajectory
/// up to the last finite state.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, FlowRecord partial)
      : std::runtime_error(what), record(std::move(partial)) {}
  FlowRecord record;
};

namespace detail {

struct FactorShape {
  std::size_t m = 0, n = 0, r = 0;
};

inline std::optional<FactorShape> factor_shape(const Objective& obj) {
  if (obj.is_rpca()) return FactorShape{obj.rpca().m(), obj.rpca().n(), obj.rpca().r};
  if (obj.is_sensing()) return FactorShape{obj.sensing().m(), obj.sensing().n(), obj.sensing().r};
  return std::nullopt;
}

inline DenseMatrix balancedness(const Vec& x, const FactorShape& s) {
  return FactoredPair::from_flat(x, s.m, s.n, s.r).balancedness();
}

inline double product_norm2(const Vec& x, const FactorShape& s) {
  const double fn = frobenius_norm(FactoredPair::from_flat(x, s.m, s.n, s.r).product());
  return fn * fn;
}

inline double quartic_norms(const Vec& x, const FactorShape& s) {
  double x2 = 0.0, y2 = 0.0;
  for (std::size_t i = 0; i < s.m * s.r; ++i) x2 += x[i] * x[i];
  for (std::size_t i = s.m * s.r; i < x.size(); ++i) y2 += x[i] * x[i];
  return x2 * x2 + y2 * y2;
}

}  // namespace detail

/// Explicit Euler integration of the selected subgradient flow over [0, T]
/// with uniform step h. Stops early once the selected subgradient norm drops
/// below 1e-10 (approximate criticality of the selection; the Clarke set may
/// contain 0 while the selection does not, which is a documented limitation).
inline FlowRecord integrate_flow(const Objective& obj, const Vec& x0, double h, double T,
                                 SignPolicy policy = SignPolicy::Zero) {
  if (h <= 0.0) throw ParameterError("integrate_flow: h must be positive");
  if (T < h) throw ParameterError("integrate_flow: T must be at least h");
  if (x0.size() != obj.dim()) throw ParameterError("integrate_flow: x0 dimension mismatch");
  constexpr double kCriticalNorm = 1e-10;

  const auto shape = detail::factor_shape(obj);
  std::vector<Vec> basis;  // orthonormal basis of span{a_i} for phase
  Vec p_perp0;
  if (obj.is_phase()) {
    basis = gram_schmidt_basis(obj.phase().a, 1e-12);
    p_perp0 = orthogonal_complement_component(x0, basis);
  }
  std::optional<DenseMatrix> phi0;
  if (shape) phi0 = detail::balancedness(x0, *shape);

  FlowRecord rec;
  rec.h = h;
  const std::size_t steps = static_cast<std::size_t>(std::floor(T / h + 1e-9));

  Vec x = x0;
  double length = 0.0, energy = 0.0;

  auto record_state = [&](double tj, double fj) {
    rec.t.push_back(tj);
    rec.f.push_back(fj);
    rec.x_norm.push_back(norm(x));
    rec.length.push_back(length);
    rec.energy.push_back(energy);
    if (obj.is_phase()) {
      const Vec pp = orthogonal_complement_component(x, basis);
      double d2 = 0.0, v2 = 0.0;
      for (std::size_t i = 0; i < pp.size(); ++i) {
        const double dd = pp[i] - p_perp0[i];
        d2 += dd * dd;
        const double xv = x[i] - pp[i];
        v2 += xv * xv;
      }
      rec.monitor1.push_back(std::sqrt(d2));
      rec.monitor2.push_back(v2);
    } else if (shape) {
      const DenseMatrix phi = detail::balancedness(x, *shape);
      rec.monitor1.push_back(frobenius_norm(subtract(phi, *phi0)));
      rec.monitor2.push_back(detail::product_norm2(x, *shape));
    } else {
      rec.monitor1.push_back(obj.tie_distance(x));
      rec.monitor2.push_back(0.0);
    }
    rec.states.push_back(x);
  };

  for (std::size_t j = 0; j <= steps; ++j) {
    const double tj = static_cast<double>(j) * h;
    const Eval ev = obj.evaluate(x, policy);
    if (!std::isfinite(ev.value) || !all_finite(x))
      throw IntegrationError("integrate_flow: non-finite state", std::move(rec));
    record_state(tj, ev.value);
    if (j == steps) break;
    const double gn = norm(ev.subgradient);
    if (gn < kCriticalNorm) {
      rec.stopped_at_critical = true;
      break;
    }
    apply_step(x, ev.subgradient, h);
    if (!all_finite(x)) throw IntegrationError("integrate_flow: non-finite state", std::move(rec));
    length += gn * h;
    energy += gn * gn * h;
  }
  return rec;
}

/// Energy-identity defect max_j |f(x(0)) - f(x(t_j)) - E(t_j)|. Along an exact
/// trajectory the chain rule makes this zero; under Euler it decays with h.
inline double check_chain_rule(const FlowRecord& rec) {
  if (rec.size() == 0) throw ParameterError("check_chain_rule: empty record");
  double worst = 0.0;
  for (std::size_t j = 0; j < rec.size(); ++j)
    worst = std::max(worst, std::abs(rec.f.front() - rec.f[j] - rec.energy[j]));
  return worst;
}

/// max_j || phi(t_j) - phi(0) ||_F for a factored (sensing or rpca) record.
inline double balancedness_drift(const Objective& obj, const FlowRecord& rec) {
  const auto shape = detail::factor_shape(obj);
  if (!shape) throw ParameterError("balancedness_drift: objective has no factored structure");
  if (rec.size() == 0) throw ParameterError("balancedness_drift: empty record");
  const DenseMatrix phi0 = detail::balancedness(rec.states.front(), *shape);
  double worst = 0.0;
  for (const Vec& x : rec.states)
    worst = std::max(worst, frobenius_norm(subtract(detail::balancedness(x, *shape), phi0)));
  return worst;
}

/// max_j || P_perp x(t_j) - P_perp x(0) || for a phase-retrieval record. The
/// projector onto the complement of span{a_i} comes from Gram-Schmidt with
/// tolerance 1e-12.
inline double orthogonal_component_drift(const Objective& obj, const FlowRecord& rec) {
  if (!obj.is_phase()) throw ParameterError("orthogonal_component_drift: not a phase objective");
  if (rec.size() == 0) throw ParameterError("orthogonal_component_drift: empty record");
  const std::vector<Vec> basis = gram_schmidt_basis(obj.phase().a, 1e-12);
  const Vec p0 = orthogonal_complement_component(rec.states.front(), basis);
  double worst = 0.0;
  for (const Vec& x : rec.states) {
    const Vec p = orthogonal_complement_component(x, basis);
    double d2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double dd = p[i] - p0[i];
      d2 += dd * dd;
    }
    worst = std::max(worst, std::sqrt(d2));
  }
  return worst;
}

/// Trajectory-boundedness constants certified from the initial point.
///
/// Phase:   x(t)^T B x(t) <= C1 := 2N f(x(0)) + sum|b_i| with B = sum a_i a_i^T,
///          hence ||x_V(t)||^2 <= C1 / lambda_plus. The 2N factor (rather than
///          N) matches the 1/(2N) objective normalization.
/// Sensing: with RIP constant c > 0, c1 := (1/N)(N f(X0,Y0) + sum|b_i|)^2,
///          c2 := c1/c bounds ||X Y^T||_F^2, and
///          c3 := ||X0^T X0 - Y0^T Y0||_F^2 + 2 c2 gives
///          ||X||_F^4 + ||Y||_F^4 <= (m+n+r) c3.
struct BoundCertificate {
  enum class Kind { Phase, Sensing };
  Kind kind = Kind::Phase;

  // phase
  double c1 = 0.0;
  double lambda_plus = 0.0;

  // sensing
  double c = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  std::size_t dim_sum = 0;  // m + n + r

  /// Bound on the monitored quantity: C1/lambda_plus for phase, c2 for the
  /// sensing product norm.
  double primary_bound() const { return kind == Kind::Phase ? c1 / lambda_plus : c2; }
  double quartic_bound() const { return static_cast<double>(dim_sum) * c3; }
};

inline BoundCertificate certified_bounds(const Objective& obj, const Vec& x0,
                                         std::optional<RipCertificate> cert = std::nullopt) {
  if (x0.size() != obj.dim()) throw ParameterError("certified_bounds: x0 dimension mismatch");
  BoundCertificate bc;
  if (obj.is_phase()) {
    const PhaseInstance& inst = obj.phase();
    const std::size_t n = inst.n();
    double sum_b = 0.0;
    for (double bi : inst.b) sum_b += std::abs(bi);
    bc.kind = BoundCertificate::Kind::Phase;
    bc.c1 = 2.0 * static_cast<double>(inst.count()) * obj.value(x0) + sum_b;
    DenseMatrix B(n, n);
    for (const Vec& ai : inst.a)
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) B(p, q) += ai[p] * ai[q];
    const Vec eig = jacobi_eigenvalues(B, 1e-10);
    const double scale = *std::max_element(eig.begin(), eig.end());
    double lp = std::numeric_limits<double>::infinity();
    for (double e : eig)
      if (e > 1e-12 * std::max(1.0, scale)) lp = std::min(lp, e);
    if (!std::isfinite(lp)) throw ParameterError("certified_bounds: all measurement vectors are zero");
    bc.lambda_plus = lp;
    return bc;
  }
  if (obj.is_sensing()) {
    if (!cert || cert->c <= 0.0)
      throw ParameterError("certified_bounds: sensing requires a RIP certificate with c > 0");
    const SensingInstance& inst = obj.sensing();
    double sum_b = 0.0;
    for (double bi : inst.b) sum_b += std::abs(bi);
    const double N = static_cast<double>(inst.count());
    const double base = N * obj.value(x0) + sum_b;
    bc.kind = BoundCertificate::Kind::Sensing;
    bc.c = cert->c;
    bc.c1 = base * base / N;
    bc.c2 = bc.c1 / cert->c;
    const auto shape = detail::factor_shape(obj);
    const DenseMatrix phi0 = detail::balancedness(x0, *shape);
    const double pn = frobenius_norm(phi0);
    bc.c3 = pn * pn + 2.0 * bc.c2;
    bc.dim_sum = shape->m + shape->n + shape->r;
    return bc;
  }
  throw ParameterError("certified_bounds: only phase and sensing variants carry certificates");
}

/// Maximum positive part of (monitored quantity - bound) along the record;
/// nonpositive values mean the certified bounds held everywhere.
inline double verify_bounds(const Objective& obj, const FlowRecord& rec, const BoundCertificate& bc) {
  if (rec.size() == 0) throw ParameterError("verify_bounds: empty record");
  double worst = 0.0;
  if (bc.kind == BoundCertificate::Kind::Phase) {
    if (!obj.is_phase()) throw ParameterError("verify_bounds: certificate/objective kind mismatch");
    const std::vector<Vec> basis = gram_schmidt_basis(obj.phase().a, 1e-12);
    const double bound = bc.primary_bound();
    for (const Vec& x : rec.states) {
      const Vec pp = orthogonal_complement_component(x, basis);
      double v2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double xv = x[i] - pp[i];
        v2 += xv * xv;
      }
      worst = std::max(worst, v2 - bound);
    }
    return std::max(0.0, worst);
  }
  if (!obj.is_sensing()) throw ParameterError("verify_bounds: certificate/objective kind mismatch");
  const auto shape = detail::factor_shape(obj);
  for (const Vec& x : rec.states) {
    worst = std::max(worst, detail::product_norm2(x, *shape) - bc.primary_bound());
    worst = std::max(worst, detail::quartic_norms(x, *shape) - bc.quartic_bound());
  }
  return std::max(0.0, worst);
}

}  // namespace subgrad
