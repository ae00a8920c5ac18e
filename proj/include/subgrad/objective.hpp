#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <variant>

#include "subgrad/instances.hpp"
#include "subgrad/matrix.hpp"

namespace subgrad {

/// Resolution of the set-valued sign at zero. Each choice picks one element
/// of sign(0) = [-1,1], so every policy yields a valid Clarke subgradient.
/// Zero is the default: it is the unique symmetric choice and makes the
/// selection an odd function of the residual sign. Iterates landing exactly
/// on a tie are measure-zero events for random data, so the policy matters
/// only on those events and in the tie-probing tests.
enum class SignPolicy { Zero, PlusOne, MinusOne };

inline double resolve_sign(double t, SignPolicy policy) {
  if (t > 0.0) return 1.0;
  if (t < 0.0) return -1.0;
  switch (policy) {
    case SignPolicy::PlusOne: return 1.0;
    case SignPolicy::MinusOne: return -1.0;
    default: return 0.0;
  }
}

/// Rank-one symmetric robust PCA data: f(x) = (1/2) ||xx^T - uu^T||_1.
struct SymRankOne {
  Vec u;
  bool all_entries_nonzero() const {
    for (double v : u)
      if (v == 0.0) return false;
    return !u.empty();
  }
};

/// Value, subgradient selection and nonsmoothness proximity at one point,
/// computed from a single residual pass.
struct Eval {
  double value = 0.0;
  double tie_distance = 0.0;
  Vec subgradient;
};

/// One of the four nonsmooth objectives, with exact value, Clarke-subgradient
/// selection, residual inspection and nonsmoothness proximity.
///
/// Points are flat coordinate vectors. Factored variants flatten X (row-major)
/// followed by Y (row-major); this order is fixed so finite-difference oracles
/// and serialization are unambiguous.
class Objective {
 public:
  using Variant = std::variant<RpcaInstance, PhaseInstance, SensingInstance, SymRankOne>;

  explicit Objective(RpcaInstance inst) : v_(std::move(inst)) {}
  explicit Objective(PhaseInstance inst) : v_(std::move(inst)) {}
  explicit Objective(SensingInstance inst) : v_(std::move(inst)) {}
  explicit Objective(SymRankOne sym) : v_(std::move(sym)) {
    if (std::get<SymRankOne>(v_).u.empty()) throw ParameterError("SymRankOne: u must be nonempty");
  }

  const Variant& variant() const { return v_; }

  bool is_rpca() const { return std::holds_alternative<RpcaInstance>(v_); }
  bool is_phase() const { return std::holds_alternative<PhaseInstance>(v_); }
  bool is_sensing() const { return std::holds_alternative<SensingInstance>(v_); }
  bool is_sym_rank_one() const { return std::holds_alternative<SymRankOne>(v_); }

  const RpcaInstance& rpca() const { return std::get<RpcaInstance>(v_); }
  const PhaseInstance& phase() const { return std::get<PhaseInstance>(v_); }
  const SensingInstance& sensing() const { return std::get<SensingInstance>(v_); }
  const SymRankOne& sym() const { return std::get<SymRankOne>(v_); }

  /// Flat variable dimension: (m+n)r for the factored models, n otherwise.
  std::size_t dim() const {
    if (is_rpca()) return (rpca().m() + rpca().n()) * rpca().r;
    if (is_phase()) return phase().n();
    if (is_sensing()) return (sensing().m() + sensing().n()) * sensing().r;
    return sym().u.size();
  }

  /// Weight applied to the sum of |residual| terms: 1 for rpca, 1/(2N) for
  /// phase retrieval, 1/N for sensing, 1/2 for the symmetric rank-one model.
  double term_weight() const {
    if (is_rpca()) return 1.0;
    if (is_phase()) return 0.5 / static_cast<double>(phase().count());
    if (is_sensing()) return 1.0 / static_cast<double>(sensing().count());
    return 0.5;
  }

  double value(const Vec& x) const {
    check_dim(x);
    const Vec res = compute_residuals(x);
    return term_weight() * abs_sum(res);
  }

  /// The terms inside each absolute value, row-major for matrix residuals:
  /// rpca (XY^T - M)_{ij}; phase <a_i,x>^2 - b_i; sensing <A_i,XY^T> - b_i;
  /// symrankone x_i x_j - u_i u_j.
  Vec residuals(const Vec& x) const {
    check_dim(x);
    return compute_residuals(x);
  }

  /// Distance of x from the nonsmooth set, measured as the smallest residual
  /// magnitude. Zero exactly when some absolute-value term sits at its kink.
  double tie_distance(const Vec& x) const {
    check_dim(x);
    return abs_min(compute_residuals(x));
  }

  /// One element of the Clarke subdifferential at x. Residual ties are
  /// resolved by the policy; any policy value lies in [-1,1], so the result
  /// is always a valid selection.
  Vec subgradient(const Vec& x, SignPolicy policy = SignPolicy::Zero) const {
    return evaluate(x, policy).subgradient;
  }

  /// Value, tie distance and subgradient from one residual pass.
  Eval evaluate(const Vec& x, SignPolicy policy = SignPolicy::Zero) const {
    check_dim(x);
    Eval out;
    if (is_rpca()) {
      const RpcaInstance& inst = rpca();
      const FactoredPair p = FactoredPair::from_flat(x, inst.m(), inst.n(), inst.r);
      DenseMatrix C = subtract(p.product(), inst.M);
      out.value = abs_sum(C.a);
      out.tie_distance = abs_min(C.a);
      for (double& v : C.a) v = resolve_sign(v, policy);
      out.subgradient = FactoredPair(matmul(C, p.Y), matmul_tn(C, p.X)).to_flat();
    } else if (is_phase()) {
      const PhaseInstance& inst = phase();
      const std::size_t N = inst.count();
      const double w = 1.0 / static_cast<double>(N);
      double sum = 0.0, tie = std::numeric_limits<double>::infinity();
      Vec g(x.size(), 0.0);
      for (std::size_t i = 0; i < N; ++i) {
        const double q = dot(inst.a[i], x);
        const double res = q * q - inst.b[i];
        sum += std::abs(res);
        tie = std::min(tie, std::abs(res));
        const double coef = w * q * resolve_sign(res, policy);
        for (std::size_t j = 0; j < x.size(); ++j) g[j] += coef * inst.a[i][j];
      }
      out.value = 0.5 * w * sum;
      out.tie_distance = tie;
      out.subgradient = std::move(g);
    } else if (is_sensing()) {
      const SensingInstance& inst = sensing();
      const std::size_t m = inst.m(), n = inst.n(), N = inst.count();
      const FactoredPair p = FactoredPair::from_flat(x, m, n, inst.r);
      const DenseMatrix P = p.product();
      const double w = 1.0 / static_cast<double>(N);
      double sum = 0.0, tie = std::numeric_limits<double>::infinity();
      DenseMatrix W(m, n);  // (1/N) sum_i c_i A_i
      for (std::size_t i = 0; i < N; ++i) {
        const double res = frobenius_inner(inst.A[i], P) - inst.b[i];
        sum += std::abs(res);
        tie = std::min(tie, std::abs(res));
        const double ci = w * resolve_sign(res, policy);
        if (ci != 0.0)
          for (std::size_t k = 0; k < m * n; ++k) W.a[k] += ci * inst.A[i].a[k];
      }
      out.value = w * sum;
      out.tie_distance = tie;
      out.subgradient = FactoredPair(matmul(W, p.Y), matmul_tn(W, p.X)).to_flat();
    } else {
      // Coordinate i of the selection is sum_j sign(x_i x_j - u_i u_j) x_j;
      // the 1/2 in the objective cancels against the symmetric double count.
      const Vec& u = sym().u;
      const std::size_t n = u.size();
      double sum = 0.0, tie = std::numeric_limits<double>::infinity();
      Vec g(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double gi = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double res = x[i] * x[j] - u[i] * u[j];
          sum += std::abs(res);
          tie = std::min(tie, std::abs(res));
          gi += resolve_sign(res, policy) * x[j];
        }
        g[i] = gi;
      }
      out.value = 0.5 * sum;
      out.tie_distance = tie;
      out.subgradient = std::move(g);
    }
    return out;
  }

 private:
  Variant v_;

  void check_dim(const Vec& x) const {
    if (x.size() != dim()) throw ParameterError("Objective: point dimension mismatch");
  }

  static double abs_sum(const Vec& v) {
    double s = 0.0;
    for (double r : v) s += std::abs(r);
    return s;
  }
  static double abs_min(const Vec& v) {
    double best = std::abs(v[0]);
    for (double r : v) best = std::min(best, std::abs(r));
    return best;
  }

  Vec compute_residuals(const Vec& x) const {
    if (is_rpca()) {
      const RpcaInstance& inst = rpca();
      return subtract(FactoredPair::from_flat(x, inst.m(), inst.n(), inst.r).product(), inst.M).a;
    }
    if (is_phase()) {
      const PhaseInstance& inst = phase();
      Vec res(inst.count());
      for (std::size_t i = 0; i < inst.count(); ++i) {
        const double q = dot(inst.a[i], x);
        res[i] = q * q - inst.b[i];
      }
      return res;
    }
    if (is_sensing()) {
      const SensingInstance& inst = sensing();
      const DenseMatrix P = FactoredPair::from_flat(x, inst.m(), inst.n(), inst.r).product();
      Vec res(inst.count());
      for (std::size_t i = 0; i < inst.count(); ++i) res[i] = frobenius_inner(inst.A[i], P) - inst.b[i];
      return res;
    }
    const Vec& u = sym().u;
    const std::size_t n = u.size();
    Vec res(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) res[i * n + j] = x[i] * x[j] - u[i] * u[j];
    return res;
  }
};

}  // namespace subgrad
