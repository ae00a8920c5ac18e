#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "subgrad/objective.hpp"
#include "subgrad/schedule.hpp"

namespace subgrad {

/// One exact subgradient step x <- x - alpha*g, shared by the discrete method
/// and the flow integrator so that the two produce bitwise identical states.
inline void apply_step(Vec& x, const Vec& g, double alpha) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] - alpha * g[i];
}

/// Per-iteration trace of the discrete subgradient method. Scalar columns are
/// recorded every iteration; full iterates are stored with stride thinning to
/// bound memory on long runs. The bounding box covers every visited iterate,
/// including the final point.
struct RunRecord {
  std::vector<double> alpha;      // alpha_k
  std::vector<double> f;          // f(x_k)
  std::vector<double> x_norm;     // ||x_k||
  std::vector<double> step_norm;  // ||x_{k+1} - x_k||
  std::vector<double> tie_dist;   // tie_distance(x_k)

  std::vector<std::size_t> stored_index;
  std::vector<Vec> stored_points;

  Vec box_min, box_max;
  Vec final_point;
  bool diverged = false;
  std::size_t planned_iters = 0;

  std::size_t steps() const { return alpha.size(); }
};

struct ConvergenceReport {
  enum class Status { Converged, MaxIters, Diverged };
  Status status = Status::MaxIters;
  Vec limit_estimate;
  double trailing_displacement = 0.0;
};

inline const char* to_string(ConvergenceReport::Status s) {
  switch (s) {
    case ConvergenceReport::Status::Converged: return "converged";
    case ConvergenceReport::Status::MaxIters: return "max_iters";
    default: return "diverged";
  }
}

/// Default iterate-storage stride for a K-iteration run.
inline std::size_t default_thin(std::size_t iters) { return std::max<std::size_t>(1, iters / 10000); }

/// The subgradient method x_{k+1} = x_k - alpha_k g_k, g_k selected by the
/// policy, run for `iters` steps. Aborts with Diverged status (record
/// truncated at the last finite state) when the norm guard trips or a
/// non-finite value appears; bounded iterates are guaranteed only for the
/// built-in objectives, and user-supplied sensing data may violate the
/// nondegeneracy condition that boundedness needs.
inline RunRecord run_subgradient(const Objective& obj, const Vec& x0, const StepSchedule& sched,
                                 std::size_t iters, SignPolicy policy = SignPolicy::Zero,
                                 std::size_t thin = 0) {
  if (iters < 1) throw ParameterError("run_subgradient: need at least one iteration");
  if (x0.size() != obj.dim()) throw ParameterError("run_subgradient: x0 dimension mismatch");
  if (obj.is_sym_rank_one() && obj.sym().u.empty()) throw ParameterError("run_subgradient: empty u");
  if (thin == 0) thin = default_thin(iters);
  constexpr double kNormGuard = 1e12;

  RunRecord rec;
  rec.planned_iters = iters;
  rec.alpha.reserve(iters);
  rec.f.reserve(iters);
  rec.x_norm.reserve(iters);
  rec.step_norm.reserve(iters);
  rec.tie_dist.reserve(iters);

  Vec x = x0;
  rec.box_min = x;
  rec.box_max = x;
  auto absorb = [&rec](const Vec& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      rec.box_min[i] = std::min(rec.box_min[i], v[i]);
      rec.box_max[i] = std::max(rec.box_max[i], v[i]);
    }
  };

  for (std::size_t k = 0; k < iters; ++k) {
    const Eval ev = obj.evaluate(x, policy);
    const double xn = norm(x);
    if (!std::isfinite(ev.value) || !all_finite(x) || xn > kNormGuard) {
      rec.diverged = true;
      break;
    }
    if (k % thin == 0) {
      rec.stored_index.push_back(k);
      rec.stored_points.push_back(x);
    }
    const double al = sched.step(k);
    const Vec x_prev = x;
    apply_step(x, ev.subgradient, al);

    rec.alpha.push_back(al);
    rec.f.push_back(ev.value);
    rec.x_norm.push_back(xn);
    rec.tie_dist.push_back(ev.tie_distance);
    double sn = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - x_prev[i];
      sn += d * d;
    }
    rec.step_norm.push_back(std::sqrt(sn));
    if (!all_finite(x)) {
      rec.diverged = true;
      x = x_prev;  // keep the last finite state
      break;
    }
    absorb(x);
  }
  rec.final_point = std::move(x);
  return rec;
}

/// Two-sided bracket on the exact diameter of the visited iterates: the
/// bounding-box diagonal is a valid upper bound, the largest coordinate width
/// a valid lower bound. The exact diameter is O(K^2) to compute; the bracket
/// suffices for the boundedness claims and the brute force lives in tests.
inline std::pair<double, double> diameter_bounds(const RunRecord& rec) {
  if (rec.box_min.empty()) throw ParameterError("diameter_bounds: empty record");
  double upper2 = 0.0, lower = 0.0;
  for (std::size_t i = 0; i < rec.box_min.size(); ++i) {
    const double w = rec.box_max[i] - rec.box_min[i];
    upper2 += w * w;
    lower = std::max(lower, w);
  }
  return {lower, std::sqrt(upper2)};
}

/// Converged iff the summed step norms over the last `window` iterations stay
/// within tol. The limit estimate is the final point.
inline ConvergenceReport detect_convergence(const RunRecord& rec, std::size_t window, double tol) {
  if (window > rec.steps()) throw ParameterError("detect_convergence: window exceeds recorded length");
  ConvergenceReport rep;
  rep.limit_estimate = rec.final_point;
  double disp = 0.0;
  for (std::size_t k = rec.steps() - window; k < rec.steps(); ++k) disp += rec.step_norm[k];
  rep.trailing_displacement = disp;
  if (rec.diverged)
    rep.status = ConvergenceReport::Status::Diverged;
  else if (disp <= tol)
    rep.status = ConvergenceReport::Status::Converged;
  else
    rep.status = ConvergenceReport::Status::MaxIters;
  return rep;
}

}  // namespace subgrad
