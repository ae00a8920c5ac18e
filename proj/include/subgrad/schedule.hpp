#pragma once

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "subgrad/errors.hpp"

namespace subgrad {

/// Step-size schedules for the subgradient iteration. HarmonicOverK is the
/// alpha_bar/(k+1) family the convergence theory uses; Constant and Explicit
/// cover the capture and diagnostic experiments.
class StepSchedule {
 public:
  struct HarmonicOverK {
    double alpha_bar;
  };
  struct Constant {
    double alpha;
  };
  struct Explicit {
    std::vector<double> alphas;
  };

  static StepSchedule harmonic(double alpha_bar) {
    if (alpha_bar <= 0.0) throw ParameterError("StepSchedule: alpha_bar must be positive");
    return StepSchedule(HarmonicOverK{alpha_bar});
  }
  static StepSchedule constant(double alpha) {
    if (alpha <= 0.0) throw ParameterError("StepSchedule: alpha must be positive");
    return StepSchedule(Constant{alpha});
  }
  static StepSchedule explicit_list(std::vector<double> alphas) {
    if (alphas.empty()) throw ParameterError("StepSchedule: explicit list must be nonempty");
    for (double a : alphas)
      if (a <= 0.0) throw ParameterError("StepSchedule: explicit steps must be positive");
    return StepSchedule(Explicit{std::move(alphas)});
  }

  double step(std::size_t k) const {
    if (const auto* h = std::get_if<HarmonicOverK>(&v_)) return h->alpha_bar / static_cast<double>(k + 1);
    if (const auto* c = std::get_if<Constant>(&v_)) return c->alpha;
    const auto& e = std::get<Explicit>(v_);
    if (k >= e.alphas.size()) throw RangeError("StepSchedule: explicit step list exhausted");
    return e.alphas[k];
  }

  /// Whether the sequence is nonincreasing (the bounded-diameter guarantee
  /// needs this, other uses do not). Harmonic and constant schedules always are.
  bool is_nonincreasing() const {
    if (const auto* e = std::get_if<Explicit>(&v_)) {
      for (std::size_t k = 1; k < e->alphas.size(); ++k)
        if (e->alphas[k] > e->alphas[k - 1]) return false;
    }
    return true;
  }

  bool is_explicit() const { return std::holds_alternative<Explicit>(v_); }
  std::size_t explicit_length() const { return std::get<Explicit>(v_).alphas.size(); }

 private:
  using Variant = std::variant<HarmonicOverK, Constant, Explicit>;
  explicit StepSchedule(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

}  // namespace subgrad
