#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "subgrad/matrix.hpp"
#include "subgrad/rng.hpp"

namespace subgrad {

// Synthetic problem instances for the three robust recovery models:
//   rpca     M = L* + S*,              fit XY^T to M entrywise
//   phase    b_i = <a_i,x*>^2 + s_i,   recover x*
//   sensing  b_i = <A_i,L*> + s_i,     fit XY^T through linear measurements
// The corruption S* / s has Bernoulli(p) support with magnitudes uniform on
// [-sigma_s, sigma_s] -- a synthetic stand-in, not a claim about any
// particular noise source.

/// A factored matrix variable (X, Y) standing for the product X Y^T. Flat
/// points order X row-major, then Y row-major; this layout is fixed so
/// finite-difference probes and serialization agree.
struct FactoredPair {
  DenseMatrix X;  // m x r
  DenseMatrix Y;  // n x r

  FactoredPair(DenseMatrix x_factor, DenseMatrix y_factor)
      : X(std::move(x_factor)), Y(std::move(y_factor)) {
    if (X.cols != Y.cols || X.cols < 1) throw ParameterError("FactoredPair: factor ranks differ");
  }

  static FactoredPair from_flat(const Vec& x, std::size_t m, std::size_t n, std::size_t r) {
    if (x.size() != (m + n) * r) throw ParameterError("FactoredPair: flat length mismatch");
    DenseMatrix X(m, r), Y(n, r);
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m * r), X.a.begin());
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(m * r), x.end(), Y.a.begin());
    return FactoredPair(std::move(X), std::move(Y));
  }

  Vec to_flat() const {
    Vec out(X.size() + Y.size());
    std::copy(X.a.begin(), X.a.end(), out.begin());
    std::copy(Y.a.begin(), Y.a.end(), out.begin() + static_cast<std::ptrdiff_t>(X.size()));
    return out;
  }

  DenseMatrix product() const { return matmul_nt(X, Y); }

  /// X^T X - Y^T Y, the r x r quantity conserved along factored flows.
  DenseMatrix balancedness() const { return subtract(matmul_tn(X, X), matmul_tn(Y, Y)); }
};

struct RpcaProvenance {
  DenseMatrix low_rank;  // L*
  DenseMatrix sparse;    // S*
  std::uint64_t seed = 0;
};

struct PhaseProvenance {
  Vec signal;  // x*
  Vec sparse;  // s
  std::uint64_t seed = 0;
};

struct SensingProvenance {
  DenseMatrix low_rank;  // L*
  Vec sparse;            // s
  std::uint64_t seed = 0;
};

struct RpcaInstance {
  DenseMatrix M;
  std::size_t r = 1;
  std::optional<RpcaProvenance> provenance;

  std::size_t m() const { return M.rows; }
  std::size_t n() const { return M.cols; }
};

struct PhaseInstance {
  std::vector<Vec> a;  // N measurement vectors in R^n
  Vec b;               // N observations
  std::optional<PhaseProvenance> provenance;

  std::size_t n() const { return a.empty() ? 0 : a.front().size(); }
  std::size_t count() const { return a.size(); }
};

struct SensingInstance {
  std::vector<DenseMatrix> A;  // N sensing matrices in R^{m x n}
  Vec b;
  std::size_t r = 1;
  std::optional<SensingProvenance> provenance;

  std::size_t m() const { return A.empty() ? 0 : A.front().rows; }
  std::size_t n() const { return A.empty() ? 0 : A.front().cols; }
  std::size_t count() const { return A.size(); }
};

namespace detail {

inline void check_corruption(double p, double sigma_s) {
  if (p < 0.0 || p > 1.0) throw ParameterError("corruption_frac must lie in [0,1]");
  if (sigma_s <= 0.0) throw ParameterError("corruption magnitude must be positive");
}

inline DenseMatrix random_normal_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix out(rows, cols);
  for (double& v : out.a) v = rng.normal();
  return out;
}

/// Each entry is nonzero independently with probability p, with value uniform
/// on [-sigma_s, sigma_s]. The support draw always precedes the value draw so
/// the stream layout is reproducible.
inline Vec sparse_corruption(Rng& rng, std::size_t count, double p, double sigma_s) {
  Vec s(count, 0.0);
  for (double& v : s)
    if (rng.next_double() < p) v = rng.uniform(-sigma_s, sigma_s);
  return s;
}

}  // namespace detail

/// Draw order: U (m x r_true), V (n x r_true), then the corruption matrix.
inline RpcaInstance gen_rpca_instance(std::uint64_t seed, std::size_t m, std::size_t n,
                                      std::size_t r_true, double p, double sigma_s,
                                      std::size_t r_fit = 0) {
  if (m < 1 || n < 1 || r_true < 1) throw ParameterError("gen_rpca_instance: dimensions must be >= 1");
  if (r_true > std::min(m, n)) throw ParameterError("gen_rpca_instance: r_true exceeds min(m,n)");
  detail::check_corruption(p, sigma_s);
  if (r_fit == 0) r_fit = r_true;
  if (r_fit > std::min(m, n)) throw ParameterError("gen_rpca_instance: r exceeds min(m,n)");

  Rng rng(seed);
  const DenseMatrix U = detail::random_normal_matrix(rng, m, r_true);
  const DenseMatrix V = detail::random_normal_matrix(rng, n, r_true);
  DenseMatrix L = matmul_nt(U, V);
  DenseMatrix S(m, n, detail::sparse_corruption(rng, m * n, p, sigma_s));

  RpcaInstance inst;
  inst.M = DenseMatrix(m, n);
  for (std::size_t i = 0; i < m * n; ++i) inst.M.a[i] = L.a[i] + S.a[i];
  inst.r = r_fit;
  inst.provenance = RpcaProvenance{std::move(L), std::move(S), seed};
  return inst;
}

/// Draw order: x* (n), then a_1..a_N (n each), then the corruption vector.
inline PhaseInstance gen_phase_instance(std::uint64_t seed, std::size_t n, std::size_t N, double p,
                                        double sigma_s) {
  if (n < 1 || N < 1) throw ParameterError("gen_phase_instance: dimensions must be >= 1");
  detail::check_corruption(p, sigma_s);

  Rng rng(seed);
  Vec signal(n);
  for (double& v : signal) v = rng.normal();
  std::vector<Vec> a(N);
  for (Vec& ai : a) {
    ai.resize(n);
    for (double& v : ai) v = rng.normal();
  }
  Vec s = detail::sparse_corruption(rng, N, p, sigma_s);

  PhaseInstance inst;
  inst.b.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double q = dot(a[i], signal);
    inst.b[i] = q * q + s[i];
  }
  inst.a = std::move(a);
  inst.provenance = PhaseProvenance{std::move(signal), std::move(s), seed};
  return inst;
}

/// Draw order: U (m x r_true), V (n x r_true), then A_1..A_N, then the
/// corruption vector.
inline SensingInstance gen_sensing_instance(std::uint64_t seed, std::size_t m, std::size_t n,
                                            std::size_t r_true, std::size_t r_fit, std::size_t N,
                                            double p, double sigma_s) {
  if (m < 1 || n < 1 || r_true < 1 || r_fit < 1 || N < 1)
    throw ParameterError("gen_sensing_instance: dimensions must be >= 1");
  if (r_true > std::min(m, n) || r_fit > std::min(m, n))
    throw ParameterError("gen_sensing_instance: rank exceeds min(m,n)");
  detail::check_corruption(p, sigma_s);

  Rng rng(seed);
  const DenseMatrix U = detail::random_normal_matrix(rng, m, r_true);
  const DenseMatrix V = detail::random_normal_matrix(rng, n, r_true);
  DenseMatrix L = matmul_nt(U, V);
  std::vector<DenseMatrix> A(N);
  for (DenseMatrix& Ai : A) Ai = detail::random_normal_matrix(rng, m, n);
  Vec s = detail::sparse_corruption(rng, N, p, sigma_s);

  SensingInstance inst;
  inst.b.resize(N);
  for (std::size_t i = 0; i < N; ++i) inst.b[i] = frobenius_inner(A[i], L) + s[i];
  inst.A = std::move(A);
  inst.r = r_fit;
  inst.provenance = SensingProvenance{std::move(L), std::move(s), seed};
  return inst;
}

}  // namespace subgrad
