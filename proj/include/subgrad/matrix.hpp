#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "subgrad/errors.hpp"

namespace subgrad {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Dense row-major matrix of doubles.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec a;  // rows*cols entries, row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  DenseMatrix(std::size_t r, std::size_t c, Vec entries) : rows(r), cols(c), a(std::move(entries)) {
    if (a.size() != rows * cols) throw ParameterError("DenseMatrix: entry count does not match shape");
  }

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  std::size_t size() const { return a.size(); }
};

/// C = A * B
inline DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.cols != B.rows) throw ParameterError("matmul: inner dimensions differ");
  DenseMatrix C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      for (std::size_t j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

/// C = A * B^T
inline DenseMatrix matmul_nt(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.cols != B.cols) throw ParameterError("matmul_nt: inner dimensions differ");
  DenseMatrix C(A.rows, B.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < B.rows; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < A.cols; ++k) s += A(i, k) * B(j, k);
      C(i, j) = s;
    }
  return C;
}

/// C = A^T * B
inline DenseMatrix matmul_tn(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.rows != B.rows) throw ParameterError("matmul_tn: inner dimensions differ");
  DenseMatrix C(A.cols, B.cols);
  for (std::size_t k = 0; k < A.rows; ++k)
    for (std::size_t i = 0; i < A.cols; ++i) {
      const double aki = A(k, i);
      for (std::size_t j = 0; j < B.cols; ++j) C(i, j) += aki * B(k, j);
    }
  return C;
}

inline double frobenius_inner(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw ParameterError("frobenius_inner: shapes differ");
  return dot(A.a, B.a);
}

inline double frobenius_norm(const DenseMatrix& A) { return norm(A.a); }

inline DenseMatrix subtract(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw ParameterError("subtract: shapes differ");
  DenseMatrix C(A.rows, A.cols);
  for (std::size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.a[i] - B.a[i];
  return C;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, iterated
/// until the off-diagonal Frobenius mass falls below rel_tol times the total.
/// The input is copied; only the diagonal (eigenvalues) is returned, unsorted.
inline Vec jacobi_eigenvalues(DenseMatrix A, double rel_tol = 1e-10) {
  if (A.rows != A.cols) throw ParameterError("jacobi_eigenvalues: matrix not square");
  const std::size_t n = A.rows;
  const double total = frobenius_norm(A);
  if (n <= 1 || total == 0.0) return A.rows ? Vec{A(0, 0)} : Vec{};

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * A(i, j) * A(i, j);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_norm() > rel_tol * total; ++sweep) {
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
  }
  Vec eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = A(i, i);
  return eig;
}

/// Orthonormal basis of span{v_1,...,v_N} by modified Gram-Schmidt.
/// Vectors whose residual norm falls below tol times their original norm are
/// treated as dependent and dropped.
inline std::vector<Vec> gram_schmidt_basis(const std::vector<Vec>& vs, double tol = 1e-12) {
  std::vector<Vec> q;
  for (const Vec& v : vs) {
    const double v0 = norm(v);
    if (v0 == 0.0) continue;
    Vec w = v;
    for (const Vec& u : q) {
      const double c = dot(u, w);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * u[i];
    }
    // second pass for numerical orthogonality
    for (const Vec& u : q) {
      const double c = dot(u, w);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * u[i];
    }
    const double wn = norm(w);
    if (wn <= tol * v0) continue;
    for (double& x : w) x /= wn;
    q.push_back(std::move(w));
  }
  return q;
}

/// Component of x orthogonal to the span of an orthonormal basis.
inline Vec orthogonal_complement_component(const Vec& x, const std::vector<Vec>& basis) {
  Vec w = x;
  for (const Vec& u : basis) {
    const double c = dot(u, w);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * u[i];
  }
  return w;
}

}  // namespace subgrad
