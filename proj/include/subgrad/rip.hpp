#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "subgrad/matrix.hpp"

namespace subgrad {

/// Lower bound c for the restricted-isometry-type condition
///   (1/N) sum_i <A_i,B>^2 >= c ||B||_F^2.
/// Computed as the smallest eigenvalue of the N-normalized Gram operator, so
/// the bound holds for every matrix B, not only those of low rank; it is a
/// valid (possibly conservative) certificate.
struct RipCertificate {
  double c = 0.0;
  std::string method = "exact-gram";
};

inline RipCertificate rip_lower_certificate(const std::vector<DenseMatrix>& A,
                                            std::size_t size_cap = 4096) {
  if (A.empty()) throw ParameterError("rip_lower_certificate: need at least one matrix");
  const std::size_t m = A.front().rows, n = A.front().cols;
  for (const DenseMatrix& Ai : A)
    if (Ai.rows != m || Ai.cols != n) throw ParameterError("rip_lower_certificate: shape mismatch");
  const std::size_t d = m * n;
  if (d > size_cap) throw SizeError("rip_lower_certificate: mn exceeds the dense Gram cap");

  DenseMatrix G(d, d);
  const double w = 1.0 / static_cast<double>(A.size());
  for (const DenseMatrix& Ai : A)
    for (std::size_t p = 0; p < d; ++p) {
      const double vp = Ai.a[p] * w;
      for (std::size_t q = 0; q < d; ++q) G(p, q) += vp * Ai.a[q];
    }

  const Vec eig = jacobi_eigenvalues(G, 1e-10);
  const double lambda_min = *std::min_element(eig.begin(), eig.end());
  RipCertificate cert;
  cert.c = std::max(0.0, lambda_min);  // Gram operator is PSD; clamp rounding
  return cert;
}

}  // namespace subgrad
