// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "tfac/domain.hpp"
#include "tfac/errors.hpp"
#include "tfac/linalg.hpp"
#include "tfac/types.hpp"

namespace tfac {

// Low-rank split K'(mu) = left * right with left n x r and right r x n.
struct LowRankFactors {
  CMatrix left;
  CMatrix right;
};

// Matrix-valued density K'(mu) of an absolutely continuous operator measure on
// [lambda_c, infinity), analytic on the domain. Kernels of small rank expose a
// factor split so node-heavy quadratures stay O(r n^2) per node.
struct KernelDerivative {
  int dim = 0;
  double lambda_c = 0.0;
  double beta = 0.0;  // where deformed arcs rejoin the half-line
  HolomorphyDomain domain;
  bool low_rank = false;
  std::function<CMatrix(Complex)> dense;
  std::function<LowRankFactors(Complex)> factors;  // set iff low_rank
};

// Domain-checked evaluation. The half-line (lambda_c, infinity) lies inside
// both domain shapes, so a single containment test covers all legal points.
inline CMatrix eval_kernel(const KernelDerivative& k, Complex mu) {
  const bool on_halfline = mu.imag() == 0.0 && mu.real() >= k.lambda_c;
  if (!on_halfline && !k.domain.contains(mu)) {
    throw DomainError("eval_kernel: point (" + std::to_string(mu.real()) + ", " +
                      std::to_string(mu.imag()) + ") lies outside the holomorphy domain");
  }
  return k.dense(mu);
}

// Operator norm of K'(mu); for a rank-r split the norm comes from the r x r
// product (L^H L)(R R^H) instead of an n x n SVD.
inline double kernel_norm(const KernelDerivative& k, Complex mu) {
  if (k.low_rank) {
    const LowRankFactors f = k.factors(mu);
    const CMatrix g = (f.left.adjoint() * f.left) * (f.right * f.right.adjoint());
    Eigen::ComplexEigenSolver<CMatrix> es(g, false);
    double top = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      top = std::max(top, es.eigenvalues()(i).real());
    }
    return std::sqrt(std::max(0.0, top));
  }
  return op_norm(k.dense(mu));
}

// K'(mu) = 0; the continuation of A - z to the other sheet is A - z itself.
inline KernelDerivative zero_kernel(int n, double lambda_c, double beta,
                                    HolomorphyDomain domain) {
  KernelDerivative k;
  k.dim = n;
  k.lambda_c = lambda_c;
  k.beta = beta;
  k.domain = domain;
  k.low_rank = false;
  k.dense = [n](Complex) { return CMatrix::Zero(n, n); };
  return k;
}

// Scalar entire kernel c * exp(-(mu - lambda_c)); the workhorse of the 1x1
// regression fixtures.
inline KernelDerivative scalar_exp_kernel(double coupling, double lambda_c, double beta,
                                          double domain_re_min) {
  KernelDerivative k;
  k.dim = 1;
  k.lambda_c = lambda_c;
  k.beta = beta;
  k.domain = HolomorphyDomain::half_plane(domain_re_min);
  k.low_rank = false;
  k.dense = [coupling, lambda_c](Complex mu) {
    CMatrix m(1, 1);
    m(0, 0) = coupling * std::exp(-(mu - lambda_c));
    return m;
  };
  return k;
}

}  // namespace tfac
