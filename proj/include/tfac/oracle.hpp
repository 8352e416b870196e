// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfac/errors.hpp"
#include "tfac/linalg.hpp"
#include "tfac/model.hpp"
#include "tfac/types.hpp"

namespace tfac {

// Finite block model with a diagonal second channel: the full operator is
//   H = [[A, B C^{1/2}], [C^{1/2} D, C]],  C = diag(mu_j), mu_j > 0,
// written against the scaled couplings B, D directly. Everything about the
// transfer function of this model has a closed rational form, which makes it
// an independent check on the quadrature-based machinery.
struct DiscreteBlockModel {
  CMatrix a;        // n x n
  CMatrix b_tilde;  // n x m
  CMatrix d_tilde;  // m x n
  std::vector<double> mu;  // m channel points, > 0
};

inline void check_block(const DiscreteBlockModel& dm) {
  const Eigen::Index n = dm.a.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(dm.mu.size());
  if (dm.a.rows() != dm.a.cols()) throw ConfigError("block model: A must be square");
  if (dm.b_tilde.rows() != n || dm.b_tilde.cols() != m) {
    throw ConfigError("block model: B has the wrong shape");
  }
  if (dm.d_tilde.rows() != m || dm.d_tilde.cols() != n) {
    throw ConfigError("block model: D has the wrong shape");
  }
  for (double mu_j : dm.mu) {
    if (!(mu_j > 0.0)) throw ConfigError("block model: channel points must be positive");
  }
}

inline CMatrix build_block(const DiscreteBlockModel& dm) {
  check_block(dm);
  const Eigen::Index n = dm.a.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(dm.mu.size());
  CMatrix h = CMatrix::Zero(n + m, n + m);
  h.topLeftCorner(n, n) = dm.a;
  RVector root(m);
  for (Eigen::Index j = 0; j < m; ++j) root(j) = std::sqrt(dm.mu[j]);
  h.topRightCorner(n, m) = dm.b_tilde * root.asDiagonal();
  h.bottomLeftCorner(m, n) = root.asDiagonal() * dm.d_tilde;
  for (Eigen::Index j = 0; j < m; ++j) h(n + j, n + j) = dm.mu[j];
  return h;
}

// M(z) = (A - B D) - z + sum_j z (B e_j)(e_j^T D) / (z - mu_j): the closed
// rational form of the transfer function of H.
inline CMatrix oracle_m(const DiscreteBlockModel& dm, Complex z) {
  check_block(dm);
  const Eigen::Index n = dm.a.rows();
  CMatrix m = dm.a - dm.b_tilde * dm.d_tilde - z * identity(n);
  for (std::size_t j = 0; j < dm.mu.size(); ++j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    m += (z / (z - dm.mu[j])) * (dm.b_tilde.col(jj) * dm.d_tilde.row(jj));
  }
  return m;
}

// d/dz M(z) = -I - sum_j mu_j (B e_j)(e_j^T D) / (z - mu_j)^2.
inline CMatrix oracle_m_prime(const DiscreteBlockModel& dm, Complex z) {
  const Eigen::Index n = dm.a.rows();
  CMatrix m = -identity(n);
  for (std::size_t j = 0; j < dm.mu.size(); ++j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    const Complex d = z - dm.mu[j];
    m -= (dm.mu[j] / (d * d)) * (dm.b_tilde.col(jj) * dm.d_tilde.row(jj));
  }
  return m;
}

// || M(z)^{-1} - [(H - z)^{-1}]_{AA} ||: the compressed-resolvent identity.
inline double schur_defect(const DiscreteBlockModel& dm, Complex z) {
  const CMatrix h = build_block(dm);
  const Eigen::Index n = dm.a.rows();
  const Eigen::Index nm = h.rows();
  Eigen::PartialPivLU<CMatrix> lu_h(h - z * identity(nm));
  Eigen::PartialPivLU<CMatrix> lu_m(oracle_m(dm, z));
  auto diag_ratio = [](const Eigen::PartialPivLU<CMatrix>& lu) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Eigen::Index i = 0; i < lu.matrixLU().rows(); ++i) {
      const double d = std::abs(lu.matrixLU()(i, i));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    return hi > 0.0 ? lo / hi : 0.0;
  };
  if (diag_ratio(lu_h) < 1e-13 || diag_ratio(lu_m) < 1e-13) {
    throw NumericsError("schur_defect: near-singular solve at z = (" +
                        std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
  }
  const CMatrix res = lu_h.solve(CMatrix::Identity(nm, nm));
  const CMatrix minv = lu_m.solve(CMatrix::Identity(n, n));
  return op_norm(minv - res.topLeftCorner(n, n));
}

// Newton refinement of det M(z) = 0 through the trace identity
//   (log det M)'(z) = tr(M(z)^{-1} M'(z)).
struct RootReport {
  Complex z;
  int iterations = 0;
  double last_step = 0.0;
  bool converged = false;
};

inline RootReport det_root_newton(const DiscreteBlockModel& dm, Complex z0, double tol = 1e-12,
                                  int max_iter = 60) {
  RootReport rep;
  rep.z = z0;
  for (int it = 0; it < max_iter; ++it) {
    const CMatrix m = oracle_m(dm, rep.z);
    Eigen::PartialPivLU<CMatrix> lu(m);
    const Complex slope = lu.solve(oracle_m_prime(dm, rep.z)).trace();
    if (!(std::abs(slope) > 0.0) || !std::isfinite(std::abs(slope))) {
      return rep;  // stationary or broken slope: report non-convergence
    }
    const Complex step = 1.0 / slope;
    rep.z -= step;
    rep.iterations = it + 1;
    rep.last_step = std::abs(step);
    if (rep.last_step <= tol * (1.0 + std::abs(rep.z))) {
      rep.converged = true;
      return rep;
    }
  }
  return rep;
}

// The same data as a TransferModel over an atomic measure, K_j = (B e_j)(e_j^T D).
inline TransferModel to_transfer_model(const DiscreteBlockModel& dm, double box_lo,
                                       double box_hi, double eta) {
  check_block(dm);
  AtomicMeasure meas;
  meas.dim = static_cast<int>(dm.a.rows());
  for (std::size_t j = 0; j < dm.mu.size(); ++j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    meas.points.push_back(dm.mu[j]);
    meas.weights.push_back(dm.b_tilde.col(jj) * dm.d_tilde.row(jj));
  }
  return make_model(dm.a - dm.b_tilde * dm.d_tilde, std::move(meas), box_lo, box_hi, eta);
}

// Seeded random instance with well-separated channel points; the couplings
// are kept small enough that eigenvalue continuation stays tame.
inline DiscreteBlockModel random_block_model(int n, int m, unsigned seed,
                                             double coupling = 0.3) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  DiscreteBlockModel dm;
  dm.a.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) dm.a(i, j) = Complex(unit(gen), unit(gen));
  }
  dm.b_tilde.resize(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) dm.b_tilde(i, j) = coupling * Complex(unit(gen), unit(gen));
  }
  dm.d_tilde.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) dm.d_tilde(i, j) = coupling * Complex(unit(gen), unit(gen));
  }
  dm.mu.resize(m);
  std::uniform_real_distribution<double> spread(0.5, 6.0);
  for (int j = 0; j < m; ++j) dm.mu[static_cast<std::size_t>(j)] = spread(gen);
  std::sort(dm.mu.begin(), dm.mu.end());
  for (int j = 1; j < m; ++j) {
    // enforce separation so residues stay individually resolvable
    dm.mu[static_cast<std::size_t>(j)] =
        std::max(dm.mu[static_cast<std::size_t>(j)], dm.mu[static_cast<std::size_t>(j - 1)] + 0.2);
  }
  return dm;
}

}  // namespace tfac
