// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and independent oracles for the test suites.
//
// The oracles here are deliberately built from closed forms or from
// quadratures structurally unrelated to the library's own rules (different
// parametrizations, different node layouts), so a disagreement points at the
// library rather than at a shared code path.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "tfac/channel.hpp"
#include "tfac/contour.hpp"
#include "tfac/gauss.hpp"
#include "tfac/kernel.hpp"
#include "tfac/linalg.hpp"
#include "tfac/model.hpp"

namespace fixtures {

using tfac::CMatrix;
using tfac::Complex;
using tfac::CVector;

// ---------------------------------------------------------------------------
// Scalar reference problem: a = 2, K'(mu) = c * exp(-(mu - 1/2)) on [1/2, oo).
// ---------------------------------------------------------------------------

constexpr double kScalarCoupling = 0.01;
constexpr double kScalarLambdaC = 0.5;
constexpr double kScalarBeta = 6.0;
constexpr double kScalarA = 2.0;

inline CMatrix mat1(double v) {
  CMatrix m(1, 1);
  m(0, 0) = v;
  return m;
}

inline tfac::TransferModel scalar_model(double coupling = kScalarCoupling) {
  return tfac::make_model(mat1(kScalarA),
                          tfac::scalar_exp_kernel(coupling, kScalarLambdaC, kScalarBeta, 0.25),
                          1.5, 2.5, 0.4);
}

inline tfac::ContourSpec scalar_spec(int sheet = -1, double depth = 0.6,
                                     double beta = kScalarBeta, int n_control = 9) {
  return tfac::semi_ellipse_spec(sheet, kScalarLambdaC, beta, depth, n_control);
}

// Reference values for the depth-0.6 scalar contour, frozen from
// tools/oracles/scalar_contour_oracle.py (adaptive quadrature on the exact
// spline geometry, exact |mu - 2| distances).
constexpr double kScalarVarExact = 1.176896289188465e-02;
constexpr double kScalarDistExact = 5.307994598711541e-01;
constexpr double kScalarRMinExact = 2.501075937888017e-02;
constexpr double kScalarRMaxExact = 4.050624293941227e-01;

inline Complex scalar_kprime(Complex mu, double coupling = kScalarCoupling) {
  return coupling * std::exp(-(mu - kScalarLambdaC));
}

// m(z) off the half-line, by composite Gauss panels of width 1 on
// [lambda_c, lambda_c + 40] (the discarded remainder weighs < 5e-18 of the
// coupling).  Accurate to ~1e-12 for |Im z| >= 0.3 or Re z < 0.
inline Complex scalar_m_oracle(Complex z, double coupling = kScalarCoupling) {
  static const tfac::GaussRule g = tfac::gauss_legendre(24);
  Complex v = 0.0;
  const int panels = 40;
  for (int p = 0; p < panels; ++p) {
    const double a = kScalarLambdaC + static_cast<double>(p);
    for (int i = 0; i < 24; ++i) {
      const double mu = a + 0.5 + 0.5 * g.x[i];
      const double w = 0.5 * g.w[i];
      v += w * scalar_kprime(mu, coupling) * z / (z - mu);
    }
  }
  return kScalarA - z + v;
}

// Continued m_Gamma(z) on sheet -1 via a lower semicircular detour from
// lambda_c to beta (plain Gauss panels in the angle, no spline), plus the
// same truncated-half-line tail as above.  Valid for z strictly between the
// interval and the semicircle and away from the tail.
inline Complex scalar_m_gamma_oracle(Complex z, double coupling = kScalarCoupling) {
  static const tfac::GaussRule g = tfac::gauss_legendre(32);
  const double c = 0.5 * (kScalarLambdaC + kScalarBeta);
  const double r = 0.5 * (kScalarBeta - kScalarLambdaC);
  Complex v = 0.0;
  const int panels = 8;
  for (int p = 0; p < panels; ++p) {
    const double th0 = tfac::kPi * (1.0 + static_cast<double>(p) / panels);
    const double th1 = tfac::kPi * (1.0 + static_cast<double>(p + 1) / panels);
    for (int i = 0; i < 32; ++i) {
      const double th = 0.5 * (th0 + th1) + 0.5 * (th1 - th0) * g.x[i];
      const double w = 0.5 * (th1 - th0) * g.w[i];
      const Complex e(std::cos(th), std::sin(th));
      const Complex mu = c + r * e;
      const Complex dmu = tfac::kI * r * e;
      v += w * scalar_kprime(mu, coupling) * z / (z - mu) * dmu;
    }
  }
  static const tfac::GaussRule gt = tfac::gauss_legendre(24);
  const int tail_panels = 40;
  for (int p = 0; p < tail_panels; ++p) {
    const double a = kScalarBeta + static_cast<double>(p);
    for (int i = 0; i < 24; ++i) {
      const double mu = a + 0.5 + 0.5 * gt.x[i];
      const double w = 0.5 * gt.w[i];
      v += w * scalar_kprime(mu, coupling) * z / (z - mu);
    }
  }
  return kScalarA - z + v;
}

// d m_Gamma / dz of the discrete oracle above (exact derivative of the sum).
inline Complex scalar_m_gamma_prime_oracle(Complex z, double coupling = kScalarCoupling) {
  static const tfac::GaussRule g = tfac::gauss_legendre(32);
  const double c = 0.5 * (kScalarLambdaC + kScalarBeta);
  const double r = 0.5 * (kScalarBeta - kScalarLambdaC);
  Complex v = 0.0;
  const int panels = 8;
  for (int p = 0; p < panels; ++p) {
    const double th0 = tfac::kPi * (1.0 + static_cast<double>(p) / panels);
    const double th1 = tfac::kPi * (1.0 + static_cast<double>(p + 1) / panels);
    for (int i = 0; i < 32; ++i) {
      const double th = 0.5 * (th0 + th1) + 0.5 * (th1 - th0) * g.x[i];
      const double w = 0.5 * (th1 - th0) * g.w[i];
      const Complex e(std::cos(th), std::sin(th));
      const Complex mu = c + r * e;
      const Complex dmu = tfac::kI * r * e;
      v += w * scalar_kprime(mu, coupling) * (-mu / ((z - mu) * (z - mu))) * dmu;
    }
  }
  static const tfac::GaussRule gt = tfac::gauss_legendre(24);
  const int tail_panels = 40;
  for (int p = 0; p < tail_panels; ++p) {
    const double a = kScalarBeta + static_cast<double>(p);
    for (int i = 0; i < 24; ++i) {
      const double mu = a + 0.5 + 0.5 * gt.x[i];
      const double w = 0.5 * gt.w[i];
      v += w * scalar_kprime(mu, coupling) * (-mu / ((z - mu) * (z - mu)));
    }
  }
  return -1.0 + v;
}

struct NewtonRoot {
  Complex z;
  int iterations = 0;
  bool converged = false;
};

// Root of the continued scalar transfer function near z0, by Newton on the
// oracle quadrature with its exact derivative.
inline NewtonRoot scalar_resonance_oracle(Complex z0, double coupling = kScalarCoupling) {
  NewtonRoot out;
  out.z = z0;
  for (int it = 0; it < 50; ++it) {
    const Complex f = scalar_m_gamma_oracle(out.z, coupling);
    const Complex fp = scalar_m_gamma_prime_oracle(out.z, coupling);
    const Complex step = f / fp;
    out.z -= step;
    out.iterations = it + 1;
    if (std::abs(step) < 1e-13) {
      out.converged = true;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Atomic-measure models: exact rational sums.
// ---------------------------------------------------------------------------

inline CMatrix atomic_m_oracle(const tfac::TransferModel& m, Complex z) {
  const tfac::AtomicMeasure& am = m.atoms();
  CMatrix out = m.a_tilde - z * CMatrix::Identity(m.dim(), m.dim());
  for (std::size_t j = 0; j < am.points.size(); ++j) {
    out += (z / (z - am.points[j])) * am.weights[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Section-5 channel: spectral-measure oracle for K(mu) and its mu-derivative.
// ---------------------------------------------------------------------------

// K(mu)_{ij} = s(x_i) q(x_j) w_j / sqrt(2 pi)
//                * int_{lambda_c}^{mu} sqrt(mu'-lambda_c)/mu'
//                      * cos(sqrt(mu'-lambda_c) (x_i-x_j)) dmu'.
// Substituting mu' = lambda_c + u^2 makes the integrand entire:
//   2 u^2/(lambda_c + u^2) * cos(u dx),  u in [0, sqrt(mu - lambda_c)].
// On a uniform grid the integral depends only on |i - j|, so one table of
// 4x48-point Gauss panels serves the whole matrix.
inline CMatrix channel_k_oracle(const tfac::ChannelSpec& spec, const tfac::Grid& grid,
                                double mu) {
  const double lc = spec.lambda_c;
  const double uend = std::sqrt(mu - lc);
  const int n = static_cast<int>(grid.x.size());
  const double dx = grid.x[1] - grid.x[0];
  static const tfac::GaussRule g = tfac::gauss_legendre(48);
  std::vector<double> table(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    const double delta = dx * k;
    double acc = 0.0;
    const int panels = 4;
    for (int p = 0; p < panels; ++p) {
      const double a = uend * p / panels;
      const double b = uend * (p + 1) / panels;
      for (int i = 0; i < 48; ++i) {
        const double u = 0.5 * (a + b) + 0.5 * (b - a) * g.x[i];
        const double w = 0.5 * (b - a) * g.w[i];
        acc += w * 2.0 * u * u / (lc + u * u) * std::cos(u * delta);
      }
    }
    table[static_cast<std::size_t>(k)] = acc / std::sqrt(2.0 * tfac::kPi);
  }
  CMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    const double si = tfac::profile_s(spec, grid.x[static_cast<std::size_t>(i)]);
    for (int j = 0; j < n; ++j) {
      const double qj = tfac::profile_q(spec, grid.x[static_cast<std::size_t>(j)]);
      out(i, j) = si * qj * grid.w[static_cast<std::size_t>(j)] *
                  table[static_cast<std::size_t>(std::abs(i - j))];
    }
  }
  return out;
}

// Symmetric difference quotient of the spectral-measure oracle: the
// independent reference for K'(mu) at real mu > lambda_c.
inline CMatrix channel_kprime_fd(const tfac::ChannelSpec& spec, const tfac::Grid& grid,
                                 double mu, double h = 1e-4) {
  const CMatrix hi = channel_k_oracle(spec, grid, mu + h);
  const CMatrix lo = channel_k_oracle(spec, grid, mu - h);
  return (hi - lo) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// Generic helpers.
// ---------------------------------------------------------------------------

inline double rel_defect(const CMatrix& got, const CMatrix& want) {
  return tfac::op_norm(got - want) / (1.0 + tfac::op_norm(want));
}

inline CMatrix random_matrix(int n, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = scale * Complex(g(rng), g(rng));
    }
  }
  return a;
}

}  // namespace fixtures
