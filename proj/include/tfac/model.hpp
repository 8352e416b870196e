// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tfac/gauss.hpp"
#include "tfac/hull.hpp"
#include "tfac/kernel.hpp"
#include "tfac/types.hpp"

namespace tfac {

// Purely atomic operator measure sum_j K_j delta_{mu_j}. Dirac weights cannot
// be carried by a quadrature rule, so models built on one support exact
// rational evaluation of V(z) but refuse contour deformation.
struct AtomicMeasure {
  int dim = 0;
  std::vector<double> points;    // mu_j > 0, strictly increasing
  std::vector<CMatrix> weights;  // K_j, one per point
};

// A transfer-function problem: entry A of the operator matrix together with
// the measure generating the perturbation V(z) = integral K'(mu) z/(z - mu).
// The search box and margin eta locate where resonances are certified.
struct TransferModel {
  CMatrix a_tilde;
  std::variant<KernelDerivative, AtomicMeasure> measure;
  double box_lo = 0.0;
  double box_hi = 0.0;
  double eta = 0.0;
  NumericalRangeHull hull;  // of a_tilde, computed once at construction
  double a_norm = 0.0;

  bool has_kernel() const { return std::holds_alternative<KernelDerivative>(measure); }
  const KernelDerivative& kernel() const { return std::get<KernelDerivative>(measure); }
  const AtomicMeasure& atoms() const { return std::get<AtomicMeasure>(measure); }
  Eigen::Index dim() const { return a_tilde.rows(); }
};

inline TransferModel make_model(CMatrix a_tilde, KernelDerivative kernel, double box_lo,
                                double box_hi, double eta, int hull_angles = 256) {
  if (a_tilde.rows() != a_tilde.cols()) {
    throw ConfigError("make_model: a_tilde must be square");
  }
  if (kernel.dim != a_tilde.rows()) {
    throw ConfigError("make_model: kernel dimension " + std::to_string(kernel.dim) +
                      " does not match a_tilde dimension " +
                      std::to_string(a_tilde.rows()));
  }
  if (!(box_lo < box_hi) || !(eta > 0.0)) {
    throw ConfigError("make_model: need box_lo < box_hi and eta > 0");
  }
  TransferModel m;
  m.a_tilde = std::move(a_tilde);
  m.measure = std::move(kernel);
  m.box_lo = box_lo;
  m.box_hi = box_hi;
  m.eta = eta;
  m.hull = numerical_range_hull(m.a_tilde, hull_angles);
  m.a_norm = op_norm(m.a_tilde);
  return m;
}

inline TransferModel make_model(CMatrix a_tilde, AtomicMeasure atoms, double box_lo,
                                double box_hi, double eta, int hull_angles = 256) {
  if (a_tilde.rows() != a_tilde.cols()) {
    throw ConfigError("make_model: a_tilde must be square");
  }
  if (atoms.dim != a_tilde.rows()) {
    throw ConfigError("make_model: measure dimension does not match a_tilde");
  }
  for (std::size_t j = 0; j < atoms.points.size(); ++j) {
    if (!(atoms.points[j] > 0.0)) {
      throw ConfigError("make_model: atomic measure points must be positive");
    }
    if (j > 0 && !(atoms.points[j] > atoms.points[j - 1])) {
      throw ConfigError("make_model: atomic measure points must be strictly increasing");
    }
    if (atoms.weights[j].rows() != atoms.dim || atoms.weights[j].cols() != atoms.dim) {
      throw ConfigError("make_model: atomic weight shape mismatch");
    }
  }
  TransferModel m;
  m.a_tilde = std::move(a_tilde);
  m.measure = std::move(atoms);
  m.box_lo = box_lo;
  m.box_hi = box_hi;
  m.eta = eta;
  m.hull = numerical_range_hull(m.a_tilde, hull_angles);
  m.a_norm = op_norm(m.a_tilde);
  return m;
}

// Checks recorded by validate_model. gamma_* are least-squares slope estimates
// of log ||K'|| against log(distance to the endpoint); NaN when the kernel is
// identically zero near that endpoint.
struct ValidationReport {
  double tail_estimate = 0.0;  // integral of ||K'(mu)|| / (1 + mu) over [lambda_c, inf)
  bool tail_converged = false;
  double gamma_lambda_c = std::numeric_limits<double>::quiet_NaN();
  double gamma_beta = std::numeric_limits<double>::quiet_NaN();
  bool endpoint_pass = false;
  bool hull_in_box = false;
  bool box_in_domain = false;
  bool passed = false;
  std::string reason;
};

namespace detail {

// Integral of ||K'(mu)||/(1+mu) over [a, b] by composite Gauss-Legendre with
// an s^2 map at the left end absorbing (mu - a)^gamma endpoint behaviour.
inline double weighted_norm_integral(const KernelDerivative& k, double a, double b,
                                     int order) {
  const GaussRule g = gauss_legendre(order);
  double total = 0.0;
  // mu = a + (b - a) s^2, dmu = 2 (b - a) s ds, s in [0, 1]
  for (int i = 0; i < order; ++i) {
    const double s = 0.5 * (g.x[i] + 1.0);
    const double ws = 0.5 * g.w[i];
    const double mu = a + (b - a) * s * s;
    const double jac = 2.0 * (b - a) * s;
    total += ws * jac * kernel_norm(k, Complex(mu, 0.0)) / (1.0 + mu);
  }
  return total;
}

// Log-log slope of ||K'|| at geometric offsets from an endpoint. Returns NaN
// when the kernel vanishes at all probe points (vacuously integrable there).
inline double endpoint_slope(const KernelDerivative& k, double endpoint, double sign,
                             double scale) {
  const double offsets[3] = {1e-2 * scale, 1e-3 * scale, 1e-4 * scale};
  double lx[3];
  double ly[3];
  for (int i = 0; i < 3; ++i) {
    const double mu = endpoint + sign * offsets[i];
    const double nv = kernel_norm(k, Complex(mu, 0.0));
    if (nv <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    lx[i] = std::log(offsets[i]);
    ly[i] = std::log(nv);
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3.0;
  const double my = (ly[0] + ly[1] + ly[2]) / 3.0;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

}  // namespace detail

// Structural admission test for a model: the weighted tail integral must
// converge, endpoint blow-up of ||K'|| must be integrable (slope > -1), the
// numerical range must sit inside the search box, and the eta-neighbourhood
// of the box must stay inside the kernel's holomorphy domain.
inline ValidationReport validate_model(const TransferModel& m, int order = 64) {
  ValidationReport r;

  // Hull-in-box: every boundary point of the numerical range inside [lo, hi]
  // with real part margin 0 (the box is a segment constraint on Re).
  r.hull_in_box = true;
  for (const Complex& p : m.hull.boundary) {
    if (p.real() < m.box_lo || p.real() > m.box_hi) {
      r.hull_in_box = false;
      break;
    }
  }

  if (!m.has_kernel()) {
    // Atomic measures: finitely many points, tail trivially finite. The
    // box-domain check has no kernel domain to test against.
    const AtomicMeasure& at = m.atoms();
    double tail = 0.0;
    for (std::size_t j = 0; j < at.points.size(); ++j) {
      tail += op_norm(at.weights[j]) / (1.0 + at.points[j]);
    }
    r.tail_estimate = tail;
    r.tail_converged = true;
    r.endpoint_pass = true;
    r.box_in_domain = true;
    r.passed = r.hull_in_box;
    r.reason = r.passed ? "ok" : "numerical range leaves the search box";
    return r;
  }

  const KernelDerivative& k = m.kernel();

  // Tail integral with doubling upper limits until the increment drops below
  // 1e-10 or the doubling budget runs out; increments that stop decreasing
  // mean the integral diverges.
  double upper = std::max(k.beta, k.lambda_c + 1.0) + 8.0;
  double total = detail::weighted_norm_integral(k, k.lambda_c, upper, order);
  bool converged = false;
  bool diverging = false;
  double prev_inc = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 64; ++pass) {
    const double next = upper * 2.0;
    const double inc = detail::weighted_norm_integral(k, upper, next, order);
    total += inc;
    upper = next;
    if (inc < 1e-10) {
      converged = true;
      break;
    }
    if (inc >= prev_inc) {
      diverging = true;
      break;
    }
    prev_inc = inc;
  }
  r.tail_estimate = total;
  r.tail_converged = converged && !diverging;

  // Endpoint integrability at lambda_c (from above) and beta (from below).
  const double scale = std::max(1.0, k.beta - k.lambda_c);
  r.gamma_lambda_c = detail::endpoint_slope(k, k.lambda_c, +1.0, scale);
  r.gamma_beta = detail::endpoint_slope(k, k.beta, -1.0, scale);
  const double gate = -1.0 + 1e-3;
  const bool lc_ok = std::isnan(r.gamma_lambda_c) || r.gamma_lambda_c > gate;
  const bool beta_ok = std::isnan(r.gamma_beta) || r.gamma_beta > gate;
  r.endpoint_pass = lc_ok && beta_ok;

  // The eta-stadium around the box must stay inside the holomorphy domain:
  // probe its boundary rectangle corners plus midpoints (domains are convex
  // in Re for fixed Im, so corners dominate for half-planes and parabolas).
  r.box_in_domain = true;
  const double xs[3] = {m.box_lo - m.eta, 0.5 * (m.box_lo + m.box_hi), m.box_hi + m.eta};
  const double ys[3] = {-m.eta, 0.0, m.eta};
  for (double x : xs) {
    for (double y : ys) {
      if (!k.domain.contains(Complex(x, y))) {
        r.box_in_domain = false;
      }
    }
  }

  r.passed = r.tail_converged && r.endpoint_pass && r.hull_in_box && r.box_in_domain;
  if (r.passed) {
    r.reason = "ok";
  } else if (!r.tail_converged) {
    r.reason = "weighted tail integral of ||K'|| did not converge";
  } else if (!r.endpoint_pass) {
    r.reason = "||K'|| is not integrable at an interval endpoint";
  } else if (!r.hull_in_box) {
    r.reason = "numerical range leaves the search box";
  } else {
    r.reason = "eta-neighbourhood of the box leaves the holomorphy domain";
  }
  return r;
}

}  // namespace tfac
