// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "tfac/errors.hpp"
#include "tfac/types.hpp"

namespace tfac {

struct GaussRule {
  std::vector<double> x;  // nodes on (-1, 1), ascending
  std::vector<double> w;  // positive weights, sum = 2
};

// Gauss-Legendre nodes and weights by Newton iteration on P_n, seeded with the
// Chebyshev-like estimate. Accurate to machine precision for the orders used
// here (verified by polynomial exactness tests up to degree 2n-1).
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: order must be >= 1");
  GaussRule rule;
  rule.x.assign(n, 0.0);
  rule.w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pn = 0.0, dpn = 0.0;
    for (int it = 0; it < 64; ++it) {
      // Recurrence for P_n(t); p1 tracks P_{n-1} for the derivative.
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      pn = p0;
      dpn = n * (t * p0 - p1) / (t * t - 1.0);
      double dt = pn / dpn;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    // One clean evaluation at the converged node for the weight.
    {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      dpn = n * (t * p0 - p1) / (t * t - 1.0);
    }
    const double weight = 2.0 / ((1.0 - t * t) * dpn * dpn);
    rule.x[i] = -t;
    rule.w[i] = weight;
    rule.x[n - 1 - i] = t;
    rule.w[n - 1 - i] = weight;
  }
  if (n % 2 == 1) rule.x[n / 2] = 0.0;
  return rule;
}

// Nodes/weights mapped onto a real interval [a, b].
inline GaussRule gauss_legendre_on(double a, double b, int n) {
  GaussRule base = gauss_legendre(n);
  const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    base.x[i] = mid + rad * base.x[i];
    base.w[i] *= rad;
  }
  return base;
}

}  // namespace tfac
