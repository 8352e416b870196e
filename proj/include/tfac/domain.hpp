// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "tfac/types.hpp"

namespace tfac {

// Simply connected open region the kernel derivative extends to. Two shapes
// cover the built-in models: a right half-plane and a parabolic region
//   { z : Re z > (lambda_c - alpha0^2) + (Im z)^2 / (4 alpha0^2) }
// opening to the right with vertex left of the branch point.
struct HolomorphyDomain {
  enum class Kind { HalfPlane, Parabola };

  Kind kind = Kind::HalfPlane;
  double re_min = 0.0;    // half-plane edge
  double lambda_c = 0.0;  // parabola data
  double alpha0 = 1.0;

  static HolomorphyDomain half_plane(double re_min) {
    HolomorphyDomain d;
    d.kind = Kind::HalfPlane;
    d.re_min = re_min;
    return d;
  }

  static HolomorphyDomain parabola(double lambda_c, double alpha0) {
    HolomorphyDomain d;
    d.kind = Kind::Parabola;
    d.lambda_c = lambda_c;
    d.alpha0 = alpha0;
    return d;
  }

  bool contains(Complex z) const {
    if (kind == Kind::HalfPlane) return z.real() > re_min;
    const double vertex = lambda_c - alpha0 * alpha0;
    return z.real() > vertex + z.imag() * z.imag() / (4.0 * alpha0 * alpha0);
  }
};

}  // namespace tfac
