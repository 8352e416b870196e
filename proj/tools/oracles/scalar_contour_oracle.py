#!/usr/bin/env python3
# Copyright (c) the tfac contributors.
# SPDX-License-Identifier: Apache-2.0
"""Reference values for the scalar admissibility test.

Recomputes, with adaptive quadrature and exact geometry, the variation
integral, contour-to-range distance, and ball radii for the scalar problem

    a = 2,   K'(mu) = 0.01 * exp(-(mu - 1/2))  on  [1/2, inf),

continued through the depth-0.6 semi-ellipse arc (9 interior control points,
beta = 6, lower sheet).  The arc is the same cubic Hermite (Catmull-Rom)
spline the library builds, re-implemented here from its defining formulas;
everything downstream (quadrature, minimization) is scipy, not the library.

The printed values are frozen into tests/contour_test.cpp.  Regenerate with

    python3 tools/oracles/scalar_contour_oracle.py
"""

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

LAMBDA_C = 0.5
BETA = 6.0
DEPTH = 0.6
N_CONTROL = 9
SHEET = -1
COUPLING = 0.01
A_POINT = 2.0  # numerical range of the 1x1 operator [2]
A_NORM = 2.0


def spline():
    c = 0.5 * (LAMBDA_C + BETA)
    a = 0.5 * (BETA - LAMBDA_C)
    knots = [complex(LAMBDA_C, 0.0)]
    for j in range(1, N_CONTROL + 1):
        t = np.pi * j / (N_CONTROL + 1)
        knots.append(complex(c - a * np.cos(t), SHEET * DEPTH * np.sin(t)))
    knots.append(complex(BETA, 0.0))
    knots = np.array(knots)
    m = len(knots)
    tang = np.empty(m, dtype=complex)
    tang[0] = knots[1] - knots[0]
    tang[m - 1] = knots[m - 1] - knots[m - 2]
    for i in range(1, m - 1):
        tang[i] = 0.5 * (knots[i + 1] - knots[i - 1])
    return knots, tang


def point(knots, tang, seg, t):
    t2, t3 = t * t, t * t * t
    return ((2 * t3 - 3 * t2 + 1) * knots[seg] + (t3 - 2 * t2 + t) * tang[seg]
            + (-2 * t3 + 3 * t2) * knots[seg + 1] + (t3 - t2) * tang[seg + 1])


def deriv(knots, tang, seg, t):
    t2 = t * t
    return ((6 * t2 - 6 * t) * knots[seg] + (3 * t2 - 4 * t + 1) * tang[seg]
            + (-6 * t2 + 6 * t) * knots[seg + 1] + (3 * t2 - 2 * t) * tang[seg + 1])


def kprime_abs(mu):
    return COUPLING * abs(np.exp(-(mu - LAMBDA_C)))


def main():
    knots, tang = spline()
    nseg = len(knots) - 1

    # Variation integral over the arc, segment by segment.
    var_arc = 0.0
    for seg in range(nseg):
        def f(t, seg=seg):
            mu = point(knots, tang, seg, t)
            return kprime_abs(mu) / abs(mu - A_POINT) * abs(deriv(knots, tang, seg, t))
        val, err = quad(f, 0.0, 1.0, epsabs=1e-16, epsrel=1e-13, limit=400)
        var_arc += val

    # Tail part on [beta, inf).
    def ftail(mu):
        return kprime_abs(mu) / abs(mu - A_POINT)
    var_tail, err = quad(ftail, BETA, np.inf, epsabs=1e-18, epsrel=1e-13, limit=400)
    var = var_arc + var_tail

    # Distance from the contour to the numerical range {2}. The tail only
    # recedes (|mu - 2| >= 4 there), so the minimum sits on the arc.
    d = np.inf
    for seg in range(nseg):
        scan = np.linspace(0.0, 1.0, 2001)
        vals = np.array([abs(point(knots, tang, seg, t) - A_POINT) for t in scan])
        t0 = scan[int(np.argmin(vals))]
        lo, hi = max(0.0, t0 - 2e-3), min(1.0, t0 + 2e-3)
        res = minimize_scalar(lambda t, seg=seg: abs(point(knots, tang, seg, t) - A_POINT),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        d = min(d, vals.min(), res.fun)

    half = 0.5 * d * (1.0 - var)
    r_min = half - np.sqrt(half * half - d * var * A_NORM)
    r_max = d - np.sqrt(var * d * (d + A_NORM))

    print(f"var_arc   = {var_arc:.15e}")
    print(f"var_tail  = {var_tail:.15e}")
    print(f"var       = {var:.15e}")
    print(f"d         = {d:.15e}")
    print(f"r_min     = {r_min:.15e}")
    print(f"r_max     = {r_max:.15e}")


if __name__ == "__main__":
    main()
