// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "tfac/errors.hpp"
#include "tfac/types.hpp"

namespace tfac {

// Support-function description of the numerical range of a matrix.
//
// For each angle theta_k the Hermitian part of e^{i theta_k} A gives the
// support value h_k = max over unit x of Re(e^{i theta_k} <Ax,x>), together
// with a boundary point p_k = <A x_k, x_k> attained by the top eigenvector.
// The half-planes {Re(e^{i theta_k} z) <= h_k} certify distances from the
// outside; the convex polygon of the p_k certifies distances from the inside.
struct NumericalRangeHull {
  std::vector<double> angles;
  std::vector<double> support;
  std::vector<Complex> boundary;
  std::vector<Complex> polygon;  // convex hull of boundary points, ccw
};

// Two-sided bound on dist(z, numerical range): lower <= true distance <= upper.
struct HullDistance {
  double lower = 0.0;
  double upper = 0.0;
};

namespace detail {

inline double cross(Complex o, Complex a, Complex b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) -
         (a.imag() - o.imag()) * (b.real() - o.real());
}

// Andrew monotone chain; tolerates duplicates and collinear inputs.
inline std::vector<Complex> convex_hull(std::vector<Complex> pts) {
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Complex a, Complex b) { return std::abs(a - b) < 1e-15; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Complex> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower_size = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower_size && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double point_segment_distance(Complex z, Complex a, Complex b) {
  const Complex ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 <= 0.0) return std::abs(z - a);
  double t = ((z - a).real() * ab.real() + (z - a).imag() * ab.imag()) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(z - (a + t * ab));
}

inline bool inside_convex(const std::vector<Complex>& poly, Complex z) {
  if (poly.size() < 3) return false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Complex a = poly[i];
    const Complex b = poly[(i + 1) % poly.size()];
    if (cross(a, b, z) < 0.0) return false;  // ccw polygon: z must stay left of every edge
  }
  return true;
}

}  // namespace detail

// Samples the support function of the numerical range at n_angles equispaced
// directions. Doubling n_angles keeps the old directions, so refined bounds
// only tighten.
inline NumericalRangeHull numerical_range_hull(const CMatrix& a, int n_angles = 256) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw NumericsError("numerical_range_hull: matrix must be square and nonempty");
  }
  if (!a.allFinite()) throw NumericsError("numerical_range_hull: non-finite input");
  if (n_angles < 16) throw ConfigError("numerical_range_hull: need at least 16 angles");

  NumericalRangeHull hull;
  hull.angles.reserve(n_angles);
  hull.support.reserve(n_angles);
  hull.boundary.reserve(n_angles);
  const Eigen::Index n = a.rows();
  for (int k = 0; k < n_angles; ++k) {
    const double theta = 2.0 * kPi * k / n_angles;
    const Complex phase(std::cos(theta), std::sin(theta));
    const CMatrix rotated = phase * a;
    const CMatrix herm = 0.5 * (rotated + rotated.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
    if (es.info() != Eigen::Success) {
      throw NumericsError("numerical_range_hull: Hermitian eigensolver failed");
    }
    const CVector x = es.eigenvectors().col(n - 1);
    hull.angles.push_back(theta);
    hull.support.push_back(es.eigenvalues()(n - 1));
    hull.boundary.push_back((x.adjoint() * a * x)(0, 0));
  }
  hull.polygon = detail::convex_hull(hull.boundary);
  return hull;
}

// Certified two-sided distance from z to the numerical range.
//
// lower: best half-plane separation max_k(Re(e^{i theta_k} z) - h_k), clamped
// at zero; never exceeds the true distance.
// upper: Euclidean distance to the inner polygon (zero inside); the polygon is
// a subset of the range, so this never falls below the true distance.
inline HullDistance hull_distance(const NumericalRangeHull& hull, Complex z) {
  if (hull.angles.empty()) throw NumericsError("hull_distance: empty hull");
  HullDistance d;
  double sep = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < hull.angles.size(); ++k) {
    const double re = z.real() * std::cos(hull.angles[k]) - z.imag() * std::sin(hull.angles[k]);
    sep = std::max(sep, re - hull.support[k]);
  }
  d.lower = std::max(0.0, sep);

  const auto& poly = hull.polygon;
  if (poly.empty()) {
    d.upper = std::numeric_limits<double>::infinity();
  } else if (poly.size() == 1) {
    d.upper = std::abs(z - poly[0]);
  } else if (poly.size() == 2) {
    d.upper = detail::point_segment_distance(z, poly[0], poly[1]);
  } else if (detail::inside_convex(poly, z)) {
    d.upper = 0.0;
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      best = std::min(best, detail::point_segment_distance(z, poly[i], poly[(i + 1) % poly.size()]));
    }
    d.upper = best;
  }
  return d;
}

}  // namespace tfac
