// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Spectrum, operator norm, numerical-range hulls, and the certified
// resolvent bound.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "fixtures.hpp"
#include "tfac/hull.hpp"
#include "tfac/linalg.hpp"

using fixtures::random_matrix;
using tfac::CMatrix;
using tfac::Complex;
using tfac::CVector;

namespace {

bool spectrum_matches(const CVector& got, const std::vector<Complex>& want, double tol) {
  if (static_cast<std::size_t>(got.size()) != want.size()) return false;
  std::vector<bool> used(want.size(), false);
  for (Eigen::Index i = 0; i < got.size(); ++i) {
    bool hit = false;
    for (std::size_t j = 0; j < want.size(); ++j) {
      if (!used[j] && std::abs(got(i) - want[j]) <= tol) {
        used[j] = true;
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("spectrum of canonical matrices") {
  SECTION("diagonal") {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 3.0;
    REQUIRE(spectrum_matches(tfac::spectrum(a), {1.0, 3.0}, 1e-13));
  }
  SECTION("zero matrix") {
    REQUIRE(spectrum_matches(tfac::spectrum(CMatrix::Zero(3, 3)), {0.0, 0.0, 0.0}, 1e-13));
  }
  SECTION("companion matrix of z^2 - 3z + 2") {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 1) = -2.0;
    a(1, 0) = 1.0;
    a(1, 1) = 3.0;
    REQUIRE(spectrum_matches(tfac::spectrum(a), {1.0, 2.0}, 1e-12));
  }
}

TEST_CASE("operator norm of canonical matrices") {
  REQUIRE(tfac::op_norm(CMatrix::Identity(3, 3)) == Catch::Approx(1.0).margin(1e-14));

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = Complex(0.0, 2.0);
  d(1, 1) = -1.0;
  REQUIRE(tfac::op_norm(d) == Catch::Approx(2.0).margin(1e-14));

  CMatrix n = CMatrix::Zero(2, 2);
  n(0, 1) = 1.0;
  REQUIRE(tfac::op_norm(n) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("numerical range hull of a Hermitian matrix is the spectral segment") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 3.0;
  const tfac::NumericalRangeHull hull = tfac::numerical_range_hull(a);

  // Support at angle 0 is the top eigenvalue.
  REQUIRE(hull.support[0] == Catch::Approx(3.0).margin(1e-12));

  // Every boundary point is real and inside [1, 3].
  for (const Complex& p : hull.boundary) {
    REQUIRE(std::abs(p.imag()) <= 1e-10);
    REQUIRE(p.real() >= 1.0 - 1e-10);
    REQUIRE(p.real() <= 3.0 + 1e-10);
  }
}

TEST_CASE("hull support invariant: boundary points attain their half-planes") {
  std::mt19937 rng(101);
  const CMatrix a = random_matrix(5, rng);
  const tfac::NumericalRangeHull hull = tfac::numerical_range_hull(a);
  REQUIRE(hull.angles.size() == hull.support.size());
  REQUIRE(hull.boundary.size() == hull.angles.size());
  for (std::size_t k = 0; k < hull.angles.size(); ++k) {
    const Complex rot(std::cos(hull.angles[k]), std::sin(hull.angles[k]));
    const double attained = (rot * hull.boundary[k]).real();
    REQUIRE(std::abs(attained - hull.support[k]) <= 1e-10 * (1.0 + std::abs(hull.support[k])));
  }
}

TEST_CASE("numerical range of the nilpotent Jordan block is the disk of radius 1/2") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  const tfac::NumericalRangeHull hull = tfac::numerical_range_hull(a);

  for (double h : hull.support) {
    REQUIRE(h == Catch::Approx(0.5).margin(1e-10));
  }

  // Rayleigh quotients of random unit vectors stay inside the hull.
  std::mt19937 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    CVector x(2);
    x << Complex(g(rng), g(rng)), Complex(g(rng), g(rng));
    x.normalize();
    const Complex rayleigh = (x.adjoint() * a * x)(0, 0);
    REQUIRE(std::abs(rayleigh) <= 0.5 + 1e-12);
    REQUIRE(tfac::hull_distance(hull, rayleigh).lower <= 1e-12);
  }
}

TEST_CASE("hull of a 1x1 matrix degenerates to its point") {
  const tfac::NumericalRangeHull hull =
      tfac::numerical_range_hull(CMatrix::Constant(1, 1, Complex(2.0, 1.0)));
  const tfac::HullDistance at_point = tfac::hull_distance(hull, Complex(2.0, 1.0));
  REQUIRE(at_point.lower <= 1e-12);
  REQUIRE(at_point.upper <= 1e-12);

  const tfac::HullDistance away = tfac::hull_distance(hull, Complex(3.0, 1.0));
  REQUIRE(away.upper == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(away.lower <= 1.0 + 1e-12);
  REQUIRE(away.lower >= 1.0 - 1e-4);
}

TEST_CASE("hull distance brackets the true distance for the spectral segment") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 3.0;
  const tfac::NumericalRangeHull hull = tfac::numerical_range_hull(a);

  SECTION("exterior point") {
    const tfac::HullDistance hd = tfac::hull_distance(hull, Complex(2.0, 1.0));
    REQUIRE(hd.lower <= 1.0 + 1e-12);
    REQUIRE(hd.lower >= 1.0 - 1e-4);
    REQUIRE(hd.upper >= 1.0 - 1e-12);
    REQUIRE(hd.upper <= 1.0 + 1e-4);
    REQUIRE(hd.lower <= hd.upper + 1e-12);
  }
  SECTION("interior point") {
    const tfac::HullDistance hd = tfac::hull_distance(hull, Complex(2.0, 0.0));
    REQUIRE(hd.lower == 0.0);
    REQUIRE(hd.upper <= 1e-10);
  }
}

TEST_CASE("hull distance for the Jordan disk at 512 angles") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  const tfac::NumericalRangeHull hull = tfac::numerical_range_hull(a, 512);
  const tfac::HullDistance hd = tfac::hull_distance(hull, Complex(2.0, 0.0));
  REQUIRE(std::abs(hd.lower - 1.5) <= 1e-3);
  REQUIRE(std::abs(hd.upper - 1.5) <= 1e-3);
  REQUIRE(hd.lower <= 1.5 + 1e-12);
  REQUIRE(hd.upper >= 1.5 - 1e-12);
}

TEST_CASE("angle refinement tightens the bracket monotonically") {
  std::mt19937 rng(55);
  const CMatrix a = random_matrix(6, rng);
  const tfac::NumericalRangeHull coarse = tfac::numerical_range_hull(a, 256);
  const tfac::NumericalRangeHull fine = tfac::numerical_range_hull(a, 512);

  std::mt19937 zrng(56);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int t = 0; t < 25; ++t) {
    const Complex z(u(zrng), u(zrng));
    const tfac::HullDistance c = tfac::hull_distance(coarse, z);
    const tfac::HullDistance f = tfac::hull_distance(fine, z);
    // The 256-angle grid is nested in the 512-angle grid: more half-planes
    // can only raise the lower bound, a bigger inner polygon can only cut
    // the upper bound.
    REQUIRE(f.lower >= c.lower - 1e-12);
    REQUIRE(f.upper <= c.upper + 1e-12);
    REQUIRE(f.lower <= f.upper + 1e-12);
  }
}

TEST_CASE("the spectrum lies inside the certified hull") {
  std::mt19937 rng(73);
  for (int t = 0; t < 10; ++t) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const CMatrix a = random_matrix(n, rng);
    const tfac::NumericalRangeHull hull = tfac::numerical_range_hull(a);
    const CVector ev = tfac::spectrum(a);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      REQUIRE(tfac::hull_distance(hull, ev(i)).lower <= 1e-8);
    }
  }
}

TEST_CASE("certified resolvent bound on random matrices") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  int attempts = 0;
  while (checked < 100 && attempts < 10000) {
    ++attempts;
    const int n = 2 + static_cast<int>(rng() % 7);
    const CMatrix a = random_matrix(n, rng);
    const tfac::NumericalRangeHull hull = tfac::numerical_range_hull(a);
    const double spread = 2.0 * tfac::op_norm(a) + 2.0;
    const Complex z(spread * u(rng), spread * u(rng));
    const double lower = tfac::hull_distance(hull, z).lower;
    if (lower <= 1e-6) continue;  // separation certificate degenerate: no claim
    const CMatrix res =
        (a - z * CMatrix::Identity(n, n)).partialPivLu().solve(CMatrix::Identity(n, n));
    REQUIRE(tfac::op_norm(res) <= 1.0 / lower + 1e-8);
    ++checked;
  }
  REQUIRE(checked == 100);
}
