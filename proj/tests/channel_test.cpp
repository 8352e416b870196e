// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0
//
// The two-channel grid model: assembly of the coupled multiplication
// operator, the rank-2 analytic kernel derivative, discretization bound
// certificates, and the published demonstration scenario.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "tfac/channel.hpp"
#include "tfac/solver.hpp"
#include "tfac/factor.hpp"

namespace {

using tfac::CMatrix;
using tfac::Complex;

double discrete_l2(const tfac::Grid& grid, const std::function<double(double)>& f) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < grid.x.size(); ++j) {
    acc += grid.w(j) * f(grid.x(j)) * f(grid.x(j));
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("zero coupling decouples the channels exactly") {
  tfac::ChannelSpec spec;
  spec.eps_s = 0.0;
  const tfac::TransferModel m = tfac::build_channel_model(spec, 1.5, 2.5, 0.25, 6.0);
  const tfac::Grid grid = tfac::make_grid(spec);

  for (Eigen::Index i = 0; i < grid.x.size(); ++i) {
    for (Eigen::Index j = 0; j < grid.x.size(); ++j) {
      const Complex want = i == j ? Complex(tfac::profile_a(spec, grid.x(i)), 0.0)
                                  : Complex(0.0, 0.0);
      REQUIRE(m.a_tilde(i, j) == want);
    }
  }
  for (const Complex mu : {Complex(1.0, 0.0), Complex(2.5, -0.1)}) {
    REQUIRE(tfac::kernel_norm(m.kernel(), mu) == 0.0);
  }
  const tfac::BoundsReport rep = tfac::bounds_check(spec, m);
  REQUIRE(rep.hs_lhs == 0.0);
  REQUIRE(rep.pass);
  for (const tfac::BoundsSample& s : rep.samples) {
    REQUIRE(s.norm == 0.0);
    REQUIRE(s.bound == 0.0);
  }
}

TEST_CASE("assembly matches the closed-form coupled operator") {
  tfac::ChannelSpec spec;
  spec.lambda_c = 0.25;
  spec.half_width = 10.0;  // 2 L alpha0 = 20, the shortest admissible grid
  spec.points = 21;
  const tfac::TransferModel m = tfac::build_channel_model(spec, 1.5, 2.5, 0.2, 6.0);
  const tfac::Grid grid = tfac::make_grid(spec);

  // Grid invariants: weights sum to the interval length, abscissas symmetric.
  REQUIRE(std::abs(grid.w.sum() - 2.0 * spec.half_width) <= 1e-12);
  const Eigen::Index n = grid.x.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    REQUIRE(std::abs(grid.x(j) + grid.x(n - 1 - j)) <= 1e-12);
  }

  // The free-channel resolvent kernel at coincident points: 1/(2 sqrt(0.25)).
  const double rl = std::sqrt(spec.lambda_c);
  REQUIRE(std::exp(-rl * 0.0) / (2.0 * rl) == 1.0);

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double green =
          std::exp(-rl * std::abs(grid.x(i) - grid.x(j))) / (2.0 * rl);
      double want = spec.lambda_c * tfac::profile_s(spec, grid.x(i)) * green *
                    tfac::profile_q(spec, grid.x(j)) * grid.w(j);
      if (i == j) {
        want += tfac::profile_a(spec, grid.x(i)) -
                tfac::profile_s(spec, grid.x(i)) * tfac::profile_q(spec, grid.x(i));
      }
      REQUIRE(std::abs(m.a_tilde(i, j) - want) <= 1e-15 * (1.0 + std::abs(want)));
    }
  }
}

TEST_CASE("kernel derivative matches finite differences of the primitive") {
  tfac::ChannelSpec spec;
  spec.points = 61;
  const tfac::TransferModel m = tfac::build_channel_model(spec, 1.5, 2.5, 0.25, 6.0);
  const tfac::Grid grid = tfac::make_grid(spec);

  // K(mu) is quadratured from the spectral-density integral of the free
  // channel, entirely independently of the rank-2 factorization; the
  // symmetric difference quotient must recover K'(mu).
  for (const double mu : {0.8, 1.3, 2.0, 3.1, 4.6}) {
    const CMatrix lib = tfac::eval_kernel(m.kernel(), Complex(mu, 0.0));
    const CMatrix fd = fixtures::channel_kprime_fd(spec, grid, mu);
    REQUIRE(fixtures::rel_defect(lib, fd) <= 1e-4);
  }
}

TEST_CASE("discretization bound certificates hold with slack") {
  tfac::ChannelSpec spec;
  const tfac::TransferModel m = tfac::build_channel_model(spec, 1.5, 2.5, 0.25, 6.0);
  const tfac::BoundsReport rep = tfac::bounds_check(spec, m);

  REQUIRE(rep.hs_pass);
  REQUIRE(rep.hs_lhs <= rep.hs_rhs + 1e-10);
  REQUIRE(rep.hs_lhs > 0.0);
  REQUIRE(rep.samples.size() == 20);
  REQUIRE(rep.pass);

  const tfac::Grid grid = tfac::make_grid(spec);
  const double norm_s = discrete_l2(grid, [&](double x) { return tfac::profile_s(spec, x); });
  const double norm_q = discrete_l2(grid, [&](double x) { return tfac::profile_q(spec, x); });
  for (const tfac::BoundsSample& s : rep.samples) {
    REQUIRE(s.pass);
    REQUIRE(s.norm <= s.bound + 1e-10);
    if (s.mu.imag() == 0.0) {
      // On the half-line the phases are unimodular, so the bound collapses
      // to |mu - lambda_c|^{1/2} / (sqrt(2 pi) |mu|) * ||s|| ||q||.
      const double root = std::sqrt(s.mu.real() - spec.lambda_c);
      const double want =
          root / (2.0 * std::sqrt(2.0 * tfac::kPi) * s.mu.real()) * 2.0 * norm_s * norm_q;
      REQUIRE(std::abs(s.bound - want) <= 1e-12 * (1.0 + want));
    }
  }
}

TEST_CASE("published scenario passes validation and admissibility") {
  const tfac::DefaultScenario sc = tfac::default_scenario();
  const tfac::TransferModel m =
      tfac::build_channel_model(sc.channel, sc.box_lo, sc.box_hi, sc.eta, sc.beta);
  REQUIRE(m.dim() == 121);

  const tfac::ValidationReport vrep = tfac::validate_model(m);
  REQUIRE(vrep.passed);

  const tfac::AdmissibilityReport adm = tfac::admissibility(m, sc.contour, m.hull);
  REQUIRE(adm.admissible);
  REQUIRE(adm.var_upper < 1.0);
  REQUIRE(adm.best1_pass);
  REQUIRE(adm.best2_pass);
  REQUIRE(adm.r_min > 0.0);
  REQUIRE(adm.r_min < adm.r_max);
}

TEST_CASE("reflection symmetry of the assembled operator") {
  tfac::ChannelSpec spec;
  const tfac::TransferModel m = tfac::build_channel_model(spec, 1.5, 2.5, 0.25, 6.0);
  const Eigen::Index n = m.dim();
  CMatrix p = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p(i, n - 1 - i) = 1.0;
  REQUIRE(tfac::op_norm(p * m.a_tilde - m.a_tilde * p) <= 1e-12);
}

TEST_CASE("eigenvalues shadow the multiplication range") {
  tfac::ChannelSpec spec;
  const tfac::TransferModel m = tfac::build_channel_model(spec, 1.5, 2.5, 0.25, 6.0);
  const tfac::Grid grid = tfac::make_grid(spec);

  tfac::CVector mult(grid.x.size());
  for (Eigen::Index j = 0; j < grid.x.size(); ++j) {
    mult(j) = Complex(tfac::profile_a(spec, grid.x(j)) -
                          tfac::profile_s(spec, grid.x(j)) * tfac::profile_q(spec, grid.x(j)),
                      0.0);
  }
  Eigen::ComplexEigenSolver<CMatrix> es(m.a_tilde, /*computeEigenvectors=*/false);
  REQUIRE(es.info() == Eigen::Success);
  REQUIRE(tfac::hausdorff_distance(es.eigenvalues(), mult) <= 0.1);
}

TEST_CASE("resonances are stable under grid refinement") {
  auto run = [](int pts) {
    tfac::DefaultScenario sc = tfac::default_scenario();
    sc.channel.points = pts;
    const tfac::TransferModel m =
        tfac::build_channel_model(sc.channel, sc.box_lo, sc.box_hi, sc.eta, sc.beta);
    const tfac::ContourRule rule = tfac::build_rule(sc.contour, m);
    const tfac::TransferEvaluator ev(m, rule);
    const tfac::AdmissibilityReport adm = tfac::admissibility_from_rule(m, rule, m.hull);
    const tfac::SolutionReport right = tfac::solve_with(ev, adm, tfac::Kappa::right);
    const tfac::SolutionReport left = tfac::solve_with(ev, adm, tfac::Kappa::left);
    return tfac::resonance_set(m, ev.region(), right, left, adm.r_min);
  };
  // The fine abscissas contain the coarse ones, so every coarse resonance
  // tracks a fine one; the drift is the trapezoid error of the coupling,
  // second order in the spacing.
  const tfac::ResonanceTable coarse = run(121);
  const tfac::ResonanceTable fine = run(241);
  REQUIRE(coarse.inclusion_pass);
  REQUIRE(fine.inclusion_pass);
  REQUIRE(coarse.hausdorff <= 1e-8);

  std::size_t tagged = 0;
  double drift = 0.0;
  for (const tfac::ResonanceEntry& e : coarse.entries) {
    if (!e.unphysical_sheet) continue;
    ++tagged;
    double best = std::numeric_limits<double>::infinity();
    for (const tfac::ResonanceEntry& f : fine.entries) {
      best = std::min(best, std::abs(e.z - f.z));
    }
    drift = std::max(drift, best);
  }
  REQUIRE(tagged > 0);
  REQUIRE(drift <= 1e-3);
}

TEST_CASE("channel construction rejects bad parameters") {
  const auto build = [](tfac::ChannelSpec spec, double lo = 1.5, double hi = 2.5,
                        double eta = 0.25, double beta = 6.0) {
    return tfac::build_channel_model(spec, lo, hi, eta, beta);
  };

  tfac::ChannelSpec even;
  even.points = 122;
  REQUIRE_THROWS_AS(build(even), tfac::ConfigError);
  tfac::ChannelSpec tiny;
  tiny.points = 1;
  REQUIRE_THROWS_AS(build(tiny), tfac::ConfigError);

  tfac::ChannelSpec nolc;
  nolc.lambda_c = 0.0;
  REQUIRE_THROWS_AS(build(nolc), tfac::ConfigError);
  tfac::ChannelSpec noalpha;
  noalpha.alpha0 = 0.0;
  REQUIRE_THROWS_AS(build(noalpha), tfac::ConfigError);

  tfac::ChannelSpec shortgrid;
  shortgrid.half_width = 8.0;  // 2 L alpha0 = 16 < 20
  REQUIRE_THROWS_WITH(build(shortgrid), Catch::Matchers::ContainsSubstring("grid too short"));

  REQUIRE_THROWS_WITH(build(tfac::ChannelSpec{}, 0.7, 2.5),
                      Catch::Matchers::ContainsSubstring("box_lo - eta > lambda_c"));
  REQUIRE_THROWS_WITH(build(tfac::ChannelSpec{}, 1.5, 2.5, 0.25, 0.4),
                      Catch::Matchers::ContainsSubstring("beta"));

  // The eta-neighbourhood of the box must stay inside the parabola: a slow
  // profile decay narrows the domain until the box pokes out.
  tfac::ChannelSpec narrow;
  narrow.lambda_c = 1.2;
  narrow.alpha0 = 0.3;
  narrow.half_width = 34.0;  // keeps 2 L alpha0 = 20.4 above the decay gate
  narrow.points = 5;
  REQUIRE_THROWS_WITH(build(narrow), Catch::Matchers::ContainsSubstring("holomorphy domain"));

  // An amplitude profile outside the box is a validation failure, reported
  // with the measured numerical range.
  tfac::ChannelSpec high;
  high.a_base = 2.6;
  REQUIRE_THROWS_AS(build(high), tfac::ValidationError);
  REQUIRE_THROWS_WITH(build(high), Catch::Matchers::ContainsSubstring("escapes the box"));
}
