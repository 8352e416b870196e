// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Kernel evaluation, model assembly, and the validation gates (tail decay,
// endpoint integrability, box containment, single-valuedness).

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "tfac/channel.hpp"
#include "tfac/kernel.hpp"
#include "tfac/model.hpp"

using tfac::CMatrix;
using tfac::Complex;

namespace {

// 1x1 kernel (mu - lambda_c)^p * exp(-mu) with principal powers; p > -1 is
// integrable at the endpoint, p <= -1 is not.
tfac::KernelDerivative power_kernel(double p, double lambda_c, double beta) {
  tfac::KernelDerivative k;
  k.dim = 1;
  k.lambda_c = lambda_c;
  k.beta = beta;
  k.domain = tfac::HolomorphyDomain::half_plane(lambda_c - 5.0);
  k.low_rank = false;
  k.dense = [p, lambda_c](Complex mu) {
    CMatrix m(1, 1);
    m(0, 0) = std::pow(mu - lambda_c, p) * std::exp(-mu);
    return m;
  };
  return k;
}

tfac::CMatrix diag2(double a, double b) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("kernel evaluation respects the holomorphy domain") {
  const tfac::KernelDerivative k = tfac::scalar_exp_kernel(0.01, 0.5, 6.0, 0.25);

  // On the half-line and inside the half-plane: closed-form values.
  REQUIRE(std::abs(tfac::eval_kernel(k, Complex(0.5, 0.0))(0, 0) - 0.01) <= 1e-15);
  REQUIRE(std::abs(tfac::eval_kernel(k, Complex(2.5, 0.0))(0, 0) - 0.01 * std::exp(-2.0)) <=
          1e-15);
  const Complex off(2.0, 0.5);
  REQUIRE(std::abs(tfac::eval_kernel(k, off)(0, 0) - 0.01 * std::exp(-(off - 0.5))) <= 1e-15);

  // Outside the half-plane: refused.
  REQUIRE_THROWS_AS(tfac::eval_kernel(k, Complex(-1.0, 0.0)), tfac::DomainError);

  const tfac::KernelDerivative z = tfac::zero_kernel(2, 0.5, 6.0,
                                                     tfac::HolomorphyDomain::half_plane(-4.5));
  REQUIRE(tfac::eval_kernel(z, Complex(1.0, 0.0)).norm() == 0.0);
  REQUIRE(tfac::kernel_norm(z, Complex(1.0, 0.0)) == 0.0);
}

TEST_CASE("low-rank and dense kernel norms agree on the channel kernel") {
  tfac::ChannelSpec spec;
  spec.points = 41;
  const tfac::Grid grid = tfac::make_grid(spec);
  const tfac::KernelDerivative k = tfac::make_channel_kernel(spec, grid, 6.0);
  REQUIRE(k.low_rank);
  for (int t = 0; t < 20; ++t) {
    const Complex mu(0.7 + 0.25 * t, (t % 3 == 1 ? 0.05 : (t % 3 == 2 ? -0.05 : 0.0)));
    const double dense = tfac::op_norm(tfac::eval_kernel(k, mu));
    const double split = tfac::kernel_norm(k, mu);
    REQUIRE(std::abs(dense - split) <= 1e-12 * (1.0 + dense));
  }
}

TEST_CASE("model assembly validates shapes and boxes") {
  const tfac::KernelDerivative k = tfac::scalar_exp_kernel(0.01, 0.5, 6.0, 0.25);

  // Dimension mismatch between operator and kernel.
  REQUIRE_THROWS_AS(tfac::make_model(diag2(2.0, 2.1), k, 1.5, 2.5, 0.4), tfac::ConfigError);
  // Empty box and nonpositive margin.
  REQUIRE_THROWS_AS(tfac::make_model(fixtures::mat1(2.0), k, 2.5, 1.5, 0.4),
                    tfac::ConfigError);
  REQUIRE_THROWS_AS(tfac::make_model(fixtures::mat1(2.0), k, 1.5, 2.5, 0.0),
                    tfac::ConfigError);

  // Atomic measures need strictly increasing positive support.
  tfac::AtomicMeasure bad;
  bad.dim = 1;
  bad.points = {2.0, 1.0};
  bad.weights = {fixtures::mat1(0.1), fixtures::mat1(0.1)};
  REQUIRE_THROWS_AS(tfac::make_model(fixtures::mat1(2.0), bad, 1.5, 2.5, 0.4),
                    tfac::ConfigError);
}

TEST_CASE("validation passes the zero-kernel model") {
  const tfac::TransferModel m =
      tfac::make_model(diag2(2.0, 2.1),
                       tfac::zero_kernel(2, 0.5, 6.0, tfac::HolomorphyDomain::half_plane(-4.5)),
                       1.5, 2.5, 0.25);
  const tfac::ValidationReport rep = tfac::validate_model(m);
  CAPTURE(rep.reason);
  REQUIRE(rep.passed);
  REQUIRE(rep.tail_converged);
  REQUIRE(rep.endpoint_pass);
  REQUIRE(rep.hull_in_box);
  REQUIRE(rep.box_in_domain);
}

TEST_CASE("validation accepts an integrable square-root endpoint") {
  const tfac::TransferModel m =
      tfac::make_model(fixtures::mat1(2.0), power_kernel(0.5, 0.5, 6.0), 1.5, 2.5, 0.25);
  const tfac::ValidationReport rep = tfac::validate_model(m);
  CAPTURE(rep.reason);
  REQUIRE(rep.passed);
  REQUIRE(rep.tail_converged);
  REQUIRE(rep.endpoint_pass);
  // The measured endpoint slope should sit near +1/2.
  REQUIRE(std::abs(rep.gamma_lambda_c - 0.5) <= 0.1);
}

TEST_CASE("validation refuses a non-integrable endpoint") {
  const tfac::TransferModel m =
      tfac::make_model(fixtures::mat1(2.0), power_kernel(-1.2, 0.5, 6.0), 1.5, 2.5, 0.25);
  const tfac::ValidationReport rep = tfac::validate_model(m);
  REQUIRE_FALSE(rep.passed);
  REQUIRE_FALSE(rep.endpoint_pass);
  REQUIRE(rep.reason == "||K'|| is not integrable at an interval endpoint");
}

TEST_CASE("validation refuses when the numerical range leaves the box") {
  const tfac::TransferModel m =
      tfac::make_model(diag2(2.0, 3.5),
                       tfac::zero_kernel(2, 0.5, 6.0, tfac::HolomorphyDomain::half_plane(-4.5)),
                       1.5, 2.5, 0.25);
  const tfac::ValidationReport rep = tfac::validate_model(m);
  REQUIRE_FALSE(rep.passed);
  REQUIRE_FALSE(rep.hull_in_box);
  REQUIRE(rep.reason == "numerical range leaves the search box");
}

TEST_CASE("validation refuses when the box margin leaves the holomorphy domain") {
  // Parabola domain with vertex just right of the box's eta-neighbourhood.
  tfac::KernelDerivative k;
  k.dim = 1;
  k.lambda_c = 0.5;
  k.beta = 6.0;
  k.domain = tfac::HolomorphyDomain::parabola(2.0, 0.05);
  k.low_rank = false;
  k.dense = [](Complex) { return CMatrix::Zero(1, 1); };
  const tfac::TransferModel m = tfac::make_model(fixtures::mat1(2.2), k, 2.1, 2.4, 0.25);
  const tfac::ValidationReport rep = tfac::validate_model(m);
  REQUIRE_FALSE(rep.passed);
  REQUIRE_FALSE(rep.box_in_domain);
  REQUIRE(rep.reason == "eta-neighbourhood of the box leaves the holomorphy domain");
}

TEST_CASE("weighted tail integral converges for decaying kernels") {
  const tfac::TransferModel m = fixtures::scalar_model();
  const tfac::ValidationReport rep = tfac::validate_model(m);
  CAPTURE(rep.reason);
  REQUIRE(rep.passed);
  REQUIRE(rep.tail_converged);
  REQUIRE(rep.tail_estimate >= 0.0);
  REQUIRE(rep.tail_estimate < 1.0);
}

TEST_CASE("channel kernel is single-valued across the half-line") {
  tfac::ChannelSpec spec;
  spec.points = 41;
  const tfac::Grid grid = tfac::make_grid(spec);
  const tfac::KernelDerivative k = tfac::make_channel_kernel(spec, grid, 6.0);

  for (double mu0 : {1.1, 2.0, 3.7}) {
    const double scale = tfac::kernel_norm(k, Complex(mu0, 0.0));
    double prev = -1.0;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      const CMatrix above = tfac::eval_kernel(k, Complex(mu0, eps));
      const CMatrix below = tfac::eval_kernel(k, Complex(mu0, -eps));
      const double gap = tfac::op_norm(above - below);
      if (prev >= 0.0) {
        // Linear shrink as the half-line is approached from both sides:
        // the two limits coincide, so the gap scales like eps.
        REQUIRE(gap <= 0.3 * prev);
      }
      prev = gap;
      REQUIRE(gap <= 1e-2 * (1.0 + scale));
    }
    REQUIRE(prev <= 1e-4 * (1.0 + scale));
  }
}
