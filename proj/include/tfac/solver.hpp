// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tfac/contour.hpp"
#include "tfac/errors.hpp"
#include "tfac/linalg.hpp"
#include "tfac/model.hpp"
#include "tfac/transfer.hpp"
#include "tfac/types.hpp"

namespace tfac {

// Which side of the operator the resolvent factor sits on.
enum class Kappa { right, left };

inline const char* kappa_name(Kappa k) { return k == Kappa::right ? "right" : "left"; }

namespace detail {

inline void check_separation(const ContourRule& rule, const CVector& eigenvalues,
                             const char* who) {
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    // The polyline resolves the contour only to its sampling density; the
    // quadrature nodes are the actual poles of the discrete substitution, so
    // a collision with any node must be refused as well.
    double d = contour_distance(rule, eigenvalues(i));
    for (const Complex& node : rule.nodes) {
      d = std::min(d, std::abs(eigenvalues(i) - node));
    }
    if (!(d > 1e-12)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "%s: eigenvalue (%.6g, %.6g) touches the contour (distance %.3g)", who,
                    eigenvalues(i).real(), eigenvalues(i).imag(), d);
      throw SeparationError(buf);
    }
  }
}

// One application of the transformation, reusing a prebuilt kernel table.
// Uses Z(Z-mu)^{-1} = I + mu (Z-mu)^{-1}, so the mu-dependent part reduces to
// one resolvent-stack pass per call.
inline CMatrix transform_with_table(const KernelTable& tab, const ContourRule& rule,
                                    const CMatrix& z, Kappa kappa) {
  const SchurForm s = schur_form(z);
  check_separation(rule, s.eigenvalues, "transform");
  const std::size_t count = tab.count();
  CVector w(static_cast<Eigen::Index>(count));
  CVector wmu(static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    w(static_cast<Eigen::Index>(k)) = tab.family().weights[k];
    wmu(static_cast<Eigen::Index>(k)) = tab.family().weights[k] * tab.family().nodes[k];
  }
  const CMatrix constant = tab.weighted_sum(w);
  if (kappa == Kappa::right) {
    return constant + tab.right_combined(wmu, tab.right_resolvent_stack(s));
  }
  return constant + tab.left_combined(wmu, tab.left_resolvent_stack(s));
}

}  // namespace detail

// V^kappa_Gamma(Z): the operator substitution of the perturbation integral.
inline CMatrix transform(const TransferModel& model, const ContourRule& rule, const CMatrix& z,
                         Kappa kappa) {
  if (z.rows() != model.dim() || z.cols() != model.dim()) {
    throw ConfigError("transform: argument dimension mismatch");
  }
  KernelTable tab(model.kernel(), NodeFamily{rule.nodes, rule.weights});
  return detail::transform_with_table(tab, rule, z, kappa);
}

// Converged solution of Z = A + V^kappa(Z), with the contraction diagnostics.
struct SolutionReport {
  Kappa kappa = Kappa::right;
  int sheet = -1;
  CMatrix z;  // A + x
  CMatrix x;
  int iterations = 0;
  double defect = std::numeric_limits<double>::quiet_NaN();  // ||x - V(A + x)||
  double x_norm = 0.0;
  double r_min = std::numeric_limits<double>::quiet_NaN();
  double r_max = std::numeric_limits<double>::quiet_NaN();
  CVector sigma_z;
  double eig_condition = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> step_history;
  double contraction_ratio = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

// Fixed-point iteration from X = 0 on a prebuilt evaluator; admissibility
// must already have been established for the same rule.
inline SolutionReport solve_with(const TransferEvaluator& ev, const AdmissibilityReport& adm,
                                 Kappa kappa, double tol = 1e-10, int max_iter = 200) {
  if (!adm.admissible) {
    throw AdmissibilityError(
        "solve_transformation: contour not admissible (var_upper=" +
        std::to_string(adm.var_upper) + ", d_lower=" + std::to_string(adm.d_lower) +
        "); the contraction guarantee is void");
  }
  const TransferModel& model = ev.model();
  SolutionReport rep;
  rep.kappa = kappa;
  rep.sheet = ev.sheet();
  rep.r_min = adm.r_min;
  rep.r_max = adm.r_max;

  const Eigen::Index n = model.dim();
  CMatrix x = CMatrix::Zero(n, n);
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    const CMatrix next = detail::transform_with_table(ev.table(), ev.rule(), model.a_tilde + x,
                                                      kappa);
    const double xn = op_norm(next);
    if (xn >= adm.r_max) {
      throw ConvergenceError("solve_transformation: iterate " + std::to_string(it) +
                             " left the uniqueness ball (||X||=" + std::to_string(xn) +
                             " >= r_max=" + std::to_string(adm.r_max) + ")");
    }
    const double step = op_norm(next - x);
    rep.step_history.push_back(step);
    x = next;
    rep.iterations = it;
    if (step <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::string tail;
    const std::size_t h = rep.step_history.size();
    for (std::size_t i = h > 5 ? h - 5 : 0; i < h; ++i) {
      tail += (tail.empty() ? "" : ", ") + std::to_string(rep.step_history[i]);
    }
    throw ConvergenceError("solve_transformation: no convergence in " +
                           std::to_string(max_iter) + " iterations; last steps [" + tail + "]");
  }

  rep.x = x;
  rep.z = model.a_tilde + x;
  rep.defect =
      op_norm(detail::transform_with_table(ev.table(), ev.rule(), rep.z, kappa) - x);
  rep.x_norm = op_norm(x);
  if (rep.step_history.size() >= 2) {
    const std::size_t h = rep.step_history.size();
    rep.contraction_ratio = rep.step_history[h - 1] / rep.step_history[h - 2];
  }
  Eigen::ComplexEigenSolver<CMatrix> es(rep.z, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw NumericsError("solve_transformation: eigensolve of Z failed");
  }
  rep.sigma_z = es.eigenvalues();
  rep.eig_condition = eigenvector_condition(es.eigenvectors());
  rep.converged = true;
  return rep;
}

inline SolutionReport solve_transformation(const TransferModel& model, const ContourSpec& spec,
                                           Kappa kappa, double tol = 1e-10,
                                           int max_iter = 200) {
  const ContourRule rule = build_rule(spec, model);
  const AdmissibilityReport adm = admissibility_from_rule(model, rule, model.hull);
  if (!adm.admissible) {
    throw AdmissibilityError(
        "solve_transformation: contour not admissible (var_upper=" +
        std::to_string(adm.var_upper) + ", d_lower=" + std::to_string(adm.d_lower) +
        "); refusing to iterate");
  }
  TransferEvaluator ev(model, rule);
  return solve_with(ev, adm, kappa, tol, max_iter);
}

// Certifies that eigenpairs of the solution are eigenpairs of the continued
// transfer function: right solutions against M_Gamma(lambda) u, left
// solutions against the adjoint.
inline double pushthrough_defect(const TransferEvaluator& ev, const SolutionReport& rep) {
  const CMatrix base = rep.kappa == Kappa::right ? rep.z : CMatrix(rep.z.adjoint());
  Eigen::ComplexEigenSolver<CMatrix> es(base, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw NumericsError("pushthrough_defect: eigensolve failed");
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Complex lambda = rep.kappa == Kappa::right ? es.eigenvalues()(i)
                                                     : std::conj(es.eigenvalues()(i));
    const double d = contour_distance(ev.rule(), lambda);
    if (!(d > 1e-12)) {
      throw SeparationError("pushthrough_defect: eigenvalue touches the contour");
    }
    const CVector u = es.eigenvectors().col(i);
    const CVector mu = rep.kappa == Kappa::right ? ev.apply_M_gamma(lambda, u)
                                                 : ev.apply_M_gamma_adjoint(lambda, u);
    worst = std::max(worst, mu.norm() / u.norm());
  }
  return worst;
}

inline double pushthrough_defect(const TransferModel& model, const ContourRule& rule,
                                 const SolutionReport& rep) {
  TransferEvaluator ev(model, rule);
  return pushthrough_defect(ev, rep);
}

}  // namespace tfac
