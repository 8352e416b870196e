// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tfac/contour.hpp"
#include "tfac/errors.hpp"
#include "tfac/gauss.hpp"
#include "tfac/linalg.hpp"
#include "tfac/model.hpp"
#include "tfac/types.hpp"

namespace tfac {

// A discrete integration rule: complex nodes mu_k with direction-carrying
// weights w_k.
struct NodeFamily {
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
};

// Kernel values frozen at a node family. Rank-r kernels are kept as stacked
// factors L (n x rK) and R (rK x n), so every node-weighted sum collapses to
// one diagonal scaling plus one matrix product; dense kernels fall back to
// per-node matrices.
class KernelTable {
 public:
  KernelTable(const KernelDerivative& kernel, NodeFamily family)
      : family_(std::move(family)), n_(kernel.dim) {
    const std::size_t count = family_.nodes.size();
    low_rank_ = kernel.low_rank;
    if (low_rank_) {
      const LowRankFactors probe = kernel.factors(family_.nodes.front());
      rank_ = static_cast<int>(probe.left.cols());
      lstack_.resize(n_, rank_ * static_cast<Eigen::Index>(count));
      rstack_.resize(rank_ * static_cast<Eigen::Index>(count), n_);
      for (std::size_t k = 0; k < count; ++k) {
        const LowRankFactors f =
            k == 0 ? probe : kernel.factors(family_.nodes[k]);
        if (f.left.cols() != rank_ || f.right.rows() != rank_) {
          throw NumericsError("KernelTable: kernel rank varies across nodes");
        }
        lstack_.middleCols(rank_ * static_cast<Eigen::Index>(k), rank_) = f.left;
        rstack_.middleRows(rank_ * static_cast<Eigen::Index>(k), rank_) = f.right;
      }
    } else {
      kvals_.reserve(count);
      for (std::size_t k = 0; k < count; ++k) {
        kvals_.push_back(kernel.dense(family_.nodes[k]));
      }
    }
  }

  Eigen::Index dim() const { return n_; }
  std::size_t count() const { return family_.nodes.size(); }
  const NodeFamily& family() const { return family_; }
  bool low_rank() const { return low_rank_; }

  // Resolvent rows R_k (Z - mu_k)^{-1}, stacked; for dense kernels the
  // per-node products K_k (Z - mu_k)^{-1}. Shares one Schur form across all
  // shifts.
  struct RightResolventStack {
    CMatrix rows;                // (rK x n), low-rank path
    std::vector<CMatrix> mats;   // dense path
    SchurForm schur;
  };
  // Resolvent columns (Z - mu_k)^{-1} L_k, stacked; dense: (Z-mu_k)^{-1} K_k.
  struct LeftResolventStack {
    CMatrix cols;                // (n x rK)
    std::vector<CMatrix> mats;
    SchurForm schur;
  };

  RightResolventStack right_resolvent_stack(const SchurForm& s) const {
    RightResolventStack out;
    out.schur = s;
    const std::size_t count = family_.nodes.size();
    if (low_rank_) {
      CMatrix rq = rstack_ * s.q;  // one gemm, then per-node triangular solves
      for (std::size_t k = 0; k < count; ++k) {
        CMatrix u = s.t;
        u.diagonal().array() -= family_.nodes[k];
        rq.middleRows(rank_ * static_cast<Eigen::Index>(k), rank_) =
            u.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(
                rq.middleRows(rank_ * static_cast<Eigen::Index>(k), rank_));
      }
      out.rows = rq * s.q.adjoint();
    } else {
      out.mats.reserve(count);
      for (std::size_t k = 0; k < count; ++k) {
        CMatrix u = s.t;
        u.diagonal().array() -= family_.nodes[k];
        CMatrix kq = kvals_[k] * s.q;
        out.mats.push_back(
            u.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(kq) * s.q.adjoint());
      }
    }
    return out;
  }

  LeftResolventStack left_resolvent_stack(const SchurForm& s) const {
    LeftResolventStack out;
    out.schur = s;
    const std::size_t count = family_.nodes.size();
    if (low_rank_) {
      CMatrix ql = s.q.adjoint() * lstack_;
      for (std::size_t k = 0; k < count; ++k) {
        CMatrix u = s.t;
        u.diagonal().array() -= family_.nodes[k];
        ql.middleCols(rank_ * static_cast<Eigen::Index>(k), rank_) =
            u.triangularView<Eigen::Upper>().solve(
                ql.middleCols(rank_ * static_cast<Eigen::Index>(k), rank_));
      }
      out.cols = s.q * ql;
    } else {
      out.mats.reserve(count);
      for (std::size_t k = 0; k < count; ++k) {
        CMatrix u = s.t;
        u.diagonal().array() -= family_.nodes[k];
        CMatrix qk = s.q.adjoint() * kvals_[k];
        out.mats.push_back(s.q * u.triangularView<Eigen::Upper>().solve(qk));
      }
    }
    return out;
  }

  // sum_k c_k K_k
  CMatrix weighted_sum(const CVector& c) const {
    if (low_rank_) {
      return lstack_ * (expand(c).asDiagonal() * rstack_);
    }
    CMatrix acc = CMatrix::Zero(n_, n_);
    for (std::size_t k = 0; k < kvals_.size(); ++k) acc += c(static_cast<Eigen::Index>(k)) * kvals_[k];
    return acc;
  }

  // sum_k c_k K_k u and its adjoint counterpart (sum_k c_k K_k)^H u.
  CVector apply(const CVector& c, const CVector& u) const {
    if (low_rank_) {
      return lstack_ * (expand(c).asDiagonal() * (rstack_ * u));
    }
    CVector acc = CVector::Zero(n_);
    for (std::size_t k = 0; k < kvals_.size(); ++k) acc += c(static_cast<Eigen::Index>(k)) * (kvals_[k] * u);
    return acc;
  }
  CVector apply_adjoint(const CVector& c, const CVector& u) const {
    if (low_rank_) {
      return rstack_.adjoint() * (expand(c).conjugate().asDiagonal() * (lstack_.adjoint() * u));
    }
    CVector acc = CVector::Zero(n_);
    for (std::size_t k = 0; k < kvals_.size(); ++k) {
      acc += std::conj(c(static_cast<Eigen::Index>(k))) * (kvals_[k].adjoint() * u);
    }
    return acc;
  }

  // sum_k c_k K_k (Z - mu_k)^{-1}
  CMatrix right_combined(const CVector& c, const RightResolventStack& rs) const {
    if (low_rank_) {
      return lstack_ * (expand(c).asDiagonal() * rs.rows);
    }
    CMatrix acc = CMatrix::Zero(n_, n_);
    for (std::size_t k = 0; k < rs.mats.size(); ++k) acc += c(static_cast<Eigen::Index>(k)) * rs.mats[k];
    return acc;
  }

  // sum_k c_k (Z - mu_k)^{-1} K_k
  CMatrix left_combined(const CVector& c, const LeftResolventStack& ls) const {
    if (low_rank_) {
      return (ls.cols * expand(c).asDiagonal()) * rstack_;
    }
    CMatrix acc = CMatrix::Zero(n_, n_);
    for (std::size_t k = 0; k < ls.mats.size(); ++k) acc += c(static_cast<Eigen::Index>(k)) * ls.mats[k];
    return acc;
  }

  // sum_k c_k (Z_left - mu_k)^{-1} K_k (Z_right - mu_k)^{-1}
  CMatrix bilinear(const CVector& c, const LeftResolventStack& ls,
                   const RightResolventStack& rs) const {
    if (low_rank_) {
      return (ls.cols * expand(c).asDiagonal()) * rs.rows;
    }
    CMatrix acc = CMatrix::Zero(n_, n_);
    for (std::size_t k = 0; k < ls.mats.size(); ++k) {
      // (Z_l - mu)^{-1} K_k (Z_r - mu)^{-1} = ls.mats[k] * Q (T - mu)^{-1} Q^H
      CMatrix u = rs.schur.t;
      u.diagonal().array() -= family_.nodes[k];
      CMatrix tmp = ls.mats[k] * rs.schur.q;
      acc += c(static_cast<Eigen::Index>(k)) *
             (u.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(tmp) *
              rs.schur.q.adjoint());
    }
    return acc;
  }

 private:
  CVector expand(const CVector& c) const {
    CVector e(rank_ * c.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      for (int r = 0; r < rank_; ++r) e(rank_ * k + r) = c(k);
    }
    return e;
  }

  NodeFamily family_;
  Eigen::Index n_ = 0;
  bool low_rank_ = false;
  int rank_ = 0;
  CMatrix lstack_;
  CMatrix rstack_;
  std::vector<CMatrix> kvals_;
};

// The subdomain swept between the original interval [lambda_c, beta] and the
// deformed arc; values continued there pick up the residue correction.
struct ContinuationRegion {
  ContourSpec spec;
  std::vector<Complex> boundary;  // interval, then the arc reversed; closed

  bool contains(Complex z) const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < boundary.size(); ++i) {
      const Complex a = boundary[i] - z;
      const Complex b = boundary[i + 1] - z;
      total += std::arg(b / a);
    }
    const Complex a = boundary.back() - z;
    const Complex b = boundary.front() - z;
    total += std::arg(b / a);
    const long winding = std::lround(total / (2.0 * kPi));
    return std::labs(winding) == 1;
  }
};

inline ContinuationRegion continuation_region(const ContourRule& rule) {
  ContinuationRegion reg;
  reg.spec = rule.spec;
  const int m = 128;
  for (int i = 0; i < m; ++i) {
    reg.boundary.emplace_back(
        rule.spec.lambda_c + (rule.spec.beta - rule.spec.lambda_c) * i / double(m), 0.0);
  }
  for (std::size_t i = rule.polyline.size(); i-- > 1;) {
    reg.boundary.push_back(rule.polyline[i]);
  }
  return reg;
}

// Outcome of a dense inversion; `singular` is a detection feature, not a
// failure: the transfer function is singular exactly at its spectrum.
struct InverseReport {
  CMatrix inverse;
  double residual = std::numeric_limits<double>::quiet_NaN();  // Frobenius ||MY - I||
  double diag_ratio = 0.0;  // min/max |U_ii| of the LU factor
  bool singular = false;
};

// Evaluates M(z) = A - z + V(z) on the physical sheet and its continuation
// M_Gamma(z) across one rule. The physical-sheet rule reuses the contour
// rule's tail nodes verbatim, so tail truncation cancels exactly in every
// comparison between the two.
class TransferEvaluator {
 public:
  TransferEvaluator(const TransferModel& model, ContourRule rule)
      : model_(&model),
        rule_(std::move(rule)),
        region_(continuation_region(rule_)),
        ctab_(model.kernel(), NodeFamily{rule_.nodes, rule_.weights}),
        atab_(model.kernel(), axis_family(model.kernel(), rule_)) {}

  const TransferModel& model() const { return *model_; }
  const ContourRule& rule() const { return rule_; }
  const ContinuationRegion& region() const { return region_; }
  const KernelTable& table() const { return ctab_; }
  int sheet() const { return rule_.spec.sheet; }

  // Physical sheet: undeformed rule on [lambda_c, beta] plus the shared tail.
  CMatrix eval_M(Complex z) const {
    const KernelDerivative& k = model_->kernel();
    const double cut_dist =
        z.real() >= k.lambda_c ? std::abs(z.imag()) : std::abs(z - Complex(k.lambda_c, 0.0));
    if (cut_dist < 1e-8 && z != Complex(0.0, 0.0)) {
      throw DomainError("eval_M: z within 1e-8 of the spectral cut [lambda_c, inf)");
    }
    return model_->a_tilde - z * identity(model_->dim()) +
           atab_.weighted_sum(coefficients(atab_, z));
  }

  CMatrix eval_V_gamma(Complex z) const {
    return ctab_.weighted_sum(coefficients(ctab_, z));
  }

  CMatrix eval_M_gamma(Complex z) const {
    guard_off_contour(z);
    return model_->a_tilde - z * identity(model_->dim()) + eval_V_gamma(z);
  }

  CVector apply_M_gamma(Complex z, const CVector& u) const {
    guard_off_contour(z);
    return model_->a_tilde * u - z * u + ctab_.apply(coefficients(ctab_, z), u);
  }

  CVector apply_M_gamma_adjoint(Complex z, const CVector& u) const {
    guard_off_contour(z);
    return model_->a_tilde.adjoint() * u - std::conj(z) * u +
           ctab_.apply_adjoint(coefficients(ctab_, z), u);
  }

  InverseReport invert_M_gamma(Complex z) const {
    const CMatrix m = eval_M_gamma(z);
    InverseReport rep;
    Eigen::PartialPivLU<CMatrix> lu(m);
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double d = std::abs(lu.matrixLU()(i, i));
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    rep.diag_ratio = dmax > 0.0 ? dmin / dmax : 0.0;
    if (!(rep.diag_ratio > 1e-14)) {
      rep.singular = true;
      return rep;
    }
    rep.inverse = lu.solve(CMatrix::Identity(m.rows(), m.cols()));
    rep.residual = (m * rep.inverse - CMatrix::Identity(m.rows(), m.cols())).norm();
    return rep;
  }

  // || M_Gamma(z) - M(z) - 2 pi i l z K'(z) || for z inside the region: the
  // continuation certificate. Both evaluations share the tail rule, so the
  // defect measures only the arc-vs-interval quadratures.
  double residue_defect(Complex z) const {
    if (!region_.contains(z)) {
      throw DomainError("residue_defect: z is not inside the continuation region");
    }
    const KernelDerivative& k = model_->kernel();
    const Complex l(static_cast<double>(rule_.spec.sheet), 0.0);
    const CMatrix lhs = eval_M_gamma(z);
    const CMatrix rhs = eval_M(z) + (2.0 * kPi * kI * l * z) * eval_kernel(k, z);
    return op_norm(lhs - rhs);
  }

  double contour_dist(Complex z) const { return contour_distance(rule_, z); }

 private:
  static NodeFamily axis_family(const KernelDerivative& k, const ContourRule& rule) {
    NodeFamily fam;
    // Composite interval rule on [lambda_c, beta]: six panels of order 64,
    // the first taken in the variable s with mu = a + (b-a) s^2 to absorb a
    // square-root branch point at lambda_c.
    const int panels = 6;
    const int order = 64;
    const GaussRule g = gauss_legendre(order);
    const double width = (k.beta - k.lambda_c) / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = k.lambda_c + p * width;
      for (int i = 0; i < order; ++i) {
        const double u = 0.5 * (g.x[i] + 1.0);
        const double wu = 0.5 * g.w[i];
        if (p == 0) {
          fam.nodes.emplace_back(a + width * u * u, 0.0);
          fam.weights.emplace_back(wu * width * 2.0 * u, 0.0);
        } else {
          fam.nodes.emplace_back(a + width * u, 0.0);
          fam.weights.emplace_back(wu * width, 0.0);
        }
      }
    }
    // Shared tail: byte-identical copies of the contour rule's tail nodes.
    for (std::size_t i = rule.arc_count; i < rule.nodes.size(); ++i) {
      fam.nodes.push_back(rule.nodes[i]);
      fam.weights.push_back(rule.weights[i]);
    }
    return fam;
  }

  CVector coefficients(const KernelTable& tab, Complex z) const {
    const std::size_t count = tab.count();
    CVector c(static_cast<Eigen::Index>(count));
    if (z == Complex(0.0, 0.0)) {
      c.setZero();  // the integrand carries a factor z
      return c;
    }
    for (std::size_t k = 0; k < count; ++k) {
      c(static_cast<Eigen::Index>(k)) =
          tab.family().weights[k] * z / (z - tab.family().nodes[k]);
    }
    return c;
  }

  void guard_off_contour(Complex z) const {
    // The polyline resolves the contour's geometry only to its sampling
    // density, so the nodes (the actual poles of the discrete rule) are
    // checked individually as well.
    std::size_t nearest = 0;
    double node_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
      const double dk = std::abs(z - rule_.nodes[k]);
      if (dk < node_dist) {
        node_dist = dk;
        nearest = k;
      }
    }
    if (std::min(contour_distance(rule_, z), node_dist) < 1e-8) {
      throw DomainError("evaluation point within 1e-8 of the contour; nearest node (" +
                        std::to_string(rule_.nodes[nearest].real()) + ", " +
                        std::to_string(rule_.nodes[nearest].imag()) + ") at index " +
                        std::to_string(nearest));
    }
  }

  const TransferModel* model_;
  ContourRule rule_;
  ContinuationRegion region_;
  KernelTable ctab_;
  KernelTable atab_;
};

// Physical-sheet M(z) without a contour: exact rational sum for atomic
// measures, default undeformed rule for kernels.
inline CMatrix eval_M(const TransferModel& model, Complex z, int tail_order = 64) {
  if (model.has_kernel()) {
    const KernelDerivative& k = model.kernel();
    const double cut_dist =
        z.real() >= k.lambda_c ? std::abs(z.imag()) : std::abs(z - Complex(k.lambda_c, 0.0));
    if (cut_dist < 1e-8 && z != Complex(0.0, 0.0)) {
      throw DomainError("eval_M: z within 1e-8 of the spectral cut [lambda_c, inf)");
    }
    NodeFamily fam;
    const int panels = 6;
    const int order = 64;
    const GaussRule g = gauss_legendre(order);
    const double width = (k.beta - k.lambda_c) / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = k.lambda_c + p * width;
      for (int i = 0; i < order; ++i) {
        const double u = 0.5 * (g.x[i] + 1.0);
        const double wu = 0.5 * g.w[i];
        if (p == 0) {
          fam.nodes.emplace_back(a + width * u * u, 0.0);
          fam.weights.emplace_back(wu * width * 2.0 * u, 0.0);
        } else {
          fam.nodes.emplace_back(a + width * u, 0.0);
          fam.weights.emplace_back(wu * width, 0.0);
        }
      }
    }
    detail::tail_nodes(k.beta, tail_order, &fam.nodes, &fam.weights);
    KernelTable tab(k, std::move(fam));
    CVector c(static_cast<Eigen::Index>(tab.count()));
    if (z == Complex(0.0, 0.0)) {
      c.setZero();
    } else {
      for (std::size_t j = 0; j < tab.count(); ++j) {
        c(static_cast<Eigen::Index>(j)) =
            tab.family().weights[j] * z / (z - tab.family().nodes[j]);
      }
    }
    return model.a_tilde - z * identity(model.dim()) + tab.weighted_sum(c);
  }
  const AtomicMeasure& at = model.atoms();
  for (double mu : at.points) {
    if (std::abs(z - Complex(mu, 0.0)) < 1e-8) {
      throw DomainError("eval_M: z within 1e-8 of a point of the measure");
    }
  }
  CMatrix v = CMatrix::Zero(model.dim(), model.dim());
  for (std::size_t j = 0; j < at.points.size(); ++j) {
    v += (z / (z - at.points[j])) * at.weights[j];
  }
  return model.a_tilde - z * identity(model.dim()) + v;
}

// Free-function forms of the evaluator operations (convenience for one-off
// calls; batch users should hold a TransferEvaluator).
inline CMatrix eval_M_gamma(const TransferModel& model, const ContourRule& rule, Complex z) {
  return TransferEvaluator(model, rule).eval_M_gamma(z);
}

inline double residue_defect(const TransferModel& model, const ContourRule& rule, Complex z) {
  return TransferEvaluator(model, rule).residue_defect(z);
}

inline InverseReport invert_M_gamma(const TransferModel& model, const ContourRule& rule,
                                    Complex z) {
  return TransferEvaluator(model, rule).invert_M_gamma(z);
}

}  // namespace tfac
