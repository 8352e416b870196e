// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
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
#include "tfac/hull.hpp"
#include "tfac/linalg.hpp"
#include "tfac/model.hpp"
#include "tfac/solver.hpp"
#include "tfac/transfer.hpp"
#include "tfac/types.hpp"

namespace tfac {

// Closed loop for Cauchy integrals around (part of) sigma(Z). Circles use the
// trapezoid rule (spectrally accurate on periodic integrands); polygons use
// per-edge Gauss-Legendre.
struct GammaLoop {
  enum class Kind { circle, polygon };
  Kind kind = Kind::circle;
  Complex center{0.0, 0.0};
  double radius = 0.0;
  std::vector<Complex> vertices;  // polygon only, counter-clockwise
  int quad_order = 256;
  // Polygon edges are split into panels no longer than this before applying
  // Gauss-Legendre, so edges that pass close to an eigenvalue keep their
  // panel length comparable to that standoff distance (0 = one panel/edge).
  double panel_len = 0.0;
};

inline NodeFamily loop_rule(const GammaLoop& loop) {
  NodeFamily fam;
  if (loop.kind == GammaLoop::Kind::circle) {
    if (!(loop.radius > 0.0)) throw ConfigError("loop_rule: circle radius must be positive");
    const int n = std::max(8, loop.quad_order);
    fam.nodes.reserve(n);
    fam.weights.reserve(n);
    for (int j = 0; j < n; ++j) {
      const double th = 2.0 * kPi * j / n;
      const Complex e(std::cos(th), std::sin(th));
      fam.nodes.push_back(loop.center + loop.radius * e);
      fam.weights.push_back((2.0 * kPi / n) * kI * loop.radius * e);
    }
    return fam;
  }
  if (loop.vertices.size() < 3) throw ConfigError("loop_rule: polygon needs >= 3 vertices");
  const int per_panel =
      std::max(12, loop.quad_order / static_cast<int>(loop.vertices.size()));
  const GaussRule g = gauss_legendre(per_panel);
  for (std::size_t e = 0; e < loop.vertices.size(); ++e) {
    const Complex a = loop.vertices[e];
    const Complex b = loop.vertices[(e + 1) % loop.vertices.size()];
    int panels = 1;
    if (loop.panel_len > 0.0) {
      panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / loop.panel_len)));
    }
    for (int p = 0; p < panels; ++p) {
      const Complex pa = a + (double(p) / panels) * (b - a);
      const Complex pb = a + (double(p + 1) / panels) * (b - a);
      for (int i = 0; i < per_panel; ++i) {
        const double t = 0.5 * (g.x[i] + 1.0);
        fam.nodes.push_back(pa + t * (pb - pa));
        fam.weights.push_back(0.5 * g.w[i] * (pb - pa));
      }
    }
  }
  return fam;
}

inline int loop_winding(const GammaLoop& loop, Complex z) {
  if (loop.kind == GammaLoop::Kind::circle) {
    return std::abs(z - loop.center) < loop.radius ? 1 : 0;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < loop.vertices.size(); ++i) {
    const Complex a = loop.vertices[i] - z;
    const Complex b = loop.vertices[(i + 1) % loop.vertices.size()] - z;
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

// Loop admission: the loop must stay inside the invertibility neighbourhood
// {z : dist(z, nu(A)) <= d (1 - Var)/2} (certified by the upper distance
// bound), enclose each designated point once, and keep clear of the contour.
struct LoopCheck {
  bool ok = false;
  std::string reason;
  double band = 0.0;
  double max_hull_upper = 0.0;
  double min_contour_dist = std::numeric_limits<double>::infinity();
};

inline LoopCheck verify_loop(const GammaLoop& loop, const ContourRule& rule,
                             const NumericalRangeHull& hull, const AdmissibilityReport& adm,
                             const std::vector<Complex>& enclosed) {
  LoopCheck chk;
  chk.band = 0.5 * adm.d_lower * (1.0 - adm.var_upper);
  const NodeFamily fam = loop_rule(loop);
  for (const Complex& z : fam.nodes) {
    chk.max_hull_upper = std::max(chk.max_hull_upper, hull_distance(hull, z).upper);
    chk.min_contour_dist = std::min(chk.min_contour_dist, contour_distance(rule, z));
  }
  if (chk.max_hull_upper > chk.band) {
    chk.reason = "loop leaves the invertibility neighbourhood (max upper distance " +
                 std::to_string(chk.max_hull_upper) + " > band " + std::to_string(chk.band) +
                 ")";
    return chk;
  }
  if (!(chk.min_contour_dist > 1e-9)) {
    chk.reason = "loop touches the contour";
    return chk;
  }
  for (const Complex& p : enclosed) {
    if (loop_winding(loop, p) != 1) {
      chk.reason = "loop does not enclose (" + std::to_string(p.real()) + ", " +
                   std::to_string(p.imag()) + ") exactly once";
      return chk;
    }
  }
  chk.ok = true;
  chk.reason = "ok";
  return chk;
}

// Circle at the spectral mean first.  When the eigenvalue cloud is lopsided
// (mass clustered at one end) that circle over-reaches on the far side, so a
// circle about the bounding-box midpoint is tried next at two margin factors
// (kept >= 1.15: the trapezoid rule needs genuine clearance between the
// eigenvalues and the circle to converge past 1e-7 at order 256).  Only when
// no circle fits does the rounded offset polygon take over, with edge panels
// no longer than the standoff distance so per-panel Gauss stays accurate.
inline GammaLoop auto_loop(const CVector& eigenvalues, const ContourRule& rule,
                           const NumericalRangeHull& hull, const AdmissibilityReport& adm,
                           int quad_order = 256) {
  if (eigenvalues.size() == 0) throw ConfigError("auto_loop: empty eigenvalue set");
  std::vector<Complex> pts(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  Complex mean(0.0, 0.0);
  double re_lo = pts[0].real();
  double re_hi = re_lo;
  double im_lo = pts[0].imag();
  double im_hi = im_lo;
  for (const Complex& p : pts) {
    mean += p;
    re_lo = std::min(re_lo, p.real());
    re_hi = std::max(re_hi, p.real());
    im_lo = std::min(im_lo, p.imag());
    im_hi = std::max(im_hi, p.imag());
  }
  mean /= static_cast<double>(pts.size());
  const Complex box_mid(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi));
  double spread = 0.0;
  double cover = 0.0;
  double maxdist = 0.0;
  for (const Complex& p : pts) {
    spread = std::max(spread, std::abs(p - mean));
    cover = std::max(cover, std::abs(p - box_mid));
    maxdist = std::max(maxdist, hull_distance(hull, p).upper);
  }
  const double band = 0.5 * adm.d_lower * (1.0 - adm.var_upper);

  struct Candidate {
    Complex center;
    double radius;
  };
  const double tiny = std::max(1e-6, 0.25 * band);
  const std::array<Candidate, 3> candidates{
      Candidate{mean, spread > 0.0 ? 1.25 * spread : tiny},
      Candidate{box_mid, cover > 0.0 ? 1.25 * cover : tiny},
      Candidate{box_mid, cover > 0.0 ? 1.15 * cover : tiny},
  };
  std::string circle_reason;
  for (const Candidate& c : candidates) {
    GammaLoop circle;
    circle.kind = GammaLoop::Kind::circle;
    circle.center = c.center;
    circle.radius = c.radius;
    circle.quad_order = quad_order;
    const LoopCheck chk = verify_loop(circle, rule, hull, adm, pts);
    if (chk.ok) return circle;
    if (circle_reason.empty()) circle_reason = chk.reason;
  }

  const double headroom = band - maxdist;
  if (!(headroom > 0.0)) {
    throw ValidationError("auto_loop: eigenvalues leave the invertibility neighbourhood (" +
                          circle_reason + ")");
  }
  const double delta = 0.4 * headroom;
  std::vector<Complex> cloud;
  for (const Complex& p : pts) {
    for (int k = 0; k < 8; ++k) {
      const double th = 2.0 * kPi * k / 8 + kPi / 8;
      cloud.emplace_back(p + delta * Complex(std::cos(th), std::sin(th)));
    }
  }
  GammaLoop poly;
  poly.kind = GammaLoop::Kind::polygon;
  poly.vertices = detail::convex_hull(cloud);
  poly.quad_order = quad_order;
  poly.panel_len = delta;
  LoopCheck chk2 = verify_loop(poly, rule, hull, adm, pts);
  if (!chk2.ok) {
    throw ValidationError("auto_loop: no verifiable loop (circle: " + circle_reason +
                          "; polygon: " + chk2.reason + ")");
  }
  return poly;
}

// Binds one evaluator to a right/left solution pair; precomputes the shifted
// resolvent stacks so every W evaluation and Omega reduce to scalings and
// matrix products.
class FactorizationContext {
 public:
  FactorizationContext(const TransferEvaluator& ev, const SolutionReport& right,
                       const SolutionReport& left)
      : ev_(&ev), z_right_(right.z), z_left_(left.z) {
    const SchurForm sr = schur_form(z_right_);
    const SchurForm sl = schur_form(z_left_);
    detail::check_separation(ev.rule(), sr.eigenvalues, "factorization(right)");
    detail::check_separation(ev.rule(), sl.eigenvalues, "factorization(left)");
    rstack_ = ev.table().right_resolvent_stack(sr);
    lstack_ = ev.table().left_resolvent_stack(sl);
    sigma_right_ = sr.eigenvalues;
    sigma_left_ = sl.eigenvalues;
    omega_ = ev.table().bilinear(weight_mu(), lstack_, rstack_);
    omega_norm_ = op_norm(omega_);
  }

  const TransferEvaluator& evaluator() const { return *ev_; }
  const CMatrix& z_right() const { return z_right_; }
  const CMatrix& z_left() const { return z_left_; }
  const CVector& sigma_right() const { return sigma_right_; }
  const CVector& sigma_left() const { return sigma_left_; }
  const CMatrix& omega() const { return omega_; }
  double omega_norm() const { return omega_norm_; }

  // W_right(z) = I - sum w K (Zr-mu)^{-1} + z sum w K (z-mu)^{-1} (Zr-mu)^{-1},
  // collapsed through -1 + z/(z-mu) = mu/(z-mu).
  CMatrix w_right(Complex z) const {
    return identity(dim()) + ev_->table().right_combined(w_coeff(z), rstack_);
  }
  CMatrix w_left(Complex z) const {
    return identity(dim()) + ev_->table().left_combined(w_coeff(z), lstack_);
  }

  // Defects of M_Gamma(z) = W_right(z)(Z_right - z) = (Z_left - z) W_left(z),
  // relative to 1 + ||M_Gamma(z)||.
  struct FactorDefect {
    double right = 0.0;
    double left = 0.0;
    double m_norm = 0.0;
  };
  FactorDefect factorization_defect(Complex z) const {
    const CMatrix m = ev_->eval_M_gamma(z);
    const CMatrix zi = z * identity(dim());
    FactorDefect d;
    d.m_norm = op_norm(m);
    const double scale = 1.0 + d.m_norm;
    d.right = op_norm(m - w_right(z) * (z_right_ - zi)) / scale;
    d.left = op_norm(m - (z_left_ - zi) * w_left(z)) / scale;
    return d;
  }

  // ||Z_left (I + Omega) - (I + Omega) Z_right|| / (1 + ||Z_right||).
  double similarity_defect() const {
    const CMatrix iw = identity(dim()) + omega_;
    return op_norm(z_left_ * iw - iw * z_right_) / (1.0 + op_norm(z_right_));
  }

 private:
  Eigen::Index dim() const { return z_right_.rows(); }

  CVector weight_mu() const {
    const NodeFamily& fam = ev_->table().family();
    CVector c(static_cast<Eigen::Index>(fam.nodes.size()));
    for (std::size_t k = 0; k < fam.nodes.size(); ++k) {
      c(static_cast<Eigen::Index>(k)) = fam.weights[k] * fam.nodes[k];
    }
    return c;
  }

  CVector w_coeff(Complex z) const {
    if (ev_->contour_dist(z) < 1e-8) {
      throw DomainError("eval_W: z within 1e-8 of the contour");
    }
    const NodeFamily& fam = ev_->table().family();
    CVector c(static_cast<Eigen::Index>(fam.nodes.size()));
    for (std::size_t k = 0; k < fam.nodes.size(); ++k) {
      c(static_cast<Eigen::Index>(k)) =
          fam.weights[k] * fam.nodes[k] / (z - fam.nodes[k]);
    }
    return c;
  }

  const TransferEvaluator* ev_;
  CMatrix z_right_;
  CMatrix z_left_;
  CVector sigma_right_;
  CVector sigma_left_;
  KernelTable::RightResolventStack rstack_;
  KernelTable::LeftResolventStack lstack_;
  CMatrix omega_;
  double omega_norm_ = 0.0;
};

// Spec-shaped free functions -------------------------------------------------

inline CMatrix eval_W(const TransferModel& model, const ContourRule& rule, const CMatrix& z_op,
                      Complex z, Kappa kappa) {
  KernelTable tab(model.kernel(), NodeFamily{rule.nodes, rule.weights});
  const SchurForm s = schur_form(z_op);
  detail::check_separation(rule, s.eigenvalues, "eval_W");
  if (contour_distance(rule, z) < 1e-8) {
    throw DomainError("eval_W: z within 1e-8 of the contour");
  }
  CVector c(static_cast<Eigen::Index>(tab.count()));
  for (std::size_t k = 0; k < tab.count(); ++k) {
    c(static_cast<Eigen::Index>(k)) =
        tab.family().weights[k] * tab.family().nodes[k] / (z - tab.family().nodes[k]);
  }
  const Eigen::Index n = z_op.rows();
  if (kappa == Kappa::right) {
    return identity(n) + tab.right_combined(c, tab.right_resolvent_stack(s));
  }
  return identity(n) + tab.left_combined(c, tab.left_resolvent_stack(s));
}

inline std::pair<double, double> factorization_defect(const TransferModel& model,
                                                      const ContourRule& rule,
                                                      const SolutionReport& right,
                                                      const SolutionReport& left, Complex z) {
  TransferEvaluator ev(model, rule);
  FactorizationContext ctx(ev, right, left);
  const FactorizationContext::FactorDefect d = ctx.factorization_defect(z);
  return {d.right, d.left};
}

inline CMatrix compute_omega(const TransferModel& model, const ContourRule& rule,
                             const CMatrix& z_left, const CMatrix& z_right) {
  KernelTable tab(model.kernel(), NodeFamily{rule.nodes, rule.weights});
  const SchurForm sr = schur_form(z_right);
  const SchurForm sl = schur_form(z_left);
  detail::check_separation(rule, sr.eigenvalues, "compute_omega");
  detail::check_separation(rule, sl.eigenvalues, "compute_omega");
  CVector c(static_cast<Eigen::Index>(tab.count()));
  for (std::size_t k = 0; k < tab.count(); ++k) {
    c(static_cast<Eigen::Index>(k)) = tab.family().weights[k] * tab.family().nodes[k];
  }
  return tab.bilinear(c, tab.left_resolvent_stack(sl), tab.right_resolvent_stack(sr));
}

inline double similarity_defect(const CMatrix& omega, const CMatrix& z_left,
                                const CMatrix& z_right) {
  const CMatrix iw = identity(omega.rows()) + omega;
  return op_norm(z_left * iw - iw * z_right) / (1.0 + op_norm(z_right));
}

// Membership-gated invertibility record for W at one point.
struct WInvertRecord {
  Complex z;
  bool certified = false;  // hull upper distance <= d (1 - Var)/2
  double membership_upper = 0.0;
  double band = 0.0;
  double w_minus_i_right = std::numeric_limits<double>::quiet_NaN();
  double w_minus_i_left = std::numeric_limits<double>::quiet_NaN();
  double w_inv_norm_right = std::numeric_limits<double>::quiet_NaN();
  double w_inv_norm_left = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;  // certified implies both ||W - I|| < 1
};

inline WInvertRecord w_invertibility(const FactorizationContext& ctx,
                                     const NumericalRangeHull& hull,
                                     const AdmissibilityReport& adm, Complex z) {
  WInvertRecord rec;
  rec.z = z;
  rec.band = 0.5 * adm.d_lower * (1.0 - adm.var_upper);
  rec.membership_upper = hull_distance(hull, z).upper;
  rec.certified = rec.membership_upper <= rec.band;
  if (!rec.certified) {
    return rec;  // inconclusive, not a failure
  }
  const Eigen::Index n = ctx.z_right().rows();
  const CMatrix wr = ctx.w_right(z);
  const CMatrix wl = ctx.w_left(z);
  rec.w_minus_i_right = op_norm(wr - identity(n));
  rec.w_minus_i_left = op_norm(wl - identity(n));
  rec.w_inv_norm_right = op_norm(wr.inverse());
  rec.w_inv_norm_left = op_norm(wl.inverse());
  rec.pass = rec.w_minus_i_right < 1.0 && rec.w_minus_i_left < 1.0;
  return rec;
}

// Loop moments of the inverse transfer function:
//   s0 = -(1/2 pi i) closed-int M_Gamma(z)^{-1} dz
//   s1 = -(1/2 pi i) closed-int z M_Gamma(z)^{-1} dz
struct LoopMoments {
  CMatrix s0;
  CMatrix s1;
};

inline LoopMoments loop_moments(const TransferEvaluator& ev, const GammaLoop& loop) {
  const NodeFamily fam = loop_rule(loop);
  const Eigen::Index n = ev.model().dim();
  CMatrix s0 = CMatrix::Zero(n, n);
  CMatrix s1 = CMatrix::Zero(n, n);
  for (std::size_t j = 0; j < fam.nodes.size(); ++j) {
    const InverseReport inv = ev.invert_M_gamma(fam.nodes[j]);
    if (inv.singular) {
      throw NumericsError("loop integral: near-singular transfer function at loop node (" +
                          std::to_string(fam.nodes[j].real()) + ", " +
                          std::to_string(fam.nodes[j].imag()) + ")");
    }
    s0 += fam.weights[j] * inv.inverse;
    s1 += fam.nodes[j] * fam.weights[j] * inv.inverse;
  }
  const Complex pref = -1.0 / (2.0 * kPi * kI);
  LoopMoments m;
  m.s0 = pref * s0;
  m.s1 = pref * s1;
  return m;
}

inline CMatrix loop_integral_inverse(const TransferEvaluator& ev, const GammaLoop& loop) {
  return loop_moments(ev, loop).s0;
}

inline CMatrix loop_integral_first_moment(const TransferEvaluator& ev, const GammaLoop& loop) {
  return loop_moments(ev, loop).s1;
}

// Spectral projections of Z_right/Z_left versus the residue of M_Gamma^{-1}
// around one isolated eigenvalue.
struct ProjectionReport {
  Complex lambda;
  double gap = 0.0;
  CMatrix p_right;
  CMatrix p_left;
  CMatrix p_m;
  double defect_right = 0.0;  // ||P_M - P_right (I + Omega)^{-1}||
  double defect_left = 0.0;   // ||P_M - (I + Omega)^{-1} P_left||
  double idem_right = 0.0;
  double idem_left = 0.0;
  double idem_m = 0.0;
  int rank_p_m = 0;
  int rank_p_right = 0;
};

namespace detail {

inline CMatrix resolvent_loop_integral(const SchurForm& s, const NodeFamily& fam) {
  const Eigen::Index n = s.t.rows();
  CMatrix inner = CMatrix::Zero(n, n);
  for (std::size_t j = 0; j < fam.nodes.size(); ++j) {
    CMatrix u = s.t;
    u.diagonal().array() -= fam.nodes[j];
    inner += fam.weights[j] *
             u.triangularView<Eigen::Upper>().solve(CMatrix::Identity(n, n));
  }
  const Complex pref = -1.0 / (2.0 * kPi * kI);
  return pref * (s.q * inner * s.q.adjoint());
}

inline int numerical_rank(const CMatrix& p, double tol) {
  Eigen::BDCSVD<CMatrix> svd(p);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++r;
  }
  return r;
}

}  // namespace detail

inline ProjectionReport projections(const FactorizationContext& ctx, Complex lambda,
                                    const GammaLoop& loop) {
  ProjectionReport rep;
  rep.lambda = lambda;

  // The loop must isolate lambda from the rest of sigma(Z_right).
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ctx.sigma_right().size(); ++i) {
    const Complex mu = ctx.sigma_right()(i);
    const double d = std::abs(mu - lambda);
    if (d > 1e-9) gap = std::min(gap, d);
    const int expect = d <= 1e-9 ? 1 : 0;
    if (loop_winding(loop, mu) != expect) {
      throw SeparationError(
          "projections: loop winding around sigma(Z) is not the requested isolation "
          "(gap to rest of spectrum " +
          std::to_string(gap) + ")");
    }
  }
  if (loop.kind == GammaLoop::Kind::circle && !(gap > 2.0 * loop.radius)) {
    throw SeparationError("projections: eigenvalue cluster not separable at radius " +
                          std::to_string(loop.radius) + " (gap " + std::to_string(gap) + ")");
  }
  rep.gap = gap;

  const NodeFamily fam = loop_rule(loop);
  rep.p_right = detail::resolvent_loop_integral(schur_form(ctx.z_right()), fam);
  rep.p_left = detail::resolvent_loop_integral(schur_form(ctx.z_left()), fam);
  rep.p_m = loop_moments(ctx.evaluator(), loop).s0;

  const Eigen::Index n = ctx.z_right().rows();
  const CMatrix iw = identity(n) + ctx.omega();
  const CMatrix iw_inv = iw.inverse();
  rep.defect_right = op_norm(rep.p_m - rep.p_right * iw_inv);
  rep.defect_left = op_norm(rep.p_m - iw_inv * rep.p_left);
  rep.idem_right = op_norm(rep.p_right * rep.p_right - rep.p_right);
  rep.idem_left = op_norm(rep.p_left * rep.p_left - rep.p_left);
  rep.idem_m = op_norm(rep.p_m * rep.p_m - rep.p_m);
  rep.rank_p_m = detail::numerical_rank(rep.p_m, 1e-6);
  rep.rank_p_right = detail::numerical_rank(rep.p_right, 1e-6);
  return rep;
}

// Eigenvalues of the solved Z, tagged by position relative to the swept
// region, with the cross-solution spectral certificates.
struct ResonanceEntry {
  Complex z;
  int sheet = -1;
  bool unphysical_sheet = false;  // inside the continuation region
  double hull_upper = 0.0;
};

struct ResonanceTable {
  std::vector<ResonanceEntry> entries;
  double hausdorff = 0.0;  // sigma(Z_right) vs sigma(Z_left)
  double r0 = 0.0;
  double max_hull_upper = 0.0;
  bool inclusion_pass = false;  // every eigenvalue within r0 + 1e-6 of nu(A)
};

inline double hausdorff_distance(const CVector& a, const CVector& b) {
  if (a.size() == 0 || b.size() == 0) {
    return a.size() == b.size() ? 0.0 : std::numeric_limits<double>::infinity();
  }
  double h = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const CVector& from = pass == 0 ? a : b;
    const CVector& to = pass == 0 ? b : a;
    for (Eigen::Index i = 0; i < from.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < to.size(); ++j) {
        best = std::min(best, std::abs(from(i) - to(j)));
      }
      h = std::max(h, best);
    }
  }
  return h;
}

inline ResonanceTable resonance_set(const TransferModel& model, const ContinuationRegion& region,
                                    const SolutionReport& right, const SolutionReport& left,
                                    double r0) {
  ResonanceTable tab;
  tab.r0 = r0;
  tab.hausdorff = hausdorff_distance(right.sigma_z, left.sigma_z);
  for (Eigen::Index i = 0; i < right.sigma_z.size(); ++i) {
    ResonanceEntry e;
    e.z = right.sigma_z(i);
    e.sheet = right.sheet;
    e.unphysical_sheet = region.contains(e.z);
    e.hull_upper = hull_distance(model.hull, e.z).upper;
    tab.max_hull_upper = std::max(tab.max_hull_upper, e.hull_upper);
    tab.entries.push_back(e);
  }
  tab.inclusion_pass = tab.max_hull_upper <= r0 + 1e-6;
  return tab;
}

// The bundled certificate emitted by a factorization run. Every pass claim
// pairs with a recorded defect and its declared tolerance.
struct FactorSample {
  Complex z;
  double right_defect = 0.0;
  double left_defect = 0.0;
};

struct FactorizationCertificate {
  std::vector<FactorSample> samples;
  double max_right_defect = 0.0;
  double max_left_defect = 0.0;
  std::vector<WInvertRecord> w_records;
  CMatrix omega;
  double omega_norm = 0.0;
  double momega_defect = 0.0;        // s0 vs (I + Omega)^{-1}
  double homega_defect_left = 0.0;   // s1 vs (I + Omega)^{-1} Z_left
  double homega_defect_right = 0.0;  // s1 vs Z_right (I + Omega)^{-1}
  double similarity = 0.0;
  double spectra_hausdorff = 0.0;
  ResonanceTable resonances;
  GammaLoop loop;
  double tol_factor = 1e-8;
  double tol_loop = 1e-7;
  double tol_similarity = 1e-8;
  double tol_hausdorff = 1e-6;
  bool pass = false;
  std::string failure;
};

// Deterministic z samples: interior points of the numerical range, a ring in
// the invertibility band (these double as certified (distMG) points), an
// exterior ring, and the far physical-sheet point z = -10.
inline std::vector<Complex> certificate_sample_points(const NumericalRangeHull& hull,
                                                      const AdmissibilityReport& adm) {
  const double band = 0.5 * adm.d_lower * (1.0 - adm.var_upper);
  Complex centroid(0.0, 0.0);
  for (const Complex& p : hull.boundary) centroid += p;
  centroid /= static_cast<double>(hull.boundary.size());
  const std::size_t nb = hull.boundary.size();
  std::vector<Complex> pts;
  for (int j = 0; j < 6; ++j) {  // inside the range
    const Complex p = hull.boundary[(j * nb) / 6];
    pts.push_back(centroid + 0.35 * (p - centroid));
  }
  for (int j = 0; j < 10; ++j) {  // in the band: certified (distMG) points
    const std::size_t idx = (j * nb) / 10;
    const Complex p = hull.boundary[idx];
    const double th = hull.angles[idx % hull.angles.size()];
    pts.push_back(p + 0.5 * band * Complex(std::cos(-th), std::sin(-th)));
  }
  for (int j = 0; j < 3; ++j) {  // outside the band
    const std::size_t idx = (j * nb) / 3;
    const Complex p = hull.boundary[idx];
    const double th = hull.angles[idx % hull.angles.size()];
    pts.push_back(p + 2.0 * band * Complex(std::cos(-th), std::sin(-th)));
  }
  pts.emplace_back(-10.0, 0.0);
  return pts;
}

inline FactorizationCertificate build_certificate(const FactorizationContext& ctx,
                                                  const NumericalRangeHull& hull,
                                                  const AdmissibilityReport& adm,
                                                  const SolutionReport& right,
                                                  const SolutionReport& left,
                                                  const GammaLoop& loop, double r0) {
  FactorizationCertificate cert;
  cert.loop = loop;
  cert.omega = ctx.omega();
  cert.omega_norm = ctx.omega_norm();

  const std::vector<Complex> pts = certificate_sample_points(hull, adm);
  for (const Complex& z : pts) {
    const FactorizationContext::FactorDefect d = ctx.factorization_defect(z);
    cert.samples.push_back({z, d.right, d.left});
    cert.max_right_defect = std::max(cert.max_right_defect, d.right);
    cert.max_left_defect = std::max(cert.max_left_defect, d.left);
  }
  for (int j = 6; j < 16; ++j) {  // the band ring from the sample list
    cert.w_records.push_back(w_invertibility(ctx, hull, adm, pts[static_cast<std::size_t>(j)]));
  }

  const LoopMoments lm = loop_moments(ctx.evaluator(), loop);
  const Eigen::Index n = ctx.z_right().rows();
  const CMatrix iw_inv = (identity(n) + ctx.omega()).inverse();
  cert.momega_defect = op_norm(lm.s0 - iw_inv);
  cert.homega_defect_left = op_norm(lm.s1 - iw_inv * ctx.z_left());
  cert.homega_defect_right = op_norm(lm.s1 - ctx.z_right() * iw_inv);
  cert.similarity = ctx.similarity_defect();
  cert.spectra_hausdorff = hausdorff_distance(ctx.sigma_right(), ctx.sigma_left());
  cert.resonances = resonance_set(ctx.evaluator().model(), ctx.evaluator().region(), right,
                                  left, r0);

  cert.pass = true;
  auto fail = [&cert](const std::string& why) {
    cert.pass = false;
    if (!cert.failure.empty()) cert.failure += "; ";
    cert.failure += why;
  };
  if (!(cert.omega_norm < 1.0)) fail("||Omega|| >= 1");
  if (cert.max_right_defect > cert.tol_factor || cert.max_left_defect > cert.tol_factor) {
    fail("factorization defect above tolerance");
  }
  for (const WInvertRecord& r : cert.w_records) {
    if (r.certified && !r.pass) fail("certified point with ||W - I|| >= 1");
  }
  if (cert.momega_defect > cert.tol_loop) fail("inverse loop integral defect above tolerance");
  if (cert.homega_defect_left > cert.tol_loop || cert.homega_defect_right > cert.tol_loop) {
    fail("first-moment loop integral defect above tolerance");
  }
  if (cert.similarity > cert.tol_similarity) fail("similarity defect above tolerance");
  if (cert.spectra_hausdorff > cert.tol_hausdorff) fail("spectra Hausdorff above tolerance");
  if (!cert.resonances.inclusion_pass) fail("eigenvalue outside the certified neighbourhood");
  return cert;
}

}  // namespace tfac
