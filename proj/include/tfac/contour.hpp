// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tfac/errors.hpp"
#include "tfac/gauss.hpp"
#include "tfac/hull.hpp"
#include "tfac/model.hpp"
#include "tfac/types.hpp"

namespace tfac {

// A deformed integration path: the interval [lambda_c, beta] is replaced by a
// Jordan arc through arc_control (strictly on the sheet side except at its
// endpoints), after which the path continues along [beta, infinity).
struct ContourSpec {
  int sheet = -1;  // +1: arc in the upper half-plane, -1: lower
  double lambda_c = 0.0;
  double beta = 0.0;
  std::vector<Complex> arc_control;
  int arc_order = 32;   // Gauss-Legendre nodes per spline segment
  int tail_order = 64;  // nodes on the mapped half-line
};

// Semi-ellipse from lambda_c to beta with vertical semi-axis `depth` on the
// sheet side, sampled at n_control interior points.
inline ContourSpec semi_ellipse_spec(int sheet, double lambda_c, double beta, double depth,
                                     int n_control = 9) {
  if (sheet != 1 && sheet != -1) throw ConfigError("semi_ellipse_spec: sheet must be +1 or -1");
  if (!(beta > lambda_c)) throw ConfigError("semi_ellipse_spec: need beta > lambda_c");
  if (!(depth > 0.0)) throw ConfigError("semi_ellipse_spec: need depth > 0");
  if (n_control < 1) throw ConfigError("semi_ellipse_spec: need at least one control point");
  ContourSpec s;
  s.sheet = sheet;
  s.lambda_c = lambda_c;
  s.beta = beta;
  const double c = 0.5 * (lambda_c + beta);
  const double a = 0.5 * (beta - lambda_c);
  s.arc_control.reserve(static_cast<std::size_t>(n_control));
  for (int j = 1; j <= n_control; ++j) {
    const double t = kPi * static_cast<double>(j) / static_cast<double>(n_control + 1);
    s.arc_control.emplace_back(c - a * std::cos(t), sheet * depth * std::sin(t));
  }
  return s;
}

// Discrete carrier of integrals over the contour. Complex weights carry the
// direction dmu; nodes[0..arc_count) lie on the arc, the rest on the tail.
// polyline is a dense sampling of the arc used for geometry queries.
struct ContourRule {
  ContourSpec spec;
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
  std::size_t arc_count = 0;
  std::vector<Complex> polyline;
  int arc_order_used = 0;
  int tail_order_used = 0;
};

namespace detail {

// Cubic Hermite spline through knots with one-sided end tangents and central
// differences inside (Catmull-Rom). Smooth arcs keep quadrature orders low.
struct SplineArc {
  std::vector<Complex> knots;
  std::vector<Complex> tangents;

  explicit SplineArc(const ContourSpec& s) {
    knots.push_back(Complex(s.lambda_c, 0.0));
    knots.insert(knots.end(), s.arc_control.begin(), s.arc_control.end());
    knots.push_back(Complex(s.beta, 0.0));
    const std::size_t m = knots.size();
    tangents.resize(m);
    tangents[0] = knots[1] - knots[0];
    tangents[m - 1] = knots[m - 1] - knots[m - 2];
    for (std::size_t i = 1; i + 1 < m; ++i) {
      tangents[i] = 0.5 * (knots[i + 1] - knots[i - 1]);
    }
  }

  std::size_t segments() const { return knots.size() - 1; }

  Complex point(std::size_t seg, double t) const {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * knots[seg] + (t3 - 2.0 * t2 + t) * tangents[seg] +
           (-2.0 * t3 + 3.0 * t2) * knots[seg + 1] + (t3 - t2) * tangents[seg + 1];
  }

  Complex deriv(std::size_t seg, double t) const {
    const double t2 = t * t;
    return (6.0 * t2 - 6.0 * t) * knots[seg] + (3.0 * t2 - 4.0 * t + 1.0) * tangents[seg] +
           (-6.0 * t2 + 6.0 * t) * knots[seg + 1] + (3.0 * t2 - 2.0 * t) * tangents[seg + 1];
  }
};

inline double orient(Complex a, Complex b, Complex c) {
  return (b.real() - a.real()) * (c.imag() - a.imag()) -
         (b.imag() - a.imag()) * (c.real() - a.real());
}

inline bool segments_cross(Complex p1, Complex p2, Complex q1, Complex q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  return ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
         ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
}

inline std::vector<Complex> sample_arc(const SplineArc& arc, int per_segment) {
  std::vector<Complex> pts;
  pts.reserve(arc.segments() * static_cast<std::size_t>(per_segment) + 1);
  for (std::size_t seg = 0; seg < arc.segments(); ++seg) {
    for (int i = 0; i < per_segment; ++i) {
      pts.push_back(arc.point(seg, static_cast<double>(i) / per_segment));
    }
  }
  pts.push_back(arc.knots.back());
  return pts;
}

// Geometric admission of the arc: interior control points and interior
// samples strictly on the sheet side, and no self-intersection among the
// polyline segments.
inline void validate_arc_geometry(const ContourSpec& spec, const SplineArc& arc,
                                  const std::vector<Complex>& pts) {
  if (spec.sheet != 1 && spec.sheet != -1) {
    throw ConfigError("contour: sheet must be +1 or -1");
  }
  if (!(spec.beta > spec.lambda_c)) {
    throw ConfigError("contour: need beta > lambda_c");
  }
  if (spec.arc_control.empty()) {
    throw ValidationError("contour: arc needs at least one interior control point");
  }
  const double l = static_cast<double>(spec.sheet);
  for (const Complex& p : spec.arc_control) {
    if (!(p.imag() * l > 0.0)) {
      throw ValidationError("contour: arc control points must lie strictly on the sheet side");
    }
    if (!(p.real() > spec.lambda_c - (spec.beta - spec.lambda_c) &&
          p.real() < spec.beta + (spec.beta - spec.lambda_c))) {
      throw ValidationError("contour: arc control point strays far outside [lambda_c, beta]");
    }
  }
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    if (!(pts[i].imag() * l > 0.0)) {
      throw ValidationError("contour: arc interior leaves the sheet half-plane");
    }
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    for (std::size_t j = i + 2; j + 1 < pts.size(); ++j) {
      if (i == 0 && j + 2 == pts.size()) continue;  // closing ends are never adjacent
      if (segments_cross(pts[i], pts[i + 1], pts[j], pts[j + 1])) {
        throw ValidationError("contour: arc is self-intersecting");
      }
    }
  }
  (void)arc;
}

// Arc quadrature: per-segment Gauss-Legendre; the first segment runs in the
// variable s with t = s^2, clustering nodes toward lambda_c so kernels with a
// (mu - lambda_c)^{1/2}-type branch start retain spectral accuracy.
inline void arc_nodes(const SplineArc& arc, int order, std::vector<Complex>* nodes,
                      std::vector<Complex>* weights) {
  const GaussRule g = gauss_legendre(order);
  for (std::size_t seg = 0; seg < arc.segments(); ++seg) {
    for (int i = 0; i < order; ++i) {
      const double u = 0.5 * (g.x[i] + 1.0);
      const double wu = 0.5 * g.w[i];
      if (seg == 0) {
        const double t = u * u;
        nodes->push_back(arc.point(0, t));
        weights->push_back(wu * arc.deriv(0, t) * (2.0 * u));
      } else {
        nodes->push_back(arc.point(seg, u));
        weights->push_back(wu * arc.deriv(seg, u));
      }
    }
  }
}

// Tail quadrature on [beta, infinity): mu = beta + t/(1-t) with t in [0,1),
// dmu = dt/(1-t)^2.
inline void tail_nodes(double beta, int order, std::vector<Complex>* nodes,
                       std::vector<Complex>* weights) {
  const GaussRule g = gauss_legendre(order);
  for (int i = 0; i < order; ++i) {
    const double t = 0.5 * (g.x[i] + 1.0);
    const double wt = 0.5 * g.w[i];
    const double om = 1.0 - t;
    nodes->push_back(Complex(beta + t / om, 0.0));
    weights->push_back(Complex(wt / (om * om), 0.0));
  }
}

inline ContourRule assemble_rule(const ContourSpec& spec, const SplineArc& arc,
                                 const std::vector<Complex>& polyline, int arc_order,
                                 int tail_order) {
  ContourRule r;
  r.spec = spec;
  r.polyline = polyline;
  arc_nodes(arc, arc_order, &r.nodes, &r.weights);
  r.arc_count = r.nodes.size();
  tail_nodes(spec.beta, tail_order, &r.nodes, &r.weights);
  r.arc_order_used = arc_order;
  r.tail_order_used = tail_order;
  return r;
}

}  // namespace detail

// Geometry-checked rule at the spec's own orders.
inline ContourRule build_rule(const ContourSpec& spec) {
  detail::SplineArc arc(spec);
  const std::vector<Complex> pts = detail::sample_arc(arc, 48);
  detail::validate_arc_geometry(spec, arc, pts);
  return detail::assemble_rule(spec, arc, pts, spec.arc_order, spec.tail_order);
}

namespace detail {

inline double var_part_sum(const TransferModel& model, const NumericalRangeHull& hull,
                           const std::vector<Complex>& nodes,
                           const std::vector<Complex>& weights, std::size_t first,
                           std::size_t last) {
  const KernelDerivative& k = model.kernel();
  double s = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double dist = hull_distance(hull, nodes[i]).lower;
    if (!(dist > 0.0)) {
      throw AdmissibilityError("contour touches numerical range");
    }
    s += std::abs(weights[i]) * kernel_norm(k, nodes[i]) / dist;
  }
  return s;
}

// Scalar probe of the transfer integral used to detect quadrature convergence
// of a candidate node set: a fixed pair of deterministic unit vectors is
// contracted through the kernel at each node, so the probe costs O(rank * n)
// per node instead of the O(n^2) of a full kernel assembly.
struct EvalProbe {
  CVector u;
  CVector v;
  std::array<Complex, 2> z;

  EvalProbe(const TransferModel& model, const SplineArc& arc) {
    const Eigen::Index n = model.a_tilde.rows();
    u.resize(n);
    v.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      u(i) = Complex(1.0 / double(i + 1), 0.3 / double(i + 2));
      v(i) = Complex((i % 2 == 0) ? 1.0 : -1.0, 0.2 / double(i + 1));
    }
    u /= u.norm();
    v /= v.norm();
    const Complex mid = arc.point(arc.segments() / 2, 0.5);
    z[0] = Complex(mid.real(), 0.5 * mid.imag());
    z[1] = Complex(arc.point(0, 0.0).real() - 1.0, 0.0);
  }

  std::array<Complex, 2> value(const TransferModel& model, const std::vector<Complex>& nodes,
                               const std::vector<Complex>& weights) const {
    const KernelDerivative& k = model.kernel();
    std::array<Complex, 2> out{Complex(0.0, 0.0), Complex(0.0, 0.0)};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Complex uk_v;
      if (k.low_rank) {
        const LowRankFactors f = k.factors(nodes[i]);
        uk_v = (u.adjoint() * f.left * (f.right * v)).value();
      } else {
        uk_v = u.dot(k.dense(nodes[i]) * v);
      }
      for (int p = 0; p < 2; ++p) {
        out[p] += weights[i] * z[p] / (z[p] - nodes[i]) * uk_v;
      }
    }
    return out;
  }

  static double change(const std::array<Complex, 2>& a, const std::array<Complex, 2>& b) {
    double d = 0.0;
    for (int p = 0; p < 2; ++p) d = std::max(d, std::abs(a[p] - b[p]));
    return d;
  }
};

}  // namespace detail

// Model-aware rule: arc and tail orders are doubled independently until the
// contribution of each part to the variation sum is stable to 1e-10 relative
// (at most four doublings each).  A cheap evaluation probe provides an early
// stop: when the transfer integral itself is already converged to 1e-13 the
// rule is fine-grained enough for every downstream certificate, even if the
// variation integrand (which carries kinks from the certified distance bound
// and an endpoint singularity under the tail map) keeps drifting at the
// 1e-10 level.  Zero kernels converge at the base orders.
inline ContourRule build_rule(const ContourSpec& spec, const TransferModel& model) {
  if (!model.has_kernel()) {
    throw ConfigError("build_rule: contour deformation requires an absolutely continuous "
                      "measure; atomic models evaluate on the physical sheet only");
  }
  const KernelDerivative& k = model.kernel();
  if (k.lambda_c != spec.lambda_c || k.beta != spec.beta) {
    throw ConfigError("build_rule: contour endpoints disagree with the kernel's interval");
  }
  detail::SplineArc arc(spec);
  const std::vector<Complex> pts = detail::sample_arc(arc, 48);
  detail::validate_arc_geometry(spec, arc, pts);
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    if (!k.domain.contains(pts[i])) {
      throw ValidationError("contour: arc leaves the kernel's holomorphy domain");
    }
  }

  const detail::EvalProbe probe(model, arc);
  const auto refine = [&](auto make_nodes, int order) {
    std::vector<Complex> n0;
    std::vector<Complex> w0;
    make_nodes(order, &n0, &w0);
    double prev_var = detail::var_part_sum(model, model.hull, n0, w0, 0, n0.size());
    std::array<Complex, 2> prev_probe = probe.value(model, n0, w0);
    for (int pass = 0; pass < 4; ++pass) {
      std::vector<Complex> n1;
      std::vector<Complex> w1;
      make_nodes(order * 2, &n1, &w1);
      const double cur_var = detail::var_part_sum(model, model.hull, n1, w1, 0, n1.size());
      const std::array<Complex, 2> cur_probe = probe.value(model, n1, w1);
      const bool var_stable =
          std::abs(cur_var - prev_var) <= 1e-10 * std::max(1e-300, std::abs(cur_var));
      const double probe_scale =
          1.0 + std::max(std::abs(cur_probe[0]), std::abs(cur_probe[1]));
      const bool probe_stable =
          detail::EvalProbe::change(cur_probe, prev_probe) <= 1e-13 * probe_scale;
      if (var_stable || probe_stable) break;
      order *= 2;
      prev_var = cur_var;
      prev_probe = cur_probe;
    }
    return order;
  };

  const int arc_order = refine(
      [&](int ord, std::vector<Complex>* n, std::vector<Complex>* w) {
        detail::arc_nodes(arc, ord, n, w);
      },
      spec.arc_order);
  const int tail_order = refine(
      [&](int ord, std::vector<Complex>* n, std::vector<Complex>* w) {
        detail::tail_nodes(spec.beta, ord, n, w);
      },
      spec.tail_order);

  return detail::assemble_rule(spec, arc, pts, arc_order, tail_order);
}

namespace detail {

inline double point_segment_dist(Complex p, Complex a, Complex b) {
  const Complex ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

}  // namespace detail

// Distance from z to the whole contour: the arc polyline plus the tail ray
// [beta, infinity) on the real axis.
inline double contour_distance(const ContourRule& rule, Complex z) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < rule.polyline.size(); ++i) {
    d = std::min(d, detail::point_segment_dist(z, rule.polyline[i], rule.polyline[i + 1]));
  }
  const double beta = rule.spec.beta;
  const double ray = z.real() >= beta ? std::abs(z.imag()) : std::abs(z - Complex(beta, 0.0));
  return std::min(d, ray);
}

// Outcome of the contour admission arithmetic. Distances enter through their
// certified lower bounds, so every inequality errs toward refusal.
struct AdmissibilityReport {
  double d_lower = 0.0;
  double d_upper = 0.0;
  double var_upper = 0.0;
  double norm_a = 0.0;
  bool best1_pass = false;
  bool best2_pass = false;
  double omega_gap = 0.0;
  double r_min = std::numeric_limits<double>::quiet_NaN();
  double r_max = std::numeric_limits<double>::quiet_NaN();
  bool admissible = false;
};

// Admission arithmetic on an already-built (refined) rule; the public
// overload below builds the rule first.
inline AdmissibilityReport admissibility_from_rule(const TransferModel& model,
                                                   const ContourRule& rule,
                                                   const NumericalRangeHull& hull) {
  AdmissibilityReport rep;
  rep.norm_a = model.a_norm;

  rep.var_upper =
      detail::var_part_sum(model, hull, rule.nodes, rule.weights, 0, rule.nodes.size());

  // Distance bounds from dense geometric sampling: refine the arc polyline to
  // ~1e-3 spacing; on the tail the lower bound grows at unit rate past beta,
  // so a finite window [beta, h0 + lower(beta)] already contains the minimum.
  double d_lo = std::numeric_limits<double>::infinity();
  double d_up = std::numeric_limits<double>::infinity();
  auto take = [&](Complex p) {
    const HullDistance hd = hull_distance(hull, p);
    if (!(hd.lower > 0.0)) {
      throw AdmissibilityError("contour touches numerical range");
    }
    d_lo = std::min(d_lo, hd.lower);
    d_up = std::min(d_up, hd.upper);
  };
  for (std::size_t i = 0; i + 1 < rule.polyline.size(); ++i) {
    const Complex a = rule.polyline[i];
    const Complex b = rule.polyline[i + 1];
    const int sub = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / 1e-3)));
    for (int j = 0; j < sub; ++j) {
      take(a + (b - a) * (static_cast<double>(j) / sub));
    }
  }
  take(rule.polyline.back());
  double h0 = -std::numeric_limits<double>::infinity();
  for (const Complex& p : hull.boundary) h0 = std::max(h0, p.real());
  const double beta = rule.spec.beta;
  const double window =
      std::max(0.0, h0 + hull_distance(hull, Complex(beta, 0.0)).lower - beta);
  const int tail_samples = std::max(1, static_cast<int>(std::ceil(window / 1e-3)));
  for (int j = 0; j <= tail_samples; ++j) {
    take(Complex(beta + window * static_cast<double>(j) / tail_samples, 0.0));
  }
  rep.d_lower = d_lo;
  rep.d_upper = d_up;

  const double v = rep.var_upper;
  const double d = rep.d_lower;
  const double na = rep.norm_a;
  rep.best1_pass = v < 1.0;
  rep.best2_pass = v * na < 0.25 * d * (1.0 - v) * (1.0 - v);
  rep.omega_gap = d * (1.0 - v) * (1.0 - v) - 4.0 * na * v;
  rep.admissible = rep.best1_pass && rep.best2_pass;
  if (rep.admissible) {
    const double half = 0.5 * d * (1.0 - v);
    rep.r_min = half - std::sqrt(std::max(0.0, half * half - d * v * na));
    rep.r_max = d - std::sqrt(std::max(0.0, v * d * (d + na)));
  }
  return rep;
}

inline AdmissibilityReport admissibility(const TransferModel& model, const ContourSpec& spec,
                                         const NumericalRangeHull& hull) {
  return admissibility_from_rule(model, build_rule(spec, model), hull);
}

// Best admissible contour in a family, by the r_min it certifies.
struct R0Report {
  double r0 = std::numeric_limits<double>::infinity();
  int argmin = -1;
  std::vector<AdmissibilityReport> members;
};

inline R0Report r0_estimate(const TransferModel& model,
                            const std::vector<ContourSpec>& family) {
  if (family.empty()) throw ConfigError("r0_estimate: empty contour family");
  R0Report out;
  std::string failures;
  for (std::size_t i = 0; i < family.size(); ++i) {
    try {
      AdmissibilityReport rep = admissibility(model, family[i], model.hull);
      if (rep.admissible && rep.r_min < out.r0) {
        out.r0 = rep.r_min;
        out.argmin = static_cast<int>(i);
      }
      if (!rep.admissible) {
        failures += "  member " + std::to_string(i) + ": bounds fail (var_upper=" +
                    std::to_string(rep.var_upper) + ", d_lower=" + std::to_string(rep.d_lower) +
                    ")\n";
      }
      out.members.push_back(std::move(rep));
    } catch (const Error& e) {
      failures += "  member " + std::to_string(i) + ": " + e.what() + "\n";
      out.members.emplace_back();
    }
  }
  if (out.argmin < 0) {
    throw AdmissibilityError("r0_estimate: no admissible member in the contour family:\n" +
                             failures);
  }
  return out;
}

}  // namespace tfac
