// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tfac/config.hpp"
#include "tfac/contour.hpp"
#include "tfac/errors.hpp"
#include "tfac/factor.hpp"
#include "tfac/model.hpp"
#include "tfac/report_io.hpp"
#include "tfac/solver.hpp"
#include "tfac/transfer.hpp"
#include "tfac/version.hpp"

namespace tfac {

// Pipeline stages in execution order; subcommands stop after the stage they
// name. Exit codes: 0 pass, 2 refused at a soundness gate, 3 solver
// non-convergence, 4 invalid configuration, 5 certificate failure.
enum class Stage { validate, admissibility, solve, factorize, resonances };

struct PipelineResult {
  RunConfig cfg;
  int exit_code = 0;
  std::string stage = "complete";  // failed stage name, or "complete"
  std::string reason;

  bool has_model = false;
  NumericalRangeHull hull;
  bool has_validation = false;
  ValidationReport validation;
  bool has_rule = false;
  ContourRule rule;
  bool has_admissibility = false;
  AdmissibilityReport admissibility;
  std::optional<SolutionReport> right;
  std::optional<SolutionReport> left;
  std::optional<FactorizationCertificate> certificate;

  std::vector<std::pair<std::string, double>> stage_seconds;
  double total_seconds = 0.0;
};

namespace detail {

inline int refusal_code_for(Stage reached) {
  switch (reached) {
    case Stage::validate:
    case Stage::admissibility:
    case Stage::solve:
      return 2;
    case Stage::factorize:
    case Stage::resonances:
      return 5;
  }
  return 2;
}

class StageClock {
 public:
  explicit StageClock(PipelineResult& res) : res_(res), t0_(clock::now()), stage_t0_(t0_) {}
  void lap(const std::string& name) {
    const auto now = clock::now();
    res_.stage_seconds.emplace_back(name, std::chrono::duration<double>(now - stage_t0_).count());
    stage_t0_ = now;
  }
  void finish() {
    res_.total_seconds = std::chrono::duration<double>(clock::now() - t0_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  PipelineResult& res_;
  clock::time_point t0_;
  clock::time_point stage_t0_;
};

}  // namespace detail

inline PipelineResult run_pipeline(const RunConfig& cfg, Stage stop_after = Stage::resonances) {
  PipelineResult res;
  res.cfg = cfg;
  detail::StageClock clock(res);
  Stage current = Stage::validate;
  auto fail = [&](int code, const std::string& why) {
    res.exit_code = code;
    res.reason = why;
    switch (current) {
      case Stage::validate: res.stage = "validate"; break;
      case Stage::admissibility: res.stage = "admissibility"; break;
      case Stage::solve: res.stage = "solve"; break;
      case Stage::factorize: res.stage = "factorize"; break;
      case Stage::resonances: res.stage = "resonances"; break;
    }
    clock.finish();
  };

  try {
    if (stop_after >= Stage::factorize && !(cfg.solver.solve_right && cfg.solver.solve_left)) {
      throw ConfigError("factorization requires both solver variants (solver.kappa)");
    }

    // -- validate ------------------------------------------------------
    TransferModel model = build_model(cfg);
    res.has_model = true;
    res.hull = model.hull;
    res.validation = validate_model(model);
    res.has_validation = true;
    clock.lap("validate");
    if (!res.validation.passed) {
      fail(2, "model validation refused: " + res.validation.reason);
      return res;
    }
    if (stop_after == Stage::validate) {
      clock.finish();
      return res;
    }

    // -- admissibility -------------------------------------------------
    current = Stage::admissibility;
    res.rule = build_rule(to_contour_spec(cfg), model);
    res.has_rule = true;
    res.admissibility = admissibility_from_rule(model, res.rule, model.hull);
    res.has_admissibility = true;
    clock.lap("admissibility");
    if (!res.admissibility.admissible) {
      fail(2, "contour fails the admissibility inequalities");
      return res;
    }
    if (stop_after == Stage::admissibility) {
      clock.finish();
      return res;
    }

    // -- solve ---------------------------------------------------------
    current = Stage::solve;
    TransferEvaluator ev(model, res.rule);
    if (cfg.solver.solve_right) {
      res.right = solve_with(ev, res.admissibility, Kappa::right, cfg.solver.tol,
                             cfg.solver.max_iter);
    }
    if (cfg.solver.solve_left) {
      res.left = solve_with(ev, res.admissibility, Kappa::left, cfg.solver.tol,
                            cfg.solver.max_iter);
    }
    clock.lap("solve");
    if (stop_after == Stage::solve) {
      clock.finish();
      return res;
    }

    // -- factorize + resonances ---------------------------------------
    current = Stage::factorize;
    FactorizationContext ctx(ev, *res.right, *res.left);
    GammaLoop loop;
    if (cfg.loop.mode == "circle") {
      loop.kind = GammaLoop::Kind::circle;
      loop.center = cfg.loop.center;
      loop.radius = cfg.loop.radius;
      loop.quad_order = cfg.loop.quad_order;
      const LoopCheck chk =
          verify_loop(loop, res.rule, model.hull, res.admissibility,
                      std::vector<Complex>(ctx.sigma_right().data(),
                                           ctx.sigma_right().data() + ctx.sigma_right().size()));
      if (!chk.ok) throw ValidationError("configured loop rejected: " + chk.reason);
    } else {
      loop = auto_loop(ctx.sigma_right(), res.rule, model.hull, res.admissibility,
                       cfg.loop.quad_order);
    }
    current = Stage::resonances;
    res.certificate = build_certificate(ctx, model.hull, res.admissibility, *res.right,
                                        *res.left, loop, res.admissibility.r_min);
    clock.lap("factorize");
    if (!res.certificate->pass) {
      fail(5, "certificate failure: " + res.certificate->failure);
      return res;
    }
    clock.finish();
    return res;
  } catch (const ConfigError& e) {
    fail(4, e.what());
  } catch (const ConvergenceError& e) {
    fail(3, e.what());
  } catch (const NumericsError& e) {
    fail(current == Stage::solve ? 3 : detail::refusal_code_for(current), e.what());
  } catch (const Error& e) {  // validation / admissibility / domain / separation refusals
    fail(detail::refusal_code_for(current), e.what());
  }
  return res;
}

// ---------------------------------------------------------------------------
// Emission: report.json (deterministic), CSV point clouds, timings.json
// (quarantined: the only file allowed to differ between identical runs).

namespace detail {

inline void write_json_echo(JsonWriter& w, const Json& j) {
  switch (j.type()) {
    case Json::value_t::object: {
      w.begin_object();
      for (auto it = j.begin(); it != j.end(); ++it) {
        w.key(it.key());
        write_json_echo(w, it.value());
      }
      w.end_object();
      break;
    }
    case Json::value_t::array: {
      w.begin_array();
      for (const Json& v : j) write_json_echo(w, v);
      w.end_array();
      break;
    }
    case Json::value_t::string:
      w.value(j.get<std::string>());
      break;
    case Json::value_t::boolean:
      w.value(j.get<bool>());
      break;
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
      w.value(static_cast<long long>(j.get<long long>()));
      break;
    case Json::value_t::number_float:
      w.value(j.get<double>());
      break;
    default:
      w.null_value();
      break;
  }
}

inline void write_solution(JsonWriter& w, const SolutionReport& s) {
  w.begin_object();
  w.field("kappa", kappa_name(s.kappa));
  w.field("sheet", s.sheet);
  w.field("converged", s.converged);
  w.field("iterations", s.iterations);
  w.field("defect", s.defect);
  w.field("x_norm", s.x_norm);
  w.field("r_min", s.r_min);
  w.field("r_max", s.r_max);
  w.field("contraction_ratio", s.contraction_ratio);
  w.field("eig_condition", s.eig_condition);
  w.key("step_norms");
  w.begin_array();
  for (double v : s.step_history) w.value(v);
  w.end_array();
  w.key("spectrum");
  w.begin_array();
  for (Eigen::Index i = 0; i < s.sigma_z.size(); ++i) w.complex_value(s.sigma_z(i));
  w.end_array();
  w.end_object();
}

inline void write_certificate(JsonWriter& w, const FactorizationCertificate& cert) {
  w.begin_object();
  w.field("pass", cert.pass);
  if (!cert.pass) w.field("failure", cert.failure);
  w.field("omega_norm", cert.omega_norm);
  w.field("max_right_defect", cert.max_right_defect);
  w.field("max_left_defect", cert.max_left_defect);
  w.field("inverse_loop_defect", cert.momega_defect);
  w.field("first_moment_defect_left", cert.homega_defect_left);
  w.field("first_moment_defect_right", cert.homega_defect_right);
  w.field("similarity_defect", cert.similarity);
  w.field("spectra_hausdorff", cert.spectra_hausdorff);
  w.key("tolerances");
  w.begin_object();
  w.field("factorization", cert.tol_factor);
  w.field("loop_integrals", cert.tol_loop);
  w.field("similarity", cert.tol_similarity);
  w.field("hausdorff", cert.tol_hausdorff);
  w.end_object();
  w.key("loop");
  w.begin_object();
  w.field("kind", cert.loop.kind == GammaLoop::Kind::circle ? "circle" : "polygon");
  w.field("center", cert.loop.center);
  w.field("radius", cert.loop.radius);
  w.field("quad_order", cert.loop.quad_order);
  if (cert.loop.kind == GammaLoop::Kind::polygon) {
    w.key("vertices");
    w.begin_array();
    for (const Complex& v : cert.loop.vertices) w.complex_value(v);
    w.end_array();
  }
  w.end_object();
  w.key("samples");
  w.begin_array();
  for (const FactorSample& s : cert.samples) {
    w.begin_object();
    w.field("z", s.z);
    w.field("right_defect", s.right_defect);
    w.field("left_defect", s.left_defect);
    w.end_object();
  }
  w.end_array();
  w.key("invertibility");
  w.begin_array();
  for (const WInvertRecord& r : cert.w_records) {
    w.begin_object();
    w.field("z", r.z);
    w.field("certified", r.certified);
    w.field("membership_upper", r.membership_upper);
    w.field("band", r.band);
    w.field("w_minus_i_right", r.w_minus_i_right);
    w.field("w_minus_i_left", r.w_minus_i_left);
    w.field("w_inv_norm_right", r.w_inv_norm_right);
    w.field("w_inv_norm_left", r.w_inv_norm_left);
    w.field("pass", r.pass);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

inline const char* resonance_tag(const ResonanceEntry& e) {
  return e.unphysical_sheet ? "unphysical-sheet" : "outside-region";
}

inline void write_resonances(JsonWriter& w, const ResonanceTable& tab) {
  w.begin_object();
  w.field("r0", tab.r0);
  w.field("spectra_hausdorff", tab.hausdorff);
  w.field("max_hull_upper", tab.max_hull_upper);
  w.field("inclusion_pass", tab.inclusion_pass);
  w.key("entries");
  w.begin_array();
  for (const ResonanceEntry& e : tab.entries) {
    w.begin_object();
    w.field("z", e.z);
    w.field("sheet", e.sheet);
    w.field("tag", resonance_tag(e));
    w.field("hull_upper", e.hull_upper);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

}  // namespace detail

inline std::string render_report_json(const PipelineResult& res) {
  JsonWriter w;
  w.begin_object();
  w.key("tool");
  w.begin_object();
  w.field("name", kToolName);
  w.field("version", kVersion);
  w.end_object();
  w.key("config");
  detail::write_json_echo(w, res.cfg.raw);
  w.key("status");
  w.begin_object();
  w.field("exit_code", res.exit_code);
  w.field("stage", res.stage);
  w.field("reason", res.reason);
  w.end_object();
  if (res.has_validation) {
    w.key("validation");
    w.begin_object();
    w.field("passed", res.validation.passed);
    if (!res.validation.passed) w.field("reason", res.validation.reason);
    w.field("tail_estimate", res.validation.tail_estimate);
    w.field("tail_converged", res.validation.tail_converged);
    w.field("endpoint_exponent_lambda_c", res.validation.gamma_lambda_c);
    w.field("endpoint_exponent_beta", res.validation.gamma_beta);
    w.field("endpoint_pass", res.validation.endpoint_pass);
    w.field("hull_in_box", res.validation.hull_in_box);
    w.field("box_in_domain", res.validation.box_in_domain);
    w.end_object();
  }
  if (res.has_rule) {
    w.key("contour");
    w.begin_object();
    w.field("sheet", res.rule.spec.sheet);
    w.field("lambda_c", res.rule.spec.lambda_c);
    w.field("beta", res.rule.spec.beta);
    w.field("arc_nodes", static_cast<int>(res.rule.arc_count));
    w.field("total_nodes", static_cast<int>(res.rule.nodes.size()));
    w.field("arc_order", res.rule.arc_order_used);
    w.field("tail_order", res.rule.tail_order_used);
    w.end_object();
  }
  if (res.has_admissibility) {
    const AdmissibilityReport& a = res.admissibility;
    w.key("admissibility");
    w.begin_object();
    w.field("admissible", a.admissible);
    w.field("d_lower", a.d_lower);
    w.field("d_upper", a.d_upper);
    w.field("var_upper", a.var_upper);
    w.field("norm_a", a.norm_a);
    w.field("contraction_inequality", a.best1_pass);
    w.field("radius_inequality", a.best2_pass);
    w.field("omega_gap", a.omega_gap);
    w.field("r_min", a.r_min);
    w.field("r_max", a.r_max);
    w.end_object();
  }
  if (res.right || res.left) {
    w.key("solutions");
    w.begin_object();
    if (res.right) {
      w.key("right");
      detail::write_solution(w, *res.right);
    }
    if (res.left) {
      w.key("left");
      detail::write_solution(w, *res.left);
    }
    w.end_object();
  }
  if (res.certificate) {
    w.key("factorization");
    detail::write_certificate(w, *res.certificate);
    w.key("resonances");
    detail::write_resonances(w, res.certificate->resonances);
  }
  w.end_object();
  return w.str() + "\n";
}

inline std::string render_timings_json(const PipelineResult& res) {
  JsonWriter w;
  w.begin_object();
  w.field("total_seconds", res.total_seconds);
  w.key("stages");
  w.begin_object();
  for (const auto& [name, secs] : res.stage_seconds) w.field(name, secs);
  w.end_object();
  w.end_object();
  return w.str() + "\n";
}

inline void emit_outputs(const PipelineResult& res, const std::string& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  const auto path = [&outdir](const char* name) { return (fs::path(outdir) / name).string(); };

  if (res.cfg.output.write_json) {
    write_text_file(path("report.json"), render_report_json(res));
    write_text_file(path("timings.json"), render_timings_json(res));
  }
  if (!res.cfg.output.write_csv) return;

  std::string contour_csv = "re,im,abs_weight\n";
  if (res.has_rule) {
    for (std::size_t i = 0; i < res.rule.nodes.size(); ++i) {
      contour_csv += csv_double(res.rule.nodes[i].real()) + "," +
                     csv_double(res.rule.nodes[i].imag()) + "," +
                     csv_double(std::abs(res.rule.weights[i])) + "\n";
    }
  }
  write_text_file(path("contour.csv"), contour_csv);

  std::string numrange_csv = "re,im\n";
  if (res.has_model) {
    for (const Complex& p : res.hull.boundary) {
      numrange_csv += csv_double(p.real()) + "," + csv_double(p.imag()) + "\n";
    }
  }
  write_text_file(path("numrange.csv"), numrange_csv);

  std::string spectrum_csv = "re,im,kappa\n";
  for (const std::optional<SolutionReport>* sol : {&res.right, &res.left}) {
    if (!sol->has_value()) continue;
    const SolutionReport& s = **sol;
    for (Eigen::Index i = 0; i < s.sigma_z.size(); ++i) {
      spectrum_csv += csv_double(s.sigma_z(i).real()) + "," + csv_double(s.sigma_z(i).imag()) +
                      "," + kappa_name(s.kappa) + "\n";
    }
  }
  write_text_file(path("spectrum_Z.csv"), spectrum_csv);

  std::string resonances_csv = "re,im,sheet,tag\n";
  if (res.certificate) {
    for (const ResonanceEntry& e : res.certificate->resonances.entries) {
      resonances_csv += csv_double(e.z.real()) + "," + csv_double(e.z.imag()) + "," +
                        std::to_string(e.sheet) + "," + detail::resonance_tag(e) + "\n";
    }
  }
  write_text_file(path("resonances.csv"), resonances_csv);
}

}  // namespace tfac
