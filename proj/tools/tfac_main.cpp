// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "tfac/config.hpp"
#include "tfac/errors.hpp"
#include "tfac/oracle.hpp"
#include "tfac/pipeline.hpp"
#include "tfac/report_io.hpp"
#include "tfac/transfer.hpp"
#include "tfac/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string outdir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonArgs* args) {
  sub->add_option("--config", args->config_path, "run configuration (JSON)")->required();
  sub->add_option("--out", args->outdir, "output directory (overrides output.directory)");
  sub->add_option("--override", args->overrides,
                  "dotted-path config override, e.g. solver.tol=1e-11 (repeatable)");
}

int run_stage(const CommonArgs& args, tfac::Stage stop_after) {
  tfac::RunConfig cfg;
  try {
    cfg = tfac::load_config(args.config_path, args.overrides);
  } catch (const tfac::Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 4;
  }
  const tfac::PipelineResult res = tfac::run_pipeline(cfg, stop_after);
  const std::string outdir = args.outdir.empty() ? cfg.output.directory : args.outdir;
  try {
    tfac::emit_outputs(res, outdir);
  } catch (const tfac::Error& e) {
    std::fprintf(stderr, "emit error: %s\n", e.what());
    return 4;
  }
  if (res.exit_code == 0) {
    std::printf("ok: pipeline reached stage '%s'; outputs in %s\n", res.stage.c_str(),
                outdir.c_str());
    if (res.certificate) {
      int resonant = 0;
      for (const auto& e : res.certificate->resonances.entries) {
        if (e.unphysical_sheet) ++resonant;
      }
      std::printf("resonances tagged unphysical-sheet: %d of %d eigenvalues\n", resonant,
                  static_cast<int>(res.certificate->resonances.entries.size()));
    }
  } else {
    std::printf("refused at stage '%s' (exit %d): %s\n", res.stage.c_str(), res.exit_code,
                res.reason.c_str());
  }
  return res.exit_code;
}

int run_eval(const CommonArgs& args, double zre, double zim) {
  tfac::RunConfig cfg;
  try {
    cfg = tfac::load_config(args.config_path, args.overrides);
  } catch (const tfac::Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 4;
  }
  try {
    const tfac::TransferModel model = tfac::build_model(cfg);
    const tfac::ContourRule rule = tfac::build_rule(tfac::to_contour_spec(cfg), model);
    const tfac::TransferEvaluator ev(model, rule);
    const tfac::Complex z(zre, zim);
    const tfac::CMatrix m = ev.eval_M_gamma(z);
    std::printf("z = (%s, %s), sheet %d\n", tfac::format_double(zre).c_str(),
                tfac::format_double(zim).c_str(), ev.sheet());
    std::printf("||M_Gamma(z)|| = %s\n", tfac::format_double(tfac::op_norm(m)).c_str());
    if (m.rows() <= 4) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          std::printf("M[%ld][%ld] = (%s, %s)\n", static_cast<long>(i), static_cast<long>(j),
                      tfac::format_double(m(i, j).real()).c_str(),
                      tfac::format_double(m(i, j).imag()).c_str());
        }
      }
    }
    const tfac::InverseReport inv = ev.invert_M_gamma(z);
    if (inv.singular) {
      std::printf("M_Gamma(z) is numerically singular here\n");
    } else {
      std::printf("||M_Gamma(z)^-1|| = %s\n",
                  tfac::format_double(tfac::op_norm(inv.inverse)).c_str());
    }
    if (ev.region().contains(z)) {
      std::printf("continuation residue defect = %s\n",
                  tfac::format_double(ev.residue_defect(z)).c_str());
    } else {
      std::printf("z lies outside the swept continuation region\n");
    }
    return 0;
  } catch (const tfac::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const tfac::Error& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return 2;
  }
}

int run_example_channel(const std::string& outdir, double lambda_c, double alpha0, double eps,
                        double half_width, int points, double depth,
                        const std::vector<std::string>& overrides) {
  tfac::Json root = {
      {"model",
       {{"type", "channel"},
        {"lambda_c", lambda_c},
        {"alpha0", alpha0},
        {"eps_s", eps},
        {"eps_q", eps},
        {"a_base", 2.0},
        {"a_bump", 0.25},
        {"a_width", 1.0},
        {"half_width", half_width},
        {"points", points},
        {"box_lo", 1.5},
        {"box_hi", 2.5},
        {"eta", 0.25}}},
      {"contour",
       {{"sheet", -1}, {"depth", depth}, {"control_points", 9}, {"beta", 6.0}}},
      {"solver", {{"kappa", {"right", "left"}}, {"tol", 1e-10}, {"max_iter", 200}}},
      {"loop", {{"mode", "auto"}, {"quad_order", 256}}},
      {"output", {{"directory", outdir.empty() ? std::string("out-channel") : outdir}}}};
  for (const std::string& ov : overrides) {
    try {
      tfac::apply_override(root, ov);
    } catch (const tfac::Error& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 4;
    }
  }
  CommonArgs args;
  args.outdir = outdir;
  try {
    const tfac::RunConfig cfg = tfac::parse_config(root);
    const tfac::PipelineResult res = tfac::run_pipeline(cfg, tfac::Stage::resonances);
    const std::string dir = outdir.empty() ? cfg.output.directory : outdir;
    tfac::emit_outputs(res, dir);
    if (res.exit_code == 0) {
      std::printf("ok: channel example complete; outputs in %s\n", dir.c_str());
    } else {
      std::printf("refused at stage '%s' (exit %d): %s\n", res.stage.c_str(), res.exit_code,
                  res.reason.c_str());
    }
    return res.exit_code;
  } catch (const tfac::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}

// Independent linear-algebra cross-checks on the finite block model; no
// contours or quadrature anywhere in this path.
int run_verify() {
  struct Row {
    std::string name;
    double value;
    double tol;
    bool pass;
  };
  std::vector<Row> rows;
  auto check = [&rows](const std::string& name, double value, double tol) {
    rows.push_back({name, value, tol, value <= tol});
  };

  // Scalar instance with a hand-computable transfer function.
  {
    tfac::DiscreteBlockModel dm;
    dm.a = tfac::CMatrix::Constant(1, 1, 2.0);
    dm.b_tilde = tfac::CMatrix::Constant(1, 1, 0.3);
    dm.d_tilde = tfac::CMatrix::Constant(1, 1, 0.3);
    dm.mu = {1.0};
    const tfac::Complex z(3.0, 0.0);
    const tfac::Complex want = 2.0 - 0.09 - z + z * 0.09 / (z - 1.0);
    check("scalar transfer closed form", std::abs(tfac::oracle_m(dm, z)(0, 0) - want), 1e-14);
    check("scalar compressed resolvent", tfac::schur_defect(dm, z), 1e-12);
  }
  // Decoupled model: the compression is exactly the resolvent of A.
  {
    tfac::DiscreteBlockModel dm;
    dm.a = tfac::CMatrix::Zero(3, 3);
    dm.a(0, 0) = 1.0;
    dm.a(1, 1) = tfac::Complex(2.0, 0.5);
    dm.a(2, 2) = 3.0;
    dm.b_tilde = tfac::CMatrix::Zero(3, 2);
    dm.d_tilde = tfac::CMatrix::Zero(2, 3);
    dm.mu = {1.5, 2.5};
    check("decoupled compressed resolvent", tfac::schur_defect(dm, tfac::Complex(0.0, 1.0)),
          1e-13);
  }
  // Random instance: compressed resolvent at 20 points.
  const tfac::DiscreteBlockModel dm = tfac::random_block_model(4, 6, 7);
  {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const tfac::Complex z(u(gen), u(gen) >= 0.0 ? 1.0 + u(gen) / 8.0 : -1.0 + u(gen) / 8.0);
      worst = std::max(worst, tfac::schur_defect(dm, z));
    }
    check("random compressed resolvent (20 z)", worst, 1e-10);
  }
  // Eigenvalue correspondence between H and det M.
  {
    const tfac::CMatrix h = tfac::build_block(dm);
    Eigen::ComplexEigenSolver<tfac::CMatrix> es(h);
    double worst_smin = 0.0;
    double worst_root = 0.0;
    const double scale = 1.0 + tfac::op_norm(h);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const tfac::Complex hval = es.eigenvalues()(i);
      double to_channel = 1e300;
      for (double mu : dm.mu) to_channel = std::min(to_channel, std::abs(hval - mu));
      if (to_channel <= 1e-6) continue;
      Eigen::BDCSVD<tfac::CMatrix> svd(tfac::oracle_m(dm, hval));
      worst_smin =
          std::max(worst_smin, svd.singularValues()(svd.singularValues().size() - 1) / scale);
      const tfac::RootReport root = tfac::det_root_newton(dm, hval);
      worst_root = std::max(worst_root, root.converged ? std::abs(root.z - hval) : 1e300);
    }
    check("sigma(H) are roots of det M", worst_smin, 1e-8);
    check("Newton roots return to sigma(H)", worst_root, 1e-8);
  }
  // Residue of M^{-1} around an isolated eigenvalue vs the eigenprojection.
  {
    const tfac::CMatrix h = tfac::build_block(dm);
    Eigen::ComplexEigenSolver<tfac::CMatrix> es(h);
    const Eigen::Index total = es.eigenvalues().size();
    Eigen::Index pick = 0;
    double best_gap = -1.0;
    for (Eigen::Index i = 0; i < total; ++i) {
      double gap = 1e300;
      for (Eigen::Index j = 0; j < total; ++j) {
        if (j != i) gap = std::min(gap, std::abs(es.eigenvalues()(i) - es.eigenvalues()(j)));
      }
      for (double mu : dm.mu) gap = std::min(gap, std::abs(es.eigenvalues()(i) - mu));
      if (gap > best_gap) {
        best_gap = gap;
        pick = i;
      }
    }
    const tfac::Complex h0 = es.eigenvalues()(pick);
    const tfac::CMatrix v = es.eigenvectors();
    tfac::CVector sel = tfac::CVector::Zero(total);
    sel(pick) = 1.0;
    const tfac::CMatrix proj = v * sel.asDiagonal() * v.inverse();
    const Eigen::Index n = dm.a.rows();
    tfac::CMatrix loop_sum = tfac::CMatrix::Zero(n, n);
    const int quad = 128;
    const double radius = best_gap / 3.0;
    for (int j = 0; j < quad; ++j) {
      const double th = 2.0 * tfac::kPi * j / quad;
      const tfac::Complex e(std::cos(th), std::sin(th));
      const tfac::Complex zj = h0 + radius * e;
      const tfac::Complex wj = (2.0 * tfac::kPi / quad) * tfac::kI * radius * e;
      loop_sum += wj * tfac::oracle_m(dm, zj).inverse();
    }
    const tfac::CMatrix p_m = (-1.0 / (2.0 * tfac::kPi * tfac::kI)) * loop_sum;
    check("residue matches eigenprojection compression",
          tfac::op_norm(p_m - proj.topLeftCorner(n, n)), 1e-8);
  }

  bool all = true;
  std::printf("%-44s %-12s %-10s %s\n", "check", "value", "tolerance", "result");
  for (const Row& r : rows) {
    all = all && r.pass;
    std::printf("%-44s %-12.3e %-10.1e %s\n", r.name.c_str(), r.value, r.tol,
                r.pass ? "pass" : "FAIL");
  }
  std::printf("%s\n", all ? "verify: all checks passed" : "verify: FAILURES present");
  return all ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(tfac::kToolName) + " " + tfac::kVersion +
               ": transfer-function continuation, factorization, and resonance certificates"};
  app.require_subcommand(1);

  CommonArgs validate_args, admissible_args, solve_args, factorize_args, resonances_args,
      eval_args;
  double eval_re = 0.0, eval_im = 0.0;

  CLI::App* sub_validate = app.add_subcommand("validate", "build the model and run validation");
  add_common(sub_validate, &validate_args);
  CLI::App* sub_admissible =
      app.add_subcommand("admissible", "validate, then check contour admissibility");
  add_common(sub_admissible, &admissible_args);
  CLI::App* sub_solve =
      app.add_subcommand("solve", "run through the transformation-equation solves");
  add_common(sub_solve, &solve_args);
  CLI::App* sub_factorize =
      app.add_subcommand("factorize", "full pipeline through the factorization certificate");
  add_common(sub_factorize, &factorize_args);
  CLI::App* sub_resonances =
      app.add_subcommand("resonances", "full pipeline including the resonance table");
  add_common(sub_resonances, &resonances_args);

  CLI::App* sub_eval = app.add_subcommand("eval", "evaluate M_Gamma at one point");
  add_common(sub_eval, &eval_args);
  sub_eval->add_option("--z-re", eval_re, "Re z")->required();
  sub_eval->add_option("--z-im", eval_im, "Im z")->required();

  std::string ex_out;
  double ex_lambda_c = 0.5, ex_alpha0 = 1.0, ex_eps = 0.05, ex_half_width = 12.0,
         ex_depth = 0.4;
  int ex_points = 121;
  std::vector<std::string> ex_overrides;
  CLI::App* sub_example =
      app.add_subcommand("example-channel", "run the bundled two-channel demonstration");
  sub_example->add_option("--out", ex_out, "output directory");
  sub_example->add_option("--lambda-c", ex_lambda_c, "branch point of the channel");
  sub_example->add_option("--alpha0", ex_alpha0, "profile decay rate");
  sub_example->add_option("--eps", ex_eps, "coupling amplitude for s and q");
  sub_example->add_option("--half-width", ex_half_width, "grid half-width L");
  sub_example->add_option("--points", ex_points, "grid point count (odd)");
  sub_example->add_option("--depth", ex_depth, "contour arc depth");
  sub_example->add_option("--override", ex_overrides, "dotted-path config override (repeatable)");

  CLI::App* sub_verify =
      app.add_subcommand("verify", "run the finite block-model oracle suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sub_validate->parsed()) return run_stage(validate_args, tfac::Stage::validate);
    if (sub_admissible->parsed()) return run_stage(admissible_args, tfac::Stage::admissibility);
    if (sub_solve->parsed()) return run_stage(solve_args, tfac::Stage::solve);
    if (sub_factorize->parsed()) return run_stage(factorize_args, tfac::Stage::factorize);
    if (sub_resonances->parsed()) return run_stage(resonances_args, tfac::Stage::resonances);
    if (sub_eval->parsed()) return run_eval(eval_args, eval_re, eval_im);
    if (sub_example->parsed()) {
      return run_example_channel(ex_out, ex_lambda_c, ex_alpha0, ex_eps, ex_half_width,
                                 ex_points, ex_depth, ex_overrides);
    }
    if (sub_verify->parsed()) return run_verify();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unhandled error: %s\n", e.what());
    return 4;
  }
  return 4;
}
