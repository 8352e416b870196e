// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfac/channel.hpp"
#include "tfac/contour.hpp"
#include "tfac/errors.hpp"
#include "tfac/kernel.hpp"
#include "tfac/model.hpp"
#include "tfac/oracle.hpp"
#include "tfac/types.hpp"

namespace tfac {

using Json = nlohmann::json;

// One structured document with four sections (model, contour, solver, loop,
// output); flags override individual keys by dotted path. Parsing is strict
// about types and numeric ranges but tolerant of omitted keys, which take the
// documented defaults.
struct ContourConfig {
  int sheet = -1;
  double depth = 0.4;
  int control_points = 9;
  double beta = 6.0;
  int arc_order = 32;
  int tail_order = 64;
};

struct SolverConfig {
  bool solve_right = true;
  bool solve_left = true;
  double tol = 1e-10;
  int max_iter = 200;
};

struct LoopConfig {
  std::string mode = "auto";  // "auto" | "circle"
  Complex center{0.0, 0.0};
  double radius = 0.0;
  int quad_order = 256;
};

struct OutputConfig {
  std::string directory = "out";
  bool write_json = true;
  bool write_csv = true;
};

struct RunConfig {
  Json raw;  // post-override document, echoed into every report
  std::string model_type;  // "channel" | "scalar_exp" | "zero" | "block"
  ChannelSpec channel;
  double box_lo = 1.5;
  double box_hi = 2.5;
  double eta = 0.25;
  double lambda_c = 0.5;   // scalar_exp / zero models
  double coupling = 0.01;  // scalar_exp
  double scalar_a = 2.0;
  std::vector<double> diag;  // zero model
  int block_n = 4;           // block model
  int block_m = 6;
  unsigned block_seed = 7;
  ContourConfig contour;
  SolverConfig solver;
  LoopConfig loop;
  OutputConfig output;
};

namespace detail {

inline const Json* find_section(const Json& root, const char* name) {
  if (!root.contains(name)) return nullptr;
  const Json& sec = root.at(name);
  if (!sec.is_object()) throw ConfigError(std::string("config: section '") + name + "' must be an object");
  return &sec;
}

inline double json_num(const Json& sec, const char* key, double dflt) {
  if (!sec.contains(key)) return dflt;
  if (!sec.at(key).is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return sec.at(key).get<double>();
}

inline int json_int(const Json& sec, const char* key, int dflt) {
  if (!sec.contains(key)) return dflt;
  if (!sec.at(key).is_number_integer()) {
    throw ConfigError(std::string("config: '") + key + "' must be an integer");
  }
  return sec.at(key).get<int>();
}

inline std::string json_str(const Json& sec, const char* key, const std::string& dflt) {
  if (!sec.contains(key)) return dflt;
  if (!sec.at(key).is_string()) throw ConfigError(std::string("config: '") + key + "' must be a string");
  return sec.at(key).get<std::string>();
}

inline bool json_bool(const Json& sec, const char* key, bool dflt) {
  if (!sec.contains(key)) return dflt;
  if (!sec.at(key).is_boolean()) throw ConfigError(std::string("config: '") + key + "' must be a boolean");
  return sec.at(key).get<bool>();
}

}  // namespace detail

inline RunConfig parse_config(const Json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig cfg;
  cfg.raw = root;

  const Json* model = detail::find_section(root, "model");
  if (model == nullptr) throw ConfigError("config: missing 'model' section");
  cfg.model_type = detail::json_str(*model, "type", "");
  if (cfg.model_type != "channel" && cfg.model_type != "scalar_exp" && cfg.model_type != "zero" &&
      cfg.model_type != "block") {
    throw ConfigError("config: model.type must be one of channel, scalar_exp, zero, block (got '" +
                      cfg.model_type + "')");
  }
  cfg.box_lo = detail::json_num(*model, "box_lo", 1.5);
  cfg.box_hi = detail::json_num(*model, "box_hi", 2.5);
  cfg.eta = detail::json_num(*model, "eta", 0.25);
  if (cfg.model_type == "channel") {
    ChannelSpec& ch = cfg.channel;
    ch.lambda_c = detail::json_num(*model, "lambda_c", ch.lambda_c);
    ch.alpha0 = detail::json_num(*model, "alpha0", ch.alpha0);
    ch.eps_s = detail::json_num(*model, "eps_s", ch.eps_s);
    ch.eps_q = detail::json_num(*model, "eps_q", ch.eps_q);
    ch.a_base = detail::json_num(*model, "a_base", ch.a_base);
    ch.a_bump = detail::json_num(*model, "a_bump", ch.a_bump);
    ch.a_width = detail::json_num(*model, "a_width", ch.a_width);
    ch.half_width = detail::json_num(*model, "half_width", ch.half_width);
    ch.points = detail::json_int(*model, "points", ch.points);
    if (ch.points % 2 == 0 || ch.points < 3) {
      throw ConfigError("config: model.points must be odd and at least 3");
    }
    cfg.lambda_c = ch.lambda_c;
  } else {
    cfg.lambda_c = detail::json_num(*model, "lambda_c", 0.5);
    if (!(cfg.lambda_c > 0.0)) throw ConfigError("config: model.lambda_c must be positive");
  }
  if (cfg.model_type == "scalar_exp") {
    cfg.coupling = detail::json_num(*model, "coupling", 0.01);
    cfg.scalar_a = detail::json_num(*model, "a", 2.0);
  }
  if (cfg.model_type == "zero") {
    if (model->contains("diag")) {
      if (!model->at("diag").is_array()) throw ConfigError("config: model.diag must be an array");
      for (const Json& v : model->at("diag")) {
        if (!v.is_number()) throw ConfigError("config: model.diag entries must be numbers");
        cfg.diag.push_back(v.get<double>());
      }
    } else {
      cfg.diag = {2.0, 2.1};
    }
    if (cfg.diag.empty()) throw ConfigError("config: model.diag must be nonempty");
  }
  if (cfg.model_type == "block") {
    cfg.block_n = detail::json_int(*model, "n", 4);
    cfg.block_m = detail::json_int(*model, "m", 6);
    cfg.block_seed = static_cast<unsigned>(detail::json_int(*model, "seed", 7));
    if (cfg.block_n < 1 || cfg.block_m < 1) throw ConfigError("config: block sizes must be positive");
  }

  if (const Json* c = detail::find_section(root, "contour")) {
    cfg.contour.sheet = detail::json_int(*c, "sheet", -1);
    cfg.contour.depth = detail::json_num(*c, "depth", 0.4);
    cfg.contour.control_points = detail::json_int(*c, "control_points", 9);
    cfg.contour.beta = detail::json_num(*c, "beta", 6.0);
    cfg.contour.arc_order = detail::json_int(*c, "arc_order", 32);
    cfg.contour.tail_order = detail::json_int(*c, "tail_order", 64);
  }
  if (cfg.contour.sheet != 1 && cfg.contour.sheet != -1) {
    throw ConfigError("config: contour.sheet must be +1 or -1");
  }
  if (!(cfg.contour.depth > 0.0)) throw ConfigError("config: contour.depth must be positive");
  if (cfg.contour.control_points < 1) throw ConfigError("config: contour.control_points must be >= 1");
  if (!(cfg.contour.beta > cfg.lambda_c)) {
    throw ConfigError("config: contour.beta must exceed the branch point lambda_c");
  }
  if (cfg.contour.arc_order < 4 || cfg.contour.tail_order < 4) {
    throw ConfigError("config: quadrature orders must be at least 4");
  }

  if (const Json* s = detail::find_section(root, "solver")) {
    if (s->contains("kappa")) {
      if (!s->at("kappa").is_array()) throw ConfigError("config: solver.kappa must be an array");
      cfg.solver.solve_right = false;
      cfg.solver.solve_left = false;
      for (const Json& v : s->at("kappa")) {
        const std::string name = v.is_string() ? v.get<std::string>() : "";
        if (name == "right") {
          cfg.solver.solve_right = true;
        } else if (name == "left") {
          cfg.solver.solve_left = true;
        } else {
          throw ConfigError("config: solver.kappa entries must be 'right' or 'left'");
        }
      }
      if (!cfg.solver.solve_right && !cfg.solver.solve_left) {
        throw ConfigError("config: solver.kappa must name at least one variant");
      }
    }
    cfg.solver.tol = detail::json_num(*s, "tol", 1e-10);
    cfg.solver.max_iter = detail::json_int(*s, "max_iter", 200);
  }
  if (!(cfg.solver.tol >= 1e-14 && cfg.solver.tol <= 1e-2)) {
    throw ConfigError("config: solver.tol must lie in [1e-14, 1e-2]");
  }
  if (cfg.solver.max_iter < 1) throw ConfigError("config: solver.max_iter must be positive");

  if (const Json* l = detail::find_section(root, "loop")) {
    cfg.loop.mode = detail::json_str(*l, "mode", "auto");
    if (cfg.loop.mode != "auto" && cfg.loop.mode != "circle") {
      throw ConfigError("config: loop.mode must be 'auto' or 'circle'");
    }
    cfg.loop.center = Complex(detail::json_num(*l, "center_re", 0.0),
                              detail::json_num(*l, "center_im", 0.0));
    cfg.loop.radius = detail::json_num(*l, "radius", 0.0);
    cfg.loop.quad_order = detail::json_int(*l, "quad_order", 256);
    if (cfg.loop.mode == "circle" && !(cfg.loop.radius > 0.0)) {
      throw ConfigError("config: loop.radius must be positive for an explicit circle");
    }
    if (cfg.loop.quad_order < 8) throw ConfigError("config: loop.quad_order must be at least 8");
  }

  if (const Json* o = detail::find_section(root, "output")) {
    cfg.output.directory = detail::json_str(*o, "directory", "out");
    if (o->contains("formats")) {
      if (!o->at("formats").is_array()) throw ConfigError("config: output.formats must be an array");
      cfg.output.write_json = false;
      cfg.output.write_csv = false;
      for (const Json& v : o->at("formats")) {
        const std::string name = v.is_string() ? v.get<std::string>() : "";
        if (name == "json") {
          cfg.output.write_json = true;
        } else if (name == "csv") {
          cfg.output.write_csv = true;
        } else {
          throw ConfigError("config: output.formats entries must be 'json' or 'csv'");
        }
      }
    }
  }
  return cfg;
}

// Dotted-path override "section.key=value"; the value parses as JSON when it
// can (numbers, booleans, arrays) and falls back to a bare string.
inline void apply_override(Json& root, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like section.key=value (got '" + spec + "')");
  }
  const std::string path = spec.substr(0, eq);
  const std::string text = spec.substr(eq + 1);
  Json* cur = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError("override path has an empty segment: '" + path + "'");
    if (!cur->is_object() && !cur->is_null()) {
      throw ConfigError("override path crosses a non-object at '" + part + "'");
    }
    cur = &((*cur)[part]);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  Json parsed = Json::parse(text, nullptr, false);
  *cur = parsed.is_discarded() ? Json(text) : parsed;
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  Json root = Json::parse(f, nullptr, false);
  if (root.is_discarded()) throw ConfigError("config file " + path + " is not valid JSON");
  for (const std::string& ov : overrides) apply_override(root, ov);
  return parse_config(root);
}

inline ContourSpec to_contour_spec(const RunConfig& cfg) {
  ContourSpec spec = semi_ellipse_spec(cfg.contour.sheet, cfg.lambda_c, cfg.contour.beta,
                                       cfg.contour.depth, cfg.contour.control_points);
  spec.arc_order = cfg.contour.arc_order;
  spec.tail_order = cfg.contour.tail_order;
  return spec;
}

inline TransferModel build_model(const RunConfig& cfg) {
  if (cfg.model_type == "channel") {
    return build_channel_model(cfg.channel, cfg.box_lo, cfg.box_hi, cfg.eta, cfg.contour.beta);
  }
  if (cfg.model_type == "scalar_exp") {
    CMatrix a(1, 1);
    a(0, 0) = cfg.scalar_a;
    return make_model(std::move(a),
                      scalar_exp_kernel(cfg.coupling, cfg.lambda_c, cfg.contour.beta,
                                        cfg.lambda_c - 5.0),
                      cfg.box_lo, cfg.box_hi, cfg.eta);
  }
  if (cfg.model_type == "zero") {
    const int n = static_cast<int>(cfg.diag.size());
    CMatrix a = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = cfg.diag[static_cast<std::size_t>(i)];
    return make_model(std::move(a),
                      zero_kernel(n, cfg.lambda_c, cfg.contour.beta,
                                  HolomorphyDomain::half_plane(cfg.lambda_c - 5.0)),
                      cfg.box_lo, cfg.box_hi, cfg.eta);
  }
  return to_transfer_model(random_block_model(cfg.block_n, cfg.block_m, cfg.block_seed),
                           cfg.box_lo, cfg.box_hi, cfg.eta);
}

}  // namespace tfac
