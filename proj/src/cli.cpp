/*
 * Copyright 2026 The acmenet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "acme/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acme/adaptive_weights.hpp"
#include "acme/design.hpp"
#include "acme/errors.hpp"
#include "acme/family.hpp"
#include "acme/io.hpp"
#include "acme/parallel.hpp"
#include "acme/penalty.hpp"
#include "acme/simulate.hpp"
#include "acme/solver.hpp"
#include "acme/tuning.hpp"

namespace acme::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { kInt, kNumber, kString, kBool, kNumbers, kStrings };

struct Key {
  std::string name;
  Kind kind;
  std::string help;
};

// Flat key/value configuration for one subcommand: a JSON file first, then
// command-line flags on top. Keys outside the subcommand's table are
// rejected before anything runs.
class Config {
 public:
  Config(std::string command, std::vector<Key> keys)
      : command_(std::move(command)), keys_(std::move(keys)) {}

  const std::vector<Key>& keys() const { return keys_; }

  void load_file(const fs::path& path) {
    const Json doc = io::load_json(path);
    if (!doc.is_object())
      throw UsageError(path.string() + ": config must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const Key& key = find(it.key());
      check_type(key, it.value());
      values_[key.name] = normalize(key, it.value());
    }
  }

  void set_flag(const std::string& name, const std::string& text) {
    const Key& key = find(name);
    values_[name] = parse_text(key, text);
  }

  bool has(const std::string& name) const { return values_.contains(name); }

  double number(const std::string& name, double fallback) const {
    return has(name) ? values_.at(name).get<double>() : fallback;
  }
  double require_number(const std::string& name) const {
    require(name);
    return values_.at(name).get<double>();
  }
  long long integer(const std::string& name, long long fallback) const {
    return has(name) ? values_.at(name).get<long long>() : fallback;
  }
  std::size_t count(const std::string& name, std::size_t fallback) const {
    const long long v = integer(name, static_cast<long long>(fallback));
    if (v < 0) throw UsageError("'" + name + "' must be non-negative");
    return static_cast<std::size_t>(v);
  }
  std::string string(const std::string& name, const std::string& fallback) const {
    return has(name) ? values_.at(name).get<std::string>() : fallback;
  }
  std::string require_string(const std::string& name) const {
    require(name);
    return values_.at(name).get<std::string>();
  }
  bool boolean(const std::string& name, bool fallback) const {
    return has(name) ? values_.at(name).get<bool>() : fallback;
  }
  std::vector<double> numbers(const std::string& name,
                              std::vector<double> fallback) const {
    return has(name) ? values_.at(name).get<std::vector<double>>() : fallback;
  }
  std::vector<std::string> strings(const std::string& name,
                                   std::vector<std::string> fallback) const {
    return has(name) ? values_.at(name).get<std::vector<std::string>>()
                     : fallback;
  }

  /// Effective settings in table order, for provenance in outputs. Keys
  /// that cannot change results (paths, thread count) are left out so that
  /// repeated runs produce identical files.
  Json echo() const {
    Json j = Json::object();
    for (const Key& k : keys_)
      if (has(k.name) && k.name != "out" && k.name != "threads")
        j[k.name] = values_.at(k.name);
    return j;
  }

 private:
  const Key& find(const std::string& name) const {
    for (const Key& k : keys_)
      if (k.name == name) return k;
    throw UsageError("unknown key '" + name + "' for " + command_);
  }

  void require(const std::string& name) const {
    if (!has(name))
      throw UsageError(command_ + " needs '" + name + "' (config key or --" +
                       name + ")");
  }

  static bool integral(const Json& v) {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && std::isfinite(v.get<double>()) &&
           v.get<double>() == std::floor(v.get<double>());
  }

  static void check_type(const Key& key, const Json& v) {
    bool ok = false;
    switch (key.kind) {
      case Kind::kInt: ok = integral(v); break;
      case Kind::kNumber: ok = v.is_number(); break;
      case Kind::kString: ok = v.is_string(); break;
      case Kind::kBool: ok = v.is_boolean(); break;
      case Kind::kNumbers:
        ok = v.is_number() ||
             (v.is_array() && std::all_of(v.begin(), v.end(),
                                          [](const Json& e) { return e.is_number(); }));
        break;
      case Kind::kStrings:
        ok = v.is_string() ||
             (v.is_array() && std::all_of(v.begin(), v.end(),
                                          [](const Json& e) { return e.is_string(); }));
        break;
    }
    if (!ok) throw UsageError("config key '" + key.name + "' has the wrong type");
  }

  static Json normalize(const Key& key, const Json& v) {
    if (key.kind == Kind::kInt) return Json(static_cast<long long>(v.get<double>()));
    if ((key.kind == Kind::kNumbers || key.kind == Kind::kStrings) && !v.is_array())
      return Json::array({v});
    if (key.kind == Kind::kNumber) return Json(v.get<double>());
    if (key.kind == Kind::kNumbers) {
      Json a = Json::array();
      for (const Json& e : v) a.push_back(e.get<double>());
      return a;
    }
    return v;
  }

  static double to_number(const Key& key, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw UsageError("--" + key.name + ": '" + s + "' is not a number");
    return v;
  }

  static Json parse_text(const Key& key, const std::string& text) {
    switch (key.kind) {
      case Kind::kInt: {
        const double v = to_number(key, text);
        if (v != std::floor(v))
          throw UsageError("--" + key.name + " expects an integer");
        return Json(static_cast<long long>(v));
      }
      case Kind::kNumber:
        return Json(to_number(key, text));
      case Kind::kString:
        return Json(text);
      case Kind::kBool:
        if (text == "true" || text == "1") return Json(true);
        if (text == "false" || text == "0") return Json(false);
        throw UsageError("--" + key.name + " expects true or false");
      case Kind::kNumbers:
      case Kind::kStrings: {
        Json a = Json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (key.kind == Kind::kNumbers) a.push_back(to_number(key, item));
          else a.push_back(item);
        }
        return a;
      }
    }
    return Json();
  }

  std::string command_;
  std::vector<Key> keys_;
  std::map<std::string, Json> values_;
};

// ---------------------------------------------------------------------------
// Key tables

std::vector<Key> scenario_keys() {
  return {
      {"n", Kind::kInt, "training rows"},
      {"n_test", Kind::kInt, "test rows (0 = same as n)"},
      {"p", Kind::kInt, "number of main effects"},
      {"rho", Kind::kNumber, "latent equicorrelation in [0,1)"},
      {"family", Kind::kString, "gaussian or binomial"},
      {"structure", Kind::kString,
       "pure_mains, pure_siblings, pure_cousins, main_plus_siblings, "
       "main_plus_cousins"},
      {"n_groups", Kind::kInt, "number of active groups"},
      {"effects_per_group", Kind::kInt, "conditional effects per group"},
      {"beta_me", Kind::kNumber, "coefficient of active main effects"},
      {"beta_cme", Kind::kNumber, "coefficient of active conditional effects"},
      {"beta0", Kind::kNumber, "intercept (default 12 gaussian, 0 binomial)"},
      {"noise_sd", Kind::kNumber, "gaussian noise standard deviation"},
      {"seed", Kind::kInt, "random seed"},
  };
}

std::vector<Key> grid_keys() {
  return {
      {"gamma_grid", Kind::kNumbers, "MC+ concavity candidates"},
      {"tau_grid", Kind::kNumbers, "outer penalty decay candidates"},
      {"rho_grid", Kind::kNumbers, "sibling share lambda_s/(lambda_s+lambda_c)"},
      {"nlambda", Kind::kInt, "path length in stage 2"},
      {"stage1_nlambda", Kind::kInt, "path length in stage 1"},
      {"lambda_min_ratio", Kind::kNumber, "path end as a fraction of the start"},
      {"folds", Kind::kInt, "cross-validation folds"},
  };
}

std::vector<Key> solver_keys() {
  return {
      {"tol", Kind::kNumber, "coefficient change tolerance"},
      {"max_iter", Kind::kInt, "iteration cap"},
  };
}

std::vector<Key> data_keys() {
  return {
      {"x", Kind::kString, "main-effect CSV (-1/+1 or 0/1, header row)"},
      {"y", Kind::kString, "response CSV (one column, header row)"},
      {"family", Kind::kString, "gaussian or binomial"},
  };
}

template <class... Lists>
std::vector<Key> join(std::vector<Key> first, const Lists&... rest) {
  (first.insert(first.end(), rest.begin(), rest.end()), ...);
  return first;
}

const Key kOut{"out", Kind::kString, "output directory"};
const Key kThreads{"threads", Kind::kInt, "worker threads (0 = all cores)"};
const Key kSeed{"seed", Kind::kInt, "random seed"};
const Key kWeights{"weights", Kind::kString, "adaptive or unit"};

std::vector<Key> simulate_keys() { return join(scenario_keys(), std::vector<Key>{kOut}); }

std::vector<Key> fit_keys() {
  return join(data_keys(), solver_keys(),
              std::vector<Key>{
                  kWeights,
                  {"lambda_s", Kind::kNumber, "sibling penalty level"},
                  {"lambda_c", Kind::kNumber, "cousin penalty level"},
                  {"lambda_ratio", Kind::kNumber,
                   "total penalty as a fraction of the weighted start value"},
                  {"rho", Kind::kNumber, "sibling share used with lambda_ratio"},
                  {"gamma", Kind::kNumber, "MC+ concavity"},
                  {"tau", Kind::kNumber, "outer penalty decay"},
                  {"stabilize", Kind::kBool,
                   "rescale weights to satisfy the convexity condition"},
                  kSeed,
                  kOut,
              });
}

std::vector<Key> cv_keys() {
  return join(data_keys(), solver_keys(), grid_keys(),
              std::vector<Key>{kWeights, kSeed, kThreads, kOut});
}

std::vector<Key> eval_keys() {
  return {
      {"fit", Kind::kString, "fit.json from fit or cv"},
      {"x", Kind::kString, "test main-effect CSV"},
      {"y", Kind::kString, "test response CSV"},
      {"truth", Kind::kString, "optional truth.json from simulate"},
      kOut,
  };
}

std::vector<Key> curve_keys() {
  return {
      {"lambda_s", Kind::kNumber, "sibling penalty level"},
      {"lambda_c", Kind::kNumber, "cousin penalty level"},
      {"gamma", Kind::kNumber, "MC+ concavity"},
      {"tau", Kind::kNumber, "outer penalty decay"},
      {"weights", Kind::kString, "unit, fixed or pilot"},
      {"omega_sib", Kind::kNumber, "fixed sibling group weight"},
      {"omega_cou", Kind::kNumber, "fixed cousin group weight"},
      {"omega", Kind::kNumber, "fixed individual weight"},
      {"n", Kind::kInt, "sample size in the pilot weight offset 1/n"},
      {"beta_add", Kind::kNumber, "coefficient of the included context effect"},
      {"beta_max", Kind::kNumber, "largest varied coefficient"},
      {"points", Kind::kInt, "grid points per curve"},
      kOut,
  };
}

std::vector<Key> bench_keys() {
  return join(scenario_keys(), grid_keys(), solver_keys(),
              std::vector<Key>{
                  {"methods", Kind::kStrings, "adaptive, unit, lasso"},
                  {"n_reps", Kind::kInt, "replicates"},
                  {"label", Kind::kString, "scenario label in the tables"},
                  kThreads,
                  kOut,
              });
}

// ---------------------------------------------------------------------------
// Shared builders

Family family_of(const Config& cfg) {
  try {
    return Family::parse(cfg.string("family", "gaussian"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::uint64_t seed_of(const Config& cfg, std::uint64_t fallback = 1) {
  const long long s = cfg.integer("seed", static_cast<long long>(fallback));
  if (s < 0) throw UsageError("'seed' must be non-negative");
  return static_cast<std::uint64_t>(s);
}

ScenarioSpec scenario_of(const Config& cfg) {
  ScenarioSpec s;
  s.n = cfg.count("n", s.n);
  s.n_test = cfg.count("n_test", s.n_test);
  s.p = cfg.count("p", s.p);
  s.rho = cfg.number("rho", s.rho);
  s.family = family_of(cfg);
  try {
    s.structure = parse_structure(cfg.string("structure", std::string(structure_name(s.structure))));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  s.n_groups = cfg.count("n_groups", s.n_groups);
  s.effects_per_group = cfg.count("effects_per_group", s.effects_per_group);
  s.beta_me = cfg.number("beta_me", s.beta_me);
  s.beta_cme = cfg.number("beta_cme", s.beta_cme);
  s.beta0 = cfg.number("beta0", s.family.is_binomial() ? 0.0 : s.beta0);
  s.noise_sd = cfg.number("noise_sd", s.noise_sd);
  s.seed = seed_of(cfg);
  if (!(s.rho < 1.0)) throw UsageError("'rho' must be below 1");
  return s;
}

TuningGrid grid_of(const Config& cfg) {
  TuningGrid g = TuningGrid::defaults();
  g.gamma_grid = cfg.numbers("gamma_grid", g.gamma_grid);
  g.tau_grid = cfg.numbers("tau_grid", g.tau_grid);
  g.rho_grid = cfg.numbers("rho_grid", g.rho_grid);
  g.nlambda = static_cast<int>(cfg.integer("nlambda", g.nlambda));
  g.stage1_nlambda = static_cast<int>(cfg.integer("stage1_nlambda", g.stage1_nlambda));
  g.lambda_min_ratio = cfg.number("lambda_min_ratio", g.lambda_min_ratio);
  g.folds = static_cast<int>(cfg.integer("folds", g.folds));
  g.seed = seed_of(cfg);
  g.validate();
  return g;
}

FitOptions options_of(const Config& cfg) {
  FitOptions o;
  o.tol = cfg.number("tol", o.tol);
  o.max_iter = static_cast<int>(cfg.integer("max_iter", o.max_iter));
  if (!(o.tol > 0.0)) throw UsageError("'tol' must be positive");
  if (o.max_iter < 1) throw UsageError("'max_iter' must be positive");
  return o;
}

int threads_of(const Config& cfg) {
  const long long t = cfg.integer("threads", 0);
  if (t < 0) throw UsageError("'threads' must be non-negative");
  return resolve_threads(static_cast<int>(t));
}

WeightScheme scheme_of(const Config& cfg) {
  const std::string w = cfg.string("weights", "adaptive");
  if (w == "adaptive") return WeightScheme::kAdaptive;
  if (w == "unit") return WeightScheme::kUnit;
  throw UsageError("'weights' must be adaptive or unit");
}

fs::path out_dir(const Config& cfg) { return fs::path(cfg.string("out", ".")); }

struct Data {
  MainEffectMatrix me;
  CmeDesign raw;
  std::vector<double> y;
  Family family = Family::gaussian();
};

Data load_data(const Config& cfg, std::ostream& err) {
  Data d;
  d.family = family_of(cfg);
  d.me = io::read_main_effects(cfg.require_string("x"), &err);
  d.y = io::read_response(cfg.require_string("y"));
  if (d.y.size() != d.me.n())
    throw IoError("response has " + std::to_string(d.y.size()) +
                  " rows but the main-effect table has " + std::to_string(d.me.n()));
  d.family.validate_response(d.y);
  d.raw = build_cme_matrix(d.me);
  return d;
}

Json stability_json(const StabilityReport& r) {
  Json j;
  j["omega_max"] = r.omega_max;
  j["lhs"] = r.lhs;
  j["coordinate_bound"] = r.coordinate_bound;
  j["coordinate_ok"] = r.coordinate_ok;
  if (r.global_bound) {
    j["global_bound"] = *r.global_bound;
    j["global_ok"] = r.global_ok.value_or(false);
  }
  return j;
}

// fit.json, selected.csv and weights.csv for a fit on the standardized
// design `std_design`.
void write_fit_outputs(const fs::path& dir, const CmeDesign& std_design,
                       const Family& family, const PenaltyParams& params,
                       const AdaptiveWeights& weights,
                       const std::string& scheme, const FitState& state,
                       const Json& config_echo, std::ostream& out) {
  const auto [beta_raw, b0_raw] =
      destandardize_coefficients(std_design, state.beta, state.intercept);

  Json j;
  j["family"] = std::string(family.name());
  j["me_names"] = std_design.me_names();
  j["config"] = config_echo;
  Json par;
  par["lambda_s"] = params.lambda_s;
  par["lambda_c"] = params.lambda_c;
  par["gamma"] = params.gamma;
  par["tau"] = params.tau;
  j["params"] = par;
  j["weights"] = scheme;
  j["weight_scale"] = weights.indiv_scale;
  j["stability"] = stability_json(check_stability(params, family, std_design));
  j["intercept"] = b0_raw;
  j["intercept_std"] = state.intercept;
  Json nonzero = Json::array();
  for (std::size_t c : state.active) nonzero.push_back(std_design.column_name(c));
  j["nonzero"] = nonzero;
  Json cols = Json::array();
  for (std::size_t c = 0; c < std_design.width(); ++c) {
    Json col;
    col["name"] = std_design.column_name(c);
    col["beta"] = beta_raw[c];
    col["beta_std"] = state.beta[c];
    col["mean"] = std_design.col_mean()[c];
    col["scale"] = std_design.col_scale()[c];
    cols.push_back(col);
  }
  j["columns"] = cols;
  j["objective_trace"] = state.objective_trace;
  j["iterations"] = state.iterations;
  j["converged"] = state.converged;
  j["mm_steps"] = state.mm_steps;
  j["inflated_updates"] = state.inflated_updates;
  j["separation_warning"] = state.separation_warning;
  io::save_json(dir / "fit.json", j);

  std::ofstream sel = io::open_output(dir / "selected.csv");
  sel << "column,beta,beta_std\n";
  for (std::size_t c : state.active) {
    sel << io::csv_field(std_design.column_name(c)) << ','
        << io::format_double(beta_raw[c]) << ','
        << io::format_double(state.beta[c]) << '\n';
  }
  if (!sel) throw IoError("write failed: selected.csv");

  std::ofstream w = io::open_output(dir / "weights.csv");
  w << "column,omega,sibling_group,Omega_sibling,cousin_group,Omega_cousin\n";
  const auto& names = std_design.me_names();
  for (std::size_t c = 0; c < std_design.width(); ++c) {
    const ColumnId& id = std_design.column_id(c);
    w << io::csv_field(std_design.column_name(c)) << ','
      << io::format_double(weights.indiv_weight[c]) << ','
      << io::csv_field(names[id.parent]) << ','
      << io::format_double(weights.group_weight_sib[id.parent]) << ','
      << io::csv_field(names[id.child]) << ','
      << io::format_double(weights.group_weight_cou[id.child]) << '\n';
  }
  if (!w) throw IoError("write failed: weights.csv");

  out << "selected " << state.active.size() << " of " << std_design.width()
      << " columns";
  if (!state.converged) out << " (not converged)";
  out << '\n';
  if (state.separation_warning)
    out << "warning: |eta| exceeded 30; the data may be separable\n";
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(const Config& cfg, std::ostream& out, std::ostream&) {
  const ScenarioSpec spec = scenario_of(cfg);
  const Scenario s = build_scenario(spec);
  const fs::path dir = out_dir(cfg);
  io::write_main_effects(dir / "X_train.csv", s.me_train);
  io::write_response(dir / "y_train.csv", s.y_train);
  io::write_main_effects(dir / "X_test.csv", s.me_test);
  io::write_response(dir / "y_test.csv", s.y_test);

  Json truth;
  Json sc;
  sc["n"] = spec.n;
  sc["n_test"] = spec.n_test == 0 ? spec.n : spec.n_test;
  sc["p"] = spec.p;
  sc["rho"] = spec.rho;
  sc["family"] = std::string(spec.family.name());
  sc["structure"] = std::string(structure_name(spec.structure));
  sc["n_groups"] = spec.n_groups;
  sc["effects_per_group"] = spec.effects_per_group;
  sc["beta_me"] = spec.beta_me;
  sc["beta_cme"] = spec.beta_cme;
  sc["beta0"] = spec.beta0;
  sc["noise_sd"] = spec.noise_sd;
  sc["seed"] = spec.seed;
  truth["scenario"] = sc;
  truth["intercept"] = spec.beta0;
  Json active = Json::array();
  Json coef = Json::object();
  for (std::size_t c : s.active) {
    active.push_back(s.train.column_name(c));
    coef[s.train.column_name(c)] = s.beta_true[c];
  }
  truth["active"] = active;
  truth["coefficients"] = coef;
  io::save_json(dir / "truth.json", truth);
  out << "wrote " << spec.n << " training and " << s.me_test.n()
      << " test rows with " << s.active.size() << " active effects to "
      << dir.string() << '\n';
  return kOk;
}

int cmd_fit(const Config& cfg, std::ostream& out, std::ostream& err) {
  const FitOptions opt = options_of(cfg);
  const WeightScheme scheme = scheme_of(cfg);
  const double gamma = cfg.number("gamma", 3.0);
  const double tau = cfg.number("tau", 0.01);
  const bool use_ratio = cfg.has("lambda_ratio");
  if (!use_ratio && !(cfg.has("lambda_s") && cfg.has("lambda_c")))
    throw UsageError("fit needs lambda_s and lambda_c, or lambda_ratio");
  Data d = load_data(cfg, err);
  const CmeDesign design = standardize(d.raw);

  AdaptiveWeights w = scheme == WeightScheme::kUnit
                          ? unit_weights(design.p(), design.width())
                          : pilot_weights(design, d.y, d.family, seed_of(cfg));
  if (cfg.boolean("stabilize", true)) {
    w = stabilize_weights(w, gamma, tau, d.family);
  } else if (!coordinate_condition(w.indiv_max(), gamma, tau, d.family)) {
    const double c = d.family.is_binomial() ? 0.125 : 0.5;
    std::ostringstream msg;
    msg << "coordinate convexity condition fails: tau + 1/(gamma*omega_max) = "
        << tau + 1.0 / (gamma * w.indiv_max()) << " exceeds " << c
        << "/omega_max^2 = " << c / (w.indiv_max() * w.indiv_max());
    throw StabilityError(msg.str());
  }
  PenaltyParams params;
  params.gamma = gamma;
  params.tau = tau;
  w.apply_to(params);
  if (use_ratio) {
    const double rho = cfg.number("rho", 0.5);
    const double ratio = cfg.number("lambda_ratio", 1.0);
    if (!(rho > 0.0 && rho < 1.0)) throw UsageError("'rho' must lie in (0,1)");
    if (!(ratio >= 0.0)) throw UsageError("'lambda_ratio' must be non-negative");
    const double lmax = lambda_max_weighted(design, d.y, d.family, rho, params);
    params.lambda_s = rho * ratio * lmax;
    params.lambda_c = (1.0 - rho) * ratio * lmax;
  } else {
    params.lambda_s = cfg.require_number("lambda_s");
    params.lambda_c = cfg.require_number("lambda_c");
  }
  const FitState state = fit(design, d.y, d.family, params, opt);
  write_fit_outputs(out_dir(cfg), design, d.family, params, w,
                    scheme == WeightScheme::kUnit ? "unit" : "adaptive", state,
                    cfg.echo(), out);
  return kOk;
}

int cmd_cv(const Config& cfg, std::ostream& out, std::ostream& err) {
  TuneConfig tc;
  tc.grid = grid_of(cfg);
  tc.weights = scheme_of(cfg);
  tc.fit = options_of(cfg);
  tc.threads = threads_of(cfg);
  Data d = load_data(cfg, err);
  const CvReport rep = cv_tune(d.raw, d.y, d.family, tc);
  const fs::path dir = out_dir(cfg);

  Json j;
  Json sel;
  sel["gamma"] = rep.gamma;
  sel["tau"] = rep.tau;
  sel["rho"] = rep.rho;
  sel["lambda_index"] = rep.lambda_index;
  sel["lambda_ratio"] = rep.lambda_ratio;
  sel["lambda_max"] = rep.lambda_max;
  sel["lambda_s"] = rep.lambda_s;
  sel["lambda_c"] = rep.lambda_c;
  sel["cv_loss"] = rep.best_loss;
  j["selected"] = sel;
  Json grid;
  grid["gamma_grid"] = rep.grid.gamma_grid;
  grid["tau_grid"] = rep.grid.tau_grid;
  grid["rho_grid"] = rep.grid.rho_grid;
  grid["nlambda"] = rep.grid.nlambda;
  grid["stage1_nlambda"] = rep.grid.stage1_nlambda;
  grid["lambda_min_ratio"] = rep.grid.lambda_min_ratio;
  grid["folds"] = rep.grid.folds;
  grid["seed"] = rep.grid.seed;
  j["grid"] = grid;
  j["weights"] = tc.weights == WeightScheme::kUnit ? "unit" : "adaptive";
  j["family"] = std::string(d.family.name());
  std::size_t infeasible = 0;
  for (const CellResult& c : rep.surface) infeasible += !c.feasible;
  j["surface_rows"] = rep.surface.size();
  j["infeasible_rows"] = infeasible;
  j["fold_of_row"] = rep.fold_of_row;
  io::save_json(dir / "cv_report.json", j);

  std::ofstream s = io::open_output(dir / "loss_surface.csv");
  s << "stage,gamma,tau,rho,lambda_index,lambda_ratio,mean_loss,se_loss,feasible\n";
  for (const CellResult& c : rep.surface) {
    s << c.stage << ',' << io::format_double(c.gamma) << ','
      << io::format_double(c.tau) << ',' << io::format_double(c.rho) << ','
      << c.lambda_index << ',' << io::format_double(c.lambda_ratio) << ','
      << io::format_double(c.mean_loss) << ',' << io::format_double(c.se_loss)
      << ',' << (c.feasible ? 1 : 0) << '\n';
  }
  if (!s) throw IoError("write failed: loss_surface.csv");

  out << "selected gamma=" << rep.gamma << " tau=" << rep.tau
      << " rho=" << rep.rho << " lambda=" << rep.lambda_s + rep.lambda_c
      << " (cv loss " << rep.best_loss << ")\n";
  write_fit_outputs(dir, standardize(d.raw), d.family, rep.params, rep.weights,
                    j["weights"].get<std::string>(), rep.fit, cfg.echo(), out);
  return kOk;
}

std::size_t column_or_throw(const CmeDesign& design, const std::string& name,
                            const std::string& source) {
  const auto c = design.find_column(name);
  if (!c) throw IoError(source + ": unknown column '" + name + "'");
  return *c;
}

int cmd_eval(const Config& cfg, std::ostream& out, std::ostream& err) {
  const std::string fit_path = cfg.require_string("fit");
  const Json fj = io::load_json(fit_path);
  Family family = Family::gaussian();
  std::vector<std::string> names;
  std::vector<double> beta;
  std::vector<std::string> nonzero;
  double b0 = 0.0;
  try {
    family = Family::parse(fj.at("family").get<std::string>());
    names = fj.at("me_names").get<std::vector<std::string>>();
    b0 = fj.at("intercept").get<double>();
    for (const Json& c : fj.at("columns")) beta.push_back(c.at("beta").get<double>());
    nonzero = fj.at("nonzero").get<std::vector<std::string>>();
  } catch (const std::exception& e) {
    throw IoError(fit_path + ": not a fit file (" + e.what() + ")");
  }
  const MainEffectMatrix me = io::read_main_effects(cfg.require_string("x"), &err);
  if (me.names() != names)
    throw IoError("test main effects do not match the fitted ones");
  const std::vector<double> y = io::read_response(cfg.require_string("y"));
  if (y.size() != me.n()) throw IoError("test response length does not match X");
  family.validate_response(y);
  const CmeDesign design = build_cme_matrix(me);
  if (beta.size() != design.width())
    throw IoError(fit_path + ": coefficient count does not match the design");

  std::vector<double> eta(me.n(), b0);
  for (std::size_t c = 0; c < design.width(); ++c) {
    if (beta[c] == 0.0) continue;
    auto x = design.raw_column(c);
    for (std::size_t i = 0; i < me.n(); ++i) eta[i] += beta[c] * x[i];
  }
  std::vector<double> pred(eta);
  if (family.is_binomial())
    for (double& v : pred) v = v > 0.0 ? 1.0 : 0.0;

  std::vector<std::size_t> selected;
  for (const std::string& n : nonzero) selected.push_back(column_or_throw(design, n, fit_path));
  std::vector<std::size_t> truth;
  const bool have_truth = cfg.has("truth");
  if (have_truth) {
    const std::string tpath = cfg.string("truth", "");
    const Json tj = io::load_json(tpath);
    if (!tj.contains("active") || !tj["active"].is_array())
      throw IoError(tpath + ": missing 'active' list");
    for (const Json& n : tj["active"])
      truth.push_back(column_or_throw(design, n.get<std::string>(), tpath));
  }
  const MetricReport m = evaluate(selected, truth, design.width(), pred, y, family);

  Json j;
  j["n_test"] = y.size();
  j["n_selected"] = m.n_selected;
  j[family.is_binomial() ? "mcr" : "mspe"] = m.prediction_error;
  if (have_truth) {
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["tn"] = m.tn;
    j["fn"] = m.fn;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
  }
  io::save_json(out_dir(cfg) / "metrics.json", j);
  out << (family.is_binomial() ? "mcr " : "mspe ") << m.prediction_error
      << ", " << m.n_selected << " selected";
  if (have_truth) out << ", f1 " << m.f1;
  out << '\n';
  return kOk;
}

int cmd_threshold_curve(const Config& cfg, std::ostream& out, std::ostream&) {
  const std::string mode = cfg.string("weights", "unit");
  if (mode != "unit" && mode != "fixed" && mode != "pilot")
    throw UsageError("'weights' must be unit, fixed or pilot");
  const double lambda_s = cfg.number("lambda_s", 1.0);
  const double lambda_c = cfg.number("lambda_c", 0.5);
  const double gamma = cfg.number("gamma", 3.0);
  const double tau = cfg.number("tau", 0.25);
  const double beta_add = cfg.number("beta_add", mode == "pilot" ? 0.5 : 2.0);
  const double beta_max = cfg.number("beta_max", 5.0);
  const std::size_t points = cfg.count("points", 101);
  const std::size_t n = cfg.count("n", 100);
  if (points < 2) throw UsageError("'points' must be at least 2");
  if (!(beta_max > 0.0)) throw UsageError("'beta_max' must be positive");
  if (n == 0) throw UsageError("'n' must be positive");

  // Four main effects A..D cover every target and context below.
  std::vector<double> v(2 * 4);
  for (std::size_t j = 0; j < 4; ++j) {
    v[2 * j] = 1.0;
    v[2 * j + 1] = -1.0;
  }
  const CmeDesign design = build_cme_matrix(MainEffectMatrix(2, 4, v));
  auto col = [&](const char* name) { return *design.find_column(name); };

  PenaltyParams base = PenaltyParams::unit(4, design.width(), lambda_s, lambda_c,
                                           gamma, tau);
  if (mode == "fixed") {
    std::fill(base.group_weight_sib.begin(), base.group_weight_sib.end(),
              cfg.number("omega_sib", 1.0));
    std::fill(base.group_weight_cou.begin(), base.group_weight_cou.end(),
              cfg.number("omega_cou", 1.0));
    std::fill(base.indiv_weight.begin(), base.indiv_weight.end(),
              cfg.number("omega", 1.0));
  }
  base.validate(4, design.width());

  struct Target {
    const char* name;
    const char* sibling;  // shares the target's sibling group
    const char* cousin;   // shares the target's cousin group
  };
  const Target targets[] = {{"A|C+", "A|D+", "D|C+"}, {"A", "A|D+", "D|A+"}};
  const std::pair<const char*, const char*> panels[] = {{"a", "A|B+"}, {"b", "B|A+"}};
  const char* contexts[] = {"none", "sibling", "cousin", "both"};

  const fs::path path = out_dir(cfg) / "threshold_curve.csv";
  std::ofstream f = io::open_output(path);
  f << "panel,context,target,varied,beta_varied,threshold\n";
  std::vector<double> beta(design.width());
  for (const auto& [panel, varied] : panels) {
    for (int ctx = 0; ctx < 4; ++ctx) {
      for (const Target& t : targets) {
        for (std::size_t l = 0; l < points; ++l) {
          const double b = beta_max * static_cast<double>(l) / static_cast<double>(points - 1);
          std::fill(beta.begin(), beta.end(), 0.0);
          beta[col(varied)] = b;
          if (ctx == 1 || ctx == 3) beta[col(t.sibling)] = beta_add;
          if (ctx == 2 || ctx == 3) beta[col(t.cousin)] = beta_add;
          PenaltyParams params = base;
          if (mode == "pilot") {
            RidgePilot pilot;
            pilot.beta = beta;
            compute_weights(pilot, design, n).apply_to(params);
          }
          const double th = selection_threshold(design, beta, params, col(t.name));
          f << panel << ',' << contexts[ctx] << ',' << io::csv_field(t.name)
            << ',' << io::csv_field(varied) << ',' << io::format_double(b) << ','
            << io::format_double(th) << '\n';
        }
      }
    }
  }
  if (!f) throw IoError("write failed: " + path.string());
  out << "wrote " << 2 * 4 * 2 * points << " rows to " << path.string() << '\n';
  return kOk;
}

int cmd_bench(const Config& cfg, std::ostream& out, std::ostream&) {
  const ScenarioSpec spec = scenario_of(cfg);
  TuneConfig base;
  base.grid = grid_of(cfg);
  base.fit = options_of(cfg);
  std::vector<MethodConfig> methods;
  for (const std::string& m : cfg.strings("methods", {"adaptive", "unit"})) {
    try {
      methods.push_back(MethodConfig::make(parse_method(m), base));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (methods.empty()) throw UsageError("'methods' must not be empty");
  const long long reps = cfg.integer("n_reps", 20);
  if (reps < 1) throw UsageError("'n_reps' must be at least 1");
  const std::string label =
      cfg.string("label", std::string(structure_name(spec.structure)));
  const BenchResult br = run_replicates(spec, methods, static_cast<int>(reps),
                                        threads_of(cfg), label);
  const fs::path dir = out_dir(cfg);
  {
    std::ofstream agg = io::open_output(dir / "bench.csv");
    write_aggregate_csv(agg, br.rows);
    if (!agg) throw IoError("write failed: bench.csv");
  }
  std::ofstream rep = io::open_output(dir / "replicates.csv");
  rep << "scenario,method,rep,ok,tp,fp,tn,fn,precision,recall,f1,n_selected,"
      << (spec.family.is_binomial() ? "mcr" : "mspe") << ",error\n";
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (const ReplicateResult& r : br.per_method[m]) {
      const MetricReport& x = r.metrics;
      rep << io::csv_field(label) << ',' << method_name(methods[m].method) << ','
          << r.rep << ',' << (r.ok ? 1 : 0) << ',' << x.tp << ',' << x.fp << ','
          << x.tn << ',' << x.fn << ',' << io::format_double(x.precision) << ','
          << io::format_double(x.recall) << ',' << io::format_double(x.f1) << ','
          << x.n_selected << ',' << io::format_double(x.prediction_error) << ','
          << io::csv_field(r.error) << '\n';
    }
  }
  if (!rep) throw IoError("write failed: replicates.csv");

  Json summary;
  summary["scenario"] = label;
  summary["n_reps"] = reps;
  Json tests = Json::array();
  for (std::size_t m = 1; m < methods.size(); ++m) {
    std::vector<double> a, b;
    for (long long r = 0; r < reps; ++r) {
      const ReplicateResult& x = br.per_method[0][static_cast<std::size_t>(r)];
      const ReplicateResult& y = br.per_method[m][static_cast<std::size_t>(r)];
      if (!x.ok || !y.ok) continue;
      a.push_back(x.metrics.f1);
      b.push_back(y.metrics.f1);
    }
    Json t;
    t["metric"] = "f1";
    t["first"] = std::string(method_name(methods[0].method));
    t["second"] = std::string(method_name(methods[m].method));
    t["pairs"] = a.size();
    t["p_value"] = sign_test_p(a, b);
    tests.push_back(t);
  }
  summary["sign_tests"] = tests;
  io::save_json(dir / "bench_summary.json", summary);

  for (const AggregateRow& r : br.rows) {
    if (r.metric != "f1") continue;
    out << r.method << ": mean f1 " << r.mean << " (se " << r.se << ", "
        << r.n_ok << " ok, " << r.n_failed << " failed)\n";
  }
  return kOk;
}

const char* type_label(Kind kind) {
  switch (kind) {
    case Kind::kInt: return "INT";
    case Kind::kNumber: return "FLOAT";
    case Kind::kString: return "TEXT";
    case Kind::kBool: return "BOOL";
    case Kind::kNumbers: return "FLOAT,...";
    case Kind::kStrings: return "TEXT,...";
  }
  return "TEXT";
}

struct Command {
  const char* name;
  const char* help;
  std::vector<Key> (*keys)();
  int (*run)(const Config&, std::ostream&, std::ostream&);
};

const Command kCommands[] = {
    {"simulate", "generate a synthetic scenario", simulate_keys, cmd_simulate},
    {"fit", "fit at fixed penalty parameters", fit_keys, cmd_fit},
    {"cv", "tune by cross-validation and refit", cv_keys, cmd_cv},
    {"eval", "score a fit on test data", eval_keys, cmd_eval},
    {"threshold-curve", "selection thresholds along a coefficient sweep",
     curve_keys, cmd_threshold_curve},
    {"bench", "replicated method comparison", bench_keys, cmd_bench},
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Bi-level selection of conditional main effects"};
  app.name("acmenet");
  app.require_subcommand(1);

  struct Slot {
    const Command* command;
    CLI::App* app;
    std::string config_path;
    std::vector<Key> keys;
    std::vector<std::string> values;
    std::vector<CLI::Option*> options;
  };
  std::vector<std::unique_ptr<Slot>> slots;
  for (const Command& c : kCommands) {
    auto slot = std::make_unique<Slot>();
    slot->command = &c;
    slot->keys = c.keys();
    slot->values.resize(slot->keys.size());
    slot->app = app.add_subcommand(c.name, c.help);
    slot->app->add_option("--config", slot->config_path, "flat JSON config file");
    for (std::size_t k = 0; k < slot->keys.size(); ++k) {
      slot->options.push_back(
          slot->app
              ->add_option("--" + slot->keys[k].name, slot->values[k], slot->keys[k].help)
              ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)
              ->type_name(type_label(slot->keys[k].kind)));
    }
    slots.push_back(std::move(slot));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    for (const auto& slot : slots) {
      if (!slot->app->parsed()) continue;
      Config cfg(slot->command->name, slot->keys);
      if (!slot->config_path.empty()) cfg.load_file(slot->config_path);
      for (std::size_t k = 0; k < slot->keys.size(); ++k)
        if (slot->options[k]->count() > 0) cfg.set_flag(slot->keys[k].name, slot->values[k]);
      return slot->command->run(cfg, out, err);
    }
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const DesignError& e) {
    err << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const DimensionError& e) {
    err << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const IndexError& e) {
    err << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const StabilityError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ConvergenceError& e) {
    err << "no convergence: " << e.what() << '\n';
    return kInfeasible;
  } catch (const DegenerateError& e) {
    err << "degenerate input: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace acme::cli
