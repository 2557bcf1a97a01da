#include "endowrisk/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace endowrisk {

using nlohmann::json;

Grid RunConfig::make_grid() const {
  const double floor = hazard.lambda_floor();
  if (grid.y_min.has_value() != grid.y_max.has_value()) {
    throw ConfigError("grid: y_min and y_max must be given together");
  }
  try {
    if (grid.y_min) return Grid(floor, *grid.y_min, *grid.y_max, grid.n_y, horizon, grid.n_tau);
    const double eval[] = {evaluation.lambda};
    return Grid::make_default(floor, horizon, eval, grid.n_y, grid.n_tau, grid.margin);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PricingProblem RunConfig::problem() const {
  return PricingProblem{hazard, bond, alpha, make_grid(), solver};
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> table{
      {"thm_3_5_envelope", 1e-6},
      {"cor_3_6_price_bounds", 1e-6},
      {"thm_3_7_phi_lambda_nonpositive", 1e-6},
      {"thm_3_8_alpha_monotone", 1e-6},
      {"cor_3_9_price_ordering", 1e-6},
      {"thm_3_10_drift_monotone", 1e-6},
      {"thm_3_11_vol_monotone", 1e-6},
      {"thm_4_2_envelope", 1e-6},
      {"lem_4_3_n_monotone", 1e-6},
      {"thm_4_4_lambda_nonpositive", 1e-6},
      {"thm_4_6_alpha_monotone", 1e-6},
      {"cor_4_7_alpha0_ladder", 1e-6},
      {"thm_4_8_drift_monotone", 1e-6},
      {"thm_4_9_vol_monotone", 1e-6},
      {"thm_4_11_subadditivity", 1e-6},
      {"thm_4_13_per_risk_decreasing", 1e-6},
      {"lem_4_14_beta_nonincreasing", 1e-6},
      {"thm_4_15_beta_lower_bound", 1e-6},
      {"lem_4_16_gamma_monotone", 1e-8},
      {"lem_4_17_gamma_dominates", 1e-6},
      {"thm_4_18_rate_bound", 1e-4},
      {"lem_4_19_aux_f_bound", 1e-6},
      {"lem_4_20_aux_h_bound", 1e-6},
      {"cor_4_21_zero_mortality_charge", 1e-6},
      {"cor_4_21_diversification", 2e-3},
      {"cor_4_22_positive_mortality_charge", 0.0},
      {"eq_4_55_identity", 1e-10},
      {"eq_4_55_charges_nonnegative", 1e-6},
      {"eq_2_16_sharpe_identity", 5e-3},
      {"eq_2_16_sharpe_refinement", 0.0},
      {"lem_4_5_fuzz", 1e-12},
      {"lem_4_10_fuzz", 1e-12},
      {"lem_4_12_fuzz", 1e-12},
      {"mc_phi_physical", 2e-3},
      {"mc_beta", 2e-3},
      {"mc_beta_dominance", 0.0},
      {"validate_model", 0.0},
  };
  return table;
}

std::vector<std::string> builtin_scenarios() {
  return {"default", "deterministic", "exponential", "vasicek"};
}

RunConfig builtin_scenario(const std::string& name) {
  RunConfig c;
  c.scenario = name;
  if (name == "default") return c;
  if (name == "deterministic") {
    c.hazard = HazardModel::constant(0.04);
    return c;
  }
  if (name == "exponential") {
    c.hazard = HazardModel::deterministic_exponential(0.0, 0.01, 0.08);
    c.alpha = 0.0;
    c.evaluation.lambda = 0.01;
    return c;
  }
  if (name == "vasicek") {
    c.bond = ShortRateModel::vasicek(0.3, 0.05, 0.01);
    return c;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

double require_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return get_or<double>(obj, key, 0.0, where);
}

HazardModel parse_hazard(const json& h) {
  const std::string where = "hazard";
  if (!h.is_object() || !h.contains("kind")) throw ConfigError("hazard: missing 'kind'");
  const auto kind = get_or<std::string>(h, "kind", "", where);
  const double floor = require_number(h, "lambda_floor", where);
  try {
    if (kind == "constant") {
      check_keys(h, {"kind", "lambda_floor"}, where);
      return HazardModel::constant(floor);
    }
    if (kind == "deterministic_exponential") {
      check_keys(h, {"kind", "lambda_floor", "initial_hazard", "growth_rate"}, where);
      return HazardModel::deterministic_exponential(floor, require_number(h, "initial_hazard", where),
                                                    require_number(h, "growth_rate", where));
    }
    if (kind == "shifted_log_ou") {
      check_keys(h,
                 {"kind", "lambda_floor", "mean_level", "mean_offset", "reversion_speed", "vol",
                  "vol_lower_bound"},
                 where);
      // mean_offset is the same level written as lambda - floor
      if (h.contains("mean_level") == h.contains("mean_offset")) {
        throw ConfigError("hazard: give exactly one of mean_level, mean_offset");
      }
      const double theta = h.contains("mean_level")
                               ? require_number(h, "mean_level", where)
                               : std::log(require_number(h, "mean_offset", where));
      return HazardModel::shifted_log_ou(floor, theta, require_number(h, "reversion_speed", where),
                                         require_number(h, "vol", where),
                                         get_or<double>(h, "vol_lower_bound", 1e-2, where));
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("hazard: ") + e.what());
  }
  throw ConfigError("hazard: unknown kind '" + kind + "'");
}

ShortRateModel parse_bond(const json& b) {
  const std::string where = "bond";
  if (!b.is_object() || !b.contains("kind")) throw ConfigError("bond: missing 'kind'");
  const auto kind = get_or<std::string>(b, "kind", "", where);
  try {
    if (kind == "constant") {
      check_keys(b, {"kind", "rate"}, where);
      return ShortRateModel::constant(require_number(b, "rate", where));
    }
    if (kind == "vasicek") {
      check_keys(b, {"kind", "reversion_speed", "long_run_mean", "vol"}, where);
      return ShortRateModel::vasicek(require_number(b, "reversion_speed", where),
                                     require_number(b, "long_run_mean", where),
                                     require_number(b, "vol", where));
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("bond: ") + e.what());
  }
  throw ConfigError("bond: unknown kind '" + kind + "'");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc,
             {"schema", "scenario", "hazard", "bond", "alpha", "horizon", "grid", "solver", "mc",
              "evaluation", "verify", "output_dir"},
             "config");
  if (!doc.contains("schema")) throw ConfigError("config: missing 'schema'");
  const auto schema = get_or<std::string>(doc, "schema", "", "config");
  if (schema != kConfigSchema) {
    throw ConfigError("config: unsupported schema '" + schema + "', expected " + kConfigSchema);
  }

  // A built-in name starts from that scenario; any other name starts from the defaults.
  const auto name = get_or<std::string>(doc, "scenario", "default", "config");
  const auto known = builtin_scenarios();
  RunConfig c = std::find(known.begin(), known.end(), name) != known.end() ? builtin_scenario(name) : RunConfig{};
  c.scenario = name;
  if (doc.contains("hazard")) c.hazard = parse_hazard(doc["hazard"]);
  if (doc.contains("bond")) c.bond = parse_bond(doc["bond"]);
  c.alpha = get_or<double>(doc, "alpha", c.alpha, "config");
  c.horizon = get_or<double>(doc, "horizon", c.horizon, "config");
  if (!(c.horizon > 0.0)) throw ConfigError("config: horizon must be positive");
  c.output_dir = get_or<std::string>(doc, "output_dir", c.output_dir, "config");

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    check_keys(g, {"n_y", "n_tau", "margin", "y_min", "y_max"}, "grid");
    c.grid.n_y = get_or<std::size_t>(g, "n_y", c.grid.n_y, "grid");
    c.grid.n_tau = get_or<std::size_t>(g, "n_tau", c.grid.n_tau, "grid");
    c.grid.margin = get_or<double>(g, "margin", c.grid.margin, "grid");
    if (g.contains("y_min")) c.grid.y_min = get_or<double>(g, "y_min", 0.0, "grid");
    if (g.contains("y_max")) c.grid.y_max = get_or<double>(g, "y_max", 0.0, "grid");
  }
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    check_keys(s, {"picard_tol", "picard_max_iters", "picard_warn_iters"}, "solver");
    c.solver.picard_tol = get_or<double>(s, "picard_tol", c.solver.picard_tol, "solver");
    c.solver.picard_max_iters =
        get_or<std::size_t>(s, "picard_max_iters", c.solver.picard_max_iters, "solver");
    c.solver.picard_warn_iters =
        get_or<std::size_t>(s, "picard_warn_iters", c.solver.picard_warn_iters, "solver");
    try {
      c.solver.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (doc.contains("mc")) {
    const json& m = doc["mc"];
    check_keys(m, {"n_paths", "steps_per_year", "seed", "antithetic"}, "mc");
    c.mc.n_paths = get_or<std::size_t>(m, "n_paths", c.mc.n_paths, "mc");
    c.mc.steps_per_year = get_or<std::size_t>(m, "steps_per_year", c.mc.steps_per_year, "mc");
    c.mc.seed = get_or<std::uint64_t>(m, "seed", c.mc.seed, "mc");
    c.mc.antithetic = get_or<bool>(m, "antithetic", c.mc.antithetic, "mc");
    try {
      c.mc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (doc.contains("evaluation")) {
    const json& e = doc["evaluation"];
    check_keys(e, {"lambda", "t", "r"}, "evaluation");
    c.evaluation.lambda = get_or<double>(e, "lambda", c.evaluation.lambda, "evaluation");
    c.evaluation.t = get_or<double>(e, "t", c.evaluation.t, "evaluation");
    c.evaluation.r = get_or<double>(e, "r", c.evaluation.r, "evaluation");
  }
  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    const std::string w = "verify";
    check_keys(v,
               {"n_max", "ladder_n_max", "rate_levels", "alpha_steps", "drift_raise", "vol_scale",
                "convexity_slack", "fuzz_samples", "monte_carlo", "refinement", "tolerances"},
               w);
    auto& o = c.verify;
    o.n_max = get_or<std::size_t>(v, "n_max", o.n_max, w);
    o.ladder_n_max = get_or<std::size_t>(v, "ladder_n_max", o.ladder_n_max, w);
    o.rate_levels = get_or<std::vector<std::size_t>>(v, "rate_levels", o.rate_levels, w);
    o.alpha_steps = get_or<std::size_t>(v, "alpha_steps", o.alpha_steps, w);
    o.drift_raise = get_or<double>(v, "drift_raise", o.drift_raise, w);
    o.vol_scale = get_or<double>(v, "vol_scale", o.vol_scale, w);
    o.convexity_slack = get_or<double>(v, "convexity_slack", o.convexity_slack, w);
    o.fuzz_samples = get_or<std::size_t>(v, "fuzz_samples", o.fuzz_samples, w);
    o.monte_carlo = get_or<bool>(v, "monte_carlo", o.monte_carlo, w);
    o.refinement = get_or<bool>(v, "refinement", o.refinement, w);
    if (v.contains("tolerances")) {
      const json& t = v["tolerances"];
      if (!t.is_object()) throw ConfigError("verify.tolerances: expected an object");
      for (const auto& [id, value] : t.items()) {
        if (!default_tolerances().count(id)) {
          throw ConfigError("verify.tolerances: unknown check '" + id + "'");
        }
        if (!value.is_number()) throw ConfigError("verify.tolerances." + id + ": wrong type");
        o.tolerances[id] = value.get<double>();
      }
    }
    if (o.n_max < 1 || o.ladder_n_max < 1 || o.alpha_steps < 1) {
      throw ConfigError("verify: n_max, ladder_n_max and alpha_steps must be >= 1");
    }
    for (std::size_t n : o.rate_levels) {
      if (n < 2 || n > o.ladder_n_max) {
        throw ConfigError("verify.rate_levels: levels must lie in [2, ladder_n_max]");
      }
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace endowrisk
