#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "endowrisk/bond_model.hpp"
#include "endowrisk/hazard_model.hpp"
#include "endowrisk/mc_oracle.hpp"
#include "endowrisk/pde_engine.hpp"
#include "endowrisk/pricer.hpp"

namespace endowrisk {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kConfigSchema = "endowrisk.run/1";

struct GridSpec {
  std::size_t n_y = 401;
  std::size_t n_tau = 2000;
  double margin = 4.0;
  std::optional<double> y_min;  // both or neither
  std::optional<double> y_max;
};

struct EvaluationPoint {
  double lambda = 0.06;
  double t = 0.0;
  double r = 0.03;
};

struct VerifyOptions {
  std::size_t n_max = 10;          // envelope, monotonicity and subadditivity levels
  std::size_t ladder_n_max = 100;  // streamed phi / gamma ladder
  std::vector<std::size_t> rate_levels{2, 5, 10, 25, 50, 100};
  std::size_t alpha_steps = 4;     // alpha grid k / alpha_steps * sqrt(floor)
  double drift_raise = 0.1;
  double vol_scale = 1.5;
  double convexity_slack = 1e-8;
  std::size_t fuzz_samples = 100000;
  bool monte_carlo = true;
  bool refinement = true;
  std::map<std::string, double> tolerances;  // overrides of default_tolerances()
};

struct RunConfig {
  std::string schema = kConfigSchema;
  std::string scenario = "default";
  HazardModel hazard = HazardModel::shifted_log_ou(0.04, -3.912023005428146, 0.5, 0.2);
  ShortRateModel bond = ShortRateModel::constant(0.03);
  double alpha = 0.1;
  double horizon = 10.0;
  GridSpec grid;
  SolverConfig solver;
  McConfig mc;
  EvaluationPoint evaluation;
  VerifyOptions verify;
  std::string output_dir = "endowrisk_out";

  /// Default grid widened to cover evaluation.lambda, or the explicit y range.
  [[nodiscard]] Grid make_grid() const;
  [[nodiscard]] PricingProblem problem() const;
};

/// Per-check tolerance table used by verify.
const std::map<std::string, double>& default_tolerances();

/// Names accepted by builtin_scenario.
std::vector<std::string> builtin_scenarios();

/// default:       floor 0.04, shifted log-OU (theta = ln 0.02, kappa_y = 0.5, b0 = 0.2), alpha 0.1
/// deterministic: the same with a constant hazard (b = 0)
/// exponential:   floor 0, lambda0 = 0.01, c = 0.08, alpha 0
/// vasicek:       default hazard priced against a Vasicek bond
RunConfig builtin_scenario(const std::string& name);

/// Parses a JSON document. Unknown keys, a wrong schema tag or invalid model
/// parameters raise ConfigError naming the offending key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace endowrisk
