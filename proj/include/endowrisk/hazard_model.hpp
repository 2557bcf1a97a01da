#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace endowrisk {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// lambda is constant in time; drift and volatility are zero.
struct ConstantHazardParams {};

/// lambda(t) = floor + (lambda0 - floor) * exp(c t), i.e. a = c (lambda - floor), b = 0.
struct DeterministicExponentialParams {
  double initial_hazard = 0.0;
  double growth_rate = 0.0;
};

/// y = ln(lambda - floor) is Ornstein-Uhlenbeck:
///   dy = kappa_y (theta - y) dt + b0 dW,
/// which in lambda gives a = (lambda - floor) [kappa_y (theta - y) + b0^2 / 2], b = b0.
struct ShiftedLogOUParams {
  double mean_level = 0.0;      // theta, in y units
  double reversion_speed = 0.0; // kappa_y, 1/year
  double vol = 0.0;             // b0, 1/sqrt(year)
};

enum class HazardKind { ConstantHazard, DeterministicExponential, ShiftedLogOU };

/// Floored hazard diffusion d lambda = a(lambda, t) dt + b(t) (lambda - floor) dW.
/// Parameters are stationary, so t is accepted but unused by every kind.
class HazardModel {
 public:
  using Params =
      std::variant<ConstantHazardParams, DeterministicExponentialParams, ShiftedLogOUParams>;

  /// Throws DomainError when the parameters violate the model invariants. The floor
  /// must be positive for ShiftedLogOU and may be zero for the deterministic kinds.
  HazardModel(double lambda_floor, Params params, double vol_lower_bound = 1e-2);

  static HazardModel constant(double lambda_floor);
  static HazardModel deterministic_exponential(double lambda_floor, double initial_hazard,
                                               double growth_rate);
  static HazardModel shifted_log_ou(double lambda_floor, double mean_level,
                                    double reversion_speed, double vol,
                                    double vol_lower_bound = 1e-2);

  [[nodiscard]] HazardKind kind() const noexcept;
  [[nodiscard]] double lambda_floor() const noexcept { return lambda_floor_; }
  [[nodiscard]] const Params& params() const noexcept { return params_; }
  [[nodiscard]] double vol_lower_bound() const noexcept { return vol_lower_bound_; }

  /// b(t); zero for the deterministic kinds.
  [[nodiscard]] double vol_level(double t = 0.0) const noexcept;
  [[nodiscard]] bool is_deterministic() const noexcept { return vol_level() == 0.0; }

  [[nodiscard]] double drift(double lambda, double t) const;
  [[nodiscard]] double vol(double lambda, double t) const;
  [[nodiscard]] double drift_deriv(double lambda, double t) const;

  /// Drift of y = ln(lambda - floor) excluding the Ito term: a(lambda) e^{-y}.
  /// Defined for every y, so PDE and Monte Carlo code never leave the log domain.
  [[nodiscard]] double drift_over_offset(double y, double t) const noexcept;

  /// Same model with a pointwise larger drift, or nullopt when the kind has no
  /// free drift parameter (ConstantHazard).
  [[nodiscard]] std::optional<HazardModel> with_raised_drift(double amount) const;
  /// Same drift a, b scaled by factor. The mean level moves by -(b'^2 - b^2) / (2 kappa_y)
  /// to absorb the Ito term. nullopt for the deterministic kinds and for kappa_y = 0.
  [[nodiscard]] std::optional<HazardModel> with_scaled_vol(double factor) const;

  /// Hazard path for the deterministic kinds, lambda(s) given lambda(t0) = lambda0.
  [[nodiscard]] double deterministic_path(double lambda0, double elapsed) const;

 private:
  double lambda_floor_;
  Params params_;
  double vol_lower_bound_;
};

std::string to_string(HazardKind kind);

struct ValidationSettings {
  double near_floor_window = 1e-3;  // epsilon
  double blowup_factor = 2.0;       // per-ln-unit growth past the edges that signals no finite K
};

struct ValidationReport {
  bool ok = true;
  std::string reason;  // empty when ok
  std::optional<double> failing_lambda;
  double growth_constant = 0.0;        // smallest K making |a| <= K e^y (1 + |y|) hold on the grid
  double deriv_growth_constant = 0.0;  // smallest K making |a_lambda| <= K (1 + y^2) hold on the grid
};

class Grid;

/// Checks 0 <= alpha <= sqrt(floor), positive drift near the floor (stochastic kinds),
/// and the two drift growth bounds at every grid node.
ValidationReport validate(const HazardModel& model, double alpha, const Grid& grid,
                          const ValidationSettings& settings = {});

using DriftFunction = std::function<double(double lambda, double t)>;

/// Growth-bound part of validate() for an arbitrary drift; used to reject drifts
/// outside the modelled family (e.g. a mean-reverting c (m - lambda)).
ValidationReport validate_drift_growth(const DriftFunction& drift, const DriftFunction& drift_deriv,
                                       double lambda_floor, bool stochastic, const Grid& grid,
                                       const ValidationSettings& settings = {});

}  // namespace endowrisk
