#include "endowrisk/hazard_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "endowrisk/pde_engine.hpp"

namespace endowrisk {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_above_floor(double lambda, double floor, const char* op) {
  if (!(lambda > floor)) {
    std::ostringstream msg;
    msg << op << ": lambda " << lambda << " must exceed the floor " << floor;
    throw DomainError(msg.str());
  }
}

}  // namespace

HazardModel::HazardModel(double lambda_floor, Params params, double vol_lower_bound)
    : lambda_floor_(lambda_floor), params_(params), vol_lower_bound_(vol_lower_bound) {
  // A zero floor is only meaningful when lambda is deterministic.
  const bool stochastic = std::holds_alternative<ShiftedLogOUParams>(params_);
  if (!std::isfinite(lambda_floor_) || lambda_floor_ < 0.0 || (stochastic && lambda_floor_ == 0.0)) {
    throw DomainError("hazard model: lambda_floor must be positive and finite");
  }
  std::visit(Overloaded{
                 [](const ConstantHazardParams&) {},
                 [&](const DeterministicExponentialParams& p) {
                   if (!(p.initial_hazard > lambda_floor_)) {
                     throw DomainError(
                         "deterministic_exponential: initial_hazard must exceed lambda_floor");
                   }
                   if (!std::isfinite(p.growth_rate)) {
                     throw DomainError("deterministic_exponential: growth_rate must be finite");
                   }
                 },
                 [&](const ShiftedLogOUParams& p) {
                   if (!(vol_lower_bound_ > 0.0)) {
                     throw DomainError("shifted_log_ou: vol lower bound kappa must be positive");
                   }
                   if (!(p.reversion_speed >= 0.0)) {
                     throw DomainError("shifted_log_ou: reversion_speed must be >= 0");
                   }
                   if (!(p.vol >= vol_lower_bound_)) {
                     throw DomainError("shifted_log_ou: vol b0 must be >= kappa > 0");
                   }
                   if (!std::isfinite(p.mean_level)) {
                     throw DomainError("shifted_log_ou: mean_level must be finite");
                   }
                 },
             },
             params_);
}

HazardModel HazardModel::constant(double lambda_floor) {
  return HazardModel(lambda_floor, ConstantHazardParams{});
}

HazardModel HazardModel::deterministic_exponential(double lambda_floor, double initial_hazard,
                                                   double growth_rate) {
  return HazardModel(lambda_floor, DeterministicExponentialParams{initial_hazard, growth_rate});
}

HazardModel HazardModel::shifted_log_ou(double lambda_floor, double mean_level,
                                        double reversion_speed, double vol,
                                        double vol_lower_bound) {
  return HazardModel(lambda_floor, ShiftedLogOUParams{mean_level, reversion_speed, vol},
                     vol_lower_bound);
}

HazardKind HazardModel::kind() const noexcept {
  switch (params_.index()) {
    case 0:
      return HazardKind::ConstantHazard;
    case 1:
      return HazardKind::DeterministicExponential;
    default:
      return HazardKind::ShiftedLogOU;
  }
}

double HazardModel::vol_level(double /*t*/) const noexcept {
  if (const auto* p = std::get_if<ShiftedLogOUParams>(&params_)) return p->vol;
  return 0.0;
}

double HazardModel::drift_over_offset(double y, double /*t*/) const noexcept {
  return std::visit(Overloaded{
                        [](const ConstantHazardParams&) { return 0.0; },
                        [](const DeterministicExponentialParams& p) { return p.growth_rate; },
                        [y](const ShiftedLogOUParams& p) {
                          return p.reversion_speed * (p.mean_level - y) + 0.5 * p.vol * p.vol;
                        },
                    },
                    params_);
}

double HazardModel::drift(double lambda, double t) const {
  require_above_floor(lambda, lambda_floor_, "drift");
  const double offset = lambda - lambda_floor_;
  return offset * drift_over_offset(std::log(offset), t);
}

double HazardModel::vol(double lambda, double t) const {
  return vol_level(t) * std::max(lambda - lambda_floor_, 0.0);
}

double HazardModel::drift_deriv(double lambda, double /*t*/) const {
  require_above_floor(lambda, lambda_floor_, "drift_deriv");
  const double y = std::log(lambda - lambda_floor_);
  return std::visit(Overloaded{
                        [](const ConstantHazardParams&) { return 0.0; },
                        [](const DeterministicExponentialParams& p) { return p.growth_rate; },
                        [y](const ShiftedLogOUParams& p) {
                          // d/dlambda [e^y g(y)] = g(y) + g'(y)
                          return p.reversion_speed * (p.mean_level - y) + 0.5 * p.vol * p.vol -
                                 p.reversion_speed;
                        },
                    },
                    params_);
}

std::optional<HazardModel> HazardModel::with_raised_drift(double amount) const {
  if (const auto* p = std::get_if<ShiftedLogOUParams>(&params_)) {
    // theta -> theta + amount raises a by kappa_y * amount * (lambda - floor) >= 0.
    ShiftedLogOUParams q = *p;
    q.mean_level += amount;
    return HazardModel(lambda_floor_, q, vol_lower_bound_);
  }
  if (const auto* p = std::get_if<DeterministicExponentialParams>(&params_)) {
    DeterministicExponentialParams q = *p;
    q.growth_rate += amount;
    return HazardModel(lambda_floor_, q, vol_lower_bound_);
  }
  return std::nullopt;
}

std::optional<HazardModel> HazardModel::with_scaled_vol(double factor) const {
  if (const auto* p = std::get_if<ShiftedLogOUParams>(&params_)) {
    if (!(p->reversion_speed > 0.0)) return std::nullopt;
    ShiftedLogOUParams q = *p;
    q.vol *= factor;
    q.mean_level -= (q.vol * q.vol - p->vol * p->vol) / (2.0 * p->reversion_speed);
    return HazardModel(lambda_floor_, q, vol_lower_bound_);
  }
  return std::nullopt;
}

double HazardModel::deterministic_path(double lambda0, double elapsed) const {
  if (!is_deterministic()) {
    throw DomainError("deterministic_path: model is stochastic");
  }
  return std::visit(Overloaded{
                        [&](const ConstantHazardParams&) { return lambda0; },
                        [&](const DeterministicExponentialParams& p) {
                          return lambda_floor_ +
                                 (lambda0 - lambda_floor_) * std::exp(p.growth_rate * elapsed);
                        },
                        [&](const ShiftedLogOUParams&) { return lambda0; },
                    },
                    params_);
}

std::string to_string(HazardKind kind) {
  switch (kind) {
    case HazardKind::ConstantHazard:
      return "constant";
    case HazardKind::DeterministicExponential:
      return "deterministic_exponential";
    case HazardKind::ShiftedLogOU:
      return "shifted_log_ou";
  }
  return "unknown";
}

namespace {

constexpr int kProbeSteps = 8;  // ln-units probed beyond each grid edge

// A bounded ratio levels off or decays past the edges; one that keeps growing
// by at least `factor` per ln-unit has no finite constant on the open domain.
template <class Ratio>
bool blows_up(const Ratio& ratio, double edge_y, double direction, double factor) {
  double prev = ratio(edge_y);
  const double first = prev;
  for (int m = 1; m <= kProbeSteps; ++m) {
    const double r = ratio(edge_y + direction * m);
    if (!(r > prev)) return false;
    prev = r;
  }
  return first > 0.0 ? prev > std::pow(factor, kProbeSteps) * first : std::isinf(prev) || prev > 0.0;
}

}  // namespace

ValidationReport validate_drift_growth(const DriftFunction& drift, const DriftFunction& drift_deriv,
                                       double lambda_floor, bool stochastic, const Grid& grid,
                                       const ValidationSettings& settings) {
  ValidationReport report;
  const double t_mid = 0.5 * grid.horizon();

  if (stochastic) {
    // Positive drift just above the floor keeps lambda away from it.
    std::vector<double> probes;
    for (double f : {0.5, 0.1, 0.01}) probes.push_back(lambda_floor + f * settings.near_floor_window);
    for (std::size_t j = 0; j < grid.n_y(); ++j) {
      if (std::exp(grid.y(j)) < settings.near_floor_window) probes.push_back(grid.lambda(j));
    }
    for (double lam : probes) {
      for (double t : {0.0, t_mid, grid.horizon()}) {
        if (!(drift(lam, t) > 0.0)) {
          report.ok = false;
          report.reason = "drift is not positive near lambda_floor";
          report.failing_lambda = lam;
          return report;
        }
      }
    }
  }

  const double times[] = {0.0, t_mid, grid.horizon()};
  auto growth_ratio = [&](double y) {
    const double lam = lambda_floor + std::exp(y);
    double g = 0.0;
    for (double t : times) g = std::max(g, std::abs(drift(lam, t)) / (std::exp(y) * (1.0 + std::abs(y))));
    return g;
  };
  auto deriv_ratio = [&](double y) {
    const double lam = lambda_floor + std::exp(y);
    double d = 0.0;
    for (double t : times) d = std::max(d, std::abs(drift_deriv(lam, t)) / (1.0 + y * y));
    return d;
  };

  for (std::size_t j = 0; j < grid.n_y(); ++j) {
    const double g = growth_ratio(grid.y(j));
    const double d = deriv_ratio(grid.y(j));
    if (!std::isfinite(g) || !std::isfinite(d)) {
      report.ok = false;
      report.reason = "non-finite drift or drift derivative";
      report.failing_lambda = grid.lambda(j);
      return report;
    }
    report.growth_constant = std::max(report.growth_constant, g);
    report.deriv_growth_constant = std::max(report.deriv_growth_constant, d);
  }

  for (bool lower : {true, false}) {
    const double edge_y = lower ? grid.y_min() : grid.y_max();
    const double dir = lower ? -1.0 : 1.0;
    const double edge_lambda = lower ? grid.lambda_min() : grid.lambda_max();
    if (blows_up(growth_ratio, edge_y, dir, settings.blowup_factor)) {
      report.ok = false;
      report.reason = "drift growth bound |a| <= K (lambda - floor)(1 + |ln(lambda - floor)|) fails";
      report.failing_lambda = edge_lambda;
      return report;
    }
    if (blows_up(deriv_ratio, edge_y, dir, settings.blowup_factor)) {
      report.ok = false;
      report.reason = "drift derivative growth bound |a_lambda| <= K (1 + ln(lambda - floor)^2) fails";
      report.failing_lambda = edge_lambda;
      return report;
    }
  }
  return report;
}

ValidationReport validate(const HazardModel& model, double alpha, const Grid& grid,
                          const ValidationSettings& settings) {
  const double floor = model.lambda_floor();
  if (!(alpha >= 0.0) || alpha > std::sqrt(floor)) {
    ValidationReport report;
    report.ok = false;
    report.reason = alpha < 0.0 ? "alpha must be non-negative" : "alpha exceeds sqrt(lambda_floor)";
    return report;
  }
  if (grid.lambda_floor() != floor) {
    ValidationReport report;
    report.ok = false;
    report.reason = "grid lambda_floor differs from the model";
    return report;
  }
  return validate_drift_growth([&](double l, double t) { return model.drift(l, t); },
                               [&](double l, double t) { return model.drift_deriv(l, t); }, floor,
                               !model.is_deterministic(), grid, settings);
}

}  // namespace endowrisk
