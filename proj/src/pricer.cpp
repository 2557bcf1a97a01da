#include "endowrisk/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace endowrisk {

void PricingProblem::require_valid() const {
  const ValidationReport report = validate(hazard, alpha, grid);
  if (!report.ok) throw DomainError(report.reason);
}

PricingProblem PricingProblem::with_alpha(double a) const {
  PricingProblem p = *this;
  p.alpha = a;
  return p;
}

PricingProblem PricingProblem::with_hazard(const HazardModel& h) const {
  PricingProblem p = *this;
  p.hazard = h;
  return p;
}

PricingProblem PricingProblem::with_grid(const Grid& g) const {
  PricingProblem p = *this;
  p.grid = g;
  return p;
}

namespace {

enum class SourceKind { Phi, Beta, Gamma, AuxF, AuxH };

// Every equation in the family shares the operator
//   u_t + (a - s alpha b (lambda - floor)) u_lambda + b^2 (lambda - floor)^2 u_lambda_lambda / 2,
// with s = 1 for the tilted (linear) members; they differ in reaction and forcing.
class LevelSource final : public NonlinearSource {
 public:
  LevelSource(const HazardModel& hazard, double alpha, SourceKind kind, std::size_t n,
              const Surface* previous)
      : hazard_(hazard), alpha_(alpha), kind_(kind), n_(static_cast<double>(n)), previous_(previous) {}

  void coefficients(const Grid& grid, std::size_t k, StepCoefficients& out) const override {
    const double t = grid.t(k);
    const double b = hazard_.vol_level(t);
    const bool tilted = kind_ != SourceKind::Phi;
    out.diffusion = 0.5 * b * b;
    const std::span<const double> prev =
        previous_ ? previous_->slice(k) : std::span<const double>{};

    for (std::size_t j = 0; j < grid.n_y(); ++j) {
      const double y = grid.y(j);
      const double lam = grid.lambda(j);
      const double s_prev = prev.empty() ? 0.0 : prev[j];
      double adv = hazard_.drift_over_offset(y, t) - 0.5 * b * b;
      if (tilted) adv -= alpha_ * b;
      out.advection[j] = adv;

      const double discount = n_ * lam - alpha_ * std::sqrt(n_ * lam);
      switch (kind_) {
        case SourceKind::Phi:
          out.reaction[j] = n_ * lam;
          out.forcing[j] = n_ * lam * s_prev;
          break;
        case SourceKind::Beta:
          out.reaction[j] = lam;
          out.forcing[j] = 0.0;
          break;
        case SourceKind::Gamma:
          out.reaction[j] = discount;
          out.forcing[j] = discount * s_prev;
          break;
        case SourceKind::AuxF:
          out.reaction[j] = discount;
          out.forcing[j] = alpha_ * n_ * std::sqrt(lam);
          break;
        case SourceKind::AuxH:
          out.reaction[j] = discount;
          out.forcing[j] = discount;
          break;
      }
      if (kind_ == SourceKind::Phi && !out.root_grad.empty()) {
        out.root_grad[j] = b;
        out.root_level[j] = n_ * lam;
        out.root_shift[j] = s_prev;
      }
    }
    out.root_weight = kind_ == SourceKind::Phi ? alpha_ : 0.0;
  }

  [[nodiscard]] bool is_linear() const override {
    return kind_ != SourceKind::Phi || alpha_ == 0.0;
  }

 private:
  const HazardModel& hazard_;
  double alpha_;
  SourceKind kind_;
  double n_;
  const Surface* previous_;
};

Surface solve_level(const PricingProblem& problem, SourceKind kind, std::size_t n,
                    const Surface* previous, double terminal, std::string name) {
  const LevelSource source(problem.hazard, problem.alpha, kind, n, previous);
  return solve_terminal_value(problem.grid, problem.solver, [terminal](double) { return terminal; },
                              source, std::move(name));
}

std::string level_name(const char* stem, std::size_t n) {
  return std::string(stem) + "_" + std::to_string(n);
}

}  // namespace

Surface phi_single(const PricingProblem& problem) {
  problem.require_valid();
  return solve_level(problem, SourceKind::Phi, 1, nullptr, 1.0, "phi");
}

Surface phi_physical(const PricingProblem& problem) {
  return phi_single(problem.with_alpha(0.0));
}

double phi_deterministic_closed_form(const HazardModel& hazard, double alpha, double lambda,
                                     double t, double horizon) {
  if (!hazard.is_deterministic()) {
    throw DomainError("closed form needs a deterministic hazard (b = 0)");
  }
  if (t > horizon) throw DomainError("closed form: t must not exceed the horizon T");
  if (!(lambda > hazard.lambda_floor())) throw DomainError("closed form: lambda must exceed the floor");
  const double tau = horizon - t;

  if (hazard.kind() == HazardKind::ConstantHazard) {
    return std::exp(-(lambda - alpha * std::sqrt(lambda)) * tau);
  }
  const auto& p = std::get<DeterministicExponentialParams>(hazard.params());
  const double c = p.growth_rate;
  const double floor = hazard.lambda_floor();
  const double offset = lambda - floor;
  // (e^{x tau} - 1) / x, continuous at x = 0
  auto growth = [tau](double x) { return x == 0.0 ? tau : std::expm1(x * tau) / x; };

  const double int_lambda = floor * tau + offset * growth(c);
  double int_root = 0.0;
  if (floor == 0.0) {
    int_root = std::sqrt(lambda) * growth(0.5 * c);
  } else {
    using boost::math::quadrature::gauss_kronrod;
    auto root = [&](double s) { return std::sqrt(floor + offset * std::exp(c * s)); };
    int_root = gauss_kronrod<double, 31>::integrate(root, 0.0, tau, 15, 1e-10);
  }
  return std::exp(-(int_lambda - alpha * int_root));
}

double phi_deterministic_closed_form(const HazardModel& hazard, double alpha, double t,
                                     double horizon) {
  const auto* p = std::get_if<DeterministicExponentialParams>(&hazard.params());
  if (!p) throw DomainError("closed form: this hazard kind needs an explicit lambda");
  return phi_deterministic_closed_form(hazard, alpha, hazard.deterministic_path(p->initial_hazard, t),
                                       t, horizon);
}

const Surface& PortfolioLadder::at(std::size_t n) const {
  if (n < 1 || n > surfaces_.size()) throw std::out_of_range("ladder: level out of range");
  return surfaces_[n - 1];
}

Surface PortfolioLadder::per_risk(std::size_t n) const {
  const Surface& s = at(n);
  return s.scaled(1.0 / static_cast<double>(n), level_name("zeta", n));
}

LadderStepper::LadderStepper(PricingProblem problem, LadderKind kind)
    : problem_(std::move(problem)), kind_(kind) {
  problem_.require_valid();
}

const Surface& LadderStepper::advance() {
  const std::size_t n = level_ + 1;
  const Surface* prev = current_ ? &*current_ : nullptr;
  Surface next = kind_ == LadderKind::Phi
                     ? solve_level(problem_, SourceKind::Phi, n, prev, static_cast<double>(n),
                                   n == 1 ? "phi" : level_name("phi", n))
                     : solve_level(problem_, SourceKind::Gamma, n, prev, static_cast<double>(n),
                                   level_name("gamma", n));
  if (kind_ == LadderKind::Phi && prev) {
    const auto a = next.values();
    const auto b = prev->values();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < b[i] - quality_slack) {
        std::ostringstream msg;
        msg << "phi_" << n << " falls below phi_" << n - 1 << " by " << b[i] - a[i];
        throw SolverError(SolverError::Kind::Quality, msg.str());
      }
    }
  }
  previous_ = std::move(current_);
  current_ = std::move(next);
  level_ = n;
  return *current_;
}

const Surface& LadderStepper::current() const {
  if (!current_) throw std::logic_error("ladder stepper: no level solved yet");
  return *current_;
}

const Surface* LadderStepper::previous() const noexcept {
  return previous_ ? &*previous_ : nullptr;
}

namespace {

PortfolioLadder run_ladder(const PricingProblem& problem, LadderKind kind, std::size_t n_max) {
  if (n_max < 1) throw std::invalid_argument("ladder: n_max must be >= 1");
  LadderStepper stepper(problem, kind);
  std::vector<Surface> out;
  out.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) out.push_back(stepper.advance());
  return PortfolioLadder(std::move(out));
}

}  // namespace

PortfolioLadder phi_portfolio(const PricingProblem& problem, std::size_t n_max) {
  return run_ladder(problem, LadderKind::Phi, n_max);
}

PortfolioLadder gamma_ladder(const PricingProblem& problem, std::size_t n_max) {
  return run_ladder(problem, LadderKind::Gamma, n_max);
}

Surface beta_surface(const PricingProblem& problem) {
  problem.require_valid();
  return solve_level(problem, SourceKind::Beta, 1, nullptr, 1.0, "beta");
}

Surface rate_aux_f(const PricingProblem& problem, std::size_t n) {
  if (n < 2) throw std::invalid_argument("rate_aux_f: n must be >= 2");
  problem.require_valid();
  return solve_level(problem, SourceKind::AuxF, n, nullptr, 0.0, level_name("f", n));
}

Surface rate_aux_h(const PricingProblem& problem, std::size_t n) {
  if (n < 2) throw std::invalid_argument("rate_aux_h: n must be >= 2");
  problem.require_valid();
  return solve_level(problem, SourceKind::AuxH, n, nullptr, 0.0, level_name("h", n));
}

RateBound rate_bound_constants(double lambda_floor, double alpha, std::size_t n) {
  if (n == 0) throw DomainError("rate bound: n must be >= 1");
  const double gap = std::sqrt(2.0 * lambda_floor) - alpha;
  if (!(gap > 0.0)) throw DomainError("rate bound: alpha must be below sqrt(2 lambda_floor)");
  RateBound out;
  out.j = alpha * std::sqrt(2.0) / gap;
  double k = 1.0;
  for (std::size_t i = 2; i <= n; ++i) {
    const double m = static_cast<double>(i);
    k = out.j / (m * std::sqrt(m)) + (m - 1.0) / m * k;
  }
  const double nd = static_cast<double>(n);
  out.k_n = k;
  out.l_n = nd * k;
  out.bound = 1.0 / nd + 2.0 * out.j / std::sqrt(nd);
  return out;
}

SharpeResidual sharpe_identity_check(const PricingProblem& problem, const Surface& phi, double r,
                                     std::span<const std::pair<double, double>> samples) {
  const Grid& g = phi.grid();
  if (g.n_y() < 3 || g.n_tau() < 2) throw std::invalid_argument("sharpe check: grid too small");
  const double floor = g.lambda_floor();
  const double T = g.horizon();
  const double alpha = problem.alpha;
  const ShortRateModel& bond = problem.bond;
  const double sigma = bond.vol();

  SharpeResidual out;
  out.residuals.reserve(samples.size());
  for (const auto& [lambda, t] : samples) {
    const double sy = (std::log(lambda - floor) - g.y_min()) / g.dy();
    const double st = (T - t) / g.dtau();
    const auto j = static_cast<std::size_t>(
        std::clamp(std::lround(sy), 1L, static_cast<long>(g.n_y()) - 2));
    const auto k = static_cast<std::size_t>(
        std::clamp(std::lround(st), 1L, static_cast<long>(g.n_tau()) - 1));

    const double y = g.y(j);
    const double lam = g.lambda(j);
    const double tk = g.t(k);
    const double dy = g.dy();
    const double u = phi.at(j, k);
    const double u_y = (phi.at(j + 1, k) - phi.at(j - 1, k)) / (2.0 * dy);
    const double u_yy = (phi.at(j + 1, k) - 2.0 * u + phi.at(j - 1, k)) / (dy * dy);
    // t runs against tau
    const double phi_t = -(phi.at(j, k + 1) - phi.at(j, k - 1)) / (2.0 * g.dtau());
    const double ey = std::exp(-y);
    const double phi_l = ey * u_y;
    const double phi_ll = ey * ey * (u_yy - u_y);

    const BondPartials f = bond_partials(bond, r, tk, T);
    const double p = f.value * u;
    const double p_r = f.d_r * u;
    const double p_rr = f.d_rr * u;
    const double p_t = f.d_t * u + f.value * phi_t;
    const double p_l = f.value * phi_l;
    const double p_ll = f.value * phi_ll;
    const double off = lam - floor;
    const double b = problem.hazard.vol_level(tk);

    const double generator = p_t + bond.q_drift(r) * p_r + 0.5 * sigma * sigma * p_rr +
                             problem.hazard.drift(lam, tk) * p_l + 0.5 * b * b * off * off * p_ll -
                             lam * p;
    const double lhs = -generator + r * p_r * f.value / f.d_r;
    const double portfolio = -p + p_r * f.value / f.d_r;
    const double rhs =
        r * portfolio + alpha * std::sqrt(std::max(b * b * off * off * p_l * p_l + lam * p * p, 0.0));
    const double res = lhs - rhs;
    out.residuals.push_back(res);
    out.max_abs = std::max(out.max_abs, std::abs(res));
  }
  return out;
}

std::vector<std::pair<double, double>> default_sharpe_samples(const PricingProblem& problem,
                                                              double lambda_star) {
  const double floor = problem.grid.lambda_floor();
  const double T = problem.horizon();
  const double offset = lambda_star - floor;
  std::vector<std::pair<double, double>> out;
  out.reserve(100);
  for (int i = 0; i < 10; ++i) {
    const double lam = floor + offset * std::pow(10.0, -1.0 + 2.0 * i / 9.0);
    for (int m = 0; m < 10; ++m) out.emplace_back(lam, T * (m + 0.5) / 10.0);
  }
  return out;
}

EndowmentPricer::EndowmentPricer(PricingProblem problem) : problem_(std::move(problem)) {
  problem_.require_valid();
}

const Surface& EndowmentPricer::phi() {
  if (!phi_) phi_ = phi_single(problem_);
  return *phi_;
}

const Surface& EndowmentPricer::phi_alpha0() {
  if (!phi_alpha0_) phi_alpha0_ = phi_physical(problem_);
  return *phi_alpha0_;
}

const Surface& EndowmentPricer::beta() {
  if (!beta_) beta_ = beta_surface(problem_);
  return *beta_;
}

const Surface& EndowmentPricer::phi_n(std::size_t n) {
  if (n < 1) throw std::invalid_argument("phi_n: n must be >= 1");
  if (n == 1) return phi();
  if (ladder_.n_max() < n) ladder_ = phi_portfolio(problem_, n);
  return ladder_.at(n);
}

double EndowmentPricer::price(double r, double lambda, double t, std::size_t n) {
  const double f = bond_price(problem_.bond, r, t, problem_.horizon()).value;
  return f * phi_n(n).evaluate(lambda, t);
}

double EndowmentPricer::hedge_ratio(double /*r*/, double lambda, double t) {
  return phi().evaluate(lambda, t);
}

double EndowmentPricer::envelope(double t, std::size_t n) const {
  const double floor = problem_.hazard.lambda_floor();
  return static_cast<double>(n) *
         std::exp(-(floor - problem_.alpha * std::sqrt(floor)) * (problem_.horizon() - t));
}

RiskDecomposition EndowmentPricer::risk_decomposition(std::size_t n, double r, double lambda,
                                                      double t) {
  const double f = bond_price(problem_.bond, r, t, problem_.horizon()).value;
  RiskDecomposition d;
  d.per_risk_price = f * phi_n(n).evaluate(lambda, t) / static_cast<double>(n);
  d.risk_neutral = f * phi_alpha0().evaluate(lambda, t);
  const double fb = f * beta().evaluate(lambda, t);
  d.finite_portfolio_charge = d.per_risk_price - fb;
  d.stochastic_mortality_charge = fb - d.risk_neutral;
  return d;
}

}  // namespace endowrisk
