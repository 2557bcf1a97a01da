#include "endowrisk/pde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "endowrisk/report.hpp"

namespace endowrisk {

Grid::Grid(double lambda_floor, double y_min, double y_max, std::size_t n_y, double horizon,
           std::size_t n_tau)
    : lambda_floor_(lambda_floor),
      y_min_(y_min),
      y_max_(y_max),
      n_y_(n_y),
      horizon_(horizon),
      n_tau_(n_tau),
      dy_(0.0),
      dtau_(0.0) {
  if (!(lambda_floor >= 0.0)) throw std::invalid_argument("grid: lambda_floor must be >= 0");
  if (!(y_min < y_max)) throw std::invalid_argument("grid: y_min must be below y_max");
  if (n_y < 3) throw std::invalid_argument("grid: n_y must be at least 3");
  if (n_tau < 1) throw std::invalid_argument("grid: n_tau must be at least 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("grid: horizon must be positive");
  dy_ = (y_max - y_min) / static_cast<double>(n_y - 1);
  dtau_ = horizon / static_cast<double>(n_tau);
}

Grid Grid::make_default(double lambda_floor, double horizon, std::span<const double> eval_lambdas,
                        std::size_t n_y, std::size_t n_tau, double margin) {
  // With a zero floor the evaluation hazards alone anchor the window.
  double lo = lambda_floor > 0.0 ? std::log(1e-3 * lambda_floor) : std::numeric_limits<double>::infinity();
  double hi = lambda_floor > 0.0 ? std::log(50.0 * lambda_floor) : -std::numeric_limits<double>::infinity();
  for (double lam : eval_lambdas) {
    if (!(lam > lambda_floor)) {
      throw std::invalid_argument("grid: evaluation hazard must exceed lambda_floor");
    }
    const double y = std::log(lam - lambda_floor);
    lo = std::min(lo, y - margin);
    hi = std::max(hi, y + margin);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("grid: a zero floor needs at least one evaluation hazard");
  }
  return Grid(lambda_floor, lo, hi, n_y, horizon, n_tau);
}

Grid Grid::refined() const {
  return Grid(lambda_floor_, y_min_, y_max_, 2 * (n_y_ - 1) + 1, horizon_, 2 * n_tau_);
}

Grid Grid::widened() const {
  const double half = 0.5 * (y_max_ - y_min_);
  return Grid(lambda_floor_, y_min_ - half, y_max_ + half, 2 * (n_y_ - 1) + 1, horizon_, n_tau_);
}

double Grid::lambda(std::size_t j) const { return lambda_floor_ + std::exp(y(j)); }

Surface::Surface(Grid grid, std::string name)
    : grid_(grid), name_(std::move(name)), values_(grid.n_y() * (grid.n_tau() + 1), 0.0) {}

Surface::Surface(Grid grid, std::string name, std::vector<double> values)
    : grid_(grid), name_(std::move(name)), values_(std::move(values)) {
  if (values_.size() != grid_.n_y() * (grid_.n_tau() + 1)) {
    throw std::invalid_argument("surface: value count does not match the grid");
  }
}

std::span<const double> Surface::slice(std::size_t k) const {
  return std::span<const double>(values_).subspan(k * grid_.n_y(), grid_.n_y());
}

std::span<double> Surface::slice(std::size_t k) {
  return std::span<double>(values_).subspan(k * grid_.n_y(), grid_.n_y());
}

double Surface::evaluate(double lambda, double t) const {
  const double floor = grid_.lambda_floor();
  if (!(lambda > floor)) {
    throw std::out_of_range("surface " + name_ + ": lambda must exceed the floor");
  }
  const double y = std::log(lambda - floor);
  const double tau = grid_.horizon() - t;
  const double eps = 1e-12;
  if (y < grid_.y_min() - eps || y > grid_.y_max() + eps) {
    std::ostringstream msg;
    msg << "surface " << name_ << ": lambda " << lambda << " outside grid range ["
        << grid_.lambda_min() << ", " << grid_.lambda_max() << "]";
    throw std::out_of_range(msg.str());
  }
  if (tau < -eps || tau > grid_.horizon() + eps) {
    std::ostringstream msg;
    msg << "surface " << name_ << ": t " << t << " outside [0, " << grid_.horizon() << "]";
    throw std::out_of_range(msg.str());
  }
  const double sy = std::clamp((y - grid_.y_min()) / grid_.dy(), 0.0,
                               static_cast<double>(grid_.n_y() - 1));
  const double st = std::clamp(tau / grid_.dtau(), 0.0, static_cast<double>(grid_.n_tau()));
  const auto j = std::min(static_cast<std::size_t>(sy), grid_.n_y() - 2);
  const auto k = std::min(static_cast<std::size_t>(st), grid_.n_tau() - (grid_.n_tau() > 0 ? 1 : 0));
  const double wy = sy - static_cast<double>(j);
  const double wt = st - static_cast<double>(k);
  const std::size_t k1 = std::min(k + 1, grid_.n_tau());
  const double lo = (1.0 - wy) * at(j, k) + wy * at(j + 1, k);
  const double hi = (1.0 - wy) * at(j, k1) + wy * at(j + 1, k1);
  return (1.0 - wt) * lo + wt * hi;
}

Surface Surface::combined(double a, const Surface& other, double b, std::string name) const {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("surface: grids differ");
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * values_[i] + b * other.values_[i];
  return Surface(grid_, std::move(name), std::move(v));
}

Surface Surface::scaled(double a, std::string name) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= a;
  return Surface(grid_, std::move(name), std::move(v));
}

void Surface::write_csv(std::ostream& out, std::size_t stride_tau) const {
  stride_tau = std::max<std::size_t>(1, stride_tau);
  out << "y,lambda,tau,t,value\n";
  for (std::size_t k = 0; k <= grid_.n_tau(); k += stride_tau) {
    for (std::size_t j = 0; j < grid_.n_y(); ++j) {
      out << format_number(grid_.y(j)) << ',' << format_number(grid_.lambda(j)) << ','
          << format_number(grid_.tau(k)) << ',' << format_number(grid_.t(k)) << ','
          << format_number(at(j, k)) << '\n';
    }
  }
}

void SolverConfig::validate() const {
  if (!(picard_tol > 0.0)) throw std::invalid_argument("solver: picard_tol must be positive");
  if (picard_max_iters < 1) throw std::invalid_argument("solver: picard_max_iters must be >= 1");
}

void StepCoefficients::resize(std::size_t n, bool with_root) {
  advection.assign(n, 0.0);
  reaction.assign(n, 0.0);
  forcing.assign(n, 0.0);
  if (with_root) {
    root_grad.assign(n, 0.0);
    root_level.assign(n, 0.0);
    root_shift.assign(n, 0.0);
  } else {
    root_weight = 0.0;
    root_grad.clear();
    root_level.clear();
    root_shift.clear();
  }
}

void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs,
                       std::span<double> scratch) {
  const std::size_t n = diag.size();
  double denom = diag[0];
  scratch[0] = super[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * scratch[i - 1];
    scratch[i] = (i + 1 < n) ? super[i] / denom : 0.0;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

namespace {

// One-sided at the edges, centred inside.
double gradient(std::span<const double> u, std::size_t j, double dy) {
  const std::size_t n = u.size();
  if (j == 0) return (u[1] - u[0]) / dy;
  if (j == n - 1) return (u[n - 1] - u[n - 2]) / dy;
  return (u[j + 1] - u[j - 1]) / (2.0 * dy);
}

struct Workspace {
  std::vector<double> sub, diag, super, rhs, scratch, iterate;
  explicit Workspace(std::size_t n)
      : sub(n), diag(n), super(n), rhs(n), scratch(n), iterate(n) {}
};

void assemble(const Grid& grid, const StepCoefficients& c, std::span<const double> previous,
              Workspace& ws) {
  const std::size_t n = grid.n_y();
  const double dy = grid.dy();
  const double inv_dt = 1.0 / grid.dtau();
  const double dd = c.diffusion / (dy * dy);
  const bool root = c.root_weight != 0.0;

  for (std::size_t j = 0; j < n; ++j) {
    double adv = c.advection[j];
    double react = c.reaction[j];
    double force = c.forcing[j];
    if (root) {
      // Freeze sqrt(B^2 p^2 + C v^2) = (B^2 p / s) p + (C v / s) v at the iterate.
      const double p = gradient(ws.iterate, j, dy);
      const double v = ws.iterate[j] - c.root_shift[j];
      const double b2 = c.root_grad[j] * c.root_grad[j];
      const double s = std::sqrt(std::max(b2 * p * p + c.root_level[j] * v * v, 0.0));
      if (s > 1e-300) {
        const double level_coef = c.root_weight * c.root_level[j] * v / s;
        adv += c.root_weight * b2 * p / s;
        react -= level_coef;
        force -= level_coef * c.root_shift[j];
      }
    }

    ws.rhs[j] = inv_dt * previous[j] + force;
    // Edge rows keep advection only when the inward difference is the upwind one;
    // otherwise u_y = 0 there, which keeps the matrix an M-matrix.
    if (j == 0) {
      const double a = std::max(adv, 0.0);
      ws.sub[j] = 0.0;
      ws.diag[j] = inv_dt + react + a / dy;
      ws.super[j] = -a / dy;
    } else if (j == n - 1) {
      const double a = std::min(adv, 0.0);
      ws.sub[j] = a / dy;
      ws.diag[j] = inv_dt + react - a / dy;
      ws.super[j] = 0.0;
    } else {
      ws.sub[j] = -dd;
      ws.super[j] = -dd;
      ws.diag[j] = inv_dt + 2.0 * dd + react;
      if (adv >= 0.0) {
        ws.super[j] -= adv / dy;
        ws.diag[j] += adv / dy;
      } else {
        ws.sub[j] += adv / dy;
        ws.diag[j] -= adv / dy;
      }
    }
  }
}

[[noreturn]] void throw_non_finite(const std::string& name, std::size_t k, std::size_t j) {
  std::ostringstream msg;
  msg << "non-finite value in " << name << " at step " << k << ", node " << j;
  throw SolverError(SolverError::Kind::NonFinite, msg.str());
}

}  // namespace

Surface solve_terminal_value(const Grid& grid, const SolverConfig& config,
                             const TerminalFunction& terminal, const NonlinearSource& source,
                             std::string name) {
  config.validate();
  const std::size_t n = grid.n_y();
  Surface out(grid, std::move(name));

  auto first = out.slice(0);
  for (std::size_t j = 0; j < n; ++j) {
    first[j] = terminal(grid.y(j));
    if (!std::isfinite(first[j])) throw_non_finite(out.name(), 0, j);
  }

  const bool linear = source.is_linear();
  StepCoefficients c;
  c.resize(n, !linear);
  Workspace ws(n);
  SolverStats stats;
  bool warned = false;

  for (std::size_t k = 1; k <= grid.n_tau(); ++k) {
    source.coefficients(grid, k, c);
    if (linear) c.root_weight = 0.0;
    const auto previous = out.slice(k - 1);
    std::copy(previous.begin(), previous.end(), ws.iterate.begin());

    std::size_t iterations = 0;
    for (;;) {
      ++iterations;
      assemble(grid, c, previous, ws);
      solve_tridiagonal(ws.sub, ws.diag, ws.super, ws.rhs, ws.scratch);
      double change = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(ws.rhs[j])) throw_non_finite(out.name(), k, j);
        change = std::max(change, std::abs(ws.rhs[j] - ws.iterate[j]));
      }
      ws.iterate.swap(ws.rhs);
      if (c.root_weight == 0.0 || change <= config.picard_tol) break;
      if (iterations >= config.picard_max_iters) {
        std::ostringstream msg;
        msg << "picard divergence in " << out.name() << " at step " << k << ": change " << change
            << " after " << iterations << " iterations";
        throw SolverError(SolverError::Kind::PicardDivergence, msg.str());
      }
    }

    stats.total_picard_iterations += iterations;
    stats.max_picard_iterations = std::max(stats.max_picard_iterations, iterations);
    if (iterations > config.picard_warn_iters) {
      ++stats.steps_over_warning;
      if (!warned) {
        std::clog << "warning: " << out.name() << " needed " << iterations
                  << " picard iterations at step " << k << '\n';
        warned = true;
      }
    }
    std::copy(ws.iterate.begin(), ws.iterate.end(), out.slice(k).begin());
  }
  out.set_stats(stats);
  return out;
}

Surface lambda_derivative(const Surface& surface) {
  const Grid& g = surface.grid();
  Surface out(g, surface.name() + "_lambda");
  for (std::size_t k = 0; k <= g.n_tau(); ++k) {
    const auto u = surface.slice(k);
    auto d = out.slice(k);
    for (std::size_t j = 0; j < g.n_y(); ++j) d[j] = gradient(u, j, g.dy()) * std::exp(-g.y(j));
  }
  return out;
}

ConvergenceEstimate refine_and_estimate_order(const std::function<double(const Grid&)>& solve,
                                              const Grid& coarse) {
  ConvergenceEstimate est;
  const Grid medium = coarse.refined();
  est.coarse = solve(coarse);
  est.medium = solve(medium);
  est.fine = solve(medium.refined());
  const double e1 = std::abs(est.coarse - est.medium);
  const double e2 = std::abs(est.medium - est.fine);
  est.order = (e2 > 0.0 && e1 > 0.0) ? std::log2(e1 / e2) : 0.0;
  return est;
}

}  // namespace endowrisk
