#pragma once

// Terminal-value solver for 1-D degenerate parabolic equations, posed in the
// log-offset coordinates y = ln(lambda - floor), tau = T - t:
//
//   u_tau = D(tau) u_yy + A(y,tau) u_y - R(y,tau) u + F(y,tau)
//           + w * sqrt(B(y,tau)^2 u_y^2 + C(y,tau) (u - S(y,tau))^2),   u(y, 0) = terminal(y).
//
// In these coordinates the (lambda - floor)^2 diffusion coefficient becomes the
// constant D = b^2 / 2, so a uniform y grid resolves the floor without degeneracy.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace endowrisk {

class SolverError : public std::runtime_error {
 public:
  enum class Kind { PicardDivergence, NonFinite, Quality };
  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Uniform (y, tau) grid over the truncated domain (floor + e^{y_min}, floor + e^{y_max}) x [0, T].
class Grid {
 public:
  Grid(double lambda_floor, double y_min, double y_max, std::size_t n_y, double horizon,
       std::size_t n_tau);

  /// Default truncation [ln(1e-3 floor), ln(50 floor)], widened so every
  /// evaluation hazard keeps at least `margin` ln-units to either edge.
  static Grid make_default(double lambda_floor, double horizon, std::span<const double> eval_lambdas = {},
                           std::size_t n_y = 401, std::size_t n_tau = 2000, double margin = 4.0);

  /// Both spacings halved; every node of *this is a node of the result.
  [[nodiscard]] Grid refined() const;
  /// Spacing in y unchanged, domain doubled in length about its centre.
  [[nodiscard]] Grid widened() const;

  [[nodiscard]] double lambda_floor() const noexcept { return lambda_floor_; }
  [[nodiscard]] double y_min() const noexcept { return y_min_; }
  [[nodiscard]] double y_max() const noexcept { return y_max_; }
  [[nodiscard]] std::size_t n_y() const noexcept { return n_y_; }
  [[nodiscard]] std::size_t n_tau() const noexcept { return n_tau_; }
  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] double dy() const noexcept { return dy_; }
  [[nodiscard]] double dtau() const noexcept { return dtau_; }

  [[nodiscard]] double y(std::size_t j) const noexcept { return y_min_ + dy_ * static_cast<double>(j); }
  [[nodiscard]] double tau(std::size_t k) const noexcept { return dtau_ * static_cast<double>(k); }
  [[nodiscard]] double lambda(std::size_t j) const;
  [[nodiscard]] double t(std::size_t k) const noexcept { return horizon_ - tau(k); }
  [[nodiscard]] double lambda_min() const { return lambda(0); }
  [[nodiscard]] double lambda_max() const { return lambda(n_y_ - 1); }

  [[nodiscard]] bool operator==(const Grid&) const = default;

 private:
  double lambda_floor_;
  double y_min_;
  double y_max_;
  std::size_t n_y_;
  double horizon_;
  std::size_t n_tau_;
  double dy_;
  double dtau_;
};

struct SolverStats {
  std::size_t max_picard_iterations = 0;
  std::size_t total_picard_iterations = 0;
  std::size_t steps_over_warning = 0;
};

/// u(y_j, tau_k) on a Grid. Immutable once returned by the solver.
class Surface {
 public:
  Surface(Grid grid, std::string name);
  Surface(Grid grid, std::string name, std::vector<double> values);

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const SolverStats& stats() const noexcept { return stats_; }

  [[nodiscard]] double at(std::size_t j, std::size_t k) const { return values_[k * grid_.n_y() + j]; }
  double& at(std::size_t j, std::size_t k) { return values_[k * grid_.n_y() + j]; }

  /// Values on the time slice tau_k.
  [[nodiscard]] std::span<const double> slice(std::size_t k) const;
  std::span<double> slice(std::size_t k);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// Bilinear interpolation in (y, tau); piecewise-linear interpolation preserves
  /// nodal bounds and monotonicity. Throws std::out_of_range outside the grid.
  [[nodiscard]] double evaluate(double lambda, double t) const;

  /// Pointwise combination a * this + b * other on an identical grid.
  [[nodiscard]] Surface combined(double a, const Surface& other, double b, std::string name) const;
  [[nodiscard]] Surface scaled(double a, std::string name) const;

  void set_stats(const SolverStats& stats) { stats_ = stats; }
  void set_name(std::string name) { name_ = std::move(name); }

  /// CSV with columns y,lambda,tau,t,value; every `stride_tau`-th time slice.
  void write_csv(std::ostream& out, std::size_t stride_tau = 1) const;

 private:
  Grid grid_;
  std::string name_;
  std::vector<double> values_;
  SolverStats stats_;
};

enum class TimeScheme { FullyImplicitPicard };
enum class Upwinding { FirstOrderUpwind };

struct SolverConfig {
  double picard_tol = 1e-10;
  std::size_t picard_max_iters = 50;
  std::size_t picard_warn_iters = 25;
  TimeScheme scheme = TimeScheme::FullyImplicitPicard;
  Upwinding upwinding = Upwinding::FirstOrderUpwind;

  void validate() const;
};

/// Coefficients of one implicit step, evaluated at the new time level tau_k.
struct StepCoefficients {
  double diffusion = 0.0;           // D = b~^2 / 2, constant in y
  std::vector<double> advection;    // A
  std::vector<double> reaction;     // R
  std::vector<double> forcing;      // F
  double root_weight = 0.0;         // w; zero disables the square-root term
  std::vector<double> root_grad;    // B
  std::vector<double> root_level;   // C >= 0
  std::vector<double> root_shift;   // S

  void resize(std::size_t n, bool with_root);
};

/// Supplies h~ for solve_terminal_value. Implementations fill every vector to n_y.
class NonlinearSource {
 public:
  virtual ~NonlinearSource() = default;
  /// Called once per step k = 1..n_tau before the Picard loop.
  virtual void coefficients(const Grid& grid, std::size_t k, StepCoefficients& out) const = 0;
  /// True when the root term is absent, so one linear solve per step suffices.
  [[nodiscard]] virtual bool is_linear() const = 0;
};

using TerminalFunction = std::function<double(double y)>;

/// Marches tau = 0 -> T with backward Euler. Each step freezes the square-root
/// term around the current iterate, using its degree-one homogeneity
///   sqrt(B^2 p^2 + C v^2) = (B^2 p / s) p + (C v / s) v,
/// so the implicit system stays tridiagonal with upwinded advection; Picard
/// iterations repeat until successive iterates agree to picard_tol in max norm.
/// Boundary rows drop u_yy (zero second difference). They keep the inward one-sided
/// first difference while the drift points into the domain and drop u_y otherwise.
Surface solve_terminal_value(const Grid& grid, const SolverConfig& config,
                             const TerminalFunction& terminal, const NonlinearSource& source,
                             std::string name = "u");

/// u_lambda = e^{-y} u_y: centred differences inside, one-sided at the edges.
Surface lambda_derivative(const Surface& surface);

/// Solution-agnostic refinement driver: solve(grid) must return the probe value.
struct ConvergenceEstimate {
  double coarse = 0.0;
  double medium = 0.0;
  double fine = 0.0;
  double order = 0.0;  // log2(|coarse - medium| / |medium - fine|)
};

ConvergenceEstimate refine_and_estimate_order(const std::function<double(const Grid&)>& solve,
                                              const Grid& coarse);

/// Tridiagonal solve (Thomas algorithm) for sub/diag/super and rhs, in place in rhs.
void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs,
                       std::span<double> scratch);

}  // namespace endowrisk
