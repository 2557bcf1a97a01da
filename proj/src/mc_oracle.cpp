#include "endowrisk/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace endowrisk {

void McConfig::validate() const {
  if (n_paths < 100) throw std::invalid_argument("mc: n_paths must be >= 100");
  if (steps_per_year < 10) throw std::invalid_argument("mc: steps_per_year must be >= 10");
}

std::size_t configured_threads() {
  if (const char* env = std::getenv("ENDOWRISK_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent generator per stream: the seed sequence depends only on (seed, stream).
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct StepPlan {
  std::size_t n_steps = 0;
  double dt = 0.0;
};

StepPlan plan_steps(double t0, double horizon, std::size_t steps_per_year) {
  if (t0 > horizon) throw DomainError("mc: t must not exceed the horizon T");
  const double span = horizon - t0;
  StepPlan p;
  p.n_steps = span > 0.0
                  ? std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(
                                                 span * static_cast<double>(steps_per_year) - 1e-9)))
                  : 0;
  p.dt = p.n_steps ? span / static_cast<double>(p.n_steps) : 0.0;
  return p;
}

// y-drift of the simulated coordinate, Ito term included.
double y_drift(const HazardModel& m, Measure measure, double alpha, double y, double t) {
  const double b = m.vol_level(t);
  double d = m.drift_over_offset(y, t) - 0.5 * b * b;
  if (measure == Measure::AlphaTilted) d -= alpha * b;
  return d;
}

// Runs the stream's path (sign +1) and, when `twin` is set, its antithetic partner.
// Each visitor sees (step index, lambda) for both paths.
template <class Visit>
void run_stream(const HazardModel& m, Measure measure, double alpha, double lambda0, double t0,
                const StepPlan& plan, std::uint64_t seed, std::uint64_t stream, bool twin,
                Visit&& visit) {
  const double floor = m.lambda_floor();
  if (!(lambda0 > floor)) throw DomainError("mc: lambda0 must exceed the floor");
  auto engine = stream_engine(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sq = std::sqrt(plan.dt);
  double ya = std::log(lambda0 - floor);
  double yb = ya;
  visit(0, floor + std::exp(ya), floor + std::exp(yb));
  for (std::size_t i = 0; i < plan.n_steps; ++i) {
    const double t = t0 + plan.dt * static_cast<double>(i);
    const double b = m.vol_level(t);
    const double dw = b != 0.0 ? normal(engine) * sq : 0.0;
    ya += y_drift(m, measure, alpha, ya, t) * plan.dt + b * dw;
    if (twin) yb += y_drift(m, measure, alpha, yb, t) * plan.dt - b * dw;
    visit(i + 1, floor + std::exp(ya), twin ? floor + std::exp(yb) : 0.0);
  }
}

// Survival factor exp(-int lambda) for every path, trapezoid rule, in path order.
std::vector<double> survival_values(const HazardModel& m, Measure measure, double alpha,
                                    double lambda0, double t0, double horizon,
                                    const McConfig& config) {
  config.validate();
  const StepPlan plan = plan_steps(t0, horizon, config.steps_per_year);
  const std::size_t per_stream = config.antithetic ? 2 : 1;
  const std::size_t n_streams = (config.n_paths + per_stream - 1) / per_stream;
  std::vector<double> out(n_streams * per_stream);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      double ia = 0.0, ib = 0.0, pa = 0.0, pb = 0.0;
      run_stream(m, measure, alpha, lambda0, t0, plan, config.seed, s, config.antithetic,
                 [&](std::size_t i, double la, double lb) {
                   if (i > 0) {
                     ia += 0.5 * (pa + la) * plan.dt;
                     ib += 0.5 * (pb + lb) * plan.dt;
                   }
                   pa = la;
                   pb = lb;
                 });
      out[s * per_stream] = std::exp(-ia);
      if (config.antithetic) out[s * per_stream + 1] = std::exp(-ib);
    }
  };

  const std::size_t threads = std::min(configured_threads(), n_streams);
  if (threads <= 1) {
    work(0, n_streams);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_streams + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      const std::size_t b = w * chunk, e = std::min(n_streams, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

// Values averaged within antithetic pairs, so samples are independent.
std::vector<double> pair_means(std::span<const double> v, bool antithetic) {
  if (!antithetic) return {v.begin(), v.end()};
  std::vector<double> out(v.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (v[2 * i] + v[2 * i + 1]);
  return out;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments sample_moments(std::span<const double> samples) {
  const double n = static_cast<double>(samples.size());
  Moments m;
  m.mean = pairwise_sum(samples) / n;
  std::vector<double> dev(samples.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = (samples[i] - m.mean) * (samples[i] - m.mean);
  const double var = n > 1 ? pairwise_sum(dev) / (n - 1.0) : 0.0;
  m.se = std::sqrt(var / n);
  return m;
}

McEstimate estimate(const HazardModel& m, Measure measure, double alpha, double lambda0, double t,
                    double horizon, const McConfig& config) {
  const auto values = survival_values(m, measure, alpha, lambda0, t, horizon, config);
  const auto samples = pair_means(values, config.antithetic);
  const Moments mo = sample_moments(samples);
  McEstimate e;
  e.mean = mo.mean;
  e.se = mo.se;
  e.n_paths = values.size();
  e.config = config;
  return e;
}

}  // namespace

std::vector<double> simulate_hazard_path(const HazardModel& model, Measure measure, double alpha,
                                         double lambda0, double t0, double horizon,
                                         const McConfig& config, std::size_t path_index) {
  const StepPlan plan = plan_steps(t0, horizon, config.steps_per_year);
  const bool twin = config.antithetic;
  const std::size_t stream = twin ? path_index / 2 : path_index;
  const bool odd = twin && (path_index % 2 == 1);
  std::vector<double> path(plan.n_steps + 1);
  run_stream(model, measure, alpha, lambda0, t0, plan, config.seed, stream, twin,
             [&](std::size_t i, double la, double lb) { path[i] = odd ? lb : la; });
  return path;
}

McEstimate mc_phi_physical(const HazardModel& model, double lambda0, double t, double horizon,
                           McConfig config) {
  config.measure = Measure::Physical;
  return estimate(model, Measure::Physical, 0.0, lambda0, t, horizon, config);
}

McEstimate mc_beta(const HazardModel& model, double alpha, double lambda0, double t,
                   double horizon, McConfig config) {
  config.measure = Measure::AlphaTilted;
  return estimate(model, Measure::AlphaTilted, alpha, lambda0, t, horizon, config);
}

SurvivorPremium mc_survivor_premium(const HazardModel& model, std::span<const std::size_t> lives,
                                    double alpha, double lambda0, double t, double horizon,
                                    McConfig config) {
  config.measure = Measure::Physical;
  const auto p = survival_values(model, Measure::Physical, 0.0, lambda0, t, horizon, config);
  const double n_paths = static_cast<double>(p.size());
  std::vector<double> sq(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) sq[i] = p[i] * p[i];
  const double m1 = pairwise_sum(p) / n_paths;
  const double m2 = pairwise_sum(sq) / n_paths;

  SurvivorPremium out;
  out.n_paths = p.size();
  out.mean_p = m1;
  out.mean_p_se = sample_moments(pair_means(p, config.antithetic)).se;
  out.var_p = std::max(m2 - m1 * m1, 0.0);
  out.mean_bernoulli = m1 - m2;

  // Delta-method standard error of g(m1, m2): the influence value of path i is
  // g1 (p_i - m1) + g2 (p_i^2 - m2), averaged within antithetic pairs.
  auto delta_se = [&](double g1, double g2) {
    std::vector<double> infl(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) infl[i] = g1 * (p[i] - m1) + g2 * (sq[i] - m2);
    return sample_moments(pair_means(infl, config.antithetic)).se;
  };

  for (std::size_t n : lives) {
    if (n < 1) throw std::invalid_argument("survivor premium: n must be >= 1");
    const double nd = static_cast<double>(n);
    const double v = std::max(out.var_p + out.mean_bernoulli / nd, 0.0);
    const double s = std::sqrt(v);
    PremiumPoint pt;
    pt.n = n;
    pt.per_life = m1 + alpha * s;
    if (s > 0.0) {
      // v = m2 - m1^2 + (m1 - m2) / n
      const double dv1 = -2.0 * m1 + 1.0 / nd;
      const double dv2 = 1.0 - 1.0 / nd;
      pt.se = delta_se(1.0 + alpha * dv1 / (2.0 * s), alpha * dv2 / (2.0 * s));
    } else {
      pt.se = out.mean_p_se;
    }
    out.points.push_back(pt);
  }

  const double sd = std::sqrt(out.var_p);
  out.limit = m1 + alpha * sd;
  out.limit_se = sd > 1e-12 ? delta_se(1.0 - alpha * m1 / sd, alpha / (2.0 * sd)) : out.mean_p_se;
  return out;
}

}  // namespace endowrisk
