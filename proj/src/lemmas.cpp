#include "endowrisk/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace endowrisk {

double root_shift_gap(double a, double b, double c) {
  return std::sqrt(c * c + a * a) - ((a - b) + std::sqrt(c * c + b * b));
}

double root_split_gap(double a, double b, double c, double b_lambda, double c_lambda,
                      std::size_t m, std::size_t n) {
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double s = b_lambda + c_lambda;
  const double lhs = std::sqrt(s * s + (md + nd) * a * a) - std::sqrt(nd) * (a - c);
  const double rhs = std::sqrt(b_lambda * b_lambda + md * b * b) +
                     std::sqrt(c_lambda * c_lambda + nd * c * c) + std::sqrt(md) * (a - b);
  return lhs - rhs;
}

double root_average_gap(double a, double c, double b_lambda, std::size_t n) {
  const double nd = static_cast<double>(n);
  const double mix = (nd - 1.0) * c - (nd - 2.0) * a;
  const double lhs = std::sqrt(b_lambda * b_lambda + c * c / nd);
  const double rhs =
      std::sqrt(nd - 2.0) * (a - c) + std::sqrt(b_lambda * b_lambda + mix * mix / (nd - 1.0));
  return lhs - rhs;
}

namespace {

constexpr double kRange = 10.0;

struct Sampler {
  std::mt19937_64 engine;
  std::uniform_real_distribution<double> value{-kRange, kRange};
  std::uniform_real_distribution<double> unit{0.0, 1.0};

  explicit Sampler(std::uint64_t seed) : engine(seed) {}
  double any() { return value(engine); }
  double nonneg() { return kRange * unit(engine); }
  bool edge() { return unit(engine) < 0.1; }
  std::size_t count(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine);
  }
};

template <class Draw>
FuzzResult run(std::size_t n_samples, double slack, Draw&& draw) {
  FuzzResult r;
  r.max_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double gap = draw();
    r.max_gap = std::max(r.max_gap, gap);
    if (!(gap <= slack)) ++r.violations;
  }
  r.samples = n_samples;
  return r;
}

}  // namespace

FuzzResult fuzz_root_shift(std::uint64_t seed, std::size_t n_samples, double slack) {
  Sampler s(seed);
  return run(n_samples, slack, [&] {
    double a = s.any(), b = s.any();
    if (a < b) std::swap(a, b);
    if (s.edge()) b = a;
    return root_shift_gap(a, b, s.any());
  });
}

FuzzResult fuzz_root_split(std::uint64_t seed, std::size_t n_samples, double slack) {
  Sampler s(seed);
  return run(n_samples, slack, [&] {
    double v[3] = {s.any(), s.any(), s.any()};
    std::sort(v, v + 3);
    double b = v[0], c = v[1], a = v[2];
    if (s.edge()) c = a;
    if (s.edge()) b = c;
    const std::size_t m = s.count(0, 20), n = s.count(0, 20);
    return root_split_gap(a, b, c, s.any(), s.any(), m, n);
  });
}

FuzzResult fuzz_root_average(std::uint64_t seed, std::size_t n_samples, double slack) {
  Sampler s(seed);
  return run(n_samples, slack, [&] {
    double a = s.nonneg(), c = s.nonneg();
    if (a < c) std::swap(a, c);
    if (s.edge()) c = a;
    const std::size_t n = s.count(2, 50);
    return root_average_gap(a, c, s.any(), n);
  });
}

}  // namespace endowrisk
