#pragma once

#include <cstddef>
#include <cstdint>

namespace endowrisk {

// Algebraic square-root inequalities behind the comparison arguments. Each *_gap
// returns lhs - rhs, which is <= 0 whenever the hypotheses hold.

/// A >= B:  sqrt(C^2 + A^2) <= (A - B) + sqrt(C^2 + B^2).
double root_shift_gap(double a, double b, double c);

/// A >= C >= B, m, n >= 0:
///   sqrt((Bl + Cl)^2 + (m + n) A^2) - sqrt(n) (A - C)
///     <= sqrt(Bl^2 + m B^2) + sqrt(Cl^2 + n C^2) + sqrt(m) (A - B).
double root_split_gap(double a, double b, double c, double b_lambda, double c_lambda,
                      std::size_t m, std::size_t n);

/// n >= 2, A >= C >= 0:
///   sqrt(Bl^2 + C^2 / n) <= sqrt(n - 2) (A - C) + sqrt(Bl^2 + ((n - 1) C - (n - 2) A)^2 / (n - 1)).
double root_average_gap(double a, double c, double b_lambda, std::size_t n);

struct FuzzResult {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_gap = 0.0;  // largest lhs - rhs observed (may be negative)
};

/// Draws hypothesis-satisfying constants from a seeded generator. Roughly one
/// draw in ten is forced onto an equality edge (A = B, A = C, C = B, ...).
FuzzResult fuzz_root_shift(std::uint64_t seed, std::size_t n_samples, double slack = 1e-12);
FuzzResult fuzz_root_split(std::uint64_t seed, std::size_t n_samples, double slack = 1e-12);
FuzzResult fuzz_root_average(std::uint64_t seed, std::size_t n_samples, double slack = 1e-12);

}  // namespace endowrisk
