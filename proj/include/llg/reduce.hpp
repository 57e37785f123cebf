#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace llg {

/// Fixed-order pairwise summation. Deterministic for a given input sequence
/// regardless of thread count (reductions are never parallelized), and far
/// more accurate than a running sum on long lattices.
inline double pairwise_sum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(std::span<const double>(x.data(), x.size()));
}

/// Compensated (Kahan) accumulator for inner series loops whose length is not
/// known beforehand. Deterministic, sequential.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace llg
