#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ruellelab {

// Number of worker threads for data-parallel maps. Reads RUELLELAB_THREADS
// (positive integer); falls back to the hardware concurrency, capped at 16.
int thread_count();

// Runs fn(i) for i in [0, n). Results must be written to preallocated slots
// so the output is identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Formats a double with 17 significant digits (round-trip safe).
std::string format_double(double x);

// Least-squares line fit y ~ intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Geometric-decay fit: rate r such that v[m] ~ C * r^m, least squares on
// log v over the tail half of the indices where v[m] > floor_value.
// Returns 0 when fewer than two usable points remain.
double fit_geometric_rate(const std::vector<double>& values, double floor_value = 1e-300);

// Deterministic splittable RNG streams (xoshiro-free: std::mt19937_64 seeded
// by SplitMix64 of (seed, stream)).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ruellelab
