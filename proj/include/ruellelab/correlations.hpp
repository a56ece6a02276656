#pragma once

#include <cstdint>
#include <vector>

#include "ruellelab/models.hpp"
#include "ruellelab/transfer.hpp"

namespace ruellelab {

// Flow observable: locally constant in the base symbol window, piecewise
// linear in the normalized height s/tau in [0,1]. An empty profile means the
// height factor is identically 1.
struct Observable {
  RealFn base;
  std::vector<double> height_profile;
};

// Piecewise-linear interpolation of the profile at u in [0,1].
double profile_value(const Observable& a, double u);

// Exact flow-measure mean int A d(mu_flow) for mu_flow = (nu x Leb)/int tau.
double flow_mean(const SuspensionModel& model, const Observable& a, const GibbsMeasure& nu);

// Exact int A^2 d(mu_flow); the t = 0 variance oracle together with
// flow_mean.
double flow_mean_square(const SuspensionModel& model, const Observable& a,
                        const GibbsMeasure& nu);

// Stationary sample of the depth-k block Markov chain whose marginals are the
// Gibbs cylinder masses; deterministic under seed.
std::vector<Symbol> sample_gibbs_path(const SuspensionModel& model, std::size_t length,
                                      std::uint64_t seed);

struct CorrelationTable {
  std::vector<double> t_grid;
  std::vector<double> c_values;
  std::vector<double> stderrs;
  std::size_t samples = 0;  // flow sample points actually used
  std::uint64_t seed = 0;
  int replicas = 0;
  double mean_a = 0;  // exact flow means used for centering
  double mean_b = 0;
};

// Monte-Carlo estimate of C(t) = int A . B o phi_t d(mu_flow) - mean_A mean_B
// on the grid, from `replicas` independent flow-stationary trajectories with
// batch-jackknife standard errors merged by inverse variance. Estimates and
// errors are reproducible given (seed, replicas).
CorrelationTable correlation(const SuspensionModel& model, const Observable& a,
                             const Observable& b, const std::vector<double>& t_grid,
                             std::size_t samples, std::uint64_t seed, bool center = true,
                             int replicas = 8);

struct DecayFit {
  double c = 0;          // decay rate: |C(t)| ~ prefactor * e^{-c t}
  double prefactor = 0;
  double r2 = 0;
  std::size_t points = 0;
};

// Least squares on log|C(t)| over grid points whose signal exceeds 3 standard
// errors; needs at least 8 such points.
DecayFit fit_decay_rate(const CorrelationTable& table);

}  // namespace ruellelab
