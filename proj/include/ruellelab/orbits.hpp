#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "ruellelab/models.hpp"

namespace ruellelab {

// Primitive closed orbit of the suspension flow: the lexicographically least
// rotation of its symbol cycle, the cycle length in symbols, and the flow
// period (roof summed once around the cycle on the periodic extension).
struct OrbitRecord {
  Word necklace;
  int n = 0;
  double period = 0;
};

// All primitive cyclically admissible necklaces of length <= n_max, sorted by
// (n, necklace). Enumeration is Lyndon-word generation filtered by cyclic
// admissibility; periods are exact for locally constant roofs.
std::vector<OrbitRecord> primitive_orbits(const SuspensionModel& model, int n_max);

// Expected primitive counts per length from trace data by Moebius inversion:
// count(n) = (1/n) sum_{d | n} mu(d) tr(A^{n/d}).
std::vector<std::int64_t> primitive_count_by_trace(const SymbolicSystem& system, int n_max);

struct EntropyResult {
  double h_T = 0;
  double residual = 0;
};

// Root of s -> Pr(-s tau); growth rate of the suspension flow.
EntropyResult topological_entropy(const SuspensionModel& model, double tol = 1e-12);

// sum over n-periodic symbol sequences x of exp(-s tau_n(x)), by direct
// enumeration; the trace side of the determinant identity.
std::complex<double> periodic_orbit_sum(const SuspensionModel& model, std::complex<double> s,
                                        int n);

struct ZetaEuler {
  std::complex<double> value{1.0, 0.0};
  // Geometric extrapolation of the shell sums of log zeta beyond the last
  // included word length; infinite when the shells do not yet decay.
  double tail_estimate = 0;
};

// Truncated Euler product prod_gamma (1 - e^{-s period(gamma)})^{-1} over
// primitive orbits of word length <= n_max, for Re(s) above the entropy.
ZetaEuler zeta_euler(const SuspensionModel& model, std::complex<double> s, int n_max);

struct ZetaDet {
  std::complex<double> value{0.0, 0.0};
  std::complex<double> det{0.0, 0.0};
  bool at_pole = false;  // |det| <= 1e-10
};

// 1 / det(I - M(s)) with M(s) the block transfer matrix weighted by
// e^{-s tau}; exact meromorphic evaluation for locally constant roofs.
ZetaDet zeta_det(const SuspensionModel& model, std::complex<double> s);

// Logarithmic integral from 2: li(x) = int_2^x du / log u, adaptive
// quadrature with absolute error <= 1e-10.
double li(double x);

struct PntRow {
  double lambda = 0;
  std::int64_t pi = 0;
  double li_value = 0;  // li(e^{h_T lambda}); NaN when the argument is < 2
  double ratio = 0;     // pi / li; NaN with li
};

struct PntTable {
  std::vector<PntRow> rows;
  double h_T = 0;
  int n_max = 0;  // word-length bound actually enumerated
  bool truncated = false;
  std::string warning;
};

// Orbit-counting table on an even grid over [0, lambda_max]: exact pi(lambda),
// the entropy-scaled logarithmic integral, and their ratio. When the implied
// enumeration exceeds the orbit budget the word-length bound and lambda range
// are reduced and a warning is attached.
PntTable pnt_report(const SuspensionModel& model, double lambda_max, int shells);

}  // namespace ruellelab
