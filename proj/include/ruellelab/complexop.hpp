#pragma once

#include <complex>
#include <vector>

#include "ruellelab/models.hpp"
#include "ruellelab/transfer.hpp"

namespace ruellelab {

// Exact matrix of L_{ab} = L_{f^{(a)} - i b tau}: entries of modulus equal to
// the normalized real operator M_a, phases -b * tau per column word.
struct ComplexTransfer {
  double a = 0;
  double b = 0;
  int block_depth = 1;
  TransferMatrix<std::complex<double>> matrix;
  NormalizedPotential base;
};

ComplexTransfer assemble_complex(const SuspensionModel& model, double a, double b,
                                 const RpfOptions& opts = {});

// Weight table f^{(a)} - i b tau at block depth k.
ComplexFn complex_weight_fn(const SuspensionModel& model, const NormalizedPotential& np, double b,
                            int k);

// Spectral radius of the assembled matrix: exact eigen-solve up to
// opts.dense_threshold blocks, Gelfand iteration ||L^(2^j)||^(1/2^j) with
// Richardson extrapolation above it (approximate = true, uncertainty set).
struct SpectralRadiusResult {
  double value = 0;
  double second_modulus = 0;  // NaN when only the Gelfand path ran
  bool approximate = false;
  double uncertainty = 0;
};

SpectralRadiusResult spectral_radius(const ComplexTransfer& op, const RpfOptions& opts = {});

struct ScanRow {
  double b = 0;
  double spectral_radius = 0;
  double gap = 0;  // 1 - spectral_radius
  double second_modulus = 0;
};

// One row per b, rows computed independently in parallel, output ordered as
// the input grid. depth_offset assembles at block depth k + offset so radius
// stabilization across depths can be observed.
std::vector<ScanRow> contraction_scan(const SuspensionModel& model, double a,
                                      const std::vector<double>& b_grid, int depth_offset = 0,
                                      const RpfOptions& opts = {});

// Table of integrals int |L_{ab}^{mN} h0|^2 dnu for m = 0..m_max against the
// exact Gibbs measure, plus the least-squares geometric rate of the tail.
struct DecayTable {
  std::vector<double> values;
  double rho = 0;
  bool rescaled = false;  // h0 had ||h0||_{theta,b} > 1 and was scaled down
};

DecayTable iterate_decay(const SuspensionModel& model, double a, double b, const ComplexFn& h0,
                         int N, int m_max, const RpfOptions& opts = {});

// Grid check of "eventually contracting": spectral radius <= rho_target for
// a in {-a0, 0, a0} and every grid b in [b0, b_max]. A PASS certifies the
// grid points only; nothing is claimed between them.
struct ContractionCertificate {
  bool pass = false;
  double rho_target = 0;
  double a0 = 0;
  double b0 = 0;
  double b_max = 0;
  double grid_step = 0;
  double counterexample_a = 0;  // valid when !pass
  double counterexample_b = 0;
  double counterexample_radius = 0;
  std::string note;  // states the grid-only scope
};

ContractionCertificate certify_eventually_contracting(const SuspensionModel& model, double a0,
                                                      double b0, double b_max, double grid_step,
                                                      double rho_target,
                                                      const RpfOptions& opts = {});

}  // namespace ruellelab
