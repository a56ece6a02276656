#include "ruellelab/complexop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ruellelab/errors.hpp"
#include "ruellelab/util.hpp"

namespace ruellelab {

ComplexFn complex_weight_fn(const SuspensionModel& model, const NormalizedPotential& np, double b,
                            int k) {
  RealFn fa = np.f_a.refine(k);
  RealFn tau = model.roof.refine(k);
  std::vector<std::complex<double>> vals(fa.values().size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    vals[i] = std::complex<double>(fa.values()[i], -b * tau.values()[i]);
  }
  return ComplexFn(model.system, fa.index(), std::move(vals));
}

namespace {

ComplexTransfer assemble_from(const SuspensionModel& model, const NormalizedPotential& np,
                              double a, double b, int depth_offset) {
  int k = std::max(np.f_a.depth(), model.roof.depth()) + depth_offset;
  ComplexFn g = complex_weight_fn(model, np, b, k);
  TransferMatrix<std::complex<double>> m = assemble_matrix_complex(model.system, g, k);

  TransferMatrix<double> ma = assemble_matrix(model.system, np.f_a.refine(k), k);
  double mod_err = (m.entries.cwiseAbs() - ma.entries).cwiseAbs().maxCoeff();
  if (!(mod_err <= 1e-12)) {
    throw NumericalError("complex operator modulus deviates from the real operator by " +
                         std::to_string(mod_err));
  }
  return ComplexTransfer{a, b, k, std::move(m), np};
}

double matrix_inf_norm(const Eigen::MatrixXcd& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

ComplexTransfer assemble_complex(const SuspensionModel& model, double a, double b,
                                 const RpfOptions& opts) {
  NormalizedPotential np =
      normalize(model.system, model.potential, model.roof, a, model.theta, opts);
  return assemble_from(model, np, a, b, 0);
}

SpectralRadiusResult spectral_radius(const ComplexTransfer& op, const RpfOptions& opts) {
  const Eigen::MatrixXcd& m = op.matrix.entries;
  SpectralRadiusResult r;
  if (m.rows() <= opts.dense_threshold) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    double first = 0, second = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      double v = std::abs(es.eigenvalues()(i));
      if (v >= first) {
        second = first;
        first = v;
      } else if (v > second) {
        second = v;
      }
    }
    r.value = first;
    r.second_modulus = second;
    return r;
  }

  // Gelfand: s_j = log ||M^(2^j)||_inf / 2^j decreases to log(radius) with an
  // O(2^-j) correction; Richardson-extrapolate consecutive values.
  r.approximate = true;
  r.second_modulus = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXcd b = m;
  double log_scale = 0;
  double prev_s = std::numeric_limits<double>::infinity();
  double extrapolated = 0;
  double delta = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= 40; ++j) {
    double n = matrix_inf_norm(b);
    if (n == 0) {
      r.value = 0;
      r.approximate = false;
      r.uncertainty = 0;
      return r;
    }
    log_scale = 2 * (log_scale + std::log(n));
    b = ((b / n) * (b / n)).eval();
    double s = (log_scale + std::log(std::max(matrix_inf_norm(b), 1e-300))) / std::pow(2.0, j);
    if (std::isfinite(prev_s)) {
      extrapolated = 2 * s - prev_s;
      delta = std::abs(s - prev_s);
      if (delta < 5e-8) break;
    }
    prev_s = s;
  }
  r.value = std::exp(extrapolated);
  r.uncertainty = r.value * delta;
  return r;
}

std::vector<ScanRow> contraction_scan(const SuspensionModel& model, double a,
                                      const std::vector<double>& b_grid, int depth_offset,
                                      const RpfOptions& opts) {
  NormalizedPotential np =
      normalize(model.system, model.potential, model.roof, a, model.theta, opts);
  std::vector<ScanRow> rows(b_grid.size());
  parallel_for(b_grid.size(), [&](std::size_t i) {
    ComplexTransfer op = assemble_from(model, np, a, b_grid[i], depth_offset);
    SpectralRadiusResult r = spectral_radius(op, opts);
    rows[i] = ScanRow{b_grid[i], r.value, 1.0 - r.value, r.second_modulus};
  });
  return rows;
}

DecayTable iterate_decay(const SuspensionModel& model, double a, double b, const ComplexFn& h0,
                         int N, int m_max, const RpfOptions& opts) {
  if (N < 1) throw ValidationError("iterate_decay needs N >= 1");
  if (m_max < 1) throw ValidationError("iterate_decay needs m_max >= 1");
  NormalizedPotential np =
      normalize(model.system, model.potential, model.roof, a, model.theta, opts);
  NormalizedPotential np0 =
      a == 0 ? np : normalize(model.system, model.potential, model.roof, 0.0, model.theta, opts);
  GibbsMeasure nu(model.system, np0.f_a, np0.f_a.depth(), opts);

  DecayTable out;
  ComplexFn h = h0;
  NormReport nr = norm_theta_b(h, model.theta, std::max(1.0, std::abs(b)));
  if (nr.theta_b_norm > 1.0) {
    h = std::complex<double>(1.0 / nr.theta_b_norm, 0.0) * h;
    out.rescaled = true;
  }

  int k = std::max(np.f_a.depth(), model.roof.depth());
  int d = std::max(k, h.depth());
  ComplexFn g = complex_weight_fn(model, np, b, d);
  TransferMatrix<std::complex<double>> m = assemble_matrix_complex(model.system, g, d);
  auto masses = nu.mass_table(d);

  ComplexFn hd = h.refine(d);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(hd.values().size()));
  for (std::size_t i = 0; i < hd.values().size(); ++i) v(static_cast<Eigen::Index>(i)) = hd.values()[i];

  auto l2 = [&](const Eigen::VectorXcd& w) {
    double acc = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      acc += (*masses)[static_cast<std::size_t>(i)] * std::norm(w(i));
    }
    return acc;
  };

  out.values.push_back(l2(v));
  for (int step = 1; step <= m_max; ++step) {
    for (int r = 0; r < N; ++r) v = m.entries * v;
    out.values.push_back(l2(v));
  }
  out.rho = fit_geometric_rate(out.values, 1e-26 * std::max(1.0, out.values.front()));
  return out;
}

ContractionCertificate certify_eventually_contracting(const SuspensionModel& model, double a0,
                                                      double b0, double b_max, double grid_step,
                                                      double rho_target, const RpfOptions& opts) {
  if (!(rho_target > 0 && rho_target < 1)) throw ValidationError("rho_target must lie in (0,1)");
  if (!(b0 >= 1)) throw ValidationError("certify_eventually_contracting needs b0 >= 1");
  if (!(grid_step > 0)) throw ValidationError("grid_step must be positive");
  if (!(b_max >= b0)) throw ValidationError("b_max must be >= b0");
  if (!(a0 >= 0)) throw ValidationError("a0 must be >= 0");

  std::vector<double> grid;
  for (double b = b0; b <= b_max + 1e-12; b += grid_step) grid.push_back(b);

  ContractionCertificate cert;
  cert.rho_target = rho_target;
  cert.a0 = a0;
  cert.b0 = b0;
  cert.b_max = b_max;
  cert.grid_step = grid_step;
  cert.note = "grid certificate: spectral radii verified at the listed grid points only; "
              "no claim is made between grid points";

  std::vector<double> a_values{0.0};
  if (a0 > 0) {
    a_values = {-a0, 0.0, a0};
  }
  for (double a : a_values) {
    std::vector<ScanRow> rows = contraction_scan(model, a, grid, 0, opts);
    for (const ScanRow& row : rows) {
      if (!(row.spectral_radius <= rho_target)) {
        cert.pass = false;
        cert.counterexample_a = a;
        cert.counterexample_b = row.b;
        cert.counterexample_radius = row.spectral_radius;
        return cert;
      }
    }
  }
  cert.pass = true;
  return cert;
}

}  // namespace ruellelab
