#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "ruellelab/potential.hpp"
#include "ruellelab/sft.hpp"

namespace ruellelab {

// Exact matrix of the transfer operator (L_g h)(x) = sum_{sigma y = x}
// e^{g(y)} h(y) acting on depth-k tables. Entry (u, w) is e^{g(w)} when the
// word w can slide onto u (w_1..w_{k-1} = u_0..u_{k-2} and the final pair is
// admissible), else 0.
template <typename Scalar>
struct TransferMatrix {
  SymbolicSystem system;
  int block_depth;
  WordIndexPtr index;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> entries;
};

TransferMatrix<double> assemble_matrix(const SymbolicSystem& system, const RealFn& g, int k);
TransferMatrix<std::complex<double>> assemble_matrix_complex(const SymbolicSystem& system,
                                                             const ComplexFn& g, int k);

// One application of L_g to a locally constant function, without
// materializing a matrix. The result has depth max(1, depth(g)-1, depth(h)-1).
template <typename SG, typename SH>
auto apply_transfer(const SymbolicSystem& system, const LocallyConstantFn<SG>& g,
                    const LocallyConstantFn<SH>& h) {
  using Out = decltype(std::exp(SG(0)) * SH(0));
  int d_out = std::max({1, g.depth() - 1, h.depth() - 1});
  auto idx = make_word_index(system, d_out);
  std::vector<Out> vals(idx->size(), Out(0));
  Word buf;
  for (std::size_t ui = 0; ui < idx->size(); ++ui) {
    const Word& u = idx->words()[ui];
    buf.assign(1, 0);
    buf.insert(buf.end(), u.begin(), u.end());
    Out acc(0);
    for (Symbol j : system.predecessors(u[0])) {
      buf[0] = j;
      acc += std::exp(g.evaluate(buf)) * h.evaluate(buf);
    }
    vals[ui] = acc;
  }
  return LocallyConstantFn<Out>(system, idx, std::move(vals));
}

struct RpfOptions {
  int dense_threshold = 512;  // above this, power iteration instead of full eigen-solve
  double tol = 1e-13;
  int max_iters = 100000;
};

// Ruelle-Perron-Frobenius data of a nonnegative irreducible transfer matrix:
// simple leading eigenvalue, positive right eigenfunction, left probability
// eigenmeasure, normalized by sum(nu) = 1 and sum(h * nu) = 1.
struct SpectralData {
  double lambda = 0;
  RealFn eigenfunction;
  std::vector<double> eigenmeasure;
  double pressure = 0;
  double residual = 0;
};

SpectralData rpf_data(const TransferMatrix<double>& m, const RpfOptions& opts = {});

// log of the Perron eigenvalue at block depth = depth(g).
double pressure(const SymbolicSystem& system, const RealFn& g, const RpfOptions& opts = {});

// Unique root of s -> Pr(f - s tau), bracketed via the slope bound
// d/ds Pr <= -min(tau).
double solve_P_f(const SymbolicSystem& system, const RealFn& f, const RealFn& tau, double tol,
                 const RpfOptions& opts = {});

// f^{(a)} = f - (P_f + a) tau + ln h_a - ln h_a o sigma - ln lambda_a,
// the gauge in which the weighted operator M_a has M_a 1 = 1.
struct NormalizedPotential {
  RealFn f_a;
  SpectralData data;  // RPF data of L_{f - (P_f + a) tau}
  double P_f = 0;
  double a = 0;
  double T = 0;  // max of ||f_a||_0, |f_a|_theta, |tau|_theta
};

NormalizedPotential normalize(const SymbolicSystem& system, const RealFn& f, const RealFn& tau,
                              double a, double theta, const RpfOptions& opts = {});

// Shift-invariant Gibbs measure of the normalized potential f^{(0)}: exact
// cylinder masses nu([w]) = exp(f0 Birkhoff along w) * pi(last k-window) for
// |w| >= k, marginals below depth k.
class GibbsMeasure {
public:
  GibbsMeasure(const SymbolicSystem& system, const RealFn& f0, int depth_out,
               const RpfOptions& opts = {});

  int block_depth() const { return generator_.depth(); }
  int depth_out() const { return depth_out_; }
  const RealFn& generator() const { return generator_; }
  const SymbolicSystem& system() const { return system_; }
  const std::vector<double>& stationary() const { return pi_; }

  double mass(const Word& w) const;

  // Ratio bounds nu(C)/e^{f0_m(y)} over all cylinders (any length >= 1) and
  // all points y in them; c1 > 0 always for irreducible systems.
  double c1() const { return c1_; }
  double c2() const { return c2_; }

  // Cached table of masses of all admissible depth-d words.
  std::shared_ptr<const std::vector<double>> mass_table(int d) const;

  template <typename S>
  S integrate(const LocallyConstantFn<S>& h) const {
    int d = std::max(block_depth(), h.depth());
    auto table = mass_table(d);
    auto idx = make_word_index(system_, d);
    S acc(0);
    for (std::size_t i = 0; i < idx->size(); ++i) {
      acc += S((*table)[i]) * h.evaluate(idx->words()[i]);
    }
    return acc;
  }

private:
  struct MassCache {
    std::mutex mutex;
    std::map<int, std::shared_ptr<const std::vector<double>>> tables;
  };

  SymbolicSystem system_;
  RealFn generator_;
  int depth_out_;
  std::vector<double> pi_;  // stationary masses at block depth
  WordIndexPtr pi_index_;
  double c1_ = 0, c2_ = 0;
  std::shared_ptr<MassCache> cache_;
};

// Gibbs measure of the model data (f, tau): builds f^{(0)} via normalize(a=0).
GibbsMeasure gibbs_measure(const SymbolicSystem& system, const RealFn& f, const RealFn& tau,
                           double theta, int depth_out, const RpfOptions& opts = {});

// Sup-norm distances ||L_{f0}^n w - integral(w) * 1||_0 for n = 1..n_max and
// the fitted geometric rate (0 for exact rank-1 convergence).
struct ConvergenceTable {
  std::vector<double> distances;
  double rate = 0;
};

ConvergenceTable rpf_convergence_rate(const SymbolicSystem& system, const RealFn& f,
                                      const RealFn& tau, double theta, const RealFn& w, int n_max,
                                      const RpfOptions& opts = {});

// Tolerance-aware depth reduction for eigenfunction tables carrying floating
// point noise: finds the smallest depth whose prefix classes have relative
// spread <= tol and averages within classes.
RealFn reduce_with_tolerance(const RealFn& fn, double tol);

}  // namespace ruellelab
