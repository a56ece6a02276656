#include "ruellelab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include <Eigen/Eigenvalues>

#include "ruellelab/errors.hpp"
#include "ruellelab/util.hpp"

namespace ruellelab {

namespace {

template <typename Scalar, typename Fn>
TransferMatrix<Scalar> assemble_impl(const SymbolicSystem& system, const Fn& g, int k) {
  if (k < 1) throw ValidationError("block depth must be >= 1");
  if (k < g.depth()) throw ValidationError("block depth below potential depth");
  auto idx = make_word_index(system, k);
  const std::size_t n = idx->size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
  m.setZero();
  Word u(static_cast<std::size_t>(k));
  for (std::size_t wi = 0; wi < n; ++wi) {
    const Word& w = idx->words()[wi];
    Scalar weight = std::exp(g.evaluate(w));
    std::copy(w.begin() + 1, w.end(), u.begin());
    for (Symbol j : system.successors(w.back())) {
      u.back() = j;
      std::ptrdiff_t ui = idx->index_of(u, 0);
      if (ui >= 0) m(static_cast<Eigen::Index>(ui), static_cast<Eigen::Index>(wi)) = weight;
    }
  }
  return TransferMatrix<Scalar>{system, k, idx, std::move(m)};
}

bool matrix_digraph_irreducible(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index s = 0; s < n; ++s) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<char> queued(static_cast<std::size_t>(n), 0);
    std::queue<Eigen::Index> q;
    q.push(s);
    queued[static_cast<std::size_t>(s)] = 1;
    while (!q.empty()) {
      Eigen::Index u = q.front();
      q.pop();
      for (Eigen::Index v = 0; v < n; ++v) {
        if (m(v, u) != 0 && !seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          if (!queued[static_cast<std::size_t>(v)]) {
            queued[static_cast<std::size_t>(v)] = 1;
            q.push(v);
          }
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
  }
  return true;
}

struct PerronPair {
  double lambda;
  Eigen::VectorXd right;
  Eigen::VectorXd left;
};

Eigen::VectorXd positive_direction(Eigen::VectorXd v, const char* what) {
  double s = v.sum();
  if (s < 0) v = -v;
  double mn = v.minCoeff();
  double mx = v.maxCoeff();
  if (!(mn > -1e-9 * std::max(1.0, mx))) {
    throw NumericalError(std::string(what) + ": leading eigenvector is not positive");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::max(v(i), 0.0);
  if (!(v.minCoeff() > 0)) {
    // Irreducibility makes the Perron vector strictly positive; zero entries
    // here mean the eigensolve degenerated.
    throw NumericalError(std::string(what) + ": leading eigenvector has zero entries");
  }
  return v;
}

Eigen::VectorXd dense_perron_vector(const Eigen::MatrixXd& m, double lambda, const char* what) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  const auto& vals = es.eigenvalues();
  Eigen::Index best = -1;
  double best_err = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    double err = std::abs(vals(i) - std::complex<double>(lambda, 0));
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  if (best < 0) throw NumericalError(std::string(what) + ": eigensolver returned no eigenvalues");
  Eigen::VectorXcd vc = es.eigenvectors().col(best);
  // Rotate the phase so the vector is (approximately) real.
  Eigen::Index arg_max = 0;
  vc.cwiseAbs().maxCoeff(&arg_max);
  std::complex<double> phase = vc(arg_max) / std::abs(vc(arg_max));
  vc /= phase;
  return positive_direction(vc.real(), what);
}

PerronPair perron_dense(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  double lambda = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    lambda = std::max(lambda, std::abs(es.eigenvalues()(i)));
  }
  PerronPair p;
  p.lambda = lambda;
  p.right = dense_perron_vector(m, lambda, "rpf right vector");
  p.left = dense_perron_vector(m.transpose(), lambda, "rpf left vector");
  return p;
}

// Matrix of L_g acting on its invariant subspace of depth-(k-1) tables,
// k = depth(g) >= 2. Column w' feeds rows u' = w'[1:] + j with weight
// exp(g(w' + j)); the Perron right vector is the eigenfunction of L_g
// expressed directly at depth k-1 (no lossy table reduction).
Eigen::MatrixXd assemble_collapsed(const SymbolicSystem& system, const RealFn& g, int k) {
  auto idx = make_word_index(system, k - 1);
  const std::size_t n = idx->size();
  Eigen::MatrixXd m(n, n);
  m.setZero();
  Word ext(static_cast<std::size_t>(k));
  Word u(static_cast<std::size_t>(k - 1));
  for (std::size_t wi = 0; wi < n; ++wi) {
    const Word& w = idx->words()[wi];
    std::copy(w.begin(), w.end(), ext.begin());
    std::copy(w.begin() + 1, w.end(), u.begin());
    for (Symbol j : system.successors(w.back())) {
      ext.back() = j;
      u.back() = j;
      std::ptrdiff_t ui = idx->index_of(u, 0);
      if (ui >= 0) {
        m(static_cast<Eigen::Index>(ui), static_cast<Eigen::Index>(wi)) = std::exp(g.evaluate(ext));
      }
    }
  }
  return m;
}

PerronPair perron_power(const Eigen::MatrixXd& m, double tol, int max_iters) {
  // Shifted power iteration: m + shift*I is primitive for irreducible m, so
  // the iteration converges even for periodic sparsity patterns.
  const Eigen::Index n = m.rows();
  const double shift = std::max(1.0, m.cwiseAbs().maxCoeff());
  Eigen::MatrixXd b = m + shift * Eigen::MatrixXd::Identity(n, n);
  auto iterate = [&](const Eigen::MatrixXd& mat) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    v /= v.sum();
    double lambda = 0;
    for (int it = 0; it < max_iters; ++it) {
      Eigen::VectorXd w = mat * v;
      double s = w.sum();
      if (!(s > 0)) throw NumericalError("power iteration collapsed to zero");
      w /= s;
      double diff = (w - v).cwiseAbs().maxCoeff();
      v = w;
      lambda = s;
      if (diff < tol) return std::make_pair(lambda, v);
    }
    throw NumericalError("power iteration did not converge within " + std::to_string(max_iters) +
                         " iterations; last eigenvalue estimate " + std::to_string(lambda - shift));
  };
  auto [lr, vr] = iterate(b);
  auto [ll, vl] = iterate(b.transpose());
  PerronPair p;
  p.lambda = 0.5 * ((lr - shift) + (ll - shift));
  p.right = vr;
  p.left = vl;
  return p;
}

}  // namespace

TransferMatrix<double> assemble_matrix(const SymbolicSystem& system, const RealFn& g, int k) {
  return assemble_impl<double>(system, g, k);
}

TransferMatrix<std::complex<double>> assemble_matrix_complex(const SymbolicSystem& system,
                                                             const ComplexFn& g, int k) {
  return assemble_impl<std::complex<double>>(system, g, k);
}

SpectralData rpf_data(const TransferMatrix<double>& m, const RpfOptions& opts) {
  if (m.entries.rows() == 0) throw ValidationError("empty transfer matrix");
  if ((m.entries.array() < 0).any()) throw ValidationError("rpf_data needs a nonnegative matrix");
  if (!matrix_digraph_irreducible(m.entries)) throw NumericalError("RPF requires irreducibility");

  PerronPair p = m.entries.rows() <= opts.dense_threshold
                     ? perron_dense(m.entries)
                     : perron_power(m.entries, opts.tol, opts.max_iters);

  // Fix the gauge: sum(nu) = 1, sum(h * nu) = 1.
  Eigen::VectorXd nu = p.left / p.left.sum();
  Eigen::VectorXd h = p.right / p.right.dot(nu);

  double scale = std::max(1.0, p.lambda);
  double res_r = (m.entries * h - p.lambda * h).cwiseAbs().maxCoeff() / (scale * h.cwiseAbs().maxCoeff());
  double res_l =
      (m.entries.transpose() * nu - p.lambda * nu).cwiseAbs().maxCoeff() / (scale * nu.cwiseAbs().maxCoeff());
  double residual = std::max(res_r, res_l);
  if (!(residual <= 1e-10)) {
    throw NumericalError("RPF eigen-solve residual too large: " + std::to_string(residual));
  }

  std::vector<double> h_vals(h.data(), h.data() + h.size());
  std::vector<double> nu_vals(nu.data(), nu.data() + nu.size());
  return SpectralData{p.lambda, RealFn(m.system, m.index, std::move(h_vals)), std::move(nu_vals),
                      std::log(p.lambda), residual};
}

double pressure(const SymbolicSystem& system, const RealFn& g, const RpfOptions& opts) {
  return rpf_data(assemble_matrix(system, g, std::max(1, g.depth())), opts).pressure;
}

double solve_P_f(const SymbolicSystem& system, const RealFn& f, const RealFn& tau, double tol,
                 const RpfOptions& opts) {
  if (!(tol > 0)) throw ValidationError("tolerance must be positive");
  double tau_min = *std::min_element(tau.values().begin(), tau.values().end());
  double tau_max = *std::max_element(tau.values().begin(), tau.values().end());
  if (!(tau_min > 0)) throw ValidationError("solve_P_f requires a strictly positive roof");

  int k = std::max({1, f.depth(), tau.depth()});
  auto pr = [&](double s) {
    RealFn g = f - (s * tau);
    return rpf_data(assemble_matrix(system, g.refine(k), k), opts).pressure;
  };

  double pr0 = pr(0.0);
  double lo = pr0 / tau_max - 1.0;
  double hi = pr0 / tau_min + 1.0;
  double pr_lo = pr(lo);
  double pr_hi = pr(hi);
  // The slope bound guarantees a sign change between the brackets for
  // moderate data; expand defensively for extreme potentials.
  for (int guard = 0; pr_lo < 0 && guard < 64; ++guard) {
    lo -= 1.0 + (-pr_lo) / tau_min;
    pr_lo = pr(lo);
  }
  for (int guard = 0; pr_hi > 0 && guard < 64; ++guard) {
    hi += 1.0 + pr_hi / tau_min;
    pr_hi = pr(hi);
  }
  if (!(pr_lo >= 0 && pr_hi <= 0)) throw NumericalError("solve_P_f failed to bracket the pressure root");

  double mid = 0;
  for (int it = 0; it < 200; ++it) {
    // Secant proposal clipped to the bracket, bisection fallback.
    double denom = pr_hi - pr_lo;
    double prop = denom != 0 ? lo + (hi - lo) * (pr_lo / (pr_lo - pr_hi)) : 0.5 * (lo + hi);
    if (!(prop > lo && prop < hi)) prop = 0.5 * (lo + hi);
    mid = prop;
    double pm = pr(mid);
    if (std::abs(pm) <= tol) return mid;
    if (pm > 0) {
      lo = mid;
      pr_lo = pm;
    } else {
      hi = mid;
      pr_hi = pm;
    }
    if (hi - lo < 1e-16 * std::max(1.0, std::abs(mid))) break;
  }
  double res = std::abs(pr(mid));
  if (res <= std::max(tol, 1e-11)) return mid;
  throw NumericalError("solve_P_f did not reach tolerance; residual " + std::to_string(res));
}

RealFn reduce_with_tolerance(const RealFn& fn, double tol) {
  int d = fn.depth();
  RealFn cur = fn;
  while (d > 1) {
    auto idx = make_word_index(fn.system(), d - 1);
    std::vector<double> sum(idx->size(), 0.0);
    std::vector<double> cnt(idx->size(), 0.0);
    std::vector<double> lo(idx->size(), std::numeric_limits<double>::infinity());
    std::vector<double> hi(idx->size(), -std::numeric_limits<double>::infinity());
    const auto& ws = cur.words();
    for (std::size_t i = 0; i < ws.size(); ++i) {
      std::size_t g = static_cast<std::size_t>(idx->index_of(ws[i], 0));
      double v = cur.values()[i];
      sum[g] += v;
      cnt[g] += 1;
      lo[g] = std::min(lo[g], v);
      hi[g] = std::max(hi[g], v);
    }
    double spread = 0;
    double scale = std::max(1e-300, sup_norm(cur));
    for (std::size_t g = 0; g < idx->size(); ++g) spread = std::max(spread, (hi[g] - lo[g]) / scale);
    if (spread > tol) break;
    std::vector<double> vals(idx->size());
    for (std::size_t g = 0; g < idx->size(); ++g) vals[g] = sum[g] / cnt[g];
    cur = RealFn(fn.system(), idx, std::move(vals));
    --d;
  }
  return cur;
}

NormalizedPotential normalize(const SymbolicSystem& system, const RealFn& f, const RealFn& tau,
                              double a, double theta, const RpfOptions& opts) {
  check_theta(theta);
  double P_f = solve_P_f(system, f, tau, 1e-13, opts);
  int k_in = std::max({1, f.depth(), tau.depth()});
  RealFn g_a = (f - ((P_f + a) * tau)).refine(k_in);
  SpectralData data = rpf_data(assemble_matrix(system, g_a, k_in), opts);

  RealFn f_a = [&]() {
    if (k_in >= 2) {
      // The eigenfunction only depends on the first k-1 symbols; solve for it
      // directly on that subspace so the cocycle identity holds to the
      // eigensolver residual rather than to a table-averaging tolerance.
      Eigen::MatrixXd b = assemble_collapsed(system, g_a, k_in);
      PerronPair p = b.rows() <= opts.dense_threshold ? perron_dense(b)
                                                      : perron_power(b, opts.tol, opts.max_iters);
      auto idx_h = make_word_index(system, k_in - 1);
      RealFn h_red(system, idx_h,
                   std::vector<double>(p.right.data(), p.right.data() + p.right.size()));
      double log_lambda = std::log(p.lambda);
      auto idx = make_word_index(system, k_in);
      std::vector<double> corr(idx->size());
      for (std::size_t i = 0; i < idx->size(); ++i) {
        const Word& w = idx->words()[i];
        corr[i] = std::log(h_red.evaluate_at(w, 0)) - std::log(h_red.evaluate_at(w, 1)) - log_lambda;
      }
      return g_a + RealFn(system, idx, std::move(corr));
    }
    const RealFn& h1 = data.eigenfunction;
    double log_lambda = std::log(data.lambda);
    double spread = (*std::max_element(h1.values().begin(), h1.values().end()) -
                     *std::min_element(h1.values().begin(), h1.values().end())) /
                    sup_norm(h1);
    if (spread <= 1e-12) {
      // Constant eigenfunction: the cocycle correction vanishes.
      return g_a - RealFn::constant(system, 1, log_lambda);
    }
    auto idx = make_word_index(system, 2);
    std::vector<double> corr(idx->size());
    for (std::size_t i = 0; i < idx->size(); ++i) {
      const Word& w = idx->words()[i];
      corr[i] = std::log(h1.evaluate_at(w, 0)) - std::log(h1.evaluate_at(w, 1)) - log_lambda;
    }
    return g_a + RealFn(system, idx, std::move(corr));
  }();

  // M_a 1 = 1 must hold to machine accuracy; verify on the assembled matrix.
  TransferMatrix<double> m_a = assemble_matrix(system, f_a, f_a.depth());
  double row_err = (m_a.entries.rowwise().sum() - Eigen::VectorXd::Ones(m_a.entries.rows()))
                       .cwiseAbs()
                       .maxCoeff();
  if (!(row_err <= 1e-12)) {
    throw NumericalError("normalized operator row sums deviate from 1 by " + std::to_string(row_err));
  }

  double T = std::max({sup_norm(f_a), theta_seminorm(f_a, theta), theta_seminorm(tau, theta)});
  return NormalizedPotential{std::move(f_a), std::move(data), P_f, a, T};
}

GibbsMeasure::GibbsMeasure(const SymbolicSystem& system, const RealFn& f0, int depth_out,
                           const RpfOptions& opts)
    : system_(system),
      generator_(f0),
      depth_out_(depth_out),
      pi_index_(f0.index()),
      cache_(std::make_shared<MassCache>()) {
  if (depth_out_ < f0.depth()) throw ValidationError("gibbs depth_out below generator depth");
  TransferMatrix<double> m0 = assemble_matrix(system_, generator_, generator_.depth());
  SpectralData sd = rpf_data(m0, opts);
  if (std::abs(sd.lambda - 1.0) > 1e-9) {
    throw ValidationError("Gibbs generator is not normalized (leading eigenvalue " +
                          std::to_string(sd.lambda) + ")");
  }
  pi_ = sd.eigenmeasure;

  // The ratio nu(C)/e^{f0_m(y)} for |C| = m >= k depends only on the final
  // k-window t of C and the first k-1 symbols e of y beyond C:
  // ratio = pi(t) / exp(f0_k(t.e)). Scan those pairs, then the short
  // cylinders m < k directly.
  const int k = generator_.depth();
  c1_ = std::numeric_limits<double>::infinity();
  c2_ = 0;
  auto consider = [&](double ratio) {
    c1_ = std::min(c1_, ratio);
    c2_ = std::max(c2_, ratio);
  };
  for (std::size_t ti = 0; ti < pi_index_->size(); ++ti) {
    const Word& t = pi_index_->words()[ti];
    Word y = t;
    // Extend by k-1 admissible symbols in all ways (k = 1 needs none).
    std::function<void(int)> extend = [&](int remaining) {
      if (remaining == 0) {
        consider(pi_[ti] / std::exp(generator_.birkhoff_sum(y, k)));
        return;
      }
      for (Symbol s : system_.successors(y.back())) {
        y.push_back(s);
        extend(remaining - 1);
        y.pop_back();
      }
    };
    extend(k - 1);
  }
  for (int m = 1; m < k; ++m) {
    auto idx = make_word_index(system_, m);
    for (const Word& w : idx->words()) {
      Word y = w;
      std::function<void(int)> extend = [&](int remaining) {
        if (remaining == 0) {
          consider(mass(w) / std::exp(generator_.birkhoff_sum(y, m)));
          return;
        }
        for (Symbol s : system_.successors(y.back())) {
          y.push_back(s);
          extend(remaining - 1);
          y.pop_back();
        }
      };
      extend(k - 1);
    }
  }
}

double GibbsMeasure::mass(const Word& w) const {
  if (!system_.is_admissible(w)) return 0.0;
  const int k = generator_.depth();
  const int m = static_cast<int>(w.size());
  if (m >= k) {
    double birkhoff = generator_.birkhoff_sum(w, m - k);
    Word tail(w.end() - k, w.end());
    std::ptrdiff_t ti = pi_index_->index_of(tail, 0);
    return std::exp(birkhoff) * pi_[static_cast<std::size_t>(ti)];
  }
  // Marginal of the depth-k stationary masses over the prefix w.
  double acc = 0;
  for (std::size_t ti = 0; ti < pi_index_->size(); ++ti) {
    const Word& t = pi_index_->words()[ti];
    if (std::equal(w.begin(), w.end(), t.begin())) acc += pi_[ti];
  }
  return acc;
}

std::shared_ptr<const std::vector<double>> GibbsMeasure::mass_table(int d) const {
  std::lock_guard<std::mutex> lock(cache_->mutex);
  auto it = cache_->tables.find(d);
  if (it != cache_->tables.end()) return it->second;
  auto idx = make_word_index(system_, d);
  auto table = std::make_shared<std::vector<double>>(idx->size());
  for (std::size_t i = 0; i < idx->size(); ++i) (*table)[i] = mass(idx->words()[i]);
  cache_->tables[d] = table;
  return table;
}

GibbsMeasure gibbs_measure(const SymbolicSystem& system, const RealFn& f, const RealFn& tau,
                           double theta, int depth_out, const RpfOptions& opts) {
  NormalizedPotential np = normalize(system, f, tau, 0.0, theta, opts);
  return GibbsMeasure(system, np.f_a, std::max(depth_out, np.f_a.depth()), opts);
}

ConvergenceTable rpf_convergence_rate(const SymbolicSystem& system, const RealFn& f,
                                      const RealFn& tau, double theta, const RealFn& w, int n_max,
                                      const RpfOptions& opts) {
  if (n_max < 4) throw ValidationError("rpf_convergence_rate needs n_max >= 4");
  NormalizedPotential np = normalize(system, f, tau, 0.0, theta, opts);
  int d = std::max(np.f_a.depth(), w.depth());
  GibbsMeasure nu(system, np.f_a, d, opts);
  double target = nu.integrate(w.refine(d));

  TransferMatrix<double> m0 = assemble_matrix(system, np.f_a, d);
  Eigen::VectorXd v(m0.index->size());
  RealFn wr = w.refine(d);
  for (std::size_t i = 0; i < m0.index->size(); ++i) v(static_cast<Eigen::Index>(i)) = wr.values()[i];

  ConvergenceTable out;
  for (int n = 1; n <= n_max; ++n) {
    v = m0.entries * v;
    out.distances.push_back((v.array() - target).abs().maxCoeff());
  }
  out.rate = fit_geometric_rate(out.distances, 1e-13 * std::max(1.0, std::abs(target)));
  return out;
}

}  // namespace ruellelab
