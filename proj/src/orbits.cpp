#include "ruellelab/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruellelab/errors.hpp"
#include "ruellelab/transfer.hpp"
#include "ruellelab/util.hpp"

namespace ruellelab {

namespace {

// Trace of A^n computed in doubles; safe against integer overflow for the
// budget estimate.
std::vector<double> trace_estimates(const SymbolicSystem& system, int n_max) {
  int k = system.alphabet_size();
  std::vector<double> a(static_cast<std::size_t>(k) * k, 0.0);
  std::vector<double> p(a.size(), 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) a[i * k + j] = system.allowed(i, j) ? 1.0 : 0.0;
    p[i * k + i] = 1.0;
  }
  std::vector<double> traces;
  std::vector<double> next(a.size());
  for (int n = 1; n <= n_max; ++n) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < k; ++i) {
      for (int l = 0; l < k; ++l) {
        double v = p[i * k + l];
        if (v == 0) continue;
        for (int j = 0; j < k; ++j) next[i * k + j] += v * a[l * k + j];
      }
    }
    p.swap(next);
    double tr = 0;
    for (int i = 0; i < k; ++i) tr += p[i * k + i];
    traces.push_back(tr);
  }
  return traces;
}

void check_budget(const SymbolicSystem& system, int n_max) {
  // Length-n primitive necklaces number at most tr(A^n)/n.
  double necklaces = 0;
  std::vector<double> traces = trace_estimates(system, n_max);
  for (int n = 1; n <= n_max; ++n) necklaces += traces[n - 1] / n;
  if (!(necklaces <= 1e8) || !std::isfinite(necklaces)) {
    throw ValidationError("orbit enumeration would exceed 1e8 necklaces; choose a smaller bound");
  }
}

bool cyclically_admissible(const SymbolicSystem& system, const Word& w) {
  return system.is_admissible(w) && system.allowed(w.back(), w.front());
}

double cycle_period(const RealFn& roof, const Word& w) {
  int n = static_cast<int>(w.size());
  int need = n + roof.depth() - 1;
  Word ext;
  ext.reserve(static_cast<std::size_t>(need));
  while (static_cast<int>(ext.size()) < need) {
    ext.insert(ext.end(), w.begin(), w.end());
  }
  ext.resize(static_cast<std::size_t>(need));
  return roof.birkhoff_sum(ext, n);
}

// Duval's generator: all Lyndon words of length <= n_max over {0..k-1} in
// lexicographic order.
template <typename Visit>
void lyndon_words(int k, int n_max, Visit&& visit) {
  Word w{0};
  while (true) {
    visit(w);
    int n = static_cast<int>(w.size());
    Word rep;
    rep.reserve(static_cast<std::size_t>(n_max));
    for (int i = 0; i < n_max; ++i) rep.push_back(w[i % n]);
    while (!rep.empty() && rep.back() == k - 1) rep.pop_back();
    if (rep.empty()) return;
    ++rep.back();
    w = std::move(rep);
  }
}

std::vector<int> moebius_table(int n_max) {
  std::vector<int> mu(static_cast<std::size_t>(n_max) + 1, 1);
  for (int n = 2; n <= n_max; ++n) {
    int rem = n;
    int value = 1;
    for (int p = 2; p * p <= rem; ++p) {
      if (rem % p == 0) {
        rem /= p;
        if (rem % p == 0) {
          value = 0;
          break;
        }
        value = -value;
      }
    }
    if (value != 0 && rem > 1) value = -value;
    mu[n] = value;
  }
  return mu;
}

struct ShellSums {
  // Per word length n: sum over primitive orbits of -log(1 - e^{-s period}).
  std::vector<std::complex<double>> terms;
};

ShellSums euler_shells(const SuspensionModel& model, std::complex<double> s, int n_max) {
  ShellSums shells;
  shells.terms.assign(static_cast<std::size_t>(n_max), std::complex<double>(0.0, 0.0));
  if (n_max < 1) return shells;
  check_budget(model.system, n_max);
  lyndon_words(model.system.alphabet_size(), n_max, [&](const Word& w) {
    if (!cyclically_admissible(model.system, w)) return;
    double period = cycle_period(model.roof, w);
    shells.terms[w.size() - 1] -= std::log(1.0 - std::exp(-s * period));
  });
  return shells;
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = 1.0 / std::log(lm);
  double frm = 1.0 / std::log(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::vector<OrbitRecord> primitive_orbits(const SuspensionModel& model, int n_max) {
  if (n_max < 1) throw ValidationError("primitive_orbits needs n_max >= 1");
  check_budget(model.system, n_max);

  std::vector<OrbitRecord> out;
  lyndon_words(model.system.alphabet_size(), n_max, [&](const Word& w) {
    if (!cyclically_admissible(model.system, w)) return;
    out.push_back(OrbitRecord{w, static_cast<int>(w.size()), 0.0});
  });
  parallel_for(out.size(), [&](std::size_t i) {
    out[i].period = cycle_period(model.roof, out[i].necklace);
  });
  std::sort(out.begin(), out.end(), [](const OrbitRecord& a, const OrbitRecord& b) {
    if (a.n != b.n) return a.n < b.n;
    return a.necklace < b.necklace;
  });
  return out;
}

std::vector<std::int64_t> primitive_count_by_trace(const SymbolicSystem& system, int n_max) {
  if (n_max < 1) throw ValidationError("primitive_count_by_trace needs n_max >= 1");
  check_budget(system, n_max);
  std::vector<int> mu = moebius_table(n_max);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_max), 0);
  for (int n = 1; n <= n_max; ++n) {
    std::int64_t acc = 0;
    for (int d = 1; d <= n; ++d) {
      if (n % d != 0) continue;
      acc += static_cast<std::int64_t>(mu[d]) * system.periodic_point_count(n / d);
    }
    if (acc % n != 0) throw NumericalError("Moebius inversion gave a non-integer orbit count");
    counts[n - 1] = acc / n;
  }
  return counts;
}

EntropyResult topological_entropy(const SuspensionModel& model, double tol) {
  if (!(min_roof(model) > 0)) throw ValidationError("topological entropy needs min roof > 0");
  RealFn zero = RealFn::constant(model.system, 1, 0.0);
  EntropyResult result;
  result.h_T = solve_P_f(model.system, zero, model.roof, tol);
  result.residual = std::abs(pressure(model.system, zero - result.h_T * model.roof));
  return result;
}

std::complex<double> periodic_orbit_sum(const SuspensionModel& model, std::complex<double> s,
                                        int n) {
  if (n < 1) throw ValidationError("periodic_orbit_sum needs n >= 1");
  check_budget(model.system, n);
  std::complex<double> acc(0.0, 0.0);
  for (const Word& w : model.system.admissible_words(n)) {
    if (!model.system.allowed(w.back(), w.front())) continue;
    acc += std::exp(-s * cycle_period(model.roof, w));
  }
  return acc;
}

ZetaEuler zeta_euler(const SuspensionModel& model, std::complex<double> s, int n_max) {
  if (n_max < 0) throw ValidationError("zeta_euler needs n_max >= 0");
  ZetaEuler result;
  if (n_max == 0) {
    result.tail_estimate = std::numeric_limits<double>::infinity();
    return result;
  }
  double h_T = topological_entropy(model).h_T;
  if (!(s.real() > h_T)) {
    throw NumericalError("outside certified convergence half-plane: Re(s) = " +
                         std::to_string(s.real()) + " <= h_T = " + std::to_string(h_T));
  }

  ShellSums shells = euler_shells(model, s, n_max);
  std::complex<double> log_zeta(0.0, 0.0);
  for (const auto& t : shells.terms) log_zeta += t;
  result.value = std::exp(log_zeta);

  double last = 0, prev = 0;
  for (const auto& t : shells.terms) {
    double mag = std::abs(t);
    if (mag > 0) {
      prev = last;
      last = mag;
    }
  }
  if (prev > 0 && last > 0 && last < prev) {
    double r = last / prev;
    result.tail_estimate = last * r / (1.0 - r);
  } else {
    result.tail_estimate = std::numeric_limits<double>::infinity();
  }
  return result;
}

ZetaDet zeta_det(const SuspensionModel& model, std::complex<double> s) {
  ComplexFn g = model.roof.map([&](double t) { return -s * t; });
  int k = std::max(1, g.depth());
  TransferMatrix<std::complex<double>> m = assemble_matrix_complex(model.system, g, k);
  Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(m.entries.rows(), m.entries.cols());
  ZetaDet result;
  result.det = (ident - m.entries).determinant();
  result.at_pole = std::abs(result.det) <= 1e-10;
  result.value = 1.0 / result.det;
  return result;
}

double li(double x) {
  if (!(x >= 2.0)) throw ValidationError("li(x) is defined for x >= 2");
  if (x == 2.0) return 0.0;
  double fa = 1.0 / std::log(2.0);
  double fb = 1.0 / std::log(x);
  double m = 0.5 * (2.0 + x);
  double fm = 1.0 / std::log(m);
  double whole = (x - 2.0) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(2.0, x, fa, fm, fb, whole, 1e-11, 60);
}

PntTable pnt_report(const SuspensionModel& model, double lambda_max, int shells) {
  if (!(lambda_max > 0)) throw ValidationError("pnt_report needs lambda_max > 0");
  if (shells < 1) throw ValidationError("pnt_report needs shells >= 1");

  PntTable table;
  table.h_T = topological_entropy(model).h_T;

  double tmin = min_roof(model);
  int n_wanted = static_cast<int>(std::floor(lambda_max / tmin));
  n_wanted = std::max(n_wanted, 1);

  int n_eff = n_wanted;
  {
    std::vector<double> traces = trace_estimates(model.system, n_wanted);
    double total = 0;
    for (int n = 1; n <= n_wanted; ++n) {
      total += traces[n - 1] / n;
      if (!(total <= 1e8) || !std::isfinite(total)) {
        n_eff = n - 1;
        break;
      }
    }
  }
  double lambda_eff = lambda_max;
  if (n_eff < n_wanted) {
    if (n_eff < 1) throw ValidationError("orbit budget exhausted before the first shell");
    lambda_eff = n_eff * tmin;
    table.truncated = true;
    table.warning = "orbit budget 1e8 reached at word length " + std::to_string(n_eff) +
                    "; table truncated to lambda <= " + format_double(lambda_eff);
  }
  table.n_max = n_eff;

  // Stream the periods instead of materializing OrbitRecords: near the
  // budget cap the full record list would not fit in memory.
  std::vector<double> periods;
  {
    std::vector<double> traces = trace_estimates(model.system, n_eff);
    double estimate = 0;
    for (int n = 1; n <= n_eff; ++n) estimate += traces[n - 1] / n;
    periods.reserve(static_cast<std::size_t>(std::min(estimate * 1.05 + 16.0, 2.0e8)));
  }
  lyndon_words(model.system.alphabet_size(), n_eff, [&](const Word& w) {
    if (!cyclically_admissible(model.system, w)) return;
    periods.push_back(cycle_period(model.roof, w));
  });
  std::sort(periods.begin(), periods.end());

  for (int j = 1; j <= shells; ++j) {
    PntRow row;
    row.lambda = lambda_eff * j / shells;
    row.pi = static_cast<std::int64_t>(
        std::upper_bound(periods.begin(), periods.end(), row.lambda) - periods.begin());
    double arg = std::exp(table.h_T * row.lambda);
    if (arg >= 2.0) {
      row.li_value = li(arg);
      row.ratio = row.li_value > 0 ? row.pi / row.li_value
                                   : std::numeric_limits<double>::quiet_NaN();
    } else {
      row.li_value = std::numeric_limits<double>::quiet_NaN();
      row.ratio = std::numeric_limits<double>::quiet_NaN();
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace ruellelab
