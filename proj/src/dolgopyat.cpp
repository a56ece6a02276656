#include "ruellelab/dolgopyat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "ruellelab/complexop.hpp"
#include "ruellelab/errors.hpp"
#include "ruellelab/util.hpp"

namespace ruellelab {

namespace {

NormalizedPotential normalized(const SuspensionModel& model, double a, const RpfOptions& opts) {
  return normalize(model.system, model.potential, model.roof, a, model.theta, opts);
}

// All admissible words of length target_len extending w.
std::vector<Word> extensions(const SymbolicSystem& system, const Word& w, int target_len) {
  std::vector<Word> out;
  Word cur = w;
  std::function<void()> dfs = [&]() {
    if (static_cast<int>(cur.size()) >= target_len) {
      out.push_back(cur);
      return;
    }
    for (Symbol j : system.successors(cur.back())) {
      cur.push_back(j);
      dfs();
      cur.pop_back();
    }
  };
  if (static_cast<int>(w.size()) >= target_len) {
    out.push_back(w);
  } else {
    dfs();
  }
  return out;
}

Word concat(const Word& v, const Word& x) {
  Word out = v;
  out.insert(out.end(), x.begin(), x.end());
  return out;
}

void validate_params(const ContractionParams& params) {
  if (params.N < 1) throw ValidationError("contraction params need N >= 1");
  if (!(params.mu0 > 0 && params.mu0 <= 0.5)) {
    throw ValidationError("mu0 must lie in (0, 1/2]");
  }
  if (params.q1 < 1) throw ValidationError("q1 must be >= 1");
}

void validate_representative(const CylinderFamily& family, const RepresentativeSet& J) {
  if (J.entries.empty()) return;
  std::set<std::size_t> marked_j;
  std::set<std::size_t> covered_c;
  for (const auto& e : J.entries) {
    if (e.i != 1 && e.i != 2) throw ValidationError("representative entry branch index must be 1 or 2");
    if (e.j >= family.D_list.size()) throw ValidationError("representative entry D-index out of range");
    if (!marked_j.insert(e.j).second) {
      throw ValidationError("representative set marks a subcylinder twice");
    }
    covered_c.insert(family.D_parent[e.j]);
  }
  for (std::size_t m = 0; m < family.C_list.size(); ++m) {
    if (!covered_c.count(m)) {
      throw ValidationError("representative set misses maximal cylinder " +
                            word_to_string(family.C_list[m]));
    }
  }
}

// Block length over which the build_J / domination conditions on D_j are
// exact: long enough to pin every evaluation that appears in them.
int block_length(const ContractionParams& params, const CylinderFamily& family, std::size_t j,
                 int depth_h, int depth_H, int depth_fa, int depth_tau) {
  int len = static_cast<int>(family.D_list[j].size());
  len = std::max(len, depth_h - params.N);
  len = std::max(len, depth_H - params.N);
  len = std::max(len, depth_fa - 1);
  len = std::max(len, depth_tau - 1);
  return std::max(len, 1);
}

struct PairwiseDistance {
  double value = 0;
  bool in_cylinder_case = false;
  std::size_t c_index = 0;
};

PairwiseDistance script_distance(const SuspensionModel& model, const CylinderFamily& family,
                                 const Word& u, const Word& u2, int N) {
  PairwiseDistance out;
  if (u == u2) return out;
  if (u.size() != u2.size()) {
    throw ValidationError("script distance is defined for equal-length blocks");
  }
  std::size_t L = 0;
  while (L < u.size() && u[L] == u2[L]) ++L;

  std::size_t min_c = std::numeric_limits<std::size_t>::max();
  for (const Word& c : family.C_list) min_c = std::min(min_c, c.size());

  if (L >= min_c) {
    for (std::ptrdiff_t p = static_cast<std::ptrdiff_t>(L - min_c); p >= 0; --p) {
      for (std::size_t m = 0; m < family.C_list.size(); ++m) {
        const Word& c = family.C_list[m];
        if (c.size() > L - static_cast<std::size_t>(p)) continue;
        if (std::equal(c.begin(), c.end(), u.begin() + p)) {
          double dc = cylinder_diam_theta(model.system, c, model.theta);
          if (dc > 0) {
            out.value = d_theta(u, u2, model.theta) / dc;
            out.in_cylinder_case = true;
            out.c_index = m;
            return out;
          }
        }
      }
    }
  }
  out.value = std::pow(model.theta, -static_cast<double>(N));
  return out;
}

struct KeScan {
  double min_E = 0;
};

KeScan ke_minimal_constant(const SuspensionModel& model, const CylinderFamily& family,
                           const RealFn& H, int N) {
  std::size_t longest_d = 1;
  for (const Word& d : family.D_list) longest_d = std::max(longest_d, d.size());
  int dd = std::max(H.depth(), static_cast<int>(longest_d) + 1);
  auto idx = make_word_index(model.system, dd);
  RealFn Hd = H.refine(dd);
  KeScan scan;
  const auto& ws = idx->words();
  for (std::size_t i = 0; i < ws.size(); ++i) {
    for (std::size_t j = 0; j < ws.size(); ++j) {
      if (i == j) continue;
      PairwiseDistance d = script_distance(model, family, ws[i], ws[j], N);
      double denom = Hd.values()[j] * d.value;
      if (!(denom > 0)) throw NumericalError("script distance degenerated to zero on distinct blocks");
      scan.min_E = std::max(scan.min_E, std::abs(Hd.values()[i] - Hd.values()[j]) / denom);
    }
  }
  return scan;
}

}  // namespace

CylinderFamily select_cylinders(const SuspensionModel& model, double b, double epsilon1, int q1) {
  if (!(std::abs(b) >= 1)) throw ValidationError("select_cylinders requires |b| >= 1");
  if (!(epsilon1 > 0 && epsilon1 <= 1)) throw ValidationError("epsilon1 must lie in (0, 1]");
  if (q1 < 1) throw ValidationError("q1 must be >= 1");

  CylinderFamily fam;
  fam.b = b;
  fam.epsilon1 = epsilon1;
  fam.q1 = q1;
  const double thr = epsilon1 / std::abs(b);
  fam.single_symbol_flag = thr >= 1.0;

  const SymbolicSystem& sys = model.system;
  Word cur;
  std::function<void()> dfs = [&]() {
    if (cylinder_diam_theta(sys, cur, model.theta) <= thr) {
      fam.C_list.push_back(cur);
      if (fam.C_list.size() > 2000000) {
        throw ValidationError("cylinder family too large; raise epsilon1 or lower |b|");
      }
      return;
    }
    for (Symbol j : sys.successors(cur.back())) {
      cur.push_back(j);
      dfs();
      cur.pop_back();
    }
  };
  for (Symbol s = 0; s < sys.alphabet_size(); ++s) {
    cur.assign(1, s);
    dfs();
  }

  fam.C_children.resize(fam.C_list.size());
  for (std::size_t m = 0; m < fam.C_list.size(); ++m) {
    const Word& c = fam.C_list[m];
    for (Word& d : extensions(sys, c, static_cast<int>(c.size()) + q1)) {
      fam.C_children[m].push_back(fam.D_list.size());
      fam.D_parent.push_back(m);
      fam.D_list.push_back(std::move(d));
    }
  }
  return fam;
}

std::vector<BranchPair> make_branch_pairs(const SuspensionModel& model, int N, int count) {
  if (N < 1) throw ValidationError("make_branch_pairs needs N >= 1");
  if (count < 1) throw ValidationError("make_branch_pairs needs count >= 1");
  const SymbolicSystem& sys = model.system;

  std::vector<Word> candidates;
  for (const Word& w : sys.admissible_words(N)) {
    if (static_cast<int>(sys.successors(w.back()).size()) == sys.alphabet_size()) {
      candidates.push_back(w);
    }
  }

  std::vector<BranchPair> pairs;
  for (std::size_t i = 0; i < candidates.size() && static_cast<int>(pairs.size()) < count; ++i) {
    for (std::size_t j = i + 1; j < candidates.size() && static_cast<int>(pairs.size()) < count;
         ++j) {
      pairs.push_back(BranchPair{static_cast<int>(pairs.size()), candidates[i], candidates[j], N});
    }
  }
  if (static_cast<int>(pairs.size()) < count) {
    throw ValidationError("branch pair unavailable; increase N");
  }
  return pairs;
}

double phi_ell(const SuspensionModel& model, const BranchPair& pair, const Word& x) {
  int need = std::max(1, model.roof.depth() - 1);
  if (static_cast<int>(x.size()) < need) {
    throw ValidationError("phi_ell block too short; need at least " + std::to_string(need) +
                          " symbols");
  }
  return model.roof.birkhoff_sum(concat(pair.v1, x), pair.N) -
         model.roof.birkhoff_sum(concat(pair.v2, x), pair.N);
}

UniReport uni_certificate(const SuspensionModel& model, int N,
                          const std::vector<BranchPair>& pairs, const CylinderFamily& family) {
  if (family.C_list.empty()) throw ValidationError("uni_certificate needs a nonempty family");
  if (pairs.empty()) throw ValidationError("uni_certificate needs at least one branch pair");

  UniReport report;
  report.pass = true;
  report.delta0_hat = std::numeric_limits<double>::infinity();
  report.rows.resize(family.C_list.size());

  parallel_for(family.C_list.size(), [&](std::size_t m) {
    const Word& c = family.C_list[m];
    double diam = cylinder_diam_theta(model.system, c, model.theta);
    int K = model.roof.depth() + static_cast<int>(c.size()) + family.q1;

    std::vector<std::vector<Word>> blocks;
    for (std::size_t j : family.C_children[m]) {
      blocks.push_back(extensions(model.system, family.D_list[j], K));
    }

    UniRow row;
    row.c_index = m;
    if (diam > 0) {
      for (const BranchPair& pair : pairs) {
        // Branch sums depend on the block only beyond the prefix, so cache
        // them per subcylinder.
        std::vector<std::vector<double>> s1(blocks.size()), s2(blocks.size());
        for (std::size_t d = 0; d < blocks.size(); ++d) {
          for (const Word& x : blocks[d]) {
            s1[d].push_back(model.roof.birkhoff_sum(concat(pair.v1, x), N));
            s2[d].push_back(model.roof.birkhoff_sum(concat(pair.v2, x), N));
          }
        }
        for (std::size_t d = 0; d < blocks.size(); ++d) {
          for (std::size_t d2 = 0; d2 < blocks.size(); ++d2) {
            double worst = std::numeric_limits<double>::infinity();
            for (double a : s1[d]) {
              for (double b : s2[d2]) worst = std::min(worst, std::abs(a - b));
            }
            double normalized_gap = worst / diam;
            if (normalized_gap > row.delta_hat) {
              row.delta_hat = normalized_gap;
              row.best_ell = pair.ell;
              row.d_index = family.C_children[m][d];
              row.d2_index = family.C_children[m][d2];
            }
          }
        }
      }
    }
    report.rows[m] = row;
  });

  for (const UniRow& row : report.rows) {
    report.delta0_hat = std::min(report.delta0_hat, row.delta_hat);
    if (!(row.delta_hat > 0)) report.pass = false;
  }
  return report;
}

double mu0_from_certificate(const SuspensionModel& model, int N, int q1, double a,
                            double delta0_hat, const RpfOptions& opts) {
  if (!(delta0_hat > 0)) {
    throw NumericalError(
        "oscillation insufficient (uni certificate delta0_hat = 0); this roof admits no "
        "contraction parameter");
  }
  NormalizedPotential np = normalized(model, a, opts);
  double theta = model.theta;
  double first = std::pow(theta, q1) * std::exp(-np.T / (1.0 - theta)) / 6.0;
  double angle = std::min(delta0_hat / 16.0, 1.5707963267948966);
  double second = std::sin(angle) * std::sin(angle) / (8.0 * std::exp(2.0 * np.T * N));
  double mu0 = std::min({first, second, 0.25});
  if (!(mu0 > 0)) throw NumericalError("mu0 formula underflowed to zero; data too rough");
  return mu0;
}

std::pair<RealFn, RealFn> omega_and_contract(const SuspensionModel& model,
                                             const ContractionParams& params,
                                             const std::vector<BranchPair>& pairs,
                                             const CylinderFamily& family,
                                             const RepresentativeSet& J, const RealFn& H,
                                             const RpfOptions& opts) {
  validate_params(params);
  validate_representative(family, J);
  for (double v : H.values()) {
    if (!(v >= 0)) throw ValidationError("omega_and_contract needs H >= 0");
  }

  int d_omega = 1;
  for (const auto& e : J.entries) {
    if (e.ell < 0 || e.ell >= static_cast<int>(pairs.size())) {
      throw ValidationError("representative entry references an unknown branch pair");
    }
    d_omega = std::max(d_omega, params.N + static_cast<int>(family.D_list[e.j].size()));
  }

  auto idx = make_word_index(model.system, d_omega);
  std::vector<double> omega_vals(idx->size(), 1.0);
  for (const auto& e : J.entries) {
    const BranchPair& pair = pairs[static_cast<std::size_t>(e.ell)];
    Word marked = concat(e.i == 1 ? pair.v1 : pair.v2, family.D_list[e.j]);
    for (std::size_t w = 0; w < idx->size(); ++w) {
      const Word& word = idx->words()[w];
      if (word.size() >= marked.size() &&
          std::equal(marked.begin(), marked.end(), word.begin())) {
        omega_vals[w] -= params.mu0;
      }
    }
  }
  for (double v : omega_vals) {
    if (v < 1.0 - params.mu0 - 1e-12) {
      throw ValidationError("representative set marks overlapping branch cylinders");
    }
  }
  RealFn omega(model.system, idx, std::move(omega_vals));

  NormalizedPotential np = normalized(model, params.a, opts);
  RealFn result = omega * H;
  for (int r = 0; r < params.N; ++r) result = apply_transfer(model.system, np.f_a, result);
  return {std::move(omega), std::move(result)};
}

RepresentativeSet build_J(const SuspensionModel& model, const ContractionParams& params,
                          const std::vector<BranchPair>& pairs, const CylinderFamily& family,
                          const ComplexFn& h, const RealFn& H, const RpfOptions& opts) {
  validate_params(params);
  if (pairs.empty()) throw ValidationError("build_J needs at least one branch pair");
  for (double v : H.values()) {
    if (!(v > 0)) throw ValidationError("build_J needs H > 0");
  }
  {
    auto [habs, Hc] = RealFn::aligned(
        h.map([](std::complex<double> z) { return std::abs(z); }), H);
    double slack = 1e-12 * std::max(1.0, sup_norm(Hc));
    for (std::size_t i = 0; i < habs.values().size(); ++i) {
      if (habs.values()[i] > Hc.values()[i] + slack) {
        throw ValidationError("build_J needs |h| <= H entrywise");
      }
    }
  }

  NormalizedPotential np = normalized(model, params.a, opts);
  const RealFn& fa = np.f_a;
  const RealFn& tau = model.roof;
  const int N = params.N;

  RepresentativeSet J;
  std::vector<RepresentativeEntry> chosen(family.C_list.size());
  std::vector<char> ok(family.C_list.size(), 0);

  parallel_for(family.C_list.size(), [&](std::size_t m) {
    auto blocks_for = [&](std::size_t j) {
      int len = block_length(params, family, j, h.depth(), H.depth(), fa.depth(), tau.depth());
      return extensions(model.system, family.D_list[j], len);
    };

    // Case 1: some branch of some subcylinder keeps |h| small everywhere.
    for (int i = 1; i <= 2 && !ok[m]; ++i) {
      for (std::size_t j : family.C_children[m]) {
        if (ok[m]) break;
        for (const BranchPair& pair : pairs) {
          const Word& v = i == 1 ? pair.v1 : pair.v2;
          bool all = true;
          for (const Word& u : blocks_for(j)) {
            Word vu = concat(v, u);
            if (std::abs(h.evaluate(vu)) > 0.75 * H.evaluate(vu)) {
              all = false;
              break;
            }
          }
          if (all) {
            chosen[m] = RepresentativeEntry{i, j, pair.ell};
            ok[m] = 1;
            break;
          }
        }
      }
    }
    if (ok[m]) return;

    // Case 2: phase cancellation across the paired branches dominates the
    // dip-adjusted majorant on one branch.
    for (int i = 1; i <= 2 && !ok[m]; ++i) {
      for (std::size_t j : family.C_children[m]) {
        if (ok[m]) break;
        for (const BranchPair& pair : pairs) {
          bool all = true;
          for (const Word& u : blocks_for(j)) {
            Word v1u = concat(pair.v1, u);
            Word v2u = concat(pair.v2, u);
            double e1 = std::exp(fa.birkhoff_sum(v1u, N));
            double e2 = std::exp(fa.birkhoff_sum(v2u, N));
            std::complex<double> psi =
                e1 * std::exp(std::complex<double>(0.0, -params.b * tau.birkhoff_sum(v1u, N))) *
                    h.evaluate(v1u) +
                e2 * std::exp(std::complex<double>(0.0, -params.b * tau.birkhoff_sum(v2u, N))) *
                    h.evaluate(v2u);
            double gamma = i == 1 ? (1.0 - params.mu0) * e1 * H.evaluate(v1u) + e2 * H.evaluate(v2u)
                                  : e1 * H.evaluate(v1u) + (1.0 - params.mu0) * e2 * H.evaluate(v2u);
            if (std::abs(psi) > gamma) {
              all = false;
              break;
            }
          }
          if (all) {
            chosen[m] = RepresentativeEntry{i, j, pair.ell};
            ok[m] = 1;
            break;
          }
        }
      }
    }
  });

  for (std::size_t m = 0; m < family.C_list.size(); ++m) {
    if (!ok[m]) {
      throw NumericalError(
          "mu0 too large or oscillation insufficient; rerun uni_certificate / reduce mu0 "
          "(no admissible triple in cylinder " +
          word_to_string(family.C_list[m]) + ")");
    }
    J.entries.push_back(chosen[m]);
  }
  return J;
}

DominationReport domination_check(const SuspensionModel& model, const ContractionParams& params,
                                  const std::vector<BranchPair>& pairs,
                                  const CylinderFamily& family, const ComplexFn& h,
                                  const RealFn& H, const RepresentativeSet& J,
                                  const RpfOptions& opts) {
  validate_params(params);
  NormalizedPotential np = normalized(model, params.a, opts);
  int k = std::max(np.f_a.depth(), model.roof.depth());
  ComplexFn g = complex_weight_fn(model, np, params.b, k);

  ComplexFn iterated = h;
  for (int r = 0; r < params.N; ++r) iterated = apply_transfer(model.system, g, iterated);
  RealFn lhs = iterated.map([](std::complex<double> z) { return std::abs(z); });

  RealFn rhs = omega_and_contract(model, params, pairs, family, J, H, opts).second;
  auto [l, r] = RealFn::aligned(lhs, rhs);

  DominationReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < l.values().size(); ++i) {
    report.worst_margin = std::min(report.worst_margin, r.values()[i] - l.values()[i]);
  }
  double scale = std::max(1.0, sup_norm(rhs));
  report.pass = report.worst_margin >= -1e-12 * scale;
  return report;
}

ScriptDReport script_D_and_KE(const SuspensionModel& model, const CylinderFamily& family,
                              const Word& u, const Word& u2, double E, const RealFn& H, int N) {
  if (!(E > 0)) throw ValidationError("K_E membership needs E > 0");
  ScriptDReport report;
  PairwiseDistance d = script_distance(model, family, u, u2, N);
  report.distance = d.value;
  report.in_cylinder_case = d.in_cylinder_case;
  report.c_index = d.c_index;

  for (double v : H.values()) {
    if (!(v > 0)) throw ValidationError("K_E membership is defined for H > 0");
  }
  KeScan scan = ke_minimal_constant(model, family, H, N);
  report.min_E = scan.min_E;
  report.ke_member = scan.min_E <= E * (1.0 + 1e-12);
  return report;
}

L2Report l2_contraction_check(const SuspensionModel& model, const ContractionParams& params,
                              const std::vector<BranchPair>& pairs, const CylinderFamily& family,
                              const RealFn& H, const RepresentativeSet& J,
                              const RpfOptions& opts) {
  validate_params(params);
  NormalizedPotential np = normalized(model, params.a, opts);
  NormalizedPotential np0 = params.a == 0 ? np : normalized(model, 0.0, opts);
  GibbsMeasure nu(model.system, np0.f_a, np0.f_a.depth(), opts);

  L2Report report;
  report.T = np.T;
  report.vacuous = J.entries.empty();

  RealFn njh = omega_and_contract(model, params, pairs, family, J, H, opts).second;
  double numer = nu.integrate(njh * njh);

  RealFn h2 = H * H;
  for (int r = 0; r < params.N; ++r) h2 = apply_transfer(model.system, np0.f_a, h2);
  double denom = nu.integrate(h2);
  if (!(denom > 0)) throw NumericalError("l2 denominator vanished; H must not be identically 0");
  report.ratio = numer / denom;

  report.E = std::max(1.0, ke_minimal_constant(model, family, H, params.N).min_E);

  report.omega0 = 0;
  if (!report.vacuous) {
    double worst = 1.0;
    for (const auto& e : J.entries) {
      double dd = nu.mass(family.D_list[e.j]);
      double cc = nu.mass(family.C_list[family.D_parent[e.j]]);
      if (!(cc > 0)) throw NumericalError("maximal cylinder carries zero Gibbs mass");
      worst = std::min(worst, dd / cc);
    }
    report.omega0 = 1.0 - worst;
  }
  report.c5 = 4.0 * report.E * report.E / (1.0 - report.omega0);

  double nt = params.N * report.T;
  report.rho3 = std::exp(std::abs(params.a) * nt) / (1.0 + params.mu0 * std::exp(-nt) / report.c5);
  if (!(report.rho3 < 1.0)) {
    throw NumericalError("rho3 = " + std::to_string(report.rho3) +
                         " >= 1; a0 too large for this N, choose a smaller a0");
  }
  report.pass = report.vacuous || report.ratio <= report.rho3;
  return report;
}

DecayExperiment decay_experiment(const SuspensionModel& model, const ContractionParams& params,
                                 const std::vector<BranchPair>& pairs,
                                 const CylinderFamily& family, const ComplexFn& h0, int m_max,
                                 const RpfOptions& opts) {
  validate_params(params);
  if (m_max < 1) throw ValidationError("decay_experiment needs m_max >= 1");

  NormalizedPotential np = normalized(model, params.a, opts);
  NormalizedPotential np0 = params.a == 0 ? np : normalized(model, 0.0, opts);
  GibbsMeasure nu(model.system, np0.f_a, np0.f_a.depth(), opts);

  DecayExperiment out;
  ComplexFn h = h0;
  NormReport nr = norm_theta_b(h, model.theta, std::max(1.0, std::abs(params.b)));
  if (nr.theta_b_norm > 1.0) {
    h = std::complex<double>(1.0 / nr.theta_b_norm, 0.0) * h;
    out.rescaled = true;
  }
  RealFn H = RealFn::constant(model.system, 1, 1.0);

  int kc = std::max(np.f_a.depth(), model.roof.depth());
  ComplexFn g = complex_weight_fn(model, np, params.b, kc);

  auto l2_real = [&](const RealFn& fn) { return nu.integrate(fn * fn); };
  auto l2_complex = [&](const ComplexFn& fn) {
    return nu.integrate(fn.map([](std::complex<double> z) { return std::norm(z); }));
  };

  out.rows.push_back(DecayRow{0, l2_real(H), l2_complex(h)});
  for (int m = 1; m <= m_max; ++m) {
    RepresentativeSet Jm;
    try {
      Jm = build_J(model, params, pairs, family, h, H, opts);
    } catch (const NumericalError& e) {
      out.failed_step = m;
      out.failure = e.what();
      break;
    }
    H = omega_and_contract(model, params, pairs, family, Jm, H, opts).second;
    for (int r = 0; r < params.N; ++r) h = apply_transfer(model.system, g, h);

    auto [habs, Hc] = RealFn::aligned(
        h.map([](std::complex<double> z) { return std::abs(z); }), H);
    double slack = 1e-12 * std::max(1.0, sup_norm(Hc));
    for (std::size_t i = 0; i < habs.values().size(); ++i) {
      if (habs.values()[i] > Hc.values()[i] + slack) {
        throw NumericalError("decay invariant |h| <= H violated at step " + std::to_string(m));
      }
    }
    out.rows.push_back(DecayRow{m, l2_real(H), l2_complex(h)});
  }

  std::vector<double> hs, Hs;
  for (const DecayRow& row : out.rows) {
    Hs.push_back(row.H_l2);
    hs.push_back(row.h_l2);
  }
  out.rate_H = fit_geometric_rate(Hs, 1e-280);
  out.rate_h = fit_geometric_rate(hs, 1e-280);
  return out;
}

}  // namespace ruellelab
