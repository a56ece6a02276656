#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "ruellelab/models.hpp"
#include "ruellelab/transfer.hpp"

namespace ruellelab {

// Two length-N inverse-branch prefixes: every admissible continuation x gives
// admissible words v1.x and v2.x with sigma^N(vi.x) = x. Both prefixes end in
// a symbol whose follower row is full, so the continuation is unconstrained.
struct BranchPair {
  int ell = 0;
  Word v1;
  Word v2;
  int N = 0;
};

// Partition of the shift space into maximal cylinders of D_theta-diameter at
// most epsilon1/|b|, each refined into its co-length-q1 subcylinders.
struct CylinderFamily {
  double b = 0;
  double epsilon1 = 1;
  int q1 = 1;
  bool single_symbol_flag = false;  // threshold >= 1, so length-1 cylinders
  std::vector<Word> C_list;
  std::vector<Word> D_list;
  std::vector<std::size_t> D_parent;                 // D_list[i] lies in C_list[D_parent[i]]
  std::vector<std::vector<std::size_t>> C_children;  // D-indices per C
};

// Marked triples (branch index i in {1,2}, D-index j, pair index ell).
// Nonempty sets must mark each D at most once and each C at least once.
struct RepresentativeEntry {
  int i = 1;
  std::size_t j = 0;
  int ell = 0;
};

struct RepresentativeSet {
  std::vector<RepresentativeEntry> entries;
};

struct ContractionParams {
  int N = 1;
  double mu0 = 0.25;  // in (0, 1/2]
  double epsilon1 = 1;
  int q1 = 1;
  double a = 0;
  double b = 1;
};

CylinderFamily select_cylinders(const SuspensionModel& model, double b, double epsilon1, int q1);

// `count` branch pairs in lexicographic order over ordered pairs of distinct
// admissible length-N words whose final symbol has a full follower row.
std::vector<BranchPair> make_branch_pairs(const SuspensionModel& model, int N, int count);

// tau_N(v1.x) - tau_N(v2.x).
double phi_ell(const SuspensionModel& model, const BranchPair& pair, const Word& x);

// Oscillation certificate: for each maximal cylinder C the best lower bound,
// over pair index ell and subcylinders (D, D') of C, of the branch time-sum
// separation min_{x in D, z in D'} |tau_N(v1.x) - tau_N(v2.z)|, normalized by
// diam_theta(C). Blocks x, z run over depth-(depth(tau) + |C| + q1) words, so
// the minima are exact. Pass requires a positive value on every C.
struct UniRow {
  std::size_t c_index = 0;
  int best_ell = -1;
  std::size_t d_index = 0;
  std::size_t d2_index = 0;
  double delta_hat = 0;
};

struct UniReport {
  bool pass = false;
  double delta0_hat = 0;  // min over C of delta_hat
  std::vector<UniRow> rows;
};

UniReport uni_certificate(const SuspensionModel& model, int N, const std::vector<BranchPair>& pairs,
                          const CylinderFamily& family);

// Default contraction amount from the certificate: the minimum of
// theta^q1 e^{-T/(1-theta)}/6 and sin^2(delta0/16)/(8 e^{2TN}), clamped to
// (0, 1/4], with T measured on the normalized data.
double mu0_from_certificate(const SuspensionModel& model, int N, int q1, double a,
                            double delta0_hat, const RpfOptions& opts = {});

// omega_J = 1 - mu0 * sum of marked-branch-cylinder indicators (values in
// [1-mu0, 1]), and the contraction step N_J H = M_a^N(omega_J H).
std::pair<RealFn, RealFn> omega_and_contract(const SuspensionModel& model,
                                             const ContractionParams& params,
                                             const std::vector<BranchPair>& pairs,
                                             const CylinderFamily& family,
                                             const RepresentativeSet& J, const RealFn& H,
                                             const RpfOptions& opts = {});

// Picks, per maximal cylinder, the first triple (i, j, ell) on which either
// |h| <= (3/4) H on the marked branch over every block of D_j, or the paired
// sum psi_ell stays below the dip-adjusted majorant gamma^(i)_ell on every
// block of D_j. The result makes |L_ab^N h| <= N_J H hold blockwise.
RepresentativeSet build_J(const SuspensionModel& model, const ContractionParams& params,
                          const std::vector<BranchPair>& pairs, const CylinderFamily& family,
                          const ComplexFn& h, const RealFn& H, const RpfOptions& opts = {});

struct DominationReport {
  bool pass = false;
  double worst_margin = 0;  // min over blocks of (N_J H - |L_ab^N h|)
};

DominationReport domination_check(const SuspensionModel& model, const ContractionParams& params,
                                  const std::vector<BranchPair>& pairs,
                                  const CylinderFamily& family, const ComplexFn& h,
                                  const RealFn& H, const RepresentativeSet& J,
                                  const RpfOptions& opts = {});

// Cylinder-relative distance between equal-length blocks: 0 when equal;
// D_theta(u,u')/diam_theta(C_m) when some shift sigma^p of the smallest
// common cylinder lands inside a maximal cylinder C_m (largest such p wins);
// theta^{-N} otherwise. The membership verdict checks
// |H(u) - H(u')| <= E H(u') D(u,u') exhaustively over block pairs at depth
// max(depth(H), longest subcylinder + 1).
struct ScriptDReport {
  double distance = 0;
  bool in_cylinder_case = false;  // the sigma^p case applied
  std::size_t c_index = 0;        // valid when in_cylinder_case
  bool ke_member = false;
  double min_E = 0;  // smallest E for which H passes
};

ScriptDReport script_D_and_KE(const SuspensionModel& model, const CylinderFamily& family,
                              const Word& u, const Word& u2, double E, const RealFn& H, int N);

// L2 contraction on the marked mass: compares the exact integrals
// int (N_J H)^2 dnu and int L_{f^(0)}^N (H^2) dnu against
// rho3 = e^{|a| N T} / (1 + mu0 e^{-NT}/C5), C5 = 4 E^2/(1 - omega0), with E
// the measured regularity constant of H and omega0 = 1 - min_m nu(D_j)/nu(C_m)
// over the marked subcylinders.
struct L2Report {
  bool pass = false;
  bool vacuous = false;  // empty J: no marked mass to contract
  double ratio = 0;
  double rho3 = 0;
  double E = 1;
  double omega0 = 0;
  double c5 = 0;
  double T = 0;
};

L2Report l2_contraction_check(const SuspensionModel& model, const ContractionParams& params,
                              const std::vector<BranchPair>& pairs, const CylinderFamily& family,
                              const RealFn& H, const RepresentativeSet& J,
                              const RpfOptions& opts = {});

// The coupled iteration h -> L_ab^N h, H -> N_J H with J rebuilt from the
// current pair each step and H^(0) = 1; |h^(m)| <= H^(m) is verified at every
// step and both L2 columns are reported with fitted geometric rates.
struct DecayRow {
  int m = 0;
  double H_l2 = 0;
  double h_l2 = 0;
};

struct DecayExperiment {
  std::vector<DecayRow> rows;
  double rate_H = 0;
  double rate_h = 0;
  int failed_step = -1;  // first m whose build_J failed; -1 when none
  std::string failure;
  bool rescaled = false;
};

DecayExperiment decay_experiment(const SuspensionModel& model, const ContractionParams& params,
                                 const std::vector<BranchPair>& pairs,
                                 const CylinderFamily& family, const ComplexFn& h0, int m_max,
                                 const RpfOptions& opts = {});

}  // namespace ruellelab
