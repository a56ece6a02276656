#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "ruellelab/errors.hpp"
#include "ruellelab/models.hpp"
#include "ruellelab/potential.hpp"
#include "ruellelab/sft.hpp"
#include "ruellelab/transfer.hpp"

using namespace ruellelab;

namespace {

SymbolicSystem full2() { return SymbolicSystem(2, {{1, 1}, {1, 1}}); }
SymbolicSystem golden() { return SymbolicSystem(2, {{1, 1}, {1, 0}}); }

RealFn random_fn(const SymbolicSystem& sys, int depth, std::uint64_t seed, double amp = 1.0) {
  auto idx = make_word_index(sys, depth);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> vals(idx->size());
  for (auto& v : vals) v = u(rng);
  return RealFn(sys, idx, std::move(vals));
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Independent check value: the root of exp(-s) + exp(-sqrt(2) s) = 1 by
// plain interval bisection.
double sqrt2_pressure_root() {
  auto F = [](double s) { return std::exp(-s) + std::exp(-std::sqrt(2.0) * s) - 1.0; };
  double lo = 0.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (F(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("transfer matrix entries follow the sliding-window rule") {
  SymbolicSystem g = golden();
  RealFn f(g, 1, {0.25, -0.5});
  auto m1 = assemble_matrix(g, f, 1);
  REQUIRE(m1.entries.rows() == 2);
  CHECK(m1.entries(0, 0) == doctest::Approx(std::exp(0.25)));
  CHECK(m1.entries(0, 1) == doctest::Approx(std::exp(-0.5)));
  CHECK(m1.entries(1, 0) == doctest::Approx(std::exp(0.25)));
  CHECK(m1.entries(1, 1) == 0.0);

  // Depth-2 words 00, 01, 10: w slides onto u when w_1 = u_0.
  RealFn f2(g, 2, {0.1, 0.2, 0.3});
  auto m2 = assemble_matrix(g, f2, 2);
  REQUIRE(m2.entries.rows() == 3);
  CHECK(m2.entries(0, 0) == doctest::Approx(std::exp(0.1)));
  CHECK(m2.entries(0, 1) == 0.0);
  CHECK(m2.entries(0, 2) == doctest::Approx(std::exp(0.3)));
  CHECK(m2.entries(1, 0) == doctest::Approx(std::exp(0.1)));
  CHECK(m2.entries(1, 2) == doctest::Approx(std::exp(0.3)));
  CHECK(m2.entries(2, 1) == doctest::Approx(std::exp(0.2)));
  CHECK(m2.entries(2, 0) == 0.0);
  CHECK(m2.entries(2, 2) == 0.0);
}

TEST_CASE("matrix-free application agrees with the assembled matrix") {
  SymbolicSystem sys = full2();
  RealFn g = random_fn(sys, 2, 31, 0.5);
  RealFn h = random_fn(sys, 3, 32);
  auto lh = apply_transfer(sys, g, h);
  CHECK(lh.depth() == 2);

  auto m = assemble_matrix(sys, g, 3);
  Eigen::VectorXd v = to_vec(h.values());
  Eigen::VectorXd mv = m.entries * v;
  RealFn lifted = lh.refine(3);
  for (Eigen::Index i = 0; i < mv.size(); ++i) {
    CHECK(lifted.values()[static_cast<std::size_t>(i)] ==
          doctest::Approx(mv(i)).epsilon(1e-13));
  }
}

TEST_CASE("rpf data solves left and right eigenproblems with tight residuals") {
  std::vector<SuspensionModel> models;
  models.push_back(preset("golden-mean-const"));
  for (std::uint64_t s : {1ull, 2ull, 3ull, 4ull}) models.push_back(random_model(s, 3, 2, 0.5));
  for (const auto& m : models) {
    RealFn f = m.potential.depth() >= 2 ? m.potential : m.potential.refine(2);
    auto tm = assemble_matrix(m.system, f, f.depth());
    SpectralData d = rpf_data(tm);
    REQUIRE(d.lambda > 0);
    Eigen::VectorXd h = to_vec(d.eigenfunction.values());
    Eigen::VectorXd nu = to_vec(d.eigenmeasure);
    double scale = d.lambda * h.norm();
    CHECK((tm.entries * h - d.lambda * h).norm() <= 1e-12 * scale);
    CHECK((tm.entries.transpose() * nu - d.lambda * nu).norm() <= 1e-12 * d.lambda);
    CHECK(nu.sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(h.dot(nu) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(h.minCoeff() > 0);
    CHECK(nu.minCoeff() >= 0);
    CHECK(d.pressure == doctest::Approx(std::log(d.lambda)).epsilon(1e-14));
    CHECK(d.residual <= 1e-12);
  }
}

TEST_CASE("pressure matches closed forms") {
  SymbolicSystem f2 = full2();
  CHECK(pressure(f2, RealFn::constant(f2, 1, 0.0)) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-13));
  SymbolicSystem g = golden();
  CHECK(pressure(g, RealFn::constant(g, 1, 0.0)) ==
        doctest::Approx(0.4812118250596035).epsilon(1e-13));
  // Weights 3 and 1 on a full shift give a rank-one operator with eigenvalue 4.
  RealFn w(f2, 1, {std::log(3.0), 0.0});
  CHECK(pressure(f2, w) == doctest::Approx(std::log(4.0)).epsilon(1e-13));
}

TEST_CASE("the pressure-equation root matches an independent bisection") {
  SymbolicSystem sys = full2();
  RealFn zero = RealFn::constant(sys, 1, 0.0);
  RealFn tau(sys, 1, {1.0, std::sqrt(2.0)});
  double s = solve_P_f(sys, zero, tau, 1e-12);
  CHECK(s == doctest::Approx(sqrt2_pressure_root()).epsilon(1e-11));
  CHECK(s == doctest::Approx(0.5801882726692424).epsilon(1e-12));
  CHECK(std::abs(pressure(sys, zero - s * tau)) <= 1e-10);

  RealFn one = RealFn::constant(sys, 1, 1.0);
  CHECK(solve_P_f(sys, zero, one, 1e-12) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-11));
}

TEST_CASE("normalization produces unit row sums for every twist") {
  std::vector<SuspensionModel> models;
  models.push_back(preset("full2-const"));
  models.push_back(preset("golden-mean-const"));
  models.push_back(preset("full2-nonlattice"));
  for (std::uint64_t s : {5ull, 6ull}) models.push_back(random_model(s, 3, 2, 0.5));
  for (const auto& m : models) {
    for (double a : {-0.3, 0.0, 0.7}) {
      NormalizedPotential np = normalize(m.system, m.potential, m.roof, a, m.theta);
      int k = std::max(1, np.f_a.depth());
      auto tm = assemble_matrix(m.system, np.f_a, k);
      Eigen::VectorXd rows = tm.entries.rowwise().sum();
      for (Eigen::Index i = 0; i < rows.size(); ++i) {
        CHECK(std::abs(rows(i) - 1.0) <= 1e-12);
      }
      CHECK(np.a == a);
      CHECK(np.T + 1e-15 >= sup_norm(np.f_a));
      CHECK(np.T + 1e-15 >= theta_seminorm(np.f_a, m.theta));
      CHECK(np.T + 1e-15 >= theta_seminorm(m.roof, m.theta));
      if (a == 0.0) CHECK(std::abs(np.data.lambda - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("normalization keeps tables as coarse as the data allows") {
  SuspensionModel c = preset("full2-const");
  NormalizedPotential np = normalize(c.system, c.potential, c.roof, 0.0, c.theta);
  CHECK(np.f_a.minimal_depth() == 1);
  CHECK(np.P_f == doctest::Approx(0.6931471805599453).epsilon(1e-13));

  // The golden-mean eigenfunction is nonconstant, so the corrected potential
  // genuinely needs depth 2.
  SuspensionModel g = preset("golden-mean-const");
  NormalizedPotential ng = normalize(g.system, g.potential, g.roof, 0.0, g.theta);
  CHECK(ng.f_a.depth() == 2);
  CHECK(ng.f_a.minimal_depth() == 2);
  CHECK(ng.P_f == doctest::Approx(0.4812118250596035).epsilon(1e-13));
}

TEST_CASE("gibbs masses are additive and shift invariant to depth ten") {
  std::vector<SuspensionModel> models;
  models.push_back(preset("golden-mean-const"));
  models.push_back(preset("full2-nonlattice"));
  models.push_back(random_model(7, 3, 2, 0.5));
  for (const auto& m : models) {
    GibbsMeasure nu = gibbs_measure(m.system, m.potential, m.roof, m.theta, 10);
    for (int d = 1; d <= 9; ++d) {
      double total = 0;
      for (const Word& w : m.system.admissible_words(d)) {
        total += nu.mass(w);
        double forward = 0, backward = 0;
        Word grow = w;
        grow.push_back(0);
        for (Symbol j : m.system.successors(w.back())) {
          grow.back() = j;
          forward += nu.mass(grow);
        }
        Word pre(w.size() + 1, 0);
        std::copy(w.begin(), w.end(), pre.begin() + 1);
        for (Symbol i : m.system.predecessors(w.front())) {
          pre[0] = i;
          backward += nu.mass(pre);
        }
        CHECK(std::abs(forward - nu.mass(w)) <= 1e-12);
        CHECK(std::abs(backward - nu.mass(w)) <= 1e-12);
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("bernoulli and parry masses match their closed forms") {
  SuspensionModel b = preset("full2-const");
  GibbsMeasure nb = gibbs_measure(b.system, b.potential, b.roof, b.theta, 10);
  for (int d = 1; d <= 10; ++d) {
    double expect = std::pow(0.5, d);
    for (const Word& w : b.system.admissible_words(d)) {
      CHECK(std::abs(nb.mass(w) - expect) <= 1e-12);
    }
  }
  SuspensionModel g = preset("golden-mean-const");
  GibbsMeasure ng = gibbs_measure(g.system, g.potential, g.roof, g.theta, 10);
  CHECK(ng.mass(Word{0}) == doctest::Approx(0.7236067977499789).epsilon(1e-9));
  CHECK(ng.mass(Word{1}) == doctest::Approx(1.0 - 0.7236067977499789).epsilon(1e-9));
}

TEST_CASE("certificate constants bracket mass ratios over long cylinders") {
  for (std::uint64_t s : {8ull, 9ull}) {
    SuspensionModel m = random_model(s, 3, 2, 0.5);
    GibbsMeasure nu = gibbs_measure(m.system, m.potential, m.roof, m.theta, 8);
    REQUIRE(nu.c1() > 0);
    REQUIRE(nu.c2() >= nu.c1());
    NormalizedPotential np = normalize(m.system, m.potential, m.roof, 0.0, m.theta);
    int k = np.f_a.depth();
    for (const Word& w : m.system.admissible_words(5)) {
      // Extend w far enough that the Birkhoff sum of length |w| is defined.
      Word y = w;
      while (y.size() < w.size() + static_cast<std::size_t>(k)) {
        y.push_back(m.system.successors(y.back()).front());
      }
      double ratio = nu.mass(w) / std::exp(np.f_a.birkhoff_sum(y, static_cast<int>(w.size())));
      CHECK(ratio >= nu.c1() * (1 - 1e-9));
      CHECK(ratio <= nu.c2() * (1 + 1e-9));
    }
  }
}

TEST_CASE("integration is dual to the normalized transfer operator") {
  SuspensionModel m = preset("golden-mean-const");
  NormalizedPotential np = normalize(m.system, m.potential, m.roof, 0.0, m.theta);
  GibbsMeasure nu(m.system, np.f_a, 6);
  CHECK(nu.integrate(RealFn::constant(m.system, 1, 1.0)) == doctest::Approx(1.0).epsilon(1e-13));
  for (std::uint64_t s : {10ull, 11ull, 12ull}) {
    RealFn h = random_fn(m.system, 3, s);
    double lhs = nu.integrate(apply_transfer(m.system, np.f_a, h));
    double rhs = nu.integrate(h);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("non-normalized generators are rejected") {
  SymbolicSystem sys = full2();
  CHECK_THROWS_AS(GibbsMeasure(sys, RealFn::constant(sys, 1, -0.5), 5), ValidationError);
  CHECK_NOTHROW(GibbsMeasure(sys, RealFn::constant(sys, 1, -std::log(2.0)), 5));
}

TEST_CASE("mass tables are cached and consistent with single masses") {
  SuspensionModel m = preset("golden-mean-const");
  GibbsMeasure nu = gibbs_measure(m.system, m.potential, m.roof, m.theta, 6);
  auto t4a = nu.mass_table(4);
  auto t4b = nu.mass_table(4);
  CHECK(t4a.get() == t4b.get());
  auto idx = make_word_index(m.system, 4);
  for (std::size_t i = 0; i < idx->size(); ++i) {
    CHECK((*t4a)[i] == doctest::Approx(nu.mass(idx->words()[i])).epsilon(1e-14));
  }
}

TEST_CASE("power iteration agrees with the dense eigensolver") {
  SymbolicSystem g = golden();
  RealFn f = random_fn(g, 2, 77, 0.4);
  auto tm = assemble_matrix(g, f, 2);
  SpectralData dense = rpf_data(tm);
  RpfOptions force_power;
  force_power.dense_threshold = 1;
  SpectralData power = rpf_data(tm, force_power);
  CHECK(power.lambda == doctest::Approx(dense.lambda).epsilon(1e-11));
  for (std::size_t i = 0; i < dense.eigenmeasure.size(); ++i) {
    CHECK(power.eigenmeasure[i] == doctest::Approx(dense.eigenmeasure[i]).epsilon(1e-9));
    CHECK(power.eigenfunction.values()[i] ==
          doctest::Approx(dense.eigenfunction.values()[i]).epsilon(1e-9));
  }
}

TEST_CASE("iterate convergence reflects the spectral gap") {
  SymbolicSystem g = golden();
  RealFn zero = RealFn::constant(g, 1, 0.0);
  RealFn one = RealFn::constant(g, 1, 1.0);
  RealFn w = random_fn(g, 1, 99);
  ConvergenceTable table = rpf_convergence_rate(g, zero, one, 0.5, w, 20);
  REQUIRE(table.distances.size() == 20);
  // Second eigenvalue of the golden-mean matrix over the first: 1/phi^2.
  double expect = 0.3819660112501051;
  CHECK(table.rate == doctest::Approx(expect).epsilon(0.02));

  SymbolicSystem f2 = full2();
  ConvergenceTable flat = rpf_convergence_rate(f2, RealFn::constant(f2, 1, 0.0),
                                               RealFn::constant(f2, 1, 1.0), 0.5,
                                               random_fn(f2, 1, 98), 10);
  CHECK(flat.distances[1] <= 1e-14);
  CHECK(flat.rate <= 1e-8);
}

TEST_CASE("tolerant reduction strips floating point noise") {
  SymbolicSystem sys = full2();
  RealFn base(sys, 1, {1.0, 2.0});
  RealFn lifted = base.refine(3);
  std::vector<double> noisy = lifted.values();
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-1e-14, 1e-14);
  for (auto& v : noisy) v += u(rng);
  RealFn cleaned = reduce_with_tolerance(RealFn(sys, 3, noisy), 1e-12);
  CHECK(cleaned.depth() == 1);
  CHECK(cleaned.values()[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(cleaned.values()[1] == doctest::Approx(2.0).epsilon(1e-13));
}
