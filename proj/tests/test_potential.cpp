#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "ruellelab/errors.hpp"
#include "ruellelab/potential.hpp"
#include "ruellelab/sft.hpp"

using namespace ruellelab;

namespace {

SymbolicSystem full2() { return SymbolicSystem(2, {{1, 1}, {1, 1}}); }
SymbolicSystem golden() { return SymbolicSystem(2, {{1, 1}, {1, 0}}); }

RealFn random_fn(const SymbolicSystem& sys, int depth, std::uint64_t seed) {
  auto idx = make_word_index(sys, depth);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> vals(idx->size());
  for (auto& v : vals) v = u(rng);
  return RealFn(sys, idx, std::move(vals));
}

}  // namespace

TEST_CASE("value tables must match the admissible word count") {
  SymbolicSystem g = golden();
  CHECK_NOTHROW(RealFn(g, 2, {1.0, 2.0, 3.0}));
  CHECK_THROWS_AS(RealFn(g, 2, {1.0, 2.0, 3.0, 4.0}), ValidationError);
  CHECK_THROWS_AS(RealFn(g, 1, {1.0}), ValidationError);
}

TEST_CASE("evaluation reads the window at the requested offset") {
  SymbolicSystem g = golden();
  // Depth-2 words in order: 00, 01, 10.
  RealFn f(g, 2, {5.0, 7.0, 11.0});
  CHECK(f.evaluate(Word{0, 0}) == 5.0);
  CHECK(f.evaluate(Word{0, 1}) == 7.0);
  CHECK(f.evaluate(Word{1, 0}) == 11.0);
  Word w{0, 1, 0, 0, 1};
  CHECK(f.evaluate_at(w, 0) == 7.0);
  CHECK(f.evaluate_at(w, 1) == 11.0);
  CHECK(f.evaluate_at(w, 2) == 5.0);
  CHECK(f.evaluate_at(w, 3) == 7.0);
  CHECK_THROWS_AS(f.evaluate_at(w, 4), ValidationError);
  CHECK_THROWS_AS(f.evaluate(Word{1, 1}), ValidationError);
}

TEST_CASE("birkhoff sums add window values and satisfy the cocycle rule") {
  SymbolicSystem g = golden();
  RealFn f(g, 2, {5.0, 7.0, 11.0});
  Word w{0, 1, 0, 0, 1};
  CHECK(f.birkhoff_sum(w, 0) == 0.0);
  CHECK(f.birkhoff_sum(w, 1) == 7.0);
  CHECK(f.birkhoff_sum(w, 4) == 7.0 + 11.0 + 5.0 + 7.0);
  CHECK_THROWS_AS(f.birkhoff_sum(w, 5), ValidationError);
  CHECK_THROWS_AS(f.birkhoff_sum(w, -1), ValidationError);

  // S_{m+n}(w) = S_m(w) + S_n(sigma^m w) for every admissible word.
  SymbolicSystem sys = full2();
  RealFn h = random_fn(sys, 3, 11);
  std::mt19937_64 rng(13);
  auto pool = sys.admissible_words(9);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const Word& w9 = pool[pick(rng)];
    for (int m = 0; m <= 4; ++m) {
      for (int n = 0; n + m <= 7; ++n) {
        Word tail(w9.begin() + m, w9.end());
        double lhs = h.birkhoff_sum(w9, m + n);
        double rhs = h.birkhoff_sum(w9, m) + h.birkhoff_sum(tail, n);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("refinement changes the table depth but not the function") {
  SymbolicSystem g = golden();
  RealFn f = random_fn(g, 2, 21);
  RealFn f4 = f.refine(4);
  CHECK(f4.depth() == 4);
  for (const Word& w : g.admissible_words(6)) {
    CHECK(f4.evaluate(w) == f.evaluate(w));
  }
  CHECK_THROWS_AS(f.refine(1), ValidationError);
}

TEST_CASE("minimal depth detects hidden coarseness") {
  SymbolicSystem sys = full2();
  RealFn base(sys, 1, {2.0, 3.0});
  RealFn lifted = base.refine(3);
  CHECK(lifted.depth() == 3);
  CHECK(lifted.minimal_depth() == 1);
  CHECK(lifted.reducible_to(1));
  CHECK(lifted.reducible_to(2));
  RealFn back = lifted.reduce_to(1);
  CHECK(back.values() == base.values());

  RealFn deep = random_fn(sys, 3, 5);
  CHECK(deep.minimal_depth() == 3);
  CHECK_FALSE(deep.reducible_to(2));
  CHECK_THROWS_AS(deep.reduce_to(2), ValidationError);
  CHECK(RealFn::constant(sys, 4, 1.5).minimal_depth() == 1);
}

TEST_CASE("arithmetic aligns depths before combining") {
  SymbolicSystem sys = full2();
  RealFn a(sys, 1, {1.0, 2.0});
  RealFn b(sys, 2, {10.0, 20.0, 30.0, 40.0});
  RealFn s = a + b;
  CHECK(s.depth() == 2);
  CHECK(s.evaluate(Word{0, 0}) == 11.0);
  CHECK(s.evaluate(Word{0, 1}) == 21.0);
  CHECK(s.evaluate(Word{1, 0}) == 32.0);
  CHECK(s.evaluate(Word{1, 1}) == 42.0);
  RealFn d = b - a;
  CHECK(d.evaluate(Word{1, 0}) == 28.0);
  RealFn scaled = 3.0 * a;
  CHECK(scaled.values() == std::vector<double>{3.0, 6.0});
  RealFn prod = a * b;
  CHECK(prod.evaluate(Word{1, 1}) == 80.0);

  SymbolicSystem other = golden();
  RealFn c(other, 1, {1.0, 1.0});
  CHECK_THROWS_WITH_AS(a + c, doctest::Contains("different systems"), ValidationError);

  ComplexFn cf = a.map([](double v) { return std::complex<double>(v, -v); });
  CHECK(cf.values()[1] == std::complex<double>(2.0, -2.0));
}

TEST_CASE("sup norm and theta seminorm match hand values") {
  SymbolicSystem sys = full2();
  RealFn a(sys, 1, {1.0, -3.0});
  CHECK(sup_norm(a) == 3.0);
  CHECK(theta_seminorm(a, 0.5) == 4.0);

  // Depth 2: pairs at distance 1 (first symbols differ) and theta.
  RealFn b(sys, 2, {0.0, 1.0, 0.0, 0.0});
  // |b(00)-b(01)| / theta = 1/0.5 = 2 dominates the cross pairs at distance 1.
  CHECK(theta_seminorm(b, 0.5) == 2.0);
  CHECK(theta_seminorm(RealFn::constant(sys, 3, 42.0), 0.5) == 0.0);
}

TEST_CASE("theta seminorm is invariant under refinement") {
  SymbolicSystem g = golden();
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    RealFn f = random_fn(g, 2, seed);
    double s0 = theta_seminorm(f, 0.5);
    CHECK(theta_seminorm(f.refine(3), 0.5) == doctest::Approx(s0).epsilon(1e-14));
    CHECK(theta_seminorm(f.refine(5), 0.5) == doctest::Approx(s0).epsilon(1e-14));
  }
}

TEST_CASE("the b-weighted norm divides the seminorm by |b|") {
  SymbolicSystem sys = full2();
  RealFn a(sys, 1, {1.0, -3.0});
  NormReport r = norm_theta_b(a, 0.5, 8.0);
  CHECK(r.sup_norm == 3.0);
  CHECK(r.theta_seminorm == 4.0);
  CHECK(r.theta_b_norm == 3.0 + 4.0 / 8.0);
  CHECK(r.b == 8.0);
  NormReport rn = norm_theta_b(a, 0.5, -2.0);
  CHECK(rn.theta_b_norm == 3.0 + 4.0 / 2.0);
  CHECK_THROWS_AS(norm_theta_b(a, 0.5, 0.5), ValidationError);
}

TEST_CASE("depth approximation is the conditional average") {
  SymbolicSystem sys = full2();
  // Depth-2 values over 00, 01, 10, 11.
  RealFn f(sys, 2, {1.0, 3.0, 5.0, 9.0});
  auto mass = [](const Word& w) {
    // Weight word 01 three times as much as 00; split [1] evenly.
    if (w == Word{0, 0}) return 1.0;
    if (w == Word{0, 1}) return 3.0;
    return 2.0;
  };
  auto approx = approximate_by_depth<double>(f, 1, mass);
  CHECK_FALSE(approx.mean_fallback);
  CHECK(approx.fn.depth() == 1);
  CHECK(approx.fn.values()[0] == doctest::Approx((1.0 * 1.0 + 3.0 * 3.0) / 4.0));
  CHECK(approx.fn.values()[1] == doctest::Approx(7.0));
  CHECK(approx.sup_error == doctest::Approx(2.0));
  CHECK_THROWS_AS(approximate_by_depth<double>(f, 0, mass), ValidationError);
  CHECK_THROWS_AS(approximate_by_depth<double>(f, 2, mass), ValidationError);

  auto zero_on_one = [](const Word& w) { return w[0] == 1 ? 0.0 : 1.0; };
  auto fb = approximate_by_depth<double>(f, 1, zero_on_one);
  CHECK(fb.mean_fallback);
  CHECK(fb.fn.values()[1] == doctest::Approx(7.0));
}
