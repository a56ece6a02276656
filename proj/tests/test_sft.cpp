#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ruellelab/errors.hpp"
#include "ruellelab/sft.hpp"

using namespace ruellelab;

namespace {

SymbolicSystem full2() { return SymbolicSystem(2, {{1, 1}, {1, 1}}); }
SymbolicSystem golden() { return SymbolicSystem(2, {{1, 1}, {1, 0}}); }

}  // namespace

TEST_CASE("constructor rejects degenerate transition data") {
  CHECK_THROWS_AS(SymbolicSystem(0, {}), ValidationError);
  CHECK_THROWS_AS(SymbolicSystem(2, {{1, 1}}), ValidationError);
  CHECK_THROWS_AS(SymbolicSystem(2, {{1, 1, 0}, {1, 0, 0}}), ValidationError);
  CHECK_THROWS_AS(SymbolicSystem(2, {{1, 2}, {1, 0}}), ValidationError);
  CHECK_THROWS_WITH_AS(SymbolicSystem(2, {{0, 0}, {1, 1}}),
                       doctest::Contains("dead symbol"), ValidationError);
  CHECK_THROWS_WITH_AS(SymbolicSystem(2, {{1, 0}, {1, 0}}),
                       doctest::Contains("unreachable symbol"), ValidationError);
}

TEST_CASE("successor and predecessor lists follow the matrix") {
  SymbolicSystem g = golden();
  CHECK(g.alphabet_size() == 2);
  CHECK(g.allowed(0, 0));
  CHECK(g.allowed(0, 1));
  CHECK(g.allowed(1, 0));
  CHECK_FALSE(g.allowed(1, 1));
  CHECK(g.successors(0) == std::vector<Symbol>{0, 1});
  CHECK(g.successors(1) == std::vector<Symbol>{0});
  CHECK(g.predecessors(0) == std::vector<Symbol>{0, 1});
  CHECK(g.predecessors(1) == std::vector<Symbol>{0});
}

TEST_CASE("admissibility checks every adjacent pair") {
  SymbolicSystem g = golden();
  CHECK_FALSE(g.is_admissible(Word{}));
  CHECK(g.is_admissible(Word{0}));
  CHECK(g.is_admissible(Word{1}));
  CHECK(g.is_admissible(Word{0, 1, 0, 1}));
  CHECK_FALSE(g.is_admissible(Word{1, 1}));
  CHECK_FALSE(g.is_admissible(Word{0, 1, 1, 0}));
  CHECK_FALSE(g.is_admissible(Word{2}));
  CHECK_FALSE(g.is_admissible(Word{-1}));
}

TEST_CASE("admissible words come out complete and lexicographically sorted") {
  SymbolicSystem f = full2();
  auto w3 = f.admissible_words(3);
  CHECK(w3.size() == 8);
  CHECK(std::is_sorted(w3.begin(), w3.end()));
  CHECK(w3.front() == Word{0, 0, 0});
  CHECK(w3.back() == Word{1, 1, 1});

  SymbolicSystem g = golden();
  auto g3 = g.admissible_words(3);
  REQUIRE(g3.size() == 5);
  CHECK(g3[0] == Word{0, 0, 0});
  CHECK(g3[1] == Word{0, 0, 1});
  CHECK(g3[2] == Word{0, 1, 0});
  CHECK(g3[3] == Word{1, 0, 0});
  CHECK(g3[4] == Word{1, 0, 1});
  // Golden-mean word counts follow the Fibonacci recursion.
  std::vector<std::size_t> counts;
  for (int n = 1; n <= 8; ++n) counts.push_back(g.admissible_words(n).size());
  CHECK(counts == std::vector<std::size_t>{2, 3, 5, 8, 13, 21, 34, 55});
}

TEST_CASE("periodic point counts equal transition-matrix traces") {
  SymbolicSystem f = full2();
  for (int n = 1; n <= 10; ++n) {
    CHECK(f.periodic_point_count(n) == (std::int64_t{1} << n));
  }
  SymbolicSystem g = golden();
  // Lucas numbers 1, 3, 4, 7, 11, 18, ...
  std::vector<std::int64_t> lucas{1, 3, 4, 7, 11, 18, 29, 47};
  for (int n = 1; n <= 8; ++n) {
    CHECK(g.periodic_point_count(n) == lucas[static_cast<std::size_t>(n - 1)]);
  }
}

TEST_CASE("irreducibility and aperiodicity are detected") {
  CHECK(full2().irreducible());
  CHECK(full2().aperiodic());
  CHECK(golden().irreducible());
  CHECK(golden().aperiodic());

  SymbolicSystem two_cycle(2, {{0, 1}, {1, 0}});
  CHECK(two_cycle.irreducible());
  CHECK_FALSE(two_cycle.aperiodic());

  SymbolicSystem upper(2, {{1, 1}, {0, 1}});
  CHECK_FALSE(upper.irreducible());
}

TEST_CASE("word distance is an ultrametric with theta scaling") {
  const double theta = 0.5;
  CHECK(d_theta(Word{0, 0, 0}, Word{0, 0, 0}, theta) == 0.0);
  CHECK(d_theta(Word{1, 0}, Word{0, 0}, theta) == 1.0);
  CHECK(d_theta(Word{0, 1, 1}, Word{0, 0, 1}, theta) == theta);
  CHECK(d_theta(Word{0, 0, 1}, Word{0, 0, 0}, theta) == theta * theta);

  std::mt19937_64 rng(7);
  SymbolicSystem f = full2();
  auto pool = f.admissible_words(6);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    const Word& x = pool[pick(rng)];
    const Word& y = pool[pick(rng)];
    const Word& z = pool[pick(rng)];
    double dxy = d_theta(x, y, theta);
    double dyz = d_theta(y, z, theta);
    double dxz = d_theta(x, z, theta);
    CHECK(dxy == d_theta(y, x, theta));
    CHECK(dxz <= std::max(dxy, dyz) + 1e-15);
    CHECK((dxy == 0.0) == (x == y));
  }
}

TEST_CASE("cylinder diameters account for forced continuations") {
  const double theta = 0.5;
  SymbolicSystem f = full2();
  CHECK(cylinder_diam_theta(f, Word{0}, theta) == theta);
  CHECK(cylinder_diam_theta(f, Word{1, 0, 1}, theta) == theta * theta * theta);

  SymbolicSystem g = golden();
  // After symbol 1 only 0 may follow, so branching is delayed one step.
  CHECK(cylinder_diam_theta(g, Word{0}, theta) == theta);
  CHECK(cylinder_diam_theta(g, Word{1}, theta) == theta * theta);
  CHECK(cylinder_diam_theta(g, Word{0, 1}, theta) == theta * theta * theta);

  SymbolicSystem one(1, {{1}});
  CHECK(cylinder_diam_theta(one, Word{0}, theta) == 0.0);
  CHECK_THROWS_AS(cylinder_diam_theta(one, Word{}, theta), ValidationError);
}

TEST_CASE("word index round-trips and rejects inadmissible windows") {
  SymbolicSystem g = golden();
  auto idx = make_word_index(g, 3);
  REQUIRE(idx->size() == 5);
  CHECK(idx->depth() == 3);
  for (std::size_t i = 0; i < idx->size(); ++i) {
    CHECK(idx->index_of(idx->words()[i]) == static_cast<std::ptrdiff_t>(i));
  }
  Word longer{0, 0, 1, 0, 1};
  CHECK(idx->index_of(longer, 0) == 1);
  CHECK(idx->index_of(longer, 1) == 2);
  CHECK(idx->index_of(longer, 2) == 4);
  CHECK(idx->index_of(Word{0, 1, 1}) == -1);
  CHECK(idx->index_of(Word{1, 1, 0}) == -1);

  auto again = make_word_index(g, 3);
  CHECK(again.get() == idx.get());
}

TEST_CASE("word strings round-trip and flag bad characters") {
  CHECK(word_to_string(Word{0, 1, 0}) == "010");
  CHECK(word_from_string("010") == Word{0, 1, 0});
  CHECK(word_from_string("") == Word{});
  CHECK(word_to_string(Word{11, 2}) == "(11)2");
  CHECK_THROWS_AS(word_from_string("01a"), ValidationError);
}

TEST_CASE("theta validation accepts (0,1) only") {
  CHECK_NOTHROW(check_theta(0.5));
  CHECK_NOTHROW(check_theta(1e-6));
  CHECK_THROWS_AS(check_theta(0.0), ValidationError);
  CHECK_THROWS_AS(check_theta(1.0), ValidationError);
  CHECK_THROWS_AS(check_theta(-0.5), ValidationError);
  CHECK_THROWS_AS(check_theta(1.5), ValidationError);
}
