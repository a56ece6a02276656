#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ruellelab {

using Symbol = int;

// An admissible finite word over the alphabet; identifies the cylinder of
// all one-sided sequences beginning with it.
using Word = std::vector<Symbol>;

std::string word_to_string(const Word& w);
Word word_from_string(const std::string& s);

// Checks theta in (0,1); throws ValidationError otherwise.
void check_theta(double theta);

// One-sided subshift of finite type: alphabet {0..k0-1} and a 0/1 transition
// matrix A, where A[i][j] = 1 means j may follow i. Immutable.
class SymbolicSystem {
public:
  SymbolicSystem(int alphabet_size, std::vector<std::vector<int>> transitions);

  int alphabet_size() const { return k0_; }
  const std::vector<std::vector<int>>& transitions() const { return a_; }
  bool allowed(Symbol i, Symbol j) const { return a_[static_cast<size_t>(i)][static_cast<size_t>(j)] != 0; }
  const std::vector<Symbol>& successors(Symbol i) const { return succ_[static_cast<size_t>(i)]; }
  const std::vector<Symbol>& predecessors(Symbol j) const { return pred_[static_cast<size_t>(j)]; }

  bool is_admissible(const Word& w) const;
  bool irreducible() const { return irreducible_; }
  bool aperiodic() const { return aperiodic_; }

  // All admissible words of length n, lexicographically sorted.
  std::vector<Word> admissible_words(int n) const;

  // Number of n-periodic sequences = trace of A^n.
  std::int64_t periodic_point_count(int n) const;

  bool same_as(const SymbolicSystem& other) const;

private:
  int k0_;
  std::vector<std::vector<int>> a_;
  std::vector<std::vector<Symbol>> succ_;
  std::vector<std::vector<Symbol>> pred_;
  bool irreducible_ = false;
  bool aperiodic_ = false;
};

// D_theta on equal-length words: 0 if equal, 1 if first symbols differ,
// else theta^N with N the first disagreement index.
double d_theta(const Word& x, const Word& y, double theta);

// sup D_theta over the cylinder [w]: theta^j with j >= |w| the first position
// where two distinct admissible continuations exist; 0 if the continuation
// is forced forever.
double cylinder_diam_theta(const SymbolicSystem& system, const Word& w, double theta);

// Lexicographic index over the admissible words of one depth, with O(1)
// lookup by dense base-k0 encoding when that table fits, binary search
// otherwise. Shared by functions and matrices at the same depth.
class WordIndex {
public:
  WordIndex(const SymbolicSystem& system, int depth);

  int depth() const { return depth_; }
  const std::vector<Word>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

  // Index of the depth-length window w[offset..offset+depth); -1 if the
  // window is inadmissible.
  std::ptrdiff_t index_of(const Word& w, std::size_t offset = 0) const;
  std::ptrdiff_t index_of(const Symbol* w) const;

private:
  int depth_;
  int k0_;
  std::vector<Word> words_;
  std::vector<std::int32_t> dense_;  // empty when k0^depth too large
};

using WordIndexPtr = std::shared_ptr<const WordIndex>;

// Cached per-system index construction (indices are immutable and shareable).
WordIndexPtr make_word_index(const SymbolicSystem& system, int depth);

}  // namespace ruellelab
