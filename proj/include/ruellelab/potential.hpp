#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <type_traits>
#include <vector>

#include "ruellelab/errors.hpp"
#include "ruellelab/sft.hpp"

namespace ruellelab {

// A function of the first k symbols of a sequence, stored as a table over
// the admissible depth-k words in lexicographic order. Immutable.
template <typename Scalar>
class LocallyConstantFn {
public:
  LocallyConstantFn(const SymbolicSystem& system, int depth, std::vector<Scalar> values)
      : system_(system), index_(make_word_index(system, depth)), values_(std::move(values)) {
    if (values_.size() != index_->size()) {
      throw ValidationError("value table size " + std::to_string(values_.size()) +
                            " does not match admissible word count " + std::to_string(index_->size()));
    }
  }

  LocallyConstantFn(const SymbolicSystem& system, WordIndexPtr index, std::vector<Scalar> values)
      : system_(system), index_(std::move(index)), values_(std::move(values)) {
    if (values_.size() != index_->size()) throw ValidationError("value table size mismatch");
  }

  static LocallyConstantFn constant(const SymbolicSystem& system, int depth, Scalar c) {
    auto idx = make_word_index(system, depth);
    return LocallyConstantFn(system, idx, std::vector<Scalar>(idx->size(), c));
  }

  int depth() const { return index_->depth(); }
  const SymbolicSystem& system() const { return system_; }
  const WordIndexPtr& index() const { return index_; }
  const std::vector<Word>& words() const { return index_->words(); }
  const std::vector<Scalar>& values() const { return values_; }
  Scalar value_at_index(std::size_t i) const { return values_[i]; }

  // Value at the depth-k window starting at `offset` in w.
  Scalar evaluate_at(const Word& w, std::size_t offset) const {
    if (w.size() < offset + static_cast<std::size_t>(depth())) {
      throw ValidationError("word too short for evaluation at depth " + std::to_string(depth()));
    }
    std::ptrdiff_t i = index_->index_of(w, offset);
    if (i < 0) throw ValidationError("inadmissible word passed to evaluate: " + word_to_string(w));
    return values_[static_cast<std::size_t>(i)];
  }

  Scalar evaluate(const Word& w) const { return evaluate_at(w, 0); }

  // Birkhoff sum fn(w) + fn(sigma w) + ... + fn(sigma^{m-1} w).
  Scalar birkhoff_sum(const Word& w, int m) const {
    if (m < 0) throw ValidationError("birkhoff_sum needs m >= 0");
    if (m == 0) return Scalar(0);
    if (w.size() < static_cast<std::size_t>(m + depth() - 1)) {
      throw ValidationError("word too short for Birkhoff sum of length " + std::to_string(m));
    }
    Scalar s(0);
    for (int j = 0; j < m; ++j) s += evaluate_at(w, static_cast<std::size_t>(j));
    return s;
  }

  // Same table at a finer depth k2 >= depth; evaluation is unchanged.
  LocallyConstantFn refine(int k2) const {
    if (k2 < depth()) throw ValidationError("refine target depth below current depth");
    if (k2 == depth()) return *this;
    auto idx = make_word_index(system_, k2);
    std::vector<Scalar> vals(idx->size());
    for (std::size_t i = 0; i < idx->size(); ++i) {
      vals[i] = values_[static_cast<std::size_t>(index_->index_of(idx->words()[i], 0))];
    }
    return LocallyConstantFn(system_, idx, std::move(vals));
  }

  // Smallest depth d <= depth such that the table is constant on every
  // admissible depth-d prefix class (exact equality).
  int minimal_depth() const {
    int d = depth();
    while (d > 1 && reducible_to(d - 1)) --d;
    return d;
  }

  // True when all words sharing a depth-d prefix carry equal values.
  bool reducible_to(int d) const {
    if (d >= depth()) return true;
    if (d < 1) return false;
    const auto& ws = words();
    for (std::size_t i = 1; i < ws.size(); ++i) {
      if (std::equal(ws[i].begin(), ws[i].begin() + d, ws[i - 1].begin())) {
        if (values_[i] != values_[i - 1]) return false;
      }
    }
    // Lexicographic order groups shared prefixes contiguously, so adjacent
    // comparisons cover every class.
    return true;
  }

  // Reduce the stored table to depth d (requires reducible_to(d)).
  LocallyConstantFn reduce_to(int d) const {
    if (d == depth()) return *this;
    if (!reducible_to(d)) throw ValidationError("function is not depth-" + std::to_string(d) + "-reducible");
    auto idx = make_word_index(system_, d);
    std::vector<Scalar> vals(idx->size());
    const auto& ws = words();
    for (std::size_t i = 0; i < ws.size(); ++i) {
      Word prefix(ws[i].begin(), ws[i].begin() + d);
      vals[static_cast<std::size_t>(idx->index_of(prefix, 0))] = values_[i];
    }
    return LocallyConstantFn(system_, idx, std::move(vals));
  }

  template <typename Fn>
  auto map(Fn&& fn) const {
    using Out = std::decay_t<decltype(fn(values_[0]))>;
    std::vector<Out> vals;
    vals.reserve(values_.size());
    for (const Scalar& v : values_) vals.push_back(fn(v));
    return LocallyConstantFn<Out>(system_, index_, std::move(vals));
  }

  friend LocallyConstantFn operator+(const LocallyConstantFn& a, const LocallyConstantFn& b) {
    auto [ra, rb] = LocallyConstantFn::aligned(a, b);
    std::vector<Scalar> vals(ra.values_);
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] += rb.values_[i];
    return LocallyConstantFn(ra.system_, ra.index_, std::move(vals));
  }

  friend LocallyConstantFn operator-(const LocallyConstantFn& a, const LocallyConstantFn& b) {
    auto [ra, rb] = LocallyConstantFn::aligned(a, b);
    std::vector<Scalar> vals(ra.values_);
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] -= rb.values_[i];
    return LocallyConstantFn(ra.system_, ra.index_, std::move(vals));
  }

  friend LocallyConstantFn operator*(Scalar c, const LocallyConstantFn& a) {
    std::vector<Scalar> vals(a.values_);
    for (auto& v : vals) v *= c;
    return LocallyConstantFn(a.system_, a.index_, std::move(vals));
  }

  friend LocallyConstantFn operator*(const LocallyConstantFn& a, const LocallyConstantFn& b) {
    auto [ra, rb] = LocallyConstantFn::aligned(a, b);
    std::vector<Scalar> vals(ra.values_);
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] *= rb.values_[i];
    return LocallyConstantFn(ra.system_, ra.index_, std::move(vals));
  }

  static std::pair<LocallyConstantFn, LocallyConstantFn> aligned(const LocallyConstantFn& a,
                                                                 const LocallyConstantFn& b) {
    if (!a.system_.same_as(b.system_)) throw ValidationError("functions live on different systems");
    int k = std::max(a.depth(), b.depth());
    return {a.refine(k), b.refine(k)};
  }

private:
  SymbolicSystem system_;
  WordIndexPtr index_;
  std::vector<Scalar> values_;
};

using RealFn = LocallyConstantFn<double>;
using ComplexFn = LocallyConstantFn<std::complex<double>>;

template <typename Scalar>
double sup_norm(const LocallyConstantFn<Scalar>& fn) {
  double m = 0;
  for (const Scalar& v : fn.values()) m = std::max(m, std::abs(v));
  return m;
}

// |h|_theta = max |h(w) - h(w')| / D_theta(w, w') over distinct admissible
// depth-k word pairs (exhaustive, exact for locally constant functions).
template <typename Scalar>
double theta_seminorm(const LocallyConstantFn<Scalar>& fn, double theta) {
  check_theta(theta);
  const auto& ws = fn.words();
  const auto& vals = fn.values();
  double best = 0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    for (std::size_t j = i + 1; j < ws.size(); ++j) {
      std::size_t n = 0;
      while (n < ws[i].size() && ws[i][n] == ws[j][n]) ++n;
      double dist = n == 0 ? 1.0 : std::pow(theta, static_cast<double>(n));
      best = std::max(best, std::abs(vals[i] - vals[j]) / dist);
    }
  }
  return best;
}

struct NormReport {
  double sup_norm = 0;
  double theta_seminorm = 0;
  double theta_b_norm = 0;
  double b = 1;
};

template <typename Scalar>
NormReport norm_theta_b(const LocallyConstantFn<Scalar>& fn, double theta, double b) {
  if (std::abs(b) < 1.0) throw ValidationError("norm_theta_b requires |b| >= 1");
  NormReport r;
  r.b = b;
  r.sup_norm = sup_norm(fn);
  r.theta_seminorm = theta_seminorm(fn, theta);
  r.theta_b_norm = r.sup_norm + r.theta_seminorm / std::abs(b);
  return r;
}

template <typename Scalar>
struct DepthApproximation {
  LocallyConstantFn<Scalar> fn;
  double sup_error = 0;
  bool mean_fallback = false;  // some depth-p cylinder had measure zero
};

// nu-conditional average of fn over each admissible depth-p cylinder.
// `cylinder_mass` must return the nu-mass of a depth-k word (k = depth(fn)).
template <typename Scalar>
DepthApproximation<Scalar> approximate_by_depth(const LocallyConstantFn<Scalar>& fn, int p,
                                                const std::function<double(const Word&)>& cylinder_mass) {
  if (p < 1 || p >= fn.depth()) throw ValidationError("approximate_by_depth needs 1 <= p < depth");
  auto idx = make_word_index(fn.system(), p);
  std::vector<Scalar> num(idx->size(), Scalar(0));
  std::vector<double> den(idx->size(), 0.0);
  std::vector<Scalar> plain(idx->size(), Scalar(0));
  std::vector<double> count(idx->size(), 0.0);
  const auto& ws = fn.words();
  for (std::size_t i = 0; i < ws.size(); ++i) {
    std::size_t g = static_cast<std::size_t>(idx->index_of(ws[i], 0));
    double m = cylinder_mass(ws[i]);
    if (m < 0) throw ValidationError("negative cylinder mass");
    num[g] += Scalar(m) * fn.values()[i];
    den[g] += m;
    plain[g] += fn.values()[i];
    count[g] += 1;
  }
  DepthApproximation<Scalar> out{LocallyConstantFn<Scalar>(fn.system(), idx, std::vector<Scalar>(idx->size(), Scalar(0))),
                                 0.0, false};
  std::vector<Scalar> vals(idx->size());
  for (std::size_t g = 0; g < idx->size(); ++g) {
    if (den[g] > 0) {
      vals[g] = num[g] / Scalar(den[g]);
    } else {
      vals[g] = plain[g] / Scalar(count[g]);
      out.mean_fallback = true;
    }
  }
  out.fn = LocallyConstantFn<Scalar>(fn.system(), idx, std::move(vals));
  for (std::size_t i = 0; i < ws.size(); ++i) {
    std::size_t g = static_cast<std::size_t>(idx->index_of(ws[i], 0));
    out.sup_error = std::max(out.sup_error, std::abs(fn.values()[i] - out.fn.values()[g]));
  }
  return out;
}

}  // namespace ruellelab
