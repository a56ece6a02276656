#include "ruellelab/sft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <queue>
#include <utility>

#include "ruellelab/errors.hpp"

namespace ruellelab {

std::string word_to_string(const Word& w) {
  std::string s;
  s.reserve(w.size());
  for (Symbol c : w) {
    if (c < 0 || c > 9) {
      s += "(" + std::to_string(c) + ")";
    } else {
      s += static_cast<char>('0' + c);
    }
  }
  return s;
}

Word word_from_string(const std::string& s) {
  Word w;
  w.reserve(s.size());
  for (char c : s) {
    if (c < '0' || c > '9') throw ValidationError("word string must be decimal digits: " + s);
    w.push_back(c - '0');
  }
  return w;
}

void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ValidationError("theta must lie in (0,1), got " + std::to_string(theta));
  }
}

namespace {

bool reachability_irreducible(const std::vector<std::vector<int>>& a) {
  const std::size_t n = a.size();
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> q;
    q.push(s);
    // seen[s] stays 0 until s is re-entered: we need s reachable from s too,
    // via a nonempty path.
    std::vector<char> visited(n, 0);
    visited[s] = 1;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v) {
        if (a[u][v] && !seen[v]) {
          seen[v] = 1;
          if (!visited[v]) {
            visited[v] = 1;
            q.push(v);
          }
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
  }
  return true;
}

int cycle_gcd(const std::vector<std::vector<int>>& a) {
  // BFS levels from vertex 0; gcd of (level(u) + 1 - level(v)) over edges
  // u -> v within the reachable component gives the period of the graph.
  const std::size_t n = a.size();
  std::vector<int> level(n, -1);
  std::queue<std::size_t> q;
  level[0] = 0;
  q.push(0);
  int g = 0;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t v = 0; v < n; ++v) {
      if (!a[u][v]) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      } else {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    }
  }
  return g == 0 ? 0 : g;
}

}  // namespace

SymbolicSystem::SymbolicSystem(int alphabet_size, std::vector<std::vector<int>> transitions)
    : k0_(alphabet_size), a_(std::move(transitions)) {
  if (k0_ < 1) throw ValidationError("alphabet_size must be >= 1");
  if (a_.size() != static_cast<std::size_t>(k0_)) {
    throw ValidationError("transition matrix must have alphabet_size rows");
  }
  std::vector<int> col_sum(static_cast<std::size_t>(k0_), 0);
  for (const auto& row : a_) {
    if (row.size() != static_cast<std::size_t>(k0_)) {
      throw ValidationError("transition matrix must be square");
    }
    int row_sum = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 0 && row[j] != 1) throw ValidationError("transition entries must be 0 or 1");
      row_sum += row[j];
      col_sum[j] += row[j];
    }
    if (row_sum == 0) throw ValidationError("transition matrix has an all-zero row (dead symbol)");
  }
  for (int c : col_sum) {
    if (c == 0) throw ValidationError("transition matrix has an all-zero column (unreachable symbol)");
  }
  succ_.resize(static_cast<std::size_t>(k0_));
  pred_.resize(static_cast<std::size_t>(k0_));
  for (int i = 0; i < k0_; ++i) {
    for (int j = 0; j < k0_; ++j) {
      if (a_[static_cast<size_t>(i)][static_cast<size_t>(j)]) {
        succ_[static_cast<size_t>(i)].push_back(j);
        pred_[static_cast<size_t>(j)].push_back(i);
      }
    }
  }
  irreducible_ = reachability_irreducible(a_);
  aperiodic_ = irreducible_ && cycle_gcd(a_) == 1;
}

bool SymbolicSystem::is_admissible(const Word& w) const {
  if (w.empty()) return false;
  for (Symbol c : w) {
    if (c < 0 || c >= k0_) return false;
  }
  for (std::size_t j = 0; j + 1 < w.size(); ++j) {
    if (!allowed(w[j], w[j + 1])) return false;
  }
  return true;
}

std::vector<Word> SymbolicSystem::admissible_words(int n) const {
  if (n < 1) throw ValidationError("word length must be >= 1");
  std::vector<Word> out;
  Word cur;
  cur.reserve(static_cast<std::size_t>(n));
  // Iterative DFS in symbol order yields lexicographic output.
  struct Frame {
    Symbol next;
  };
  std::vector<Frame> stack;
  stack.push_back({0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next >= k0_) {
      stack.pop_back();
      if (!cur.empty()) cur.pop_back();
      continue;
    }
    Symbol s = f.next++;
    if (!cur.empty() && !allowed(cur.back(), s)) continue;
    cur.push_back(s);
    if (static_cast<int>(cur.size()) == n) {
      out.push_back(cur);
      cur.pop_back();
    } else {
      stack.push_back({0});
    }
  }
  return out;
}

std::int64_t SymbolicSystem::periodic_point_count(int n) const {
  if (n < 1) throw ValidationError("period must be >= 1");
  const std::size_t k = static_cast<std::size_t>(k0_);
  std::vector<std::vector<std::int64_t>> p(k, std::vector<std::int64_t>(k, 0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) p[i][j] = a_[i][j];
  }
  auto mul = [&k](const std::vector<std::vector<std::int64_t>>& x,
                  const std::vector<std::vector<std::int64_t>>& y) {
    std::vector<std::vector<std::int64_t>> z(k, std::vector<std::int64_t>(k, 0));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t l = 0; l < k; ++l) {
        if (x[i][l] == 0) continue;
        for (std::size_t j = 0; j < k; ++j) z[i][j] += x[i][l] * y[l][j];
      }
    }
    return z;
  };
  std::vector<std::vector<std::int64_t>> acc(k, std::vector<std::int64_t>(k, 0));
  for (std::size_t i = 0; i < k; ++i) acc[i][i] = 1;
  int e = n;
  while (e > 0) {
    if (e & 1) acc = mul(acc, p);
    p = mul(p, p);
    e >>= 1;
  }
  std::int64_t tr = 0;
  for (std::size_t i = 0; i < k; ++i) tr += acc[i][i];
  return tr;
}

bool SymbolicSystem::same_as(const SymbolicSystem& other) const {
  return k0_ == other.k0_ && a_ == other.a_;
}

double d_theta(const Word& x, const Word& y, double theta) {
  check_theta(theta);
  if (x.size() != y.size()) throw ValidationError("d_theta requires equal-length words");
  std::size_t n = 0;
  while (n < x.size() && x[n] == y[n]) ++n;
  if (n == x.size()) return 0.0;
  if (n == 0) return 1.0;
  return std::pow(theta, static_cast<double>(n));
}

double cylinder_diam_theta(const SymbolicSystem& system, const Word& w, double theta) {
  check_theta(theta);
  if (!system.is_admissible(w)) throw ValidationError("cylinder_diam_theta: inadmissible word");
  Symbol s = w.back();
  std::size_t j = w.size();
  std::vector<char> visited(static_cast<std::size_t>(system.alphabet_size()), 0);
  for (;;) {
    const auto& nxt = system.successors(s);
    if (nxt.size() >= 2) return std::pow(theta, static_cast<double>(j));
    // Forced single continuation; if the forced chain cycles, the cylinder
    // is a single point.
    if (visited[static_cast<std::size_t>(s)]) return 0.0;
    visited[static_cast<std::size_t>(s)] = 1;
    s = nxt.front();
    ++j;
  }
}

WordIndex::WordIndex(const SymbolicSystem& system, int depth)
    : depth_(depth), k0_(system.alphabet_size()), words_(system.admissible_words(depth)) {
  double dense_size = std::pow(static_cast<double>(k0_), depth);
  if (dense_size <= (1 << 24)) {
    std::size_t size = 1;
    for (int i = 0; i < depth_; ++i) size *= static_cast<std::size_t>(k0_);
    dense_.assign(size, -1);
    for (std::size_t idx = 0; idx < words_.size(); ++idx) {
      std::size_t code = 0;
      for (Symbol c : words_[idx]) code = code * static_cast<std::size_t>(k0_) + static_cast<std::size_t>(c);
      dense_[code] = static_cast<std::int32_t>(idx);
    }
  }
}

std::ptrdiff_t WordIndex::index_of(const Word& w, std::size_t offset) const {
  if (w.size() < offset + static_cast<std::size_t>(depth_)) return -1;
  return index_of(w.data() + offset);
}

std::ptrdiff_t WordIndex::index_of(const Symbol* w) const {
  if (!dense_.empty()) {
    std::size_t code = 0;
    for (int i = 0; i < depth_; ++i) {
      Symbol c = w[i];
      if (c < 0 || c >= k0_) return -1;
      code = code * static_cast<std::size_t>(k0_) + static_cast<std::size_t>(c);
    }
    return dense_[code];
  }
  auto cmp = [this](const Word& a, const Symbol* b) {
    return std::lexicographical_compare(a.begin(), a.end(), b, b + depth_);
  };
  auto it = std::lower_bound(words_.begin(), words_.end(), w, cmp);
  if (it == words_.end() || !std::equal(it->begin(), it->end(), w)) return -1;
  return it - words_.begin();
}

WordIndexPtr make_word_index(const SymbolicSystem& system, int depth) {
  static std::mutex cache_mutex;
  static std::map<std::pair<std::string, int>, std::weak_ptr<const WordIndex>> cache;

  std::string sig;
  sig.reserve(system.transitions().size() * (system.transitions().size() + 1) + 8);
  sig += std::to_string(system.alphabet_size());
  for (const auto& row : system.transitions()) {
    sig += '|';
    for (int bit : row) sig += bit ? '1' : '0';
  }

  std::lock_guard<std::mutex> lock(cache_mutex);
  auto key = std::make_pair(std::move(sig), depth);
  auto it = cache.find(key);
  if (it != cache.end()) {
    if (auto hit = it->second.lock()) return hit;
  }
  auto built = std::make_shared<const WordIndex>(system, depth);
  cache[std::move(key)] = built;
  return built;
}

}  // namespace ruellelab
