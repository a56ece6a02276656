#include "ruellelab/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ruellelab/errors.hpp"
#include "ruellelab/util.hpp"

namespace ruellelab {

namespace {

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

double profile_mean(const Observable& a) {
  const auto& p = a.height_profile;
  if (p.empty()) return 1.0;
  if (p.size() == 1) return p[0];
  double h = 1.0 / (p.size() - 1);
  double acc = 0.5 * (p.front() + p.back());
  for (std::size_t i = 1; i + 1 < p.size(); ++i) acc += p[i];
  return acc * h;
}

double profile_mean_square(const Observable& a) {
  const auto& p = a.height_profile;
  if (p.empty()) return 1.0;
  if (p.size() == 1) return p[0] * p[0];
  double h = 1.0 / (p.size() - 1);
  double acc = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    acc += h / 3.0 * (p[i] * p[i] + p[i] * p[i + 1] + p[i + 1] * p[i + 1]);
  }
  return acc;
}

// Depth-k window Markov chain with the Gibbs marginals: stationary law over
// windows plus per-window successor edges with cumulative probabilities.
struct BlockChain {
  int k = 1;
  WordIndexPtr idx;
  std::vector<double> window_cum;
  struct Edge {
    double cum = 0;
    Symbol sym = 0;
    std::size_t next = 0;
  };
  std::vector<std::vector<Edge>> edges;
};

BlockChain make_chain(const SuspensionModel& model, const GibbsMeasure& nu) {
  BlockChain chain;
  chain.k = nu.block_depth();
  chain.idx = make_word_index(model.system, chain.k);
  auto masses = nu.mass_table(chain.k);
  auto idx1 = make_word_index(model.system, chain.k + 1);
  auto masses1 = nu.mass_table(chain.k + 1);

  chain.window_cum.resize(chain.idx->size());
  double acc = 0;
  for (std::size_t i = 0; i < chain.idx->size(); ++i) {
    acc += (*masses)[i];
    chain.window_cum[i] = acc;
  }
  for (double& c : chain.window_cum) c /= acc;
  chain.window_cum.back() = 1.0;

  chain.edges.resize(chain.idx->size());
  Word ext;
  for (std::size_t i = 0; i < chain.idx->size(); ++i) {
    const Word& w = chain.idx->words()[i];
    ext = w;
    ext.push_back(0);
    double total = 0;
    for (Symbol j : model.system.successors(w.back())) {
      ext.back() = j;
      std::ptrdiff_t i1 = idx1->index_of(ext);
      std::ptrdiff_t nxt = chain.idx->index_of(ext, 1);
      double p = (*masses1)[static_cast<std::size_t>(i1)] / (*masses)[i];
      total += p;
      chain.edges[i].push_back(
          BlockChain::Edge{total, j, static_cast<std::size_t>(nxt)});
    }
    for (auto& e : chain.edges[i]) e.cum /= total;
    chain.edges[i].back().cum = 1.0;
  }
  return chain;
}

std::size_t sample_cum(const std::vector<double>& cum, double u) {
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) --it;
  return static_cast<std::size_t>(it - cum.begin());
}

void emit_path(const BlockChain& chain, std::size_t start, std::size_t length,
               std::mt19937_64& rng, std::vector<Symbol>& out) {
  out.clear();
  out.reserve(length);
  const Word& w0 = chain.idx->words()[start];
  for (Symbol s : w0) {
    if (out.size() == length) return;
    out.push_back(s);
  }
  std::size_t state = start;
  while (out.size() < length) {
    const auto& row = chain.edges[state];
    double u = uniform01(rng);
    std::size_t e = 0;
    while (e + 1 < row.size() && row[e].cum <= u) ++e;
    out.push_back(row[e].sym);
    state = row[e].next;
  }
}

// Monotone locator of the suspension-flow point at a given flow time: the
// window position m with tau_m <= target < tau_{m+1} and the height above it.
struct FlowPointer {
  std::size_t m = 0;
  double cum = 0;

  void advance(const std::vector<Symbol>& path, const RealFn& roof, double target) {
    for (;;) {
      double step = roof.evaluate_at(path, m);
      if (cum + step > target) return;
      cum += step;
      ++m;
    }
  }
};

double eval_observable(const Observable& obs, const std::vector<Symbol>& path,
                       const RealFn& roof, const FlowPointer& ptr, double target) {
  double tau = roof.evaluate_at(path, ptr.m);
  double unit = (target - ptr.cum) / tau;
  return obs.base.evaluate_at(path, ptr.m) * profile_value(obs, unit);
}

}  // namespace

double profile_value(const Observable& a, double u) {
  const auto& p = a.height_profile;
  if (p.empty()) return 1.0;
  if (p.size() == 1) return p[0];
  double clamped = std::clamp(u, 0.0, 1.0);
  double t = clamped * (p.size() - 1);
  std::size_t i = std::min(static_cast<std::size_t>(t), p.size() - 2);
  double frac = t - static_cast<double>(i);
  return p[i] * (1.0 - frac) + p[i + 1] * frac;
}

double flow_mean(const SuspensionModel& model, const Observable& a, const GibbsMeasure& nu) {
  double den = nu.integrate(model.roof);
  double num = nu.integrate(a.base * model.roof);
  return profile_mean(a) * num / den;
}

double flow_mean_square(const SuspensionModel& model, const Observable& a,
                        const GibbsMeasure& nu) {
  double den = nu.integrate(model.roof);
  double num = nu.integrate(a.base * a.base * model.roof);
  return profile_mean_square(a) * num / den;
}

std::vector<Symbol> sample_gibbs_path(const SuspensionModel& model, std::size_t length,
                                      std::uint64_t seed) {
  if (length < 1) throw ValidationError("sample_gibbs_path needs length >= 1");
  NormalizedPotential np0 =
      normalize(model.system, model.potential, model.roof, 0.0, model.theta);
  GibbsMeasure nu(model.system, np0.f_a, np0.f_a.depth());
  BlockChain chain = make_chain(model, nu);
  std::mt19937_64 rng(mix_seed(seed, 0));
  std::size_t start = sample_cum(chain.window_cum, uniform01(rng));
  std::vector<Symbol> out;
  emit_path(chain, start, length, rng, out);
  return out;
}

CorrelationTable correlation(const SuspensionModel& model, const Observable& a,
                             const Observable& b, const std::vector<double>& t_grid,
                             std::size_t samples, std::uint64_t seed, bool center,
                             int replicas) {
  if (t_grid.empty()) throw ValidationError("correlation needs a nonempty t grid");
  for (double t : t_grid) {
    if (!(t >= 0)) throw ValidationError("correlation t grid entries must be >= 0");
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw ValidationError("correlation t grid must be strictly increasing");
    }
  }
  if (replicas < 1) throw ValidationError("correlation needs replicas >= 1");
  constexpr std::size_t kBatches = 32;
  std::size_t per_rep = samples / static_cast<std::size_t>(replicas);
  std::size_t batch_size = per_rep / kBatches;
  if (batch_size < 1) {
    throw ValidationError("correlation needs at least 32 samples per replica");
  }
  per_rep = batch_size * kBatches;

  NormalizedPotential np0 =
      normalize(model.system, model.potential, model.roof, 0.0, model.theta);
  GibbsMeasure nu(model.system, np0.f_a, np0.f_a.depth());
  BlockChain chain = make_chain(model, nu);

  double mu_a = center ? flow_mean(model, a, nu) : 0.0;
  double mu_b = center ? flow_mean(model, b, nu) : 0.0;
  double delta = nu.integrate(model.roof);
  double t_max = t_grid.back();
  double tau_min = min_roof(model);
  double tau_max = max_roof(model);

  std::vector<double> start_cum(chain.idx->size());
  {
    auto masses = nu.mass_table(chain.k);
    double acc = 0;
    for (std::size_t i = 0; i < chain.idx->size(); ++i) {
      acc += (*masses)[i] * model.roof.evaluate_at(chain.idx->words()[i], 0);
      start_cum[i] = acc;
    }
    for (double& c : start_cum) c /= acc;
    start_cum.back() = 1.0;
  }

  int max_depth = std::max({a.base.depth(), b.base.depth(), model.roof.depth()});
  std::size_t path_len =
      static_cast<std::size_t>(
          std::ceil((tau_max + static_cast<double>(per_rep) * delta + t_max) / tau_min)) +
      static_cast<std::size_t>(chain.k + max_depth) + 8;

  std::vector<std::vector<double>> rep_c(static_cast<std::size_t>(replicas));
  std::vector<std::vector<double>> rep_var(static_cast<std::size_t>(replicas));

  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
    std::mt19937_64 rng(mix_seed(seed, 100 + r));
    std::size_t start = sample_cum(start_cum, uniform01(rng));
    double s0 = uniform01(rng) * model.roof.evaluate_at(chain.idx->words()[start], 0);

    std::vector<Symbol> path;
    emit_path(chain, start, path_len, rng, path);

    std::vector<double> a_vals(per_rep);
    FlowPointer pa;
    for (std::size_t j = 0; j < per_rep; ++j) {
      double target = s0 + static_cast<double>(j) * delta;
      pa.advance(path, model.roof, target);
      a_vals[j] = eval_observable(a, path, model.roof, pa, target);
    }

    rep_c[r].assign(t_grid.size(), 0.0);
    rep_var[r].assign(t_grid.size(), 0.0);
    std::vector<double> batch(kBatches);
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
      std::fill(batch.begin(), batch.end(), 0.0);
      FlowPointer pb;
      for (std::size_t j = 0; j < per_rep; ++j) {
        double target = s0 + static_cast<double>(j) * delta + t_grid[ti];
        pb.advance(path, model.roof, target);
        batch[j / batch_size] += a_vals[j] * eval_observable(b, path, model.roof, pb, target);
      }
      double mean = 0;
      for (double& v : batch) {
        v = v / static_cast<double>(batch_size) - mu_a * mu_b;
        mean += v;
      }
      mean /= static_cast<double>(kBatches);
      double var = 0;
      for (double v : batch) {
        double left_out = (static_cast<double>(kBatches) * mean - v) /
                          static_cast<double>(kBatches - 1);
        var += (left_out - mean) * (left_out - mean);
      }
      var *= static_cast<double>(kBatches - 1) / static_cast<double>(kBatches);
      rep_c[r][ti] = mean;
      rep_var[r][ti] = var;
    }
  });

  CorrelationTable table;
  table.t_grid = t_grid;
  table.samples = per_rep * static_cast<std::size_t>(replicas);
  table.seed = seed;
  table.replicas = replicas;
  table.mean_a = mu_a;
  table.mean_b = mu_b;
  table.c_values.resize(t_grid.size());
  table.stderrs.resize(t_grid.size());
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    bool all_positive = true;
    for (int r = 0; r < replicas; ++r) {
      if (!(rep_var[r][ti] > 0)) all_positive = false;
    }
    double value = 0, variance = 0;
    if (all_positive) {
      double wsum = 0;
      for (int r = 0; r < replicas; ++r) {
        double w = 1.0 / rep_var[r][ti];
        wsum += w;
        value += w * rep_c[r][ti];
      }
      value /= wsum;
      variance = 1.0 / wsum;
    } else {
      double vsum = 0;
      for (int r = 0; r < replicas; ++r) {
        value += rep_c[r][ti];
        vsum += rep_var[r][ti];
      }
      value /= replicas;
      variance = vsum / (static_cast<double>(replicas) * replicas);
    }
    table.c_values[ti] = value;
    table.stderrs[ti] = std::max(std::sqrt(variance), 1e-300);
  }
  return table;
}

DecayFit fit_decay_rate(const CorrelationTable& table) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < table.t_grid.size(); ++i) {
    if (std::abs(table.c_values[i]) > 3.0 * table.stderrs[i]) {
      xs.push_back(table.t_grid[i]);
      ys.push_back(std::log(std::abs(table.c_values[i])));
    }
  }
  if (xs.size() < 8) {
    throw NumericalError("signal below noise; increase samples (" + std::to_string(xs.size()) +
                         " of " + std::to_string(table.t_grid.size()) +
                         " grid points exceed 3 standard errors)");
  }
  LineFit fit = fit_line(xs, ys);
  DecayFit out;
  out.c = -fit.slope;
  out.prefactor = std::exp(fit.intercept);
  out.r2 = fit.r2;
  out.points = xs.size();
  return out;
}

}  // namespace ruellelab
