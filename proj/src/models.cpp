#include "ruellelab/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "ruellelab/errors.hpp"
#include "ruellelab/util.hpp"

namespace ruellelab {

namespace {

bool roof_is_two_valued(const RealFn& roof) {
  RealFn reduced = roof.reduce_to(roof.minimal_depth());
  std::set<double> distinct(reduced.values().begin(), reduced.values().end());
  return distinct.size() == 2;
}

}  // namespace

SuspensionModel make_model(SymbolicSystem system, RealFn roof, RealFn potential, double theta,
                           std::string label) {
  check_theta(theta);
  if (!roof.system().same_as(system) || !potential.system().same_as(system)) {
    throw ValidationError("roof/potential defined on a different system");
  }
  double tmin = *std::min_element(roof.values().begin(), roof.values().end());
  if (!(tmin > 0)) throw ValidationError("roof must be strictly positive, min value " + std::to_string(tmin));
  SuspensionModel m{std::move(system), std::move(roof), std::move(potential), theta, std::move(label), {}};
  if (roof_is_two_valued(m.roof)) {
    m.warnings.push_back(
        "roof takes exactly two values; such a roof is lattice-plus-constant, so the "
        "suspension cannot be mixing");
  }
  return m;
}

double min_roof(const SuspensionModel& m) {
  return *std::min_element(m.roof.values().begin(), m.roof.values().end());
}

double max_roof(const SuspensionModel& m) {
  return *std::max_element(m.roof.values().begin(), m.roof.values().end());
}

std::vector<std::string> preset_names() {
  return {"full2-const", "full2-lattice", "full2-nonlattice", "golden-mean-const"};
}

SuspensionModel preset(const std::string& name) {
  const double theta = 0.5;
  std::vector<std::vector<int>> full2{{1, 1}, {1, 1}};
  if (name == "full2-const") {
    SymbolicSystem sys(2, full2);
    return make_model(sys, RealFn::constant(sys, 1, 1.0), RealFn::constant(sys, 1, 0.0), theta, name);
  }
  if (name == "full2-lattice") {
    SymbolicSystem sys(2, full2);
    return make_model(sys, RealFn(sys, 1, {1.0, 2.0}), RealFn::constant(sys, 1, 0.0), theta, name);
  }
  if (name == "full2-nonlattice") {
    SymbolicSystem sys(2, full2);
    // Word order 00, 01, 10, 11. Periods of the short orbits: 1 ("0"),
    // 1 + sqrt(3) ("1"), 2 + sqrt(2) ("01") are rationally incompatible.
    RealFn roof(sys, 2, {1.0, 1.0, 1.0 + std::sqrt(2.0), 1.0 + std::sqrt(3.0)});
    return make_model(sys, roof, RealFn::constant(sys, 1, 0.0), theta, name);
  }
  if (name == "golden-mean-const") {
    SymbolicSystem sys(2, {{1, 1}, {1, 0}});
    return make_model(sys, RealFn::constant(sys, 1, 1.0), RealFn::constant(sys, 1, 0.0), theta, name);
  }
  std::string names;
  for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
  throw ValidationError("unknown preset '" + name + "'; available: " + names);
}

SuspensionModel random_model(std::uint64_t seed, int k0, int roof_depth, double variation_decay) {
  if (k0 < 1 || k0 > 6) throw ValidationError("random_model needs 1 <= k0 <= 6");
  if (roof_depth < 1 || roof_depth > 6) throw ValidationError("random_model needs 1 <= roof_depth <= 6");
  if (!(variation_decay > 0 && variation_decay < 1)) {
    throw ValidationError("variation_decay must lie in (0,1)");
  }
  std::mt19937_64 rng(mix_seed(seed, 0x6d6f64656cULL));
  std::bernoulli_distribution edge(0.6);

  std::vector<std::vector<int>> a;
  bool ok = false;
  for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
    a.assign(static_cast<std::size_t>(k0), std::vector<int>(static_cast<std::size_t>(k0), 0));
    for (auto& row : a) {
      for (auto& e : row) e = edge(rng) ? 1 : 0;
    }
    try {
      SymbolicSystem candidate(k0, a);
      ok = candidate.irreducible();
    } catch (const ValidationError&) {
      ok = false;
    }
  }
  if (!ok) throw ValidationError("random_model failed to draw an irreducible matrix");
  SymbolicSystem sys(k0, a);

  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto perturbation = [&](double base, double amp_scale) {
    RealFn fn = RealFn::constant(sys, 1, base);
    double total_amp = 0;
    for (int d = 1; d <= roof_depth; ++d) total_amp += std::pow(variation_decay, d);
    double scale = amp_scale / std::max(1.0, total_amp);
    for (int d = 1; d <= roof_depth; ++d) {
      auto idx = make_word_index(sys, d);
      std::vector<double> vals(idx->size());
      double amp = std::pow(variation_decay, d) * scale;
      for (auto& v : vals) v = amp * unit(rng);
      fn = fn + RealFn(sys, idx, std::move(vals));
    }
    return fn;
  };

  RealFn roof = perturbation(1.0, 0.9);
  RealFn f = perturbation(0.0, 0.5);
  return make_model(sys, roof, f, 0.5, "random-" + std::to_string(seed));
}

}  // namespace ruellelab
