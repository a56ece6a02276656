#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ruellelab/complexop.hpp"
#include "ruellelab/correlations.hpp"
#include "ruellelab/dolgopyat.hpp"
#include "ruellelab/errors.hpp"
#include "ruellelab/model_io.hpp"
#include "ruellelab/models.hpp"
#include "ruellelab/orbits.hpp"
#include "ruellelab/transfer.hpp"
#include "ruellelab/util.hpp"
#include "ruellelab/version.hpp"

namespace {

using nlohmann::json;
using namespace ruellelab;

struct ModelArgs {
  std::string model_path;
  std::string preset_name;
};

void add_model_options(CLI::App* sub, ModelArgs& args) {
  sub->add_option("--model", args.model_path, "Path to a model JSON file");
  sub->add_option("--preset", args.preset_name, "Preset name (see `preset` command)");
}

SuspensionModel resolve_model(const ModelArgs& args) {
  if (!args.model_path.empty() && !args.preset_name.empty()) {
    throw ValidationError("give either --model or --preset, not both");
  }
  if (!args.model_path.empty()) return load_model(args.model_path);
  if (!args.preset_name.empty()) return preset(args.preset_name);
  throw ValidationError("a model is required: --model PATH or --preset NAME");
}

json model_echo(const ModelArgs& args, const SuspensionModel& model) {
  json echo;
  echo["model"] = args.model_path;
  echo["preset"] = args.preset_name;
  echo["label"] = model.label;
  echo["theta"] = model.theta;
  echo["alphabet_size"] = model.system.alphabet_size();
  echo["roof_depth"] = model.roof.depth();
  echo["potential_depth"] = model.potential.depth();
  if (!model.warnings.empty()) echo["warnings"] = model.warnings;
  return echo;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw ValidationError("cannot write output file: " + out_path);
  out << text;
}

void print_json(const json& doc) { std::cout << doc.dump(2) << "\n"; }

RealFn resolve_potential_arg(const SymbolicSystem& system, const std::string& arg) {
  std::string text = arg;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') {
    std::ifstream in(arg);
    if (!in) throw ValidationError("cannot open potential file: " + arg);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  json node;
  try {
    node = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("potential JSON malformed: ") + e.what());
  }
  try {
    int depth = node.at("depth").get<int>();
    std::vector<double> values = node.at("values").get<std::vector<double>>();
    auto idx = make_word_index(system, depth);
    if (values.size() != idx->size()) {
      throw ValidationError("potential.values has " + std::to_string(values.size()) +
                            " entries; depth " + std::to_string(depth) + " needs " +
                            std::to_string(idx->size()));
    }
    return RealFn(system, idx, std::move(values));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("potential JSON invalid: ") + e.what());
  }
}

int run_pressure(const ModelArgs& margs, const std::string& potential_arg, double tol) {
  SuspensionModel model = resolve_model(margs);
  if (!potential_arg.empty()) {
    model.potential = resolve_potential_arg(model.system, potential_arg);
  }
  NormalizedPotential np = normalize(model.system, model.potential, model.roof, 0.0, model.theta,
                                     RpfOptions{512, tol, 100000});
  EntropyResult ent = topological_entropy(model, tol);

  json doc;
  doc["version"] = kVersion;
  doc["command"] = "pressure";
  doc["params"] = model_echo(margs, model);
  doc["params"]["tol"] = tol;
  doc["params"]["potential"] = potential_arg;
  doc["result"]["P_f"] = np.P_f;
  doc["result"]["h_T"] = ent.h_T;
  doc["result"]["h_T_residual"] = ent.residual;
  doc["result"]["rpf"]["lambda"] = np.data.lambda;
  doc["result"]["rpf"]["residual"] = np.data.residual;
  doc["result"]["rpf"]["depth"] = np.f_a.depth();
  doc["result"]["T"] = np.T;
  print_json(doc);
  return 0;
}

int run_scan(const ModelArgs& margs, double a, double bmin, double bmax, int steps,
             int depth_offset, const std::string& out_path) {
  if (steps < 1) throw ValidationError("scan needs --steps >= 1");
  if (!(bmax >= bmin)) throw ValidationError("scan needs --bmax >= --bmin");
  SuspensionModel model = resolve_model(margs);
  std::vector<double> grid;
  for (int i = 0; i < steps; ++i) {
    grid.push_back(steps == 1 ? bmin : bmin + (bmax - bmin) * i / (steps - 1));
  }
  std::vector<ScanRow> rows = contraction_scan(model, a, grid, depth_offset);
  std::ostringstream csv;
  csv << "b,spectral_radius,gap,second_modulus\n";
  for (const ScanRow& row : rows) {
    csv << format_double(row.b) << "," << format_double(row.spectral_radius) << ","
        << format_double(row.gap) << "," << format_double(row.second_modulus) << "\n";
  }
  emit(out_path, csv.str());
  if (!out_path.empty()) {
    json doc;
    doc["version"] = kVersion;
    doc["command"] = "scan";
    doc["params"] = model_echo(margs, model);
    doc["params"]["a"] = a;
    doc["params"]["bmin"] = bmin;
    doc["params"]["bmax"] = bmax;
    doc["params"]["steps"] = steps;
    doc["params"]["depth_offset"] = depth_offset;
    doc["result"]["rows"] = rows.size();
    doc["result"]["out"] = out_path;
    print_json(doc);
  }
  return 0;
}

int run_orbits(const ModelArgs& margs, int n_max, const std::string& out_path) {
  SuspensionModel model = resolve_model(margs);
  std::vector<OrbitRecord> orbits = primitive_orbits(model, n_max);
  std::ostringstream csv;
  csv << "necklace,n,period\n";
  for (const OrbitRecord& rec : orbits) {
    csv << word_to_string(rec.necklace) << "," << rec.n << "," << format_double(rec.period)
        << "\n";
  }
  emit(out_path, csv.str());
  if (!out_path.empty()) {
    json doc;
    doc["version"] = kVersion;
    doc["command"] = "orbits";
    doc["params"] = model_echo(margs, model);
    doc["params"]["n_max"] = n_max;
    doc["result"]["orbits"] = orbits.size();
    doc["result"]["out"] = out_path;
    print_json(doc);
  }
  return 0;
}

int run_zeta(const ModelArgs& margs, double s_re, double s_im, int n_max) {
  SuspensionModel model = resolve_model(margs);
  std::complex<double> s(s_re, s_im);
  ZetaDet det = zeta_det(model, s);
  EntropyResult ent = topological_entropy(model);

  json doc;
  doc["version"] = kVersion;
  doc["command"] = "zeta";
  doc["params"] = model_echo(margs, model);
  doc["params"]["s_re"] = s_re;
  doc["params"]["s_im"] = s_im;
  doc["params"]["n_max"] = n_max;
  doc["result"]["h_T"] = ent.h_T;
  doc["result"]["det"]["value_re"] = det.value.real();
  doc["result"]["det"]["value_im"] = det.value.imag();
  doc["result"]["det"]["det_re"] = det.det.real();
  doc["result"]["det"]["det_im"] = det.det.imag();
  doc["result"]["det"]["at_pole"] = det.at_pole;
  ZetaEuler euler = zeta_euler(model, s, n_max);
  doc["result"]["euler"]["value_re"] = euler.value.real();
  doc["result"]["euler"]["value_im"] = euler.value.imag();
  doc["result"]["euler"]["tail_estimate"] = euler.tail_estimate;
  print_json(doc);
  return 0;
}

int run_count(const ModelArgs& margs, double lambda_max, int shells,
              const std::string& out_path) {
  SuspensionModel model = resolve_model(margs);
  PntTable table = pnt_report(model, lambda_max, shells);
  if (table.truncated) std::cerr << "warning: " << table.warning << "\n";
  std::ostringstream csv;
  csv << "lambda,pi,li,ratio\n";
  for (const PntRow& row : table.rows) {
    csv << format_double(row.lambda) << "," << row.pi << "," << format_double(row.li_value)
        << "," << format_double(row.ratio) << "\n";
  }
  emit(out_path, csv.str());
  if (!out_path.empty()) {
    json doc;
    doc["version"] = kVersion;
    doc["command"] = "count";
    doc["params"] = model_echo(margs, model);
    doc["params"]["lambda_max"] = lambda_max;
    doc["params"]["shells"] = shells;
    doc["result"]["h_T"] = table.h_T;
    doc["result"]["n_max"] = table.n_max;
    doc["result"]["truncated"] = table.truncated;
    if (table.truncated) doc["result"]["warning"] = table.warning;
    doc["result"]["out"] = out_path;
    print_json(doc);
  }
  return 0;
}

Observable cli_observable(const SuspensionModel& model, const std::string& kind) {
  if (kind == "symbol") {
    auto idx = make_word_index(model.system, 1);
    std::vector<double> vals(idx->size());
    for (std::size_t i = 0; i < idx->size(); ++i) {
      vals[i] = idx->words()[i][0] == 0 ? 1.0 : -1.0;
    }
    return Observable{RealFn(model.system, idx, std::move(vals)), {}};
  }
  if (kind == "height") {
    return Observable{RealFn::constant(model.system, 1, 1.0), {0.0, 1.0}};
  }
  throw ValidationError("unknown observable kind: " + kind + " (use symbol or height)");
}

int run_corr(const ModelArgs& margs, double t_max, double dt, std::size_t samples,
             std::uint64_t seed, const std::string& obs_kind, bool fit, int replicas,
             const std::string& out_path) {
  if (!(dt > 0)) throw ValidationError("corr needs --dt > 0");
  if (!(t_max >= 0)) throw ValidationError("corr needs --t-max >= 0");
  if (fit && out_path.empty()) throw ValidationError("--fit needs --out for the CSV table");
  SuspensionModel model = resolve_model(margs);
  Observable obs = cli_observable(model, obs_kind);

  std::vector<double> grid;
  for (double t = 0; t <= t_max + 1e-12; t += dt) grid.push_back(t);
  CorrelationTable table = correlation(model, obs, obs, grid, samples, seed, true, replicas);

  std::ostringstream csv;
  csv << "t,C,stderr\n";
  for (std::size_t i = 0; i < table.t_grid.size(); ++i) {
    csv << format_double(table.t_grid[i]) << "," << format_double(table.c_values[i]) << ","
        << format_double(table.stderrs[i]) << "\n";
  }
  emit(out_path, csv.str());

  if (!out_path.empty()) {
    json doc;
    doc["version"] = kVersion;
    doc["command"] = "corr";
    doc["params"] = model_echo(margs, model);
    doc["params"]["t_max"] = t_max;
    doc["params"]["dt"] = dt;
    doc["params"]["samples"] = samples;
    doc["params"]["seed"] = seed;
    doc["params"]["observable"] = obs_kind;
    doc["params"]["replicas"] = replicas;
    doc["result"]["samples_used"] = table.samples;
    doc["result"]["mean_a"] = table.mean_a;
    doc["result"]["mean_b"] = table.mean_b;
    doc["result"]["out"] = out_path;
    if (fit) {
      DecayFit decay = fit_decay_rate(table);
      doc["result"]["fit"]["c"] = decay.c;
      doc["result"]["fit"]["prefactor"] = decay.prefactor;
      doc["result"]["fit"]["r2"] = decay.r2;
      doc["result"]["fit"]["points"] = decay.points;
    }
    print_json(doc);
  }
  return 0;
}

int run_dolgopyat(const ModelArgs& margs, double b, int N, const std::string& mu0_arg, double a,
                  double epsilon1, int q1, int m_max, const std::string& out_path) {
  SuspensionModel model = resolve_model(margs);
  CylinderFamily family = select_cylinders(model, b, epsilon1, q1);
  std::vector<BranchPair> pairs = make_branch_pairs(model, N, 1);
  UniReport uni = uni_certificate(model, N, pairs, family);

  double mu0 = 0;
  if (mu0_arg == "auto") {
    mu0 = mu0_from_certificate(model, N, q1, a, uni.delta0_hat);
  } else {
    try {
      std::size_t pos = 0;
      mu0 = std::stod(mu0_arg, &pos);
      if (pos != mu0_arg.size()) throw std::invalid_argument(mu0_arg);
    } catch (const std::exception&) {
      throw ValidationError("--mu0 must be 'auto' or a number, got: " + mu0_arg);
    }
  }

  ContractionParams params{N, mu0, epsilon1, q1, a, b};
  ComplexFn h0 = ComplexFn::constant(model.system, 1, std::complex<double>(1.0, 0.0));
  RealFn H0 = RealFn::constant(model.system, 1, 1.0);

  RepresentativeSet J = build_J(model, params, pairs, family, h0, H0);
  DominationReport dom = domination_check(model, params, pairs, family, h0, H0, J);
  L2Report l2 = l2_contraction_check(model, params, pairs, family, H0, J);
  DecayExperiment decay = decay_experiment(model, params, pairs, family, h0, m_max);

  json doc;
  doc["version"] = kVersion;
  doc["command"] = "dolgopyat";
  doc["params"] = model_echo(margs, model);
  doc["params"]["b"] = b;
  doc["params"]["N"] = N;
  doc["params"]["mu0"] = mu0_arg;
  doc["params"]["a"] = a;
  doc["params"]["epsilon1"] = epsilon1;
  doc["params"]["q1"] = q1;
  doc["params"]["m_max"] = m_max;
  doc["result"]["mu0"] = mu0;
  doc["result"]["cylinders"] = family.C_list.size();
  doc["result"]["subcylinders"] = family.D_list.size();
  doc["result"]["single_symbol_flag"] = family.single_symbol_flag;
  doc["result"]["uni"]["pass"] = uni.pass;
  doc["result"]["uni"]["delta0_hat"] = uni.delta0_hat;
  doc["result"]["marked"] = J.entries.size();
  doc["result"]["domination"]["pass"] = dom.pass;
  doc["result"]["domination"]["worst_margin"] = dom.worst_margin;
  doc["result"]["l2"]["pass"] = l2.pass;
  doc["result"]["l2"]["vacuous"] = l2.vacuous;
  doc["result"]["l2"]["ratio"] = l2.ratio;
  doc["result"]["l2"]["rho3"] = l2.rho3;
  doc["result"]["l2"]["E"] = l2.E;
  doc["result"]["l2"]["omega0"] = l2.omega0;
  doc["result"]["l2"]["c5"] = l2.c5;
  doc["result"]["l2"]["T"] = l2.T;
  json rows = json::array();
  for (const DecayRow& row : decay.rows) {
    rows.push_back({{"m", row.m}, {"H_l2", row.H_l2}, {"h_l2", row.h_l2}});
  }
  doc["result"]["decay"]["rows"] = rows;
  doc["result"]["decay"]["rate_H"] = decay.rate_H;
  doc["result"]["decay"]["rate_h"] = decay.rate_h;
  doc["result"]["decay"]["failed_step"] = decay.failed_step;
  if (!decay.failure.empty()) doc["result"]["decay"]["failure"] = decay.failure;
  doc["result"]["decay"]["rescaled"] = decay.rescaled;

  if (out_path.empty()) {
    print_json(doc);
  } else {
    emit(out_path, doc.dump(2) + "\n");
    json echo;
    echo["version"] = kVersion;
    echo["command"] = "dolgopyat";
    echo["params"] = doc["params"];
    echo["result"]["out"] = out_path;
    echo["result"]["l2_pass"] = l2.pass;
    echo["result"]["domination_pass"] = dom.pass;
    print_json(echo);
  }
  return 0;
}

int run_preset(const std::string& name, const std::string& out_path) {
  if (name.empty()) {
    json doc;
    doc["version"] = kVersion;
    doc["command"] = "preset";
    doc["result"]["presets"] = preset_names();
    print_json(doc);
    return 0;
  }
  SuspensionModel model = preset(name);
  std::string text = serialize_model(model);
  emit(out_path, text);
  if (!out_path.empty()) {
    json doc;
    doc["version"] = kVersion;
    doc["command"] = "preset";
    doc["params"]["name"] = name;
    doc["result"]["out"] = out_path;
    print_json(doc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ruellelab: transfer-operator spectra, zeta functions, and correlation decay "
               "for suspension flows over subshifts of finite type"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  ModelArgs pressure_margs;
  std::string pressure_potential;
  double pressure_tol = 1e-12;
  CLI::App* cmd_pressure = app.add_subcommand("pressure", "Pressure root, entropy, RPF summary");
  add_model_options(cmd_pressure, pressure_margs);
  cmd_pressure->add_option("--potential", pressure_potential,
                           "Override potential: inline JSON {depth,values} or a path");
  cmd_pressure->add_option("--tol", pressure_tol, "Root tolerance");

  ModelArgs scan_margs;
  double scan_a = 0, scan_bmin = 0, scan_bmax = 0;
  int scan_steps = 0, scan_depth_offset = 0;
  std::string scan_out;
  CLI::App* cmd_scan = app.add_subcommand("scan", "Spectral-radius scan over frequencies b");
  add_model_options(cmd_scan, scan_margs);
  cmd_scan->add_option("--a", scan_a, "Real spectral parameter a");
  cmd_scan->add_option("--bmin", scan_bmin, "Grid start")->required();
  cmd_scan->add_option("--bmax", scan_bmax, "Grid end")->required();
  cmd_scan->add_option("--steps", scan_steps, "Grid points")->required();
  cmd_scan->add_option("--depth-offset", scan_depth_offset,
                       "Extra block depth beyond the natural one");
  cmd_scan->add_option("--out", scan_out, "CSV output path (default stdout)");

  ModelArgs orbits_margs;
  int orbits_n_max = 10;
  std::string orbits_out;
  CLI::App* cmd_orbits = app.add_subcommand("orbits", "Primitive periodic orbit table");
  add_model_options(cmd_orbits, orbits_margs);
  cmd_orbits->add_option("--n-max", orbits_n_max, "Maximum word length");
  cmd_orbits->add_option("--out", orbits_out, "CSV output path (default stdout)");

  ModelArgs zeta_margs;
  double zeta_s_re = 1.5, zeta_s_im = 0;
  int zeta_n_max = 20;
  CLI::App* cmd_zeta = app.add_subcommand("zeta", "Zeta value by Euler product and determinant");
  add_model_options(cmd_zeta, zeta_margs);
  cmd_zeta->add_option("--s-re", zeta_s_re, "Re(s)");
  cmd_zeta->add_option("--s-im", zeta_s_im, "Im(s)");
  cmd_zeta->add_option("--n-max", zeta_n_max, "Euler-product truncation length");

  ModelArgs count_margs;
  double count_lambda_max = 10;
  int count_shells = 10;
  std::string count_out;
  CLI::App* cmd_count = app.add_subcommand("count", "Orbit counting versus li(e^{h_T lambda})");
  add_model_options(cmd_count, count_margs);
  cmd_count->add_option("--lambda-max", count_lambda_max, "Largest period bound");
  cmd_count->add_option("--shells", count_shells, "Grid rows");
  cmd_count->add_option("--out", count_out, "CSV output path (default stdout)");

  ModelArgs corr_margs;
  double corr_t_max = 6, corr_dt = 0.5;
  std::size_t corr_samples = 1000000;
  std::uint64_t corr_seed = 12345;
  std::string corr_obs = "symbol";
  bool corr_fit = false;
  int corr_replicas = 8;
  std::string corr_out;
  CLI::App* cmd_corr = app.add_subcommand("corr", "Monte-Carlo flow correlation function");
  add_model_options(cmd_corr, corr_margs);
  cmd_corr->add_option("--t-max", corr_t_max, "Largest lag");
  cmd_corr->add_option("--dt", corr_dt, "Lag step");
  cmd_corr->add_option("--samples", corr_samples, "Total flow sample points");
  cmd_corr->add_option("--seed", corr_seed, "RNG seed");
  cmd_corr->add_option("--observable", corr_obs, "Observable kind: symbol or height");
  cmd_corr->add_flag("--fit", corr_fit, "Fit a decay rate (needs --out)");
  cmd_corr->add_option("--replicas", corr_replicas, "Independent replica chains");
  cmd_corr->add_option("--out", corr_out, "CSV output path (default stdout)");

  ModelArgs dol_margs;
  double dol_b = 0;
  int dol_N = 2;
  std::string dol_mu0 = "auto";
  double dol_a = 0, dol_epsilon1 = 1;
  int dol_q1 = 1, dol_m_max = 30;
  std::string dol_out;
  CLI::App* cmd_dol = app.add_subcommand("dolgopyat", "Oscillation certificate and contraction "
                                                      "pipeline at one frequency");
  add_model_options(cmd_dol, dol_margs);
  cmd_dol->add_option("--b", dol_b, "Frequency (|b| >= 1)")->required();
  cmd_dol->add_option("--N", dol_N, "Iterate count per step");
  cmd_dol->add_option("--mu0", dol_mu0, "Contraction amount: 'auto' or a number in (0, 1/2]");
  cmd_dol->add_option("--a", dol_a, "Real spectral parameter a");
  cmd_dol->add_option("--epsilon1", dol_epsilon1, "Cylinder diameter scale in (0, 1]");
  cmd_dol->add_option("--q1", dol_q1, "Subcylinder co-length");
  cmd_dol->add_option("--m-max", dol_m_max, "Decay-experiment steps");
  cmd_dol->add_option("--out", dol_out, "JSON output path (default stdout)");

  std::string preset_name_arg;
  std::string preset_out;
  CLI::App* cmd_preset = app.add_subcommand("preset", "List presets or export one as model JSON");
  cmd_preset->add_option("--name", preset_name_arg, "Preset to export");
  cmd_preset->add_option("--out", preset_out, "Model JSON output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cmd_pressure) return run_pressure(pressure_margs, pressure_potential, pressure_tol);
    if (*cmd_scan) {
      return run_scan(scan_margs, scan_a, scan_bmin, scan_bmax, scan_steps, scan_depth_offset,
                      scan_out);
    }
    if (*cmd_orbits) return run_orbits(orbits_margs, orbits_n_max, orbits_out);
    if (*cmd_zeta) return run_zeta(zeta_margs, zeta_s_re, zeta_s_im, zeta_n_max);
    if (*cmd_count) return run_count(count_margs, count_lambda_max, count_shells, count_out);
    if (*cmd_corr) {
      return run_corr(corr_margs, corr_t_max, corr_dt, corr_samples, corr_seed, corr_obs,
                      corr_fit, corr_replicas, corr_out);
    }
    if (*cmd_dol) {
      return run_dolgopyat(dol_margs, dol_b, dol_N, dol_mu0, dol_a, dol_epsilon1, dol_q1,
                           dol_m_max, dol_out);
    }
    if (*cmd_preset) return run_preset(preset_name_arg, preset_out);
    throw ValidationError("no command given");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
