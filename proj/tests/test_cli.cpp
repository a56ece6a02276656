#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "ruellelab/model_io.hpp"
#include "ruellelab/models.hpp"

using namespace ruellelab;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string temp_path(const std::string& name) {
  return "/tmp/ruellelab_cli_" + std::to_string(getpid()) + "_" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

RunResult run_cli(const std::string& args) {
  RunResult r;
  std::string errfile = temp_path("stderr");
  std::string cmd = std::string(RUELLELAB_CLI_PATH) + " " + args + " 2>" + errfile;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_file(errfile);
  std::remove(errfile.c_str());
  return r;
}

std::string sqrt2_model_json() {
  json doc;
  doc["alphabet_size"] = 2;
  doc["transitions"] = {{1, 1}, {1, 1}};
  doc["theta"] = 0.5;
  doc["roof"]["depth"] = 1;
  doc["roof"]["values"] = {1.0, std::sqrt(2.0)};
  doc["potential"]["depth"] = 1;
  doc["potential"]["values"] = {0.0, 0.0};
  doc["label"] = "sqrt2";
  return doc.dump(2) + "\n";
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("version flag exits cleanly") {
  RunResult r = run_cli("--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("1.0.0") != std::string::npos);
}

TEST_CASE("pressure reports the closed-form entropy of the full shift") {
  RunResult r = run_cli("pressure --preset full2-const");
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(doc["version"] == "1.0.0");
  CHECK(doc["command"] == "pressure");
  CHECK(doc["params"]["preset"] == "full2-const");
  CHECK(doc["params"]["label"] == "full2-const");
  CHECK(doc["params"]["theta"] == 0.5);
  CHECK(std::abs(doc["result"]["P_f"].get<double>() - std::log(2.0)) <= 1e-10);
  CHECK(std::abs(doc["result"]["h_T"].get<double>() - std::log(2.0)) <= 1e-10);
  CHECK(doc["result"]["rpf"]["residual"].get<double>() <= 1e-10);
}

TEST_CASE("pressure accepts a potential override from a file") {
  std::string pot = temp_path("potential.json");
  write_file(pot, "{\"depth\": 1, \"values\": [-0.6931471805599453, -0.6931471805599453]}\n");
  RunResult r = run_cli("pressure --preset full2-const --potential " + pot);
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(std::abs(doc["result"]["P_f"].get<double>()) <= 1e-10);
  std::remove(pot.c_str());
}

TEST_CASE("model source validation drives exit code two") {
  RunResult both = run_cli("pressure --preset full2-const --model /tmp/nope.json");
  CHECK(both.code == 2);
  CHECK(both.err.find("not both") != std::string::npos);

  RunResult neither = run_cli("pressure");
  CHECK(neither.code == 2);
  CHECK(neither.err.find("a model is required") != std::string::npos);

  RunResult unknown = run_cli("pressure --preset unknown-model");
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("full2-const") != std::string::npos);

  std::string bad = temp_path("bad.json");
  write_file(bad, "{ \"alphabet_size\": 2, ");
  RunResult malformed = run_cli("pressure --model " + bad);
  CHECK(malformed.code == 2);
  CHECK(malformed.err.find("malformed") != std::string::npos);
  CHECK(malformed.err.find("line") != std::string::npos);
  std::remove(bad.c_str());

  std::string wrong = temp_path("wrong.json");
  json doc = json::parse(sqrt2_model_json());
  doc["roof"]["values"] = {1.0, 2.0, 3.0};
  write_file(wrong, doc.dump());
  RunResult mismatch = run_cli("pressure --model " + wrong);
  CHECK(mismatch.code == 2);
  CHECK(mismatch.err.find("lexicographic") != std::string::npos);
  std::remove(wrong.c_str());
}

TEST_CASE("scan writes an ordered csv with the promised header") {
  std::string out = temp_path("scan.csv");
  RunResult r = run_cli("scan --preset full2-nonlattice --a 0 --bmin 1 --bmax 5 --steps 9 --out " +
                        out);
  REQUIRE(r.code == 0);
  std::string csv = read_file(out);
  CHECK(csv.rfind("b,spectral_radius,gap,second_modulus\n", 0) == 0);
  CHECK(count_lines(csv) == 10);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  double prev_b = -1;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string b_s, r_s, g_s;
    std::getline(fields, b_s, ',');
    std::getline(fields, r_s, ',');
    std::getline(fields, g_s, ',');
    double b = std::stod(b_s), radius = std::stod(r_s), gap = std::stod(g_s);
    CHECK(b > prev_b);
    prev_b = b;
    CHECK(radius < 1.0);
    CHECK(gap == doctest::Approx(1.0 - radius).epsilon(1e-12));
  }
  CHECK(prev_b == doctest::Approx(5.0));
  std::remove(out.c_str());

  RunResult bad = run_cli("scan --preset full2-nonlattice --a 0 --bmin 1 --bmax 5 --steps 0");
  CHECK(bad.code == 2);
}

TEST_CASE("orbit tables carry exact periods at full precision") {
  std::string model = temp_path("sqrt2.json");
  write_file(model, sqrt2_model_json());
  RunResult r = run_cli("orbits --model " + model + " --n-max 2");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("necklace,n,period\n", 0) == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("0,1,", 0) == 0);
  CHECK(rows[1].rfind("1,1,", 0) == 0);
  CHECK(rows[2].rfind("01,2,", 0) == 0);
  double p01 = std::stod(rows[2].substr(5));
  CHECK(p01 == 1.0 + std::sqrt(2.0));
  std::remove(model.c_str());
}

TEST_CASE("zeta honors its convergence half-plane") {
  RunResult ok = run_cli("zeta --preset full2-const --s-re 1.3862943611198906 --s-im 0 --n-max 25");
  REQUIRE(ok.code == 0);
  json doc = json::parse(ok.out);
  CHECK(std::abs(doc["result"]["det"]["value_re"].get<double>() - 2.0) <= 1e-10);
  RunResult low = run_cli("zeta --preset full2-const --s-re 0.5 --s-im 0 --n-max 10");
  CHECK(low.code == 3);
  CHECK(low.err.find("half-plane") != std::string::npos);
}

TEST_CASE("count emits its table and warns when truncated") {
  std::string out = temp_path("count.csv");
  RunResult r = run_cli("count --preset full2-const --lambda-max 4.5 --shells 9 --out " + out);
  REQUIRE(r.code == 0);
  std::string csv = read_file(out);
  CHECK(csv.rfind("lambda,pi,li,ratio\n", 0) == 0);
  CHECK(count_lines(csv) == 10);
  std::remove(out.c_str());

  RunResult trunc = run_cli("count --preset full2-const --lambda-max 60 --shells 4");
  REQUIRE(trunc.code == 0);
  CHECK(trunc.err.find("truncat") != std::string::npos);
}

TEST_CASE("corr produces a csv table and validates its options") {
  std::string out = temp_path("corr.csv");
  RunResult r = run_cli(
      "corr --preset full2-nonlattice --t-max 1 --dt 0.5 --samples 50000 --seed 3 "
      "--observable height --out " +
      out);
  REQUIRE(r.code == 0);
  std::string csv = read_file(out);
  CHECK(csv.rfind("t,C,stderr\n", 0) == 0);
  CHECK(count_lines(csv) == 4);
  json doc = json::parse(r.out);
  CHECK(doc["result"]["samples_used"].get<std::size_t>() >= 47500);
  CHECK(doc["result"]["samples_used"].get<std::size_t>() <= 50000);
  std::remove(out.c_str());

  RunResult baddt = run_cli("corr --preset full2-nonlattice --t-max 1 --dt 0 --samples 50000");
  CHECK(baddt.code == 2);
  RunResult badfit =
      run_cli("corr --preset full2-nonlattice --t-max 1 --dt 0.5 --samples 50000 --fit");
  CHECK(badfit.code == 2);
  CHECK(badfit.err.find("--out") != std::string::npos);
  RunResult badobs = run_cli(
      "corr --preset full2-nonlattice --t-max 1 --dt 0.5 --samples 50000 --observable foo");
  CHECK(badobs.code == 2);
}

TEST_CASE("the dolgopyat pipeline succeeds off resonance and fails on constant roofs") {
  RunResult ok = run_cli("dolgopyat --preset full2-nonlattice --b 20 --N 2 --m-max 5");
  REQUIRE(ok.code == 0);
  json doc = json::parse(ok.out);
  CHECK(doc["result"]["uni"]["pass"] == true);
  CHECK(doc["result"]["domination"]["pass"] == true);
  CHECK(doc["result"]["l2"]["pass"] == true);
  CHECK(doc["result"]["decay"]["failed_step"] == -1);

  RunResult flat = run_cli("dolgopyat --preset full2-const --b 20 --N 2");
  CHECK(flat.code == 3);
  CHECK(flat.err.find("oscillation insufficient") != std::string::npos);

  RunResult badb = run_cli("dolgopyat --preset full2-nonlattice --b 0.5 --N 2");
  CHECK(badb.code == 2);
}

TEST_CASE("preset listing and export round-trip through the loader") {
  RunResult list = run_cli("preset");
  REQUIRE(list.code == 0);
  json doc = json::parse(list.out);
  auto names = doc["result"]["presets"].get<std::vector<std::string>>();
  CHECK(names.size() == 4);
  CHECK(std::find(names.begin(), names.end(), "golden-mean-const") != names.end());

  std::string out = temp_path("preset.json");
  RunResult exp = run_cli("preset --name golden-mean-const --out " + out);
  REQUIRE(exp.code == 0);
  SuspensionModel loaded = load_model(out);
  CHECK(loaded.label == "golden-mean-const");
  CHECK(serialize_model(loaded) == read_file(out));
  std::remove(out.c_str());

  RunResult bad = run_cli("preset --name bogus");
  CHECK(bad.code == 2);
}
