#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fnls/collocation.hpp"
#include "fnls/field_io.hpp"
#include "fnls/runner.hpp"
#include "oracles.hpp"

using namespace fnls;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text, const std::vector<std::string>& sets = {}) {
  try {
    config_from_text(text, sets);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fnls_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemParams base() {
  ProblemParams p;
  p.dim = 1;
  p.epsilon = 1e-4;
  p.alpha = 4e-4;
  p.forcing = bundled_forcing(1);
  return p;
}

}  // namespace

TEST_CASE("config diagnostics") {
  CHECK(error_of("{\"problem\": {\"epsilom\": 1e-3}}").find("problem.epsilom") != std::string::npos);
  CHECK(error_of("{\"problem\": {\"dim\": \"one\"}}").find("problem.dim") != std::string::npos);
  CHECK(error_of("{\"problem\": {\"dim\": 1,}").find("malformed JSON") != std::string::npos);
  CHECK(error_of("{\"problem\": {\"dim\": 1,}").find("line") != std::string::npos);
  CHECK(error_of("{\"problem\": {\"omegas\": [2.5]}}").find("problem.omegas") != std::string::npos);
  CHECK(error_of("{\"constants\": {\"j0\": -2}}").find("constants.j0") != std::string::npos);
  CHECK(error_of("{\"constants\": {\"regime\": \"fast\"}}").find("constants.regime") != std::string::npos);
  CHECK(error_of("", {"problem.dim=2", "problem.forcing=bundled"}).empty());
  json f = field_to_json(bundled_forcing(2));
  CHECK(error_of(json{{"problem", {{"forcing", f}}}}.dump()).find("dimension") != std::string::npos);
  CHECK(error_of("", {"driver.j_max"}).find("path=value") != std::string::npos);

  RunConfig rc = config_from_text("", {"problem.epsilon=1e-5", "constants.regime=neumann"});
  CHECK(rc.problem.epsilon == 1e-5);
  CHECK(rc.constants.regime == RegimeChoice::kNeumann);
  CHECK(rc.echo["problem"]["epsilon"] == 1e-5);
  CHECK(rc.echo == [&] {
    json d = default_config();
    d["problem"]["epsilon"] = 1e-5;
    d["constants"]["regime"] = "neumann";
    return d;
  }());
}

TEST_CASE("zero forcing solve") {
  RunConfig rc = config_from_text("{\"problem\": {\"forcing\": \"zero\"}}");
  SolveResult r = run_solve(rc);
  CHECK(r.state.advances == 0);
  CHECK(r.state.converged);
  REQUIRE(r.tracked.size() == 1);
  CHECK(r.tracked[0].alive);
  CHECK(r.tracked[0].collocation.residual == 0.0);
  CHECK(r.solution["solutions"][0]["u"]["entries"].empty());
}

TEST_CASE("measure sweep") {
  RunConfig rc = config_from_text("{\"sweep\": {\"epsilons\": [1e-4], \"stages\": 0}}");
  SweepResult s = run_measure_sweep(rc);
  REQUIRE(s.rows.size() == 1);
  GoodSetReport g = build_good_set_j0(rc.problem, rc.constants);
  CHECK(s.rows[0].measure_excluded == g.measure_excluded);
  CHECK(s.rows[0].measure_kept == g.good.measure());
  CHECK(s.rows[0].stage == 1);

  RunConfig none = config_from_text("{\"sweep\": {\"epsilons\": []}}");
  SweepResult e = run_measure_sweep(none);
  CHECK(e.rows.empty());
  CHECK(e.csv == "epsilon,stage,N,measure_kept,measure_excluded,budget,dominant_reason\n");
}

TEST_CASE("collocation oracle") {
  ProblemParams p = base().with_omega(std::sqrt(2.0));
  CollocationResult z = collocation_residual(FourierField(1, 1), p);
  CHECK(z.residual == doctest::Approx(p.eps23() * p.forcing.l2_norm()).epsilon(1e-14));
  CHECK(z.relative == doctest::Approx(1.0).epsilon(1e-14));

  // linear closed form on the box N = 2 leaves eps^{2/3} (1 - Gamma_2) P
  ProblemParams lin = p;
  lin.nonlinearity = 0.0;
  std::vector<FourierField::Entry> e;
  double tail = 0.0;
  for (const auto& [xi, a] : lin.forcing.entries()) {
    if (in_box(xi, 2))
      e.emplace_back(xi, lin.eps23() * a / (-xi.k() * p.omega + oracle::nsq(xi) + 1.0));
    else
      tail += std::norm(a);
  }
  FourierField ul = FourierField::from_entries(1, 2, e);
  CHECK(collocation_residual(ul, lin).residual == doctest::Approx(lin.eps23() * std::sqrt(tail)).epsilon(1e-12));

  std::mt19937_64 rng(77);
  for (int t = 0; t < 10; ++t) {
    FourierField u = oracle::random_real_field(rng, 1, 4, 5, 0.05);
    const double lattice = oracle::map_norm(oracle::F_loop(u, p));
    CollocationResult c = collocation_residual(u, p);
    CHECK(std::abs(c.residual - lattice) <= 1e-9 * lattice);
    // one coefficient moved: both sides follow
    auto entries = u.entries();
    entries.front().second += cplx(1e-3, 0.0);
    FourierField v = FourierField::from_entries(1, 4, entries);
    const double lattice2 = oracle::map_norm(oracle::F_loop(v, p));
    CHECK(std::abs(collocation_residual(v, p).residual - lattice2) <= 1e-9 * lattice2);
    CHECK(std::abs(lattice2 - lattice) > 1e-6 * lattice);
  }
  CHECK_THROWS_AS(collocation_residual(oracle::random_field(rng, 1, 4, 5, 0.1), p, 5), ConfigError);
}

TEST_CASE("partition dump") {
  std::string csv = partition_dump_csv(1, 3.0, 5);
  CHECK(csv.rfind("class_id,members,diameter,nearest_separation\n", 0) == 0);
  SeparationPartition part = separation_partition(1, 3.0, 5);
  CHECK(static_cast<size_t>(std::count(csv.begin(), csv.end(), '\n')) == part.classes.size() + 1);
}

TEST_CASE("deterministic report") {
  const std::string cfg = "{\"driver\": {\"j_max\": 2}}";
  SolveResult a = run_solve(config_from_text(cfg));
  SolveResult b = run_solve(config_from_text(cfg));
  CHECK(a.report.dump(2) == b.report.dump(2));
  CHECK(a.solution.dump() == b.solution.dump());
  CHECK(a.green_csv == b.green_csv);
  auto dir = scratch("artifacts");
  write_solve_artifacts(a, dir.string());
  for (const char* f : {"report.json", "solution.json", "green_certificates.csv", "exclusions.csv",
                        "exclusion_records.csv", "initial_stage.csv"})
    CHECK(std::filesystem::exists(dir / f));
  CHECK(slurp(dir / "report.json") == a.report.dump(2) + "\n");
  VerifyResult v = verify_solution_file((dir / "solution.json").string(), 1e-6);
  CHECK(v.entries.size() == 1);
  for (const auto& e : v.entries) CHECK(e.agreement <= 1e-9);
}

#ifdef FNLS_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FNLS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("command line exit codes") {
  auto dir = scratch("cli");
  const std::string out = (dir / "zero").string();
  CHECK(run_cli("solve --set problem.forcing=zero -o " + out) == 0);
  CHECK(std::filesystem::exists(std::filesystem::path(out) / "report.json"));
  CHECK(run_cli("verify " + out + "/solution.json") == 0);

  json doc = json::parse(slurp(std::filesystem::path(out) / "solution.json"));
  doc["solutions"][0]["u"] = field_to_json(FourierField::single_mode(MultiIndex({0}, 0), 1e-3, 1).with_real_flag(true));
  std::ofstream(dir / "tampered.json") << doc.dump();
  CHECK(run_cli("verify " + (dir / "tampered.json").string()) == 1);

  std::ofstream(dir / "bad.json") << "{\"problem\": {";
  CHECK(run_cli("solve -c " + (dir / "bad.json").string() + " -o " + out) == 2);
  CHECK(run_cli("solve --set problem.bogus=1 -o " + out) == 2);
  CHECK(run_cli("solve --set problem.epsilon=0.9 -o " + out) == 3);
  // a coarse cell keeps a resonant frequency that the initial divisors then reject
  CHECK(run_cli("solve --set constants.cell_size=0.5 --set problem.omegas=[1.0001] -o " + out) == 4);
  CHECK(run_cli("green-audit --omega 1.5 -N 3") == 2);  // N must be a power of M
  CHECK(run_cli("partition-dump -d 1 -B 3 --box 5") == 0);
  CHECK(run_cli("measure-sweep --set sweep.epsilons=[] -o " + (dir / "sweep.csv").string()) == 0);
  CHECK(slurp(dir / "sweep.csv") == "epsilon,stage,N,measure_kept,measure_excluded,budget,dominant_reason\n");
  CHECK(run_cli("frobnicate") == 2);
}
#endif
