// fnls command line: solve, measure-sweep, green-audit, partition-dump, verify.
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fnls/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kConfig = 2;
constexpr int kNoGoodCells = 3;
constexpr int kCertificate = 4;

fnls::RunConfig read_config(const std::string& path, const std::vector<std::string>& sets) {
  return path.empty() ? fnls::config_from_text("", sets) : fnls::load_config(path, sets);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Response solutions of the forced fractional NLS on the torus"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::vector<std::string> sets;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON configuration (defaults when omitted)");
    sub->add_option("--set", sets, "override, dotted.path=value (repeatable)");
  };

  auto* solve = app.add_subcommand("solve", "run the Newton scheme and write reports");
  add_config(solve);
  solve->add_option("-o,--output", out, "output directory (default: output_dir from the config)");

  auto* sweep = app.add_subcommand("measure-sweep", "excluded measure per (epsilon, stage) as CSV");
  add_config(sweep);
  sweep->add_option("-o,--output", out, "CSV path (stdout when omitted)");

  double omega = 0.0;
  int N = 0;
  auto* audit = app.add_subcommand("green-audit", "certificates of T-tilde_N^{-1} at one omega");
  add_config(audit);
  audit->add_option("--omega", omega, "frequency in [1,2]")->required();
  audit->add_option("-N,--box", N, "box radius, a power of M")->required();
  audit->add_option("-o,--output", out, "JSON path (stdout when omitted)");

  int dim = 1, box = 0;
  double B = 1.0;
  bool skip_verify = false;
  auto* part = app.add_subcommand("partition-dump", "separation partition classes as CSV");
  part->add_option("-d,--dim", dim, "spatial dimension")->required();
  part->add_option("-B", B, "separation scale")->required();
  part->add_option("--box", box, "cube radius")->required();
  part->add_flag("--no-verify", skip_verify, "skip the exhaustive pairwise check");
  part->add_option("-o,--output", out, "CSV path (stdout when omitted)");

  std::string solution_path;
  double tolerance = 1e-9;
  int grid = 0;
  auto* verify = app.add_subcommand("verify", "collocation oracle on a serialized solution");
  verify->add_option("solution", solution_path, "solution.json written by solve")->required();
  verify->add_option("--tolerance", tolerance, "relative residual and agreement tolerance");
  verify->add_option("--grid", grid, "collocation points per axis (0: 8K+1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*solve) {
      fnls::RunConfig cfg = read_config(config_path, sets);
      fnls::SolveResult r = fnls::run_solve(cfg);
      const std::string dir = out.empty() ? cfg.output_dir : out;
      fnls::write_solve_artifacts(r, dir);
      std::printf("j0=%d advances=%d converged=%s\n", r.state.j0, r.state.advances,
                  r.state.converged ? "yes" : "no");
      for (const auto& t : r.tracked) {
        if (!t.alive) {
          std::printf("omega=%.17g dropped (%s)\n", t.omega, t.drop_reason.c_str());
          continue;
        }
        std::printf("omega=%.17g residual=%.3e collocation=%.3e C=%.6g\n", t.omega, t.residuals.back(),
                    t.collocation.relative, t.theorem.constant);
      }
      std::printf("reports in %s\n", dir.c_str());
    } else if (*sweep) {
      fnls::RunConfig cfg = read_config(config_path, sets);
      fnls::SweepResult r = fnls::run_measure_sweep(cfg);
      emit(r.csv, out);
      std::fprintf(stderr, "fitted K = %.6g\n", r.fitted_K);
    } else if (*audit) {
      fnls::RunConfig cfg = read_config(config_path, sets);
      emit(fnls::green_audit(cfg, omega, N).dump(2) + "\n", out);
    } else if (*part) {
      emit(fnls::partition_dump_csv(dim, B, box, !skip_verify), out);
    } else if (*verify) {
      fnls::VerifyResult r = fnls::verify_solution_file(solution_path, tolerance, grid);
      for (const auto& e : r.entries)
        std::printf("omega=%.17g collocation=%.3e lattice=%.3e agreement=%.3e %s\n", e.omega,
                    e.collocation.relative, e.lattice_residual, e.agreement, e.ok ? "ok" : "MISMATCH");
      return r.ok ? kOk : kMismatch;
    }
  } catch (const fnls::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const fnls::NoGoodCellsError& e) {
    std::fprintf(stderr, "no good cells: %s\n", e.what());
    return kNoGoodCells;
  } catch (const fnls::CertificateError& e) {
    std::fprintf(stderr, "certificate contradiction: %s\n", e.what());
    return kCertificate;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kMismatch;
  }
  return kOk;
}
