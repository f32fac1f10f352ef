#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fnls/coupling.hpp"
#include "fnls/field_io.hpp"
#include "fnls/runner.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

fnls::ProblemParams problem_from(const std::string& config, double omega) {
  fnls::RunConfig cfg = fnls::config_from_text(config);
  return cfg.problem.with_omega(omega);
}

py::dict margins(const std::vector<fnls::Margin>& ms) {
  py::dict d;
  for (const auto& m : ms)
    d[py::str(m.name)] = py::dict(py::arg("measured") = m.measured, py::arg("bound") = m.bound,
                                  py::arg("ok") = m.ok, py::arg("ratio") = m.ratio());
  return d;
}

py::dict report_dict(const fnls::CouplingReport& r) {
  return py::dict(py::arg("hypotheses") = margins(r.hypotheses), py::arg("conclusions") = margins(r.conclusions),
                  py::arg("gate_failures") = r.gate_failures, py::arg("hypotheses_ok") = r.hypotheses_ok,
                  py::arg("conclusions_checked") = r.conclusions_checked,
                  py::arg("conclusions_ok") = r.conclusions_ok, py::arg("tail_pairs") = r.tail_pairs);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Newton scheme for response solutions of the forced fractional NLS";

  py::register_exception<fnls::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<fnls::NoGoodCellsError>(m, "NoGoodCellsError", PyExc_RuntimeError);
  py::register_exception<fnls::CertificateError>(m, "CertificateError", PyExc_RuntimeError);

  m.def("default_config", [] { return fnls::default_config().dump(); });

  m.def(
      "solve",
      [](const std::string& config, const std::vector<std::string>& overrides) {
        fnls::SolveResult r = fnls::run_solve(fnls::config_from_text(config, overrides));
        return py::make_tuple(r.report.dump(), r.solution.dump());
      },
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
      "Run the scheme; returns (report JSON, solution JSON).");

  m.def(
      "measure_sweep",
      [](const std::string& config, const std::vector<std::string>& overrides) {
        fnls::SweepResult r = fnls::run_measure_sweep(fnls::config_from_text(config, overrides));
        return py::make_tuple(r.csv, r.fitted_K);
      },
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "green_audit",
      [](const std::string& config, double omega, int N) {
        return fnls::green_audit(fnls::config_from_text(config), omega, N).dump();
      },
      py::arg("config"), py::arg("omega"), py::arg("N"));

  m.def("partition_dump", &fnls::partition_dump_csv, py::arg("dim"), py::arg("B"), py::arg("box_radius"),
        py::arg("verify") = true);

  m.def(
      "verify",
      [](const std::string& solution, double tolerance, int grid) {
        fnls::VerifyResult r = fnls::verify_solution(json::parse(solution), tolerance, grid);
        py::list out;
        for (const auto& e : r.entries)
          out.append(py::dict(py::arg("omega") = e.omega, py::arg("collocation") = e.collocation.relative,
                              py::arg("lattice_residual") = e.lattice_residual,
                              py::arg("agreement") = e.agreement, py::arg("ok") = e.ok));
        return py::make_tuple(r.ok, out);
      },
      py::arg("solution"), py::arg("tolerance") = 1e-9, py::arg("grid") = 0);

  m.def(
      "residual_norm",
      [](const std::string& field, const std::string& config, double omega) {
        return fnls::apply_F(fnls::field_from_json(json::parse(field)), problem_from(config, omega)).l2_norm();
      },
      py::arg("field"), py::arg("config"), py::arg("omega"), "||F(u)|| on the lattice.");

  m.def(
      "collocation_residual",
      [](const std::string& field, const std::string& config, double omega, int grid) {
        fnls::CollocationResult c = fnls::collocation_residual(fnls::field_from_json(json::parse(field)),
                                                               problem_from(config, omega), grid);
        return py::dict(py::arg("grid") = c.grid, py::arg("K") = c.K, py::arg("residual") = c.residual,
                        py::arg("relative") = c.relative);
      },
      py::arg("field"), py::arg("config"), py::arg("omega"), py::arg("grid") = 0);

  m.def(
      "coupling_lemma1",
      [](const Eigen::MatrixXcd& T, const std::vector<std::vector<int>>& points,
         const std::vector<std::vector<size_t>>& cover, double B, double K, double C, double C_prime, double c) {
        return report_dict(fnls::coupling_lemma1_check(T, points, cover, {B, K, C, C_prime, c}));
      },
      py::arg("T"), py::arg("points"), py::arg("cover"), py::arg("B"), py::arg("K"), py::arg("C"),
      py::arg("C_prime"), py::arg("c"));

  m.def(
      "coupling_lemma2",
      [](const Eigen::VectorXcd& D, const Eigen::MatrixXcd& S, const std::vector<std::vector<int>>& points,
         const std::vector<std::vector<size_t>>& clusters, double M, double eps1, double eps2, double eps3,
         double rho, double eps, double C, double c) {
        fnls::Lemma2Params prm;
        prm.M = M;
        prm.eps1 = eps1;
        prm.eps2 = eps2;
        prm.eps3 = eps3;
        prm.rho = rho;
        prm.eps = eps;
        prm.C = C;
        prm.c = c;
        return report_dict(fnls::coupling_lemma2_check(D, S, points, clusters, prm));
      },
      py::arg("D"), py::arg("S"), py::arg("points"), py::arg("clusters"), py::arg("M"), py::arg("eps1"),
      py::arg("eps2"), py::arg("eps3"), py::arg("rho"), py::arg("eps"), py::arg("C"), py::arg("c"));

  m.def(
      "synthetic_lemma1",
      [](uint64_t seed, int n) {
        fnls::Lemma1Instance in = fnls::synthetic_lemma1(seed, n);
        const auto& p = in.params;
        return py::dict(py::arg("T") = in.T, py::arg("points") = in.points, py::arg("cover") = in.cover,
                        py::arg("B") = p.B, py::arg("K") = p.K, py::arg("C") = p.C, py::arg("C_prime") = p.C_prime,
                        py::arg("c") = p.c);
      },
      py::arg("seed"), py::arg("n") = 200);

  m.def(
      "synthetic_lemma2",
      [](uint64_t seed, int n) {
        fnls::Lemma2Instance in = fnls::synthetic_lemma2(seed, n);
        const auto& p = in.params;
        return py::dict(py::arg("D") = in.D, py::arg("S") = in.S, py::arg("points") = in.points,
                        py::arg("clusters") = in.clusters, py::arg("M") = p.M, py::arg("eps1") = p.eps1,
                        py::arg("eps2") = p.eps2, py::arg("eps3") = p.eps3, py::arg("rho") = p.rho,
                        py::arg("eps") = p.eps, py::arg("C") = p.C, py::arg("c") = p.c);
      },
      py::arg("seed"), py::arg("n") = 200);
}
