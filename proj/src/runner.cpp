#include "fnls/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fnls/csv.hpp"
#include "fnls/field_io.hpp"
#include "fnls/separation.hpp"

namespace fnls {

using nlohmann::json;

namespace {

json cert_json(const GreenCertificate& c) {
  return {{"N", c.N},
          {"omega", c.omega},
          {"method", c.method},
          {"l2_bound", c.l2_bound},
          {"l2_budget", c.l2_budget},
          {"offdiag_profile", c.offdiag_profile},
          {"offdiag_budget", c.offdiag_budget},
          {"cutoff", c.cutoff},
          {"rate", c.rate},
          {"l2_pass", c.l2_pass},
          {"offdiag_pass", c.offdiag_pass},
          {"pass", c.pass},
          {"dense_mismatch", c.dense_mismatch}};
}

json step_json(const StepRecord& r) {
  const DecompositionReport& d = r.decomposition;
  return {{"j", r.j},
          {"N", r.N},
          {"omega", r.omega},
          {"regime", r.regime},
          {"certificate", cert_json(r.cert)},
          {"neumann_terms", r.neumann_terms},
          {"neumann_ratio", r.neumann_ratio},
          {"floor_ok", r.floor_ok},
          {"tiles", r.tiles},
          {"clusters", r.clusters},
          {"paving_iterations", r.paving_iterations},
          {"q0_from_prior", r.q0_from_prior},
          {"perturbation_ok", r.perturbation_ok},
          {"residual_before", r.residual_before},
          {"residual_after", r.residual_after},
          {"truncation_floor", r.truncation_floor},
          {"contraction_ratio", r.contraction_ratio},
          {"contraction_ok", r.contraction_ok},
          {"v_norm", r.v_norm},
          {"v_budget", r.v_budget},
          {"w_norm", r.w_norm},
          {"conjugacy_defect", r.conjugacy_defect},
          {"support_radius", r.support_radius},
          {"support_bound", r.support_bound},
          {"support_ok", r.support_ok},
          {"decomposition",
           {{"direct_norm", d.direct_norm},
            {"outside", d.outside},
            {"in_box_defect", d.in_box_defect},
            {"tail_inner", d.tail_inner},
            {"tail_outer", d.tail_outer},
            {"remainder", d.remainder},
            {"mismatch", {d.mismatch[0], d.mismatch[1]}},
            {"tolerance", d.tolerance},
            {"ok", d.ok}}},
          {"lipschitz", r.lipschitz}};
}

json stage_json(const StageMeasure& s) {
  return {{"j", s.j},
          {"N", s.N},
          {"regime", s.regime},
          {"measure_lambda", s.measure_lambda},
          {"measure_prime", s.measure_prime},
          {"measure_next", s.measure_next},
          {"excluded_resonance", s.excluded_resonance},
          {"excluded_eigenvalue", s.excluded_eigenvalue},
          {"excluded_green", s.excluded_green},
          {"excluded", s.excluded()},
          {"budget", s.budget},
          {"dilation_loss", s.dilation_loss},
          {"cells", s.cells},
          {"cell_size", s.cell_size},
          {"dominant_reason", s.dominant_reason()}};
}

json intervals_json(const IntervalSet& s) {
  json a = json::array();
  for (const auto& iv : s.intervals()) a.push_back({iv.a, iv.b});
  return a;
}

ProblemParams params_at(const RunConfig& cfg, double omega) { return cfg.problem.with_omega(omega); }

json solution_entry(const ProblemParams& q, const FourierField& u) {
  return {{"dim", q.dim},
          {"epsilon", q.epsilon},
          {"alpha", q.alpha},
          {"omega", q.omega},
          {"nonlinearity", q.nonlinearity},
          {"gevrey_c", q.gevrey.c},
          {"gevrey_weight_factor", q.gevrey.weight_factor},
          {"forcing", field_to_json(q.forcing)},
          {"u", field_to_json(u)}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

SolveResult run_solve(const RunConfig& cfg) {
  SolveResult res;
  res.state = run_newton(cfg.problem, cfg.constants, cfg.omegas, cfg.driver);
  IterationState& s = res.state;

  for (const auto& t : s.tracked) {
    TrackedSummary ts;
    ts.omega = t.omega;
    ts.alive = t.alive;
    ts.drop_reason = t.drop_reason;
    ts.residuals = t.residuals;
    if (t.alive) {
      const ProblemParams q = params_at(cfg, t.omega);
      ts.theorem = theorem_check(t.u, q, cfg.constants.c);
      ts.collocation = collocation_residual(t.u, q, cfg.collocation_grid);
      ts.lattice_residual = apply_F(t.u, q).l2_norm();
    }
    res.tracked.push_back(std::move(ts));
  }

  json tracked = json::array();
  for (size_t i = 0; i < s.tracked.size(); ++i) {
    const TrackedOmega& t = s.tracked[i];
    const TrackedSummary& ts = res.tracked[i];
    json e = {{"omega", t.omega}, {"alive", t.alive}, {"drop_reason", t.drop_reason}, {"residuals", t.residuals}};
    if (!t.residuals.empty()) {
      const InitialGuessResult& g = t.initial;
      e["initial"] = {{"j0", g.j0},
                      {"box", g.box},
                      {"residual_norm", g.residual_norm},
                      {"residual_budget", g.residual_budget},
                      {"residual_within_budget", g.residual_within_budget},
                      {"decay_C", g.decay_C},
                      {"decay_eta", g.decay_eta},
                      {"theta", g.theta},
                      {"min_divisor_ratio", g.min_divisor_ratio},
                      {"cubic_norm", g.cubic_norm},
                      {"tail_norm", g.tail_norm}};
    }
    if (t.alive) {
      e["u_norm"] = t.u.l2_norm();
      e["support_radius"] = t.u.support_radius();
      e["theorem"] = {{"epsilon", ts.theorem.epsilon},
                      {"weighted_sum", ts.theorem.weighted_sum},
                      {"constant", ts.theorem.constant}};
      e["collocation"] = {{"grid", ts.collocation.grid},
                          {"K", ts.collocation.K},
                          {"residual", ts.collocation.residual},
                          {"relative", ts.collocation.relative}};
      e["lattice_residual"] = ts.lattice_residual;
    }
    tracked.push_back(std::move(e));
  }

  json steps = json::array(), stages = json::array(), audit = json::array(), history = json::array();
  for (const auto& r : s.steps) steps.push_back(step_json(r));
  for (const auto& st : s.stages) stages.push_back(stage_json(st));
  for (const auto& a : s.audit)
    audit.push_back({{"j", a.j}, {"omega", a.omega}, {"check", a.check}, {"value", a.value},
                     {"bound", a.bound}, {"ok", a.ok}, {"mode", a.mode}});
  for (size_t i = 0; i < s.lambda_history.size(); ++i)
    history.push_back({{"j", s.j0 + static_cast<int>(i)}, {"measure", s.lambda_history[i].measure()},
                       {"components", s.lambda_history[i].size()}});

  double final_residual = 0.0;
  for (const auto& t : s.tracked)
    if (t.alive) final_residual = std::max(final_residual, t.residuals.back());

  res.report = {{"config", cfg.echo},
                {"j0", s.j0},
                {"j_final", s.j},
                {"advances", s.advances},
                {"converged", s.converged},
                {"final_residual", final_residual},
                {"initial_stage",
                 {{"box", s.initial.Nbox},
                  {"cell_size", s.initial.cell_size},
                  {"dilation", s.initial.dilation},
                  {"measure_excluded", s.initial.measure_excluded},
                  {"measure_good", s.initial.good.measure()},
                  {"cells", s.initial.cells.size()}}},
                {"lambda_history", history},
                {"lambda_final", intervals_json(s.lambda)},
                {"tracked", tracked},
                {"steps", steps},
                {"stages", stages},
                {"exclusion_records", s.exclusions.size()},
                {"audit", audit}};

  std::string g = csv_line({"scale", "omega", "l2_bound", "budget", "offdiag_profile", "offdiag_budget", "cutoff",
                            "method", "dense_mismatch", "pass"});
  for (const auto& r : s.steps)
    g += csv_line({std::to_string(r.N), csv_num(r.omega), csv_num(r.cert.l2_bound), csv_num(r.cert.l2_budget),
                   csv_num(r.cert.offdiag_profile), csv_num(r.cert.offdiag_budget), csv_num(r.cert.cutoff),
                   r.cert.method, csv_num(r.cert.dense_mismatch), r.cert.pass ? "1" : "0"});
  res.green_csv = std::move(g);

  std::string x = csv_line({"stage", "a", "b", "kept", "reason"});
  for (const auto& c : s.initial.cells)
    x += csv_line({std::to_string(s.j0), csv_num(c.witness ? c.kept.a : c.cell.a),
                   csv_num(c.witness ? c.kept.b : c.cell.b), c.witness ? "1" : "0", c.witness ? "" : "resonance"});
  for (const auto& st : s.stages)
    for (const auto& c : st.cell_log)
      x += csv_line({std::to_string(st.j + 1), csv_num(c.cell.a), csv_num(c.cell.b), c.kept ? "1" : "0", c.reason});
  res.exclusions_csv = std::move(x);

  std::string er = csv_line({"stage", "r", "kappa", "s", "cell_a", "cell_b", "sigma_center", "threshold",
                             "slope_min", "soft_failure", "windows", "excluded_measure"});
  for (size_t i = 0; i < s.exclusions.size(); ++i) {
    const ExclusionRecord& e = s.exclusions[i];
    er += csv_line({std::to_string(s.exclusion_stage[i] + 1), std::to_string(e.r), std::to_string(e.kappa),
                    std::to_string(e.s), csv_num(e.cell.a), csv_num(e.cell.b), csv_num(e.sigma_center),
                    csv_num(e.threshold), csv_num(e.slope_min), e.soft_failure ? "1" : "0",
                    std::to_string(e.excluded.size()), csv_num(e.excluded_measure())});
  }
  res.exclusion_records_csv = std::move(er);

  std::vector<std::pair<double, double>> certified;
  for (const auto& t : s.tracked)
    if (!t.residuals.empty()) certified.emplace_back(t.omega, t.residuals.front());
  res.initial_csv = initial_stage_csv(s.initial, certified);

  json sols = json::array();
  for (const auto& t : s.tracked)
    if (t.alive) sols.push_back(solution_entry(params_at(cfg, t.omega), t.u));
  res.solution = {{"format", "fnls-solution"}, {"version", 1}, {"solutions", sols}};
  return res;
}

void write_solve_artifacts(const SolveResult& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  write_text(d / "report.json", r.report.dump(2) + "\n");
  write_text(d / "solution.json", r.solution.dump(2) + "\n");
  write_text(d / "green_certificates.csv", r.green_csv);
  write_text(d / "exclusions.csv", r.exclusions_csv);
  write_text(d / "exclusion_records.csv", r.exclusion_records_csv);
  write_text(d / "initial_stage.csv", r.initial_csv);
}

SweepResult run_measure_sweep(const RunConfig& cfg) {
  SweepResult res;
  for (double eps : cfg.sweep_epsilons) {
    ProblemParams p = cfg.problem;
    p.epsilon = eps;
    const ScaleConstants& sc = cfg.constants;
    sc.validate(p.dim, p.alpha);
    const int j0 = sc.resolved_j0(eps);
    const GoodSetReport g = build_good_set_j0(p, sc);
    SweepRow r0;
    r0.epsilon = eps;
    r0.stage = j0;
    r0.N = g.Nbox;
    r0.measure_kept = g.good.measure();
    r0.measure_excluded = g.measure_excluded;
    r0.budget = 1.0 / p.log_inv_eps() + std::exp(-static_cast<double>(j0) - 9.0);
    r0.dominant_reason = g.measure_excluded > 0 ? "resonance" : "none";
    res.fitted_K = std::max(res.fitted_K, r0.measure_excluded / r0.budget);
    res.rows.push_back(r0);
    if (cfg.sweep_stages <= 0) continue;

    IterationState s = initialize(p, sc, cfg.omegas, cfg.driver);
    for (int k = 0; k < cfg.sweep_stages; ++k) {
      advance_scale(s, cfg.driver);
      const StageMeasure& st = s.stages.back();
      SweepRow r;
      r.epsilon = eps;
      r.stage = st.j + 1;
      r.N = st.N;
      r.measure_kept = st.measure_next;
      r.measure_excluded = st.excluded();
      r.budget = st.budget;
      r.dominant_reason = st.dominant_reason();
      res.rows.push_back(r);
    }
  }
  std::string csv =
      csv_line({"epsilon", "stage", "N", "measure_kept", "measure_excluded", "budget", "dominant_reason"});
  for (const auto& r : res.rows)
    csv += csv_line({csv_num(r.epsilon), std::to_string(r.stage), std::to_string(r.N), csv_num(r.measure_kept),
                     csv_num(r.measure_excluded), csv_num(r.budget), r.dominant_reason});
  res.csv = std::move(csv);
  return res;
}

json green_audit(const RunConfig& cfg, double omega, int N) {
  if (!(omega >= kOmegaMin && omega <= kOmegaMax)) throw ConfigError("green-audit: omega must lie in [1,2]");
  const ScaleConstants& sc = cfg.constants;
  sc.validate(cfg.problem.dim, cfg.problem.alpha);
  int j = -1;
  for (int e = 1, n = sc.M; n <= N; ++e, n *= sc.M)
    if (n == N) j = e - 1;
  if (N < 1 || j < 0)
    throw ConfigError("green-audit: N must be a power of M = " + std::to_string(sc.M) + " and at least M");

  const ProblemParams q = params_at(cfg, omega);
  const InitialGuessResult g = build_u0(cfg.problem, sc, omega);
  const GoodSetReport lam = build_good_set_j0(cfg.problem, sc);
  const LatticeOperator op = build_operator(g.u0, q, N, OperatorMode::kTilde);
  json out = {{"omega", omega},
              {"N", N},
              {"rows", op.rows()},
              {"in_lambda_j0", lam.good.contains(omega)},
              {"u_support_radius", g.u0.support_radius()}};

  const size_t cap = cfg.driver.dense_oracle_max_rows;
  if (op.rows() <= cap) {
    GreenCertificate c = check_green(dense_inverse(op.materialize(op.rows())), op, sc, cfg.driver.norm);
    c.method = "dense";
    out["dense"] = cert_json(c);
  } else {
    out["dense"] = nullptr;
  }

  NeumannOptions no;
  no.dense_oracle_max_rows = cap;
  no.norm = cfg.driver.norm;
  try {
    NeumannResult nr = neumann_inverse(op, q, sc, no);
    out["neumann"] = {{"certificate", cert_json(nr.cert)},
                      {"terms", nr.terms},
                      {"max_ratio", nr.max_ratio},
                      {"diag_floor", nr.diag_floor},
                      {"required_floor", nr.required_floor},
                      {"floor_ok", nr.floor_ok},
                      {"regime_ok", nr.regime_ok}};
  } catch (const CertificateError& e) {
    out["neumann"] = {{"failure", e.what()}};
  } catch (const std::invalid_argument& e) {
    out["neumann"] = {{"failure", e.what()}};
  }

  MultiscaleOptions mo;
  mo.dense_oracle_max_rows = cap;
  mo.norm = cfg.driver.norm;
  MultiscaleResult mr = multiscale_inverse(op, q, sc, j, nullptr, mo);
  json tiles = json::array();
  for (const auto& c : mr.qr_certs) tiles.push_back(cert_json(c));
  out["multiscale"] = {{"certificate", cert_json(mr.cert)},
                       {"q0", cert_json(mr.q0_cert)},
                       {"tiles", tiles},
                       {"N0", mr.N0},
                       {"tile_count", mr.tiles},
                       {"tiles_near_origin", mr.tiles_near_origin},
                       {"clusters", mr.clusters},
                       {"max_cluster_inverse", mr.max_cluster_inverse},
                       {"cluster_bound", mr.cluster_bound},
                       {"paving_iterations", mr.paving_iterations},
                       {"pass", mr.pass},
                       {"failure", mr.failure},
                       {"failure_reason", mr.failure_reason}};
  return out;
}

std::string partition_dump_csv(int d, double B, int box_radius, bool verify) {
  if (d < 1 || d > kMaxSpatialDim) throw ConfigError("partition-dump: d must lie in 1..3");
  if (!(B > 0)) throw ConfigError("partition-dump: B must be positive");
  if (box_radius < 0) throw ConfigError("partition-dump: box radius must be >= 0");
  const SeparationPartition part = separation_partition(d, B, box_radius);
  std::string why;
  if (verify && !part.verify_exhaustive(&why)) throw CertificateError("separation partition fails: " + why);
  const std::vector<double> near = part.nearest_separation();
  std::string csv = csv_line({"class_id", "members", "diameter", "nearest_separation"});
  for (size_t c = 0; c < part.classes.size(); ++c)
    csv += csv_line({std::to_string(part.classes[c].front()), std::to_string(part.classes[c].size()),
                     std::to_string(part.diameter[c]), csv_num(near[c])});
  return csv;
}

VerifyResult verify_solution(const json& doc, double tolerance, int grid) {
  VerifyResult res;
  res.tolerance = tolerance;
  if (!doc.is_object() || doc.value("format", "") != "fnls-solution" || !doc.contains("solutions") ||
      !doc["solutions"].is_array())
    throw ConfigError("verify: not a solution document");
  res.ok = true;
  for (const auto& e : doc["solutions"]) {
    ProblemParams q;
    try {
      q.dim = e.at("dim").get<int>();
      q.epsilon = e.at("epsilon").get<double>();
      q.alpha = e.at("alpha").get<double>();
      q.omega = e.at("omega").get<double>();
      q.nonlinearity = e.at("nonlinearity").get<double>();
      q.gevrey.c = e.at("gevrey_c").get<double>();
      q.gevrey.weight_factor = e.at("gevrey_weight_factor").get<double>();
      q.forcing = field_from_json(e.at("forcing"));
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("verify: malformed solution entry: ") + ex.what());
    }
    const FourierField u = field_from_json(e.at("u"));
    VerifyEntry v;
    v.omega = q.omega;
    v.collocation = collocation_residual(u, q, grid);
    v.lattice_residual = apply_F(u, q).l2_norm();
    const double scale = std::max(q.eps23() * q.forcing.l2_norm(), v.lattice_residual);
    v.agreement = scale > 0 ? std::abs(v.collocation.residual - v.lattice_residual) / scale : 0.0;
    v.ok = v.collocation.relative <= tolerance && v.agreement <= tolerance;
    res.ok = res.ok && v.ok;
    res.entries.push_back(v);
  }
  return res;
}

VerifyResult verify_solution_file(const std::string& path, double tolerance, int grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("verify: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("verify: malformed JSON: ") + e.what());
  }
  return verify_solution(doc, tolerance, grid);
}

}  // namespace fnls
