#include "fnls/newton.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "fnls/toeplitz_fft.hpp"

namespace fnls {

Eigen::VectorXcd pair_to_vector(const FourierField& w1, const FourierField& w2, const LatticeBox& box) {
  const size_t n = box.size();
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(2 * n);
  for (const auto& [xi, a] : w1.entries()) {
    const size_t i = box.position(xi);
    if (i != LatticeBox::npos) x(i) = a;
  }
  for (const auto& [xi, a] : w2.entries()) {
    const size_t i = box.position(xi);
    if (i != LatticeBox::npos) x(n + i) = a;
  }
  return x;
}

std::pair<FourierField, FourierField> vector_to_pair(const Eigen::VectorXcd& x, const LatticeBox& box) {
  const size_t n = box.size();
  std::vector<FourierField::Entry> a, b;
  for (size_t i = 0; i < n; ++i) {
    if (x(i) != cplx(0.0, 0.0)) a.emplace_back(box.site(i), x(i));
    if (x(n + i) != cplx(0.0, 0.0)) b.emplace_back(box.site(i), x(n + i));
  }
  return {FourierField::from_entries(box.dim(), box.radius(), std::move(a)),
          FourierField::from_entries(box.dim(), box.radius(), std::move(b))};
}

NewtonStepResult newton_step(const FourierField& u, const ProblemParams& p, const ScaleConstants& sc,
                             int j, const Eigen::MatrixXcd& green_tilde) {
  NewtonStepResult r;
  const int N = sc.N(j + 1);
  LatticeBox box(p.dim, N);
  if (static_cast<size_t>(green_tilde.rows()) != 2 * box.size())
    throw std::invalid_argument("Green matrix does not match the box");
  const FourierField F = apply_F(u, p);
  r.support_radius = F.support_radius();
  r.support_bound = 0.25 * N;
  r.support_ok = r.support_radius <= r.support_bound;
  if (sc.paper_faithful && !r.support_ok)
    throw CertificateError("supp Q_j leaves B(0, M^{j+1}/4)");

  Eigen::VectorXcd q = -pair_to_vector(F, conjugate_flip(F), box);
  for (size_t i = 0; i < box.size(); ++i) {
    const double lam = std::pow(angle_weight(box.site(i)), -p.alpha);
    q(i) *= lam;
    q(box.size() + i) *= lam;
  }
  Eigen::VectorXcd w = green_tilde * q;
  std::tie(r.w1, r.w2) = vector_to_pair(w, box);
  r.w_norm = w.norm();
  r.conjugacy_defect = (r.w2 - conjugate_flip(r.w1)).l2_norm();
  if (r.conjugacy_defect > 1e-10 * r.w_norm)
    throw CertificateError("solved pair is not conjugate-symmetric");
  r.v = r.w1;
  r.u_next = u + r.v;
  r.v_norm = r.v.l2_norm();
  r.v_budget = std::exp(-1.5 * std::pow(static_cast<double>(N), sc.c));
  r.v_within_budget = r.v_norm < r.v_budget;
  if (sc.paper_faithful && !r.v_within_budget)
    throw CertificateError("Newton increment exceeds exp(-(3/2)(M^{j+1})^c)");
  return r;
}

namespace {

FourierField outside(const FourierField& f, int N) { return f - project(f, N); }

}  // namespace

DecompositionReport residual_decomposition_check(const FourierField& u, const NewtonStepResult& step,
                                                 const ProblemParams& p, int N) {
  DecompositionReport rep;
  rep.N = N;
  const FourierField& v = step.v;
  const FourierField vb = conjugate_flip(v);
  const FourierField Fu = apply_F(u, p);
  const FourierField direct = apply_F(step.u_next, p);
  rep.direct_norm = direct.l2_norm();

  // in-box: P_N F(u) + T_N w through the lattice operator
  LatticeOperator op = build_operator(u, p, N, OperatorMode::kT);
  const LatticeBox& box = op.box();
  Eigen::VectorXcd x = pair_to_vector(v, vb, box);
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  if (op.scale() != 0.0) {
    ToeplitzApplier S(op);
    S.apply(x.data(), y.data());
  }
  for (Eigen::Index r = 0; r < x.size(); ++r)
    y(r) = op.diagonal(r) * x(r) + op.scale() * op.row_multiplier(r) * y(r);
  y += pair_to_vector(Fu, conjugate_flip(Fu), box);
  auto [d1, d2] = vector_to_pair(y, box);
  rep.in_box_defect = y.norm();

  const FourierField out1 = outside(Fu, N);
  rep.outside = out1.l2_norm();

  const int half = N / 2;
  const FourierField vi = project(v, half), vbi = project(vb, half);
  auto [ti1, ti2] = apply_T_fields(u, p, vi, vbi);
  auto [to1, to2] = apply_T_fields(u, p, v - vi, vb - vbi);
  ti1 = outside(ti1, N);
  ti2 = outside(ti2, N);
  to1 = outside(to1, N);
  to2 = outside(to2, N);
  rep.tail_inner = std::hypot(ti1.l2_norm(), ti2.l2_norm());
  rep.tail_outer = std::hypot(to1.l2_norm(), to2.l2_norm());

  FourierField rem(p.dim, 1);
  const double s = p.eps23() * p.nonlinearity;
  if (s != 0.0 && !v.empty()) {
    const FourierField ub = conjugate_flip(u);
    FourierField c = convolve(convolve(u, v), vb).scaled(2.0) + convolve(convolve(ub, v), v) +
                     convolve(convolve(v, v), vb);
    rem = fractional_derivative(c, p.alpha).scaled(s);
  }
  rep.remainder = rem.l2_norm();

  const FourierField dec1 = out1 + d1 + ti1 + to1 + rem;
  const FourierField dec2 = conjugate_flip(out1) + d2 + ti2 + to2 + conjugate_flip(rem);
  rep.mismatch[0] = (direct - dec1).l2_norm();
  rep.mismatch[1] = (conjugate_flip(direct) - dec2).l2_norm();
  rep.tolerance = 1e-9 * std::max({Fu.l2_norm(), rep.direct_norm, p.eps23() * p.forcing.l2_norm()});
  rep.ok = rep.mismatch[0] <= rep.tolerance && rep.mismatch[1] <= rep.tolerance;
  return rep;
}

TheoremReport theorem_check(const FourierField& u, const ProblemParams& p, double c) {
  TheoremReport r;
  r.epsilon = p.epsilon;
  const double scale = std::cbrt(p.epsilon);
  for (const auto& [xi, a] : u.entries())
    r.weighted_sum += scale * std::abs(a) * std::exp(0.5 * std::pow(static_cast<double>(xi.l1()), c));
  r.constant = r.weighted_sum / std::pow(p.epsilon, 0.25);
  return r;
}

std::string StageMeasure::dominant_reason() const {
  if (excluded() <= 0.0) return "none";
  if (excluded_resonance >= excluded_eigenvalue && excluded_resonance >= excluded_green) return "resonance";
  if (excluded_eigenvalue >= excluded_green) return "eigenvalue";
  return "green-bound";
}

size_t IterationState::alive() const {
  return static_cast<size_t>(std::count_if(tracked.begin(), tracked.end(),
                                           [](const TrackedOmega& t) { return t.alive; }));
}

bool uses_neumann(const ProblemParams& p, const ScaleConstants& sc, int N) {
  switch (sc.regime) {
    case RegimeChoice::kNeumann: return true;
    case RegimeChoice::kMultiscale: return false;
    case RegimeChoice::kAuto: break;
  }
  if (sc.paper_faithful) return N <= std::pow(p.epsilon, -1.0 / (30.0 * p.dim));
  return N <= sc.neumann_max_box;
}

namespace {

double inv_square_sum(int from, int to) {
  double s = 0.0;
  for (int j = std::max(from, 1); j <= to; ++j) s += 1.0 / (static_cast<double>(j) * j);
  return s;
}

double decay_profile(const FourierField& u, double c) {
  double m = 0.0;
  for (const auto& [xi, a] : u.entries())
    m = std::max(m, std::abs(a) * std::exp(std::pow(static_cast<double>(xi.l1()), c)));
  return m;
}

void audit_state(IterationState& s, const TrackedOmega& t, int j, double factor) {
  const char* mode = s.sc.paper_faithful ? "paper" : "relaxed";
  const int R = s.sc.N(j);
  const double eps15 = std::pow(s.p.epsilon, 0.2);
  s.audit.push_back({j, t.omega, "support", static_cast<double>(t.u.support_radius()),
                     static_cast<double>(R), t.u.support_radius() <= R, mode});
  s.audit.push_back({j, t.omega, "norm", t.u.l2_norm(), factor * eps15, t.u.l2_norm() < factor * eps15, mode});
  const double prof = decay_profile(t.u, s.sc.c);
  s.audit.push_back({j, t.omega, "decay", prof, factor, prof < factor, mode});
  const double budget = std::exp(-2.0 * std::pow(static_cast<double>(R), s.sc.c));
  s.audit.push_back({j, t.omega, "residual", t.residuals.back(), budget, t.residuals.back() < budget, mode});
}

Interval find_piece(const std::vector<Interval>& cells, double w, size_t* idx) {
  for (size_t i = 0; i < cells.size(); ++i)
    if (cells[i].contains(w)) {
      *idx = i;
      return cells[i];
    }
  *idx = static_cast<size_t>(-1);
  return {};
}

double truncation_floor(const FourierField& u_next, const ProblemParams& p, int N) {
  const double e = p.eps23();
  const double tail = e * outside(p.forcing, N).l2_norm();
  double lin = 0.0;
  const FourierField inside = project(u_next, N);
  for (const auto& [xi, a] : inside.entries()) lin += std::norm(linear_symbol(xi, p.omega) * a);
  return 10.0 * tail + 1e3 * DBL_EPSILON * (std::sqrt(lin) + e * p.forcing.l2_norm());
}

}  // namespace

IterationState initialize(const ProblemParams& p, const ScaleConstants& sc,
                          const std::vector<double>& omegas, const DriverOptions& opt) {
  (void)opt;
  sc.validate(p.dim, p.alpha);
  IterationState s;
  s.p = p;
  s.sc = sc;
  s.j0 = sc.resolved_j0(p.epsilon);
  s.j = s.j0;
  s.initial = build_good_set_j0(p, sc);
  s.lambda = s.initial.good;
  s.lambda_history.push_back(s.lambda);
  for (double w : omegas) {
    TrackedOmega t;
    t.omega = w;
    if (!s.lambda.contains(w)) {
      t.alive = false;
      t.drop_reason = "resonance";
      s.tracked.push_back(std::move(t));
      continue;
    }
    t.initial = build_u0(p, sc, w);
    t.u = t.initial.u0;
    t.residuals.push_back(t.initial.residual_norm);
    s.tracked.push_back(std::move(t));
    audit_state(s, s.tracked.back(), s.j0, 1.0);
  }
  if (s.lambda.empty()) throw NoGoodCellsError("Lambda_j0 is empty");
  if (s.alive() == 0) throw NoGoodCellsError("no tracked frequency lies in Lambda_j0");
  return s;
}

MultiscaleExclusion multiscale_exclusion(const IntervalSet& lambda, const FourierField& u,
                                         const ProblemParams& p, const ScaleConstants& sc, int j,
                                         size_t cell_cap) {
  MultiscaleExclusion mx;
  const int N = sc.N(j + 1);
  mx.cell_size = 1.0 / (static_cast<double>(N) * N);
  if (lambda.empty()) return mx;
  // cells tile the hull of Lambda_j so the cap holds however fragmented it is
  const IntervalSet hull({{lambda.intervals().front().a, lambda.intervals().back().b}});
  if (hull.measure() / mx.cell_size > static_cast<double>(cell_cap))
    mx.cell_size = hull.measure() / static_cast<double>(cell_cap);
  for (const auto& c : partition_cells(hull, mx.cell_size))
    if (intersect(IntervalSet({c}), lambda).measure() > 0.0) mx.cells.push_back(c);
  LatticeOperator op = build_operator(u, p, N, OperatorMode::kTilde);
  const int side = std::max(1, static_cast<int>(std::ceil(std::cbrt(static_cast<double>(N)) - 1e-12)));
  Cover cover = build_cover(op, std::min(center_radius(sc, j), N), side, 1);
  SeparationPartition part = partition_for(op, sc);
  const double threshold = exclusion_threshold(N, sc);
  std::vector<Interval> pieces;
  // the centre box is excluded like a cluster, against its own budget
  ClusterNeighborhood centre;
  centre.rows = cover.boxes[0].rows;
  for (auto& rec : exclude_by_spectrum(op, {centre}, mx.cells, 1.0 / center_budget(cover.N0, N, sc))) {
    if (rec.excluded.empty()) continue;
    pieces.insert(pieces.end(), rec.excluded.begin(), rec.excluded.end());
    mx.records.push_back(std::move(rec));
  }
  for (size_t c = 0; c < mx.cells.size(); ++c) {
    const Interval& cell = mx.cells[c];
    LatticeOperator oc = at_omega(op, cell.center());
    auto hoods = cluster_neighborhoods(oc, cover, part, p, sc);
    if (hoods.empty()) continue;
    for (auto& rec : exclude_by_spectrum(op, hoods, {cell}, threshold)) {
      if (rec.excluded.empty()) continue;
      rec.s = static_cast<int>(c);
      pieces.insert(pieces.end(), rec.excluded.begin(), rec.excluded.end());
      mx.records.push_back(std::move(rec));
    }
  }
  mx.excluded = IntervalSet(std::move(pieces));
  return mx;
}

void advance_scale(IterationState& s, const DriverOptions& opt) {
  const ProblemParams& p = s.p;
  const ScaleConstants& sc = s.sc;
  const int j = s.j;
  const int N = sc.N(j + 1);
  const bool neumann = uses_neumann(p, sc, N);
  StageMeasure st;
  st.j = j;
  st.N = N;
  st.regime = neumann ? "neumann" : "multiscale";
  st.measure_lambda = s.lambda.measure();
  st.budget = std::pow(static_cast<double>(N), -sc.q_measure);

  // Lambda_j'
  std::vector<Interval> prime_cells;
  if (neumann) {
    const double cell = sc.cell_size > 0 ? sc.cell_size : auto_cell_size(p, N);
    GoodSetReport rep = witness_good_set(s.lambda, p, N, cell, 1.0);
    for (const auto& c : rep.cells) {
      if (c.witness) prime_cells.push_back(c.kept);
      st.cell_log.push_back({c.witness ? c.kept : c.cell, c.witness, c.witness ? "" : "resonance"});
    }
    st.cells = static_cast<int>(rep.cells.size());
    st.cell_size = cell;
    st.excluded_resonance = st.measure_lambda - IntervalSet(prime_cells).measure();
  } else {
    const TrackedOmega* ref = nullptr;
    for (const auto& t : s.tracked)
      if (t.alive) {
        ref = &t;
        break;
      }
    MultiscaleExclusion mx =
        multiscale_exclusion(s.lambda, ref->u, p.with_omega(ref->omega), sc, j, opt.exclusion_cell_cap);
    for (const auto& c : mx.cells) {
      const IntervalSet here = intersect(IntervalSet({c}), s.lambda);
      const IntervalSet kept = difference(here, mx.excluded);
      const IntervalSet cut = intersect(here, mx.excluded);
      for (const auto& piece : kept.intervals()) {
        prime_cells.push_back(piece);
        st.cell_log.push_back({piece, true, ""});
      }
      for (const auto& piece : cut.intervals())
        st.cell_log.push_back({piece, false, "eigenvalue"});
    }
    st.cells = static_cast<int>(mx.cells.size());
    st.cell_size = mx.cell_size;
    st.excluded_eigenvalue = st.measure_lambda - IntervalSet(prime_cells).measure();
    for (auto& r : mx.records) {
      s.exclusions.push_back(std::move(r));
      s.exclusion_stage.push_back(j);
    }
  }

  for (auto& t : s.tracked) {
    if (!t.alive) continue;
    size_t idx;
    find_piece(prime_cells, t.omega, &idx);
    if (idx == static_cast<size_t>(-1)) {
      t.alive = false;
      t.drop_reason = neumann ? "resonance" : "eigenvalue";
      continue;
    }
    const ProblemParams q = p.with_omega(t.omega);
    LatticeOperator op = build_operator(t.u, q, N, OperatorMode::kTilde);
    StepRecord rec;
    rec.j = j;
    rec.N = N;
    rec.omega = t.omega;
    rec.regime = st.regime;
    Eigen::MatrixXcd G;
    bool green_ok = false;
    if (neumann) {
      NeumannOptions no;
      no.dense_oracle_max_rows = opt.dense_oracle_max_rows;
      no.norm = opt.norm;
      try {
        NeumannResult nr = neumann_inverse(op, q, sc, no);
        rec.cert = nr.cert;
        rec.neumann_terms = nr.terms;
        rec.neumann_ratio = nr.max_ratio;
        rec.floor_ok = nr.floor_ok;
        if (nr.cert.dense_mismatch > 1e-10)
          throw CertificateError("Neumann inverse disagrees with dense inversion");
        green_ok = nr.cert.pass;
        G = std::move(nr.inverse);
      } catch (const CertificateError& e) {
        if (std::string(e.what()).find("diverges") == std::string::npos) throw;
        green_ok = false;
      }
    } else {
      MultiscaleOptions mo;
      mo.dense_oracle_max_rows = opt.dense_oracle_max_rows;
      mo.norm = opt.norm;
      const int jp = (j + 1) / 3 - 1;
      const OlderInverse* prior = nullptr;
      if (jp >= s.j0) {
        auto it = t.green_cache.find(jp);
        if (it != t.green_cache.end()) prior = &it->second;
      }
      MultiscaleResult mr = multiscale_inverse(op, q, sc, j, prior, mo);
      rec.cert = mr.cert;
      rec.tiles = mr.tiles;
      rec.clusters = mr.clusters;
      rec.paving_iterations = mr.paving_iterations;
      rec.q0_from_prior = mr.q0_from_prior;
      rec.perturbation_ok = mr.perturbation_ok;
      if (mr.cert.dense_mismatch > 1e-8)
        throw CertificateError("multiscale inverse disagrees with dense inversion");
      green_ok = mr.pass;
      G = std::move(mr.inverse);
    }
    if (!green_ok) {
      t.alive = false;
      t.drop_reason = "green-bound";
      st.excluded_green += prime_cells[idx].length();
      for (auto& e : st.cell_log)
        if (e.kept && e.cell == prime_cells[idx]) {
          e.kept = false;
          e.reason = "green-bound";
        }
      prime_cells.erase(prime_cells.begin() + static_cast<long>(idx));
      s.steps.push_back(std::move(rec));
      continue;
    }
    if (op.rows() <= opt.dense_oracle_max_rows) t.green_cache.insert_or_assign(j, OlderInverse{op, G});

    NewtonStepResult step = newton_step(t.u, q, sc, j, G);
    DecompositionReport dec = residual_decomposition_check(t.u, step, q, N);
    if (!dec.ok) throw CertificateError("residual decomposition disagrees with direct F(u_{j+1})");
    rec.residual_before = t.residuals.back();
    rec.residual_after = dec.direct_norm;
    rec.truncation_floor = truncation_floor(step.u_next, q, N);
    rec.contraction_ratio =
        rec.residual_before > 0 ? rec.residual_after / std::pow(rec.residual_before, 1.5) : 0.0;
    rec.contraction_ok =
        rec.residual_after <= std::max(5.0 * std::pow(rec.residual_before, 1.5), rec.truncation_floor);
    rec.v_norm = step.v_norm;
    rec.v_budget = step.v_budget;
    rec.w_norm = step.w_norm;
    rec.conjugacy_defect = step.conjugacy_defect;
    rec.support_radius = step.support_radius;
    rec.support_bound = step.support_bound;
    rec.support_ok = step.support_ok;
    rec.decomposition = dec;

    if (opt.lipschitz_probe) {
      const double h = opt.lipschitz_h;
      const ProblemParams qh = p.with_omega(t.omega + h);
      if (!t.shadow) t.shadow = build_u0(p, sc, t.omega + h).u0;
      LatticeOperator oh = build_operator(*t.shadow, qh, N, OperatorMode::kTilde);
      if (oh.rows() <= opt.dense_oracle_max_rows) {
        Eigen::MatrixXcd Gh = dense_inverse(oh.materialize(oh.rows()));
        t.shadow = newton_step(*t.shadow, qh, sc, j, Gh).u_next;
        rec.lipschitz = (apply_F(*t.shadow, qh) - apply_F(step.u_next, q)).l2_norm() / h;
        const double budget = 2.0 * std::exp(-2.0 * std::pow(static_cast<double>(N), sc.c));
        s.audit.push_back({j + 1, t.omega, "lipschitz", rec.lipschitz, budget, rec.lipschitz < budget,
                           sc.paper_faithful ? "paper" : "relaxed"});
      } else {
        t.shadow.reset();
      }
    }

    t.u = step.u_next;
    t.residuals.push_back(rec.residual_after);
    s.audit.push_back({j + 1, t.omega, "increment", step.v_norm,
                       std::exp(-11.0 / 8.0 * std::pow(static_cast<double>(N), sc.c)),
                       step.v_norm < std::exp(-11.0 / 8.0 * std::pow(static_cast<double>(N), sc.c)),
                       sc.paper_faithful ? "paper" : "relaxed"});
    s.steps.push_back(std::move(rec));
  }

  IntervalSet prime(prime_cells);
  st.measure_prime = prime.measure();
  const double factor = 1.0 - std::exp(-static_cast<double>(j) - 10.0);
  std::vector<Interval> shrunk;
  shrunk.reserve(prime_cells.size());
  for (const auto& c : prime_cells) shrunk.push_back(dilate(c, factor));
  IntervalSet next(std::move(shrunk));
  st.measure_next = next.measure();
  st.dilation_loss = st.measure_prime - st.measure_next;

  // chain Lambda_{j+1} in Lambda_j' in Lambda_j
  if (difference(next, prime).measure() > 1e-14 || difference(prime, s.lambda).measure() > 1e-14)
    throw CertificateError("Lambda chain inclusion violated");

  const char* mode = sc.paper_faithful ? "paper" : "relaxed";
  s.audit.push_back({j + 1, 0.0, "measure-step", st.excluded(), st.budget, st.excluded() <= st.budget, mode});
  const double vi_bound = std::exp(-static_cast<double>(j) - 10.0);
  s.audit.push_back({j + 1, 0.0, "dilation-measure", st.dilation_loss, vi_bound,
                     st.dilation_loss <= vi_bound * (1.0 + 1e-12), mode});

  for (auto& t : s.tracked) {
    if (!t.alive) continue;
    if (!next.contains(t.omega)) {
      t.alive = false;
      t.drop_reason = "dilation";
      continue;
    }
    audit_state(s, t, j + 1, 1.0 + inv_square_sum(s.j0, j + 1));
  }
  s.stages.push_back(st);
  s.lambda = std::move(next);
  s.lambda_history.push_back(s.lambda);
  s.j = j + 1;
  ++s.advances;
  if (s.lambda.empty()) throw NoGoodCellsError("Lambda_" + std::to_string(j + 1) + " is empty");
  if (s.alive() == 0) throw NoGoodCellsError("every tracked frequency was excluded at scale " + std::to_string(N));
}

bool should_stop(const IterationState& s, const DriverOptions& opt) {
  bool all_small = true, all_zero = true;
  for (const auto& t : s.tracked) {
    if (!t.alive) continue;
    all_small = all_small && t.residuals.back() < opt.residual_target;
    all_zero = all_zero && t.residuals.back() == 0.0;
  }
  if (all_small && (s.advances >= opt.min_advances || all_zero)) return true;
  return s.j >= opt.j_max;
}

IterationState run_newton(const ProblemParams& p, const ScaleConstants& sc,
                          const std::vector<double>& omegas, const DriverOptions& opt) {
  IterationState s = initialize(p, sc, omegas, opt);
  while (!should_stop(s, opt)) advance_scale(s, opt);
  s.converged = true;
  for (const auto& t : s.tracked)
    if (t.alive && !(t.residuals.back() < opt.residual_target)) s.converged = false;
  return s;
}

}  // namespace fnls
