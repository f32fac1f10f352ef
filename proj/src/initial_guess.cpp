#include "fnls/initial_guess.hpp"

#include <cmath>
#include <limits>

#include "fnls/csv.hpp"
#include "fnls/lattice_box.hpp"
#include "fnls/nls_operator.hpp"

namespace fnls {

double divisor_threshold(const ProblemParams& p, int k) {
  return std::pow(1.0 + std::abs(k), -ScaleConstants::tau(p.dim)) / p.log_inv_eps();
}

IntervalSet resonance_union(const ProblemParams& p, int Nbox, double threshold_scale) {
  std::vector<Interval> pieces;
  if (Nbox <= 1 || threshold_scale <= 0.0) return {};
  // only the n-part of the box matters; the k sweep is explicit
  LatticeBox box(p.dim, Nbox);
  std::vector<long> nsq;
  for (const auto& xi : box.sites())
    if (xi.k() == 0) nsq.push_back(xi.spatial_sq());
  for (int k = 1; k < Nbox; ++k) {
    const double eta = threshold_scale * divisor_threshold(p, k);
    for (long s : nsq) {
      Interval w = resonance_window(s, k, eta);
      if (w.b > kOmegaMin && w.a < kOmegaMax) pieces.push_back(w);
    }
  }
  return IntervalSet(std::move(pieces));
}

double auto_cell_size(const ProblemParams& p, int Nbox) {
  const double eta_min = divisor_threshold(p, std::max(0, Nbox - 1));
  double h = 0.125;
  if (Nbox <= 1) return h;
  while (h * (Nbox - 1) > 0.5 * eta_min) h *= 0.5;
  return h;
}

GoodSetReport witness_good_set(const IntervalSet& base, const ProblemParams& p, int Nbox,
                               double cell_size, double dilation, double threshold_scale) {
  GoodSetReport r;
  r.Nbox = Nbox;
  r.cell_size = cell_size;
  r.dilation = dilation;
  r.base = base;
  r.resonances = resonance_union(p, Nbox, threshold_scale);
  const auto cells = partition_cells(base, cell_size);
  const auto& U = r.resonances.intervals();
  size_t u = 0;
  std::vector<Interval> kept;
  r.cells.reserve(cells.size());
  for (const auto& c : cells) {
    while (u < U.size() && U[u].b <= c.a) ++u;
    double covered = 0.0;
    for (size_t v = u; v < U.size() && U[v].a < c.b; ++v)
      covered += std::min(U[v].b, c.b) - std::max(U[v].a, c.a);
    WitnessCell w{c, covered < c.length(), {}};
    if (w.witness) {
      w.kept = dilate(c, dilation);
      kept.push_back(w.kept);
    }
    r.cells.push_back(w);
  }
  r.good = IntervalSet(std::move(kept));
  r.measure_excluded = base.measure() - r.good.measure();
  return r;
}

double j0_dilation(int j0) { return 1.0 - std::exp(-j0 - 9.0); }

double j0_cell_size(const ProblemParams& p, const ScaleConstants& sc) {
  const int j0 = sc.resolved_j0(p.epsilon);
  if (sc.paper_faithful) {
    const double h = std::exp(-std::pow(static_cast<double>(j0), sc.C3)) / j0_dilation(j0);
    if (h < 8.0 * std::numeric_limits<double>::epsilon())
      throw ConfigError("literal cell size exp(-j0^C3) is not representable in doubles");
    return std::min(h, 1.0);
  }
  if (sc.cell_size > 0.0) return sc.cell_size;
  return auto_cell_size(p, sc.N(j0));
}

GoodSetReport build_good_set_j0(const ProblemParams& p, const ScaleConstants& sc,
                                double threshold_scale) {
  const int j0 = sc.resolved_j0(p.epsilon);
  return witness_good_set(IntervalSet::unit(), p, sc.N(j0), j0_cell_size(p, sc), j0_dilation(j0),
                          threshold_scale);
}

InitialGuessResult build_u0(const ProblemParams& p, const ScaleConstants& sc, double omega) {
  InitialGuessResult r;
  r.j0 = sc.resolved_j0(p.epsilon);
  r.box = sc.N(r.j0);
  const ProblemParams q = p.with_omega(omega);
  const double e = q.eps23();

  // divisor floor over the whole box, as certified by the good set
  r.min_divisor_ratio = std::numeric_limits<double>::infinity();
  LatticeBox box(q.dim, r.box);
  for (const auto& xi : box.sites()) {
    if (xi.k() == 0) continue;
    const double ratio = std::abs(linear_symbol(xi, omega)) / (0.5 * divisor_threshold(q, xi.k()));
    r.min_divisor_ratio = std::min(r.min_divisor_ratio, ratio);
  }
  if (r.min_divisor_ratio <= 1.0)
    throw CertificateError("divisor below the certified floor at omega outside the good set");

  std::vector<FourierField::Entry> coeffs;
  for (const auto& [xi, a] : q.forcing.entries())
    if (in_box(xi, r.box)) coeffs.emplace_back(xi, e * a / linear_symbol(xi, omega));
  r.u0 = FourierField::from_entries(q.dim, r.box, std::move(coeffs));

  r.residual_norm = apply_F(r.u0, q).l2_norm();
  r.residual_budget = std::exp(-2.0 * std::pow(static_cast<double>(r.box), sc.c));
  r.residual_within_budget = r.residual_norm < r.residual_budget;
  if (sc.paper_faithful && !r.residual_within_budget)
    throw CertificateError("initial residual exceeds exp(-2 (M^j0)^c)");

  const double c = sc.c;
  r.decay_eta = 1.0;
  r.theta = -std::numeric_limits<double>::infinity();
  for (const auto& [xi, a] : r.u0.entries()) {
    const double w = std::pow(static_cast<double>(xi.l1()), c);
    r.decay_C = std::max(r.decay_C, std::abs(a) * std::exp(w));
    const double need = 2.0 / 3.0 - std::log(std::abs(a) * std::exp(1.5 * w)) / std::log(q.epsilon);
    r.theta = std::max(r.theta, need);
  }
  if (r.u0.empty()) r.theta = 0.0;
  if (!r.u0.empty())
    r.cubic_norm = fractional_derivative(cubic_term(r.u0), q.alpha).scaled(e * q.nonlinearity).l2_norm();
  FourierField tail = q.forcing - project(q.forcing, r.box);
  r.tail_norm = e * tail.l2_norm();
  return r;
}

std::string initial_stage_csv(const GoodSetReport& r,
                              const std::vector<std::pair<double, double>>& certified) {
  std::string s = csv_line({"cell_lo", "cell_hi", "witness", "kept_lo", "kept_hi", "measure_excluded",
                            "omega", "residual"});
  for (const auto& c : r.cells) {
    std::string om, res;
    if (c.witness)
      for (const auto& [w, v] : certified)
        if (c.kept.contains(w)) {
          om = csv_num(w);
          res = csv_num(v);
        }
    const double lost = c.cell.length() - (c.witness ? c.kept.length() : 0.0);
    s += csv_line({csv_num(c.cell.a), csv_num(c.cell.b), c.witness ? "1" : "0",
                   c.witness ? csv_num(c.kept.a) : "", c.witness ? csv_num(c.kept.b) : "",
                   csv_num(lost), om, res});
  }
  return s;
}

}  // namespace fnls
