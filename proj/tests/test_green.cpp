#include <doctest.h>

#include "fnls/green.hpp"
#include "fnls/initial_guess.hpp"
#include "oracles.hpp"

using namespace fnls;

namespace {

ProblemParams base(double eps = 1e-4) {
  ProblemParams p;
  p.dim = 1;
  p.epsilon = eps;
  p.alpha = 4e-4;
  p.forcing = bundled_forcing(1);
  return p;
}

FourierField u0_at(const ProblemParams& p, double w) { return build_u0(p, ScaleConstants{}, w).u0; }

Eigen::MatrixXcd oracle_matrix(const FourierField& u, const ProblemParams& p, int N, bool tilde) {
  oracle::OperatorOracle o(u, p, tilde);
  auto sites = oracle::box_sites(p.dim, N);
  const size_t m = sites.size();
  Eigen::MatrixXcd A(2 * m, 2 * m);
  for (size_t i = 0; i < 2 * m; ++i)
    for (size_t j = 0; j < 2 * m; ++j) A(i, j) = o(static_cast<int>(i / m), sites[i % m], static_cast<int>(j / m), sites[j % m]);
  return A;
}

}  // namespace

TEST_CASE("Neumann series with S = 0 is the diagonal inverse") {
  ProblemParams p = base().with_omega(std::sqrt(2.0));
  LatticeOperator op = build_operator(FourierField(1, 1), p, 8, OperatorMode::kTilde);
  NeumannResult r = neumann_inverse(op, p, ScaleConstants{});
  CHECK(r.terms <= 2);
  double off = 0.0, diag = 0.0;
  for (Eigen::Index i = 0; i < r.inverse.rows(); ++i)
    for (Eigen::Index j = 0; j < r.inverse.cols(); ++j) {
      if (i == j)
        diag = std::max(diag, std::abs(r.inverse(i, i) - 1.0 / op.diagonal(i)) * std::abs(op.diagonal(i)));
      else
        off = std::max(off, std::abs(r.inverse(i, j)));
    }
  CHECK(off == 0.0);
  CHECK(diag <= 1e-15);
}

TEST_CASE("Neumann series against dense inversion") {
  const double w = std::sqrt(2.0);
  ProblemParams p = base().with_omega(w);
  FourierField u = u0_at(p, w);
  LatticeOperator op = build_operator(u, p, 8, OperatorMode::kTilde);
  NeumannResult r = neumann_inverse(op, p, ScaleConstants{});
  Eigen::MatrixXcd A = oracle_matrix(u, p, 8, true);
  Eigen::MatrixXcd D = A.inverse();
  CHECK(relative_mismatch(r.inverse, D) <= 1e-10);
  CHECK(r.cert.dense_mismatch <= 1e-10);
  CHECK(r.cert.pass);
  CHECK(r.floor_ok);
  // |G(xi,xi')| <= e^{-|xi-xi'|^c / 2} off the diagonal
  for (size_t i = 0; i < op.rows(); ++i)
    for (size_t j = 0; j < op.rows(); ++j) {
      const int dist = (op.site_of(i) - op.site_of(j)).l1();
      if (dist > 0) CHECK(std::abs(r.inverse(i, j)) <= std::exp(-0.5 * std::pow(dist, 0.25)));
    }
}

TEST_CASE("weak coupling limit") {
  const double w = 1.2345;
  double prev = 1.0;
  for (double eps : {1e-4, 1e-7, 1e-10}) {
    ProblemParams p = base(1e-4).with_omega(w);
    FourierField u = u0_at(p, w);
    p.epsilon = eps;
    LatticeOperator op = build_operator(u, p, 8, OperatorMode::kTilde);
    NeumannResult r = neumann_inverse(op, p, ScaleConstants{});
    double off = 0.0;
    for (Eigen::Index i = 0; i < r.inverse.rows(); ++i)
      for (Eigen::Index j = 0; j < r.inverse.cols(); ++j)
        if (i != j) off = std::max(off, std::abs(r.inverse(i, j)));
    CHECK(off < prev);
    prev = off;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("check_green on simple matrices") {
  std::vector<MultiIndex> sites = oracle::box_sites(1, 4);
  const size_t m = sites.size();
  GreenCheckSpec spec = scale_spec(8, ScaleConstants{});
  GreenCertificate id = check_green(Eigen::MatrixXcd::Identity(m, m), sites, spec);
  CHECK(id.l2_bound == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(id.offdiag_profile == 0.0);
  CHECK(id.pass);

  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Identity(m, m);
  diag(3, 3) = 1e3;
  GreenCertificate d8 = check_green(diag, sites, spec);
  CHECK(d8.l2_bound == doctest::Approx(1e3).epsilon(1e-12));
  CHECK(d8.pass == (spec.l2_budget > 1e3));
  CHECK(d8.pass);
  GreenCertificate d4 = check_green(diag, sites, scale_spec(4, ScaleConstants{}));
  CHECK_FALSE(d4.pass);
  CHECK(green_budget(4, 2.5) < 1e3);
}

TEST_CASE("factorized inverse and Hermitian spectrum") {
  const double w = 1.8;
  ProblemParams p = base().with_omega(w);
  FourierField u = u0_at(p, w);
  LatticeOperator T = build_operator(u, p, 8, OperatorMode::kT);
  LatticeOperator Tt = build_operator(u, p, 8, OperatorMode::kTilde);
  Eigen::MatrixXcd Ti = dense_inverse(T.materialize());
  Eigen::MatrixXcd Gt = dense_inverse(Tt.materialize());
  Eigen::MatrixXcd fac = Gt;
  for (Eigen::Index j = 0; j < fac.cols(); ++j) fac.col(j) /= T.row_multiplier(j);
  CHECK(relative_mismatch(fac, Ti) <= 1e-10);

  Eigen::MatrixXcd H = Tt.materialize();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(H);
  CHECK(ces.eigenvalues().imag().cwiseAbs().maxCoeff() <= 1e-10);
  Eigen::VectorXd ev = hermitian_eigenvalues(H);
  Eigen::VectorXd sv = singular_values(H);
  CHECK(std::abs(sv.minCoeff() - ev.cwiseAbs().minCoeff()) <= 1e-10);
}

TEST_CASE("derivative of the inverse in omega") {
  for (double w : {1.2345, std::sqrt(2.0), 1.8}) {
    ProblemParams p = base().with_omega(w);
    FourierField u = u0_at(p, w);
    const double h = 1e-6;
    auto inv_at = [&](double x) { return dense_inverse(build_operator(u, p.with_omega(x), 8, OperatorMode::kTilde).materialize()); };
    Eigen::MatrixXcd G = inv_at(w);
    Eigen::MatrixXcd dG = (inv_at(w + h) - inv_at(w - h)) / (2 * h);
    LatticeOperator op = build_operator(u, p, 8, OperatorMode::kTilde);
    double dT = 0.0;  // dT/dw is diagonal: -+ k <n>^{-alpha}
    for (size_t r = 0; r < op.rows(); ++r)
      dT = std::max(dT, std::abs(op.site_of(r).k()) * std::pow(oracle::bracket(op.site_of(r)), -p.alpha));
    const double g = singular_values(G).maxCoeff();
    CHECK(singular_values(dG).maxCoeff() <= g * g * dT * (1 + 1e-3));
  }
}

TEST_CASE("one-site exclusion window in closed form") {
  ProblemParams p = base();
  p.alpha = 0.03;
  const double w = 1.65;
  const int n = 2, k = 3;
  const double theta = 1e-2;
  const Interval cell{1.6, 1.7};
  const double lam = std::pow(1.0 + n * n, -p.alpha / 2.0);
  {
    LatticeOperator op = build_operator(FourierField(1, 1), p.with_omega(w), 8, OperatorMode::kTilde);
    size_t site = op.box().position(MultiIndex({n}, k));
    REQUIRE(site != LatticeBox::npos);
    ClusterNeighborhood cl;
    cl.rows = {op.row_of(0, site)};
    auto recs = exclude_by_spectrum(op, {cl}, {cell}, theta);
    REQUIRE(recs.size() == 1);
    REQUIRE(recs[0].excluded.size() == 1);
    // w^{-1} (n^2+1) lam - k lam in (-theta, theta)
    const double a1 = (n * n + 1.0) * lam;
    const double lo = a1 / (k * lam + theta), hi = a1 / (k * lam - theta);
    CHECK(recs[0].excluded[0].a <= lo);
    CHECK(recs[0].excluded[0].b >= hi);
    CHECK(recs[0].excluded[0].a == doctest::Approx(lo).epsilon(1e-11));
    CHECK(recs[0].excluded[0].b == doctest::Approx(hi).epsilon(1e-11));
    CHECK(recs[0].slope_min == doctest::Approx(a1).epsilon(1e-14));
    CHECK_FALSE(recs[0].soft_failure);
  }
  {
    // with the Toeplitz diagonal the window only widens
    FourierField u = u0_at(base(), w);
    LatticeOperator op = build_operator(u, p.with_omega(w), 8, OperatorMode::kTilde);
    ClusterNeighborhood cl;
    cl.rows = {op.row_of(0, op.box().position(MultiIndex({n}, k)))};
    auto recs = exclude_by_spectrum(op, {cl}, {cell}, theta);
    const double s0 = op.scale() * std::real(op.symbol(0, 0, MultiIndex(1)));
    const double a1 = (n * n + 1.0) * lam + s0;
    const double lo = a1 / (k * lam + theta), hi = a1 / (k * lam - theta);
    IntervalSet got(recs[0].excluded);
    CHECK(difference(IntervalSet({{lo, hi}}), got).measure() == 0.0);
  }
  {
    // every eigenvalue far from zero: nothing excluded
    LatticeOperator op = build_operator(u0_at(base(), w), p.with_omega(w), 8, OperatorMode::kTilde);
    ClusterNeighborhood cl;
    for (int kk : {0, 1, 2})
      cl.rows.push_back(op.row_of(0, op.box().position(MultiIndex({5}, kk))));
    auto recs = exclude_by_spectrum(op, {cl}, {cell}, theta);
    CHECK(recs[0].excluded.empty());
  }
}

TEST_CASE("planted crossing in a five-site cluster") {
  ProblemParams p = base(1e-3);
  p.alpha = 0.03;
  std::mt19937_64 rng(5);
  FourierField u = oracle::random_real_field(rng, 1, 3, 4, 0.3);
  const double theta = 1e-3;
  std::vector<MultiIndex> sites = {MultiIndex({2}, 3), MultiIndex({1}, 3), MultiIndex({3}, 3), MultiIndex({2}, 2),
                                   MultiIndex({2}, 4)};

  // dense eigensweep of w^{-1} T-tilde restricted to the cluster
  auto min_eig = [&](double w) {
    oracle::OperatorOracle o(u, p.with_omega(w), true);
    Eigen::MatrixXcd H(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) H(i, j) = o(0, sites[i], 0, sites[j]) / w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    return es.eigenvalues();
  };
  auto nearest = [&](double w) {
    Eigen::VectorXd e = min_eig(w);
    Eigen::Index i;
    e.cwiseAbs().minCoeff(&i);
    return e(i);
  };
  // the crossing near w = 5/3, by bisection on the eigenvalue nearest zero
  double a = 1.5, b = 1.9;
  REQUIRE(nearest(a) * nearest(b) < 0.0);
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (a + b);
    (nearest(a) * nearest(m) <= 0.0 ? b : a) = m;
  }
  const double crossing = 0.5 * (a + b);
  const Interval cell{crossing - 0.004, crossing + 0.006};
  LatticeOperator op = build_operator(u, p.with_omega(cell.center()), 8, OperatorMode::kTilde);
  ClusterNeighborhood cl;
  for (const auto& xi : sites) cl.rows.push_back(op.row_of(0, op.box().position(xi)));
  auto recs = exclude_by_spectrum(op, {cl}, {cell}, theta);
  REQUIRE(recs.size() == 1);
  const ExclusionRecord& r = recs[0];
  IntervalSet ex(r.excluded);
  CHECK(ex.measure() > 0.0);
  CHECK(ex.measure() <= 4.0 * 2.0 * theta / r.slope_min);
  CHECK(ex.contains(crossing));
  int inside = 0;
  for (int i = 0; i < 100; ++i) {
    const double w = cell.a + (i + 0.5) * cell.length() / 100.0;
    const double m = min_eig(w).cwiseAbs().minCoeff();
    if (m < theta) {
      ++inside;
      CHECK(ex.contains(w));
    }
  }
  CHECK(inside >= 1);
}
