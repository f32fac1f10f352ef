#include <doctest.h>

#include <random>

#include "fnls/initial_guess.hpp"
#include "fnls/newton.hpp"
#include "fnls/toeplitz_fft.hpp"
#include "oracles.hpp"

using namespace fnls;

namespace {

ProblemParams base_params(int d = 1) {
  ProblemParams p;
  p.dim = d;
  p.epsilon = 1e-4;
  p.alpha = 0.3;
  p.omega = 1.37;
  p.forcing = bundled_forcing(d);
  return p;
}

double max_abs(const Eigen::MatrixXcd& A) { return A.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("cubic term") {
  const MultiIndex xi({2}, -1);
  FourierField unit = FourierField::single_mode(xi, 1.0, 3);
  CHECK(oracle::map_distance(oracle::to_map(cubic_term(unit)), oracle::to_map(unit)) == 0.0);
  const cplx a(0.3, -1.2);
  FourierField s = FourierField::single_mode(xi, a, 3);
  CHECK(std::abs(cubic_term(s).coeff(xi) - std::norm(a) * a) <= 1e-15);
  CHECK(cubic_term(s).size() == 1);

  FourierField two = FourierField::from_entries(1, 4, {{MultiIndex({1}, 2), cplx(1.0, 0.5)}, {MultiIndex({-3}, 0), cplx(-0.2, 0.7)}});
  const auto want = oracle::cubic_loop(oracle::to_map(two));
  CHECK(oracle::map_distance(oracle::to_map(cubic_term(two)), want) <= 1e-13 * oracle::map_norm(want));
  CHECK(cubic_term(two).radius() == 12);
}

TEST_CASE("F at zero and on the linear closed form") {
  ProblemParams p = base_params();
  FourierField zero(1, 1);
  const auto F0 = oracle::to_map(apply_F(zero, p));
  oracle::CoeffMap want;
  for (const auto& [xi, a] : p.forcing.entries()) want[xi] = -p.eps23() * a;
  CHECK(oracle::map_distance(F0, want) == 0.0);

  // linear truncated solution with the cubic term off leaves -(1-Gamma_N) P
  ProblemParams q = base_params();
  q.nonlinearity = 0.0;
  q.omega = std::sqrt(2.0);
  ScaleConstants sc;
  for (int j0 : {1, 2}) {
    sc.j0 = j0;
    const int N = sc.N(j0);
    InitialGuessResult g = build_u0(q, sc, q.omega);
    oracle::CoeffMap tail;
    for (const auto& [xi, a] : q.forcing.entries())
      if (!in_box(xi, N)) tail[xi] = -q.eps23() * a;
    const auto F = oracle::to_map(apply_F(g.u0, q));
    CHECK(oracle::map_distance(F, tail) <= 1e-18);
  }
}

TEST_CASE("F against the collocation oracle on random fields") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = trial < 40 ? 1 : 2;
    ProblemParams p = base_params(d);
    p.epsilon = 1e-2;
    p.alpha = 0.25;
    const int R = d == 1 ? 3 : 2;
    FourierField u = oracle::random_field(rng, d, R, d == 1 ? 6 : 5, 0.3);
    const int K = 3 * (u.support_radius() - 1);
    const int G = std::max(4 * R, 2 * K + 2);
    const auto want = oracle::F_collocation(u, p, G);
    const auto got = oracle::to_map(apply_F(u, p));
    CHECK(oracle::map_distance(got, want) <= 1e-10 * oracle::map_norm(want));
    CHECK(oracle::map_distance(got, oracle::F_loop(u, p)) <= 1e-12 * oracle::map_norm(want));
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("operator diagonal conventions") {
  ProblemParams p = base_params();
  p.omega = 1.5;
  for (OperatorMode mode : {OperatorMode::kT, OperatorMode::kTilde}) {
    LatticeOperator op = build_operator(FourierField(1, 1), p, 4, mode);
    const size_t origin = op.box().position(MultiIndex({0}, 0));
    CHECK(op.entry(op.row_of(0, origin), op.row_of(0, origin)) == cplx(1.0));
    Eigen::MatrixXcd A = op.materialize();
    CHECK(max_abs(A - Eigen::MatrixXcd(A.diagonal().asDiagonal())) == 0.0);
  }
  LatticeOperator T = build_operator(FourierField(1, 1), p, 4, OperatorMode::kT);
  const size_t s = T.box().position(MultiIndex({1}, 2));
  CHECK(T.diagonal(T.row_of(1, s)) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(T.diagonal(T.row_of(0, s)) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("operator entries against the symbol definition") {
  std::mt19937_64 rng(77);
  for (int d : {1, 2}) {
    ProblemParams p = base_params(d);
    FourierField u = oracle::random_field(rng, d, 3, 7, 0.2);
    for (OperatorMode mode : {OperatorMode::kT, OperatorMode::kTilde}) {
      LatticeOperator op = build_operator(u, p, 4, mode);
      oracle::OperatorOracle want(u, p, mode == OperatorMode::kTilde);
      Eigen::MatrixXcd A = op.materialize();
      double worst = 0.0;
      for (size_t r = 0; r < op.rows(); ++r)
        for (size_t c = 0; c < op.rows(); ++c)
          worst = std::max(worst, std::abs(A(r, c) - want(op.sign_of(r), op.site_of(r), op.sign_of(c), op.site_of(c))));
      CHECK(worst <= 1e-14 * max_abs(A));
    }
  }
}

TEST_CASE("T-tilde is Hermitian and T = Lambda T-tilde on a run-generated iterate") {
  ProblemParams p = base_params();
  p.alpha = 4e-4;
  ScaleConstants sc;
  IterationState s = run_newton(p, sc, {std::sqrt(2.0)}, {.j_max = 2, .min_advances = 1});
  const FourierField& u = s.tracked[0].u;
  const ProblemParams q = p.with_omega(std::sqrt(2.0));
  for (int N : {4, 8}) {
    LatticeOperator tt = build_operator(u, q, N, OperatorMode::kTilde);
    LatticeOperator t = build_operator(u, q, N, OperatorMode::kT);
    Eigen::MatrixXcd A = tt.materialize(), B = t.materialize();
    CHECK(max_abs(A - A.adjoint()) <= 1e-12 * max_abs(A));
    Eigen::VectorXd lam(t.rows());
    for (size_t r = 0; r < t.rows(); ++r) lam(r) = std::pow(angle_weight(t.site_of(r)), q.alpha);
    CHECK(max_abs(B - lam.asDiagonal() * A) <= 1e-12 * max_abs(B));
  }
}

TEST_CASE("FFT Toeplitz product equals the dense Toeplitz block") {
  std::mt19937_64 rng(4);
  for (int d : {1, 2, 3}) {
    ProblemParams p = base_params(d);
    FourierField u = oracle::random_field(rng, d, 2, 5, 0.5);
    LatticeOperator op = build_operator(u, p, 3, OperatorMode::kTilde);
    std::vector<size_t> all(op.rows());
    for (size_t r = 0; r < all.size(); ++r) all[r] = r;
    Eigen::MatrixXcd S = op.toeplitz_block(all, all);
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Random(op.rows(), 3);
    ToeplitzApplier ap(op);
    CHECK(max_abs(ap.apply(X) - S * X) <= 1e-12 * max_abs(S * X));
  }
}

TEST_CASE("linearized operator on fields agrees with the box matrix") {
  std::mt19937_64 rng(8);
  ProblemParams p = base_params();
  FourierField u = oracle::random_field(rng, 1, 3, 6, 0.3);
  const int N = 6;
  LatticeOperator op = build_operator(u, p, N, OperatorMode::kT);
  FourierField w1 = oracle::random_field(rng, 1, 2, 4, 1.0), w2 = oracle::random_field(rng, 1, 2, 4, 1.0);
  auto [y1, y2] = apply_T_fields(u, p, w1, w2);
  Eigen::VectorXcd y = op.materialize() * pair_to_vector(w1, w2, op.box());
  Eigen::VectorXcd want = pair_to_vector(y1, y2, op.box());
  CHECK((y - want).norm() <= 1e-13 * want.norm());
}

TEST_CASE("materialize respects its cap and exports JSON") {
  ProblemParams p = base_params();
  LatticeOperator op = build_operator(FourierField(1, 1), p, 5, OperatorMode::kT);
  CHECK_THROWS(op.materialize(10));
  nlohmann::json j = op.to_json();
  CHECK(j.contains("entries"));
}
