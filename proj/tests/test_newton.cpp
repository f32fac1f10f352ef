#include <doctest.h>

#include "fnls/newton.hpp"
#include "oracles.hpp"

using namespace fnls;

namespace {

ProblemParams base() {
  ProblemParams p;
  p.dim = 1;
  p.epsilon = 1e-4;
  p.alpha = 4e-4;
  p.forcing = bundled_forcing(1);
  return p;
}

Eigen::MatrixXcd green_at(const FourierField& u, const ProblemParams& p, int N) {
  return dense_inverse(build_operator(u, p, N, OperatorMode::kTilde).materialize(40000));
}

}  // namespace

TEST_CASE("zero residual gives a zero step") {
  ProblemParams p = base().with_omega(1.3);
  p.forcing = FourierField(1, 1).with_real_flag(true);
  ScaleConstants sc;
  FourierField u(1, 1);
  NewtonStepResult r = newton_step(u, p, sc, 1, green_at(u, p, 4));
  CHECK(r.v.empty());
  CHECK(r.v_norm == 0.0);
  CHECK(r.u_next.empty());
}

TEST_CASE("linear step in closed form") {
  for (double w : {1.3, std::sqrt(2.0), 1.77}) {
    ProblemParams p = base().with_omega(w);
    p.nonlinearity = 0.0;
    ScaleConstants sc;
    FourierField u(1, 1);
    NewtonStepResult r = newton_step(u, p, sc, 1, green_at(u, p, 4));
    REQUIRE(p.forcing.support_radius() <= 4);
    for (const auto& [xi, a] : p.forcing.entries()) {
      const cplx want = p.eps23() * a / (-xi.k() * w + oracle::nsq(xi) + 1.0);
      CHECK(std::abs(r.u_next.coeff(xi) - want) <= 1e-14 * std::abs(want));
    }
    CHECK(r.u_next.size() == p.forcing.size());
    CHECK(r.conjugacy_defect <= 1e-12 * r.w_norm);
    CHECK(oracle::map_norm(oracle::F_loop(r.u_next, p)) <= 1e-18);

    // weighted sum of the linear solution from the closed form
    double sum = 0.0;
    for (const auto& [xi, a] : p.forcing.entries())
      sum += std::cbrt(p.epsilon) * p.eps23() * std::abs(a) / std::abs(-xi.k() * w + oracle::nsq(xi) + 1.0) *
             std::exp(0.5 * std::pow(oracle::l1(xi), 0.25));
    TheoremReport t = theorem_check(r.u_next, p, 0.25);
    CHECK(t.weighted_sum == doctest::Approx(sum).epsilon(1e-13));
    CHECK(t.constant == doctest::Approx(sum / std::pow(p.epsilon, 0.25)).epsilon(1e-13));
  }
  CHECK(theorem_check(FourierField(1, 1), base(), 0.25).weighted_sum == 0.0);
}

TEST_CASE("residual decomposition") {
  ScaleConstants sc;
  const double w = std::sqrt(2.0);
  ProblemParams p = base().with_omega(w);
  InitialGuessResult g = build_u0(p, sc, w);
  SUBCASE("zero increment") {
    NewtonStepResult step;
    step.u_next = g.u0;
    step.v = step.w1 = step.w2 = FourierField(1, 4);
    DecompositionReport d = residual_decomposition_check(g.u0, step, p, 4);
    CHECK(d.ok);
    CHECK(d.direct_norm == doctest::Approx(oracle::map_norm(oracle::F_loop(g.u0, p))).epsilon(1e-12));
    CHECK(d.remainder == 0.0);
  }
  SUBCASE("generic step") {
    for (int j : {1, 2}) {
      const int N = sc.N(j + 1);
      NewtonStepResult step = newton_step(g.u0, p, sc, j, green_at(g.u0, p, N));
      DecompositionReport d = residual_decomposition_check(g.u0, step, p, N);
      CHECK(d.ok);
      CHECK(std::max(d.mismatch[0], d.mismatch[1]) <= d.tolerance);
      CHECK(d.direct_norm == doctest::Approx(oracle::map_norm(oracle::F_loop(step.u_next, p))).epsilon(1e-9));
      CHECK(d.direct_norm < g.residual_norm);
    }
  }
  SUBCASE("nonlinearity off") {
    ProblemParams q = p;
    q.nonlinearity = 0.0;
    NewtonStepResult step = newton_step(g.u0, q, sc, 1, green_at(g.u0, q, 4));
    DecompositionReport d = residual_decomposition_check(g.u0, step, q, 4);
    CHECK(d.ok);
    CHECK(d.remainder == 0.0);
  }
}

TEST_CASE("empty good sets") {
  ScaleConstants sc;
  ProblemParams p = base();
  CHECK_THROWS_AS(initialize(p, sc, {1.0}), NoGoodCellsError);
  ProblemParams big = base();
  big.epsilon = 0.5;
  CHECK_THROWS_AS(initialize(big, sc, {1.5}), NoGoodCellsError);
  IterationState s = initialize(p, sc, {std::sqrt(2.0)});
  s.lambda = IntervalSet();
  CHECK_THROWS_AS(advance_scale(s), NoGoodCellsError);
}

TEST_CASE("zero forcing stays at zero") {
  ProblemParams p = base();
  p.forcing = FourierField(1, 1).with_real_flag(true);
  IterationState s = run_newton(p, ScaleConstants{}, {std::sqrt(2.0)});
  REQUIRE(s.tracked.size() == 1);
  CHECK(s.tracked[0].u.empty());
  CHECK(s.converged);
  for (double r : s.tracked[0].residuals) CHECK(r == 0.0);
}

TEST_CASE("short run: chain inclusion and residual collapse") {
  ProblemParams p = base();
  ScaleConstants sc;
  DriverOptions opt;
  IterationState s = initialize(p, sc, {std::sqrt(2.0), 1.2345}, opt);
  for (int step = 0; step < 2; ++step) {
    const IntervalSet before = s.lambda;
    advance_scale(s, opt);
    CHECK(difference(s.lambda, before).measure() == 0.0);
    const StageMeasure& m = s.stages.back();
    CHECK(m.measure_next <= m.measure_prime + 1e-15);
    CHECK(m.measure_prime <= m.measure_lambda + 1e-15);
    CHECK(m.measure_lambda == doctest::Approx(before.measure()).epsilon(1e-14));
  }
  CHECK(s.advances == 2);
  for (const auto& t : s.tracked) {
    if (!t.alive) continue;
    REQUIRE(t.residuals.size() == 3);
    CHECK(t.residuals[1] < t.residuals[0]);
    CHECK(t.residuals[2] < t.residuals[1]);
    CHECK(t.u.support_radius() <= sc.N(s.j));
    CHECK(oracle::map_norm(oracle::F_loop(t.u, p.with_omega(t.omega))) ==
          doctest::Approx(t.residuals.back()).epsilon(1e-6));
  }
  for (const auto& st : s.steps) {
    CHECK(st.decomposition.ok);
    CHECK(st.contraction_ok);
    CHECK(st.cert.pass);
  }
  for (const auto& a : s.audit) CHECK_MESSAGE(a.ok, a.check);
}
