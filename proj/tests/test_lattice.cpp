#include <doctest.h>

#include <random>

#include "fnls/field_io.hpp"
#include "fnls/lattice_box.hpp"
#include "fnls/problem.hpp"
#include "oracles.hpp"

using namespace fnls;

TEST_CASE("angle weight") {
  const int zero3[3] = {0, 0, 0};
  CHECK(angle_weight(std::span<const int>(zero3, 3)) == 1.0);
  const int a[2] = {1, 1};
  CHECK(angle_weight(std::span<const int>(a, 2)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  const int b[1] = {3};
  CHECK(angle_weight(std::span<const int>(b, 1)) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
}

TEST_CASE("fractional derivative") {
  std::mt19937_64 rng(1);
  FourierField f = oracle::random_field(rng, 2, 5, 12, 1.0);
  CHECK(oracle::map_distance(oracle::to_map(fractional_derivative(f, 0.0)), oracle::to_map(f)) == 0.0);

  FourierField z = FourierField::single_mode(MultiIndex({0}, 3), cplx(0.5, -2.0), 4);
  CHECK(fractional_derivative(z, 0.7).coeff(MultiIndex({0}, 3)) == cplx(0.5, -2.0));

  FourierField s = FourierField::single_mode(MultiIndex({2}, 0), 1.0, 4);
  CHECK(fractional_derivative(s, 0.5).coeff(MultiIndex({2}, 0)).real() ==
        doctest::Approx(std::pow(5.0, 0.25)).epsilon(1e-15));
  CHECK(fractional_derivative(s, 0.5).support_radius() == s.support_radius());
}

TEST_CASE("gevrey norm") {
  FourierField one = FourierField::single_mode(MultiIndex(1), 1.0, 1);
  CHECK(gevrey_norm(one, {0.3, 5.0}) == 1.0);
  FourierField e = FourierField::single_mode(MultiIndex({1}, 0), 1.0, 2);
  GevreyParams g{0.999999999999, 2.0};
  CHECK(gevrey_norm(e, g) == doctest::Approx(7.389056).epsilon(1e-6));

  std::mt19937_64 rng(7);
  FourierField r = oracle::random_field(rng, 2, 9, 20, 1.0);
  const double got = gevrey_norm(r, {0.25, 2.0});
  CHECK(std::abs(got - oracle::gevrey_direct(r, 0.25, 2.0)) <= 1e-14 * got);
  CHECK(gevrey_norm(bundled_forcing(1), {0.25, 2.0}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(GevreyParams({1.0, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(GevreyParams({0.5, 0.0}).validate(), std::invalid_argument);
}

TEST_CASE("projection") {
  std::mt19937_64 rng(3);
  FourierField f = oracle::random_field(rng, 1, 4, 10, 1.0);
  CHECK(oracle::map_distance(oracle::to_map(project(f, 4)), oracle::to_map(f)) == 0.0);
  FourierField p1 = project(f, 1);
  for (const auto& [xi, a] : p1.entries()) CHECK(xi.l1() == 0);

  FourierField g = oracle::random_field(rng, 2, 12, 60, 1.0);
  for (int N : {1, 3, 6, 11}) {
    oracle::CoeffMap want;
    for (const auto& [xi, a] : g.entries()) {
      int s = 0;
      for (int j = 0; j < 2; ++j) s += std::abs(xi.n(j));
      if (s < N && std::abs(xi.k()) < N) want[xi] = a;
    }
    CHECK(oracle::map_distance(oracle::to_map(project(g, N)), want) == 0.0);
  }
}

TEST_CASE("convolution") {
  const MultiIndex a({1}, -2), b({-3}, 1);
  FourierField f = FourierField::single_mode(a, cplx(2.0, 1.0), 3);
  FourierField g = FourierField::single_mode(b, cplx(0.0, -1.5), 4);
  FourierField h = convolve(f, g);
  REQUIRE(h.size() == 1);
  CHECK(h.coeff(a + b) == cplx(2.0, 1.0) * cplx(0.0, -1.5));
  CHECK(h.radius() == 7);

  std::mt19937_64 rng(11);
  FourierField r = oracle::random_field(rng, 2, 5, 15, 1.0);
  FourierField unit = FourierField::single_mode(MultiIndex(2), 1.0, 1);
  CHECK(oracle::map_distance(oracle::to_map(convolve(r, unit)), oracle::to_map(r)) == 0.0);

  for (int d = 1; d <= 3; ++d) {
    FourierField x = oracle::random_field(rng, d, 6, 25, 1.0);
    FourierField y = oracle::random_field(rng, d, 4, 18, 1.0);
    const auto want = oracle::convolve_loop(oracle::to_map(x), oracle::to_map(y));
    CHECK(oracle::map_distance(oracle::to_map(convolve(x, y)), want) <= 1e-13 * oracle::map_norm(want));
  }
  CHECK_THROWS_AS(convolve(r, r, 6), SizingError);
}

TEST_CASE("conjugate flip") {
  std::mt19937_64 rng(5);
  FourierField p = oracle::random_real_field(rng, 2, 5, 8, 1.0);
  CHECK(oracle::map_distance(oracle::to_map(conjugate_flip(p)), oracle::to_map(p)) == 0.0);
  const MultiIndex xi({2, -1}, 3);
  FourierField s = FourierField::single_mode(xi, cplx(1.0, 2.0), 6);
  CHECK(conjugate_flip(s).coeff(-xi) == cplx(1.0, -2.0));
  FourierField r = oracle::random_field(rng, 3, 4, 20, 1.0);
  CHECK(oracle::map_distance(oracle::to_map(conjugate_flip(conjugate_flip(r))), oracle::to_map(r)) == 0.0);
}

TEST_CASE("field invariants") {
  CHECK_THROWS(FourierField::from_entries(1, 2, {{MultiIndex({2}, 0), 1.0}}));
  CHECK_THROWS(FourierField::from_entries(1, 3, {{MultiIndex({1}, 1), 1.0}}, true));
  FourierField f = FourierField::from_entries(1, 3, {{MultiIndex({1}, 1), 1.0}, {MultiIndex({1}, 1), 2.0}});
  CHECK(f.coeff(MultiIndex({1}, 1)) == cplx(3.0));
  CHECK(f.l2_norm() == 3.0);
  CHECK(f.support_radius() == 2);
  CHECK(FourierField(2, 5).support_radius() == 0);
}

TEST_CASE("field serialization round trip") {
  std::mt19937_64 rng(9);
  for (int d = 1; d <= 3; ++d) {
    FourierField f = oracle::random_real_field(rng, d, 5, 10, 0.3);
    FourierField g = field_from_json(nlohmann::json::parse(field_to_json(f).dump()));
    CHECK(g.dim() == f.dim());
    CHECK(g.radius() == f.radius());
    CHECK(g.real_valued());
    CHECK(oracle::map_distance(oracle::to_map(f), oracle::to_map(g)) == 0.0);
  }
  CHECK_THROWS(field_from_json(nlohmann::json::parse(R"({"dim":1,"radius":2,"entries":[],"extra":1})")));
}

TEST_CASE("lattice box") {
  LatticeBox b(2, 3);
  CHECK(b.size() == oracle::box_sites(2, 3).size());
  for (size_t i = 0; i < b.size(); ++i) CHECK(b.position(b.site(i)) == i);
  CHECK_FALSE(b.contains(MultiIndex({2, 1}, 0)));
  CHECK(b.contains(MultiIndex({1, 1}, -2)));
  const auto want = oracle::box_sites(2, 3);
  CHECK(std::equal(want.begin(), want.end(), b.sites().begin()));
}
