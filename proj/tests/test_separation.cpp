#include <doctest.h>

#include <set>

#include "fnls/separation.hpp"
#include "oracles.hpp"

using namespace fnls;

namespace {

// same classes up to relabelling, given labels per point in the same order
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (size_t i = 0; i < a.size(); ++i) {
    auto [x, fx] = ab.emplace(a[i], b[i]);
    auto [y, fy] = ba.emplace(b[i], a[i]);
    if (x->second != b[i] || y->second != a[i]) return false;
  }
  return true;
}

std::vector<int> cluster_oracle(const std::vector<MultiIndex>& sites, const std::vector<int>& cls, double cutoff) {
  const size_t m = sites.size();
  std::vector<int> label(m, -1);
  for (size_t s = 0; s < m; ++s) {
    if (label[s] >= 0) continue;
    std::queue<size_t> q;
    q.push(s);
    label[s] = static_cast<int>(s);
    while (!q.empty()) {
      const size_t a = q.front();
      q.pop();
      for (size_t b = 0; b < m; ++b)
        if (label[b] < 0 && (cls[a] == cls[b] || oracle::l1(oracle::add(sites[a], oracle::neg(sites[b]))) <= cutoff)) {
          label[b] = static_cast<int>(s);
          q.push(b);
        }
    }
  }
  return label;
}

}  // namespace

TEST_CASE("separation below unit scale") {
  SeparationPartition p = separation_partition(1, 0.5, 20);
  CHECK(p.classes.size() == 41);
  CHECK(p.max_diameter() == 0);
  CHECK(p.verify_exhaustive());
}

TEST_CASE("separation at B = 3 on [-5,5]") {
  SeparationPartition p = separation_partition(1, 3.0, 5);
  const int one[1] = {1}, mone[1] = {-1}, two[1] = {2}, mtwo[1] = {-2};
  CHECK(p.class_of_point(std::span<const int>(one, 1)) == p.class_of_point(std::span<const int>(mone, 1)));
  CHECK(p.class_of_point(std::span<const int>(two, 1)) != p.class_of_point(std::span<const int>(mtwo, 1)));
  std::vector<std::vector<int>> pts;
  auto want = oracle::separation_components(1, 3.0, 5, &pts);
  REQUIRE(pts.size() == p.points.size());
  for (size_t i = 0; i < pts.size(); ++i) CHECK(pts[i][0] == p.points[i][0]);
  CHECK(same_partition(want, p.class_of));
  std::string why;
  CHECK_MESSAGE(p.verify_exhaustive(&why), why);
}

TEST_CASE("separation oracle agreement") {
  for (auto [d, B, R] : std::vector<std::tuple<int, double, int>>{{1, 10.0, 50}, {2, 4.0, 10}, {2, 10.0, 30}, {3, 3.0, 4}}) {
    SeparationPartition p = separation_partition(d, B, R);
    std::vector<std::vector<int>> pts;
    auto want = oracle::separation_components(d, B, R, &pts);
    CHECK(same_partition(want, p.class_of));
    CHECK(p.verify_exhaustive());
    CHECK(p.max_diameter() < p.diameter_bound());
    // labels by smallest member
    for (size_t c = 0; c < p.classes.size(); ++c)
      CHECK(*std::min_element(p.classes[c].begin(), p.classes[c].end()) == p.classes[c].front());
    for (size_t c = 1; c < p.classes.size(); ++c) CHECK(p.classes[c - 1].front() < p.classes[c].front());
    auto near = p.nearest_separation();
    if (p.classes.size() > 1)
      for (double v : near) CHECK(v > B);
  }
}

TEST_CASE("singular sites") {
  CHECK(is_singular(MultiIndex({2}, 3), 1.5, 0.0));
  CHECK(is_singular(MultiIndex({2}, -3), 1.5, 0.0));
  CHECK_FALSE(is_singular(MultiIndex({2}, 0), 1.5, 0.0));
  CHECK_FALSE(is_singular(MultiIndex({5}, 1), 1.5, 0.0));

  ProblemParams p;
  p.dim = 1;
  p.alpha = 0.03;
  for (double w : {1.0, 1.2345, std::sqrt(2.0), 1.999}) {
    auto sites = singular_sites(p, w, 64);
    std::set<MultiIndex> got(sites.begin(), sites.end());
    size_t count = 0;
    std::map<int, int> per_n;
    for (const auto& xi : oracle::box_sites(1, 64)) {
      const double lam = std::pow(oracle::bracket(xi), -p.alpha);
      const double b = oracle::nsq(xi) + 1.0;
      const bool sing = std::min(std::abs(lam * (b - xi.k() * w)), std::abs(lam * (b + xi.k() * w))) < 1.0;
      CHECK(sing == (got.count(xi) == 1));
      if (sing) {
        ++count;
        ++per_n[xi.n(0)];
      }
    }
    CHECK(count == sites.size());
    int worst = 0;
    for (auto& [n, c] : per_n) worst = std::max(worst, c);
    CHECK(max_singular_per_n(p, w, 64) == worst);
    CHECK(worst <= 4.0 * std::pow(64.0, p.alpha) + 2.0);
  }
  // far from the paraboloid: |n|^2 large against |k|
  ProblemParams q;
  q.dim = 2;
  q.alpha = 0.0;
  for (const auto& xi : singular_sites(q, 1.3, 12)) CHECK(oracle::nsq(xi) + 1.0 <= 2.0 * std::abs(xi.k()) + 1.0);
}

TEST_CASE("cluster examples") {
  SeparationPartition part = separation_partition(1, 2.0, 10);
  std::vector<MultiIndex> one = {MultiIndex({1}, 2), MultiIndex({-1}, 9)};
  REQUIRE(part.class_of_point(one[0].spatial()) == part.class_of_point(one[1].spatial()));
  CHECK(cluster_sites(one, part, 16, 0.2, 0.25).clusters.size() == 1);
  std::vector<MultiIndex> two = {MultiIndex({0}, 0), MultiIndex({8}, 5)};
  REQUIRE(part.class_of_point(two[0].spatial()) != part.class_of_point(two[1].spatial()));
  SingularClusters c = cluster_sites(two, part, 16, 0.2, 0.25);
  CHECK(c.clusters.size() == 2);
  CHECK(c.min_distance == 13.0);
}

TEST_CASE("clusters on the paraboloid shell against single linkage") {
  const int N = 64;
  const double delta = 0.2, rho = 0.25;
  ProblemParams p;
  p.dim = 1;
  p.alpha = 0.03;
  const double B = std::pow(static_cast<double>(N), delta);
  SeparationPartition part = separation_partition(1, B, N);
  for (double w : {1.1, std::sqrt(2.0), 1.77}) {
    auto sites = singular_sites(p, w, N);
    SingularClusters sc = cluster_sites(sites, part, N, delta, rho);
    std::vector<int> cls;
    for (const auto& xi : sites) cls.push_back(part.class_of_point(xi.spatial()));
    auto want = cluster_oracle(sites, cls, rho * B);
    std::vector<int> got(sites.size());
    for (size_t c = 0; c < sc.clusters.size(); ++c)
      for (int i : sc.clusters[c]) got[i] = static_cast<int>(c);
    CHECK(same_partition(want, got));
    CHECK(sc.min_distance > rho * B);
    for (int dm : sc.diameter) CHECK(dm < sc.diam_bound);
    // sites of different spatial classes sit far apart in (n,k)
    const double gap = (B - 2.0 * std::pow(N, p.alpha) - 2.0) / 2.0;
    for (size_t i = 0; i < sites.size(); ++i)
      for (size_t j = i + 1; j < sites.size(); ++j)
        if (cls[i] != cls[j]) CHECK(l1_distance(sites[i], sites[j]) > gap);
  }
}
