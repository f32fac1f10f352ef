#include "fnls/separation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fnls {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// groups labelled by smallest member, in order of that member
std::vector<std::vector<int>> groups_of(UnionFind& uf, size_t n) {
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> out;
  for (size_t i = 0; i < n; ++i) {
    int r = uf.find(static_cast<int>(i));
    if (label[r] < 0) {
      label[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[label[r]].push_back(static_cast<int>(i));
  }
  return out;
}

long sq(const SpatialPoint& a, int d) {
  long s = 0;
  for (int j = 0; j < d; ++j) s += static_cast<long>(a[j]) * a[j];
  return s;
}

int l1(const SpatialPoint& a, const SpatialPoint& b, int d) {
  int s = 0;
  for (int j = 0; j < d; ++j) s += std::abs(a[j] - b[j]);
  return s;
}

}  // namespace

double separation_value(const SpatialPoint& a, const SpatialPoint& b, int d) {
  return l1(a, b, d) + static_cast<double>(std::labs(sq(a, d) - sq(b, d)));
}

double SeparationPartition::diameter_bound() const { return std::pow(B, ScaleConstants::tilde_C(dim)); }

int SeparationPartition::max_diameter() const {
  return diameter.empty() ? 0 : *std::max_element(diameter.begin(), diameter.end());
}

int SeparationPartition::class_of_point(std::span<const int> n) const {
  const int side = 2 * box_radius + 1;
  size_t off = 0;
  for (int j = 0; j < dim; ++j) {
    if (std::abs(n[j]) > box_radius) return -1;
    off = off * side + static_cast<size_t>(n[j] + box_radius);
  }
  return class_of[off];
}

bool SeparationPartition::verify_exhaustive(std::string* why) const {
  std::vector<int> seen(points.size(), 0);
  for (const auto& c : classes)
    for (int i : c) ++seen[i];
  for (size_t i = 0; i < points.size(); ++i)
    if (seen[i] != 1) {
      if (why) *why = "point not covered exactly once";
      return false;
    }
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (class_of[i] != class_of[j] && !(separation_value(points[i], points[j], dim) > B)) {
        if (why) *why = "separation violated between points " + std::to_string(i) + " and " + std::to_string(j);
        return false;
      }
  for (size_t c = 0; c < classes.size(); ++c)
    if (!(diameter[c] < diameter_bound())) {
      if (why) *why = "class diameter exceeds B^Ctilde_d";
      return false;
    }
  return true;
}

std::vector<double> SeparationPartition::nearest_separation() const {
  std::vector<double> best(classes.size(), std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j) {
      if (class_of[i] == class_of[j]) continue;
      const double v = separation_value(points[i], points[j], dim);
      best[class_of[i]] = std::min(best[class_of[i]], v);
      best[class_of[j]] = std::min(best[class_of[j]], v);
    }
  return best;
}

SeparationPartition separation_partition(int d, double B, int box_radius) {
  if (!(B > 0.0)) throw std::invalid_argument("separation scale must be positive");
  if (d < 1 || d > kMaxSpatialDim) throw std::invalid_argument("bad dimension");
  SeparationPartition part;
  part.dim = d;
  part.B = B;
  part.box_radius = box_radius;
  const int side = 2 * box_radius + 1;
  size_t count = 1;
  for (int j = 0; j < d; ++j) count *= side;
  part.points.resize(count);
  for (size_t off = 0; off < count; ++off) {
    size_t rem = off;
    SpatialPoint p{};
    for (int j = d - 1; j >= 0; --j) {
      p[j] = static_cast<int>(rem % side) - box_radius;
      rem /= side;
    }
    part.points[off] = p;
  }
  auto offset_of = [&](const SpatialPoint& p) {
    size_t off = 0;
    for (int j = 0; j < d; ++j) off = off * side + static_cast<size_t>(p[j] + box_radius);
    return off;
  };

  // edges only reach |n - n'|_1 <= B, so scan that l1 ball
  const int reach = static_cast<int>(std::floor(B));
  std::vector<SpatialPoint> ball;
  {
    SpatialPoint q{};
    std::vector<int> cur(d, -reach);
    while (true) {
      int s = 0;
      for (int j = 0; j < d; ++j) s += std::abs(cur[j]);
      if (s <= reach) {
        for (int j = 0; j < d; ++j) q[j] = cur[j];
        ball.push_back(q);
      }
      int j = d - 1;
      while (j >= 0 && cur[j] == reach) cur[j--] = -reach;
      if (j < 0) break;
      ++cur[j];
    }
  }
  UnionFind uf(count);
  for (size_t i = 0; i < count; ++i) {
    const SpatialPoint& p = part.points[i];
    for (const auto& off : ball) {
      SpatialPoint q{};
      bool inside = true;
      for (int j = 0; j < d; ++j) {
        q[j] = p[j] + off[j];
        inside = inside && std::abs(q[j]) <= box_radius;
      }
      if (!inside) continue;
      if (separation_value(p, q, d) <= B) uf.unite(static_cast<int>(i), static_cast<int>(offset_of(q)));
    }
  }
  part.classes = groups_of(uf, count);
  part.class_of.assign(count, -1);
  for (size_t c = 0; c < part.classes.size(); ++c)
    for (int i : part.classes[c]) part.class_of[i] = static_cast<int>(c);
  part.diameter.assign(part.classes.size(), 0);
  for (size_t c = 0; c < part.classes.size(); ++c) {
    const auto& m = part.classes[c];
    for (size_t a = 0; a < m.size(); ++a)
      for (size_t b = a + 1; b < m.size(); ++b)
        part.diameter[c] = std::max(part.diameter[c], l1(part.points[m[a]], part.points[m[b]], d));
  }
  if (!(part.max_diameter() < part.diameter_bound()))
    throw CertificateError("separation class diameter exceeds B^Ctilde_d");
  return part;
}

bool is_singular(const MultiIndex& xi, double omega, double alpha) {
  const double lam = std::pow(angle_weight(xi), -alpha);
  const double base = static_cast<double>(xi.spatial_sq()) + 1.0;
  const double kw = xi.k() * omega;
  return std::min(std::abs(lam * (base - kw)), std::abs(lam * (base + kw))) < 1.0;
}

std::vector<MultiIndex> singular_sites(const ProblemParams& p, double omega, int N) {
  std::vector<MultiIndex> out;
  MultiIndex xi(p.dim);
  // enumerate the box |n|_1 < N, |k| < N lexicographically
  std::vector<int> n(p.dim, -(N - 1));
  while (true) {
    int s = 0;
    for (int v : n) s += std::abs(v);
    if (s < N) {
      for (int j = 0; j < p.dim; ++j) xi.set_n(j, n[j]);
      for (int k = -(N - 1); k <= N - 1; ++k) {
        xi.set_k(k);
        if (is_singular(xi, omega, p.alpha)) out.push_back(xi);
      }
    }
    int j = p.dim - 1;
    while (j >= 0 && n[j] == N - 1) n[j--] = -(N - 1);
    if (j < 0) break;
    ++n[j];
  }
  return out;
}

int max_singular_per_n(const ProblemParams& p, double omega, int N) {
  auto sites = singular_sites(p, omega, N);
  int best = 0;
  for (size_t i = 0; i < sites.size();) {
    size_t j = i;
    while (j < sites.size() && std::equal(sites[j].spatial().begin(), sites[j].spatial().end(),
                                          sites[i].spatial().begin()))
      ++j;
    best = std::max(best, static_cast<int>(j - i));
    i = j;
  }
  return best;
}

int l1_distance(const MultiIndex& a, const MultiIndex& b) { return (a - b).l1(); }

SingularClusters cluster_sites(const std::vector<MultiIndex>& sites, const SeparationPartition& part,
                               int N, double delta, double rho) {
  SingularClusters sc;
  sc.sites = sites;
  const int d = part.dim;
  sc.cutoff = rho * std::pow(static_cast<double>(N), delta);
  sc.diam_bound = std::pow(static_cast<double>(N), (ScaleConstants::tilde_C(d) * d + 2.0) * delta);
  const size_t m = sites.size();
  UnionFind uf(m);
  std::vector<int> cls(m);
  for (size_t i = 0; i < m; ++i) {
    cls[i] = part.class_of_point(sites[i].spatial());
    if (cls[i] < 0) throw std::invalid_argument("site outside the separation partition box");
  }
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j)
      if (cls[i] == cls[j] || l1_distance(sites[i], sites[j]) <= sc.cutoff)
        uf.unite(static_cast<int>(i), static_cast<int>(j));
  sc.clusters = groups_of(uf, m);
  sc.diameter.assign(sc.clusters.size(), 0);
  std::vector<int> owner(m);
  for (size_t c = 0; c < sc.clusters.size(); ++c)
    for (int i : sc.clusters[c]) owner[i] = static_cast<int>(c);
  sc.min_distance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j) {
      const int dist = l1_distance(sites[i], sites[j]);
      if (owner[i] == owner[j])
        sc.diameter[owner[i]] = std::max(sc.diameter[owner[i]], dist);
      else
        sc.min_distance = std::min(sc.min_distance, static_cast<double>(dist));
    }
  for (int dmt : sc.diameter)
    if (!(dmt < sc.diam_bound)) throw CertificateError("cluster diameter exceeds its bound");
  return sc;
}

}  // namespace fnls
