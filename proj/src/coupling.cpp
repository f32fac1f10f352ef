#include "fnls/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>

#include "fnls/dense.hpp"

namespace fnls {

int l1_distance(const CouplingPoint& a, const CouplingPoint& b) {
  int s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double Margin::ratio() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (lower) return bound > 0 ? measured / bound : inf;
  return measured > 0 ? bound / measured : inf;
}

double CouplingReport::min_hypothesis_ratio() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& h : hypotheses) r = std::min(r, h.ratio());
  return r;
}

const Margin* CouplingReport::hypothesis(const std::string& name) const {
  for (const auto& h : hypotheses)
    if (h.name == name) return &h;
  return nullptr;
}

namespace {

Margin upper(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, measured < bound, false};
}

Margin lower(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, measured > bound, true};
}

Eigen::MatrixXcd restrict(const Eigen::MatrixXcd& T, const std::vector<size_t>& idx) {
  Eigen::MatrixXcd A(idx.size(), idx.size());
  for (size_t j = 0; j < idx.size(); ++j)
    for (size_t i = 0; i < idx.size(); ++i) A(i, j) = T(idx[i], idx[j]);
  return A;
}

int diameter(const std::vector<CouplingPoint>& pts, const std::vector<size_t>& idx) {
  int d = 0;
  for (size_t a = 0; a < idx.size(); ++a)
    for (size_t b = a + 1; b < idx.size(); ++b) d = std::max(d, l1_distance(pts[idx[a]], pts[idx[b]]));
  return d;
}

void finish(CouplingReport& rep) {
  rep.hypotheses_ok = std::all_of(rep.hypotheses.begin(), rep.hypotheses.end(),
                                  [](const Margin& m) { return m.ok; });
}

// max |G(x,y)| e^{rate |x-y|^c} over pairs with |x-y| > cutoff
double tail_profile(const Eigen::MatrixXcd& G, const std::vector<CouplingPoint>& pts, double cutoff,
                    double rate, double c, long long* pairs) {
  double prof = 0.0;
  *pairs = 0;
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      const int dist = l1_distance(pts[i], pts[j]);
      if (dist > cutoff) {
        ++*pairs;
        prof = std::max(prof, std::abs(G(i, j)) * std::exp(rate * std::pow(static_cast<double>(dist), c)));
      }
    }
  return prof;
}

}  // namespace

CouplingReport coupling_lemma1_check(const Eigen::MatrixXcd& T, const std::vector<CouplingPoint>& points,
                                     const std::vector<std::vector<size_t>>& cover,
                                     const Lemma1Params& prm) {
  CouplingReport rep;
  if (!(prm.c > 0 && prm.c < 1)) rep.gate_failures.push_back("c outside (0,1)");
  if (!(prm.B > 0 && prm.K > 0 && prm.C > 0 && prm.C_prime > 0))
    rep.gate_failures.push_back("B, K, C, C' must be positive");
  const size_t n = points.size();

  double decay = 0.0;
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i)
      if (i != j)
        decay = std::max(decay, std::abs(T(i, j)) *
                                    std::exp(std::pow(static_cast<double>(l1_distance(points[i], points[j])), prm.c)));
  rep.hypotheses.push_back(upper("offdiag-decay", decay, 1.0));

  double entry = 0.0, tail = 0.0;
  int diam = 0;
  for (const auto& blk : cover) {
    Eigen::MatrixXcd G = dense_inverse(restrict(T, blk));
    for (size_t j = 0; j < blk.size(); ++j)
      for (size_t i = 0; i < blk.size(); ++i) {
        const double a = std::abs(G(i, j));
        entry = std::max(entry, a);
        if (l1_distance(points[blk[i]], points[blk[j]]) > prm.K / 100.0) tail = std::max(tail, a);
      }
    diam = std::max(diam, diameter(points, blk));
  }
  rep.hypotheses.push_back(upper("block-entry", entry, prm.B));
  rep.hypotheses.push_back(upper("block-tail", tail, std::pow(prm.K, -prm.C)));

  std::vector<std::vector<char>> member(cover.size(), std::vector<char>(n, 0));
  for (size_t z = 0; z < cover.size(); ++z)
    for (size_t i : cover[z]) member[z][i] = 1;
  int uncovered = 0;
  for (size_t x = 0; x < n; ++x) {
    bool found = false;
    for (size_t z = 0; z < cover.size() && !found; ++z) {
      bool inside = true;
      for (size_t y = 0; y < n && inside; ++y)
        if (l1_distance(points[x], points[y]) <= prm.K && !member[z][y]) inside = false;
      found = inside;
    }
    if (!found) ++uncovered;
  }
  rep.hypotheses.push_back(upper("containment", uncovered, 0.5));
  rep.hypotheses.push_back(upper("diameter", diam, prm.C_prime * prm.K));
  rep.hypotheses.push_back(upper("logB-vs-K", std::log(prm.B), std::pow(prm.K, prm.c) / 100.0));
  finish(rep);
  if (!rep.gate_failures.empty() || !rep.hypotheses_ok) return rep;

  Eigen::MatrixXcd G = dense_inverse(T);
  rep.conclusions.push_back(upper("entry", G.cwiseAbs().maxCoeff(), 2.0 * prm.B));
  const double cutoff = std::pow(100.0 * prm.C_prime * prm.K, 1.0 / (1.0 - prm.c));
  rep.conclusions.push_back(upper("tail-decay", tail_profile(G, points, cutoff, 0.5, prm.c, &rep.tail_pairs), 1.0));
  rep.conclusions_checked = true;
  rep.conclusions_ok = std::all_of(rep.conclusions.begin(), rep.conclusions.end(),
                                   [](const Margin& m) { return m.ok; });
  return rep;
}

CouplingReport coupling_lemma2_check(const Eigen::VectorXcd& D, const Eigen::MatrixXcd& S,
                                     const std::vector<CouplingPoint>& points,
                                     const std::vector<std::vector<size_t>>& clusters,
                                     const Lemma2Params& prm) {
  CouplingReport rep;
  if (!(0.1 > prm.eps1 && prm.eps1 > prm.eps2 && prm.eps2 > prm.eps3 && prm.eps3 > 0))
    rep.gate_failures.push_back("need 1/10 > eps1 > eps2 > eps3 > 0");
  if (!(prm.rho >= prm.rho_over_eps * prm.eps)) rep.gate_failures.push_back("rho not >> eps");
  if (!(prm.c > 0 && prm.c < 1)) rep.gate_failures.push_back("c outside (0,1)");
  if (!(prm.M > 1)) rep.gate_failures.push_back("M must exceed 1");
  const size_t n = points.size();

  int diam = 0;
  for (const auto& cl : clusters) diam = std::max(diam, diameter(points, cl));
  rep.hypotheses.push_back(upper("cluster-diameter", diam, std::pow(prm.M, prm.eps1)));
  int sep = std::numeric_limits<int>::max();
  for (size_t a = 0; a < clusters.size(); ++a)
    for (size_t b = a + 1; b < clusters.size(); ++b)
      for (size_t x : clusters[a])
        for (size_t y : clusters[b]) sep = std::min(sep, l1_distance(points[x], points[y]));
  if (clusters.size() < 2) sep = 1000000000;
  rep.hypotheses.push_back(lower("cluster-distance", sep, std::pow(prm.M, prm.eps2)));

  rep.hypotheses.push_back(upper("S-norm", singular_values(S).maxCoeff(), prm.eps));
  double decay = 0.0;
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i)
      decay = std::max(decay, std::abs(S(i, j)) *
                                  std::exp(std::pow(static_cast<double>(l1_distance(points[i], points[j])), prm.c)));
  rep.hypotheses.push_back(upper("S-decay", decay, prm.eps));

  std::vector<char> in_cluster(n, 0);
  for (const auto& cl : clusters)
    for (size_t i : cl) in_cluster[i] = 1;
  double floor = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i)
    if (!in_cluster[i]) floor = std::min(floor, std::abs(D(i)));
  rep.hypotheses.push_back(lower("diagonal-floor", floor, prm.rho));

  Eigen::MatrixXcd T = S;
  T.diagonal() += D;
  const double radius = std::pow(prm.M, prm.eps3);
  double hood = 0.0;
  for (const auto& cl : clusters) {
    std::vector<size_t> idx;
    for (size_t y = 0; y < n; ++y)
      for (size_t x : cl)
        if (l1_distance(points[x], points[y]) <= radius) {
          idx.push_back(y);
          break;
        }
    hood = std::max(hood, operator_norm(dense_inverse(restrict(T, idx))));
  }
  rep.hypotheses.push_back(upper("neighbourhood-inverse", hood, std::pow(prm.M, prm.C)));
  finish(rep);
  if (!rep.gate_failures.empty() || !rep.hypotheses_ok) return rep;

  Eigen::MatrixXcd G = dense_inverse(T);
  rep.conclusions.push_back(upper("norm", operator_norm(G), std::pow(prm.M, prm.C + 1.0) / prm.rho));
  const double cutoff = std::pow(prm.M, 2.0 * prm.eps1);
  rep.conclusions.push_back(upper("tail-decay", tail_profile(G, points, cutoff, 0.1, prm.c, &rep.tail_pairs), 1.0));
  rep.conclusions_checked = true;
  rep.conclusions_ok = std::all_of(rep.conclusions.begin(), rep.conclusions.end(),
                                   [](const Margin& m) { return m.ok; });
  return rep;
}

namespace {

std::vector<CouplingPoint> line_points(int n) {
  std::vector<CouplingPoint> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = {i};
  return pts;
}

// Hermitian band with |entry| = amp u e^{-|i-j|^c}, u uniform in [0,1]
void add_band(Eigen::MatrixXcd& A, std::mt19937_64& rng, double amp, int width, double c) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Eigen::Index n = A.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < std::min<Eigen::Index>(n, i + width + 1); ++j) {
      const double mag = amp * U(rng) * std::exp(-std::pow(static_cast<double>(j - i), c));
      const std::complex<double> z = std::polar(mag, 2.0 * M_PI * U(rng));
      A(i, j) += z;
      A(j, i) += std::conj(z);
    }
}

}  // namespace

Lemma1Instance synthetic_lemma1(uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> diag(2.3, 2.7);
  Lemma1Instance ins;
  ins.params = {1.005, 16.0, 2.0, 6.0, 0.25};
  ins.points = line_points(n);
  ins.T = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) ins.T(i, i) = diag(rng);
  add_band(ins.T, rng, 1e-3, 4, ins.params.c);
  const int K = static_cast<int>(ins.params.K);
  for (int s = 0;; s += K) {
    std::vector<size_t> blk;
    for (int i = s; i < std::min(n, s + 3 * K); ++i) blk.push_back(i);
    ins.cover.push_back(std::move(blk));
    if (s + 3 * K >= n) break;
  }
  return ins;
}

Lemma2Instance synthetic_lemma2(uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Lemma2Instance ins;
  ins.points = line_points(n);
  ins.D.resize(n);
  const double rho = ins.params.rho;
  for (int i = 0; i < n; ++i) ins.D(i) = (U(rng) < 0.5 ? -1.0 : 1.0) * (2.0 * rho + rho * U(rng));
  const int count = 3 + static_cast<int>(U(rng) * 3.0);
  const int stride = n / count;
  for (int k = 0; k < count; ++k) {
    const int start = k * stride + 5 + static_cast<int>(U(rng) * 10.0);
    const int size = 1 + static_cast<int>(U(rng) * 4.0);
    std::vector<size_t> cl;
    for (int i = start; i < std::min(n, start + size); ++i) {
      cl.push_back(i);
      ins.D(i) = (U(rng) < 0.5 ? -1.0 : 1.0) * (0.05 + 0.15 * U(rng));
    }
    ins.clusters.push_back(std::move(cl));
  }
  ins.S = Eigen::MatrixXcd::Zero(n, n);
  const double eps = ins.params.eps;
  for (int i = 0; i < n; ++i) ins.S(i, i) = eps / 8.0 * (2.0 * U(rng) - 1.0);
  add_band(ins.S, rng, eps / 8.0, 3, ins.params.c);
  return ins;
}

}  // namespace fnls
