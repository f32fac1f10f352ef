#include "fnls/multiscale.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

namespace fnls {

int center_radius(const ScaleConstants& sc, int j) { return sc.N((j + 1) / 3); }

namespace {

std::vector<size_t> rows_of_sites(const LatticeOperator& op, const std::vector<size_t>& sites) {
  std::vector<size_t> rows;
  rows.reserve(2 * sites.size());
  for (int s = 0; s < 2; ++s)
    for (size_t i : sites) rows.push_back(op.row_of(s, i));
  return rows;
}

// position of each global row inside `rows` (npos elsewhere)
std::vector<size_t> local_index(const std::vector<size_t>& rows, size_t n) {
  std::vector<size_t> loc(n, LatticeBox::npos);
  for (size_t i = 0; i < rows.size(); ++i) loc[rows[i]] = i;
  return loc;
}

}  // namespace

Cover build_cover(const LatticeOperator& op, int N0, int side, int K) {
  const LatticeBox& box = op.box();
  const int d = box.dim(), N = box.radius();
  Cover cover;
  cover.N0 = N0;
  cover.side = side;
  cover.K = K;
  const size_t ns = box.size();

  std::vector<int> owner(ns, -1);
  CoverBox q0;
  q0.id = 0;
  std::vector<size_t> q0_sites, q0_owned;
  for (size_t i = 0; i < ns; ++i) {
    const MultiIndex& xi = box.site(i);
    if (in_box(xi, N0)) {
      q0_sites.push_back(i);
      // l1 K-neighbourhood inside Q0, or clipped by the outer box the same way
      const bool interior = (xi.spatial_l1() + K < N0 || N0 >= N) && (std::abs(xi.k()) + K < N0 || N0 >= N);
      if (interior) {
        owner[i] = 0;
        q0_owned.push_back(i);
      }
    }
  }
  q0.rows = rows_of_sites(op, q0_sites);
  q0.owned = rows_of_sites(op, q0_owned);
  cover.boxes.push_back(std::move(q0));

  const int nseg = (2 * N - 1 + side - 1) / side;
  size_t ntiles = 1;
  for (int a = 0; a <= d; ++a) ntiles *= nseg;
  std::vector<std::vector<size_t>> core(ntiles);
  for (size_t i = 0; i < ns; ++i) {
    if (owner[i] == 0) continue;
    size_t t = 0;
    for (int a = 0; a <= d; ++a) t = t * nseg + (box.site(i).axis(a) + N - 1) / side;
    core[t].push_back(i);
  }
  const double near = std::pow(static_cast<double>(N), 0.25);
  for (size_t t = 0; t < ntiles; ++t) {
    if (core[t].empty()) continue;
    std::array<int, kMaxSpatialDim + 1> lo{}, hi{};
    size_t rem = t;
    for (int a = d; a >= 0; --a) {
      const int seg = static_cast<int>(rem % nseg);
      rem /= nseg;
      lo[a] = -(N - 1) + seg * side - K;
      hi[a] = -(N - 1) + (seg + 1) * side - 1 + K;
    }
    std::vector<size_t> sites;
    MultiIndex xi(d);
    std::array<int, kMaxSpatialDim + 1> cur = lo;
    while (true) {
      for (int a = 0; a <= d; ++a) xi.set_axis(a, cur[a]);
      const size_t pos = box.position(xi);
      if (pos != LatticeBox::npos) sites.push_back(pos);
      int a = d;
      while (a >= 0 && cur[a] == hi[a]) cur[a] = lo[a], --a;
      if (a < 0) break;
      ++cur[a];
    }
    std::sort(sites.begin(), sites.end());
    CoverBox b;
    b.id = static_cast<int>(cover.boxes.size());
    b.rows = rows_of_sites(op, sites);
    b.owned = rows_of_sites(op, core[t]);
    b.dist_origin = std::numeric_limits<int>::max();
    for (size_t i : sites) b.dist_origin = std::min(b.dist_origin, box.site(i).l1());
    if (b.dist_origin <= near) ++cover.tiles_near_origin;
    cover.boxes.push_back(std::move(b));
  }
  return cover;
}

SeparationPartition partition_for(const LatticeOperator& op, const ScaleConstants& sc) {
  const double B = std::pow(static_cast<double>(op.N()), sc.delta);
  return separation_partition(op.dim(), B, op.N() - 1);
}

std::vector<ClusterNeighborhood> cluster_neighborhoods(const LatticeOperator& op, const Cover& cover,
                                                       const SeparationPartition& part,
                                                       const ProblemParams& p,
                                                       const ScaleConstants& sc) {
  std::vector<ClusterNeighborhood> out;
  const size_t nb = op.box().size();
  const int N = op.N();
  const int fat = static_cast<int>(std::floor(std::pow(static_cast<double>(N), 0.5 * sc.delta)));
  for (size_t b = 1; b < cover.boxes.size(); ++b) {
    const CoverBox& box = cover.boxes[b];
    std::vector<size_t> sites;  // site indices of the tile
    for (size_t r : box.rows)
      if (r < nb) sites.push_back(r);
    std::vector<MultiIndex> singular;
    for (size_t i : sites)
      if (is_singular(op.box().site(i), op.omega(), p.alpha)) singular.push_back(op.box().site(i));
    if (singular.empty()) continue;
    SingularClusters cl = cluster_sites(singular, part, N, sc.delta, sc.rho);
    // fatten each cluster inside the tile
    std::vector<std::vector<size_t>> hoods;
    for (const auto& members : cl.clusters) {
      std::vector<size_t> h;
      for (size_t i : sites) {
        const MultiIndex& xi = op.box().site(i);
        for (int m : members)
          if (l1_distance(xi, cl.sites[m]) <= fat) {
            h.push_back(i);
            break;
          }
      }
      hoods.push_back(std::move(h));
    }
    // merge overlapping neighbourhoods
    std::vector<int> parent(hoods.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::map<size_t, int> first;
    for (size_t h = 0; h < hoods.size(); ++h)
      for (size_t i : hoods[h]) {
        auto [it, fresh] = first.emplace(i, static_cast<int>(h));
        if (!fresh) {
          int x = find(it->second), y = find(static_cast<int>(h));
          if (x != y) parent[std::max(x, y)] = std::min(x, y);
        }
      }
    std::map<int, std::vector<size_t>> merged;
    for (size_t h = 0; h < hoods.size(); ++h) {
      auto& dst = merged[find(static_cast<int>(h))];
      dst.insert(dst.end(), hoods[h].begin(), hoods[h].end());
    }
    int kappa = 0;
    for (auto& [root, s] : merged) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
      out.push_back({static_cast<int>(b), kappa++, rows_of_sites(op, s)});
    }
  }
  return out;
}

std::optional<Eigen::MatrixXcd> diagonal_neumann(const Eigen::MatrixXcd& T, double tol, int max_terms) {
  const Eigen::Index n = T.rows();
  Eigen::VectorXcd dinv = T.diagonal().cwiseInverse();
  Eigen::MatrixXcd E = T;
  E.diagonal().setZero();
  Eigen::MatrixXcd R = -(dinv.asDiagonal() * E);
  Eigen::MatrixXcd X = dinv.asDiagonal().toDenseMatrix();
  Eigen::MatrixXcd G = X;
  double prev = X.norm();
  for (int l = 1; l <= max_terms && n > 0; ++l) {
    X = R * X;
    const double tn = X.norm();
    if (tn >= prev && tn > 0) return std::nullopt;
    G += X;
    prev = tn;
    if (tn <= tol * G.norm()) break;
  }
  return G;
}

namespace {

// Schur assembly of the tile inverse around the cluster neighbourhoods.
std::optional<Eigen::MatrixXcd> tile_inverse(const LatticeOperator& op, const std::vector<size_t>& rows,
                                             const std::vector<std::vector<size_t>>& hoods,
                                             std::string* why) {
  const size_t n = rows.size();
  std::vector<size_t> loc = local_index(rows, op.rows());
  std::vector<char> in_c(n, 0);
  std::vector<size_t> C, R;  // local indices
  std::vector<std::pair<size_t, size_t>> blocks;  // ranges in C
  for (const auto& h : hoods) {
    const size_t start = C.size();
    for (size_t r : h) {
      C.push_back(loc[r]);
      in_c[loc[r]] = 1;
    }
    blocks.emplace_back(start, C.size());
  }
  for (size_t i = 0; i < n; ++i)
    if (!in_c[i]) R.push_back(i);
  Eigen::MatrixXcd T = op.block(rows, rows);
  auto sub = [&](const std::vector<size_t>& a, const std::vector<size_t>& b) {
    Eigen::MatrixXcd M(a.size(), b.size());
    for (size_t j = 0; j < b.size(); ++j)
      for (size_t i = 0; i < a.size(); ++i) M(i, j) = T(a[i], b[j]);
    return M;
  };
  Eigen::MatrixXcd Arr_inv;
  if (!R.empty()) {
    auto g = diagonal_neumann(sub(R, R));
    if (!g) {
      if (why) *why = "nonsingular part does not contract";
      return std::nullopt;
    }
    Arr_inv = *g;
  }
  if (C.empty()) {
    Eigen::MatrixXcd G(n, n);
    for (size_t j = 0; j < R.size(); ++j)
      for (size_t i = 0; i < R.size(); ++i) G(R[i], R[j]) = Arr_inv(i, j);
    return G;
  }
  Eigen::MatrixXcd Tcr = sub(C, R), Trc = sub(R, C);
  Eigen::MatrixXcd Sigma = sub(C, C);
  if (!R.empty()) Sigma -= Tcr * Arr_inv * Trc;
  // block Neumann around the cluster blocks
  Eigen::MatrixXcd Binv = Eigen::MatrixXcd::Zero(C.size(), C.size());
  for (auto [a, b] : blocks) {
    const Eigen::Index m = static_cast<Eigen::Index>(b - a);
    Binv.block(a, a, m, m) = dense_inverse(Sigma.block(a, a, m, m));
  }
  Eigen::MatrixXcd E = Sigma;
  for (auto [a, b] : blocks) {
    const Eigen::Index m = static_cast<Eigen::Index>(b - a);
    E.block(a, a, m, m).setZero();
  }
  Eigen::MatrixXcd Rm = -(Binv * E);
  Eigen::MatrixXcd X = Binv, Sinv = Binv;
  double prev = X.norm();
  for (int l = 1; l <= 500; ++l) {
    X = Rm * X;
    const double tn = X.norm();
    if (tn >= prev && tn > 0) {
      if (why) *why = "cluster coupling does not contract";
      return std::nullopt;
    }
    Sinv += X;
    prev = tn;
    if (tn <= 1e-16 * Sinv.norm()) break;
  }
  Eigen::MatrixXcd G(n, n);
  for (size_t j = 0; j < C.size(); ++j)
    for (size_t i = 0; i < C.size(); ++i) G(C[i], C[j]) = Sinv(i, j);
  if (!R.empty()) {
    Eigen::MatrixXcd Gcr = -(Sinv * Tcr * Arr_inv);
    Eigen::MatrixXcd Grc = -(Arr_inv * Trc * Sinv);
    Eigen::MatrixXcd Grr = Arr_inv + Arr_inv * Trc * Sinv * Tcr * Arr_inv;
    for (size_t j = 0; j < R.size(); ++j) {
      for (size_t i = 0; i < C.size(); ++i) G(C[i], R[j]) = Gcr(i, j);
      for (size_t i = 0; i < R.size(); ++i) G(R[i], R[j]) = Grr(i, j);
    }
    for (size_t j = 0; j < C.size(); ++j)
      for (size_t i = 0; i < R.size(); ++i) G(R[i], C[j]) = Grc(i, j);
  }
  return G;
}

}  // namespace

double center_budget(int N0, int N, const ScaleConstants& sc) {
  const double own = 4.0 * std::exp(std::pow(std::log(static_cast<double>(N0)), sc.C2));
  return sc.paper_faithful ? own : std::max(own, 1.0 / exclusion_threshold(N, sc));
}

MultiscaleResult multiscale_inverse(const LatticeOperator& op, const ProblemParams& p,
                                    const ScaleConstants& sc, int j, const OlderInverse* prior,
                                    const MultiscaleOptions& opt) {
  if (op.mode() != OperatorMode::kTilde) throw std::invalid_argument("multiscale inverse needs T-tilde");
  MultiscaleResult res;
  const int N = op.N();
  const size_t n = op.rows();
  res.N0 = std::min(center_radius(sc, j), N);
  const int side = std::max(1, static_cast<int>(std::ceil(std::cbrt(static_cast<double>(N)) - 1e-12)));
  Cover cover = build_cover(op, res.N0, side, opt.overlap);
  res.tiles = static_cast<int>(cover.boxes.size()) - 1;
  res.tiles_near_origin = cover.tiles_near_origin;
  const double sigma = exclusion_threshold(N, sc);
  res.cluster_bound = 1.0 / sigma;
  auto fail = [&](const std::string& stage, const std::string& reason) {
    res.pass = false;
    res.failure = stage;
    res.failure_reason = reason;
    return res;
  };

  // (a) centre box
  std::vector<Eigen::MatrixXcd> inv(cover.boxes.size());
  {
    const CoverBox& q0 = cover.boxes[0];
    Eigen::MatrixXcd T0 = op.block(q0.rows, q0.rows);
    bool done = false;
    if (prior && prior->op.N() == res.N0 && static_cast<size_t>(prior->inverse.rows()) == q0.rows.size()) {
      Eigen::MatrixXcd dT = T0 - prior->op.materialize(q0.rows.size());
      double worst = 0.0;
      for (Eigen::Index b = 0; b < dT.cols(); ++b)
        for (Eigen::Index a = 0; a < dT.rows(); ++a) {
          const int dist = (op.site_of(q0.rows[a]) - op.site_of(q0.rows[b])).l1();
          worst = std::max(worst, std::abs(dT(a, b)) * std::exp(std::pow(static_cast<double>(dist), sc.c)));
        }
      res.perturbation_size = worst;
      res.perturbation_ok = worst < std::exp(-0.25 * std::pow(static_cast<double>(res.N0), sc.c));
      Eigen::MatrixXcd Rm = -(prior->inverse * dT);
      Eigen::MatrixXcd X = prior->inverse, G0 = X;
      double prev = X.norm();
      bool ok = true;
      for (int l = 1; l <= 500; ++l) {
        X = Rm * X;
        const double tn = X.norm();
        if (tn >= prev && tn > 0) {
          ok = false;
          break;
        }
        G0 += X;
        prev = tn;
        if (tn <= 1e-16 * G0.norm()) break;
      }
      if (ok) {
        inv[0] = G0;
        res.q0_from_prior = true;
        done = true;
      }
    }
    if (!done) inv[0] = dense_inverse(T0);
    GreenCheckSpec s0 = scale_spec(res.N0, sc);
    s0.l2_budget = center_budget(res.N0, N, sc);
    s0.prefactor = 4.0;
    res.q0_cert = check_green(inv[0], row_sites(op, q0.rows), s0, opt.norm);
    res.q0_cert.N = res.N0;
    res.q0_cert.omega = op.omega();
    res.q0_cert.method = res.q0_from_prior ? "perturbation" : "direct";
    if (!res.q0_cert.pass) return fail("Q0", "green-bound");
  }

  // (b) tiles
  SeparationPartition part = partition_for(op, sc);
  std::vector<ClusterNeighborhood> hoods = cluster_neighborhoods(op, cover, part, p, sc);
  res.clusters = static_cast<int>(hoods.size());
  for (const auto& h : hoods) {
    Eigen::MatrixXcd Tc = op.block(h.rows, h.rows);
    const double norm = 1.0 / hermitian_eigenvalues(Tc).cwiseAbs().minCoeff();
    res.max_cluster_inverse = std::max(res.max_cluster_inverse, norm);
    if (!(norm < res.cluster_bound)) return fail("Qr-cluster", "eigenvalue");
  }
  GreenCheckSpec sr;
  sr.l2_budget = N * res.cluster_bound;
  sr.prefactor = 1.0;
  sr.rate = 0.1;
  sr.cutoff = std::pow(static_cast<double>(N), 0.2);
  sr.c = sc.c;
  for (size_t b = 1; b < cover.boxes.size(); ++b) {
    std::vector<std::vector<size_t>> hb;
    for (const auto& h : hoods)
      if (h.r == static_cast<int>(b)) hb.push_back(h.rows);
    std::string why;
    auto G = tile_inverse(op, cover.boxes[b].rows, hb, &why);
    if (!G) return fail("Qr-assembly", "green-bound");
    inv[b] = std::move(*G);
    GreenCertificate c = check_green(inv[b], row_sites(op, cover.boxes[b].rows), sr, opt.norm);
    c.N = N;
    c.omega = op.omega();
    c.method = "tile";
    res.qr_certs.push_back(c);
    if (!c.pass) return fail("Qr", "green-bound");
  }

  // (c) paving: G = A + K G
  using Sp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
  std::vector<Eigen::Triplet<cplx>> ta, tk;
  for (size_t b = 0; b < cover.boxes.size(); ++b) {
    const CoverBox& box = cover.boxes[b];
    if (box.owned.empty()) continue;
    std::vector<size_t> loc = local_index(box.rows, n);
    std::vector<size_t> comp;
    for (size_t r = 0; r < n; ++r)
      if (loc[r] == LatticeBox::npos) comp.push_back(r);
    // columns of the complement reached by the Toeplitz coupling
    std::vector<size_t> reach;
    for (size_t c : comp) {
      bool hit = false;
      for (size_t r : box.rows)
        if (op.entry(r, c) != cplx(0.0, 0.0)) {
          hit = true;
          break;
        }
      if (hit) reach.push_back(c);
    }
    Eigen::MatrixXcd Tbc = op.block(box.rows, reach);
    std::vector<size_t> own_loc;
    for (size_t r : box.owned) own_loc.push_back(loc[r]);
    Eigen::MatrixXcd Gown(own_loc.size(), box.rows.size());
    for (size_t i = 0; i < own_loc.size(); ++i) Gown.row(i) = inv[b].row(own_loc[i]);
    Eigen::MatrixXcd GT = -(Gown * Tbc);
    for (size_t i = 0; i < own_loc.size(); ++i) {
      for (size_t c = 0; c < box.rows.size(); ++c)
        if (Gown(i, c) != cplx(0.0, 0.0)) ta.emplace_back(box.owned[i], box.rows[c], Gown(i, c));
      for (size_t c = 0; c < reach.size(); ++c)
        if (GT(i, c) != cplx(0.0, 0.0)) tk.emplace_back(box.owned[i], reach[c], GT(i, c));
    }
  }
  Sp A(n, n), Km(n, n);
  A.setFromTriplets(ta.begin(), ta.end());
  Km.setFromTriplets(tk.begin(), tk.end());
  Eigen::MatrixXcd G = Eigen::MatrixXcd(A);
  const Eigen::MatrixXcd Ad = G;
  double prev_step = std::numeric_limits<double>::infinity();
  bool converged = false;
  // the Toeplitz coupling is often far from sparse at desk scale
  const bool dense_k = static_cast<double>(Km.nonZeros()) > 0.1 * static_cast<double>(n) * n;
  const Eigen::MatrixXcd Kd = dense_k ? Eigen::MatrixXcd(Km) : Eigen::MatrixXcd();
  for (int it = 1; it <= opt.paving_max_iter; ++it) {
    Eigen::MatrixXcd next = Ad;
    if (dense_k)
      next.noalias() += Kd * G;
    else
      next += Km * G;
    const double step = (next - G).cwiseAbs().maxCoeff();
    G = std::move(next);
    res.paving_iterations = it;
    if (step <= opt.paving_tol * G.cwiseAbs().maxCoeff()) {
      converged = true;
      break;
    }
    if (it > 3 && step >= prev_step) break;
    prev_step = step;
  }
  if (!converged) return fail("paving", "green-bound");
  res.inverse = std::move(G);
  res.cert = check_green(res.inverse, op, sc, opt.norm);
  res.cert.method = "multiscale";
  if (n <= opt.dense_oracle_max_rows)
    res.cert.dense_mismatch = relative_mismatch(res.inverse, dense_inverse(op.materialize(n)));
  if (!res.cert.pass) return fail("global", "green-bound");
  res.pass = true;
  return res;
}

}  // namespace fnls
