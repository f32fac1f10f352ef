#include "fnls/collocation.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace fnls {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// e^{sign 2 pi i m f / G} for rows m (or f) and columns f (or m)
RowMat exp_matrix(int rows, int row_off, int cols, int col_off, int G, double sign, double scale) {
  RowMat A(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      long long t = static_cast<long long>(r + row_off) * (c + col_off) % G;
      if (t < 0) t += G;
      A(r, c) = std::polar(scale, sign * 2.0 * M_PI * static_cast<double>(t) / G);
    }
  return A;
}

// Contracts axis `a` of a row-major tensor with A (out x in).
std::vector<cplx> along_axis(const std::vector<cplx>& in, std::vector<int>& shape, int a, const RowMat& A) {
  long outer = 1, inner = 1;
  for (int i = 0; i < a; ++i) outer *= shape[i];
  for (size_t i = a + 1; i < shape.size(); ++i) inner *= shape[i];
  const long nin = shape[a], nout = A.rows();
  std::vector<cplx> out(static_cast<size_t>(outer * nout * inner));
  for (long o = 0; o < outer; ++o) {
    Eigen::Map<const RowMat> src(in.data() + o * nin * inner, nin, inner);
    Eigen::Map<RowMat> dst(out.data() + o * nout * inner, nout, inner);
    dst.noalias() = A * src;
  }
  shape[a] = static_cast<int>(nout);
  return out;
}

}  // namespace

CollocationResult collocation_residual(const FourierField& u, const ProblemParams& p, int grid) {
  CollocationResult res;
  const int D = p.dim + 1;
  const int L = std::max(0, u.support_radius() - 1);
  res.K = 3 * L;
  res.grid = grid > 0 ? grid : 8 * res.K + 1;
  if (res.grid < 2 * res.K + 1)
    throw ConfigError("collocation grid " + std::to_string(res.grid) + " is below 2K+1 = " +
                      std::to_string(2 * res.K + 1));
  const int G = res.grid, F = 2 * L + 1, K = res.K, F2 = 2 * K + 1;

  // coefficients of u on [-L, L]^{D}
  std::vector<int> shape(D, F);
  size_t cells = 1;
  for (int a = 0; a < D; ++a) cells *= F;
  std::vector<cplx> coef(cells, cplx(0.0, 0.0));
  auto offset = [&](const MultiIndex& xi, int half, int side) {
    size_t off = 0;
    for (int a = 0; a < D; ++a) off = off * side + (xi.axis(a) + half);
    return off;
  };
  for (const auto& [xi, a] : u.entries()) coef[offset(xi, L, F)] = a;

  const double e = p.eps23();
  double sum_sq = 0.0;
  size_t rcells = 1;
  for (int a = 0; a < D; ++a) rcells *= F2;
  std::vector<cplx> r(rcells, cplx(0.0, 0.0));

  if (p.nonlinearity != 0.0 && !u.empty()) {
    const RowMat E = exp_matrix(G, 0, F, -L, G, 1.0, 1.0);
    std::vector<cplx> vals = coef;
    for (int a = 0; a < D; ++a) vals = along_axis(vals, shape, a, E);
    for (auto& z : vals) z = std::norm(z) * z;
    const RowMat B = exp_matrix(F2, -K, G, 0, G, -1.0, 1.0 / G);
    for (int a = 0; a < D; ++a) vals = along_axis(vals, shape, a, B);
    // vals now holds the transform of |u|^2 u on [-K, K]^{D}
    std::vector<int> idx(D, 0);
    for (size_t c = 0; c < rcells; ++c) {
      size_t rem = c;
      double nsq = 0.0;
      for (int a = D - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rem % F2) - K;
        rem /= F2;
      }
      for (int a = 0; a < p.dim; ++a) nsq += static_cast<double>(idx[a]) * idx[a];
      r[c] = e * p.nonlinearity * std::pow(std::sqrt(nsq + 1.0), p.alpha) * vals[c];
    }
  }
  for (const auto& [xi, a] : u.entries())
    r[offset(xi, K, F2)] += (-xi.k() * p.omega + static_cast<double>(xi.spatial_sq()) + 1.0) * a;
  for (const auto& [xi, a] : p.forcing.entries()) {
    bool inside = true;
    for (int ax = 0; ax < D; ++ax) inside = inside && std::abs(xi.axis(ax)) <= K;
    if (inside)
      r[offset(xi, K, F2)] -= e * a;
    else
      sum_sq += std::norm(e * a);
  }
  for (const auto& z : r) sum_sq += std::norm(z);
  res.residual = std::sqrt(sum_sq);
  const double scale = e * p.forcing.l2_norm();
  res.relative = scale > 0 ? res.residual / scale : res.residual;
  return res;
}

}  // namespace fnls
