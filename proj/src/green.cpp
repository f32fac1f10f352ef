#include "fnls/green.hpp"

#include <algorithm>
#include <cmath>

#include "fnls/toeplitz_fft.hpp"

namespace fnls {

GreenCheckSpec scale_spec(int N, const ScaleConstants& sc) {
  GreenCheckSpec s;
  s.l2_budget = green_budget(N, sc.C2);
  s.prefactor = 2.0;
  s.rate = 0.5;
  s.cutoff = std::sqrt(static_cast<double>(N));
  s.c = sc.c;
  return s;
}

std::vector<MultiIndex> row_sites(const LatticeOperator& op) {
  std::vector<MultiIndex> s(op.rows());
  for (size_t r = 0; r < op.rows(); ++r) s[r] = op.site_of(r);
  return s;
}

std::vector<MultiIndex> row_sites(const LatticeOperator& op, const std::vector<size_t>& rows) {
  std::vector<MultiIndex> s(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) s[i] = op.site_of(rows[i]);
  return s;
}

GreenCertificate check_green(const Eigen::MatrixXcd& G, const std::vector<MultiIndex>& sites,
                             const GreenCheckSpec& spec, const NormOptions& norm) {
  GreenCertificate cert;
  cert.l2_budget = spec.l2_budget;
  cert.offdiag_budget = spec.prefactor;
  cert.cutoff = spec.cutoff;
  cert.rate = spec.rate;
  cert.l2_bound = operator_norm(G, norm);
  int maxd = 0;
  for (const auto& s : sites) maxd = std::max(maxd, s.l1());
  std::vector<double> weight(2 * maxd + 1);
  for (size_t m = 0; m < weight.size(); ++m)
    weight[m] = std::exp(spec.rate * std::pow(static_cast<double>(m), spec.c));
  double prof = 0.0;
  const Eigen::Index n = G.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const int dist = (sites[i] - sites[j]).l1();
      if (dist > spec.cutoff) prof = std::max(prof, std::abs(G(i, j)) * weight[dist]);
    }
  cert.offdiag_profile = prof;
  cert.l2_pass = cert.l2_bound < cert.l2_budget;
  cert.offdiag_pass = cert.offdiag_profile < cert.offdiag_budget;
  cert.pass = cert.l2_pass && cert.offdiag_pass;
  return cert;
}

GreenCertificate check_green(const Eigen::MatrixXcd& G, const LatticeOperator& op,
                             const ScaleConstants& sc, const NormOptions& norm) {
  GreenCertificate cert = check_green(G, row_sites(op), scale_spec(op.N(), sc), norm);
  cert.N = op.N();
  cert.omega = op.omega();
  return cert;
}

double relative_mismatch(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  const double scale = B.cwiseAbs().maxCoeff();
  return (A - B).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
}

NeumannResult neumann_inverse(const LatticeOperator& op, const ProblemParams& p,
                              const ScaleConstants& sc, const NeumannOptions& opt) {
  if (op.mode() != OperatorMode::kTilde) throw std::invalid_argument("Neumann inverse needs T-tilde");
  FlushSubnormals ftz;
  NeumannResult res;
  const int N = op.N();
  const size_t n = op.rows();
  res.regime_ok = N <= std::pow(p.epsilon, -1.0 / (30.0 * p.dim));
  if (sc.paper_faithful && !res.regime_ok)
    throw std::invalid_argument("Neumann regime requires N <= eps^{-1/(30d)}");
  Eigen::VectorXd dinv(n);
  res.diag_floor = std::numeric_limits<double>::infinity();
  for (size_t r = 0; r < n; ++r) {
    res.diag_floor = std::min(res.diag_floor, std::abs(op.diagonal(r)));
    dinv(r) = 1.0 / op.diagonal(r);
  }
  res.required_floor = 0.5 / p.log_inv_eps() *
                       std::pow(static_cast<double>(N), -ScaleConstants::tau(p.dim) - p.alpha);
  res.floor_ok = res.diag_floor > res.required_floor;
  if (sc.paper_faithful && !res.floor_ok)
    throw CertificateError("diagonal floor below (1/2)(log 1/eps)^{-1} N^{-tau-alpha}");

  {
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(n, n);
    for (size_t r = 0; r < n; ++r) X(r, r) = dinv(r);
    res.inverse = X;
    double prev = X.norm();
    const double s = op.scale();
    res.terms = 1;
    if (s != 0.0) {
      ToeplitzApplier S(op);
      Eigen::VectorXcd y(n);
      for (int l = 1; l <= opt.max_terms; ++l) {
        for (size_t j = 0; j < n; ++j) {
          S.apply(X.col(j).data(), y.data());
          X.col(j) = (-s) * dinv.cwiseProduct(y);
        }
        const double tn = X.norm();
        const double ratio = prev > 0 ? tn / prev : 0.0;
        res.max_ratio = std::max(res.max_ratio, ratio);
        if (ratio >= 1.0) throw CertificateError("Neumann series diverges (term ratio >= 1)");
        res.inverse += X;
        res.terms = l + 1;
        prev = tn;
        if (tn < opt.term_tol * res.inverse.norm() || tn == 0.0) break;
      }
    }
  }
  res.cert = check_green(res.inverse, op, sc, opt.norm);
  res.cert.method = "neumann";
  if (n <= opt.dense_oracle_max_rows) {
    Eigen::MatrixXcd D = dense_inverse(op.materialize(n));
    res.cert.dense_mismatch = relative_mismatch(res.inverse, D);
  }
  return res;
}

double ExclusionRecord::excluded_measure() const {
  double m = 0.0;
  for (const auto& iv : excluded) m += iv.length();
  return m;
}

LatticeOperator at_omega(const LatticeOperator& op, double omega) {
  return LatticeOperator(op.dim(), op.N(), omega, op.alpha(), op.scale(), op.mode(), op.phi());
}

double cluster_sigma_min(const LatticeOperator& op, const std::vector<size_t>& rows, double omega) {
  LatticeOperator o = at_omega(op, omega);
  Eigen::MatrixXcd A = o.block(rows, rows);
  return hermitian_eigenvalues(A).cwiseAbs().minCoeff();
}

std::vector<ExclusionRecord> exclude_by_spectrum(const LatticeOperator& op,
                                                 const std::vector<ClusterNeighborhood>& clusters,
                                                 const std::vector<Interval>& cells,
                                                 double threshold) {
  if (op.mode() != OperatorMode::kTilde) throw std::invalid_argument("exclusion needs T-tilde");
  std::vector<ExclusionRecord> out;
  const size_t nb = op.box().size();
  for (const auto& cl : clusters) {
    const size_t m = cl.rows.size();
    // H(x) = A0 + x A1 with x = 1/w
    Eigen::VectorXd a0(m);
    Eigen::MatrixXcd S = op.toeplitz_block(cl.rows, cl.rows);
    Eigen::MatrixXcd A1 = op.scale() * S;
    double min_diag = std::numeric_limits<double>::infinity(), max_diag = 0.0;
    for (size_t i = 0; i < m; ++i) {
      const MultiIndex& xi = op.site_of(cl.rows[i]);
      const double lam = std::pow(angle_weight(xi), -op.alpha());
      const double sign = cl.rows[i] < nb ? -1.0 : 1.0;
      a0(i) = sign * xi.k() * lam;
      const double d1 = (static_cast<double>(xi.spatial_sq()) + 1.0) * lam;
      A1(i, i) += d1;
      min_diag = std::min(min_diag, d1);
      max_diag = std::max(max_diag, d1);
    }
    const double snorm = m ? singular_values(S).maxCoeff() : 0.0;
    const double slope = min_diag - op.scale() * snorm;
    const double steep = max_diag + op.scale() * snorm;
    for (size_t s = 0; s < cells.size(); ++s) {
      const Interval& cell = cells[s];
      ExclusionRecord rec;
      rec.r = cl.r;
      rec.kappa = cl.kappa;
      rec.s = static_cast<int>(s);
      rec.cell = cell;
      rec.threshold = threshold;
      rec.slope_min = slope;
      const double xc = 2.0 / (cell.a + cell.b);
      Eigen::MatrixXcd H = xc * A1;
      H.diagonal() += a0.cast<cplx>();
      Eigen::VectorXd ev = hermitian_eigenvalues(H);
      rec.sigma_center = ev.cwiseAbs().minCoeff();
      if (slope < 0.5) {
        rec.soft_failure = true;
        rec.excluded.push_back(cell);
        out.push_back(rec);
        continue;
      }
      // The i-th ordered eigenvalue f_i(x) is strictly increasing (A1 >= slope
      // by Weyl), so {|f_i| < threshold} is one interval; its ends are located
      // by bisection inside the cell, keeping the outer point each time.
      const double xa = 1.0 / cell.b, xb = 1.0 / cell.a;
      const double th = threshold + 64.0 * std::numeric_limits<double>::epsilon() *
                                        (a0.cwiseAbs().maxCoeff() + xb * (max_diag + op.scale() * snorm));
      auto f = [&](double x, Eigen::Index i) {
        Eigen::MatrixXcd Hx = x * A1;
        Hx.diagonal() += a0.cast<cplx>();
        return hermitian_eigenvalues(Hx)(i);
      };
      auto bisect = [&](double lo, double hi, Eigen::Index i, double level, bool keep_lo) {
        for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          (f(mid, i) <= level ? lo : hi) = mid;
        }
        return keep_lo ? lo : hi;
      };
      std::vector<Interval> win;
      for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double mu = ev(i);
        // coarse filter: every eigenvalue moves with slope in [slope, steep]
        const double x_lo = xc - (mu + threshold) / (mu + threshold >= 0.0 ? slope : steep);
        const double x_hi = xc + (threshold - mu) / (threshold - mu >= 0.0 ? slope : steep);
        if (!(x_lo < x_hi) || x_hi < xa || x_lo > xb) continue;
        const double fa = f(xa, i), fb = f(xb, i);
        if (fa >= th || fb <= -th) continue;
        const double lo = fa > -th ? xa : bisect(xa, xb, i, -th, true);
        const double hi = fb < th ? xb : bisect(xa, xb, i, th, false);
        const double a = std::max(1.0 / hi, cell.a), b = std::min(1.0 / lo, cell.b);
        if (a < b) win.push_back({a, b});
      }
      IntervalSet merged(std::move(win));
      rec.excluded = merged.intervals();
      out.push_back(rec);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ExclusionRecord& x, const ExclusionRecord& y) {
    return std::tie(x.r, x.kappa, x.s) < std::tie(y.r, y.kappa, y.s);
  });
  return out;
}

}  // namespace fnls
