#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnls/dense.hpp"
#include "fnls/intervals.hpp"
#include "fnls/nls_operator.hpp"

namespace fnls {

struct GreenCertificate {
  int N = 0;
  double omega = 0.0;
  double l2_bound = 0.0;
  double l2_budget = 0.0;
  double offdiag_profile = 0.0;  // max |G| e^{rate |xi-xi'|^c} beyond the cutoff
  double offdiag_budget = 2.0;
  double cutoff = 0.0;
  double rate = 0.5;
  bool l2_pass = false;
  bool offdiag_pass = false;
  bool pass = false;
  std::string method = "dense";
  double dense_mismatch = -1.0;  // max|G - G_dense| / max|G_dense|, -1 when not checked
};

struct GreenCheckSpec {
  double l2_budget = 0.0;
  double prefactor = 2.0;
  double rate = 0.5;
  double cutoff = 0.0;
  double c = 0.25;
};

// Budgets of the scale-N certificate: B(N), 2 e^{-|x|^c/2} beyond N^{1/2}.
GreenCheckSpec scale_spec(int N, const ScaleConstants& sc);

// `sites` gives the lattice site of every row/column of G.
GreenCertificate check_green(const Eigen::MatrixXcd& G, const std::vector<MultiIndex>& sites,
                             const GreenCheckSpec& spec, const NormOptions& norm = {});
GreenCertificate check_green(const Eigen::MatrixXcd& G, const LatticeOperator& op,
                             const ScaleConstants& sc, const NormOptions& norm = {});
std::vector<MultiIndex> row_sites(const LatticeOperator& op);
std::vector<MultiIndex> row_sites(const LatticeOperator& op, const std::vector<size_t>& rows);

double relative_mismatch(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B);

struct NeumannOptions {
  size_t dense_oracle_max_rows = 2500;
  double term_tol = 1e-16;
  int max_terms = 500;
  NormOptions norm;
};

struct NeumannResult {
  Eigen::MatrixXcd inverse;
  GreenCertificate cert;
  int terms = 0;
  double max_ratio = 0.0;      // largest ||X_l|| / ||X_{l-1}||
  double diag_floor = 0.0;     // min |D-tilde| on the box
  double required_floor = 0.0; // (1/2)(log 1/eps)^{-1} N^{-tau-alpha}
  bool floor_ok = false;
  bool regime_ok = false;      // N <= eps^{-1/(30 d)}
};

// T-tilde^{-1} = sum_l (-eps^{2/3} D^{-1} S)^l D^{-1}, S applied through FFTs.
NeumannResult neumann_inverse(const LatticeOperator& op, const ProblemParams& p,
                              const ScaleConstants& sc, const NeumannOptions& opt = {});

struct ClusterNeighborhood {
  int r = 0;
  int kappa = 0;
  std::vector<size_t> rows;  // operator rows, both signs
};

struct ExclusionRecord {
  int r = 0, kappa = 0, s = 0;
  Interval cell;
  std::vector<Interval> excluded;
  double sigma_center = 0.0;  // smallest |eigenvalue| of w1 T-tilde at the cell centre
  double threshold = 0.0;
  double slope_min = 0.0;
  bool soft_failure = false;
  double excluded_measure() const;
};

// Eigenvalue-variation exclusion in w1 = 1/w.  The operator supplies the
// Toeplitz part and alpha; its own omega is not used.
std::vector<ExclusionRecord> exclude_by_spectrum(const LatticeOperator& op,
                                                 const std::vector<ClusterNeighborhood>& clusters,
                                                 const std::vector<Interval>& cells,
                                                 double threshold);

// smallest |eigenvalue| of T-tilde restricted to rows at frequency w
double cluster_sigma_min(const LatticeOperator& op, const std::vector<size_t>& rows, double omega);

// Copy of the operator at another frequency (same symbols, box, mode).
LatticeOperator at_omega(const LatticeOperator& op, double omega);

}  // namespace fnls
