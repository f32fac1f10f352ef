#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fnls/green.hpp"
#include "fnls/separation.hpp"

namespace fnls {

struct CoverBox {
  int id = 0;                // 0 is the centre box Q0
  std::vector<size_t> rows;  // operator rows, sign-major
  std::vector<size_t> owned; // rows whose K-neighbourhood lies in this box
  int dist_origin = 0;       // min |xi| over the box
};

struct Cover {
  int N0 = 1;
  int side = 1;
  int K = 1;
  std::vector<CoverBox> boxes;
  int tiles_near_origin = 0;  // tiles with dist(0, Q_r) <= N^{1/4}
};

// Q0 = {|n|_1 < N0, |k| < N0}; tiles are cubes of the given side widened by K.
Cover build_cover(const LatticeOperator& op, int N0, int side, int K);
int center_radius(const ScaleConstants& sc, int j);  // M^{floor((j+1)/3)}
// Norm budget of the centre-box inverse on the scale-N step: 4 B(N0) under
// paper_faithful, otherwise also at least the cluster bound 1 / sigma*(N).
double center_budget(int N0, int N, const ScaleConstants& sc);

// Singular-site clusters of every tile at the operator's omega, fattened by
// N^{delta/2} inside their tile and merged where they overlap.
std::vector<ClusterNeighborhood> cluster_neighborhoods(const LatticeOperator& op, const Cover& cover,
                                                       const SeparationPartition& part,
                                                       const ProblemParams& p,
                                                       const ScaleConstants& sc);
SeparationPartition partition_for(const LatticeOperator& op, const ScaleConstants& sc);

struct OlderInverse {
  LatticeOperator op;        // T-tilde of an older iterate on the box of radius N0
  Eigen::MatrixXcd inverse;
};

struct MultiscaleOptions {
  size_t dense_oracle_max_rows = 2500;
  NormOptions norm;
  int overlap = 1;
  double paving_tol = 1e-14;
  int paving_max_iter = 200;
};

struct MultiscaleResult {
  Eigen::MatrixXcd inverse;
  GreenCertificate cert;
  GreenCertificate q0_cert;
  std::vector<GreenCertificate> qr_certs;
  int N0 = 1;
  bool q0_from_prior = false;
  bool perturbation_ok = false;      // |dT(xi,xi')| e^{|xi-xi'|^c} < e^{-(1/4) N0^c}
  double perturbation_size = 0.0;
  int tiles = 0;
  int tiles_near_origin = 0;
  int clusters = 0;
  double max_cluster_inverse = 0.0;
  double cluster_bound = 0.0;        // 1 / sigma*(N)
  int paving_iterations = 0;
  bool pass = false;
  std::string failure;               // first failed stage
  std::string failure_reason;        // green-bound | eigenvalue
};

MultiscaleResult multiscale_inverse(const LatticeOperator& op, const ProblemParams& p,
                                    const ScaleConstants& sc, int j, const OlderInverse* prior,
                                    const MultiscaleOptions& opt = {});

// sum_l (-D^{-1} E)^l D^{-1} for T = D + E; nullopt when the series does not contract.
std::optional<Eigen::MatrixXcd> diagonal_neumann(const Eigen::MatrixXcd& T, double tol = 1e-16,
                                                 int max_terms = 500);

}  // namespace fnls
