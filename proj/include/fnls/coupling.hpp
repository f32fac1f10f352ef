#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fnls {

// Lattice points of an abstract index set; distances are l1.
using CouplingPoint = std::vector<int>;
int l1_distance(const CouplingPoint& a, const CouplingPoint& b);

struct Margin {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool ok = false;
  bool lower = false;  // measured must exceed the bound
  // bound / measured, or measured / bound for lower bounds; >= 2 is a 2x margin
  double ratio() const;
};

struct CouplingReport {
  std::vector<Margin> hypotheses;
  std::vector<Margin> conclusions;
  std::vector<std::string> gate_failures;  // parameter relations that do not hold
  bool hypotheses_ok = false;
  bool conclusions_checked = false;        // false when the gate closed
  bool conclusions_ok = false;
  long long tail_pairs = 0;                // pairs beyond the decay cutoff
  double min_hypothesis_ratio() const;
  const Margin* hypothesis(const std::string& name) const;
};

struct Lemma1Params {
  double B = 1.0;
  double K = 1.0;
  double C = 2.0;
  double C_prime = 1.0;
  double c = 0.25;
};

// Covering lemma: entrywise block bounds on a cover with K-neighbourhood
// containment give |T^{-1}| < 2B and decay beyond (100 C' K)^{1/(1-c)}.
CouplingReport coupling_lemma1_check(const Eigen::MatrixXcd& T, const std::vector<CouplingPoint>& points,
                                     const std::vector<std::vector<size_t>>& cover,
                                     const Lemma1Params& prm);

struct Lemma2Params {
  double M = 1e10;
  double eps1 = 0.09, eps2 = 0.06, eps3 = 0.03;
  double rho = 1.0;
  double eps = 0.01;      // bound on S
  double C = 0.5;
  double c = 0.25;
  double rho_over_eps = 10.0;  // what "rho >> eps" means here
};

// Cluster lemma for T = D + S: separated clusters with bounded neighbourhood
// inverses and a diagonal floor elsewhere give ||T^{-1}|| < M^{C+1}/rho and
// decay e^{-|x|^c/10} beyond M^{2 eps1}.
CouplingReport coupling_lemma2_check(const Eigen::VectorXcd& D, const Eigen::MatrixXcd& S,
                                     const std::vector<CouplingPoint>& points,
                                     const std::vector<std::vector<size_t>>& clusters,
                                     const Lemma2Params& prm);

struct Lemma1Instance {
  Eigen::MatrixXcd T;
  std::vector<CouplingPoint> points;
  std::vector<std::vector<size_t>> cover;
  Lemma1Params params;
};

struct Lemma2Instance {
  Eigen::VectorXcd D;
  Eigen::MatrixXcd S;
  std::vector<CouplingPoint> points;
  std::vector<std::vector<size_t>> clusters;
  Lemma2Params params;
};

// Hermitian test matrices on {0..n-1} built to meet the hypotheses with a 2x margin.
Lemma1Instance synthetic_lemma1(uint64_t seed, int n = 200);
Lemma2Instance synthetic_lemma2(uint64_t seed, int n = 200);

}  // namespace fnls
