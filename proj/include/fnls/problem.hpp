#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fnls/fourier_field.hpp"

namespace fnls {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal certificate or consistency check contradicted itself.
class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoGoodCellsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemParams {
  int dim = 1;
  double epsilon = 1e-4;
  double alpha = 4e-4;
  double omega = 1.5;
  FourierField forcing;
  GevreyParams gevrey{0.25, 2.0};
  // Multiplies the cubic term in F and in the linearized operator.  Test hook.
  double nonlinearity = 1.0;

  double eps23() const;
  double log_inv_eps() const;
  ProblemParams with_omega(double w) const;
  // violated existence hypotheses (alpha bound, ||P||_c < 1)
  std::vector<std::string> violations() const;
};

enum class RegimeChoice { kAuto, kNeumann, kMultiscale };

struct ScaleConstants {
  int M = 2;
  double c = 0.25;
  double C1 = 8.0;
  double C2 = 2.5;
  double C3 = 5.0;
  double delta = 0.2;
  int j0 = -1;  // -1: computed from epsilon
  bool paper_faithful = false;
  double rho = 0.25;          // cluster linkage constant
  double q_measure = 2.0;     // later-stage measure exponent
  int neumann_max_box = 8;    // relaxed regime switch
  RegimeChoice regime = RegimeChoice::kAuto;
  double cell_size = 0.0;     // 0: automatic schedule

  static double tilde_C(int d);
  static double tau(int d) { return d + 1.0; }
  int N(int j) const;  // M^j
  int resolved_j0(double epsilon) const;
  // Strict constraints that are violated; with paper_faithful set any entry is fatal.
  std::vector<std::string> violations(int d, double alpha) const;
  void validate(int d, double alpha) const;
};

int j0_from_epsilon(double epsilon, int M);

// B(N) = 2 exp((log N)^{C2})
double green_budget(int N, double C2);
// Relaxed exclusion threshold max(N^{-C1}, 4/B(N)); N^{-C1} under paper_faithful.
double exclusion_threshold(int N, const ScaleConstants& sc);

// Three-mode real forcing with ||P||_c = 0.5 (c = 0.25, weight factor 2).
FourierField bundled_forcing(int dim);

}  // namespace fnls
