#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fnls/initial_guess.hpp"
#include "fnls/multiscale.hpp"

namespace fnls {

// (w1 on sign 0, w2 on sign 1) restricted to the box, in operator row order.
Eigen::VectorXcd pair_to_vector(const FourierField& w1, const FourierField& w2, const LatticeBox& box);
std::pair<FourierField, FourierField> vector_to_pair(const Eigen::VectorXcd& x, const LatticeBox& box);

struct NewtonStepResult {
  FourierField u_next;
  FourierField v;
  FourierField w1, w2;         // solved pair
  double w_norm = 0.0;
  double conjugacy_defect = 0.0;   // ||w2 - conj-flip w1||
  double v_norm = 0.0;
  double v_budget = 0.0;           // e^{-(3/2)(M^{j+1})^c}
  bool v_within_budget = false;
  int support_radius = 0;          // of F(u_j)
  double support_bound = 0.0;      // M^{j+1} / 4
  bool support_ok = false;
};

// One Newton step on the box N = M^{j+1}: w = T-tilde^{-1} Lambda^{-1} Q with
// Q = (-F(u), -conj-flip F(u)).  `green_tilde` is T-tilde_N^{-1} for u at p.omega.
NewtonStepResult newton_step(const FourierField& u, const ProblemParams& p, const ScaleConstants& sc,
                             int j, const Eigen::MatrixXcd& green_tilde);

struct DecompositionReport {
  int N = 0;
  double direct_norm = 0.0;       // ||F(u + v)||
  double outside = 0.0;           // ||(I - P_N) F(u)||
  double in_box_defect = 0.0;
  double tail_inner = 0.0;        // ||(I - P_N) T P_{N/2} w||
  double tail_outer = 0.0;        // ||(I - P_N) T (I - P_{N/2}) w||
  double remainder = 0.0;         // cubic remainder in v
  double mismatch[2] = {0.0, 0.0};  // both components
  double tolerance = 0.0;         // 1e-9 max(||F(u)||, ||F(u+v)||, eps^{2/3} ||P||)
  bool ok = false;
};

// F(u + v) directly and through the tail/commutator decomposition.  The in-box
// part uses the lattice operator; everything outside uses field convolutions.
DecompositionReport residual_decomposition_check(const FourierField& u, const NewtonStepResult& step,
                                                 const ProblemParams& p, int N);

struct TheoremReport {
  double epsilon = 0.0;
  double weighted_sum = 0.0;  // sum |eps^{1/3} u_hat| e^{(1/2)|xi|^c}
  double constant = 0.0;      // weighted_sum / eps^{1/4}
};
TheoremReport theorem_check(const FourierField& u, const ProblemParams& p, double c);

struct AuditEntry {
  int j = 0;
  double omega = 0.0;
  std::string check;
  double value = 0.0;
  double bound = 0.0;
  bool ok = false;
  std::string mode;  // "paper" under paper_faithful, else "relaxed"
};

struct StepRecord {
  int j = 0;
  int N = 0;
  double omega = 0.0;
  std::string regime;
  GreenCertificate cert;
  int neumann_terms = 0;
  double neumann_ratio = 0.0;
  bool floor_ok = false;
  int tiles = 0, clusters = 0, paving_iterations = 0;
  bool q0_from_prior = false;
  bool perturbation_ok = false;
  double residual_before = 0.0;
  double residual_after = 0.0;
  double truncation_floor = 0.0;
  double contraction_ratio = 0.0;  // ||F_{j+1}|| / ||F_j||^{1.5}
  bool contraction_ok = false;     // ||F_{j+1}|| <= max(5 ||F_j||^{1.5}, floor)
  double v_norm = 0.0, v_budget = 0.0;
  double w_norm = 0.0, conjugacy_defect = 0.0;
  int support_radius = 0;
  double support_bound = 0.0;
  bool support_ok = false;
  DecompositionReport decomposition;
  double lipschitz = -1.0;  // -1 when not probed
};

struct CellOutcome {
  Interval cell;
  bool kept = false;
  std::string reason;  // empty when kept; resonance | eigenvalue | green-bound
};

struct StageMeasure {
  int j = 0;
  int N = 0;  // N_{j+1}
  std::string regime;
  double measure_lambda = 0.0;        // Lambda_j
  double measure_prime = 0.0;         // Lambda_j'
  double measure_next = 0.0;          // Lambda_{j+1}
  double excluded_resonance = 0.0;
  double excluded_eigenvalue = 0.0;
  double excluded_green = 0.0;
  double budget = 0.0;                // N_{j+1}^{-q}
  double dilation_loss = 0.0;
  int cells = 0;
  double cell_size = 0.0;
  std::vector<CellOutcome> cell_log;  // Lambda_j pieces, kept or excluded with reason
  double excluded() const { return excluded_resonance + excluded_eigenvalue + excluded_green; }
  std::string dominant_reason() const;
};

struct TrackedOmega {
  double omega = 0.0;
  FourierField u;
  bool alive = true;
  std::string drop_reason;
  std::vector<double> residuals;
  InitialGuessResult initial;
  std::map<int, OlderInverse> green_cache;  // step j -> T-tilde^{-1} on N_{j+1}
  std::optional<FourierField> shadow;       // solution at omega + h
};

struct DriverOptions {
  int j_max = 6;
  int min_advances = 3;
  double residual_target = 1e-12;
  size_t dense_oracle_max_rows = 2500;
  size_t exclusion_cell_cap = 10000;
  bool lipschitz_probe = false;
  double lipschitz_h = 1e-8;
  NormOptions norm;
};

struct IterationState {
  ProblemParams p;
  ScaleConstants sc;
  int j0 = 1;
  int j = 1;
  GoodSetReport initial;
  IntervalSet lambda;                  // Lambda_j
  std::vector<IntervalSet> lambda_history;
  std::vector<TrackedOmega> tracked;
  std::vector<StepRecord> steps;
  std::vector<StageMeasure> stages;
  std::vector<ExclusionRecord> exclusions;  // nonempty records only
  std::vector<int> exclusion_stage;         // j of each record
  std::vector<AuditEntry> audit;
  int advances = 0;
  bool converged = false;
  size_t alive() const;
};

// Lambda_{j0}, u_{j0} at every tracked omega, audit of the initial stage.
IterationState initialize(const ProblemParams& p, const ScaleConstants& sc,
                          const std::vector<double>& omegas, const DriverOptions& opt = {});
// Lambda_j' and Lambda_{j+1}, a Newton step per tracked omega, audit.
void advance_scale(IterationState& s, const DriverOptions& opt = {});
bool should_stop(const IterationState& s, const DriverOptions& opt);
IterationState run_newton(const ProblemParams& p, const ScaleConstants& sc,
                          const std::vector<double>& omegas, const DriverOptions& opt = {});

// Regime of the step j -> j+1.
bool uses_neumann(const ProblemParams& p, const ScaleConstants& sc, int N);

// Eigenvalue-window exclusion on Lambda_j for the box N_{j+1} with symbols from u.
struct MultiscaleExclusion {
  IntervalSet excluded;
  std::vector<Interval> cells;  // tiling of the hull of Lambda_j, cells missing Lambda_j dropped
  double cell_size = 0.0;
  std::vector<ExclusionRecord> records;  // nonempty only
};
MultiscaleExclusion multiscale_exclusion(const IntervalSet& lambda, const FourierField& u,
                                         const ProblemParams& p, const ScaleConstants& sc, int j,
                                         size_t cell_cap = 10000);

}  // namespace fnls
