#pragma once

#include <string>
#include <vector>

#include "fnls/fourier_field.hpp"
#include "fnls/intervals.hpp"
#include "fnls/problem.hpp"

namespace fnls {

// (log 1/eps)^{-1} (1+|k|)^{-tau}
double divisor_threshold(const ProblemParams& p, int k);
// Union of R_{n,k} over |n|_1 < Nbox, |k| < Nbox.
IntervalSet resonance_union(const ProblemParams& p, int Nbox, double threshold_scale = 1.0);
// Largest 2^{-m} (m >= 3) with h (Nbox-1) <= eta_min / 2, so every point of a
// kept cell keeps half the divisor threshold.
double auto_cell_size(const ProblemParams& p, int Nbox);

struct WitnessCell {
  Interval cell;
  bool witness = false;
  Interval kept;  // dilated cell when witness holds
};

struct GoodSetReport {
  int Nbox = 1;
  double cell_size = 0.0;
  double dilation = 1.0;
  IntervalSet base;
  IntervalSet resonances;
  IntervalSet good;
  std::vector<WitnessCell> cells;
  double measure_excluded = 0.0;  // mes(base) - mes(good)
};

// Keeps the dilation of every cell of `base` holding a positive-measure set of
// witnesses that clear every divisor in the box.
GoodSetReport witness_good_set(const IntervalSet& base, const ProblemParams& p, int Nbox,
                               double cell_size, double dilation, double threshold_scale = 1.0);

double j0_cell_size(const ProblemParams& p, const ScaleConstants& sc);
double j0_dilation(int j0);
GoodSetReport build_good_set_j0(const ProblemParams& p, const ScaleConstants& sc,
                                double threshold_scale = 1.0);

struct InitialGuessResult {
  FourierField u0;
  int j0 = 1;
  int box = 1;
  double residual_norm = 0.0;
  double residual_budget = 0.0;
  bool residual_within_budget = false;
  double decay_C = 0.0;
  double decay_eta = 1.0;
  double theta = 0.0;           // exponent loss in |u0| < eps^{2/3-theta} e^{-(3/2)|xi|^c}
  double min_divisor_ratio = 0.0;  // min |divisor| / ((1/2) threshold) over the box
  double cubic_norm = 0.0;      // ||eps^{2/3} D^alpha(|u0|^2 u0)||
  double tail_norm = 0.0;       // eps^{2/3} ||(1 - Gamma) P||
};

InitialGuessResult build_u0(const ProblemParams& p, const ScaleConstants& sc, double omega);

// One row per cell; `certified` holds (omega, residual) pairs reported in their cell.
std::string initial_stage_csv(const GoodSetReport& r,
                              const std::vector<std::pair<double, double>>& certified);

}  // namespace fnls
