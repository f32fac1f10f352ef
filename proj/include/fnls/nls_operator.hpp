#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fnls/fourier_field.hpp"
#include "fnls/lattice_box.hpp"
#include "fnls/problem.hpp"

namespace fnls {

FourierField cubic_term(const FourierField& u);
// -k w + |n|_2^2 + 1
double linear_symbol(const MultiIndex& xi, double omega);
FourierField apply_F(const FourierField& u, const ProblemParams& p);

enum class OperatorMode { kT, kTilde };

// Row index (sign, site) -> sign * box.size() + site.  Sign 0 is the (+)
// component carrying v, sign 1 the conjugate component.
class LatticeOperator {
 public:
  // phi = {phi_{++}, phi_{+-}, phi_{-+}, phi_{--}}
  LatticeOperator(int dim, int N, double omega, double alpha, double scale, OperatorMode mode,
                  std::array<FourierField, 4> phi);

  const LatticeBox& box() const { return box_; }
  int N() const { return box_.radius(); }
  int dim() const { return box_.dim(); }
  size_t rows() const { return 2 * box_.size(); }
  double omega() const { return omega_; }
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }
  OperatorMode mode() const { return mode_; }
  const std::array<FourierField, 4>& phi() const { return phi_; }
  int phi_radius() const;

  int sign_of(size_t row) const { return row < box_.size() ? 0 : 1; }
  const MultiIndex& site_of(size_t row) const { return box_.site(row % box_.size()); }
  size_t row_of(int sign, size_t site) const { return sign * box_.size() + site; }

  // D (T mode) or D-tilde (T-tilde mode); excludes the Toeplitz diagonal.
  double diagonal(size_t row) const { return diag_[row]; }
  double row_multiplier(size_t row) const { return rowmult_[row]; }
  cplx symbol(int s, int s2, const MultiIndex& diff) const;
  cplx entry(size_t row, size_t col) const;

  Eigen::MatrixXcd block(const std::vector<size_t>& rows, const std::vector<size_t>& cols) const;
  // Toeplitz part S restricted to the index set (no scale, no row multiplier).
  Eigen::MatrixXcd toeplitz_block(const std::vector<size_t>& rows,
                                  const std::vector<size_t>& cols) const;
  Eigen::MatrixXcd materialize(size_t cap = 40000) const;

  nlohmann::json to_json(size_t cap = 40000) const;

 private:
  LatticeBox box_;
  double omega_, alpha_, scale_;
  OperatorMode mode_;
  std::array<FourierField, 4> phi_;
  int phi_r_ = 1;
  std::array<std::vector<cplx>, 4> table_;
  std::vector<double> diag_, rowmult_;
};

std::array<FourierField, 4> toeplitz_symbols(const FourierField& u);
LatticeOperator build_operator(const FourierField& u, const ProblemParams& p, int N,
                               OperatorMode mode);

// Linearized operator on the full lattice applied to the pair (w1, w2).
std::pair<FourierField, FourierField> apply_T_fields(const FourierField& u, const ProblemParams& p,
                                                     const FourierField& w1,
                                                     const FourierField& w2);

}  // namespace fnls
