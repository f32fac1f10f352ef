#include "fnls/nls_operator.hpp"

#include <cmath>

namespace fnls {

FourierField cubic_term(const FourierField& u) {
  return convolve(convolve(u, u), conjugate_flip(u));
}

double linear_symbol(const MultiIndex& xi, double omega) {
  return -xi.k() * omega + static_cast<double>(xi.spatial_sq()) + 1.0;
}

namespace {

FourierField map_linear(const FourierField& f, double omega, double sign) {
  std::vector<FourierField::Entry> out;
  out.reserve(f.size());
  for (const auto& [xi, a] : f.entries())
    out.emplace_back(xi, a * (sign * (-xi.k() * omega) + static_cast<double>(xi.spatial_sq()) + 1.0));
  return FourierField::from_entries(f.dim(), f.radius(), std::move(out));
}

}  // namespace

FourierField apply_F(const FourierField& u, const ProblemParams& p) {
  if (u.dim() != p.dim) throw std::invalid_argument("field dimension does not match problem");
  const double e = p.eps23();
  FourierField out = map_linear(u, p.omega, 1.0);
  if (p.nonlinearity != 0.0 && !u.empty())
    out = out + fractional_derivative(cubic_term(u), p.alpha).scaled(e * p.nonlinearity);
  else
    out = out.with_radius(std::max(out.radius(), 3 * u.radius()));
  return out - p.forcing.scaled(e);
}

LatticeOperator::LatticeOperator(int dim, int N, double omega, double alpha, double scale,
                                 OperatorMode mode, std::array<FourierField, 4> phi)
    : box_(dim, N), omega_(omega), alpha_(alpha), scale_(scale), mode_(mode), phi_(std::move(phi)) {
  phi_r_ = 1;
  for (const auto& f : phi_) {
    if (f.dim() != dim) throw std::invalid_argument("symbol dimension mismatch");
    phi_r_ = std::max(phi_r_, f.support_radius());
  }
  const int side = 2 * phi_r_ - 1;
  size_t cells = 1;
  for (int a = 0; a <= dim; ++a) cells *= side;
  for (int b = 0; b < 4; ++b) {
    table_[b].assign(cells, cplx(0.0, 0.0));
    for (const auto& [xi, a] : phi_[b].entries()) {
      size_t off = 0;
      for (int ax = 0; ax <= dim; ++ax) off = off * side + (xi.axis(ax) + phi_r_ - 1);
      table_[b][off] = a;
    }
  }
  const size_t n = box_.size();
  diag_.resize(2 * n);
  rowmult_.resize(2 * n);
  for (size_t i = 0; i < n; ++i) {
    const MultiIndex& xi = box_.site(i);
    const double lam = std::pow(angle_weight(xi), alpha_);
    const double base = static_cast<double>(xi.spatial_sq()) + 1.0;
    const double dp = -xi.k() * omega_ + base, dm = xi.k() * omega_ + base;
    if (mode_ == OperatorMode::kT) {
      diag_[i] = dp;
      diag_[n + i] = dm;
      rowmult_[i] = rowmult_[n + i] = lam;
    } else {
      diag_[i] = dp / lam;
      diag_[n + i] = dm / lam;
      rowmult_[i] = rowmult_[n + i] = 1.0;
    }
  }
}

int LatticeOperator::phi_radius() const { return phi_r_; }

cplx LatticeOperator::symbol(int s, int s2, const MultiIndex& diff) const {
  for (int ax = 0; ax <= diff.dim(); ++ax)
    if (std::abs(diff.axis(ax)) > phi_r_ - 1) return {0.0, 0.0};
  const int side = 2 * phi_r_ - 1;
  size_t off = 0;
  for (int ax = 0; ax <= diff.dim(); ++ax) off = off * side + (diff.axis(ax) + phi_r_ - 1);
  return table_[2 * s + s2][off];
}

cplx LatticeOperator::entry(size_t row, size_t col) const {
  cplx v = scale_ * rowmult_[row] * symbol(sign_of(row), sign_of(col), site_of(row) - site_of(col));
  if (row == col) v += diag_[row];
  return v;
}

Eigen::MatrixXcd LatticeOperator::block(const std::vector<size_t>& rows,
                                        const std::vector<size_t>& cols) const {
  Eigen::MatrixXcd A(rows.size(), cols.size());
  for (size_t j = 0; j < cols.size(); ++j)
    for (size_t i = 0; i < rows.size(); ++i) A(i, j) = entry(rows[i], cols[j]);
  return A;
}

Eigen::MatrixXcd LatticeOperator::toeplitz_block(const std::vector<size_t>& rows,
                                                 const std::vector<size_t>& cols) const {
  Eigen::MatrixXcd A(rows.size(), cols.size());
  for (size_t j = 0; j < cols.size(); ++j)
    for (size_t i = 0; i < rows.size(); ++i)
      A(i, j) = symbol(sign_of(rows[i]), sign_of(cols[j]), site_of(rows[i]) - site_of(cols[j]));
  return A;
}

Eigen::MatrixXcd LatticeOperator::materialize(size_t cap) const {
  if (rows() > cap)
    throw SizingError("operator with " + std::to_string(rows()) + " rows exceeds dense cap " +
                      std::to_string(cap));
  const size_t n = rows();
  Eigen::MatrixXcd A(n, n);
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i) A(i, j) = entry(i, j);
  return A;
}

nlohmann::json LatticeOperator::to_json(size_t cap) const {
  Eigen::MatrixXcd A = materialize(cap);
  nlohmann::json legend = nlohmann::json::array(), entries = nlohmann::json::array();
  for (size_t r = 0; r < rows(); ++r) {
    nlohmann::json row = {sign_of(r) == 0 ? 1 : -1};
    for (int ax = 0; ax <= dim(); ++ax) row.push_back(site_of(r).axis(ax));
    legend.push_back(std::move(row));
  }
  for (size_t i = 0; i < rows(); ++i)
    for (size_t j = 0; j < rows(); ++j)
      if (A(i, j) != cplx(0.0, 0.0)) entries.push_back({i, j, A(i, j).real(), A(i, j).imag()});
  return {{"dim", dim()},
          {"radius", N()},
          {"mode", mode_ == OperatorMode::kT ? "T" : "T_tilde"},
          {"omega", omega_},
          {"rows", rows()},
          {"legend", std::move(legend)},
          {"entries", std::move(entries)}};
}

std::array<FourierField, 4> toeplitz_symbols(const FourierField& u) {
  FourierField upp = convolve(u, conjugate_flip(u)).scaled(2.0).with_real_flag(true);
  FourierField upm = convolve(u, u);
  FourierField ump = conjugate_flip(upm);
  return {upp, upm, ump, upp};
}

LatticeOperator build_operator(const FourierField& u, const ProblemParams& p, int N,
                               OperatorMode mode) {
  if (u.support_radius() > N) throw std::invalid_argument("operator box smaller than field support");
  return LatticeOperator(p.dim, N, p.omega, p.alpha, p.eps23() * p.nonlinearity, mode,
                         toeplitz_symbols(u));
}

std::pair<FourierField, FourierField> apply_T_fields(const FourierField& u, const ProblemParams& p,
                                                     const FourierField& w1,
                                                     const FourierField& w2) {
  FourierField a = map_linear(w1, p.omega, 1.0);
  FourierField b = map_linear(w2, p.omega, -1.0);
  const double s = p.eps23() * p.nonlinearity;
  if (s != 0.0 && !u.empty()) {
    auto phi = toeplitz_symbols(u);
    a = a + fractional_derivative(convolve(phi[0], w1) + convolve(phi[1], w2), p.alpha).scaled(s);
    b = b + fractional_derivative(convolve(phi[2], w1) + convolve(phi[3], w2), p.alpha).scaled(s);
  }
  return {a, b};
}

}  // namespace fnls
