#include "fnls/toeplitz_fft.hpp"

#include <fftw3.h>

#include <cstring>

namespace fnls {

namespace {

int good_fft_length(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace

struct ToeplitzApplier::Impl {
  size_t cells = 0;
  size_t nsites = 0;
  std::vector<size_t> grid_of_site;
  std::array<std::vector<cplx>, 4> kernel;
  fftw_complex* in[2] = {nullptr, nullptr};
  fftw_complex* out = nullptr;
  fftw_plan fwd[2] = {nullptr, nullptr};
  fftw_plan bwd = nullptr;

  ~Impl() {
    for (auto& p : fwd)
      if (p) fftw_destroy_plan(p);
    if (bwd) fftw_destroy_plan(bwd);
    for (auto& b : in)
      if (b) fftw_free(b);
    if (out) fftw_free(out);
  }
};

ToeplitzApplier::ToeplitzApplier(const LatticeOperator& op) : impl_(std::make_unique<Impl>()) {
  const int d = op.dim();
  L_ = good_fft_length(2 * op.N() + 2 * op.phi_radius() - 3);
  Impl& m = *impl_;
  m.cells = 1;
  for (int a = 0; a <= d; ++a) m.cells *= L_;
  auto wrap = [&](const MultiIndex& xi) {
    size_t off = 0;
    for (int a = 0; a <= d; ++a) off = off * L_ + static_cast<size_t>(((xi.axis(a) % L_) + L_) % L_);
    return off;
  };
  m.nsites = op.box().size();
  m.grid_of_site.resize(m.nsites);
  for (size_t i = 0; i < m.nsites; ++i) m.grid_of_site[i] = wrap(op.box().site(i));

  std::vector<int> dims(d + 1, L_);
  for (auto& b : m.in) b = fftw_alloc_complex(m.cells);
  m.out = fftw_alloc_complex(m.cells);
  for (int s = 0; s < 2; ++s)
    m.fwd[s] = fftw_plan_dft(d + 1, dims.data(), m.in[s], m.in[s], FFTW_FORWARD, FFTW_ESTIMATE);
  m.bwd = fftw_plan_dft(d + 1, dims.data(), m.out, m.out, FFTW_BACKWARD, FFTW_ESTIMATE);

  const double inv = 1.0 / static_cast<double>(m.cells);
  for (int b = 0; b < 4; ++b) {
    std::memset(m.in[0], 0, sizeof(fftw_complex) * m.cells);
    for (const auto& [xi, a] : op.phi()[b].entries()) {
      size_t off = wrap(xi);
      m.in[0][off][0] = a.real() * inv;
      m.in[0][off][1] = a.imag() * inv;
    }
    fftw_execute(m.fwd[0]);
    const cplx* src = reinterpret_cast<const cplx*>(m.in[0]);
    m.kernel[b].assign(src, src + m.cells);
  }
}

ToeplitzApplier::~ToeplitzApplier() = default;

void ToeplitzApplier::apply(const cplx* x, cplx* y) const {
  Impl& m = *impl_;
  for (int s = 0; s < 2; ++s) {
    std::memset(m.in[s], 0, sizeof(fftw_complex) * m.cells);
    const cplx* xs = x + s * m.nsites;
    for (size_t i = 0; i < m.nsites; ++i) {
      m.in[s][m.grid_of_site[i]][0] = xs[i].real();
      m.in[s][m.grid_of_site[i]][1] = xs[i].imag();
    }
    fftw_execute(m.fwd[s]);
  }
  const cplx* X0 = reinterpret_cast<const cplx*>(m.in[0]);
  const cplx* X1 = reinterpret_cast<const cplx*>(m.in[1]);
  cplx* Y = reinterpret_cast<cplx*>(m.out);
  for (int s = 0; s < 2; ++s) {
    const cplx* k0 = m.kernel[2 * s].data();
    const cplx* k1 = m.kernel[2 * s + 1].data();
    for (size_t c = 0; c < m.cells; ++c) Y[c] = k0[c] * X0[c] + k1[c] * X1[c];
    fftw_execute(m.bwd);
    cplx* ys = y + s * m.nsites;
    for (size_t i = 0; i < m.nsites; ++i) ys[i] = Y[m.grid_of_site[i]];
  }
}

Eigen::MatrixXcd ToeplitzApplier::apply(const Eigen::MatrixXcd& X) const {
  Eigen::MatrixXcd Y(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) apply(X.col(j).data(), Y.col(j).data());
  return Y;
}

}  // namespace fnls
