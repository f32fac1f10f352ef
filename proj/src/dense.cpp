#include "fnls/dense.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include <random>
#include <string>

#include "fnls/problem.hpp"

namespace fnls {

#if defined(__SSE__)
FlushSubnormals::FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
FlushSubnormals::~FlushSubnormals() { _mm_setcsr(saved_); }
#else
FlushSubnormals::FlushSubnormals() = default;
FlushSubnormals::~FlushSubnormals() = default;
#endif

Eigen::MatrixXcd dense_inverse(Eigen::MatrixXcd A) {
  FlushSubnormals ftz;
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (A.rows() != A.cols()) throw std::invalid_argument("inverse of a non-square matrix");
  if (n == 0) return A;
  std::vector<lapack_int> piv(n);
  lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, A.data(), n, piv.data());
  if (info > 0) throw CertificateError("matrix is singular in LU factorization");
  if (info < 0) throw std::runtime_error("zgetrf argument error " + std::to_string(info));
  info = LAPACKE_zgetri(LAPACK_COL_MAJOR, n, A.data(), n, piv.data());
  if (info != 0) throw CertificateError("zgetri failed with info " + std::to_string(info));
  return A;
}

Eigen::VectorXd hermitian_eigenvalues(Eigen::MatrixXcd A) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, A.data(), n, w.data());
  if (info != 0) throw std::runtime_error("zheevd failed with info " + std::to_string(info));
  return w;
}

Eigen::VectorXd singular_values(Eigen::MatrixXcd A) {
  const lapack_int m = static_cast<lapack_int>(A.rows()), n = static_cast<lapack_int>(A.cols());
  Eigen::VectorXd s(std::min(m, n));
  if (s.size() == 0) return s;
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, A.data(), m, s.data(), nullptr, 1,
                                   nullptr, 1);
  if (info != 0) throw std::runtime_error("zgesdd failed with info " + std::to_string(info));
  return s;
}

double power_iteration_norm(const Eigen::MatrixXcd& A, const NormOptions& opt) {
  const Eigen::Index n = A.cols();
  if (n == 0) return 0.0;
  const Eigen::Index b = std::min<Eigen::Index>(opt.block, n);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd X(n, b);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = {g(rng), g(rng)};
  auto orth = [&](const Eigen::MatrixXcd& Z) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
    return Eigen::MatrixXcd(qr.householderQ() * Eigen::MatrixXcd::Identity(Z.rows(), Z.cols()));
  };
  X = orth(X);
  double prev = 0.0, est = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    Eigen::MatrixXcd Z = A.adjoint() * (A * X);
    Eigen::MatrixXcd H = X.adjoint() * Z;
    H = 0.5 * (H + H.adjoint()).eval();
    est = std::sqrt(std::max(0.0, hermitian_eigenvalues(H).maxCoeff()));
    if (it > 0 && std::abs(est - prev) <= opt.tol * est) break;
    prev = est;
    X = orth(Z);
  }
  return est;
}

double operator_norm(const Eigen::MatrixXcd& A, const NormOptions& opt) {
  if (static_cast<size_t>(std::max(A.rows(), A.cols())) <= opt.dense_cap) {
    auto s = singular_values(A);
    return s.size() ? s(0) : 0.0;
  }
  return power_iteration_norm(A, opt);
}

}  // namespace fnls
