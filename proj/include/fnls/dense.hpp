#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace fnls {

// Flushes subnormal results and inputs to zero while alive (x86 MXCSR).
// Fill-in of decaying inverses otherwise runs through subnormal arithmetic.
class FlushSubnormals {
 public:
  FlushSubnormals();
  ~FlushSubnormals();
  FlushSubnormals(const FlushSubnormals&) = delete;
  FlushSubnormals& operator=(const FlushSubnormals&) = delete;

 private:
  unsigned saved_ = 0;
};

// LU inverse (zgetrf/zgetri); throws CertificateError on exact singularity.
Eigen::MatrixXcd dense_inverse(Eigen::MatrixXcd A);
// Ascending eigenvalues of a Hermitian matrix (zheevd, lower triangle used).
Eigen::VectorXd hermitian_eigenvalues(Eigen::MatrixXcd A);
// Descending singular values (zgesdd).
Eigen::VectorXd singular_values(Eigen::MatrixXcd A);

struct NormOptions {
  size_t dense_cap = 1024;
  double tol = 1e-8;
  int max_iter = 10000;
  int block = 8;
  uint64_t seed = 0x5eed;
};

// Largest singular value: dense SVD up to the cap, block power iteration above.
double operator_norm(const Eigen::MatrixXcd& A, const NormOptions& opt = {});
double power_iteration_norm(const Eigen::MatrixXcd& A, const NormOptions& opt = {});

}  // namespace fnls
