#pragma once

#include <memory>

#include <Eigen/Dense>

#include "fnls/nls_operator.hpp"

namespace fnls {

// Applies the unscaled block-Toeplitz part S of an operator through FFTs on a
// periodic grid large enough to avoid wrap-around.  Holds scratch buffers, so
// one instance must not be shared between threads.
class ToeplitzApplier {
 public:
  explicit ToeplitzApplier(const LatticeOperator& op);
  ~ToeplitzApplier();
  ToeplitzApplier(const ToeplitzApplier&) = delete;
  ToeplitzApplier& operator=(const ToeplitzApplier&) = delete;

  // y = S x for vectors of length op.rows()
  void apply(const cplx* x, cplx* y) const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& X) const;
  int grid_length() const { return L_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int L_ = 0;
};

}  // namespace fnls
