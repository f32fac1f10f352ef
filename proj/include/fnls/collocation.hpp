#pragma once

#include "fnls/problem.hpp"

namespace fnls {

struct CollocationResult {
  int grid = 0;         // points per axis
  int K = 0;            // highest frequency of |u|^2 u per axis
  double residual = 0.0;
  double relative = 0.0;  // residual / (eps^{2/3} ||P||), or residual when P = 0
};

// L2 norm of F(u) evaluated on a uniform grid of the (d+1)-torus: u and
// |u|^2 u by separable direct exponential sums, the linear symbols and D^alpha
// applied to the grid transform.  grid = 0 picks 8K+1; below 2K+1 aliasing
// would enter and the call throws ConfigError.
CollocationResult collocation_residual(const FourierField& u, const ProblemParams& p, int grid = 0);

}  // namespace fnls
