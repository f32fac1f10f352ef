#include "fnls/problem.hpp"

#include <cmath>
#include <sstream>

namespace fnls {

double ProblemParams::eps23() const { return std::cbrt(epsilon * epsilon); }

double ProblemParams::log_inv_eps() const { return std::log(1.0 / epsilon); }

ProblemParams ProblemParams::with_omega(double w) const {
  ProblemParams p = *this;
  p.omega = w;
  return p;
}

std::vector<std::string> ProblemParams::violations() const {
  std::vector<std::string> out;
  const double bound = 1.0 / (30.0 * (dim * ScaleConstants::tilde_C(dim) + 2.0));
  if (!(alpha < bound)) {
    std::ostringstream os;
    os << "alpha = " << alpha << " is not below 1/(30(d*Ctilde_d+2)) = " << bound;
    out.push_back(os.str());
  }
  const double pc = gevrey_norm(forcing, gevrey);
  if (!(pc < 1.0)) {
    std::ostringstream os;
    os << "||P||_c = " << pc << " is not below 1";
    out.push_back(os.str());
  }
  return out;
}

double ScaleConstants::tilde_C(int d) { return std::pow(2.0 * d + 2.0, d + 2.0); }

int ScaleConstants::N(int j) const {
  double v = std::pow(static_cast<double>(M), j);
  if (v > 1 << 20) throw SizingError("scale M^j too large");
  return static_cast<int>(std::lround(v));
}

int j0_from_epsilon(double epsilon, int M) {
  const double l = std::log(1.0 / epsilon);
  if (l <= 1.0) return 0;
  return std::max(0, static_cast<int>(std::floor(std::log(l) / (2.0 * std::log(M)))));
}

int ScaleConstants::resolved_j0(double epsilon) const {
  if (j0 >= 0) return j0;
  const int j = j0_from_epsilon(epsilon, M);
  return paper_faithful ? j : std::max(1, j);
}

std::vector<std::string> ScaleConstants::violations(int d, double alpha) const {
  std::vector<std::string> out;
  auto add = [&](bool ok, const std::string& what) {
    if (!ok) out.push_back(what);
  };
  add(M > 100, "M > 100");
  add(c < std::log(17.0 / 16.0) / std::log(static_cast<double>(M)), "c < log(17/16)/log M");
  add(C1 == 20.0 * d, "C1 = 20d");
  add(C2 > 2.0, "C2 > 2");
  add(C3 > C2 + 2.0, "C3 > C2 + 2");
  add(delta > alpha, "delta > alpha");
  add((d * tilde_C(d) + 2.0) * delta < 1.0 / 30.0, "(d*Ctilde_d + 2)*delta < 1/30");
  return out;
}

void ScaleConstants::validate(int d, double alpha) const {
  if (M < 2) throw ConfigError("M must be >= 2");
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("c must lie in (0,1)");
  if (!(C1 > 0 && C2 > 0 && C3 > 0)) throw ConfigError("C1, C2, C3 must be positive");
  if (!(delta > 0 && delta < 1)) throw ConfigError("delta must lie in (0,1)");
  if (!(rho > 0)) throw ConfigError("rho must be positive");
  if (neumann_max_box < 1) throw ConfigError("neumann_max_box must be >= 1");
  if (cell_size < 0) throw ConfigError("cell_size must be >= 0");
  if (paper_faithful) {
    auto v = violations(d, alpha);
    if (!v.empty()) {
      std::string msg = "paper-faithful constants violated:";
      for (const auto& s : v) msg += " [" + s + "]";
      throw ConfigError(msg);
    }
  }
}

double green_budget(int N, double C2) {
  return 2.0 * std::exp(std::pow(std::log(static_cast<double>(N)), C2));
}

double exclusion_threshold(int N, const ScaleConstants& sc) {
  const double strict = std::pow(static_cast<double>(N), -sc.C1);
  if (sc.paper_faithful) return strict;
  return std::max(strict, 4.0 / green_budget(N, sc.C2));
}

FourierField bundled_forcing(int dim) {
  MultiIndex zero(dim);
  MultiIndex xi(dim);
  xi.set_n(0, 1);
  xi.set_k(2);
  const double weight = std::exp(2.0 * std::pow(3.0, 0.25));
  const cplx b = 0.125 / weight * cplx(0.6, 0.8);
  return FourierField::from_entries(dim, 3, {{zero, 0.25}, {xi, b}, {-xi, std::conj(b)}}, true);
}

}  // namespace fnls
