#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "fnls/multi_index.hpp"

namespace fnls {

using cplx = std::complex<double>;

struct GevreyParams {
  double c = 0.25;
  double weight_factor = 1.0;
  void validate() const;
};

// Sparse coefficient map on Z^{d+1}, entries sorted by index, every index
// inside the box of the declared radius.  Immutable once built.
class FourierField {
 public:
  using Entry = std::pair<MultiIndex, cplx>;

  FourierField() = default;
  FourierField(int dim, int radius);
  // Duplicate indices are summed.  Exact zeros are dropped.
  static FourierField from_entries(int dim, int radius, std::vector<Entry> entries,
                                   bool real_valued = false);
  static FourierField single_mode(const MultiIndex& xi, cplx a, int radius);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  bool real_valued() const { return real_valued_; }
  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  cplx coeff(const MultiIndex& xi) const;
  double l2_norm() const;
  double max_abs() const;
  // smallest box radius holding every nonzero entry (0 for the zero field)
  int support_radius() const;

  FourierField with_radius(int radius) const;
  FourierField scaled(cplx a) const;
  FourierField with_real_flag(bool flag) const;

  friend FourierField operator+(const FourierField& a, const FourierField& b);
  friend FourierField operator-(const FourierField& a, const FourierField& b);

 private:
  int dim_ = 1;
  int radius_ = 1;
  bool real_valued_ = false;
  std::vector<Entry> entries_;
};

// Default hard cap on the support radius produced by convolve.
inline constexpr int kDefaultSupportCap = 512;

FourierField fractional_derivative(const FourierField& f, double alpha);
double gevrey_norm(const FourierField& f, const GevreyParams& g);
FourierField project(const FourierField& f, int N);
FourierField convolve(const FourierField& f, const FourierField& g,
                      int support_cap = kDefaultSupportCap);
FourierField conjugate_flip(const FourierField& f);

}  // namespace fnls
