#pragma once

#include <array>
#include <compare>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>

namespace fnls {

inline constexpr int kMaxSpatialDim = 3;

class SizingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lattice index xi = (n, k) in Z^{d+1}.  Components 0..d-1 are n, component
// d is k; unused slots stay zero so the defaulted ordering is lexicographic.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int dim);
  MultiIndex(std::span<const int> n, int k);
  MultiIndex(std::initializer_list<int> n, int k);

  int dim() const { return dim_; }
  int n(int j) const { return c_[j]; }
  int k() const { return c_[dim_]; }
  void set_n(int j, int v) { c_[j] = v; }
  void set_k(int v) { c_[dim_] = v; }
  // axis in 0..d, axis d being k
  int axis(int a) const { return c_[a]; }
  void set_axis(int a, int v) { c_[a] = v; }
  std::span<const int> spatial() const { return {c_.data(), static_cast<size_t>(dim_)}; }

  int l1() const { return spatial_l1() + std::abs(k()); }
  int spatial_l1() const;
  long spatial_sq() const;

  MultiIndex operator-() const;
  MultiIndex operator+(const MultiIndex& o) const;
  MultiIndex operator-(const MultiIndex& o) const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

  std::string str() const;

 private:
  int dim_ = 0;
  std::array<int, kMaxSpatialDim + 1> c_{};
};

// <n> = sqrt(sum n_j^2 + 1)
double angle_weight(std::span<const int> n);
inline double angle_weight(const MultiIndex& xi) { return angle_weight(xi.spatial()); }

// Gamma_N / B(0,N): |n|_1 < N and |k| < N
inline bool in_box(const MultiIndex& xi, int radius) {
  return xi.spatial_l1() < radius && std::abs(xi.k()) < radius;
}

// smallest R with xi in the box of radius R
inline int box_radius_of(const MultiIndex& xi) {
  int a = xi.spatial_l1(), b = std::abs(xi.k());
  return (a > b ? a : b) + 1;
}

}  // namespace fnls
