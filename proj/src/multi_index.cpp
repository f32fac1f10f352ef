#include "fnls/multi_index.hpp"

#include <cmath>

namespace fnls {

MultiIndex::MultiIndex(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxSpatialDim)
    throw std::invalid_argument("spatial dimension must be in 1.." + std::to_string(kMaxSpatialDim));
}

MultiIndex::MultiIndex(std::span<const int> n, int k) : MultiIndex(static_cast<int>(n.size())) {
  for (int j = 0; j < dim_; ++j) c_[j] = n[j];
  c_[dim_] = k;
}

MultiIndex::MultiIndex(std::initializer_list<int> n, int k)
    : MultiIndex(std::span<const int>(n.begin(), n.size()), k) {}

int MultiIndex::spatial_l1() const {
  int s = 0;
  for (int j = 0; j < dim_; ++j) s += std::abs(c_[j]);
  return s;
}

long MultiIndex::spatial_sq() const {
  long s = 0;
  for (int j = 0; j < dim_; ++j) s += static_cast<long>(c_[j]) * c_[j];
  return s;
}

MultiIndex MultiIndex::operator-() const {
  MultiIndex r = *this;
  for (int a = 0; a <= dim_; ++a) r.c_[a] = -c_[a];
  return r;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  MultiIndex r = *this;
  for (int a = 0; a <= dim_; ++a) r.c_[a] += o.c_[a];
  return r;
}

MultiIndex MultiIndex::operator-(const MultiIndex& o) const {
  MultiIndex r = *this;
  for (int a = 0; a <= dim_; ++a) r.c_[a] -= o.c_[a];
  return r;
}

std::string MultiIndex::str() const {
  std::string s = "(";
  for (int j = 0; j < dim_; ++j) s += std::to_string(c_[j]) + (j + 1 < dim_ ? "," : "");
  return s + ";" + std::to_string(k()) + ")";
}

double angle_weight(std::span<const int> n) {
  double s = 1.0;
  for (int v : n) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

}  // namespace fnls
