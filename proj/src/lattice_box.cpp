#include "fnls/lattice_box.hpp"

#include <cstdlib>

namespace fnls {

LatticeBox::LatticeBox(int dim, int radius) : dim_(dim), radius_(radius) {
  if (radius < 1) throw std::invalid_argument("box radius must be >= 1");
  const int side = 2 * radius - 1;
  size_t cells = 1;
  for (int a = 0; a <= dim; ++a) cells *= side;
  if (cells > (size_t{1} << 28)) throw SizingError("lattice box too large");
  table_.assign(cells, -1);
  MultiIndex xi(dim);
  for (size_t off = 0; off < cells; ++off) {
    size_t rem = off;
    for (int a = dim; a >= 0; --a) {
      xi.set_axis(a, static_cast<int>(rem % side) - (radius - 1));
      rem /= side;
    }
    if (in_box(xi, radius)) {
      table_[off] = static_cast<int32_t>(sites_.size());
      sites_.push_back(xi);
    }
  }
}

size_t LatticeBox::cube_offset(const MultiIndex& xi) const {
  const int side = 2 * radius_ - 1;
  size_t off = 0;
  for (int a = 0; a <= dim_; ++a) off = off * side + static_cast<size_t>(xi.axis(a) + radius_ - 1);
  return off;
}

size_t LatticeBox::position(const MultiIndex& xi) const {
  if (xi.dim() != dim_ || !in_box(xi, radius_)) return npos;
  int32_t p = table_[cube_offset(xi)];
  return p < 0 ? npos : static_cast<size_t>(p);
}

}  // namespace fnls
