#pragma once

#include <cstdint>
#include <vector>

#include "fnls/multi_index.hpp"

namespace fnls {

// Sites of the box |n|_1 < R, |k| < R in lexicographic order, with O(1)
// position lookup through a cube table.
class LatticeBox {
 public:
  static constexpr size_t npos = static_cast<size_t>(-1);

  LatticeBox() = default;
  LatticeBox(int dim, int radius);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  size_t size() const { return sites_.size(); }
  const MultiIndex& site(size_t i) const { return sites_[i]; }
  const std::vector<MultiIndex>& sites() const { return sites_; }
  size_t position(const MultiIndex& xi) const;
  bool contains(const MultiIndex& xi) const { return position(xi) != npos; }

 private:
  int dim_ = 1;
  int radius_ = 0;
  std::vector<MultiIndex> sites_;
  std::vector<int32_t> table_;
  size_t cube_offset(const MultiIndex& xi) const;
};

}  // namespace fnls
