#pragma once

#include <span>
#include <vector>

namespace fnls {

inline constexpr double kOmegaMin = 1.0;
inline constexpr double kOmegaMax = 2.0;

struct Interval {
  double a = 0.0, b = 0.0;
  double length() const { return b - a; }
  double center() const { return 0.5 * (a + b); }
  bool contains(double w) const { return a <= w && w <= b; }
  bool operator==(const Interval&) const = default;
};

// Finite union of disjoint closed subintervals of [1,2], sorted.  Inputs are
// clipped to [1,2]; touching or overlapping pieces merge; empty pieces drop.
class IntervalSet {
 public:
  static constexpr size_t npos = static_cast<size_t>(-1);

  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> pieces);
  static IntervalSet unit() { return IntervalSet({{kOmegaMin, kOmegaMax}}); }

  const std::vector<Interval>& intervals() const { return iv_; }
  size_t size() const { return iv_.size(); }
  bool empty() const { return iv_.empty(); }
  double measure() const;
  bool contains(double w) const { return component_of(w) != npos; }
  size_t component_of(double w) const;

 private:
  std::vector<Interval> iv_;
};

IntervalSet unite(const IntervalSet& x, const IntervalSet& y);
IntervalSet union_all(const std::vector<IntervalSet>& sets);
IntervalSet union_all(std::vector<Interval> pieces);
IntervalSet intersect(const IntervalSet& x, const IntervalSet& y);
IntervalSet complement_in(const IntervalSet& x);  // within [1,2]
IntervalSet difference(const IntervalSet& x, const IntervalSet& y);
inline double measure(const IntervalSet& x) { return x.measure(); }

// Cells of the given width tiling each component, anchored at its left end.
std::vector<Interval> partition_cells(const IntervalSet& set, double cell,
                                      size_t max_cells = size_t{1} << 26);
Interval dilate(const Interval& cell, double factor);

// {w in [1,2] : |-k w + |n|_2^2 + 1| < eta}
IntervalSet resonance_interval(std::span<const int> n, int k, double eta);
Interval resonance_window(long n_sq, int k, double eta);  // unclipped, empty if k == 0

}  // namespace fnls
