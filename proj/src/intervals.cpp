#include "fnls/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fnls/multi_index.hpp"

namespace fnls {

IntervalSet::IntervalSet(std::vector<Interval> pieces) {
  for (auto& p : pieces) {
    p.a = std::max(p.a, kOmegaMin);
    p.b = std::min(p.b, kOmegaMax);
  }
  std::erase_if(pieces, [](const Interval& p) { return !(p.a < p.b); });
  std::sort(pieces.begin(), pieces.end(), [](const Interval& x, const Interval& y) {
    return x.a < y.a || (x.a == y.a && x.b < y.b);
  });
  for (const auto& p : pieces) {
    if (!iv_.empty() && p.a <= iv_.back().b)
      iv_.back().b = std::max(iv_.back().b, p.b);
    else
      iv_.push_back(p);
  }
}

double IntervalSet::measure() const {
  double s = 0.0;
  for (const auto& p : iv_) s += p.b - p.a;
  return s;
}

size_t IntervalSet::component_of(double w) const {
  auto it = std::upper_bound(iv_.begin(), iv_.end(), w,
                             [](double x, const Interval& p) { return x < p.a; });
  if (it == iv_.begin()) return npos;
  --it;
  return it->contains(w) ? static_cast<size_t>(it - iv_.begin()) : npos;
}

IntervalSet unite(const IntervalSet& x, const IntervalSet& y) {
  std::vector<Interval> all = x.intervals();
  all.insert(all.end(), y.intervals().begin(), y.intervals().end());
  return IntervalSet(std::move(all));
}

IntervalSet union_all(const std::vector<IntervalSet>& sets) {
  std::vector<Interval> all;
  for (const auto& s : sets) all.insert(all.end(), s.intervals().begin(), s.intervals().end());
  return IntervalSet(std::move(all));
}

IntervalSet union_all(std::vector<Interval> pieces) { return IntervalSet(std::move(pieces)); }

IntervalSet intersect(const IntervalSet& x, const IntervalSet& y) {
  std::vector<Interval> out;
  const auto &X = x.intervals(), &Y = y.intervals();
  size_t i = 0, j = 0;
  while (i < X.size() && j < Y.size()) {
    const double a = std::max(X[i].a, Y[j].a), b = std::min(X[i].b, Y[j].b);
    if (a < b) out.push_back({a, b});
    if (X[i].b < Y[j].b)
      ++i;
    else
      ++j;
  }
  return IntervalSet(std::move(out));
}

IntervalSet complement_in(const IntervalSet& x) {
  std::vector<Interval> out;
  double cur = kOmegaMin;
  for (const auto& p : x.intervals()) {
    if (p.a > cur) out.push_back({cur, p.a});
    cur = std::max(cur, p.b);
  }
  if (cur < kOmegaMax) out.push_back({cur, kOmegaMax});
  return IntervalSet(std::move(out));
}

IntervalSet difference(const IntervalSet& x, const IntervalSet& y) {
  return intersect(x, complement_in(y));
}

std::vector<Interval> partition_cells(const IntervalSet& set, double cell, size_t max_cells) {
  if (!(cell > 0.0)) throw std::invalid_argument("cell size must be positive");
  if (cell < 4.0 * std::numeric_limits<double>::epsilon() * kOmegaMax)
    throw std::invalid_argument("cell size below 4 machine epsilons of the endpoints");
  std::vector<Interval> out;
  for (const auto& p : set.intervals()) {
    const double count = std::ceil((p.b - p.a) / cell);
    if (out.size() + count > static_cast<double>(max_cells))
      throw SizingError("partition exceeds the cell cap");
    const size_t m = std::max<size_t>(1, static_cast<size_t>(count));
    for (size_t i = 0; i < m; ++i) {
      const double a = p.a + static_cast<double>(i) * cell;
      const double b = (i + 1 == m) ? p.b : std::min(p.b, p.a + static_cast<double>(i + 1) * cell);
      if (a < b) out.push_back({a, b});
    }
  }
  return out;
}

Interval dilate(const Interval& cell, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw std::invalid_argument("dilation factor must be in (0,1]");
  if (factor == 1.0) return cell;
  const double c = cell.center(), h = 0.5 * factor * cell.length();
  return {c - h, c + h};
}

Interval resonance_window(long n_sq, int k, double eta) {
  if (k == 0) return {0.0, 0.0};
  const double c = (static_cast<double>(n_sq) + 1.0) / k, h = eta / std::abs(k);
  return {c - h, c + h};
}

IntervalSet resonance_interval(std::span<const int> n, int k, double eta) {
  if (!(eta > 0.0)) return {};
  long sq = 0;
  for (int v : n) sq += static_cast<long>(v) * v;
  Interval w = resonance_window(sq, k, eta);
  return IntervalSet({w});
}

}  // namespace fnls
