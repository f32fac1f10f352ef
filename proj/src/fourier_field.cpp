#include "fnls/fourier_field.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fnls {

void GevreyParams::validate() const {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("Gevrey index c must lie in (0,1)");
  if (!(weight_factor > 0.0)) throw std::invalid_argument("Gevrey weight factor must be positive");
}

FourierField::FourierField(int dim, int radius) : dim_(dim), radius_(radius) {
  if (dim < 1 || dim > kMaxSpatialDim) throw std::invalid_argument("bad field dimension");
  if (radius < 1) throw std::invalid_argument("field radius must be >= 1");
}

FourierField FourierField::from_entries(int dim, int radius, std::vector<Entry> entries,
                                        bool real_valued) {
  FourierField f(dim, radius);
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (auto& e : entries) {
    if (e.first.dim() != dim) throw std::invalid_argument("entry dimension mismatch");
    if (!in_box(e.first, radius))
      throw std::invalid_argument("entry " + e.first.str() + " outside box of radius " +
                                  std::to_string(radius));
    if (!f.entries_.empty() && f.entries_.back().first == e.first)
      f.entries_.back().second += e.second;
    else
      f.entries_.push_back(std::move(e));
  }
  std::erase_if(f.entries_, [](const Entry& e) { return e.second == cplx(0.0, 0.0); });
  if (real_valued) {
    const double tol = 1e-12 * std::max(1.0, f.max_abs());
    for (const auto& [xi, a] : f.entries_)
      if (std::abs(f.coeff(-xi) - std::conj(a)) > tol)
        throw std::invalid_argument("field flagged real-valued violates the reality condition at " +
                                    xi.str());
  }
  f.real_valued_ = real_valued;
  return f;
}

FourierField FourierField::single_mode(const MultiIndex& xi, cplx a, int radius) {
  return from_entries(xi.dim(), radius, {{xi, a}});
}

cplx FourierField::coeff(const MultiIndex& xi) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), xi,
                             [](const Entry& e, const MultiIndex& x) { return e.first < x; });
  if (it != entries_.end() && it->first == xi) return it->second;
  return {0.0, 0.0};
}

double FourierField::l2_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += std::norm(e.second);
  return std::sqrt(s);
}

double FourierField::max_abs() const {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, std::abs(e.second));
  return m;
}

int FourierField::support_radius() const {
  int r = 0;
  for (const auto& e : entries_) r = std::max(r, box_radius_of(e.first));
  return r;
}

FourierField FourierField::with_radius(int radius) const {
  return from_entries(dim_, radius, entries_, real_valued_);
}

FourierField FourierField::scaled(cplx a) const {
  FourierField f(dim_, radius_);
  f.entries_.reserve(entries_.size());
  for (const auto& [xi, v] : entries_)
    if (v * a != cplx(0.0, 0.0)) f.entries_.emplace_back(xi, v * a);
  f.real_valued_ = real_valued_ && a.imag() == 0.0;
  return f;
}

FourierField FourierField::with_real_flag(bool flag) const {
  return from_entries(dim_, radius_, entries_, flag);
}

namespace {

FourierField merge(const FourierField& a, const FourierField& b, double sign) {
  if (a.dim() != b.dim()) throw std::invalid_argument("field dimension mismatch");
  std::vector<FourierField::Entry> out;
  out.reserve(a.size() + b.size());
  auto ia = a.entries().begin(), ib = b.entries().begin();
  while (ia != a.entries().end() || ib != b.entries().end()) {
    if (ib == b.entries().end() || (ia != a.entries().end() && ia->first < ib->first)) {
      out.push_back(*ia++);
    } else if (ia == a.entries().end() || ib->first < ia->first) {
      out.emplace_back(ib->first, sign * ib->second);
      ++ib;
    } else {
      out.emplace_back(ia->first, ia->second + sign * ib->second);
      ++ia;
      ++ib;
    }
  }
  FourierField f = FourierField::from_entries(a.dim(), std::max(a.radius(), b.radius()),
                                              std::move(out));
  return a.real_valued() && b.real_valued() ? f.with_real_flag(true) : f;
}

}  // namespace

FourierField operator+(const FourierField& a, const FourierField& b) { return merge(a, b, 1.0); }
FourierField operator-(const FourierField& a, const FourierField& b) { return merge(a, b, -1.0); }

FourierField fractional_derivative(const FourierField& f, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("fractional order must be >= 0");
  std::vector<FourierField::Entry> out;
  out.reserve(f.size());
  for (const auto& [xi, a] : f.entries()) out.emplace_back(xi, a * std::pow(angle_weight(xi), alpha));
  return FourierField::from_entries(f.dim(), f.radius(), std::move(out), f.real_valued());
}

double gevrey_norm(const FourierField& f, const GevreyParams& g) {
  g.validate();
  double s = 0.0;
  for (const auto& [xi, a] : f.entries())
    s += std::abs(a) * std::exp(g.weight_factor * std::pow(static_cast<double>(xi.l1()), g.c));
  return s;
}

FourierField project(const FourierField& f, int N) {
  if (N < 1) throw std::invalid_argument("projection radius must be >= 1");
  std::vector<FourierField::Entry> out;
  for (const auto& e : f.entries())
    if (in_box(e.first, N)) out.push_back(e);
  return FourierField::from_entries(f.dim(), std::min(f.radius(), N), std::move(out),
                                    f.real_valued());
}

FourierField conjugate_flip(const FourierField& f) {
  std::vector<FourierField::Entry> out;
  out.reserve(f.size());
  for (const auto& [xi, a] : f.entries()) out.emplace_back(-xi, std::conj(a));
  return FourierField::from_entries(f.dim(), f.radius(), std::move(out), f.real_valued());
}

FourierField convolve(const FourierField& f, const FourierField& g, int support_cap) {
  if (f.dim() != g.dim()) throw std::invalid_argument("field dimension mismatch");
  const int radius = f.radius() + g.radius();
  if (radius > support_cap)
    throw SizingError("convolution support radius " + std::to_string(radius) + " exceeds cap " +
                      std::to_string(support_cap));
  const int d = f.dim();
  if (f.empty() || g.empty()) return FourierField(d, radius);

  // Bounding box of the result from the actual extents of both supports.
  std::array<int, kMaxSpatialDim + 1> lo{}, hi{};
  auto extents = [&](const FourierField& h, std::array<int, kMaxSpatialDim + 1>& l,
                     std::array<int, kMaxSpatialDim + 1>& u) {
    l.fill(1 << 30);
    u.fill(-(1 << 30));
    for (const auto& e : h.entries())
      for (int a = 0; a <= d; ++a) {
        l[a] = std::min(l[a], e.first.axis(a));
        u[a] = std::max(u[a], e.first.axis(a));
      }
  };
  std::array<int, kMaxSpatialDim + 1> lf{}, uf{}, lg{}, ug{};
  extents(f, lf, uf);
  extents(g, lg, ug);
  size_t cells = 1;
  std::array<size_t, kMaxSpatialDim + 1> stride{};
  for (int a = d; a >= 0; --a) {
    lo[a] = lf[a] + lg[a];
    hi[a] = uf[a] + ug[a];
    stride[a] = cells;
    cells *= static_cast<size_t>(hi[a] - lo[a] + 1);
  }

  std::vector<FourierField::Entry> out;
  if (cells <= (size_t{1} << 24)) {
    std::vector<cplx> acc(cells, cplx(0.0, 0.0));
    std::vector<bool> touched(cells, false);
    for (const auto& [x, a] : f.entries())
      for (const auto& [y, b] : g.entries()) {
        size_t off = 0;
        for (int ax = 0; ax <= d; ++ax)
          off += static_cast<size_t>(x.axis(ax) + y.axis(ax) - lo[ax]) * stride[ax];
        acc[off] += a * b;
        touched[off] = true;
      }
    MultiIndex xi(d);
    for (size_t off = 0; off < cells; ++off) {
      if (!touched[off]) continue;
      size_t rem = off;
      for (int ax = 0; ax <= d; ++ax) {
        xi.set_axis(ax, lo[ax] + static_cast<int>(rem / stride[ax]));
        rem %= stride[ax];
      }
      out.emplace_back(xi, acc[off]);
    }
  } else {
    std::map<MultiIndex, cplx> acc;
    for (const auto& [x, a] : f.entries())
      for (const auto& [y, b] : g.entries()) acc[x + y] += a * b;
    out.assign(acc.begin(), acc.end());
  }
  return FourierField::from_entries(d, radius, std::move(out));
}

}  // namespace fnls
