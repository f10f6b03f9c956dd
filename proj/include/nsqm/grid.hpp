#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nsqm/errors.hpp"

namespace nsqm {

enum class Boundary { Dirichlet, Periodic };

struct AxisSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  Boundary boundary = Boundary::Dirichlet;
  int npoints = 0;
};

// Tensor-product grid over N curvilinear coordinates.
//
// Sample points are cell-centered: x_i = lo + (i + 1/2) h with h = (hi-lo)/n.
// This keeps samples off singular boundary values (r = 0, sin(theta) = 0) and
// makes the midpoint quadrature sum exact for constant integrands. Periodic
// axes use x_i = lo + i h, identifying hi with lo (no duplicated endpoint).
class CoordinateChart {
 public:
  CoordinateChart() = default;

  explicit CoordinateChart(std::vector<AxisSpec> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw Error("chart needs at least one coordinate");
    for (const auto& a : axes_) {
      if (!(a.lo < a.hi))
        throw Error("coordinate '" + a.name + "': lower bound must be < upper");
      if (a.npoints < 3)
        throw Error("coordinate '" + a.name + "': need at least 3 grid points");
    }
    strides_.resize(axes_.size());
    std::size_t s = 1;
    for (int a = static_cast<int>(axes_.size()) - 1; a >= 0; --a) {
      strides_[a] = s;
      s *= static_cast<std::size_t>(axes_[a].npoints);
    }
    npts_ = s;
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return npts_; }
  const AxisSpec& axis(int a) const { return axes_[a]; }
  const std::vector<AxisSpec>& axes() const { return axes_; }
  int extent(int a) const { return axes_[a].npoints; }
  std::size_t stride(int a) const { return strides_[a]; }

  double spacing(int a) const {
    const auto& ax = axes_[a];
    return (ax.hi - ax.lo) / ax.npoints;
  }

  bool periodic(int a) const { return axes_[a].boundary == Boundary::Periodic; }

  double coord(int a, int i) const {
    const auto& ax = axes_[a];
    const double h = spacing(a);
    return periodic(a) ? ax.lo + i * h : ax.lo + (i + 0.5) * h;
  }

  // product of spacings, the d^N x cell volume
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= spacing(a);
    return v;
  }

  std::size_t flat(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim(); ++a) f += static_cast<std::size_t>(idx[a]) * strides_[a];
    return f;
  }

  void unflatten(std::size_t f, std::vector<int>& idx) const {
    idx.resize(axes_.size());
    for (int a = 0; a < dim(); ++a) {
      idx[a] = static_cast<int>(f / strides_[a]);
      f %= strides_[a];
    }
  }

  void point(const std::vector<int>& idx, std::vector<double>& x) const {
    x.resize(axes_.size());
    for (int a = 0; a < dim(); ++a) x[a] = coord(a, idx[a]);
  }

  // flat index of the neighbor shifted by `step` along axis a; returns npts_
  // (one past the end) when the neighbor falls outside a Dirichlet edge.
  std::size_t neighbor(std::size_t f, int a, int step) const {
    const int n = extent(a);
    const int i = static_cast<int>((f / strides_[a]) % static_cast<std::size_t>(n));
    int j = i + step;
    if (periodic(a)) {
      j = ((j % n) + n) % n;
    } else if (j < 0 || j >= n) {
      return npts_;
    }
    return f + (static_cast<std::size_t>(j) - static_cast<std::size_t>(i)) * strides_[a];
  }

  // true when idx touches the first/last layer of any Dirichlet axis
  bool on_dirichlet_edge(const std::vector<int>& idx) const {
    for (int a = 0; a < dim(); ++a) {
      if (periodic(a)) continue;
      if (idx[a] == 0 || idx[a] == extent(a) - 1) return true;
    }
    return false;
  }

  bool same_layout(const CoordinateChart& o) const {
    if (dim() != o.dim()) return false;
    for (int a = 0; a < dim(); ++a) {
      if (extent(a) != o.extent(a) || periodic(a) != o.periodic(a)) return false;
      if (axes_[a].lo != o.axes_[a].lo || axes_[a].hi != o.axes_[a].hi) return false;
    }
    return true;
  }

 private:
  std::vector<AxisSpec> axes_;
  std::vector<std::size_t> strides_;
  std::size_t npts_ = 0;
};

using RealField = std::vector<double>;

// Visits every grid point in flat order; fn(flat, idx, x).
template <typename Fn>
void for_each_point(const CoordinateChart& chart, Fn&& fn) {
  const int n = chart.dim();
  std::vector<int> idx(n, 0);
  std::vector<double> x(n);
  chart.point(idx, x);
  const std::size_t npts = chart.size();
  for (std::size_t f = 0; f < npts; ++f) {
    fn(f, idx, x);
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < chart.extent(a)) {
        x[a] = chart.coord(a, idx[a]);
        break;
      }
      idx[a] = 0;
      x[a] = chart.coord(a, 0);
    }
  }
}

}  // namespace nsqm
