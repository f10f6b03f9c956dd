#include "nsqm/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

namespace nsqm {

DerivStencil first_derivative_stencil(const CoordinateChart& chart, std::size_t f, int axis,
                                      int i) {
  const double h = chart.spacing(axis);
  const int n = chart.extent(axis);
  DerivStencil s;
  if (chart.periodic(axis) || (i > 0 && i < n - 1)) {
    s.count = 2;
    s.idx[0] = chart.neighbor(f, axis, -1);
    s.coef[0] = -0.5 / h;
    s.idx[1] = chart.neighbor(f, axis, +1);
    s.coef[1] = +0.5 / h;
  } else if (i == 0) {
    s.count = 3;
    s.idx[0] = f;
    s.coef[0] = -1.5 / h;
    s.idx[1] = chart.neighbor(f, axis, +1);
    s.coef[1] = +2.0 / h;
    s.idx[2] = chart.neighbor(f, axis, +2);
    s.coef[2] = -0.5 / h;
  } else {
    s.count = 3;
    s.idx[0] = f;
    s.coef[0] = +1.5 / h;
    s.idx[1] = chart.neighbor(f, axis, -1);
    s.coef[1] = -2.0 / h;
    s.idx[2] = chart.neighbor(f, axis, -2);
    s.coef[2] = +0.5 / h;
  }
  return s;
}

RealField derivative_axis(const RealField& field, const CoordinateChart& chart, int axis) {
  RealField out(chart.size());
  std::vector<int> idx;
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& ix, const std::vector<double>&) {
    const DerivStencil s = first_derivative_stencil(chart, f, axis, ix[axis]);
    double v = 0.0;
    for (int k = 0; k < s.count; ++k) v += s.coef[k] * field[s.idx[k]];
    out[f] = v;
  });
  return out;
}

MetricField build_metric(const ProblemSpec& spec) {
  const CoordinateChart& chart = spec.chart;
  const int n = chart.dim();
  MetricField m;
  m.n = n;
  m.npts = chart.size();
  m.lower.resize(m.npts * n * n);
  m.upper.resize(m.npts * n * n);
  m.sqrt_det.resize(m.npts);

  Eigen::MatrixXd g(n, n), ginv(n, n);
  std::vector<double> slots(n + 1, 0.0);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>&, const std::vector<double>& x) {
    for (int a = 0; a < n; ++a) slots[a] = x[a];
    slots[n] = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const Expression& e = spec.metric_entry(p, q);
        g(p, q) = e.empty() ? 0.0 : e.eval(slots);
        if (!std::isfinite(g(p, q)))
          throw SingularMetric("metric entry not finite at a grid point", x);
      }
    double scale = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) scale = std::max(scale, std::fabs(g(p, q)));
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q)
        if (std::fabs(g(p, q) - g(q, p)) > 1e-12 * std::max(scale, 1.0))
          throw NonSymmetricMetric("metric expressions violate g_pq = g_qp", x);

    Eigen::LLT<Eigen::MatrixXd> llt(g.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success)
      throw SingularMetric("metric not positive definite at a grid point", x);
    double det = 1.0;
    for (int p = 0; p < n; ++p) det *= llt.matrixL()(p, p);
    det *= det;
    if (!(det > 1e-14 * std::pow(std::max(scale, 1.0), n)))
      throw SingularMetric("metric determinant below threshold at a grid point", x);
    ginv = llt.solve(Eigen::MatrixXd::Identity(n, n));

    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        m.lower[(f * n + p) * n + q] = g(p, q);
        m.upper[(f * n + p) * n + q] = 0.5 * (ginv(p, q) + ginv(q, p));
      }
    m.sqrt_det[f] = std::sqrt(det);
  });
  return m;
}

RealField volume_weights(const MetricField& metric, const CoordinateChart& chart) {
  const double cell = chart.cell_volume();
  RealField w(metric.npts);
  for (std::size_t f = 0; f < metric.npts; ++f) w[f] = metric.sqrt_det[f] * cell;
  return w;
}

GeometryData build_geometry(const ProblemSpec& spec) {
  GeometryData geo;
  geo.metric = build_metric(spec);
  geo.weights = volume_weights(geo.metric, spec.chart);
  return geo;
}

ChristoffelData christoffel(const MetricField& metric, const CoordinateChart& chart) {
  const int n = metric.n;
  const std::size_t npts = metric.npts;

  // dg[a][p*n+q] = d_a g_pq
  std::vector<std::vector<RealField>> dg(n);
  for (int a = 0; a < n; ++a) {
    dg[a].resize(n * n);
    RealField comp(npts);
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q) {
        for (std::size_t f = 0; f < npts; ++f) comp[f] = metric.g(f, p, q);
        RealField d = derivative_axis(comp, chart, a);
        dg[a][p * n + q] = d;
        if (q != p) dg[a][q * n + p] = std::move(d);
      }
  }

  ChristoffelData c;
  c.n = n;
  c.npts = npts;
  c.first_kind.resize(npts * n * n * n);
  c.second_kind.resize(npts * n * n * n);
  for (std::size_t f = 0; f < npts; ++f) {
    for (int s = 0; s < n; ++s)
      for (int p = 0; p < n; ++p)
        for (int q = p; q < n; ++q) {
          const double v = 0.5 * (dg[p][q * n + s][f] + dg[q][p * n + s][f] - dg[s][p * n + q][f]);
          c.first_kind[((f * n + s) * n + p) * n + q] = v;
          c.first_kind[((f * n + s) * n + q) * n + p] = v;
        }
    for (int r = 0; r < n; ++r)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          double v = 0.0;
          for (int s = 0; s < n; ++s) v += metric.ginv(f, r, s) * c.first(f, s, p, q);
          c.second_kind[((f * n + r) * n + p) * n + q] = v;
        }
  }
  return c;
}

double check_identity_a13(const MetricField& metric, const CoordinateChart& chart) {
  const int n = metric.n;
  const std::size_t npts = metric.npts;

  RealField log_sqrt(npts);
  for (std::size_t f = 0; f < npts; ++f) log_sqrt[f] = std::log(metric.sqrt_det[f]);
  std::vector<RealField> dlog(n);
  for (int p = 0; p < n; ++p) dlog[p] = derivative_axis(log_sqrt, chart, p);

  std::vector<std::vector<RealField>> dg(n);
  for (int a = 0; a < n; ++a) {
    dg[a].resize(n * n);
    RealField comp(npts);
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q) {
        for (std::size_t f = 0; f < npts; ++f) comp[f] = metric.g(f, p, q);
        RealField d = derivative_axis(comp, chart, a);
        dg[a][p * n + q] = d;
        if (q != p) dg[a][q * n + p] = std::move(d);
      }
  }

  double worst = 0.0;
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& ix, const std::vector<double>&) {
    if (chart.on_dirichlet_edge(ix)) return;
    for (int p = 0; p < n; ++p) {
      double trace = 0.0;
      for (int q = 0; q < n; ++q)
        for (int s = 0; s < n; ++s) {
          const double first =
              0.5 * (dg[p][q * n + s][f] + dg[q][p * n + s][f] - dg[s][p * n + q][f]);
          trace += metric.ginv(f, q, s) * first;
        }
      worst = std::max(worst, std::fabs(trace - dlog[p][f]));
    }
  });
  return worst;
}

RealField divergence(const std::vector<RealField>& a_contra, const MetricField& metric,
                     const CoordinateChart& chart) {
  const int n = metric.n;
  const std::size_t npts = metric.npts;
  RealField out(npts, 0.0);
  RealField flux(npts);
  for (int q = 0; q < n; ++q) {
    for (std::size_t f = 0; f < npts; ++f) flux[f] = metric.sqrt_det[f] * a_contra[q][f];
    RealField d = derivative_axis(flux, chart, q);
    for (std::size_t f = 0; f < npts; ++f) out[f] += d[f];
  }
  for (std::size_t f = 0; f < npts; ++f) out[f] /= metric.sqrt_det[f];
  return out;
}

Eigen::SparseMatrix<double> laplace_beltrami_form(const MetricField& metric,
                                                  const CoordinateChart& chart,
                                                  const RealField& weights) {
  const int n = metric.n;
  const std::size_t npts = metric.npts;
  std::vector<Eigen::Triplet<double>> trip;

  // which off-diagonal metric components are present at all
  std::vector<bool> pair_used(static_cast<std::size_t>(n) * n, false);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      for (std::size_t f = 0; f < npts; ++f)
        if (metric.ginv(f, p, q) != 0.0) {
          pair_used[p * n + q] = true;
          break;
        }
    }

  std::size_t nnz_estimate = npts * (1 + 2 * n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      if (p != q && pair_used[p * n + q]) nnz_estimate += npts * 9;
  trip.reserve(nnz_estimate);

  std::vector<int> ix;
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& idx, const std::vector<double>&) {
    // same-axis terms: staggered fluxes over links (f -> neighbor+1), plus
    // Dirichlet wall links with the wall half a spacing outside the sample
    for (int a = 0; a < n; ++a) {
      const double h = chart.spacing(a);
      const int i = idx[a];
      const int na = chart.extent(a);
      const std::size_t up = chart.neighbor(f, a, +1);
      const bool has_up = chart.periodic(a) ? true : (i < na - 1);
      if (has_up) {
        const double c =
            0.5 * (weights[f] * metric.ginv(f, a, a) + weights[up] * metric.ginv(up, a, a)) /
            (h * h);
        trip.emplace_back(f, f, c);
        trip.emplace_back(up, up, c);
        trip.emplace_back(f, up, -c);
        trip.emplace_back(up, f, -c);
      }
      if (!chart.periodic(a)) {
        if (i == 0) trip.emplace_back(f, f, 2.0 * weights[f] * metric.ginv(f, a, a) / (h * h));
        if (i == na - 1)
          trip.emplace_back(f, f, 2.0 * weights[f] * metric.ginv(f, a, a) / (h * h));
      }
    }
    // cross terms: w g^pq (D_p phi)(D_q psi) with central differences
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        if (p == q || !pair_used[p * n + q]) continue;
        const double wg = weights[f] * metric.ginv(f, p, q);
        if (wg == 0.0) continue;
        const DerivStencil sp = first_derivative_stencil(chart, f, p, idx[p]);
        const DerivStencil sq = first_derivative_stencil(chart, f, q, idx[q]);
        for (int k1 = 0; k1 < sp.count; ++k1)
          for (int k2 = 0; k2 < sq.count; ++k2)
            trip.emplace_back(sp.idx[k1], sq.idx[k2], wg * sp.coef[k1] * sq.coef[k2]);
      }
  });

  Eigen::SparseMatrix<double> a(static_cast<long>(npts), static_cast<long>(npts));
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

RealField apply_laplace_beltrami(const RealField& phi, const MetricField& metric,
                                 const CoordinateChart& chart, const RealField& w) {
  const int n = metric.n;
  const std::size_t npts = metric.npts;
  RealField acc(npts, 0.0);  // accumulates A phi of the symmetric form

  std::vector<bool> pair_used(static_cast<std::size_t>(n) * n, false);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      for (std::size_t f = 0; f < npts; ++f)
        if (metric.ginv(f, p, q) != 0.0) {
          pair_used[p * n + q] = true;
          break;
        }
    }

  for_each_point(chart, [&](std::size_t f, const std::vector<int>& idx, const std::vector<double>&) {
    for (int a = 0; a < n; ++a) {
      const double h = chart.spacing(a);
      const int i = idx[a];
      const int na = chart.extent(a);
      if (chart.periodic(a) || i < na - 1) {
        const std::size_t up = chart.neighbor(f, a, +1);
        const double c =
            0.5 * (w[f] * metric.ginv(f, a, a) + w[up] * metric.ginv(up, a, a)) / (h * h);
        const double d = phi[f] - phi[up];
        acc[f] += c * d;
        acc[up] -= c * d;
      }
      if (!chart.periodic(a) && (i == 0 || i == na - 1))
        acc[f] += 2.0 * w[f] * metric.ginv(f, a, a) / (h * h) * phi[f];
    }
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        if (p == q || !pair_used[p * n + q]) continue;
        const double wg = w[f] * metric.ginv(f, p, q);
        if (wg == 0.0) continue;
        const DerivStencil sq = first_derivative_stencil(chart, f, q, idx[q]);
        double dq = 0.0;
        for (int k = 0; k < sq.count; ++k) dq += sq.coef[k] * phi[sq.idx[k]];
        const DerivStencil sp = first_derivative_stencil(chart, f, p, idx[p]);
        for (int k = 0; k < sp.count; ++k) acc[sp.idx[k]] += sp.coef[k] * wg * dq;
      }
  });

  RealField out(npts);
  for (std::size_t f = 0; f < npts; ++f) out[f] = -acc[f] / w[f];
  return out;
}

RealField laplace_beltrami(const RealField& phi, const MetricField& metric,
                           const CoordinateChart& chart) {
  const RealField w = volume_weights(metric, chart);
  return apply_laplace_beltrami(phi, metric, chart, w);
}

FrameField FrameField::sample(
    const CoordinateChart& chart,
    const std::function<double(const std::vector<double>&, int, int)>& fn) {
  const int n = chart.dim();
  FrameField fr;
  fr.n = n;
  fr.npts = chart.size();
  fr.a.resize(fr.npts * n * n);
  fr.a_inv.resize(fr.npts * n * n);
  Eigen::MatrixXd a(n, n);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>&, const std::vector<double>& x) {
    for (int i = 0; i < n; ++i)
      for (int q = 0; q < n; ++q) a(i, q) = fn(x, i, q);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw SingularFrame("frame coefficients not invertible", x);
    const Eigen::MatrixXd inv = lu.inverse();
    for (int i = 0; i < n; ++i)
      for (int q = 0; q < n; ++q) {
        fr.a[(f * n + i) * n + q] = a(i, q);
        fr.a_inv[(f * n + q) * n + i] = inv(q, i);
      }
  });
  return fr;
}

FrameConnections frame_connections(const FrameField& frame, const CoordinateChart& chart) {
  const int n = frame.n;
  const std::size_t npts = frame.npts;

  // d_p A^-1_qj for all components
  std::vector<RealField> dinv(static_cast<std::size_t>(n) * n * n);
  RealField comp(npts);
  for (int q = 0; q < n; ++q)
    for (int j = 0; j < n; ++j) {
      for (std::size_t f = 0; f < npts; ++f) comp[f] = frame.inv(f, q, j);
      for (int p = 0; p < n; ++p)
        dinv[(static_cast<std::size_t>(p) * n + q) * n + j] = derivative_axis(comp, chart, p);
    }

  FrameConnections fc;
  fc.n = n;
  fc.npts = npts;
  fc.gamma.resize(npts * n * n * n);
  fc.contraction.assign(npts * n, 0.0);
  for (std::size_t f = 0; f < npts; ++f) {
    for (int q = 0; q < n; ++q) {
      for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r) {
          double v = 0.0;
          for (int j = 0; j < n; ++j)
            v += dinv[(static_cast<std::size_t>(p) * n + q) * n + j][f] * frame.at(f, j, r);
          // d_p e^q = -Gamma^q_pr e^r
          fc.gamma[((f * n + q) * n + p) * n + r] = -v;
        }
      double contr = 0.0;
      for (int p = 0; p < n; ++p)
        for (int i = 0; i < n; ++i)
          contr += frame.inv(f, p, i) * dinv[(static_cast<std::size_t>(p) * n + q) * n + i][f];
      fc.contraction[f * n + q] = contr;
    }
  }
  return fc;
}

}  // namespace nsqm
