#include "nsqm/madelung.hpp"

#include <cmath>
#include <deque>

namespace nsqm {

namespace {

constexpr double kTwoPi = 6.28318530717958647692528676655900577;

double wrap_to_pi(double a) {
  while (a > kTwoPi / 2) a -= kTwoPi;
  while (a <= -kTwoPi / 2) a += kTwoPi;
  return a;
}

std::vector<RealField> eval_gauge_contra(const ProblemSpec& spec, const GeometryData& geo,
                                         double t) {
  const int n = spec.dim();
  const std::size_t npts = spec.chart.size();
  std::vector<RealField> u(n, RealField(npts, 0.0));
  if (!spec.has_gauge()) return u;
  std::vector<double> slots(n + 1, 0.0);
  std::vector<double> ucov(n);
  for_each_point(spec.chart,
                 [&](std::size_t f, const std::vector<int>&, const std::vector<double>& x) {
                   for (int a = 0; a < n; ++a) slots[a] = x[a];
                   slots[n] = t;
                   for (int p = 0; p < n; ++p) ucov[p] = spec.eval_gauge(p, slots);
                   for (int p = 0; p < n; ++p) {
                     double s = 0.0;
                     for (int q = 0; q < n; ++q) s += geo.metric.ginv(f, p, q) * ucov[q];
                     u[p][f] = s;
                   }
                 });
  return u;
}

// flux j^p = (hbar/m) Im(psi* g^pq D_q psi) - u^p rho, directly from psi
std::vector<RealField> flux_from_psi(const WaveFunction& psi, const ProblemSpec& spec,
                                     const GeometryData& geo, const RealField& rho,
                                     const std::vector<RealField>& u_contra) {
  const CoordinateChart& chart = psi.chart;
  const int n = chart.dim();
  const std::size_t npts = chart.size();
  std::vector<RealField> j(n, RealField(npts, 0.0));
  const double hm = spec.hbar / spec.mass;
  std::vector<Complex> dpsi(n);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& idx, const std::vector<double>&) {
    for (int q = 0; q < n; ++q) {
      const DerivStencil s = first_derivative_stencil(chart, f, q, idx[q]);
      Complex d = 0.0;
      for (int k = 0; k < s.count; ++k) d += s.coef[k] * psi.values[s.idx[k]];
      dpsi[q] = d;
    }
    const Complex pc = std::conj(psi.values[f]);
    for (int p = 0; p < n; ++p) {
      Complex contr = 0.0;
      for (int q = 0; q < n; ++q) contr += geo.metric.ginv(f, p, q) * dpsi[q];
      j[p][f] = hm * std::imag(pc * contr) - u_contra[p][f] * rho[f];
    }
  });
  return j;
}

}  // namespace

std::vector<RealField> probability_flux(const WaveFunction& psi, const ProblemSpec& spec,
                                        const GeometryData& geo) {
  RealField rho(psi.values.size());
  for (std::size_t f = 0; f < rho.size(); ++f) rho[f] = std::norm(psi.values[f]);
  return flux_from_psi(psi, spec, geo, rho, eval_gauge_contra(spec, geo, psi.time));
}

std::vector<RealField> gauge_field_contravariant(const ProblemSpec& spec, const GeometryData& geo,
                                                 double t) {
  return eval_gauge_contra(spec, geo, t);
}

MadelungFields decompose(const WaveFunction& psi, const ProblemSpec& spec,
                         const GeometryData& geo) {
  const CoordinateChart& chart = psi.chart;
  const int n = chart.dim();
  const std::size_t npts = chart.size();

  MadelungFields out;
  out.rho.resize(npts);
  double rho_max = 0.0;
  for (std::size_t f = 0; f < npts; ++f) {
    out.rho[f] = std::norm(psi.values[f]);
    rho_max = std::max(rho_max, out.rho[f]);
  }
  const double eps = 1e-12 * rho_max;
  out.mask.assign(npts, 0);
  for (std::size_t f = 0; f < npts; ++f) {
    out.mask[f] = out.rho[f] > eps ? 1 : 0;
    if (!out.mask[f]) ++out.masked_out;
  }

  // phase unwrap: breadth-first flood per mask component, anchored at the
  // local density maximum, branch-corrected link by link
  out.phi.assign(npts, 0.0);
  std::vector<char> visited(npts, 0);
  std::vector<int> idx;
  for (std::size_t seed_scan = 0; seed_scan < npts; ++seed_scan) {
    if (!out.mask[seed_scan] || visited[seed_scan]) continue;
    // collect the component and find its anchor with one flood
    std::deque<std::size_t> queue = {seed_scan};
    std::vector<std::size_t> comp;
    visited[seed_scan] = 1;
    while (!queue.empty()) {
      const std::size_t f = queue.front();
      queue.pop_front();
      comp.push_back(f);
      chart.unflatten(f, idx);
      for (int a = 0; a < n; ++a)
        for (int step : {-1, +1}) {
          const std::size_t nb = chart.neighbor(f, a, step);
          if (nb >= npts || visited[nb] || !out.mask[nb]) continue;
          visited[nb] = 1;
          queue.push_back(nb);
        }
    }
    std::size_t anchor = comp.front();
    for (std::size_t f : comp)
      if (out.rho[f] > out.rho[anchor]) anchor = f;
    out.anchors.push_back(anchor);
    ++out.components;

    // second flood from the anchor accumulates the unwrapped phase
    for (std::size_t f : comp) visited[f] = 2;
    out.phi[anchor] = std::arg(psi.values[anchor]);
    queue.push_back(anchor);
    visited[anchor] = 3;
    while (!queue.empty()) {
      const std::size_t f = queue.front();
      queue.pop_front();
      chart.unflatten(f, idx);
      for (int a = 0; a < n; ++a)
        for (int step : {-1, +1}) {
          const std::size_t nb = chart.neighbor(f, a, step);
          if (nb >= npts || visited[nb] != 2) continue;
          visited[nb] = 3;
          out.phi[nb] =
              out.phi[f] + wrap_to_pi(std::arg(psi.values[nb]) - std::arg(psi.values[f]));
          queue.push_back(nb);
        }
    }
  }

  const std::vector<RealField> u_contra = eval_gauge_contra(spec, geo, psi.time);
  out.j = flux_from_psi(psi, spec, geo, out.rho, u_contra);

  // defining split: v = j / rho on the mask
  out.v.assign(n, RealField(npts, 0.0));
  for (int p = 0; p < n; ++p)
    for (std::size_t f = 0; f < npts; ++f)
      if (out.mask[f]) out.v[p][f] = out.j[p][f] / out.rho[f];

  // gradient-of-phase route, defined where the stencil stays inside the mask
  out.v_from_phase.assign(n, RealField(npts, 0.0));
  out.phase_grad_ok.assign(npts, 0);
  const double hm = spec.hbar / spec.mass;
  std::vector<double> dphi(n);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& ix, const std::vector<double>&) {
    if (!out.mask[f]) return;
    for (int q = 0; q < n; ++q) {
      const DerivStencil s = first_derivative_stencil(chart, f, q, ix[q]);
      double d = 0.0;
      for (int k = 0; k < s.count; ++k) {
        if (!out.mask[s.idx[k]]) return;  // leave phase_grad_ok = 0
        // a branch seam of the unwrap tree (e.g. winding plane waves on a
        // periodic chart) shows up as a >pi jump; the gradient route is
        // undefined across it
        if (std::fabs(out.phi[s.idx[k]] - out.phi[f]) > 3.2) return;
        d += s.coef[k] * out.phi[s.idx[k]];
      }
      dphi[q] = d;
    }
    out.phase_grad_ok[f] = 1;
    for (int p = 0; p < n; ++p) {
      double s = 0.0;
      for (int q = 0; q < n; ++q) s += geo.metric.ginv(f, p, q) * dphi[q];
      out.v_from_phase[p][f] = hm * s - u_contra[p][f];
    }
  });

  // quantum potential -(hbar^2/2m)(lap sqrt rho)/sqrt rho, evaluated through
  // the log-density identity
  //   (lap sqrt rho)/sqrt rho = lap L + g^pq (d_p L)(d_q L),  L = ln(rho)/2.
  // Second-differencing sqrt(rho) directly loses ~eps/h^2 to cancellation
  // where the density spans many decades; L stays well scaled there (and the
  // identity is FD-exact for Gaussian wave packets).
  RealField log_amp(npts);
  for (std::size_t f = 0; f < npts; ++f)
    log_amp[f] = 0.5 * std::log(std::max(out.rho[f], 1e-308));
  const RealField lap = apply_laplace_beltrami(log_amp, geo.metric, chart, geo.weights);
  out.quantum_potential.assign(npts, 0.0);
  const double c = -spec.hbar * spec.hbar / (2.0 * spec.mass);
  std::vector<double> dl(n);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& ix, const std::vector<double>&) {
    if (!out.mask[f]) return;
    for (int q = 0; q < n; ++q) {
      const DerivStencil s = first_derivative_stencil(chart, f, q, ix[q]);
      double d = 0.0;
      for (int k = 0; k < s.count; ++k) d += s.coef[k] * log_amp[s.idx[k]];
      dl[q] = d;
    }
    double grad2 = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) grad2 += geo.metric.ginv(f, p, q) * dl[p] * dl[q];
    out.quantum_potential[f] = c * (lap[f] + grad2);
  });

  return out;
}

WaveFunction reconstruct(const MadelungFields& fields, const CoordinateChart& chart) {
  WaveFunction psi;
  psi.chart = chart;
  psi.values.assign(fields.rho.size(), Complex(0.0, 0.0));
  for (std::size_t f = 0; f < fields.rho.size(); ++f)
    if (fields.mask[f]) psi.values[f] = std::polar(std::sqrt(fields.rho[f]), fields.phi[f]);
  return psi;
}

ContinuityResult continuity_residual(const Trajectory& traj, const ProblemSpec& spec,
                                     const GeometryData& geo) {
  const std::size_t ns = traj.states.size();
  if (ns < 3) throw Error("continuity residual needs at least three stored samples");
  const std::size_t npts = traj.chart.size();
  const double dt_s = traj.dt * static_cast<double>(traj.stride);

  std::vector<RealField> rho(ns, RealField(npts));
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t f = 0; f < npts; ++f) rho[s][f] = std::norm(traj.states[s][f]);

  ContinuityResult res;
  res.times = traj.times;
  for (std::size_t s = 0; s < ns; ++s) {
    WaveFunction psi;
    psi.chart = traj.chart;
    psi.values = traj.states[s];
    psi.time = traj.times[s];
    const std::vector<RealField> u_contra = eval_gauge_contra(spec, geo, psi.time);
    const std::vector<RealField> j = flux_from_psi(psi, spec, geo, rho[s], u_contra);
    const RealField div = divergence(j, geo.metric, traj.chart);

    double l2 = 0.0, mx = 0.0, integral = 0.0;
    for (std::size_t f = 0; f < npts; ++f) {
      double dtrho;
      if (s == 0)
        dtrho = (-1.5 * rho[0][f] + 2.0 * rho[1][f] - 0.5 * rho[2][f]) / dt_s;
      else if (s == ns - 1)
        dtrho = (1.5 * rho[s][f] - 2.0 * rho[s - 1][f] + 0.5 * rho[s - 2][f]) / dt_s;
      else
        dtrho = (rho[s + 1][f] - rho[s - 1][f]) / (2.0 * dt_s);
      const double r = dtrho + div[f];
      l2 += geo.weights[f] * r * r;
      mx = std::max(mx, std::fabs(r));
      integral += geo.weights[f] * r;
    }
    res.l2.push_back(std::sqrt(l2));
    res.max_abs.push_back(mx);
    res.integral.push_back(integral);
    res.max_l2 = std::max(res.max_l2, res.l2.back());
  }
  return res;
}

HamiltonJacobiResult hamilton_jacobi_residual(const WaveFunction& psi, const ProblemSpec& spec,
                                              const GeometryData& geo, const RealField& dphi_dt) {
  const CoordinateChart& chart = psi.chart;
  const int n = chart.dim();
  const std::size_t npts = chart.size();
  MadelungFields fields = decompose(psi, spec, geo);

  HamiltonJacobiResult res;
  res.residual.assign(npts, 0.0);
  res.quantum_term = fields.quantum_potential;
  res.mask.assign(npts, 0);

  const double hbar = spec.hbar;
  const double mass = spec.mass;
  std::vector<double> slots(n + 1, 0.0);
  std::vector<double> dphi(n), ucov(n);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& ix, const std::vector<double>& x) {
    if (!fields.phase_grad_ok[f]) return;
    for (int q = 0; q < n; ++q) {
      const DerivStencil s = first_derivative_stencil(chart, f, q, ix[q]);
      double d = 0.0;
      for (int k = 0; k < s.count; ++k) d += s.coef[k] * fields.phi[s.idx[k]];
      dphi[q] = d;
    }
    for (int a = 0; a < n; ++a) slots[a] = x[a];
    slots[n] = psi.time;
    for (int p = 0; p < n; ++p) ucov[p] = spec.eval_gauge(p, slots);
    double kin = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        kin += geo.metric.ginv(f, p, q) * (hbar * dphi[p] - mass * ucov[p]) *
               (hbar * dphi[q] - mass * ucov[q]);
    kin /= 2.0 * mass;
    const double w = spec.eval_potential(slots);
    res.residual[f] = hbar * dphi_dt[f] + kin + w + fields.quantum_potential[f];
    res.mask[f] = 1;
    res.max_abs = std::max(res.max_abs, std::fabs(res.residual[f]));
  });
  return res;
}

}  // namespace nsqm
