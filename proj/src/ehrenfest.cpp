#include "nsqm/ehrenfest.hpp"

#include <cmath>

namespace nsqm {

namespace {

// covariant gauge components on the grid
std::vector<RealField> gauge_covariant(const ProblemSpec& spec, const CoordinateChart& chart,
                                       double t) {
  const int n = chart.dim();
  std::vector<RealField> u(n, RealField(chart.size(), 0.0));
  if (!spec.has_gauge()) return u;
  std::vector<double> slots(n + 1, 0.0);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>&, const std::vector<double>& x) {
    for (int a = 0; a < n; ++a) slots[a] = x[a];
    slots[n] = t;
    for (int p = 0; p < n; ++p) u[p][f] = spec.eval_gauge(p, slots);
  });
  return u;
}

// v^op psi: contravariant components g^pq (-i hbar/m d_q psi) - u^p psi
std::vector<ComplexField> apply_velocity(const WaveFunction& psi, const ProblemSpec& spec,
                                         const GeometryData& geo,
                                         const std::vector<RealField>& u_contra) {
  const CoordinateChart& chart = psi.chart;
  const int n = chart.dim();
  const std::size_t npts = chart.size();
  std::vector<ComplexField> out(n, ComplexField(npts, 0.0));
  const Complex c(0.0, -spec.hbar / spec.mass);
  std::vector<Complex> d(n);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& ix, const std::vector<double>&) {
    for (int q = 0; q < n; ++q) {
      const DerivStencil s = first_derivative_stencil(chart, f, q, ix[q]);
      Complex acc = 0.0;
      for (int k = 0; k < s.count; ++k) acc += s.coef[k] * psi.values[s.idx[k]];
      d[q] = acc;
    }
    for (int p = 0; p < n; ++p) {
      Complex acc = 0.0;
      for (int q = 0; q < n; ++q) acc += geo.metric.ginv(f, p, q) * d[q];
      out[p][f] = c * acc - u_contra[p][f] * psi.values[f];
    }
  });
  return out;
}

}  // namespace

std::vector<double> mean_velocity(const WaveFunction& psi, const ProblemSpec& spec,
                                  const GeometryData& geo) {
  const std::vector<RealField> j = probability_flux(psi, spec, geo);
  std::vector<double> v(spec.dim(), 0.0);
  for (int p = 0; p < spec.dim(); ++p)
    for (std::size_t f = 0; f < j[p].size(); ++f) v[p] += geo.weights[f] * j[p][f];
  return v;
}

std::vector<double> mean_force(const WaveFunction& psi, const ProblemSpec& spec,
                               const GeometryData& geo) {
  const CoordinateChart& chart = psi.chart;
  const int n = chart.dim();
  const std::size_t npts = chart.size();
  const double t = psi.time;
  const double mass = spec.mass;

  RealField rho(npts);
  for (std::size_t f = 0; f < npts; ++f) rho[f] = std::norm(psi.values[f]);

  // -grad W term, raised to contravariant components
  RealField wfield(npts);
  {
    std::vector<double> slots(n + 1, 0.0);
    for_each_point(chart,
                   [&](std::size_t f, const std::vector<int>&, const std::vector<double>& x) {
                     for (int a = 0; a < n; ++a) slots[a] = x[a];
                     slots[n] = t;
                     wfield[f] = spec.eval_potential(slots);
                   });
  }
  std::vector<RealField> dw(n);
  for (int q = 0; q < n; ++q) dw[q] = derivative_axis(wfield, chart, q);

  std::vector<double> force(n, 0.0);
  for (std::size_t f = 0; f < npts; ++f)
    for (int p = 0; p < n; ++p) {
      double s = 0.0;
      for (int q = 0; q < n; ++q) s += geo.metric.ginv(f, p, q) * dw[q][f];
      force[p] -= geo.weights[f] * rho[f] * s;
    }

  if (!spec.has_gauge()) return force;

  // -m d_t u: syntactic time derivative by central differences
  if (spec.time_dependent) {
    const double dt = 1e-6 * std::max(1.0, std::fabs(t));
    const std::vector<RealField> up = gauge_covariant(spec, chart, t + dt);
    const std::vector<RealField> um = gauge_covariant(spec, chart, t - dt);
    for (std::size_t f = 0; f < npts; ++f)
      for (int p = 0; p < n; ++p) {
        double s = 0.0;
        for (int q = 0; q < n; ++q)
          s += geo.metric.ginv(f, p, q) * (up[q][f] - um[q][f]) / (2.0 * dt);
        force[p] -= geo.weights[f] * rho[f] * mass * s;
      }
  }

  // (1/2)(f.v^op + v^op.f) with f_sq = m(d_s u_q - d_q u_s)
  const std::vector<RealField> u_cov = gauge_covariant(spec, chart, t);
  std::vector<RealField> u_contra(n, RealField(npts, 0.0));
  for (std::size_t f = 0; f < npts; ++f)
    for (int p = 0; p < n; ++p) {
      double s = 0.0;
      for (int q = 0; q < n; ++q) s += geo.metric.ginv(f, p, q) * u_cov[q][f];
      u_contra[p][f] = s;
    }

  // f_sq fields
  std::vector<std::vector<RealField>> du(n);  // du[s][q] = d_s u_q
  for (int s = 0; s < n; ++s) {
    du[s].resize(n);
    for (int q = 0; q < n; ++q) du[s][q] = derivative_axis(u_cov[q], chart, s);
  }
  auto f_cov = [&](std::size_t f, int s, int q) {
    return mass * (du[s][q][f] - du[q][s][f]);
  };

  const std::vector<ComplexField> vpsi = apply_velocity(psi, spec, geo, u_contra);

  // first half: (f.v^op)^p = g^{ps} f_{sq} (v^op psi)^q
  std::vector<Complex> acc(n, Complex(0.0, 0.0));
  for (std::size_t f = 0; f < npts; ++f) {
    const Complex pc = std::conj(psi.values[f]) * geo.weights[f];
    for (int p = 0; p < n; ++p) {
      Complex term = 0.0;
      for (int s = 0; s < n; ++s) {
        double g_ps = geo.metric.ginv(f, p, s);
        if (g_ps == 0.0) continue;
        for (int q = 0; q < n; ++q) term += g_ps * f_cov(f, s, q) * vpsi[q][f];
      }
      acc[p] += 0.5 * pc * term;
    }
  }

  // second half: the adjoint ordering g^{pr} (v^op)^q [f_{rq} psi], i.e. the
  // anticommutator (1/2){f_rq, v^q} per free index r; this is the Hermitian
  // reading that reduces to (1/2)(v x B - B x v) in flat 3-space
  {
    WaveFunction tmp;
    tmp.chart = chart;
    tmp.time = psi.time;
    for (int r = 0; r < n; ++r)
      for (int q = 0; q < n; ++q) {
        bool any = false;
        for (std::size_t f = 0; f < npts; ++f)
          if (f_cov(f, r, q) != 0.0) {
            any = true;
            break;
          }
        if (!any) continue;
        tmp.values.assign(npts, Complex(0.0, 0.0));
        for (std::size_t f = 0; f < npts; ++f) tmp.values[f] = f_cov(f, r, q) * psi.values[f];
        const std::vector<ComplexField> vtmp = apply_velocity(tmp, spec, geo, u_contra);
        for (std::size_t f = 0; f < npts; ++f) {
          const Complex pc = std::conj(psi.values[f]) * geo.weights[f];
          for (int p = 0; p < n; ++p) {
            const double g_pr = geo.metric.ginv(f, p, r);
            if (g_pr == 0.0) continue;
            acc[p] += 0.5 * pc * g_pr * vtmp[q][f];
          }
        }
      }
  }
  for (int p = 0; p < n; ++p) force[p] += acc[p].real();
  return force;
}

std::vector<double> mean_force_commutator(const WaveFunction& psi, const ProblemSpec& spec,
                                          const GeometryData& geo,
                                          const DiscretizedHamiltonian& h) {
  const int n = spec.dim();
  const std::size_t npts = psi.values.size();
  const std::vector<RealField> u_contra = gauge_field_contravariant(spec, geo, psi.time);

  WaveFunction hpsi;
  hpsi.chart = psi.chart;
  hpsi.time = psi.time;
  hpsi.values = h.apply(psi.values);
  const std::vector<ComplexField> v_hpsi = apply_velocity(hpsi, spec, geo, u_contra);
  const std::vector<ComplexField> v_psi = apply_velocity(psi, spec, geo, u_contra);

  std::vector<double> force(n, 0.0);
  const Complex scale = spec.mass / Complex(0.0, spec.hbar);
  for (int p = 0; p < n; ++p) {
    ComplexField hv = h.apply(v_psi[p]);
    Complex acc = 0.0;
    for (std::size_t f = 0; f < npts; ++f)
      acc += geo.weights[f] * std::conj(psi.values[f]) * (v_hpsi[p][f] - hv[f]);
    force[p] = (scale * acc).real();
  }
  return force;
}

EhrenfestReport ehrenfest_residual(const Trajectory& traj, const ProblemSpec& spec,
                                   const GeometryData& geo) {
  const std::size_t ns = traj.states.size();
  if (ns < 3) throw Error("ehrenfest residual needs at least three stored samples");
  const int n = spec.dim();
  const double dt_s = traj.dt * static_cast<double>(traj.stride);

  EhrenfestReport rep;
  rep.times = traj.times;
  for (std::size_t s = 0; s < ns; ++s) {
    WaveFunction psi;
    psi.chart = traj.chart;
    psi.values = traj.states[s];
    psi.time = traj.times[s];
    rep.mean_velocity.push_back(mean_velocity(psi, spec, geo));
    rep.mean_force.push_back(mean_force(psi, spec, geo));
  }

  for (std::size_t s = 1; s + 1 < ns; ++s) {
    std::vector<double> r(n);
    for (int p = 0; p < n; ++p) {
      const double dv = (rep.mean_velocity[s + 1][p] - rep.mean_velocity[s - 1][p]) / (2.0 * dt_s);
      r[p] = dv - rep.mean_force[s][p] / spec.mass;
      rep.max_residual = std::max(rep.max_residual, std::fabs(r[p]));
    }
    rep.residual_times.push_back(traj.times[s]);
    rep.residual.push_back(std::move(r));
  }

  // probability on the Dirichlet edge layer of the final state
  double edge = 0.0, total = 0.0;
  const ComplexField& last = traj.states.back();
  for_each_point(traj.chart,
                 [&](std::size_t f, const std::vector<int>& ix, const std::vector<double>&) {
                   const double m = geo.weights[f] * std::norm(last[f]);
                   total += m;
                   if (traj.chart.on_dirichlet_edge(ix)) edge += m;
                 });
  rep.boundary_mass = total > 0 ? edge / total : 0.0;
  rep.boundary_leakage_warning = rep.boundary_mass > 1e-10;
  return rep;
}

}  // namespace nsqm
