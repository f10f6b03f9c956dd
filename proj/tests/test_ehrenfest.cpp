#include <cmath>

#include "doctest.h"
#include "nsqm/ehrenfest.hpp"
#include "test_util.hpp"

using namespace nsqm;
using namespace nsqm::testutil;

TEST_CASE("real eigenstate: zero mean velocity and zero mean force") {
  BuiltProblem bp = build_from_text(ho1d_text(512));
  EigenResult res = lowest_eigenpairs(bp.h, 1);
  WaveFunction psi;
  psi.chart = bp.spec->chart;
  psi.values = res.eigenvectors[0];

  const std::vector<double> v = mean_velocity(psi, *bp.spec, bp.geo);
  CHECK(std::fabs(v[0]) <= 1e-13);
  // <F> = -<dW/dx> = -<x> = 0 by symmetry of the state
  const std::vector<double> f = mean_force(psi, *bp.spec, bp.geo);
  CHECK(std::fabs(f[0]) <= 1e-11);
}

TEST_CASE("plane wave mean velocity") {
  const int n = 128, k = 2;
  BuiltProblem bp = build_from_text(free_periodic_text(n));
  WaveFunction psi = plane_wave(bp.spec->chart, bp.geo.weights, k);
  const double h = bp.spec->chart.spacing(0);
  const std::vector<double> v = mean_velocity(psi, *bp.spec, bp.geo);
  CHECK(v[0] == doctest::Approx(std::sin(k * h) / h).epsilon(1e-12));
}

TEST_CASE("coherent state mean velocity follows -A sin t") {
  BuiltProblem bp = build_from_text(ho1d_text(32768, 12.0));
  for (double t : {0.0, 0.7, 2.1, 4.4}) {
    WaveFunction psi = coherent_state(bp.spec->chart, bp.geo.weights, 1.0, t);
    const std::vector<double> v = mean_velocity(psi, *bp.spec, bp.geo);
    CHECK(std::fabs(v[0] - (-std::sin(t))) <= 1e-6);
  }
}

TEST_CASE("uniform force gives the exact gradient expectation") {
  BuiltProblem bp = build_from_text(
      "coordinates { x : (-40, 40) }\nmetric { g[1,1] = 1 }\n"
      "potential { W = -0.05*x }\ngrid { x : 1024 }\n");
  WaveFunction psi = gaussian_packet(bp.spec->chart, bp.geo.weights, -8.0, 3.0, 0.2);
  const std::vector<double> f = mean_force(psi, *bp.spec, bp.geo);
  CHECK(f[0] == doctest::Approx(0.05).epsilon(1e-13));
}

TEST_CASE("gauge force equals the Lorentz-form cross-product route in 3D") {
  // constant-curl gauge field on a flat periodic chart; the antisymmetric
  // tensor route and the explicit (v x B - B x v)/2 route are algebraically
  // identical, so they must agree to rounding
  BuiltProblem bp = build_from_text(
      "coordinates { x : (0, 2*pi) periodic y : (0, 2*pi) periodic z : (0, 2*pi) periodic }\n"
      "metric { g[1,1] = 1 g[2,2] = 1 g[3,3] = 1 }\n"
      "gauge { u[1] = -0.15*sin(y) u[2] = 0.1*sin(x) u[3] = 0.05*cos(x) }\n"
      "potential { W = 0 }\ngrid { x : 12 y : 12 z : 12 }\n");
  const CoordinateChart& chart = bp.spec->chart;
  const std::size_t npts = chart.size();

  WaveFunction psi;
  psi.chart = chart;
  psi.values.resize(npts);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>&, const std::vector<double>& x) {
    psi.values[f] = std::polar(1.0 + 0.3 * std::cos(x[0]) * std::sin(x[1]),
                               x[0] + 0.5 * x[2] - 0.2 * std::sin(x[1]));
  });
  normalize(psi.values, bp.geo.weights);

  const std::vector<double> f_tensor = mean_force(psi, *bp.spec, bp.geo);

  // direct cross-product route: B = curl u (same stencils), then
  // (m/2) <psi, (v x B - B x v) psi>
  std::vector<RealField> u_cov(3, RealField(npts));
  for_each_point(chart, [&](std::size_t f, const std::vector<int>&, const std::vector<double>& x) {
    u_cov[0][f] = -0.15 * std::sin(x[1]);
    u_cov[1][f] = 0.1 * std::sin(x[0]);
    u_cov[2][f] = 0.05 * std::cos(x[0]);
  });
  std::vector<std::vector<RealField>> du(3);
  for (int s = 0; s < 3; ++s) {
    du[s].resize(3);
    for (int q = 0; q < 3; ++q) du[s][q] = derivative_axis(u_cov[q], chart, s);
  }
  std::vector<RealField> b(3, RealField(npts));
  for (std::size_t f = 0; f < npts; ++f) {
    b[0][f] = du[1][2][f] - du[2][1][f];
    b[1][f] = du[2][0][f] - du[0][2][f];
    b[2][f] = du[0][1][f] - du[1][0][f];
  }

  const std::vector<RealField> u_contra = gauge_field_contravariant(*bp.spec, bp.geo, 0.0);
  // v^op psi and v^op (B_k psi)
  auto apply_v = [&](const ComplexField& in, int comp) {
    ComplexField out(npts);
    for_each_point(chart,
                   [&](std::size_t f, const std::vector<int>& ix, const std::vector<double>&) {
                     const DerivStencil s = first_derivative_stencil(chart, f, comp, ix[comp]);
                     Complex d = 0.0;
                     for (int k = 0; k < s.count; ++k) d += s.coef[k] * in[s.idx[k]];
                     out[f] = Complex(0.0, -1.0) * d - u_contra[comp][f] * in[f];
                   });
    return out;
  };

  std::vector<ComplexField> vpsi(3);
  for (int c = 0; c < 3; ++c) vpsi[c] = apply_v(psi.values, c);

  std::vector<double> f_cross(3, 0.0);
  const int eps[3][3][3] = {{{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
                            {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
                            {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
  for (int i = 0; i < 3; ++i) {
    ComplexField total(npts, Complex(0, 0));
    for (int jj = 0; jj < 3; ++jj)
      for (int kk = 0; kk < 3; ++kk) {
        if (eps[i][jj][kk] == 0) continue;
        // v_j (B_k psi) term
        ComplexField bk_psi(npts);
        for (std::size_t f = 0; f < npts; ++f) bk_psi[f] = b[kk][f] * psi.values[f];
        const ComplexField t1 = apply_v(bk_psi, jj);
        // B_j (v_k psi) term
        for (std::size_t f = 0; f < npts; ++f)
          total[f] += 0.5 * static_cast<double>(eps[i][jj][kk]) *
                      (t1[f] - b[jj][f] * vpsi[kk][f]);
      }
    Complex acc = 0.0;
    for (std::size_t f = 0; f < npts; ++f)
      acc += bp.geo.weights[f] * std::conj(psi.values[f]) * total[f];
    f_cross[i] = acc.real();
  }

  for (int i = 0; i < 3; ++i) CHECK(std::fabs(f_tensor[i] - f_cross[i]) <= 1e-12);
}

TEST_CASE("commutator route agrees with the direct force expectation") {
  // the two routes differ at discretization order; refining the grid must
  // shrink the gap quadratically
  auto gap = [](int n) {
    BuiltProblem bp = build_from_text(ho1d_text(n, 12.0));
    WaveFunction psi = coherent_state(bp.spec->chart, bp.geo.weights, 1.0, 0.4);
    const std::vector<double> direct = mean_force(psi, *bp.spec, bp.geo);
    const std::vector<double> comm = mean_force_commutator(psi, *bp.spec, bp.geo, bp.h);
    return std::fabs(direct[0] - comm[0]);
  };
  const double g1 = gap(1024);
  const double g2 = gap(2048);
  CHECK(g1 <= 5e-4);
  CHECK(g1 / g2 >= 3.5);

  BuiltProblem gp = build_from_text(gauge_periodic_text(256, 0.3));
  WaveFunction pw = plane_wave(gp.spec->chart, gp.geo.weights, 2);
  const std::vector<double> d2 = mean_force(pw, *gp.spec, gp.geo);
  const std::vector<double> c2 = mean_force_commutator(pw, *gp.spec, gp.geo, gp.h);
  CHECK(std::fabs(d2[0] - c2[0]) <= 1e-10);
}

TEST_CASE("stationary state has vanishing Ehrenfest residual") {
  BuiltProblem bp = build_from_text(ho1d_text(256));
  EigenResult res = lowest_eigenpairs(bp.h, 1);
  WaveFunction psi0;
  psi0.chart = bp.spec->chart;
  psi0.values = res.eigenvectors[0];
  Trajectory traj = evolve(bp.h, psi0, 1e-3, 40, 10);
  EhrenfestReport rep = ehrenfest_residual(traj, *bp.spec, bp.geo);
  CHECK(rep.max_residual <= 1e-8);
  CHECK(!rep.boundary_leakage_warning);
}

TEST_CASE("uniform force trajectory: dV/dt = F0/m") {
  BuiltProblem bp = build_from_text(
      "coordinates { x : (-40, 40) }\nmetric { g[1,1] = 1 }\n"
      "potential { W = -0.05*x }\ngrid { x : 4000 }\n");
  WaveFunction psi0 = gaussian_packet(bp.spec->chart, bp.geo.weights, -4.0, 4.0, 0.0);
  Trajectory traj = evolve(bp.h, psi0, 2e-3, 500, 125);
  EhrenfestReport rep = ehrenfest_residual(traj, *bp.spec, bp.geo);
  for (std::size_t s = 0; s < rep.residual.size(); ++s) {
    const std::size_t idx = s + 1;
    const double dv = rep.residual[s][0] + rep.mean_force[idx][0] / bp.spec->mass;
    CHECK(std::fabs(dv - 0.05) <= 1e-6);
  }
  CHECK(rep.max_residual <= 1e-6);
}

TEST_CASE("coherent-state Ehrenfest residual converges at second order") {
  auto run = [&](int n, double dt, long steps) {
    BuiltProblem bp = build_from_text(ho1d_text(n, 12.0));
    WaveFunction psi0 = coherent_state(bp.spec->chart, bp.geo.weights, 1.0, 0.0);
    Trajectory traj = evolve(bp.h, psi0, dt, steps, 2);
    EhrenfestReport rep = ehrenfest_residual(traj, *bp.spec, bp.geo);
    return rep.max_residual;
  };
  const double e1 = run(128, 4e-2, 16);
  const double e2 = run(256, 2e-2, 32);
  CHECK(e1 / e2 >= 3.5);
}
