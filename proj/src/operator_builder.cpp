#include "nsqm/operator_builder.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "nsqm/rng.hpp"

namespace nsqm {

namespace {

// covariant gauge components u_p on the grid at time t; empty when u == 0
std::vector<RealField> eval_gauge_fields(const ProblemSpec& spec, const CoordinateChart& chart,
                                         double t) {
  if (!spec.has_gauge()) return {};
  const int n = chart.dim();
  std::vector<RealField> u(n, RealField(chart.size(), 0.0));
  std::vector<double> slots(n + 1, 0.0);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>&, const std::vector<double>& x) {
    for (int a = 0; a < n; ++a) slots[a] = x[a];
    slots[n] = t;
    for (int p = 0; p < n; ++p) u[p][f] = spec.eval_gauge(p, slots);
  });
  return u;
}

}  // namespace

DiscretizedHamiltonian build_hamiltonian(std::shared_ptr<const ProblemSpec> spec,
                                         const GeometryData& geo, double t) {
  const ProblemSpec& ps = *spec;
  const CoordinateChart& chart = ps.chart;
  const int n = chart.dim();
  const std::size_t npts = chart.size();
  const MetricField& metric = geo.metric;
  const RealField& w = geo.weights;
  const double hbar = ps.hbar;
  const double mass = ps.mass;

  std::vector<Eigen::Triplet<Complex>> trip;

  // kinetic: (hbar^2/2m) (1/w) A with A the symmetric Laplace-Beltrami form
  {
    const Eigen::SparseMatrix<double> a = laplace_beltrami_form(metric, chart, w);
    const double scale = hbar * hbar / (2.0 * mass);
    trip.reserve(static_cast<std::size_t>(a.nonZeros()) + npts * (1 + 2 * n));
    for (int col = 0; col < a.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
        trip.emplace_back(it.row(), it.col(), Complex(scale * it.value() / w[it.row()], 0.0));
  }

  // gauge term (i hbar/2)(U - U^dagger_w) with U = u^p D_p, plus the scalar
  // (m/2) u_p g^pq u_q folded into the diagonal below
  const std::vector<RealField> u_cov = eval_gauge_fields(ps, chart, t);
  RealField u_sq(npts, 0.0);
  if (!u_cov.empty()) {
    std::vector<RealField> u_contra(n, RealField(npts, 0.0));
    for (std::size_t f = 0; f < npts; ++f)
      for (int p = 0; p < n; ++p) {
        double s = 0.0;
        for (int q = 0; q < n; ++q) s += metric.ginv(f, p, q) * u_cov[q][f];
        u_contra[p][f] = s;
        u_sq[f] += s * u_cov[p][f];
      }
    const Complex ih2(0.0, 0.5 * hbar);
    std::vector<int> ix;
    for_each_point(chart,
                   [&](std::size_t f, const std::vector<int>& idx, const std::vector<double>&) {
                     for (int p = 0; p < n; ++p) {
                       if (u_contra[p][f] == 0.0) continue;
                       const DerivStencil s = first_derivative_stencil(chart, f, p, idx[p]);
                       for (int k = 0; k < s.count; ++k) {
                         // U part, row f
                         trip.emplace_back(f, s.idx[k], ih2 * (u_contra[p][f] * s.coef[k]));
                         // -U^dagger_w part, column f
                         trip.emplace_back(
                             s.idx[k], f,
                             -ih2 * (u_contra[p][f] * s.coef[k] * w[f] / w[s.idx[k]]));
                       }
                     }
                   });
  }

  // scalar part: W + (m/2) u.u
  {
    std::vector<double> slots(n + 1, 0.0);
    for_each_point(chart,
                   [&](std::size_t f, const std::vector<int>&, const std::vector<double>& x) {
                     for (int a = 0; a < n; ++a) slots[a] = x[a];
                     slots[n] = t;
                     const double v = ps.eval_potential(slots) + 0.5 * mass * u_sq[f];
                     trip.emplace_back(f, f, Complex(v, 0.0));
                   });
  }

  DiscretizedHamiltonian h;
  h.matrix.resize(static_cast<long>(npts), static_cast<long>(npts));
  h.matrix.setFromTriplets(trip.begin(), trip.end());
  h.weights = w;
  h.chart = chart;
  h.time_dependent = ps.time_dependent;
  h.classical_source = std::move(spec);
  h.built_at_time = t;
  h.hbar = hbar;
  return h;
}

MomentumApplication apply_momentum(const WaveFunction& psi, const GeometryData& geo,
                                   double hbar) {
  const CoordinateChart& chart = psi.chart;
  const int n = chart.dim();
  const std::size_t npts = chart.size();
  MomentumApplication out;
  out.covariant.assign(n, ComplexField(npts, 0.0));
  out.contravariant.assign(n, ComplexField(npts, 0.0));
  const Complex mi(0.0, -hbar);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& idx, const std::vector<double>&) {
    for (int p = 0; p < n; ++p) {
      const DerivStencil s = first_derivative_stencil(chart, f, p, idx[p]);
      Complex d = 0.0;
      for (int k = 0; k < s.count; ++k) d += s.coef[k] * psi.values[s.idx[k]];
      out.covariant[p][f] = mi * d;
    }
    for (int p = 0; p < n; ++p) {
      Complex s = 0.0;
      for (int q = 0; q < n; ++q) s += geo.metric.ginv(f, p, q) * out.covariant[q][f];
      out.contravariant[p][f] = s;
    }
  });
  return out;
}

HermiticityResult hermiticity_check(const DiscretizedHamiltonian& h, int trials,
                                    std::uint64_t seed) {
  const std::size_t npts = h.size();
  Xoshiro256pp rng(seed);
  HermiticityResult res;
  ComplexField phi(npts), psi(npts);
  for (int trial = 0; trial < trials; ++trial) {
    for (std::size_t i = 0; i < npts; ++i) {
      phi[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
      psi[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    }
    const ComplexField hpsi = h.apply(psi);
    const ComplexField hphi = h.apply(phi);
    const Complex s1 = weighted_dot(h.weights, phi, hpsi);
    const Complex s2 = std::conj(weighted_dot(h.weights, psi, hphi));
    const double defect = std::abs(s1 - s2);
    const double nphi = weighted_norm(h.weights, phi);
    const double npsi = weighted_norm(h.weights, psi);
    const double scale = std::max(weighted_norm(h.weights, hpsi) * nphi,
                                  weighted_norm(h.weights, hphi) * npsi);
    res.max_relative = std::max(res.max_relative, defect / std::max(scale, 1e-300));
    res.max_raw = std::max(res.max_raw, defect / std::max(nphi * npsi, 1e-300));
  }
  return res;
}

double classical_hamiltonian(const ProblemSpec& spec, const std::vector<double>& x,
                             const std::vector<double>& p_cov, double t) {
  const int n = spec.dim();
  std::vector<double> slots(n + 1, 0.0);
  for (int a = 0; a < n; ++a) slots[a] = x[a];
  slots[n] = t;

  Eigen::MatrixXd g(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const Expression& e = spec.metric_entry(p, q);
      g(p, q) = e.empty() ? 0.0 : e.eval(slots);
    }
  Eigen::LLT<Eigen::MatrixXd> llt(g.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success)
    throw SingularMetric("metric not positive definite at evaluation point", x);

  Eigen::VectorXd kin(n);
  for (int p = 0; p < n; ++p) kin[p] = p_cov[p] - spec.mass * spec.eval_gauge(p, slots);
  const Eigen::VectorXd raised = llt.solve(kin);
  return 0.5 / spec.mass * kin.dot(raised) + spec.eval_potential(slots);
}

}  // namespace nsqm
