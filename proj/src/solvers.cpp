#include "nsqm/solvers.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>

#include "nsqm/rng.hpp"

namespace nsqm {

namespace {

using Eigen::VectorXcd;
using Eigen::VectorXd;

// similarity transform S H S^-1 with S = diag(sqrt(w)); plain-Hermitian when
// H is Hermitian under the weighted inner product
SparseComplex symmetrized_matrix(const DiscretizedHamiltonian& h) {
  SparseComplex m = h.matrix;
  const std::size_t n = h.size();
  std::vector<double> sqw(n);
  for (std::size_t i = 0; i < n; ++i) sqw[i] = std::sqrt(h.weights[i]);
  for (int col = 0; col < m.outerSize(); ++col)
    for (SparseComplex::InnerIterator it(m, col); it; ++it)
      it.valueRef() *= sqw[static_cast<std::size_t>(it.row())] / sqw[static_cast<std::size_t>(col)];
  return m;
}

// smallest W over the grid: a rigorous lower bound for the spectrum of the
// assembled operator (the kinetic + gauge + u^2 block is a nonnegative form)
double potential_lower_bound(const DiscretizedHamiltonian& h) {
  if (!h.classical_source) return -1e300;
  const ProblemSpec& spec = *h.classical_source;
  const int n = spec.dim();
  double wmin = 1e300;
  std::vector<double> slots(n + 1, 0.0);
  for_each_point(spec.chart,
                 [&](std::size_t, const std::vector<int>&, const std::vector<double>& x) {
                   for (int a = 0; a < n; ++a) slots[a] = x[a];
                   slots[n] = h.built_at_time;
                   wmin = std::min(wmin, spec.eval_potential(slots));
                 });
  return wmin;
}

double gershgorin_lower_bound(const SparseComplex& m) {
  const long n = m.rows();
  VectorXd diag(n), offsum(n);
  diag.setZero();
  offsum.setZero();
  for (int col = 0; col < m.outerSize(); ++col)
    for (SparseComplex::InnerIterator it(m, col); it; ++it) {
      if (it.row() == col)
        diag[it.row()] += it.value().real();
      else
        offsum[it.row()] += std::abs(it.value());
    }
  return (diag - offsum).minCoeff();
}

struct ShiftedSolver {
  virtual ~ShiftedSolver() = default;
  virtual VectorXcd apply(const VectorXcd& b) const = 0;
};

struct LuSolver final : ShiftedSolver {
  Eigen::SparseLU<SparseComplex> lu;
  explicit LuSolver(const SparseComplex& a) {
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error("sparse LU factorization failed");
  }
  VectorXcd apply(const VectorXcd& b) const override { return lu.solve(b); }
};

struct CgSolver final : ShiftedSolver {
  Eigen::ConjugateGradient<SparseComplex, Eigen::Lower | Eigen::Upper> cg;
  explicit CgSolver(const SparseComplex& a) {
    cg.setTolerance(1e-14);
    cg.setMaxIterations(200000);
    cg.compute(a);
  }
  VectorXcd apply(const VectorXcd& b) const override { return cg.solve(b); }
};

struct RitzPair {
  double lambda;
  VectorXcd vec;
};

EigenResult finish(const DiscretizedHamiltonian& h, std::vector<RitzPair>& pairs, int k) {
  std::sort(pairs.begin(), pairs.end(),
            [](const RitzPair& a, const RitzPair& b) { return a.lambda < b.lambda; });
  const std::size_t n = h.size();
  std::vector<double> isqw(n);
  for (std::size_t i = 0; i < n; ++i) isqw[i] = 1.0 / std::sqrt(h.weights[i]);
  EigenResult res;
  for (int i = 0; i < k; ++i) {
    ComplexField psi(n);
    for (std::size_t j = 0; j < n; ++j) psi[j] = pairs[i].vec[j] * isqw[j];
    ComplexField hpsi = h.apply(psi);
    // Rayleigh quotient: first-order stationary, so its error goes as the
    // squared residual over the gap
    const double lambda = weighted_dot(h.weights, psi, hpsi).real();
    double r2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) r2 += h.weights[j] * std::norm(hpsi[j] - lambda * psi[j]);
    res.eigenvalues.push_back(lambda);
    res.eigenvectors.push_back(std::move(psi));
    res.residuals.push_back(std::sqrt(r2));
  }
  // ascending order can be perturbed by the quotient update within clusters
  for (std::size_t i = 1; i < res.eigenvalues.size(); ++i)
    for (std::size_t j = i; j > 0 && res.eigenvalues[j] < res.eigenvalues[j - 1]; --j) {
      std::swap(res.eigenvalues[j], res.eigenvalues[j - 1]);
      std::swap(res.eigenvectors[j], res.eigenvectors[j - 1]);
      std::swap(res.residuals[j], res.residuals[j - 1]);
    }
  return res;
}

EigenResult dense_solve(const DiscretizedHamiltonian& h, int k) {
  SparseComplex ms = symmetrized_matrix(h);
  Eigen::MatrixXcd m = Eigen::MatrixXcd(ms);
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw Error("dense eigensolver failed");
  std::vector<RitzPair> pairs;
  for (int i = 0; i < k; ++i) pairs.push_back({es.eigenvalues()[i], es.eigenvectors().col(i)});
  return finish(h, pairs, k);
}

// one shift-invert Lanczos sweep with full reorthogonalization and growable
// basis storage; returns the k best Ritz pairs (sorted by |theta| descending)
std::vector<RitzPair> lanczos_sweep(const ShiftedSolver& solver, double sigma, long n, int k,
                                    int max_krylov, Xoshiro256pp& rng,
                                    const std::function<void(VectorXcd&)>& project) {
  std::vector<VectorXcd> basis;
  basis.reserve(64);
  std::vector<double> alpha, beta;
  {
    VectorXcd v0(n);
    for (long i = 0; i < n; ++i) v0[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (project) project(v0);
    const double nn = v0.norm();
    if (nn == 0.0) throw Error("projector annihilated the start vector");
    basis.push_back(v0 / nn);
  }

  std::vector<RitzPair> out;
  for (int j = 0; j < max_krylov; ++j) {
    VectorXcd w = solver.apply(basis[j]);
    if (project) project(w);
    alpha.push_back(std::real(basis[j].dot(w)));
    w -= alpha[j] * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    for (int pass = 0; pass < 2; ++pass)
      for (const VectorXcd& b : basis) w -= b.dot(w) * b;
    double bn = w.norm();
    if (bn < 1e-13) {
      VectorXcd fresh(n);
      for (long i = 0; i < n; ++i) fresh[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
      if (project) project(fresh);
      for (int pass = 0; pass < 2; ++pass)
        for (const VectorXcd& b : basis) fresh -= b.dot(fresh) * b;
      if (fresh.norm() < 1e-12) {
        beta.push_back(0.0);
        break;  // whole (projected) space exhausted
      }
      beta.push_back(0.0);
      basis.push_back(fresh.normalized());
    } else {
      beta.push_back(bn);
      basis.push_back(w / bn);
    }

    const int built = j + 1;
    const bool last = j == max_krylov - 1;
    if (built < k || (built % 4 != 0 && !last)) continue;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(built, built);
    for (int i = 0; i < built; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < built) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    std::vector<int> order(built);
    for (int i = 0; i < built; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::fabs(es.eigenvalues()[a]) > std::fabs(es.eigenvalues()[b]);
    });
    const int avail = std::min(k, built);
    bool all_tight = true;
    for (int i = 0; i < avail; ++i) {
      const double theta = es.eigenvalues()[order[i]];
      const double bound = std::fabs(beta[j] * es.eigenvectors()(built - 1, order[i]));
      if (bound > 1e-11 * std::max(1e-6, std::fabs(theta))) all_tight = false;
    }
    if (all_tight || last) {
      out.clear();
      for (int i = 0; i < avail; ++i) {
        const double theta = es.eigenvalues()[order[i]];
        if (theta == 0.0) continue;
        RitzPair p;
        p.lambda = sigma + 1.0 / theta;
        p.vec = VectorXcd::Zero(n);
        for (int c = 0; c < built; ++c) p.vec += es.eigenvectors()(c, order[i]) * basis[c];
        p.vec.normalize();
        out.push_back(std::move(p));
      }
      if (all_tight && static_cast<int>(out.size()) >= k) return out;
    }
  }
  return out;
}

}  // namespace

EigenResult lowest_eigenpairs(const DiscretizedHamiltonian& h, int k, const EigenOptions& opt) {
  const long n = static_cast<long>(h.size());
  if (k < 1) throw Error("need k >= 1 eigenpairs");
  if (k >= n) throw Error("k must be below the grid size");

  if (static_cast<std::size_t>(n) < opt.dense_threshold && !opt.project) return dense_solve(h, k);

  const SparseComplex m = symmetrized_matrix(h);
  const bool use_lu = h.chart.dim() == 1 || static_cast<std::size_t>(n) <= opt.lu_threshold;

  const double wmin = potential_lower_bound(h);
  const double glb = wmin > -1e299 ? wmin : gershgorin_lower_bound(m);
  double sigma =
      opt.sigma ? *opt.sigma : glb - std::max(1e-8, 1e-3 * std::max(1.0, std::fabs(glb)));

  int max_krylov = opt.max_krylov > 0
                       ? opt.max_krylov
                       : static_cast<int>(std::min<long>(n - 1, std::max(3 * k + 40, 160)));

  SparseComplex identity(n, n);
  identity.setIdentity();
  Xoshiro256pp rng(opt.seed);

  std::vector<double> last_residuals;
  std::vector<double> previous_set;
  for (int stage = 0; stage < opt.max_stages; ++stage) {
    SparseComplex shifted = m - sigma * identity;
    std::unique_ptr<ShiftedSolver> solver;
    if (use_lu)
      solver = std::make_unique<LuSolver>(shifted);
    else
      solver = std::make_unique<CgSolver>(shifted);

    std::vector<RitzPair> pairs =
        lanczos_sweep(*solver, sigma, n, k, max_krylov, rng, opt.project);

    if (std::getenv("NSQM_EIG_TRACE")) {
      std::fprintf(stderr, "eig stage %d: sigma=%.6e pairs=%zu m=%d\n", stage, sigma,
                   pairs.size(), max_krylov);
      for (const auto& p : pairs) std::fprintf(stderr, "   lambda=%.9e\n", p.lambda);
    }
    if (static_cast<int>(pairs.size()) >= k) {
      // Rayleigh-quotient-iteration polish: shift-invert Ritz vectors carry a
      // residual floor of order eps ||M|| / theta, far above eps ||M|| for
      // eigenvalues away from the shift; one or two near-singular solves per
      // pair push them down to the attainable floor (LU path only)
      if (use_lu) {
        for (auto& p : pairs) {
          double shift = p.lambda;
          for (int it = 0; it < 2; ++it) {
            SparseComplex a = m - shift * identity;
            Eigen::SparseLU<SparseComplex> lu;
            lu.compute(a);
            if (lu.info() != Eigen::Success) break;
            VectorXcd y = lu.solve(p.vec);
            const double nn = y.norm();
            if (!(nn > 0.0) || !std::isfinite(nn)) break;
            y /= nn;
            p.vec = y;
            shift = std::real(y.dot(m * y));
            p.lambda = shift;
          }
        }
      }
      EigenResult res = finish(h, pairs, k);
      last_residuals = res.residuals;
      bool ok = true;
      for (double r : res.residuals)
        if (!(r <= opt.tol)) ok = false;
      // A sweep started far below the spectrum can return a plausible-looking
      // but incomplete set (polish converges junk Ritz data onto genuine yet
      // wrong eigenvalues), so the LU path additionally demands that two
      // consecutive stages reproduce the same set before accepting it.
      bool stable = !use_lu;
      if (use_lu && previous_set.size() == res.eigenvalues.size()) {
        stable = true;
        for (std::size_t i = 0; i < previous_set.size(); ++i)
          if (std::fabs(previous_set[i] - res.eigenvalues[i]) >
              std::max(1e-9, 1e-7 * std::fabs(res.eigenvalues[i])))
            stable = false;
      }
      if (ok && stable) return res;
      previous_set = res.eigenvalues;
      if (use_lu && !opt.sigma) {
        // move the shift toward the current lower-edge estimate
        const double lmin = res.eigenvalues.front();
        const double spread = std::max(res.eigenvalues.back() - lmin, 1e-6);
        const double margin = std::max(0.05 * spread, 1e-2 * std::max(1e-6, std::fabs(lmin)));
        sigma = lmin - margin;
      }
    }
    // a longer recurrence helps both paths when separation is the issue
    max_krylov = static_cast<int>(std::min<long>(n - 1, max_krylov + max_krylov / 2));
  }
  throw NoConvergence("eigenpair iteration budget exhausted", last_residuals);
}

// ---------------------------------------------------------------------------
// Crank-Nicolson propagation
// ---------------------------------------------------------------------------

namespace {

struct CnSystem {
  SparseComplex a;  // 1 + i dt/(2 hbar) H
  SparseComplex b;  // 1 - i dt/(2 hbar) H
  Eigen::SparseLU<SparseComplex> lu;
  double built_at = -1.0;

  void build(const DiscretizedHamiltonian& h, double dt) {
    const Complex z(0.0, dt / (2.0 * h.hbar));
    SparseComplex identity(h.matrix.rows(), h.matrix.cols());
    identity.setIdentity();
    a = identity + z * h.matrix;
    b = identity - z * h.matrix;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error("Crank-Nicolson factorization failed");
    built_at = h.built_at_time;
  }
};

}  // namespace

Trajectory evolve(HamiltonianProvider& provider, const WaveFunction& psi0, double dt, long steps,
                  long stride, double lin_tol) {
  if (!(dt > 0.0)) throw Error("evolve needs dt > 0");
  if (stride < 1) stride = 1;

  const DiscretizedHamiltonian& h0 = provider.at(psi0.time + 0.5 * dt);
  const long n = static_cast<long>(h0.size());

  Trajectory traj;
  traj.chart = psi0.chart;
  traj.dt = dt;
  traj.stride = stride;

  VectorXcd psi(n);
  for (long i = 0; i < n; ++i) psi[i] = psi0.values[i];

  CnSystem cn;
  cn.build(h0, dt);
  const bool rebuild = provider.time_dependent();

  auto record = [&](double t, const DiscretizedHamiltonian& h) {
    traj.times.push_back(t);
    traj.states.emplace_back(psi.data(), psi.data() + n);
    traj.norm_history.push_back(weighted_norm(h.weights, traj.states.back()));
  };
  record(psi0.time, h0);

  double t = psi0.time;
  for (long step = 0; step < steps; ++step) {
    const DiscretizedHamiltonian& h = provider.at(t + 0.5 * dt);
    if (rebuild && h.built_at_time != cn.built_at) cn.build(h, dt);
    const VectorXcd rhs = cn.b * psi;
    VectorXcd x = cn.lu.solve(rhs);
    // iterative refinement to the requested linear tolerance
    const double rhs_norm = rhs.norm();
    double rel = 1.0;
    for (int pass = 0; pass < 5; ++pass) {
      const VectorXcd resid = rhs - cn.a * x;
      rel = resid.norm() / std::max(rhs_norm, 1e-300);
      if (rel <= lin_tol) break;
      x += cn.lu.solve(resid);
    }
    if (!(rel <= lin_tol))
      throw LinearSolveFailure("Crank-Nicolson linear solve stalled", step, rel);
    psi = x;
    t += dt;
    if ((step + 1) % stride == 0) record(t, h);
  }
  return traj;
}

double energy_expectation(const DiscretizedHamiltonian& h, const ComplexField& psi) {
  const ComplexField hpsi = h.apply(psi);
  const Complex num = weighted_dot(h.weights, psi, hpsi);
  const double den = weighted_norm(h.weights, psi);
  return num.real() / (den * den);
}

}  // namespace nsqm
