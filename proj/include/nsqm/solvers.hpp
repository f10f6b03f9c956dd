#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "nsqm/operator_builder.hpp"

namespace nsqm {

// Eigenpairs of the stationary equation H psi = E psi, ascending, with
// weighted-orthonormal vectors and true residuals ||H psi - E psi||_w.
// Eigenvalues are ensemble-averaged energies in the statistical reading.
struct EigenResult {
  std::vector<double> eigenvalues;
  std::vector<ComplexField> eigenvectors;
  std::vector<double> residuals;
};

struct EigenOptions {
  double tol = 1e-9;
  std::uint64_t seed = 1;
  std::size_t dense_threshold = 4096;  // dense solve strictly below this size
  std::optional<double> sigma;         // shift-invert target override
  int max_stages = 6;
  int max_krylov = 0;  // per stage; 0 picks a default from k
  // N >= 2 charts use a conjugate-gradient inner solver above this size
  // (sparse LU fill grows too fast there); 1-D charts always factorize.
  std::size_t lu_threshold = 50000;
  // optional invariant-subspace projector applied to every Krylov vector
  std::function<void(Eigen::VectorXcd&)> project;
};

EigenResult lowest_eigenpairs(const DiscretizedHamiltonian& h, int k,
                              const EigenOptions& opt = {});

// Time-indexed Hamiltonian source for the propagator. The static case reuses
// one assembled operator; the rebuilding case re-evaluates W and u at the
// midpoint of every step.
class HamiltonianProvider {
 public:
  virtual ~HamiltonianProvider() = default;
  virtual const DiscretizedHamiltonian& at(double t) = 0;
  virtual bool time_dependent() const = 0;
};

class StaticHamiltonian final : public HamiltonianProvider {
 public:
  explicit StaticHamiltonian(DiscretizedHamiltonian h) : h_(std::move(h)) {}
  const DiscretizedHamiltonian& at(double) override { return h_; }
  bool time_dependent() const override { return false; }

 private:
  DiscretizedHamiltonian h_;
};

class RebuildingHamiltonian final : public HamiltonianProvider {
 public:
  RebuildingHamiltonian(std::shared_ptr<const ProblemSpec> spec, const GeometryData& geo)
      : spec_(std::move(spec)), geo_(&geo), current_(build_hamiltonian(spec_, geo, 0.0)) {}
  const DiscretizedHamiltonian& at(double t) override {
    if (spec_->time_dependent && t != current_.built_at_time)
      current_ = build_hamiltonian(spec_, *geo_, t);
    return current_;
  }
  bool time_dependent() const override { return spec_->time_dependent; }

 private:
  std::shared_ptr<const ProblemSpec> spec_;
  const GeometryData* geo_;
  DiscretizedHamiltonian current_;
};

struct Trajectory {
  CoordinateChart chart;
  double dt = 0.0;
  long stride = 1;
  std::vector<double> times;          // sample times (stride apart)
  std::vector<ComplexField> states;   // includes the initial state
  std::vector<double> norm_history;   // weighted norm at every sample
};

// Crank-Nicolson propagation (1 + i dt H(t+dt/2)/2hbar) psi' =
// (1 - i dt H(t+dt/2)/2hbar) psi, each step solved by a cached sparse LU
// followed by iterative refinement to relative residual lin_tol (the discrete
// unitarity of the Cayley form then bounds norm drift per step by lin_tol).
Trajectory evolve(HamiltonianProvider& provider, const WaveFunction& psi0, double dt, long steps,
                  long stride = 1, double lin_tol = 1e-13);

inline Trajectory evolve(const DiscretizedHamiltonian& h, const WaveFunction& psi0, double dt,
                         long steps, long stride = 1, double lin_tol = 1e-13) {
  StaticHamiltonian s(h);
  return evolve(s, psi0, dt, steps, stride, lin_tol);
}

// Re <psi, H psi>_w / <psi, psi>_w
double energy_expectation(const DiscretizedHamiltonian& h, const ComplexField& psi);

}  // namespace nsqm
