#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <memory>

#include "nsqm/geometry.hpp"
#include "nsqm/wavefunction.hpp"

namespace nsqm {

using SparseComplex = Eigen::SparseMatrix<Complex>;

// Discretized Hamiltonian
//
//   H = (1/2m) (-i hbar grad - m u)^2 + W
//     = -(hbar^2/2m) lap_LB + (i hbar/2)(u.grad + div(u .)) + (m/2) u.u + W
//
// assembled in divergence form on the grid. The kinetic part reuses the
// symmetric Laplace-Beltrami form and the gauge term is the discrete
// anti-adjoint symmetrization (i hbar/2)(U - U^dagger_w), so the whole
// operator is Hermitian under the sqrt|g|-weighted inner product by
// construction, not merely to truncation order.
struct DiscretizedHamiltonian {
  SparseComplex matrix;  // raw action psi -> H psi (1/w factors baked in)
  RealField weights;
  CoordinateChart chart;
  bool time_dependent = false;
  std::shared_ptr<const ProblemSpec> classical_source;
  double built_at_time = 0.0;
  double hbar = 1.0;

  std::size_t size() const { return weights.size(); }

  ComplexField apply(const ComplexField& psi) const {
    Eigen::Map<const Eigen::VectorXcd> x(psi.data(), static_cast<long>(psi.size()));
    Eigen::VectorXcd y = matrix * x;
    return ComplexField(y.data(), y.data() + y.size());
  }
};

DiscretizedHamiltonian build_hamiltonian(std::shared_ptr<const ProblemSpec> spec,
                                         const GeometryData& geo, double t = 0.0);

// p^op psi: covariant components -i hbar d_p psi and contravariant
// g^pq (-i hbar d_q psi), both on interior-consistent stencils.
struct MomentumApplication {
  std::vector<ComplexField> covariant;
  std::vector<ComplexField> contravariant;
};
MomentumApplication apply_momentum(const WaveFunction& psi, const GeometryData& geo,
                                   double hbar);

// Randomized weighted-Hermiticity probe. max_relative scales the defect by
// ||H psi||_w ||phi||_w (the natural size of the bilinear form); max_raw
// divides only by ||phi|| ||psi|| and grows with ||H|| even for an exactly
// symmetric assembly, so thresholds apply to max_relative.
struct HermiticityResult {
  double max_relative = 0.0;
  double max_raw = 0.0;
};
HermiticityResult hermiticity_check(const DiscretizedHamiltonian& h, int trials,
                                    std::uint64_t seed);

// classical H_c = (1/2m) g^pq (P_p - m u_p)(P_q - m u_q) + W at a phase-space
// point; the quantization source of the operator above.
double classical_hamiltonian(const ProblemSpec& spec, const std::vector<double>& x,
                             const std::vector<double>& p_cov, double t);

}  // namespace nsqm
