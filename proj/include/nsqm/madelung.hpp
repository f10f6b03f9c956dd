#pragma once

#include "nsqm/solvers.hpp"
#include "nsqm/wavefunction.hpp"

namespace nsqm {

// Statistical fields of a wavefunction: density rho = psi* psi, unwrapped
// dimensionless phase Phi, probability flux j, flow velocity v, and the
// quantum potential -(hbar^2/2m) (lap sqrt(rho))/sqrt(rho).
//
// The flux is always computed from psi directly, never from the unwrapped
// phase, so it stays valid near nodes. The velocity is defined by j = rho v
// on the mask (the defining split of the flux); the gradient-of-phase route
// (Gamma/m) grad Phi - u is exposed separately as v_from_phase and agrees
// with v at discretization order where the phase is smooth.
struct MadelungFields {
  RealField rho;
  RealField phi;                          // valid on mask
  std::vector<RealField> v;               // contravariant, = j / rho on mask
  std::vector<RealField> v_from_phase;    // contravariant, grad-phase route
  std::vector<RealField> j;               // contravariant flux from psi
  RealField quantum_potential;            // valid on mask
  std::vector<char> mask;                 // rho > 1e-12 * max rho
  std::vector<char> phase_grad_ok;        // v_from_phase stencil fully masked
  int components = 0;                     // connected mask regions
  std::vector<std::size_t> anchors;       // per-component phase reference
  std::size_t masked_out = 0;             // points below the density floor
};

MadelungFields decompose(const WaveFunction& psi, const ProblemSpec& spec,
                         const GeometryData& geo);

// contravariant probability flux j^p = (hbar/m) Im(psi* g^pq d_q psi) - u^p rho
// evaluated from psi directly (valid near nodes)
std::vector<RealField> probability_flux(const WaveFunction& psi, const ProblemSpec& spec,
                                        const GeometryData& geo);

// contravariant gauge components u^p on the grid at time t
std::vector<RealField> gauge_field_contravariant(const ProblemSpec& spec, const GeometryData& geo,
                                                 double t);

// psi = sqrt(rho) exp(i Phi), zero outside the mask. With a disconnected mask
// each component carries its own anchor phase (fields.components > 1 reports
// the global-phase ambiguity).
WaveFunction reconstruct(const MadelungFields& fields, const CoordinateChart& chart);

// continuity residual r = d_t rho + div j over a stored trajectory; central
// time differences in the interior, one-sided second order at the ends
struct ContinuityResult {
  std::vector<double> times;
  std::vector<double> l2;        // sqrt(sum w r^2) per sample
  std::vector<double> max_abs;   // max |r| per sample
  std::vector<double> integral;  // sum w r per sample (discrete conservation)
  double max_l2 = 0.0;
};
ContinuityResult continuity_residual(const Trajectory& traj, const ProblemSpec& spec,
                                     const GeometryData& geo);

// hbar dPhi/dt + (1/2m) g^pq (hbar d_p Phi - m u_p)(hbar d_q Phi - m u_q)
//   + W - (hbar^2/2m) (lap sqrt(rho))/sqrt(rho)
// evaluated where the phase gradient is defined; vanishes for exact solutions.
// The quantum term is reported separately so the eikonal regime (classical
// Hamilton-Jacobi with S = hbar Phi) can be judged against it.
struct HamiltonJacobiResult {
  RealField residual;
  RealField quantum_term;
  std::vector<char> mask;  // where the residual is defined
  double max_abs = 0.0;
};
HamiltonJacobiResult hamilton_jacobi_residual(const WaveFunction& psi, const ProblemSpec& spec,
                                              const GeometryData& geo, const RealField& dphi_dt);

}  // namespace nsqm
