#pragma once

#include "nsqm/geometry.hpp"
#include "nsqm/wavefunction.hpp"

namespace nsqm {

// Flat-index permutation swapping the two particle blocks of a chart with
// N = 2d coordinates (axes a and a+d trade places). Throws
// NotExchangeSymmetricChart when the chart was not declared exchange
// symmetric, the axes do not pair up, or the Hamiltonian ingredients are not
// swap invariant on the grid.
std::vector<std::size_t> exchange_swap_map(const ProblemSpec& spec);

struct ExchangeProjection {
  WaveFunction psi;
  double norm_before = 0.0;  // weighted norm of (psi +- psi o swap)/2
  bool annihilated = false;  // projection collapsed to (numerical) zero
};

// P_pm psi = (psi +- psi o swap)/2, renormalized unless annihilated.
// Idempotent: projecting twice with the same sign returns the same state.
ExchangeProjection project_exchange(const WaveFunction& psi, const ProblemSpec& spec,
                                    const GeometryData& geo, int sign);

}  // namespace nsqm
