#pragma once

#include <complex>
#include <vector>

#include "nsqm/grid.hpp"

namespace nsqm {

using Complex = std::complex<double>;
using ComplexField = std::vector<Complex>;

// Complex grid field tied to a chart. The weighted norm uses the volume
// weights <phi,psi>_w = sum w_i conj(phi_i) psi_i, the discrete form of
// integral dNx sqrt|g| phi* psi. Dirichlet boundary values live half a cell
// outside the stored samples and are identically zero by construction.
struct WaveFunction {
  ComplexField values;
  CoordinateChart chart;
  double time = 0.0;
};

inline Complex weighted_dot(const RealField& w, const ComplexField& a, const ComplexField& b) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * std::conj(a[i]) * b[i];
  return s;
}

inline double weighted_norm(const RealField& w, const ComplexField& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * std::norm(a[i]);
  return std::sqrt(s);
}

inline void normalize(ComplexField& a, const RealField& w) {
  const double n = weighted_norm(w, a);
  if (n == 0.0) return;
  for (auto& v : a) v /= n;
}

}  // namespace nsqm
