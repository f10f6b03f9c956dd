#pragma once

#include <Eigen/SparseCore>
#include <functional>
#include <vector>

#include "nsqm/grid.hpp"
#include "nsqm/problem.hpp"

namespace nsqm {

// Covariant metric g_pq, contravariant g^pq, and sqrt|det g| sampled on the
// grid. All fields are immutable after construction and safe to share.
struct MetricField {
  int n = 0;
  std::size_t npts = 0;
  std::vector<double> lower;     // npts * n * n, row-major per point
  std::vector<double> upper;     // npts * n * n
  std::vector<double> sqrt_det;  // npts

  double g(std::size_t f, int p, int q) const {
    return lower[(f * n + p) * n + q];
  }
  double ginv(std::size_t f, int p, int q) const {
    return upper[(f * n + p) * n + q];
  }
};

// Christoffel symbols of the first kind [s,pq] and second kind Gamma^r_pq.
// Layout: ((f*n + first-index)*n + p)*n + q.
struct ChristoffelData {
  int n = 0;
  std::size_t npts = 0;
  std::vector<double> first_kind;
  std::vector<double> second_kind;

  double first(std::size_t f, int s, int p, int q) const {
    return first_kind[((f * n + s) * n + p) * n + q];
  }
  double second(std::size_t f, int r, int p, int q) const {
    return second_kind[((f * n + r) * n + p) * n + q];
  }
};

// Coefficients A_iq expressing covariant basis vectors in a locally Cartesian
// frame, e_q = A_iq ehat_i, with the pointwise inverse A^-1_qj.
struct FrameField {
  int n = 0;
  std::size_t npts = 0;
  std::vector<double> a;      // A_iq, i = frame row, q = chart column
  std::vector<double> a_inv;  // A^-1_qj

  double at(std::size_t f, int i, int q) const { return a[(f * n + i) * n + q]; }
  double inv(std::size_t f, int q, int j) const { return a_inv[(f * n + q) * n + j]; }

  // samples A_iq from fn(x, i, q); inverts pointwise (SingularFrame on failure)
  static FrameField sample(const CoordinateChart& chart,
                           const std::function<double(const std::vector<double>&, int, int)>& fn);
};

// Affine connections of a locally Cartesian frame. gamma follows the
// d_p e^q = -Gamma^q_pr e^r convention, so coordinate-generated frames
// reproduce the Christoffel symbols; no lower-index symmetry is assumed.
struct FrameConnections {
  int n = 0;
  std::size_t npts = 0;
  std::vector<double> gamma;        // Gamma^q_pr, layout ((f*n+q)*n+p)*n+r
  std::vector<double> contraction;  // e^p . d_p e^q, layout f*n + q
};

struct GeometryData {
  MetricField metric;
  RealField weights;  // sqrt|g| * prod dx^p per point (midpoint quadrature)
};

// Pointwise metric evaluation, inversion, and determinant. Throws
// NonSymmetricMetric when g_pq != g_qp on the grid and SingularMetric when the
// matrix is not positive definite (this toolkit restricts to positive-definite
// configuration metrics) or its determinant underflows the threshold.
MetricField build_metric(const ProblemSpec& spec);

GeometryData build_geometry(const ProblemSpec& spec);

RealField volume_weights(const MetricField& metric, const CoordinateChart& chart);

// First-derivative stencil along one axis at one point: central in the
// interior, one-sided second order at Dirichlet edges, wraparound on periodic
// axes. Up to three (flat index, coefficient) pairs.
struct DerivStencil {
  int count = 0;
  std::size_t idx[3];
  double coef[3];
};
DerivStencil first_derivative_stencil(const CoordinateChart& chart, std::size_t f, int axis,
                                      int i_axis);

// d(field)/dx^axis: second-order central differences, one-sided at Dirichlet
// edges, wraparound on periodic axes.
RealField derivative_axis(const RealField& field, const CoordinateChart& chart, int axis);

ChristoffelData christoffel(const MetricField& metric, const CoordinateChart& chart);

// max over interior points and free index p of |Gamma^q_pq - d_p ln sqrt|g||
double check_identity_a13(const MetricField& metric, const CoordinateChart& chart);

// (sqrt|g|)^-1 d_q (sqrt|g| A^q) for a contravariant vector field
RealField divergence(const std::vector<RealField>& a_contra, const MetricField& metric,
                     const CoordinateChart& chart);

// Symmetric (energy-form) assembly of the Laplace-Beltrami operator: returns
// sparse A with <phi, -lap psi>_w = phi^T A psi, i.e. lap = -(1/w) A. Same-axis
// terms use compact staggered fluxes, cross terms central differences; both
// keep A exactly symmetric, which makes weighted self-adjointness structural.
// Dirichlet edges assume the operand vanishes at the wall half a cell outside
// the last sample, matching wavefunction boundary conditions.
Eigen::SparseMatrix<double> laplace_beltrami_form(const MetricField& metric,
                                                  const CoordinateChart& chart,
                                                  const RealField& weights);

// matrix-free application of the same symmetric form: lap phi = -(1/w) A phi
RealField apply_laplace_beltrami(const RealField& phi, const MetricField& metric,
                                 const CoordinateChart& chart, const RealField& weights);

// divergence-form Laplace-Beltrami applied to one field
RealField laplace_beltrami(const RealField& phi, const MetricField& metric,
                           const CoordinateChart& chart);

FrameConnections frame_connections(const FrameField& frame, const CoordinateChart& chart);

}  // namespace nsqm
