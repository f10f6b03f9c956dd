#include "nsqm/presets.hpp"
#include "nsqm/errors.hpp"

namespace nsqm {
namespace {
const char* k_ho1d =
    "# 1-D harmonic oscillator, hbar = m = omega = 1.\n"
    "# Spectrum (n + 1/2) with Dirichlet walls far in the Gaussian tails.\n"
    "coordinates { x : (-10, 10) }\n"
    "metric { g[1,1] = 1 }\n"
    "potential { W = 0.5*x^2 }\n"
    "grid { x : 512 }\n";

const char* k_free1d_periodic =
    "# Free particle on a ring of circumference 2 pi.\n"
    "# Plane-wave spectrum k^2/2, doubly degenerate for k != 0.\n"
    "coordinates { x : (0, 2*pi) periodic }\n"
    "metric { g[1,1] = 1 }\n"
    "potential { W = 0 }\n"
    "grid { x : 256 }\n";

const char* k_spherical_free =
    "# Free particle in a ball, spherical polar chart.\n"
    "# Exercises nontrivial sqrt|g| = r^2 sin(theta); samples are cell-centered,\n"
    "# so r = 0 and sin(theta) = 0 are never touched.\n"
    "coordinates { r : (0, 6) theta : (0, pi) phi : (0, 2*pi) periodic }\n"
    "metric { g[1,1] = 1 g[2,2] = r^2 g[3,3] = r^2*sin(theta)^2 }\n"
    "potential { W = 0 }\n"
    "grid { r : 24 theta : 12 phi : 12 }\n";

const char* k_hydrogen_radial_l0 =
    "# Hydrogen, l = 0 reduced radial equation for u(r) = r R(r) in Hartree units:\n"
    "#   -(1/2) u'' - u/r = E u,  u(0) = u(R) = 0.\n"
    "# The chart coordinate is s = log r: the metric e^{2s} turns the uniform\n"
    "# s-grid into a log-spaced radial grid (fine near the nucleus, coarse at the\n"
    "# box edge), and the flat radial operator is recovered through the\n"
    "# Laplace-Beltrami machinery. W = -1/r = -exp(-s).\n"
    "coordinates { s : (log(0.001), log(60)) }\n"
    "metric { g[1,1] = exp(2*s) }\n"
    "potential { W = -exp(-s) }\n"
    "grid { s : 4096 }\n";

const char* k_twoparticle =
    "# Two pointlike particles in 3-space, one 6-coordinate chart.\n"
    "# Equal masses m1 = m2 = 1 with the mass parameter chosen as m = 1/2, so the\n"
    "# kinetic metric is g = diag(2,2,2,2,2,2) and sqrt|g| = 8: the physical masses\n"
    "# live in the metric, not in the constant m. Softened central interaction.\n"
    "# Deliberately coarse: this preset exercises 6-D assembly and Hermiticity;\n"
    "# quantitative spectra come from the separated twoparticle_rel chart.\n"
    "coordinates { x1 : (-3, 3) y1 : (-3, 3) z1 : (-3, 3) x2 : (-3, 3) y2 : (-3, 3) z2 : (-3, 3) }\n"
    "metric { g[1,1] = 2 g[2,2] = 2 g[3,3] = 2 g[4,4] = 2 g[5,5] = 2 g[6,6] = 2 }\n"
    "potential { W = -1/sqrt((x1-x2)^2 + (y1-y2)^2 + (z1-z2)^2 + 0.25) }\n"
    "grid { x1 : 8 y1 : 8 z1 : 8 x2 : 8 y2 : 8 z2 : 8 }\n"
    "constants { mass = 0.5 }\n";

const char* k_twoparticle_rel =
    "# Relative motion of the two-particle Coulomb system after separating the\n"
    "# center of mass (equal masses m1 = m2 = 1, reduced mass mu = 1/2).\n"
    "# Same log-radial chart as hydrogen_radial_l0; the l = 0 spectrum is\n"
    "# -mu/(2 n^2) = -1/(4 n^2), ground state -0.25.\n"
    "coordinates { s : (log(0.001), log(80)) }\n"
    "metric { g[1,1] = exp(2*s) }\n"
    "potential { W = -exp(-s) }\n"
    "grid { s : 4096 }\n"
    "constants { mass = 0.5 }\n";

const char* k_gauge1d =
    "# Constant gauge field on a ring: H = (p - m u0)^2 / 2m, spectrum\n"
    "# (k - m u0)^2 / 2m on integer k. The fine grid keeps the second-order\n"
    "# stencil dispersion below 1e-6 absolute through |k| = 8.\n"
    "coordinates { x : (0, 2*pi) periodic }\n"
    "metric { g[1,1] = 1 }\n"
    "gauge { u[1] = 0.25 }\n"
    "potential { W = 0 }\n"
    "grid { x : 131072 }\n";

const char* k_identical2_1d =
    "# Two identical particles in a 1-D harmonic trap (no interaction):\n"
    "# exchange-symmetric chart. Symmetric ground state at E = 1, lowest\n"
    "# antisymmetric state at E = 2 (one quantum of exclusion).\n"
    "coordinates { x1 : (-6, 6) x2 : (-6, 6) }\n"
    "metric { g[1,1] = 1 g[2,2] = 1 }\n"
    "potential { W = 0.5*(x1^2 + x2^2) }\n"
    "grid { x1 : 192 x2 : 192 }\n"
    "symmetry { symmetric }\n";

const char* k_uniformforce =
    "# Uniform force field W = -F0 x with F0 = 0.05: wave packets accelerate at\n"
    "# exactly F0/m in the mean, the textbook Ehrenfest case.\n"
    "coordinates { x : (-40, 40) }\n"
    "metric { g[1,1] = 1 }\n"
    "potential { W = -0.05*x }\n"
    "grid { x : 4000 }\n";

struct Entry { const char* name; const char* text; };
const Entry kPresets[] = {
    {"ho1d", k_ho1d},
    {"free1d_periodic", k_free1d_periodic},
    {"spherical_free", k_spherical_free},
    {"hydrogen_radial_l0", k_hydrogen_radial_l0},
    {"twoparticle", k_twoparticle},
    {"twoparticle_rel", k_twoparticle_rel},
    {"gauge1d", k_gauge1d},
    {"identical2_1d", k_identical2_1d},
    {"uniformforce", k_uniformforce},
};
}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const Entry& e : kPresets) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

bool is_preset(const std::string& name) {
  for (const Entry& e : kPresets)
    if (name == e.name) return true;
  return false;
}

const std::string& preset_text(const std::string& name) {
  static std::vector<std::string> cache = [] {
    std::vector<std::string> v;
    for (const Entry& e : kPresets) v.emplace_back(e.text);
    return v;
  }();
  for (std::size_t i = 0; i < cache.size(); ++i)
    if (name == kPresets[i].name) return cache[i];
  throw Error("unknown preset '" + name + "'");
}

}  // namespace nsqm
