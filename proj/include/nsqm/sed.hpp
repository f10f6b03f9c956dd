#pragma once

#include <cstdint>
#include <vector>

#include "nsqm/errors.hpp"

namespace nsqm {

// Radiation-damped charged oscillator driven by the stochastic zero-point
// field, simulated per Cartesian component in natural units hbar = c = 1
// (overridable hbar scales the field energy). The Abraham-Lorentz jerk is
// replaced by its on-resonance equivalent viscous damping -m gamma xdot,
// and the one-sided force spectral density on the sampled band is
//
//   S_F(w) = (m gamma hbar w0 / pi) (w / w0)^3,
//
// the omega^3 zero-point form normalized so the fluctuation-dissipation
// balance puts hbar w0 / 2 of mean energy into each component.
struct SedParams {
  double omega0 = 1.0;
  double mass = 1.0;
  double hbar = 1.0;
  double gamma = 1e-3;           // damping rate, must stay <= 1e-3 * omega0
  // The stationary ensemble is Gaussian only to the extent that many modes
  // fall inside the Lorentzian linewidth gamma/2; keep the mode spacing
  // 2 band w0 / mode_count well below gamma or the bounded cosine terms
  // leave a visible platykurtic dent in <E^2>/<E>^2.
  double band = 0.025;           // modes span [w0 (1-band), w0 (1+band)]
  int mode_count = 2048;         // >= 1000 for production ensembles
  double amplitude_scale = 1.0;  // test hook; 0 silences the field

  int members = 1000;
  int components = 3;
  double steps_per_period = 128;  // dt = 2 pi / (steps_per_period * w_max)
  double equil_time = -1.0;       // default 5 / gamma
  double avg_time = -1.0;         // default 2.5 / gamma
  double sample_interval = -1.0;  // default 0.25 / gamma
  std::uint64_t seed = 1;
};

// One realization of the driving field: equally spaced mode frequencies with
// amplitudes matching the declared spectral density and independent uniform
// phases. Equal spacing keeps the stationary ensemble an exact Gaussian
// process (the recurrence time 2 pi / dw stays far beyond any run length).
struct SzpfModeSet {
  std::vector<double> omega;
  std::vector<double> amplitude;
  std::vector<double> phase;
  double omega0 = 1.0;
  double mode_spacing = 0.0;
};

SzpfModeSet sample_field(const SedParams& params, std::uint64_t seed);

// F(t) = sum_j A_j cos(w_j t + phi_j), evaluated through a cubic-Hermite
// interpolated complex envelope around w0 (narrow-band synthesis). direct()
// is the exact mode sum for validation.
class FieldForce {
 public:
  FieldForce(const SzpfModeSet& modes, double t_max);
  double operator()(double t) const;
  double direct(double t) const;

 private:
  const SzpfModeSet& modes_;
  double omega0_;
  double dt_coarse_ = 0.0;
  std::vector<double> re_, im_, dre_, dim_;  // envelope and its derivative
};

struct OscillatorTrace {
  std::vector<double> t, x, v;
};

// m xddot = -m w0^2 x - m gamma xdot + F(t): velocity-Verlet with an exact
// exponential friction substep (second order). Throws StepTooLarge when dt
// exceeds 2 pi / (64 w_max) and rejects gamma > 1e-3 w0 (weak coupling).
OscillatorTrace integrate_trajectory(const SzpfModeSet& modes, const SedParams& params, double dt,
                                     long steps, long stride, double x0 = 0.0, double v0 = 0.0);

// per-member total energy samples E(t) = sum over components of
// m/2 (v^2 + w0^2 x^2), sampled every sample_interval from t = 0
struct EnergySeries {
  std::vector<double> t;
  std::vector<double> energy;
};

std::vector<EnergySeries> run_ensemble(const SedParams& params);

struct EnsembleStats {
  double mean_energy = 0.0;
  double mean_energy_se = 0.0;
  double second_moment_ratio = 0.0;  // <E^2> / <E>^2
  double second_moment_ratio_se = 0.0;
  long members = 0;
  long samples_per_member = 0;
  std::uint64_t seed = 0;
};

// time-and-ensemble averages after dropping the leading `discard` fraction of
// each series (the default run layout makes 2/3 the equilibration share)
EnsembleStats ensemble_stats(const std::vector<EnergySeries>& runs, double discard,
                             std::uint64_t seed = 0);

// Kolmogorov-Smirnov statistic of samples against an exponential law with the
// fitted mean
double ks_exponential(std::vector<double> samples);

}  // namespace nsqm
