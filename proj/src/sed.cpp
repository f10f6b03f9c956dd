#include "nsqm/sed.hpp"

#include <algorithm>
#include <cmath>

#include "nsqm/rng.hpp"

namespace nsqm {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

double spectral_density(const SedParams& p, double w) {
  const double shape = (w / p.omega0) * (w / p.omega0) * (w / p.omega0);
  return p.mass * p.gamma * p.hbar * p.omega0 / kPi * shape;
}
}  // namespace

SzpfModeSet sample_field(const SedParams& params, std::uint64_t seed) {
  if (!(params.band > 0.0 && params.band < 1.0)) throw Error("band fraction must be in (0,1)");
  if (params.mode_count < 2) throw Error("need at least two field modes");
  const int m = params.mode_count;
  const double w_lo = params.omega0 * (1.0 - params.band);
  const double dw = 2.0 * params.omega0 * params.band / m;

  SzpfModeSet modes;
  modes.omega0 = params.omega0;
  modes.mode_spacing = dw;
  modes.omega.resize(m);
  modes.amplitude.resize(m);
  modes.phase.resize(m);
  Xoshiro256pp rng(seed);
  for (int j = 0; j < m; ++j) {
    modes.omega[j] = w_lo + (j + 0.5) * dw;
    modes.amplitude[j] =
        params.amplitude_scale * std::sqrt(2.0 * spectral_density(params, modes.omega[j]) * dw);
    modes.phase[j] = rng.uniform(0.0, kTwoPi);
  }
  return modes;
}

FieldForce::FieldForce(const SzpfModeSet& modes, double t_max)
    : modes_(modes), omega0_(modes.omega0) {
  // envelope G(t) = sum A_j exp(i((w_j - w0) t + phi_j)) band-limited to
  // |w - w0|; 32 samples per fastest envelope period keeps the cubic-Hermite
  // reconstruction error ~1e-5 relative
  double dev = 1e-30;
  for (double w : modes_.omega) dev = std::max(dev, std::fabs(w - omega0_));
  dt_coarse_ = kTwoPi / dev / 32.0;
  const std::size_t n = static_cast<std::size_t>(t_max / dt_coarse_) + 3;
  re_.resize(n);
  im_.resize(n);
  dre_.resize(n);
  dim_.resize(n);

  const std::size_t m = modes_.omega.size();
  std::vector<double> zr(m), zi(m), rr(m), ri(m);
  for (std::size_t j = 0; j < m; ++j) {
    zr[j] = modes_.amplitude[j] * std::cos(modes_.phase[j]);
    zi[j] = modes_.amplitude[j] * std::sin(modes_.phase[j]);
    const double a = (modes_.omega[j] - omega0_) * dt_coarse_;
    rr[j] = std::cos(a);
    ri[j] = std::sin(a);
  }
  for (std::size_t s = 0; s < n; ++s) {
    double sre = 0.0, sim = 0.0, sdre = 0.0, sdim = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      sre += zr[j];
      sim += zi[j];
      const double wd = modes_.omega[j] - omega0_;
      // d/dt of A e^{i(wd t + phi)} = i wd (...)
      sdre += -wd * zi[j];
      sdim += wd * zr[j];
      const double nr = zr[j] * rr[j] - zi[j] * ri[j];
      zi[j] = zr[j] * ri[j] + zi[j] * rr[j];
      zr[j] = nr;
    }
    re_[s] = sre;
    im_[s] = sim;
    dre_[s] = sdre;
    dim_[s] = sdim;
  }
}

double FieldForce::operator()(double t) const {
  const double u = t / dt_coarse_;
  std::size_t s = static_cast<std::size_t>(u);
  if (s + 1 >= re_.size()) s = re_.size() - 2;
  const double x = u - static_cast<double>(s);
  const double h = dt_coarse_;
  // cubic Hermite on [s, s+1]
  const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
  const double h10 = x * (1 - x) * (1 - x);
  const double h01 = x * x * (3 - 2 * x);
  const double h11 = x * x * (x - 1);
  const double gre = h00 * re_[s] + h10 * h * dre_[s] + h01 * re_[s + 1] + h11 * h * dre_[s + 1];
  const double gim = h00 * im_[s] + h10 * h * dim_[s] + h01 * im_[s + 1] + h11 * h * dim_[s + 1];
  const double c = std::cos(omega0_ * t), si = std::sin(omega0_ * t);
  return gre * c - gim * si;
}

double FieldForce::direct(double t) const {
  double f = 0.0;
  for (std::size_t j = 0; j < modes_.omega.size(); ++j)
    f += modes_.amplitude[j] * std::cos(modes_.omega[j] * t + modes_.phase[j]);
  return f;
}

OscillatorTrace integrate_trajectory(const SzpfModeSet& modes, const SedParams& params, double dt,
                                     long steps, long stride, double x0, double v0) {
  const double w_max = modes.omega.empty() ? params.omega0
                                           : *std::max_element(modes.omega.begin(),
                                                               modes.omega.end());
  if (dt > kTwoPi / (64.0 * std::max(w_max, params.omega0)))
    throw StepTooLarge("dt above 2 pi / (64 w_max)");
  if (params.gamma > 1e-3 * params.omega0 * (1.0 + 1e-12))
    throw Error("weak-coupling precondition gamma <= 1e-3 omega0 violated");
  if (stride < 1) stride = 1;

  const double w0sq = params.omega0 * params.omega0;
  const double im = 1.0 / params.mass;
  const double damp = std::exp(-params.gamma * dt);

  FieldForce force(modes, dt * static_cast<double>(steps) + dt);

  OscillatorTrace trace;
  trace.t.reserve(steps / stride + 1);
  double x = x0, v = v0, t = 0.0;
  double f_now = force(0.0);
  auto record = [&]() {
    trace.t.push_back(t);
    trace.x.push_back(x);
    trace.v.push_back(v);
  };
  record();
  for (long s = 0; s < steps; ++s) {
    v += 0.5 * dt * (f_now * im - w0sq * x);
    x += 0.5 * dt * v;
    v *= damp;
    x += 0.5 * dt * v;
    const double f_next = force(t + dt);
    v += 0.5 * dt * (f_next * im - w0sq * x);
    f_now = f_next;
    t += dt;
    if ((s + 1) % stride == 0) record();
  }
  return trace;
}

std::vector<EnergySeries> run_ensemble(const SedParams& params) {
  SedParams p = params;
  if (p.equil_time < 0) p.equil_time = 5.0 / p.gamma;
  if (p.avg_time < 0) p.avg_time = 5.0 / p.gamma;
  if (p.sample_interval < 0) p.sample_interval = 0.25 / p.gamma;
  const double w_max = p.omega0 * (1.0 + p.band);
  const double dt = kTwoPi / (p.steps_per_period * w_max);
  const double t_total = p.equil_time + p.avg_time;
  const long stride = std::max<long>(1, static_cast<long>(p.sample_interval / dt));
  const long steps = static_cast<long>(t_total / dt) + 1;

  std::vector<EnergySeries> out(p.members);
  const double w0sq = p.omega0 * p.omega0;
  for (int member = 0; member < p.members; ++member) {
    EnergySeries series;
    for (int comp = 0; comp < p.components; ++comp) {
      const std::uint64_t stream =
          split_stream(p.seed, static_cast<std::uint64_t>(member) * p.components + comp);
      const SzpfModeSet modes = sample_field(p, stream);
      const OscillatorTrace trace = integrate_trajectory(modes, p, dt, steps, stride);
      if (comp == 0) {
        series.t = trace.t;
        series.energy.assign(trace.t.size(), 0.0);
      }
      for (std::size_t s = 0; s < trace.t.size(); ++s)
        series.energy[s] +=
            0.5 * p.mass * (trace.v[s] * trace.v[s] + w0sq * trace.x[s] * trace.x[s]);
    }
    out[member] = std::move(series);
  }
  return out;
}

EnsembleStats ensemble_stats(const std::vector<EnergySeries>& runs, double discard,
                             std::uint64_t seed) {
  if (runs.size() < 2) throw Error("ensemble statistics need at least two members");
  if (!(discard >= 0.0 && discard <= 0.9)) throw Error("discard fraction outside [0, 0.9]");

  const long k = static_cast<long>(runs.size());
  std::vector<double> s1(k, 0.0), s2(k, 0.0);
  long retained = 0;
  for (long i = 0; i < k; ++i) {
    const auto& r = runs[i];
    const std::size_t start = static_cast<std::size_t>(discard * r.energy.size());
    const std::size_t count = r.energy.size() - start;
    if (count == 0) throw Error("discard fraction leaves no samples");
    for (std::size_t s = start; s < r.energy.size(); ++s) {
      s1[i] += r.energy[s];
      s2[i] += r.energy[s] * r.energy[s];
    }
    s1[i] /= static_cast<double>(count);
    s2[i] /= static_cast<double>(count);
    retained = static_cast<long>(count);
  }

  double m1 = 0.0, m2 = 0.0;
  for (long i = 0; i < k; ++i) {
    m1 += s1[i];
    m2 += s2[i];
  }
  m1 /= k;
  m2 /= k;

  double v1 = 0.0, v2 = 0.0, c12 = 0.0;
  for (long i = 0; i < k; ++i) {
    v1 += (s1[i] - m1) * (s1[i] - m1);
    v2 += (s2[i] - m2) * (s2[i] - m2);
    c12 += (s1[i] - m1) * (s2[i] - m2);
  }
  v1 /= k - 1;
  v2 /= k - 1;
  c12 /= k - 1;

  EnsembleStats st;
  st.members = k;
  st.samples_per_member = retained;
  st.seed = seed;
  st.mean_energy = m1;
  st.mean_energy_se = std::sqrt(v1 / k);
  st.second_moment_ratio = m2 / (m1 * m1);
  // delta method for R = m2 / m1^2
  const double r = st.second_moment_ratio;
  const double var_r =
      r * r * (v2 / (m2 * m2) + 4.0 * v1 / (m1 * m1) - 4.0 * c12 / (m1 * m2)) / k;
  st.second_moment_ratio_se = std::sqrt(std::max(var_r, 0.0));
  return st;
}

double ks_exponential(std::vector<double> samples) {
  if (samples.empty()) throw Error("no samples for the KS statistic");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = 1.0 - std::exp(-samples[i] / mean);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

}  // namespace nsqm
