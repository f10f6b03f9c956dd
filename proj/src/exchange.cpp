#include "nsqm/exchange.hpp"

#include <cmath>

#include "nsqm/rng.hpp"

namespace nsqm {

std::vector<std::size_t> exchange_swap_map(const ProblemSpec& spec) {
  const CoordinateChart& chart = spec.chart;
  const int n = chart.dim();
  if (spec.symmetry == ExchangeSymmetry::None)
    throw NotExchangeSymmetricChart("chart not declared with a symmetry section");
  if (n % 2 != 0)
    throw NotExchangeSymmetricChart("exchange needs an even number of coordinates");
  const int d = n / 2;
  for (int a = 0; a < d; ++a) {
    const AxisSpec& p = chart.axis(a);
    const AxisSpec& q = chart.axis(a + d);
    if (p.lo != q.lo || p.hi != q.hi || p.npoints != q.npoints || p.boundary != q.boundary)
      throw NotExchangeSymmetricChart("particle axes " + p.name + " and " + q.name +
                                      " do not pair up");
  }

  // spot-check swap invariance of W and the metric on a handful of points
  {
    Xoshiro256pp rng(0x5eedULL);
    std::vector<double> x(n + 1, 0.0), sx(n + 1, 0.0);
    for (int trial = 0; trial < 16; ++trial) {
      for (int a = 0; a < n; ++a)
        x[a] = rng.uniform(chart.axis(a).lo + 1e-3, chart.axis(a).hi - 1e-3);
      for (int a = 0; a < d; ++a) {
        sx[a] = x[a + d];
        sx[a + d] = x[a];
      }
      x[n] = sx[n] = 0.0;
      const double w1 = spec.eval_potential(x);
      const double w2 = spec.eval_potential(sx);
      if (std::fabs(w1 - w2) > 1e-10 * std::max(1.0, std::fabs(w1)))
        throw NotExchangeSymmetricChart("potential is not exchange invariant");
      for (int p = 0; p < n; ++p) {
        const Expression& e = spec.metric_entry(p, p);
        const Expression& es = spec.metric_entry((p + d) % n, (p + d) % n);
        const double g1 = e.empty() ? 0.0 : e.eval(x);
        const double g2 = es.empty() ? 0.0 : es.eval(sx);
        if (std::fabs(g1 - g2) > 1e-10 * std::max(1.0, std::fabs(g1)))
          throw NotExchangeSymmetricChart("metric is not exchange invariant (unequal masses?)");
      }
    }
  }

  std::vector<std::size_t> map(chart.size());
  std::vector<int> idx(n), sidx(n);
  for_each_point(chart, [&](std::size_t f, const std::vector<int>& ix, const std::vector<double>&) {
    for (int a = 0; a < d; ++a) {
      sidx[a] = ix[a + d];
      sidx[a + d] = ix[a];
    }
    map[f] = chart.flat(sidx);
  });
  return map;
}

ExchangeProjection project_exchange(const WaveFunction& psi, const ProblemSpec& spec,
                                    const GeometryData& geo, int sign) {
  if (sign != 1 && sign != -1) throw Error("exchange sign must be +1 or -1");
  const std::vector<std::size_t> map = exchange_swap_map(spec);
  ExchangeProjection out;
  out.psi.chart = psi.chart;
  out.psi.time = psi.time;
  out.psi.values.resize(psi.values.size());
  for (std::size_t f = 0; f < psi.values.size(); ++f)
    out.psi.values[f] = 0.5 * (psi.values[f] + static_cast<double>(sign) * psi.values[map[f]]);
  out.norm_before = weighted_norm(geo.weights, out.psi.values);
  const double input_norm = weighted_norm(geo.weights, psi.values);
  if (out.norm_before <= 1e-12 * std::max(input_norm, 1e-300)) {
    out.annihilated = true;
    return out;
  }
  normalize(out.psi.values, geo.weights);
  return out;
}

}  // namespace nsqm
