#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsqm/expression.hpp"
#include "nsqm/grid.hpp"

namespace nsqm {

enum class ExchangeSymmetry { None, Symmetric, Antisymmetric };

// Parsed and validated problem description: chart, metric g_pq, gauge field
// u_p (velocity dimension), potential W (energy), mass m and hbar.
//
// Expressions are evaluated over slots [x^1 ... x^N, t]; the metric may not
// depend on t (geometry is precomputed once and cached), W and u may.
struct ProblemSpec {
  CoordinateChart chart;

  // N*N row-major; entries not present in the file are empty (zero).
  std::vector<Expression> metric_exprs;
  std::vector<bool> metric_given;

  // N covariant components u_p; empty = zero.
  std::vector<Expression> gauge_exprs;

  Expression potential;

  double mass = 1.0;
  double hbar = 1.0;
  bool time_dependent = false;  // true when W or u references t
  ExchangeSymmetry symmetry = ExchangeSymmetry::None;

  // identifier -> slot map used by all expressions: coord names then "t"
  std::vector<std::string> symbols;

  int dim() const { return chart.dim(); }
  int time_slot() const { return chart.dim(); }

  const Expression& metric_entry(int p, int q) const {
    return metric_exprs[static_cast<std::size_t>(p) * chart.dim() + q];
  }
  bool has_metric_entry(int p, int q) const {
    return metric_given[static_cast<std::size_t>(p) * chart.dim() + q];
  }
  bool has_gauge() const {
    for (const auto& e : gauge_exprs)
      if (!e.empty()) return true;
    return false;
  }

  // evaluates W at a point (slots = coords + t)
  double eval_potential(const std::vector<double>& slots) const {
    return potential.eval(slots);
  }

  // covariant u_p at a point; zero for absent components
  double eval_gauge(int p, const std::vector<double>& slots) const {
    return gauge_exprs[p].empty() ? 0.0 : gauge_exprs[p].eval(slots);
  }

  // canonical problem-file text; parse(to_problem_text()) reproduces this
  // ProblemSpec
  std::string to_problem_text() const;
};

// Parses a problem file. Throws SyntaxError / UnknownIdentifier /
// IndexOutOfRange / AsymmetricMetric / MissingSection with source positions.
ProblemSpec parse_problem(const std::string& text);

}  // namespace nsqm
