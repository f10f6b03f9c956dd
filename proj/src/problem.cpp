#include "nsqm/problem.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace nsqm {

namespace {

bool is_punct(const Token& t, char c) {
  return t.kind == Token::Kind::Punct && t.text.size() == 1 && t.text[0] == c;
}

void expect_punct(Lexer& lex, char c) {
  if (!is_punct(lex.peek(), c))
    throw SyntaxError(std::string("expected '") + c + "'", lex.peek().pos);
  lex.next();
}

Token expect_ident(Lexer& lex, const char* what) {
  if (lex.peek().kind != Token::Kind::Ident)
    throw SyntaxError(std::string("expected ") + what, lex.peek().pos);
  return lex.next();
}

// constant arithmetic expression (ranges, constants); no identifiers but pi
double parse_const_number(Lexer& lex) {
  const SourcePos at = lex.peek().pos;
  Expression e = Expression::parse(lex, {});
  try {
    return e.eval(nullptr, 0);
  } catch (const DomainFault& f) {
    throw SyntaxError(std::string("constant does not evaluate: ") + f.what(), at);
  }
}

int parse_index(Lexer& lex, int n, const char* what) {
  const Token t = lex.peek();
  if (t.kind != Token::Kind::Number || t.number != std::floor(t.number))
    throw SyntaxError(std::string("expected integer ") + what, t.pos);
  lex.next();
  const int i = static_cast<int>(t.number);
  if (i < 1 || i > n)
    throw IndexOutOfRange(std::string(what) + " " + std::to_string(i) + " outside 1.." +
                              std::to_string(n),
                          t.pos);
  return i;
}

bool reserved_name(const std::string& s) {
  static const std::set<std::string> r = {"t",   "pi",  "sin",  "cos", "tan",
                                          "exp", "log", "sqrt", "abs"};
  return r.count(s) > 0;
}

struct RawSection {
  std::string name;
  SourcePos pos;
  std::size_t body_cursor;  // lexer cursor at first token after '{'
};

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
  Lexer lex(text);

  // First sweep: record section bodies; only 'coordinates' and 'grid' are
  // interpreted here so the symbol table exists before any expression parse.
  std::vector<RawSection> sections;
  std::vector<std::pair<std::string, std::size_t>> toplevel_assignments;
  {
    std::set<std::string> seen;
    while (!lex.at_end()) {
      Token name = expect_ident(lex, "a section name");
      if (is_punct(lex.peek(), '=')) {
        // top-level assignment, shorthand for a constants entry
        lex.next();
        toplevel_assignments.emplace_back(name.text, lex.save());
        Expression::parse(lex, {});  // skip over the value
        continue;
      }
      static const std::set<std::string> known = {"coordinates", "metric",   "gauge",
                                                  "potential",   "grid",     "constants",
                                                  "symmetry"};
      if (!known.count(name.text))
        throw SyntaxError("unknown section '" + name.text + "'", name.pos);
      if (seen.count(name.text))
        throw SyntaxError("duplicate section '" + name.text + "'", name.pos);
      seen.insert(name.text);
      expect_punct(lex, '{');
      sections.push_back({name.text, name.pos, lex.save()});
      int depth = 1;
      while (depth > 0) {
        if (lex.at_end()) throw SyntaxError("unterminated section '" + name.text + "'", name.pos);
        const Token t = lex.next();
        if (is_punct(t, '{')) ++depth;
        if (is_punct(t, '}')) --depth;
      }
    }
  }

  auto find_section = [&](const std::string& n) -> const RawSection* {
    for (const auto& s : sections)
      if (s.name == n) return &s;
    return nullptr;
  };

  // coordinates
  const RawSection* coords = find_section("coordinates");
  if (!coords) throw MissingSection("coordinates");
  std::vector<AxisSpec> axes;
  {
    lex.restore(coords->body_cursor);
    while (!is_punct(lex.peek(), '}')) {
      Token cname = expect_ident(lex, "a coordinate name");
      if (reserved_name(cname.text))
        throw SyntaxError("'" + cname.text + "' is reserved and cannot name a coordinate",
                          cname.pos);
      for (const auto& a : axes)
        if (a.name == cname.text)
          throw SyntaxError("duplicate coordinate '" + cname.text + "'", cname.pos);
      expect_punct(lex, ':');
      expect_punct(lex, '(');
      AxisSpec ax;
      ax.name = cname.text;
      ax.lo = parse_const_number(lex);
      expect_punct(lex, ',');
      ax.hi = parse_const_number(lex);
      expect_punct(lex, ')');
      if (lex.peek().kind == Token::Kind::Ident &&
          (lex.peek().text == "periodic" || lex.peek().text == "dirichlet")) {
        ax.boundary = lex.next().text == "periodic" ? Boundary::Periodic : Boundary::Dirichlet;
      }
      if (!(ax.lo < ax.hi))
        throw SyntaxError("coordinate '" + ax.name + "': lower bound must be below upper",
                          cname.pos);
      axes.push_back(std::move(ax));
    }
  }
  const int n = static_cast<int>(axes.size());

  // grid
  const RawSection* grid = find_section("grid");
  if (!grid) throw MissingSection("grid");
  {
    lex.restore(grid->body_cursor);
    while (!is_punct(lex.peek(), '}')) {
      Token gname = expect_ident(lex, "a coordinate name");
      int found = -1;
      for (int a = 0; a < n; ++a)
        if (axes[a].name == gname.text) found = a;
      if (found < 0) throw UnknownIdentifier(gname.text, gname.pos);
      expect_punct(lex, ':');
      const Token t = lex.peek();
      if (t.kind != Token::Kind::Number || t.number != std::floor(t.number) || t.number < 3)
        throw SyntaxError("grid size must be an integer >= 3", t.pos);
      lex.next();
      if (axes[found].npoints != 0)
        throw SyntaxError("duplicate grid size for '" + gname.text + "'", gname.pos);
      axes[found].npoints = static_cast<int>(t.number);
    }
    for (const auto& a : axes)
      if (a.npoints == 0)
        throw SyntaxError("grid size missing for coordinate '" + a.name + "'", grid->pos);
  }

  ProblemSpec spec;
  spec.chart = CoordinateChart(axes);
  spec.symbols.reserve(n + 1);
  for (const auto& a : axes) spec.symbols.push_back(a.name);
  spec.symbols.push_back("t");
  spec.metric_exprs.assign(static_cast<std::size_t>(n) * n, Expression());
  spec.metric_given.assign(static_cast<std::size_t>(n) * n, false);
  spec.gauge_exprs.assign(n, Expression());

  // metric
  const RawSection* metric = find_section("metric");
  if (!metric) throw MissingSection("metric");
  {
    lex.restore(metric->body_cursor);
    while (!is_punct(lex.peek(), '}')) {
      Token g = expect_ident(lex, "'g'");
      if (g.text != "g") throw SyntaxError("metric entries look like g[i,j] = expr", g.pos);
      expect_punct(lex, '[');
      const int i = parse_index(lex, n, "metric index");
      expect_punct(lex, ',');
      const int j = parse_index(lex, n, "metric index");
      expect_punct(lex, ']');
      expect_punct(lex, '=');
      const std::size_t k = static_cast<std::size_t>(i - 1) * n + (j - 1);
      if (spec.metric_given[k])
        throw SyntaxError("duplicate metric entry g[" + std::to_string(i) + "," +
                              std::to_string(j) + "]",
                          g.pos);
      spec.metric_exprs[k] = Expression::parse(lex, spec.symbols);
      spec.metric_given[k] = true;
      if (spec.metric_exprs[k].references_slot(spec.time_slot()))
        throw SyntaxError("metric entries may not depend on t", g.pos);
    }
    for (int i = 0; i < n; ++i) {
      if (!spec.metric_given[static_cast<std::size_t>(i) * n + i])
        throw SyntaxError("metric is missing diagonal entry g[" + std::to_string(i + 1) + "," +
                              std::to_string(i + 1) + "]",
                          metric->pos);
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const bool a = spec.metric_given[static_cast<std::size_t>(i) * n + j];
        const bool b = spec.metric_given[static_cast<std::size_t>(j) * n + i];
        if (a && !b)
          throw AsymmetricMetric("g[" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                     "] given but g[" + std::to_string(j + 1) + "," +
                                     std::to_string(i + 1) + "] absent",
                                 metric->pos);
      }
    }
  }

  // gauge (optional)
  if (const RawSection* gauge = find_section("gauge")) {
    lex.restore(gauge->body_cursor);
    while (!is_punct(lex.peek(), '}')) {
      Token u = expect_ident(lex, "'u'");
      if (u.text != "u") throw SyntaxError("gauge entries look like u[i] = expr", u.pos);
      expect_punct(lex, '[');
      const int i = parse_index(lex, n, "gauge index");
      expect_punct(lex, ']');
      expect_punct(lex, '=');
      if (!spec.gauge_exprs[i - 1].empty())
        throw SyntaxError("duplicate gauge entry u[" + std::to_string(i) + "]", u.pos);
      spec.gauge_exprs[i - 1] = Expression::parse(lex, spec.symbols);
    }
  }

  // potential
  const RawSection* pot = find_section("potential");
  if (!pot) throw MissingSection("potential");
  {
    lex.restore(pot->body_cursor);
    Token w = expect_ident(lex, "'W'");
    if (w.text != "W") throw SyntaxError("potential section holds a single W = expr", w.pos);
    expect_punct(lex, '=');
    spec.potential = Expression::parse(lex, spec.symbols);
    if (!is_punct(lex.peek(), '}'))
      throw SyntaxError("unexpected input after W expression", lex.peek().pos);
  }

  // constants (optional) + top-level assignments
  auto apply_constant = [&](const std::string& key, double value, SourcePos pos) {
    if (key == "mass") {
      if (!(value > 0.0)) throw SyntaxError("mass must be positive", pos);
      spec.mass = value;
    } else if (key == "hbar") {
      if (!(value > 0.0)) throw SyntaxError("hbar must be positive", pos);
      spec.hbar = value;
    } else {
      throw SyntaxError("unknown constant '" + key + "' (expected mass or hbar)", pos);
    }
  };
  if (const RawSection* cons = find_section("constants")) {
    lex.restore(cons->body_cursor);
    while (!is_punct(lex.peek(), '}')) {
      Token key = expect_ident(lex, "'mass' or 'hbar'");
      expect_punct(lex, '=');
      apply_constant(key.text, parse_const_number(lex), key.pos);
    }
  }
  for (const auto& [key, cursor] : toplevel_assignments) {
    lex.restore(cursor);
    const SourcePos pos = lex.peek().pos;
    apply_constant(key, parse_const_number(lex), pos);
  }

  // symmetry (optional)
  if (const RawSection* sym = find_section("symmetry")) {
    lex.restore(sym->body_cursor);
    if (!is_punct(lex.peek(), '}')) {
      Token s = expect_ident(lex, "none, symmetric, or antisymmetric");
      if (s.text == "none")
        spec.symmetry = ExchangeSymmetry::None;
      else if (s.text == "symmetric")
        spec.symmetry = ExchangeSymmetry::Symmetric;
      else if (s.text == "antisymmetric")
        spec.symmetry = ExchangeSymmetry::Antisymmetric;
      else
        throw SyntaxError("symmetry must be none, symmetric, or antisymmetric", s.pos);
      if (!is_punct(lex.peek(), '}'))
        throw SyntaxError("unexpected input after symmetry keyword", lex.peek().pos);
    }
  }

  // time dependence is syntactic: W or u mentions t
  spec.time_dependent = spec.potential.references_slot(spec.time_slot());
  for (const auto& e : spec.gauge_exprs)
    if (!e.empty() && e.references_slot(spec.time_slot())) spec.time_dependent = true;

  return spec;
}

// ---------------------------------------------------------------------------

std::string ProblemSpec::to_problem_text() const {
  const int n = dim();
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out;
  out += "coordinates {\n";
  for (int a = 0; a < n; ++a) {
    const auto& ax = chart.axis(a);
    out += "  " + ax.name + " : (" + num(ax.lo) + ", " + num(ax.hi) + ")";
    if (ax.boundary == Boundary::Periodic) out += " periodic";
    out += "\n";
  }
  out += "}\nmetric {\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (has_metric_entry(i, j))
        out += "  g[" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
               "] = " + metric_entry(i, j).to_string() + "\n";
  out += "}\n";
  if (has_gauge()) {
    out += "gauge {\n";
    for (int i = 0; i < n; ++i)
      if (!gauge_exprs[i].empty())
        out += "  u[" + std::to_string(i + 1) + "] = " + gauge_exprs[i].to_string() + "\n";
    out += "}\n";
  }
  out += "potential {\n  W = " + potential.to_string() + "\n}\n";
  out += "grid {\n";
  for (int a = 0; a < n; ++a)
    out += "  " + chart.axis(a).name + " : " + std::to_string(chart.axis(a).npoints) + "\n";
  out += "}\nconstants {\n  mass = " + num(mass) + "\n  hbar = " + num(hbar) + "\n}\n";
  if (symmetry != ExchangeSymmetry::None) {
    out += "symmetry {\n  ";
    out += symmetry == ExchangeSymmetry::Symmetric ? "symmetric" : "antisymmetric";
    out += "\n}\n";
  }
  return out;
}

}  // namespace nsqm
