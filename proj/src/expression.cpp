#include "nsqm/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace nsqm {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

Lexer::Lexer(std::string_view text) {
  int line = 1, col = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (text[i + j] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += k;
  };
  while (i < n) {
    const char c = text[i];
    if (c == '#') {
      std::size_t j = i;
      while (j < n && text[j] != '\n') ++j;
      advance(j - i);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token tok;
    tok.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      tok.kind = Token::Kind::Ident;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      while (j < n && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
      if (j < n && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) {
          while (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      tok.kind = Token::Kind::Number;
      tok.text = std::string(text.substr(i, j - i));
      char* endp = nullptr;
      tok.number = std::strtod(tok.text.c_str(), &endp);
      if (endp != tok.text.c_str() + tok.text.size())
        throw SyntaxError("malformed number '" + tok.text + "'", tok.pos);
      advance(j - i);
    } else {
      tok.kind = Token::Kind::Punct;
      tok.text = std::string(1, c);
      advance(1);
    }
    tokens_.push_back(std::move(tok));
  }
  Token end;
  end.kind = Token::Kind::End;
  end.pos = {line, col};
  tokens_.push_back(end);
}

// ---------------------------------------------------------------------------
// Expression parsing
// ---------------------------------------------------------------------------

namespace {

bool is_punct(const Token& t, char c) {
  return t.kind == Token::Kind::Punct && t.text.size() == 1 && t.text[0] == c;
}

int fn_from_name(const std::string& name) {
  static const char* names[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs"};
  for (int k = 0; k < 7; ++k)
    if (name == names[k]) return k;
  return -1;
}

const char* fn_name(int k) {
  static const char* names[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs"};
  return names[k];
}

}  // namespace

Expression Expression::parse(Lexer& lex, const std::vector<std::string>& symbols) {
  Expression e;
  e.symbols_ = symbols;
  e.root_ = e.parse_sum(lex);
  return e;
}

Expression Expression::parse_string(std::string_view text,
                                    const std::vector<std::string>& symbols) {
  Lexer lex(text);
  Expression e = parse(lex, symbols);
  if (!lex.at_end())
    throw SyntaxError("unexpected trailing input '" + lex.peek().text + "'", lex.peek().pos);
  return e;
}

Expression Expression::constant(double v) {
  Expression e;
  Node n;
  n.op = Op::Num;
  n.value = v;
  e.root_ = e.add(n);
  return e;
}

int Expression::parse_sum(Lexer& lex) {
  int lhs = parse_product(lex);
  while (is_punct(lex.peek(), '+') || is_punct(lex.peek(), '-')) {
    Token t = lex.next();
    Node n;
    n.op = t.text[0] == '+' ? Op::Add : Op::Sub;
    n.pos = t.pos;
    n.a = lhs;
    n.b = parse_product(lex);
    lhs = add(n);
  }
  return lhs;
}

int Expression::parse_product(Lexer& lex) {
  int lhs = parse_unary(lex);
  while (is_punct(lex.peek(), '*') || is_punct(lex.peek(), '/')) {
    Token t = lex.next();
    Node n;
    n.op = t.text[0] == '*' ? Op::Mul : Op::Div;
    n.pos = t.pos;
    n.a = lhs;
    n.b = parse_unary(lex);
    lhs = add(n);
  }
  return lhs;
}

int Expression::parse_unary(Lexer& lex) {
  if (is_punct(lex.peek(), '-')) {
    Token t = lex.next();
    Node n;
    n.op = Op::Neg;
    n.pos = t.pos;
    n.a = parse_unary(lex);
    return add(n);
  }
  if (is_punct(lex.peek(), '+')) {
    lex.next();
    return parse_unary(lex);
  }
  return parse_power(lex);
}

int Expression::parse_power(Lexer& lex) {
  int base = parse_atom(lex);
  if (is_punct(lex.peek(), '^')) {
    Token t = lex.next();
    Node n;
    n.op = Op::Pow;
    n.pos = t.pos;
    n.a = base;
    n.b = parse_unary(lex);  // right-associative; exponent may carry unary -
    return add(n);
  }
  return base;
}

int Expression::parse_atom(Lexer& lex) {
  const Token& t = lex.peek();
  if (t.kind == Token::Kind::Number) {
    Token tok = lex.next();
    Node n;
    n.op = Op::Num;
    n.value = tok.number;
    n.pos = tok.pos;
    return add(n);
  }
  if (t.kind == Token::Kind::Ident) {
    Token tok = lex.next();
    if (tok.text == "pi") {
      Node n;
      n.op = Op::Pi;
      n.pos = tok.pos;
      return add(n);
    }
    const int fn = fn_from_name(tok.text);
    if (fn >= 0) {
      if (!is_punct(lex.peek(), '('))
        throw SyntaxError("expected '(' after function '" + tok.text + "'", lex.peek().pos);
      lex.next();
      Node n;
      n.op = Op::Call;
      n.fn = static_cast<Fn>(fn);
      n.pos = tok.pos;
      n.a = parse_sum(lex);
      if (!is_punct(lex.peek(), ')'))
        throw SyntaxError("expected ')'", lex.peek().pos);
      lex.next();
      return add(n);
    }
    for (std::size_t k = 0; k < symbols_.size(); ++k) {
      if (symbols_[k] == tok.text) {
        Node n;
        n.op = Op::Slot;
        n.slot = static_cast<int>(k);
        n.pos = tok.pos;
        return add(n);
      }
    }
    throw UnknownIdentifier(tok.text, tok.pos);
  }
  if (is_punct(t, '(')) {
    lex.next();
    const int inner = parse_sum(lex);
    if (!is_punct(lex.peek(), ')'))
      throw SyntaxError("expected ')'", lex.peek().pos);
    lex.next();
    return inner;
  }
  throw SyntaxError("expected a number, identifier, or '('", t.pos);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double Expression::eval(const double* slots, std::size_t nslots) const {
  if (root_ < 0) throw Error("evaluating an empty expression");
  return eval_node(root_, slots, nslots);
}

double Expression::eval_node(int id, const double* slots, std::size_t nslots) const {
  const Node& n = nodes_[id];
  auto fault = [&](const std::string& msg) -> double {
    throw DomainFault(msg, n.pos, std::vector<double>(slots, slots + nslots));
  };
  switch (n.op) {
    case Op::Num:
      return n.value;
    case Op::Pi:
      return 3.14159265358979323846264338327950288;
    case Op::Slot:
      if (n.slot >= static_cast<int>(nslots)) throw Error("expression slot out of range");
      return slots[n.slot];
    case Op::Neg:
      return -eval_node(n.a, slots, nslots);
    case Op::Add:
      return eval_node(n.a, slots, nslots) + eval_node(n.b, slots, nslots);
    case Op::Sub:
      return eval_node(n.a, slots, nslots) - eval_node(n.b, slots, nslots);
    case Op::Mul:
      return eval_node(n.a, slots, nslots) * eval_node(n.b, slots, nslots);
    case Op::Div: {
      const double a = eval_node(n.a, slots, nslots);
      const double b = eval_node(n.b, slots, nslots);
      if (b == 0.0) return fault("division by zero");
      return a / b;
    }
    case Op::Pow: {
      const double a = eval_node(n.a, slots, nslots);
      const double b = eval_node(n.b, slots, nslots);
      if (a == 0.0 && b < 0.0) return fault("zero raised to a negative power");
      if (a < 0.0 && b != std::floor(b)) return fault("fractional power of a negative base");
      const double r = std::pow(a, b);
      if (!std::isfinite(r)) return fault("power overflow");
      return r;
    }
    case Op::Call: {
      const double a = eval_node(n.a, slots, nslots);
      switch (n.fn) {
        case Fn::Sin:
          return std::sin(a);
        case Fn::Cos:
          return std::cos(a);
        case Fn::Tan:
          return std::tan(a);
        case Fn::Exp: {
          const double r = std::exp(a);
          if (!std::isfinite(r)) return fault("exp overflow");
          return r;
        }
        case Fn::Log:
          if (a <= 0.0) return fault("log of a nonpositive value");
          return std::log(a);
        case Fn::Sqrt:
          if (a < 0.0) return fault("sqrt of a negative value");
          return std::sqrt(a);
        case Fn::Abs:
          return std::fabs(a);
      }
      return 0.0;
    }
  }
  return 0.0;
}

bool Expression::references_slot(int slot) const {
  for (const auto& n : nodes_)
    if (n.op == Op::Slot && n.slot == slot) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Printing (canonical; a reparse of the output yields the same tree)
// ---------------------------------------------------------------------------

namespace {
int prec_of(int op_class) { return op_class; }
}  // namespace

std::string Expression::to_string() const {
  std::string out;
  if (root_ >= 0) print_node(root_, 0, false, out);
  return out;
}

void Expression::print_node(int id, int parent_prec, bool right_side, std::string& out) const {
  const Node& n = nodes_[id];
  // precedence classes: + - = 1, * / = 2, unary - = 3, ^ = 4, atoms = 5
  auto wrap = [&](int myprec, auto&& body) {
    const bool parens = myprec < parent_prec || (myprec == parent_prec && right_side);
    if (parens) out += '(';
    body();
    if (parens) out += ')';
  };
  switch (n.op) {
    case Op::Num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      break;
    }
    case Op::Pi:
      out += "pi";
      break;
    case Op::Slot:
      out += symbols_[n.slot];
      break;
    case Op::Neg:
      wrap(prec_of(3), [&] {
        out += '-';
        print_node(n.a, 3, false, out);
      });
      break;
    case Op::Add:
    case Op::Sub:
      wrap(prec_of(1), [&] {
        print_node(n.a, 1, false, out);
        out += n.op == Op::Add ? '+' : '-';
        print_node(n.b, 1, true, out);
      });
      break;
    case Op::Mul:
    case Op::Div:
      wrap(prec_of(2), [&] {
        print_node(n.a, 2, false, out);
        out += n.op == Op::Mul ? '*' : '/';
        print_node(n.b, 2, true, out);
      });
      break;
    case Op::Pow:
      wrap(prec_of(4), [&] {
        print_node(n.a, 5, false, out);  // base must bind tighter than ^
        out += '^';
        print_node(n.b, 4, false, out);  // right-assoc: x^y^z stays as is
      });
      break;
    case Op::Call:
      out += fn_name(static_cast<int>(n.fn));
      out += '(';
      print_node(n.a, 0, false, out);
      out += ')';
      break;
  }
}

}  // namespace nsqm
