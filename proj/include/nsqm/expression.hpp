#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "nsqm/errors.hpp"

namespace nsqm {

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

struct Token {
  enum class Kind { Ident, Number, Punct, End } kind = Kind::End;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

// Line-oriented lexer shared by the expression and problem-file parsers.
// '#' starts a comment running to end of line; whitespace is insignificant.
class Lexer {
 public:
  explicit Lexer(std::string_view text);
  const Token& peek() const { return tokens_[cursor_]; }
  Token next() { return tokens_[cursor_ == tokens_.size() - 1 ? cursor_ : cursor_++]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  std::size_t save() const { return cursor_; }
  void restore(std::size_t c) { cursor_ = c; }

 private:
  std::vector<Token> tokens_;
  std::size_t cursor_ = 0;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

// Arithmetic expression over declared coordinate names and t.
// Grammar precedence: ^  >  unary -  >  * /  >  + -, with ^ right-associative,
// so -x^2 parses as -(x^2).
//
// Evaluation is pure; identical inputs give bit-identical outputs. Domain
// violations (log of nonpositive, division by zero, sqrt of negative,
// fractional power of a negative base) raise DomainFault with the offending
// point rather than returning NaN.
class Expression {
 public:
  Expression() = default;

  // Parses a full expression from `lex`. `symbols` maps identifier -> slot;
  // by convention the last slot is t when time is allowed.
  static Expression parse(Lexer& lex, const std::vector<std::string>& symbols);

  // Convenience: parse a standalone string.
  static Expression parse_string(std::string_view text,
                                 const std::vector<std::string>& symbols);

  bool empty() const { return nodes_.empty(); }

  // slots must provide one value per symbol used at parse time
  double eval(const double* slots, std::size_t nslots) const;
  double eval(const std::vector<double>& slots) const {
    return eval(slots.data(), slots.size());
  }

  bool references_slot(int slot) const;

  std::string to_string() const;

  // an Expression that is the literal `v`
  static Expression constant(double v);

 private:
  enum class Op : unsigned char { Num, Slot, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Fn : unsigned char { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

  struct Node {
    Op op = Op::Num;
    double value = 0.0;
    int slot = -1;
    int a = -1, b = -1;
    Fn fn = Fn::Sin;
    SourcePos pos;
  };

  int parse_sum(Lexer& lex);
  int parse_product(Lexer& lex);
  int parse_unary(Lexer& lex);
  int parse_power(Lexer& lex);
  int parse_atom(Lexer& lex);
  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  double eval_node(int id, const double* slots, std::size_t nslots) const;
  void print_node(int id, int parent_prec, bool right_side, std::string& out) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::vector<std::string> symbols_;
};

}  // namespace nsqm
