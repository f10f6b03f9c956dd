#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nsqm {

// Position inside a problem file, 1-based. line == 0 means "not from a file".
struct SourcePos {
  int line = 0;
  int column = 0;
};

inline std::string pos_str(SourcePos p) {
  if (p.line == 0) return "";
  return "line " + std::to_string(p.line) + ", col " + std::to_string(p.column);
}

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, SourcePos p)
      : Error(msg + " (" + pos_str(p) + ")"), pos(p) {}
  SourcePos pos;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(const std::string& name, SourcePos p)
      : Error("unknown identifier '" + name + "' (" + pos_str(p) + ")"), pos(p) {}
  SourcePos pos;
};

class IndexOutOfRange : public Error {
 public:
  IndexOutOfRange(const std::string& msg, SourcePos p)
      : Error(msg + " (" + pos_str(p) + ")"), pos(p) {}
  SourcePos pos;
};

class AsymmetricMetric : public Error {
 public:
  AsymmetricMetric(const std::string& msg, SourcePos p)
      : Error(msg + " (" + pos_str(p) + ")"), pos(p) {}
  SourcePos pos;
};

class MissingSection : public Error {
 public:
  explicit MissingSection(const std::string& section)
      : Error("missing mandatory section '" + section + "'") {}
};

// Evaluation of an expression hit a math-domain violation (log of nonpositive,
// division by zero, ...). Carries the offending point.
class DomainFault : public Error {
 public:
  DomainFault(const std::string& msg, SourcePos p, std::vector<double> at)
      : Error(msg + " (" + pos_str(p) + ")"), pos(p), point(std::move(at)) {}
  SourcePos pos;
  std::vector<double> point;
};

class SingularMetric : public Error {
 public:
  SingularMetric(const std::string& msg, std::vector<double> at)
      : Error(msg), point(std::move(at)) {}
  std::vector<double> point;
};

class NonSymmetricMetric : public Error {
 public:
  NonSymmetricMetric(const std::string& msg, std::vector<double> at)
      : Error(msg), point(std::move(at)) {}
  std::vector<double> point;
};

class SingularFrame : public Error {
 public:
  SingularFrame(const std::string& msg, std::vector<double> at)
      : Error(msg), point(std::move(at)) {}
  std::vector<double> point;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& msg, std::vector<double> res)
      : Error(msg), residuals(std::move(res)) {}
  std::vector<double> residuals;
};

class LinearSolveFailure : public Error {
 public:
  LinearSolveFailure(const std::string& msg, long step, double residual)
      : Error(msg), step(step), residual(residual) {}
  long step;
  double residual;
};

class StepTooLarge : public Error {
 public:
  explicit StepTooLarge(const std::string& msg) : Error(msg) {}
};

class NotExchangeSymmetricChart : public Error {
 public:
  explicit NotExchangeSymmetricChart(const std::string& msg) : Error(msg) {}
};

}  // namespace nsqm
