#pragma once

// Arithmetic expressions over named variables and a plain-text problem format.
//
// Grammar (usual precedence, ^ is right associative and binds tighter than
// unary minus, so -x^2 == -(x^2)):
//
//     expr   := term  (('+' | '-') term)*
//     term   := unary (('*' | '/') unary)*
//     unary  := ('+' | '-') unary | power
//     power  := atom ('^' unary)?
//     atom   := number | identifier | '(' expr ')'
//
// Problem files hold one declaration per line; '#' starts a comment:
//
//     variable a11 3 6
//     response x1 = (b1*a22 - a12*b2) / (a11*a22 - a12*a21)

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "despso/interval.hpp"

namespace despso::expr {

using pso::Vector;

/// A compiled expression in postfix form.
class Expression {
 public:
  /// Parses `text`; identifiers are resolved against `variables` (their index
  /// is the position in the evaluation vector). Throws ParseError.
  static Expression parse(std::string_view text, const std::vector<std::string>& variables);

  double evaluate(const Vector& x) const;
  const std::string& source() const { return source_; }

 private:
  enum class Op { kNumber, kVariable, kAdd, kSub, kMul, kDiv, kPow, kNeg };
  struct Instr {
    Op op;
    double value = 0.0;
    Eigen::Index index = 0;
  };

  friend class Parser;

  std::string source_;
  std::vector<Instr> code_;
  std::size_t stack_depth_ = 0;
};

/// Reads a problem definition. Throws ParseError with the line number.
interval::IntervalProblem parse_problem(std::istream& in);
interval::IntervalProblem load_problem(const std::string& path);

}  // namespace despso::expr
