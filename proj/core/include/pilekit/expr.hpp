#pragma once

#include "pilekit/common.hpp"

#include <memory>
#include <span>
#include <string>

namespace pilekit {

// Serializable scalar coefficient function c(x) over the grammar
//   expr   := term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' nonneg-integer)?
//   atom   := number | 'pi' | 'x'<k> | 'sin' '(' expr ')' | 'cos' '(' expr ')'
//           | '-' factor | '(' expr ')'
// Coordinates are named x1..xd (1-based). Evaluation is deterministic and
// parse -> print -> parse round-trips to an identical tree.
class CoefficientFn {
 public:
  CoefficientFn();  // identically zero

  static CoefficientFn constant(double value);
  static CoefficientFn coordinate(int index);  // 0-based
  static CoefficientFn parse(const std::string& text);

  double eval(PointRef x) const;
  double eval(std::span<const double> x) const;

  std::string print() const;

  bool is_constant() const;
  // Largest coordinate index referenced plus one (0 for constants).
  int min_dimension() const;

  bool equals(const CoefficientFn& other) const;

  CoefficientFn operator+(const CoefficientFn& rhs) const;
  CoefficientFn operator-(const CoefficientFn& rhs) const;
  CoefficientFn operator*(const CoefficientFn& rhs) const;

  struct Node;

 private:
  explicit CoefficientFn(std::shared_ptr<const Node> root);
  std::shared_ptr<const Node> root_;
};

// Thrown by CoefficientFn::parse with 1-based line/column positions.
class ExprParseError : public SpecError {
 public:
  ExprParseError(const std::string& what, int column)
      : SpecError(what + " (column " + std::to_string(column) + ")"), column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

}  // namespace pilekit
