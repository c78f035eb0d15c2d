#include "pilekit/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace pilekit {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

struct CoefficientFn::Node {
  enum class Kind { Const, Coord, Add, Sub, Mul, Neg, Sin, Cos, Pow };

  Kind kind = Kind::Const;
  double value = 0.0;  // Const
  int index = 0;       // Coord (0-based); Pow exponent
  bool is_pi = false;  // Const printed as "pi"
  std::shared_ptr<const Node> a, b;

  double eval(std::span<const double> x) const {
    switch (kind) {
      case Kind::Const: return value;
      case Kind::Coord:
        if (index >= static_cast<int>(x.size()))
          throw SpecError("coefficient references x" + std::to_string(index + 1) +
                          " but the point has dimension " + std::to_string(x.size()));
        return x[index];
      case Kind::Add: return a->eval(x) + b->eval(x);
      case Kind::Sub: return a->eval(x) - b->eval(x);
      case Kind::Mul: return a->eval(x) * b->eval(x);
      case Kind::Neg: return -a->eval(x);
      case Kind::Sin: return std::sin(a->eval(x));
      case Kind::Cos: return std::cos(a->eval(x));
      case Kind::Pow: {
        double base = a->eval(x);
        double r = 1.0;
        for (int i = 0; i < index; ++i) r *= base;
        return r;
      }
    }
    return 0.0;
  }

  bool constant() const {
    switch (kind) {
      case Kind::Const: return true;
      case Kind::Coord: return false;
      case Kind::Sin:
      case Kind::Cos:
      case Kind::Neg:
      case Kind::Pow: return a->constant();
      default: return a->constant() && b->constant();
    }
  }

  int min_dim() const {
    switch (kind) {
      case Kind::Const: return 0;
      case Kind::Coord: return index + 1;
      case Kind::Sin:
      case Kind::Cos:
      case Kind::Neg:
      case Kind::Pow: return a->min_dim();
      default: return std::max(a->min_dim(), b->min_dim());
    }
  }

  bool equals(const Node& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case Kind::Const: return value == o.value && is_pi == o.is_pi;
      case Kind::Coord: return index == o.index;
      case Kind::Pow: return index == o.index && a->equals(*o.a);
      case Kind::Sin:
      case Kind::Cos:
      case Kind::Neg: return a->equals(*o.a);
      default: return a->equals(*o.a) && b->equals(*o.b);
    }
  }

  // precedence: Add/Sub=1, Mul=2, Neg=3, Pow=4, atoms=5
  int prec() const {
    switch (kind) {
      case Kind::Add:
      case Kind::Sub: return 1;
      case Kind::Mul: return 2;
      case Kind::Neg: return 3;
      case Kind::Pow: return 4;
      default: return 5;
    }
  }

  void print(std::ostream& os) const {
    auto child = [&](const Node& n, int min_prec) {
      if (n.prec() < min_prec) {
        os << '(';
        n.print(os);
        os << ')';
      } else {
        n.print(os);
      }
    };
    switch (kind) {
      case Kind::Const:
        if (is_pi) {
          os << "pi";
        } else {
          std::ostringstream tmp;
          tmp.precision(17);
          tmp << value;
          os << tmp.str();
        }
        break;
      case Kind::Coord: os << 'x' << (index + 1); break;
      case Kind::Add: child(*a, 1); os << " + "; child(*b, 2); break;
      case Kind::Sub: child(*a, 1); os << " - "; child(*b, 2); break;
      case Kind::Mul: child(*a, 2); os << "*"; child(*b, 3); break;
      case Kind::Neg: os << '-'; child(*a, 3); break;
      case Kind::Sin: os << "sin("; a->print(os); os << ')'; break;
      case Kind::Cos: os << "cos("; a->print(os); os << ')'; break;
      case Kind::Pow: child(*a, 5); os << '^' << index; break;
    }
  }
};

namespace {

using Node = CoefficientFn::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_const(double v, bool is_pi = false) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Const;
  n->value = v;
  n->is_pi = is_pi;
  return n;
}

NodePtr make_unary(Node::Kind k, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(Node::Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ExprParseError("expression syntax error: " + msg, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+')) lhs = make_binary(Node::Kind::Add, lhs, term());
      else if (eat('-')) lhs = make_binary(Node::Kind::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    while (eat('*')) lhs = make_binary(Node::Kind::Mul, lhs, factor());
    return lhs;
  }

  NodePtr factor() {
    NodePtr base = atom();
    if (eat('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == start) fail("expected non-negative integer exponent after '^'");
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Pow;
      n->a = base;
      n->index = std::stoi(s_.substr(start, pos_ - start));
      return n;
    }
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == '-') {
      ++pos_;
      return make_unary(Node::Kind::Neg, factor());
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' was not an exponent
      }
    }
    try {
      return make_const(std::stod(s_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed number");
    }
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])))) ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    if (name == "pi") return make_const(kPi, true);
    if (name == "sin" || name == "cos") {
      if (!eat('(')) fail("expected '(' after " + name);
      NodePtr arg = expr();
      if (!eat(')')) fail("expected ')'");
      return make_unary(name == "sin" ? Node::Kind::Sin : Node::Kind::Cos, arg);
    }
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        int idx = std::stoi(name.substr(1));
        if (idx < 1) {
          pos_ = start;
          fail("coordinate indices are 1-based");
        }
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Coord;
        n->index = idx - 1;
        return n;
      }
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

CoefficientFn::CoefficientFn() : root_(make_const(0.0)) {}

CoefficientFn::CoefficientFn(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

CoefficientFn CoefficientFn::constant(double value) { return CoefficientFn(make_const(value)); }

CoefficientFn CoefficientFn::coordinate(int index) {
  if (index < 0) throw SpecError("coordinate index must be non-negative");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Coord;
  n->index = index;
  return CoefficientFn(n);
}

CoefficientFn CoefficientFn::parse(const std::string& text) {
  return CoefficientFn(Parser(text).run());
}

double CoefficientFn::eval(PointRef x) const {
  return root_->eval(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

double CoefficientFn::eval(std::span<const double> x) const { return root_->eval(x); }

std::string CoefficientFn::print() const {
  std::ostringstream os;
  root_->print(os);
  return os.str();
}

bool CoefficientFn::is_constant() const { return root_->constant(); }

int CoefficientFn::min_dimension() const { return root_->min_dim(); }

bool CoefficientFn::equals(const CoefficientFn& other) const { return root_->equals(*other.root_); }

CoefficientFn CoefficientFn::operator+(const CoefficientFn& rhs) const {
  return CoefficientFn(make_binary(Node::Kind::Add, root_, rhs.root_));
}

CoefficientFn CoefficientFn::operator-(const CoefficientFn& rhs) const {
  return CoefficientFn(make_binary(Node::Kind::Sub, root_, rhs.root_));
}

CoefficientFn CoefficientFn::operator*(const CoefficientFn& rhs) const {
  return CoefficientFn(make_binary(Node::Kind::Mul, root_, rhs.root_));
}

}  // namespace pilekit
