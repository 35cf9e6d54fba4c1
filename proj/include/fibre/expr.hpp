#pragma once

// Expression language for complex-valued functions of two real chart
// coordinates (x, y). Expressions are immutable DAGs; every node type has a
// closed-form derivative, so differentiation never leaves the language.

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fibre {

using Complex = std::complex<double>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Raised when an expression is evaluated outside its domain (pole,
/// negative square root, non-finite intermediate).
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, Point at);
  Point where() const { return at_; }

 private:
  Point at_;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, Arity };
  ParseError(Kind kind, std::size_t offset, const std::string& message);
  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

enum class Op : std::uint8_t {
  Const,
  VarX,
  VarY,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,    // integer exponent
  Exp,
  Sqrt,
  Atan2,
  Bump,   // smooth step: 0 for t <= lo, 1 for t >= hi
  Glue,   // exp(-1/s) / s^k for s > 0, else 0
};

struct Node {
  Op op = Op::Const;
  Complex value{};
  int order = 0;  // Pow exponent or Glue order
  double lo = 0.0;
  double hi = 0.0;
  std::array<std::shared_ptr<const Node>, 2> args{};
};

class Expr {
 public:
  Expr();  // the constant 0
  Expr(Complex c);
  Expr(double c);
  explicit Expr(std::shared_ptr<const Node> node);

  static Expr x();
  static Expr y();
  static Expr var(int axis);

  Op op() const { return node_->op; }
  const Node& node() const { return *node_; }
  const std::shared_ptr<const Node>& handle() const { return node_; }
  Expr arg(std::size_t k) const { return Expr(node_->args[k]); }

  std::optional<Complex> constant() const;
  bool is_zero() const;
  bool is_one() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

 private:
  std::shared_ptr<const Node> node_;
};

Expr pow(const Expr& base, int exponent);
Expr exp(const Expr& e);
Expr sqrt(const Expr& e);
Expr atan2(const Expr& a, const Expr& b);
Expr bump(const Expr& t, double lo, double hi);
Expr glue(const Expr& s, int order);

/// Parses the grammar documented in docs/dsl.md.
Expr parse(std::string_view source);

/// Round-trippable text form: parse(to_string(e)) is structurally equal to e.
std::string to_string(const Expr& e);

/// Structural equality of the two DAGs.
bool same(const Expr& a, const Expr& b);

/// Exact partial derivative with respect to coordinate `axis` (0 = x, 1 = y).
Expr differentiate(const Expr& e, int axis);

/// Replaces x and y by the given expressions.
Expr substitute(const Expr& e, const Expr& new_x, const Expr& new_y);

Complex evaluate(const Expr& e, Point p);

/// Several expressions compiled into one tape with shared subexpressions
/// deduplicated. Evaluation is pure; one Program may be run from many
/// threads, each with its own scratch buffer.
class Program {
 public:
  Program() = default;
  explicit Program(std::span<const Expr> outputs);

  std::size_t size() const { return outputs_.size(); }
  std::size_t tape_length() const { return tape_.size(); }

  void run(Point p, std::vector<Complex>& scratch, std::span<Complex> out) const;
  std::vector<Complex> operator()(Point p) const;

 private:
  struct Instr {
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    int order = 0;
    Complex value{};
    double lo = 0.0;
    double hi = 0.0;
  };
  std::vector<Instr> tape_;
  std::vector<std::uint32_t> outputs_;
};

}  // namespace fibre
