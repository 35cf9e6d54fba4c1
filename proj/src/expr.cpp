#include "fibre/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace fibre {

DomainError::DomainError(const std::string& what, Point at)
    : std::runtime_error([&] {
        std::ostringstream os;
        os.precision(17);
        os << what << " at (" << at.x << ", " << at.y << ")";
        return os.str();
      }()),
      at_(at) {}

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& message)
    : std::runtime_error(message + " at offset " + std::to_string(offset)),
      kind_(kind),
      offset_(offset) {}

namespace {

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_node(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = {std::move(a), std::move(b)};
  return n;
}

NodePtr make_const(Complex c) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = c;
  return n;
}

const NodePtr& zero_node() {
  static const NodePtr z = make_const(0.0);
  return z;
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}
Expr::Expr(Complex c) : node_(c == Complex{} ? zero_node() : make_const(c)) {}
Expr::Expr(double c) : Expr(Complex(c, 0.0)) {}
Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::x() {
  static const Expr v(make_node(Op::VarX));
  return v;
}

Expr Expr::y() {
  static const Expr v(make_node(Op::VarY));
  return v;
}

Expr Expr::var(int axis) { return axis == 0 ? x() : y(); }

std::optional<Complex> Expr::constant() const {
  if (node_->op == Op::Const) return node_->value;
  return std::nullopt;
}

bool Expr::is_zero() const { return node_->op == Op::Const && node_->value == Complex{}; }
bool Expr::is_one() const { return node_->op == Op::Const && node_->value == Complex{1.0, 0.0}; }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (auto ca = a.constant(), cb = b.constant(); ca && cb) return Expr(*ca + *cb);
  return Expr(make_node(Op::Add, a.handle(), b.handle()));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (auto ca = a.constant(), cb = b.constant(); ca && cb) return Expr(*ca - *cb);
  return Expr(make_node(Op::Sub, a.handle(), b.handle()));
}

Expr operator-(const Expr& a) {
  if (auto c = a.constant()) return Expr(-*c);
  if (a.op() == Op::Neg) return a.arg(0);
  if (a.op() == Op::Mul) {
    if (auto c = a.arg(0).constant()) return Expr(-*c) * a.arg(1);
  }
  return Expr(make_node(Op::Neg, a.handle()));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  auto ca = a.constant();
  auto cb = b.constant();
  if (ca && cb) return Expr(*ca * *cb);
  if (ca && *ca == Complex(-1.0, 0.0)) return -b;
  if (cb && *cb == Complex(-1.0, 0.0)) return -a;
  if (ca && b.op() == Op::Mul) {
    if (auto inner = b.arg(0).constant()) return Expr(*ca * *inner) * b.arg(1);
  }
  return Expr(make_node(Op::Mul, a.handle(), b.handle()));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_zero()) return Expr();
  if (b.is_one()) return a;
  if (auto ca = a.constant(), cb = b.constant(); ca && cb && *cb != Complex{}) return Expr(*ca / *cb);
  return Expr(make_node(Op::Div, a.handle(), b.handle()));
}

namespace {

Complex ipow(Complex base, int n) {
  if (n < 0) return Complex(1.0, 0.0) / ipow(base, -n);
  Complex result(1.0, 0.0);
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

}  // namespace

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr(1.0);
  if (exponent == 1) return base;
  if (auto c = base.constant(); c && !(*c == Complex{} && exponent < 0)) return Expr(ipow(*c, exponent));
  auto n = std::make_shared<Node>();
  n->op = Op::Pow;
  n->order = exponent;
  n->args = {base.handle(), nullptr};
  return Expr(std::move(n));
}

Expr exp(const Expr& e) {
  if (auto c = e.constant()) return Expr(std::exp(*c));
  return Expr(make_node(Op::Exp, e.handle()));
}

Expr sqrt(const Expr& e) {
  if (auto c = e.constant(); c && c->imag() == 0.0 && c->real() >= 0.0) return Expr(std::sqrt(c->real()));
  return Expr(make_node(Op::Sqrt, e.handle()));
}

Expr atan2(const Expr& a, const Expr& b) { return Expr(make_node(Op::Atan2, a.handle(), b.handle())); }

Expr bump(const Expr& t, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("bump requires lo < hi");
  auto n = std::make_shared<Node>();
  n->op = Op::Bump;
  n->lo = lo;
  n->hi = hi;
  n->args = {t.handle(), nullptr};
  return Expr(std::move(n));
}

Expr glue(const Expr& s, int order) {
  if (order < 0) throw std::invalid_argument("glue order must be non-negative");
  auto n = std::make_shared<Node>();
  n->op = Op::Glue;
  n->order = order;
  n->args = {s.handle(), nullptr};
  return Expr(std::move(n));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, ParseError::Kind kind = ParseError::Kind::Syntax) {
    throw ParseError(kind, pos_, msg);
  }
  [[noreturn]] void fail_at(std::size_t at, const std::string& msg, ParseError::Kind kind) {
    throw ParseError(kind, at, msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+'))
        lhs = lhs + parse_product();
      else if (accept('-'))
        lhs = lhs - parse_product();
      else
        return lhs;
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = lhs * parse_unary();
      else if (accept('/'))
        lhs = lhs / parse_unary();
      else
        return lhs;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (!accept('^')) return base;
    skip_ws();
    bool paren = accept('(');
    bool negative = accept('-');
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) fail("integer exponent expected");
    if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
      fail("integer exponent expected");
    int n = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, n);
    if (ec != std::errc()) fail_at(start, "exponent out of range", ParseError::Kind::Syntax);
    if (paren) expect(')');
    return pow(base, negative ? -n : n);
  }

  std::vector<Expr> parse_args(std::size_t name_at, const std::string& name, std::size_t arity) {
    expect('(');
    std::vector<Expr> args;
    skip_ws();
    if (!accept(')')) {
      args.push_back(parse_sum());
      while (accept(',')) args.push_back(parse_sum());
      expect(')');
    }
    if (args.size() != arity)
      fail_at(name_at, name + " expects " + std::to_string(arity) + " argument(s), got " + std::to_string(args.size()),
              ParseError::Kind::Arity);
    return args;
  }

  double real_constant(const Expr& e, std::size_t at, const char* what) {
    auto c = e.constant();
    if (!c || c->imag() != 0.0) fail_at(at, std::string(what) + " must be a real constant", ParseError::Kind::Syntax);
    return c->real();
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      if (name == "x") return Expr::x();
      if (name == "y") return Expr::y();
      if (name == "i") return Expr(Complex(0.0, 1.0));
      if (name == "pi") return Expr(std::numbers::pi);
      if (name == "exp") return exp(parse_args(start, name, 1)[0]);
      if (name == "sqrt") return sqrt(parse_args(start, name, 1)[0]);
      if (name == "atan2") {
        auto a = parse_args(start, name, 2);
        return atan2(a[0], a[1]);
      }
      if (name == "bump") {
        auto a = parse_args(start, name, 3);
        double lo = real_constant(a[1], start, "bump lower bound");
        double hi = real_constant(a[2], start, "bump upper bound");
        if (!(lo < hi)) fail_at(start, "bump requires lower bound < upper bound", ParseError::Kind::Syntax);
        return bump(a[0], lo, hi);
      }
      if (name == "glue") {
        auto a = parse_args(start, name, 2);
        double k = real_constant(a[1], start, "glue order");
        if (k < 0 || k != std::floor(k) || k > 1000)
          fail_at(start, "glue order must be a non-negative integer", ParseError::Kind::Syntax);
        return glue(a[0], static_cast<int>(k));
      }
      fail_at(start, "unknown identifier '" + name + "'", ParseError::Kind::UnknownIdentifier);
    }
    fail("unexpected character");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_) fail_at(start, "malformed number", ParseError::Kind::Syntax);
    return Expr(v);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view source) { return Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Precedence levels: 1 sum, 2 product, 3 unary minus, 4 power, 5 atom.
struct Printed {
  std::string text;
  int level;
};

Printed print_const(Complex c) {
  double re = c.real();
  double im = c.imag();
  if (im == 0.0) {
    if (std::signbit(re) && re != 0.0) return {"-" + format_double(-re), 3};
    return {format_double(re), 5};
  }
  std::string imag_part = (std::abs(im) == 1.0) ? "i" : format_double(std::abs(im)) + "*i";
  int imag_level = (std::abs(im) == 1.0) ? 5 : 2;
  if (re == 0.0) {
    if (im < 0) return {"-" + imag_part, 3};
    return {imag_part, imag_level};
  }
  std::string s = "(" + (std::signbit(re) ? "-" + format_double(-re) : format_double(re)) + (im < 0 ? "-" : "+") +
                  imag_part + ")";
  return {s, 5};
}

class Printer {
 public:
  Printed print(const NodePtr& n) {
    if (auto it = memo_.find(n.get()); it != memo_.end()) return it->second;
    Printed p = build(n);
    memo_.emplace(n.get(), p);
    return p;
  }

 private:
  std::string wrap(const NodePtr& n, int min_level) {
    Printed p = print(n);
    if (p.level < min_level) return "(" + p.text + ")";
    return p.text;
  }

  Printed build(const NodePtr& n) {
    switch (n->op) {
      case Op::Const: return print_const(n->value);
      case Op::VarX: return {"x", 5};
      case Op::VarY: return {"y", 5};
      case Op::Neg: return {"-" + wrap(n->args[0], 4), 3};
      case Op::Add: return {wrap(n->args[0], 1) + "+" + wrap(n->args[1], 2), 1};
      case Op::Sub: return {wrap(n->args[0], 1) + "-" + wrap(n->args[1], 2), 1};
      case Op::Mul: return {wrap(n->args[0], 2) + "*" + wrap(n->args[1], 4), 2};
      case Op::Div: return {wrap(n->args[0], 2) + "/" + wrap(n->args[1], 4), 2};
      case Op::Pow: {
        std::string e = n->order < 0 ? "(" + std::to_string(n->order) + ")" : std::to_string(n->order);
        return {wrap(n->args[0], 5) + "^" + e, 4};
      }
      case Op::Exp: return {"exp(" + print(n->args[0]).text + ")", 5};
      case Op::Sqrt: return {"sqrt(" + print(n->args[0]).text + ")", 5};
      case Op::Atan2: return {"atan2(" + print(n->args[0]).text + "," + print(n->args[1]).text + ")", 5};
      case Op::Bump:
        return {"bump(" + print(n->args[0]).text + "," + print_const(n->lo).text + "," + print_const(n->hi).text + ")",
                5};
      case Op::Glue: return {"glue(" + print(n->args[0]).text + "," + std::to_string(n->order) + ")", 5};
    }
    return {"?", 5};
  }

  std::unordered_map<const Node*, Printed> memo_;
};

}  // namespace

std::string to_string(const Expr& e) { return Printer().print(e.handle()).text; }

bool same(const Expr& a, const Expr& b) {
  std::function<bool(const Node*, const Node*)> eq = [&](const Node* p, const Node* q) -> bool {
    if (p == q) return true;
    if (!p || !q) return false;
    if (p->op != q->op || p->order != q->order || p->lo != q->lo || p->hi != q->hi) return false;
    if (p->op == Op::Const) return p->value == q->value;
    return eq(p->args[0].get(), q->args[0].get()) && eq(p->args[1].get(), q->args[1].get());
  };
  return eq(a.handle().get(), b.handle().get());
}

// ---------------------------------------------------------------------------
// Rewriting

namespace {

class Differentiator {
 public:
  explicit Differentiator(int axis) : axis_(axis) {}

  Expr d(const Expr& e) {
    const Node* key = e.handle().get();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Expr r = build(e);
    memo_.emplace(key, r);
    return r;
  }

 private:
  Expr build(const Expr& e) {
    switch (e.op()) {
      case Op::Const: return Expr();
      case Op::VarX: return Expr(axis_ == 0 ? 1.0 : 0.0);
      case Op::VarY: return Expr(axis_ == 1 ? 1.0 : 0.0);
      case Op::Neg: return -d(e.arg(0));
      case Op::Add: return d(e.arg(0)) + d(e.arg(1));
      case Op::Sub: return d(e.arg(0)) - d(e.arg(1));
      case Op::Mul: return d(e.arg(0)) * e.arg(1) + e.arg(0) * d(e.arg(1));
      case Op::Div: {
        Expr a = e.arg(0), b = e.arg(1);
        Expr da = d(a), db = d(b);
        if (da.is_zero()) return -(a * db) / pow(b, 2);
        return (da * b - a * db) / pow(b, 2);
      }
      case Op::Pow: {
        int n = e.node().order;
        return Expr(static_cast<double>(n)) * pow(e.arg(0), n - 1) * d(e.arg(0));
      }
      case Op::Exp: return e * d(e.arg(0));
      case Op::Sqrt: return d(e.arg(0)) / (Expr(2.0) * e);
      case Op::Atan2: {
        Expr a = e.arg(0), b = e.arg(1);
        return (b * d(a) - a * d(b)) / (pow(a, 2) + pow(b, 2));
      }
      case Op::Glue: {
        int k = e.node().order;
        Expr s = e.arg(0);
        Expr inner = glue(s, k + 2);
        if (k != 0) inner = inner - Expr(static_cast<double>(k)) * glue(s, k + 1);
        return inner * d(s);
      }
      case Op::Bump: {
        double lo = e.node().lo, hi = e.node().hi;
        Expr t = e.arg(0);
        Expr s = (t - Expr(lo)) / Expr(hi - lo);
        Expr u = Expr(1.0) - s;
        Expr hs = glue(s, 0), hu = glue(u, 0);
        Expr num = glue(s, 2) * hu + hs * glue(u, 2);
        return Expr(1.0 / (hi - lo)) * num / pow(hs + hu, 2) * d(t);
      }
    }
    return Expr();
  }

  int axis_;
  std::unordered_map<const Node*, Expr> memo_;
};

class Substituter {
 public:
  Substituter(Expr x, Expr y) : x_(std::move(x)), y_(std::move(y)) {}

  Expr s(const Expr& e) {
    const Node* key = e.handle().get();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Expr r = build(e);
    memo_.emplace(key, r);
    return r;
  }

 private:
  Expr build(const Expr& e) {
    switch (e.op()) {
      case Op::Const: return e;
      case Op::VarX: return x_;
      case Op::VarY: return y_;
      case Op::Neg: return -s(e.arg(0));
      case Op::Add: return s(e.arg(0)) + s(e.arg(1));
      case Op::Sub: return s(e.arg(0)) - s(e.arg(1));
      case Op::Mul: return s(e.arg(0)) * s(e.arg(1));
      case Op::Div: return s(e.arg(0)) / s(e.arg(1));
      case Op::Pow: return pow(s(e.arg(0)), e.node().order);
      case Op::Exp: return exp(s(e.arg(0)));
      case Op::Sqrt: return sqrt(s(e.arg(0)));
      case Op::Atan2: return atan2(s(e.arg(0)), s(e.arg(1)));
      case Op::Bump: return bump(s(e.arg(0)), e.node().lo, e.node().hi);
      case Op::Glue: return glue(s(e.arg(0)), e.node().order);
    }
    return e;
  }

  Expr x_, y_;
  std::unordered_map<const Node*, Expr> memo_;
};

}  // namespace

Expr differentiate(const Expr& e, int axis) { return Differentiator(axis).d(e); }

Expr substitute(const Expr& e, const Expr& new_x, const Expr& new_y) { return Substituter(new_x, new_y).s(e); }

Complex evaluate(const Expr& e, Point p) {
  Expr outs[1] = {e};
  return Program(outs)(p)[0];
}

// ---------------------------------------------------------------------------
// Compiled evaluation

namespace {

struct InstrKey {
  Op op;
  std::uint32_t a, b;
  int order;
  double re, im, lo, hi;
  bool operator==(const InstrKey&) const = default;
};

struct InstrKeyHash {
  std::size_t operator()(const InstrKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.op);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(k.a);
    mix(k.b);
    mix(static_cast<std::size_t>(k.order));
    mix(std::hash<double>{}(k.re));
    mix(std::hash<double>{}(k.im));
    mix(std::hash<double>{}(k.lo));
    mix(std::hash<double>{}(k.hi));
    return h;
  }
};

double glue_value(double s, int k) {
  if (!(s > 0.0)) return 0.0;
  return std::exp(-1.0 / s - k * std::log(s));
}

double real_arg(Complex c, const char* what, Point p) {
  if (std::abs(c.imag()) > 1e-12 * (1.0 + std::abs(c.real()))) throw DomainError(std::string(what) + " of non-real argument", p);
  return c.real();
}

}  // namespace

Program::Program(std::span<const Expr> outputs) {
  std::unordered_map<const Node*, std::uint32_t> by_ptr;
  std::unordered_map<InstrKey, std::uint32_t, InstrKeyHash> by_key;

  std::function<std::uint32_t(const Node*)> visit = [&](const Node* n) -> std::uint32_t {
    if (auto it = by_ptr.find(n); it != by_ptr.end()) return it->second;
    Instr ins{n->op};
    ins.order = n->order;
    ins.value = n->value;
    ins.lo = n->lo;
    ins.hi = n->hi;
    if (n->args[0]) ins.a = visit(n->args[0].get());
    if (n->args[1]) ins.b = visit(n->args[1].get());
    InstrKey key{ins.op, ins.a, ins.b, ins.order, ins.value.real(), ins.value.imag(), ins.lo, ins.hi};
    std::uint32_t id;
    if (auto it = by_key.find(key); it != by_key.end()) {
      id = it->second;
    } else {
      id = static_cast<std::uint32_t>(tape_.size());
      tape_.push_back(ins);
      by_key.emplace(key, id);
    }
    by_ptr.emplace(n, id);
    return id;
  };

  outputs_.reserve(outputs.size());
  for (const Expr& e : outputs) outputs_.push_back(visit(e.handle().get()));
}

void Program::run(Point p, std::vector<Complex>& v, std::span<Complex> out) const {
  v.resize(tape_.size());
  for (std::size_t k = 0; k < tape_.size(); ++k) {
    const Instr& in = tape_[k];
    Complex r;
    switch (in.op) {
      case Op::Const: r = in.value; break;
      case Op::VarX: r = p.x; break;
      case Op::VarY: r = p.y; break;
      case Op::Neg: r = -v[in.a]; break;
      case Op::Add: r = v[in.a] + v[in.b]; break;
      case Op::Sub: r = v[in.a] - v[in.b]; break;
      case Op::Mul: r = v[in.a] * v[in.b]; break;
      case Op::Div:
        if (v[in.b] == Complex{}) throw DomainError("division by zero", p);
        r = v[in.a] / v[in.b];
        break;
      case Op::Pow:
        if (in.order < 0 && v[in.a] == Complex{}) throw DomainError("negative power of zero", p);
        r = ipow(v[in.a], in.order);
        break;
      case Op::Exp: r = std::exp(v[in.a]); break;
      case Op::Sqrt: {
        Complex a = v[in.a];
        if (a.imag() == 0.0) {
          if (a.real() < 0.0) throw DomainError("square root of negative number", p);
          r = std::sqrt(a.real());
        } else {
          r = std::sqrt(a);
        }
        break;
      }
      case Op::Atan2: {
        double a = real_arg(v[in.a], "atan2", p);
        double b = real_arg(v[in.b], "atan2", p);
        if (a == 0.0 && b == 0.0) throw DomainError("atan2(0, 0)", p);
        r = std::atan2(a, b);
        break;
      }
      case Op::Glue: r = glue_value(real_arg(v[in.a], "glue", p), in.order); break;
      case Op::Bump: {
        double s = (real_arg(v[in.a], "bump", p) - in.lo) / (in.hi - in.lo);
        double hs = glue_value(s, 0), hu = glue_value(1.0 - s, 0);
        r = hs / (hs + hu);
        break;
      }
    }
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) throw DomainError("non-finite value", p);
    v[k] = r;
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = v[outputs_[k]];
}

std::vector<Complex> Program::operator()(Point p) const {
  std::vector<Complex> scratch;
  std::vector<Complex> out(outputs_.size());
  run(p, scratch, out);
  return out;
}

}  // namespace fibre
