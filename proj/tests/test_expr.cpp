#include <cmath>
#include <random>

#include "doctest.h"
#include "fibre/expr.hpp"

using namespace fibre;

namespace {

Expr random_polynomial(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 6);
  std::uniform_int_distribution<int> small(-3, 3);
  switch (pick(rng)) {
    case 0: return Expr::x();
    case 1: return Expr::y();
    case 2: return Expr(Complex(small(rng), small(rng)));
    case 3: return random_polynomial(rng, depth - 1) + random_polynomial(rng, depth - 1);
    case 4: return random_polynomial(rng, depth - 1) - random_polynomial(rng, depth - 1);
    case 5: return random_polynomial(rng, depth - 1) * random_polynomial(rng, depth - 1);
    default: return pow(random_polynomial(rng, depth - 1), 1 + (small(rng) + 3) % 3);
  }
}

}  // namespace

TEST_CASE("parse builds the grammar-forced trees") {
  Expr e = parse("x + i*y");
  REQUIRE(e.op() == Op::Add);
  CHECK(e.arg(0).op() == Op::VarX);
  REQUIRE(e.arg(1).op() == Op::Mul);
  CHECK(e.arg(1).arg(0).constant() == Complex(0, 1));
  CHECK(e.arg(1).arg(1).op() == Op::VarY);

  Expr sq = parse("(x+i*y)^2");
  REQUIRE(sq.op() == Op::Pow);
  CHECK(sq.node().order == 2);
  CHECK(sq.arg(0).op() == Op::Add);

  // left associativity and precedence
  CHECK(same(parse("x-y-1"), (Expr::x() - Expr::y()) - Expr(1.0)));
  CHECK(same(parse("x/y*x"), (Expr::x() / Expr::y()) * Expr::x()));
  CHECK(same(parse("-x^2"), -pow(Expr::x(), 2)));
  CHECK(same(parse("x^(-2)"), pow(Expr::x(), -2)));
  CHECK(same(parse("x^-2"), pow(Expr::x(), -2)));
}

TEST_CASE("parse reports offsets and error kinds") {
  try {
    parse("x + * y");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::Syntax);
    CHECK(e.offset() == 4);
  }
  try {
    parse("x + foo(y)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::UnknownIdentifier);
    CHECK(e.offset() == 4);
  }
  try {
    parse("atan2(x)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::Arity);
  }
  CHECK_THROWS_AS(parse("x^1.5"), ParseError);
  CHECK_THROWS_AS(parse("bump(x, y, 1)"), ParseError);
  CHECK_THROWS_AS(parse("(x"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("differentiate matches the worked examples") {
  CHECK(to_string(differentiate(parse("(x+i*y)^2"), 0)) == "2*(x+i*y)");
  CHECK(differentiate(parse("x"), 1).is_zero());
  Expr d = differentiate(parse("1/(1+x^2+y^2)"), 0);
  CHECK(to_string(d) == "-2*x/(1+x^2+y^2)^2");
  Expr expected = parse("-2*x/(1+x^2+y^2)^2");
  for (Point p : {Point{0.3, -1.2}, Point{2.0, 0.5}})
    CHECK(std::abs(evaluate(d, p) - evaluate(expected, p)) < 1e-15);
}

TEST_CASE("evaluate") {
  CHECK(evaluate(parse("x + i*y"), {1, 2}) == Complex(1, 2));
  CHECK(evaluate(parse("(x+i*y)^2"), {0, 1}) == Complex(-1, 0));
  CHECK_THROWS_AS(evaluate(parse("1/x"), {0, 0}), DomainError);
  CHECK_THROWS_AS(evaluate(parse("sqrt(x)"), {-1, 0}), DomainError);
  CHECK_THROWS_AS(evaluate(parse("atan2(x, y)"), {0, 0}), DomainError);
  CHECK(std::abs(evaluate(parse("atan2(y, x)"), {-1, 0}).real() - M_PI) < 1e-15);
  try {
    evaluate(parse("1/x"), {0, 0.5});
  } catch (const DomainError& e) {
    CHECK(e.where().y == 0.5);
  }
}

TEST_CASE("bump is a monotone smooth step") {
  Expr b = parse("bump(x, 1, 2)");
  CHECK(evaluate(b, {0.5, 0}) == Complex(0, 0));
  CHECK(evaluate(b, {1.0, 0}) == Complex(0, 0));
  CHECK(evaluate(b, {2.0, 0}) == Complex(1, 0));
  CHECK(evaluate(b, {3.0, 0}) == Complex(1, 0));
  CHECK(std::abs(evaluate(b, {1.5, 0}).real() - 0.5) < 1e-15);
  double prev = 0;
  for (int k = 0; k <= 100; ++k) {
    double v = evaluate(b, {1.0 + k / 100.0, 0}).real();
    CHECK(v >= prev);
    prev = v;
  }
  // closed-form derivatives of every order against central differences
  Expr f = b;
  for (int order = 1; order <= 3; ++order) {
    Expr df = differentiate(f, 0);
    for (double t : {1.1, 1.37, 1.5, 1.8, 1.95}) {
      double h = 1e-5;
      Complex fd = (evaluate(f, {t + h, 0}) - evaluate(f, {t - h, 0})) / (2 * h);
      Complex exact = evaluate(df, {t, 0});
      CHECK(std::abs(fd - exact) < 1e-5 * (1 + std::abs(exact)));
    }
    CHECK(evaluate(df, {0.9, 0}) == Complex(0, 0));
    CHECK(evaluate(df, {2.1, 0}) == Complex(0, 0));
    f = df;
  }
}

TEST_CASE("finite-difference cross-check on random polynomials") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  for (int trial = 0; trial < 60; ++trial) {
    Expr e = random_polynomial(rng, 4);
    Point p{coord(rng), coord(rng)};
    for (int axis = 0; axis < 2; ++axis) {
      Complex exact = evaluate(differentiate(e, axis), p);
      double prev_err = 1e300;
      for (double h : {1e-2, 1e-3}) {
        Point q = p;
        (axis == 0 ? q.x : q.y) += h;
        Complex fd = (evaluate(e, q) - evaluate(e, p)) / h;
        double err = std::abs(fd - exact);
        // forward difference error is O(h)
        CHECK(err <= 50.0 * h * (1.0 + std::abs(exact)) + 1e-9);
        if (prev_err > 1e-8) CHECK(err <= prev_err);
        prev_err = err;
      }
    }
  }
}

TEST_CASE("Leibniz rule holds pointwise") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coord(0.2, 1.2);
  const char* sources[] = {"exp(i*x*y)", "sqrt(1+x^2+y^2)", "atan2(y, x+2)", "bump(x^2+y^2, 0.5, 2)",
                           "(x+i*y)^3/(1+x^2)", "glue(x, 1)"};
  for (const char* a : sources)
    for (const char* b : sources) {
      Expr f = parse(a), g = parse(b);
      for (int axis = 0; axis < 2; ++axis) {
        Expr lhs = differentiate(f * g, axis);
        Expr rhs = differentiate(f, axis) * g + f * differentiate(g, axis);
        Point p{coord(rng), coord(rng)};
        Complex l = evaluate(lhs, p), r = evaluate(rhs, p);
        CHECK(std::abs(l - r) < 1e-10 * (1 + std::abs(l)));
      }
    }
}

TEST_CASE("parse . print . parse is idempotent") {
  std::mt19937 rng(3);
  const char* sources[] = {"x + i*y",        "(x+i*y)^2",         "1/(1+x^2+y^2)", "-x^2 - -y",
                           "exp(-(x-1)^2)",  "bump(x^2+y^2,2,3.5)", "x*(2+3*i)",    "atan2(y,x)/(2*pi)",
                           "x^(-3)*y - 1e-7", "glue(1-x, 4)",       "x/(y/x)",       "-(1.5*x)"};
  for (const char* s : sources) {
    Expr e = parse(s);
    Expr again = parse(to_string(e));
    CHECK_MESSAGE(same(e, again), s, " -> ", to_string(e));
  }
  for (int trial = 0; trial < 100; ++trial) {
    Expr e = random_polynomial(rng, 5);
    Expr d = differentiate(e, trial % 2);
    CHECK(same(parse(to_string(e)), e));
    CHECK(same(parse(to_string(d)), d));
  }
}

TEST_CASE("substitute composes with evaluation") {
  Expr e = parse("x^2 + i*y");
  Expr s = substitute(e, parse("x/(x^2+y^2)"), parse("-y/(x^2+y^2)"));
  Point p{0.7, -0.4};
  double r2 = p.x * p.x + p.y * p.y;
  CHECK(std::abs(evaluate(s, p) - evaluate(e, {p.x / r2, -p.y / r2})) < 1e-15);
}

TEST_CASE("compiled programs share subexpressions") {
  Expr base = parse("exp(x*y) + sqrt(1+x^2)");
  Expr a = base * base;
  Expr b = parse("exp(x*y) + sqrt(1+x^2)");  // structurally equal, separately built
  std::vector<Expr> outs{a, b};
  Program prog(outs);
  auto v = prog({0.3, 0.2});
  CHECK(std::abs(v[0] - v[1] * v[1]) < 1e-14);
  Program single(std::vector<Expr>{a});
  CHECK(prog.tape_length() == single.tape_length());
}
