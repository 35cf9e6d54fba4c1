#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fibre/cocycle.hpp"

using namespace fibre;
using std::numbers::pi;

TEST_CASE("clutching cocycles on the sphere") {
  auto sphere = build_atlas("sphere2", 60);
  for (int k = -2; k <= 3; ++k) {
    auto g = clutching_bundle(sphere, k);
    auto rep = verify_cocycle(*g);
    CHECK(rep.max_inverse_residual < 1e-10);
    CHECK(rep.max_cocycle_residual < 1e-10);
    CHECK(rep.overlap_points > 0);
    CHECK(rep.triple_points == 0);  // two charts
    CHECK(rep.min_abs_det > 0.1);
  }
  auto sum = clutching_sum(sphere, {1, -2});
  CHECK(sum->rank() == 2);
  CHECK(verify_cocycle(*sum).max_inverse_residual < 1e-10);
}

TEST_CASE("flat and degree bundles satisfy the triple-overlap identity") {
  auto circle = build_atlas("circle3", 200);
  for (double theta : {0.0, 0.7, pi / 3, 2.5}) {
    auto rep = verify_cocycle(*flat_circle_bundle(circle, theta));
    CHECK(rep.max_cocycle_residual < 1e-10);
    CHECK(rep.max_inverse_residual < 1e-10);
    CHECK(rep.triple_points > 0);
  }
  auto torus = build_atlas("torus4", 24);
  for (int k : {-1, 1, 2}) {
    auto rep = verify_cocycle(*torus_degree_bundle(torus, k));
    CHECK(rep.max_cocycle_residual < 1e-10);
    CHECK(rep.max_inverse_residual < 1e-10);
    CHECK(rep.triple_points > 0);
  }
  CHECK(verify_cocycle(*flat_torus_bundle(torus, 0.4, -1.1)).max_cocycle_residual < 1e-10);
  CHECK(verify_cocycle(*trivial_bundle(torus, 3)).max_cocycle_residual == 0.0);
}

TEST_CASE("a corrupted overlap component is detected") {
  auto circle = build_atlas("circle3", 200);
  auto good = flat_circle_bundle(circle, 0.0);
  Cocycle bad(circle, 1);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (std::size_t c = 0; c < circle->transitions(i, j).size(); ++c) {
        auto entries = good->matrix(j, i, static_cast<int>(c)).flatten();
        if (j == 2 && i == 0 && c == 0) entries[0] = entries[0] * Expr(2.0);
        bad.set(j, i, static_cast<int>(c), entries);
      }
  auto rep = verify_cocycle(bad);
  CHECK(std::abs(rep.max_inverse_residual - 1.0) < 1e-12);
  CHECK(rep.max_cocycle_residual > 0.5);
}

TEST_CASE("inverse completion agrees with the closed form") {
  auto sphere = build_atlas("sphere2", 40);
  for (int k : {-2, 1, 3}) {
    Cocycle g(sphere, 1);
    g.set(1, 0, 0, {pow(parse("x+i*y"), k)});
    g.complete_inverses();
    REQUIRE(g.has(0, 1, 0));
    REQUIRE(g.has(0, 0, 0));
    Expr closed = pow(parse("x+i*y"), k);
    for (std::size_t s : sphere->overlap_samples(1, 0)) {
      Point w = sphere->chart(1).samples[s].at;
      Complex got = g.evaluator(0, 1, 0)(w).data[0];
      CHECK(std::abs(got - evaluate(closed, w)) < 1e-12 * (1 + std::abs(got)));
    }
  }
  auto inv = symbolic_inverse({parse("1+x"), parse("y"), parse("2"), parse("x*y+3")}, 2);
  Point p{0.3, -0.8};
  Complex a = 1.3, b = -0.8, c = 2, d = 0.3 * -0.8 + 3, det = a * d - b * c;
  CHECK(std::abs(evaluate(inv[0], p) - d / det) < 1e-14);
  CHECK(std::abs(evaluate(inv[1], p) + b / det) < 1e-14);
  auto inv3 = symbolic_inverse({parse("2"), parse("x"), parse("0"), parse("0"), parse("1"), parse("y"),
                                parse("1"), parse("0"), parse("3")},
                               3);
  // m * m^{-1} = 1 at a point
  std::vector<Complex> m{2, 0.3, 0, 0, 1, -0.8, 1, 0, 3};
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) {
      Complex acc = 0;
      for (int t = 0; t < 3; ++t) acc += m[r * 3 + t] * evaluate(inv3[static_cast<std::size_t>(t * 3 + col)], p);
      CHECK(std::abs(acc - Complex(r == col ? 1 : 0, 0)) < 1e-14);
    }
}

TEST_CASE("cohomologous cocycles") {
  auto sphere = build_atlas("sphere2", 40);
  auto g = clutching_bundle(sphere, 2);
  Cocycle h(sphere, 1);
  // lambda_north = 2, lambda_south = 1
  h.set(1, 0, 0, {parse("2*(x+i*y)^2")});
  h.set(0, 1, 0, {parse("(x+i*y)^2/2")});
  h.complete_inverses();
  CoboundaryWitness lambda{{parse("2")}, {parse("1")}};
  CHECK(verify_cohomologous(*g, h, lambda) < 1e-12);
  CHECK(verify_cohomologous(*g, h, {{parse("1")}, {parse("1")}}) > 0.5);
  CHECK_THROWS_AS(verify_cohomologous(*g, h, {{parse("0")}, {parse("1")}}), DomainError);
  CHECK_THROWS_AS(verify_cohomologous(*g, *clutching_sum(sphere, {1, 1}), lambda), RankMismatch);
  CHECK_THROWS_AS(Cocycle(sphere, 2).set(1, 0, 0, {parse("1")}), RankMismatch);
}

TEST_CASE("refinement keeps the cocycle identity") {
  auto sphere = build_atlas("sphere2", 40);
  std::vector<int> parent{0, 0, 1};
  std::vector<Domain> patches{Domain::box(-1.5, 0.1, -1.2, 1.2), Domain::box(-0.1, 1.5, -1.2, 1.2),
                              Domain::box(-1.2, 1.2, -1.2, 1.2)};
  auto fine = refine_atlas(*sphere, parent, patches, 40);
  CHECK(fine->chart_count() == 3);
  for (int k = -2; k <= 3; ++k) {
    auto g = refine_cocycle(*clutching_bundle(sphere, k), fine, parent);
    auto rep = verify_cocycle(*g);
    CHECK(rep.max_cocycle_residual < 1e-10);
    CHECK(rep.max_inverse_residual < 1e-10);
    CHECK(rep.triple_points > 0);
  }
  CHECK_THROWS_AS(refine_atlas(*sphere, {0}, {Domain::box(-1.9, 1.9, -1.9, 1.9)}, 10), ContainmentError);
  CHECK_THROWS_AS(refine_atlas(*sphere, {5}, {Domain::box(0, 1, 0, 1)}, 10), ContainmentError);
}
