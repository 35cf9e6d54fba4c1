#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fibre/geometry.hpp"

using namespace fibre;
using std::numbers::pi;

namespace {

Form area_form_sphere(int, const Region&) {
  Form f(2, 2);
  f[0] = parse("4/(1+x^2+y^2)^2");
  return f;
}

}  // namespace

TEST_CASE("catalog atlases") {
  auto s = build_atlas("sphere2", 100);
  CHECK(s->chart_count() == 2);
  CHECK(s->dim() == 2);
  for (int c = 0; c < 2; ++c) {
    CHECK(s->chart(c).domain.shape == Domain::Shape::Disk);
    CHECK(s->chart(c).domain.radius == 2.0);
    CHECK(s->chart(c).samples.size() == 100u * 100u);
  }

  auto c3 = build_atlas("circle3", 50);
  CHECK(c3->chart_count() == 3);
  CHECK(c3->dim() == 1);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      CHECK(c3->transitions(i, j).size() == 2);  // each pairwise overlap has two arcs
      CHECK(!c3->overlap_samples(i, j).empty());
    }
  // some samples lie in all three arcs
  std::size_t triple = 0;
  for (std::size_t k = 0; k < c3->chart(0).samples.size(); ++k) {
    const Region& r = c3->sample_regions(0)[static_cast<std::size_t>(c3->sample_region_index(0, k))];
    if (c3->component(r, 0, 1) >= 0 && c3->component(r, 0, 2) >= 0) ++triple;
  }
  CHECK(triple > 0);

  auto t4 = build_atlas("torus4", 16);
  CHECK(t4->chart_count() == 4);

  CHECK_THROWS_AS(build_atlas("klein", 10), UnknownManifold);
  CHECK_THROWS_AS(build_atlas("sphere2", 7), std::invalid_argument);
}

TEST_CASE("overlap maps are coherent") {
  auto s = build_atlas("sphere2", 40);
  double worst = 0;
  for (std::size_t k : s->overlap_samples(0, 1)) {
    Point p = s->chart(0).samples[k].at;
    const Transition* t01 = s->transition_at(0, 1, p);
    REQUIRE(t01);
    Point q = t01->apply(p);
    const Transition* t10 = s->transition_at(1, 0, q);
    REQUIRE(t10);
    Point back = t10->apply(q);
    worst = std::max(worst, std::hypot(back.x - p.x, back.y - p.y));
  }
  CHECK(worst < 1e-13);

  // triple-overlap composition on the circle
  auto c3 = build_atlas("circle3", 64);
  for (std::size_t k = 0; k < c3->chart(0).samples.size(); ++k) {
    Point p = c3->chart(0).samples[k].at;
    const Transition* t01 = c3->transition_at(0, 1, p);
    const Transition* t02 = c3->transition_at(0, 2, p);
    if (!t01 || !t02) continue;
    Point q1 = t01->apply(p);
    const Transition* t12 = c3->transition_at(1, 2, q1);
    REQUIRE(t12);
    CHECK(std::abs(t12->apply(q1).x - t02->apply(p).x) < 1e-13);
  }
}

TEST_CASE("catalog partitions of unity") {
  for (const char* id : {"sphere2", "circle3", "torus4"})
    for (int variant = 0; variant < 2; ++variant) {
      auto atlas = build_atlas(id, 32);
      auto part = build_partition(atlas, catalog_bumps(*atlas, variant));
      CHECK_MESSAGE(part->report().max_sum_residual < 1e-12, id);
      CHECK_MESSAGE(part->report().max_square_residual < 1e-12, id);
      CHECK(part->report().min_alpha >= 0.0);
      CHECK(part->report().support_residual == 0.0);
    }
}

TEST_CASE("partition normalisation matches the algebraic formula") {
  auto atlas = build_atlas("sphere2", 24);
  // rho_2 = |z|^2 in north coordinates, written in south coordinates
  auto part = build_partition(atlas, {parse("1"), parse("1/(x^2+y^2)")});
  CHECK(part->report().max_sum_residual < 1e-12);
  CHECK(part->report().max_square_residual < 1e-12);
  CHECK(part->report().support_residual > 0.0);  // not compactly supported
  Expr expected = parse("(x^2+y^2)/(1+x^2+y^2)");
  for (std::size_t k : atlas->overlap_samples(0, 1)) {
    Point p = atlas->chart(0).samples[k].at;
    const auto& loc = part->local(0, atlas->region(0, p));
    CHECK(std::abs(evaluate(loc.alpha[1], p) - evaluate(expected, p)) < 1e-14);
  }
}

TEST_CASE("partition errors") {
  auto atlas = build_atlas("sphere2", 24);
  CHECK_THROWS_AS(build_partition(atlas, {parse("1-bump(x^2+y^2,0.5,0.8)"), parse("1-bump(x^2+y^2,0.5,0.8)")}),
                  PartitionError);
  CHECK_THROWS_AS(build_partition(atlas, {parse("x-5"), parse("1")}), PartitionError);
  CHECK_THROWS_AS(build_partition(atlas, {parse("1")}), PartitionError);
}

TEST_CASE("quadrature of top-degree forms") {
  auto atlas = build_atlas("sphere2", 200);
  auto part = build_partition(atlas, catalog_bumps(*atlas));
  Complex area = integrate(*part, area_form_sphere);
  CHECK(std::abs(area - Complex(4 * pi, 0)) < 1e-4);

  Complex zero = integrate(*part, [](int, const Region&) { return Form(2, 2); });
  CHECK(zero == Complex(0, 0));

  CHECK_THROWS_AS(integrate(*part, [](int, const Region&) { return Form::coordinate(2, 0); }), DegreeMismatch);

  // Stokes: d(F dG) = dF ^ dG integrates to zero for global functions F, G.
  Expr fn = parse("x/(1+x^2+y^2)"), gn = parse("y^2/(1+x^2+y^2)^2");
  Expr fs = parse("x/(1+x^2+y^2)"), gs = parse("y^2/(1+x^2+y^2)^2");
  auto exact = [&](int chart, const Region&) {
    const Expr& f = chart == 0 ? fn : fs;
    const Expr& g = chart == 0 ? gn : gs;
    return wedge(exterior_derivative(Form::function(2, f)), exterior_derivative(Form::function(2, g)));
  };
  CHECK(std::abs(integrate(*part, exact)) < 1e-6);
}

TEST_CASE("quadrature converges under refinement") {
  double prev = 1e300;
  for (int n : {10, 20, 40}) {
    auto atlas = build_atlas("sphere2", n);
    auto part = build_partition(atlas, catalog_bumps(*atlas));
    double err = std::abs(integrate(*part, area_form_sphere) - Complex(4 * pi, 0));
    CHECK(err < prev);
    prev = err;
  }
  auto torus = build_atlas("torus4", 64);
  auto tpart = build_partition(torus, catalog_bumps(*torus));
  Complex t = integrate(*tpart, [](int, const Region&) {
    Form f(2, 2);
    f[0] = Expr(1.0);
    return f;
  });
  CHECK(std::abs(t - Complex(4 * pi * pi, 0)) < 1e-8);
  auto circle = build_atlas("circle3", 400);
  auto cpart = build_partition(circle, catalog_bumps(*circle));
  Complex len = integrate(*cpart, [](int, const Region&) { return Form::coordinate(1, 0); });
  CHECK(std::abs(len - Complex(2 * pi, 0)) < 1e-8);
}
