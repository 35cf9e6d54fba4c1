#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fibre/chern.hpp"

using namespace fibre;
using std::numbers::pi;

namespace {

// (1/2 pi i) times the contour integral of d log g_{south,north} over |z| = 1,
// an independent route to the degree of the clutching function.
double winding_number(const Cocycle& g, int samples) {
  const auto& eval = g.evaluator(1, 0, 0);
  double total = 0;
  Complex prev = eval({1.0, 0.0}).data[0];
  for (int s = 1; s <= samples; ++s) {
    double t = 2 * pi * s / samples;
    Complex cur = eval({std::cos(t), std::sin(t)}).data[0];
    total += std::arg(cur / prev);
    prev = cur;
  }
  return total / (2 * pi);
}

}  // namespace

TEST_CASE("normalisation constants") {
  CHECK(std::abs(chern_normalisation(0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(chern_normalisation(1) - Complex(0, -1 / (2 * pi))) < 1e-15);
  CHECK(std::abs(chern_normalisation(2) - Complex(-1 / (8 * pi * pi), 0)) < 1e-15);
}

TEST_CASE("first Chern numbers of clutching bundles") {
  auto sphere = build_atlas("sphere2", 200);
  auto part = build_partition(sphere, catalog_bumps(*sphere));
  for (int k = -2; k <= 3; ++k) {
    auto g = clutching_bundle(sphere, k);
    auto ch = chern_form(curvature(connection_from_partition(g, part)), 1);
    ChernNumber c1 = chern_number(*part, *ch);
    CHECK(std::lround(winding_number(*g, 720)) == k);
    CHECK_MESSAGE(std::abs(c1.value - Complex(k, 0)) < 1e-3, "k = ", k, " got ", c1.value.real());
    CHECK(c1.nearest == k);
  }
}

TEST_CASE("Chern forms are closed and chart independent") {
  auto sphere = build_atlas("sphere2", 40);
  auto part = build_partition(sphere, catalog_bumps(*sphere, 1));
  for (int k = -2; k <= 3; ++k) {
    auto ch = chern_form(curvature(connection_from_partition(clutching_bundle(sphere, k), part)), 1);
    CHECK(closedness_residual(*ch) < 1e-8);
    CHECK(overlap_mismatch(*ch) < 1e-9);
  }
  auto ch0 = chern_form(curvature(connection_from_partition(clutching_sum(sphere, {1, 2}), part)), 0);
  double worst = max_over_samples(*sphere, [&](int c, std::size_t k, const Region&, std::vector<Complex>& s) {
    return std::abs(ch0->sample_value(c, k, s).data[0] - Complex(2, 0));
  });
  CHECK(worst == 0.0);
}

TEST_CASE("independence of the partition") {
  auto sphere = build_atlas("sphere2", 300);
  auto a = build_partition(sphere, catalog_bumps(*sphere, 0));
  auto b = build_partition(sphere, catalog_bumps(*sphere, 1));
  for (int k : {-1, 2}) {
    auto rep = verify_chern_invariance(clutching_bundle(sphere, k), a, b, 1);
    REQUIRE(rep.has_integrals);
    CHECK(rep.integral_delta < 1e-6);
    CHECK(rep.closedness < 1e-8);
    CHECK(rep.overlap_mismatch < 1e-9);
  }
  auto circle = build_atlas("circle3", 64);
  auto ca = build_partition(circle, catalog_bumps(*circle, 0));
  auto cb = build_partition(circle, catalog_bumps(*circle, 1));
  auto rep = verify_chern_invariance(flat_circle_bundle(circle, 0.4), ca, cb, 0);
  CHECK_FALSE(rep.has_integrals);
  CHECK(rep.overlap_mismatch == 0.0);
}

TEST_CASE("projector route") {
  auto sphere = build_atlas("sphere2", 300);
  auto part = build_partition(sphere, catalog_bumps(*sphere));
  for (int k = -2; k <= 3; ++k) {
    auto g = clutching_bundle(sphere, k);
    auto q = build_projector(g, part);
    auto rep = verify_projector(*q, 1);
    CHECK(rep.idempotency < 1e-12);
    CHECK(rep.trace_residual < 1e-12);
    Complex proj = chern_number(*part, *chern_from_projector(q, 1)).value;
    Complex conn = chern_number(*part, *chern_form(curvature(connection_from_partition(g, part)), 1)).value;
    CHECK_MESSAGE(std::abs(proj - conn) < 1e-6, "k = ", k);
  }
  auto torus = build_atlas("torus4", 24);
  auto tq = build_projector(torus_degree_bundle(torus, 1), build_partition(torus, catalog_bumps(*torus)));
  CHECK(verify_projector(*tq, 1).idempotency < 1e-12);
}

TEST_CASE("Whitney sum and torus bundles") {
  auto sphere = build_atlas("sphere2", 120);
  auto part = build_partition(sphere, catalog_bumps(*sphere));
  auto c1 = [&](std::shared_ptr<const Cocycle> g) {
    return chern_number(*part, *chern_form(curvature(connection_from_partition(g, part)), 1)).value;
  };
  Complex sum = c1(clutching_sum(sphere, {1, -2, 3}));
  CHECK(std::abs(sum - (c1(clutching_bundle(sphere, 1)) + c1(clutching_bundle(sphere, -2)) +
                        c1(clutching_bundle(sphere, 3)))) < 1e-9);
  CHECK(std::abs(sum - Complex(2, 0)) < 1e-3);
  CHECK(std::abs(c1(trivial_bundle(sphere, 2))) == 0.0);

  // exp(i k m y) transitions: the curvature integral has magnitude |k|
  auto torus = build_atlas("torus4", 128);
  auto tpart = build_partition(torus, catalog_bumps(*torus));
  for (int k : {-2, 1, 3}) {
    auto g = torus_degree_bundle(torus, k);
    ChernNumber n = chern_number(*tpart, *chern_form(curvature(connection_from_partition(g, tpart)), 1));
    CHECK(n.integrality_gap < 1e-6);
    CHECK(std::abs(n.nearest) == std::abs(k));
    CHECK(n.nearest == -k);
  }
  auto flat = flat_torus_bundle(torus, 0.3, 1.1);
  CHECK(std::abs(chern_number(*tpart, *chern_form(curvature(connection_from_partition(flat, tpart)), 1)).value) <
        1e-12);
}

TEST_CASE("degree errors") {
  auto sphere = build_atlas("sphere2", 20);
  auto part = build_partition(sphere, catalog_bumps(*sphere));
  auto R = curvature(connection_from_partition(clutching_bundle(sphere, 1), part));
  CHECK_THROWS_AS(chern_form(R, 2), DegreeMismatch);
  CHECK_THROWS_AS(chern_number(*part, *chern_form(R, 0)), DegreeMismatch);
  auto circle = build_atlas("circle3", 20);
  auto cpart = build_partition(circle, catalog_bumps(*circle));
  CHECK_THROWS_AS(chern_form(curvature(connection_from_partition(flat_circle_bundle(circle, 1), cpart)), 1),
                  DegreeMismatch);
}
