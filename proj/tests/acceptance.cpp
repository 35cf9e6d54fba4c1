// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fibre/chern.hpp"
#include "fibre/jobs.hpp"
#include "fibre/nc.hpp"
#include "fibre/parallel.hpp"

using namespace fibre;

namespace {

constexpr int kSign = 1;  // orientation sign of the clutching integral

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Named {
  std::string name;
  std::shared_ptr<const Cocycle> g;
};

std::vector<Named> catalog(int sphere_res, int circle_res, int torus_res) {
  auto sphere = build_atlas("sphere2", sphere_res);
  auto circle = build_atlas("circle3", circle_res);
  auto torus = build_atlas("torus4", torus_res);
  std::vector<Named> out;
  out.push_back({"sphere2 trivial rank 2", trivial_bundle(sphere, 2)});
  for (int k = -2; k <= 3; ++k) out.push_back({"sphere2 clutching " + std::to_string(k), clutching_bundle(sphere, k)});
  out.push_back({"sphere2 clutching sum (2, -1)", clutching_sum(sphere, {2, -1})});
  out.push_back({"circle3 trivial", trivial_bundle(circle, 1)});
  out.push_back({"circle3 flat 0.7", flat_circle_bundle(circle, 0.7)});
  out.push_back({"circle3 flat 2.5", flat_circle_bundle(circle, 2.5)});
  out.push_back({"torus4 flat (0.4, 1.1)", flat_torus_bundle(torus, 0.4, 1.1)});
  out.push_back({"torus4 degree 1", torus_degree_bundle(torus, 1)});
  out.push_back({"torus4 degree -2", torus_degree_bundle(torus, -2)});
  return out;
}

Outcome cocycle_law() {
  Outcome o;
  double worst = 0, slowest = 0;
  std::vector<std::function<std::shared_ptr<const Cocycle>()>> cases;
  for (double theta : {0.0, 0.7, 2.5, -1.3})
    cases.push_back([theta] { return flat_circle_bundle(build_atlas("circle3", 200), theta); });
  for (int k = -2; k <= 3; ++k) cases.push_back([k] { return clutching_bundle(build_atlas("sphere2", 200), k); });
  for (auto& make : cases) {
    Timer t;
    CocycleReport r = verify_cocycle(*make());
    double s = t.seconds();
    worst = std::max({worst, r.max_cocycle_residual, r.max_inverse_residual});
    slowest = std::max(slowest, s);
    o.pass = o.pass && r.max_cocycle_residual < 1e-10 && r.max_inverse_residual < 1e-10 && s < 1.0;
  }
  o.detail = fmt("max residual %.2e", worst) + fmt(", slowest %.2f s", slowest);
  return o;
}

Outcome gluing_tensoriality() {
  Outcome o;
  double worst = 0, slowest = 0;
  int combos = 0;
  for (const auto& b : catalog(200, 200, 64))
    for (int variant = 0; variant < 2; ++variant) {
      Timer t;
      auto part = build_partition(b.g->atlas_ptr(), catalog_bumps(b.g->atlas(), variant));
      Connection conn = connection_from_partition(b.g, part);
      auto R = curvature(conn);
      double gl = verify_gluing(conn), tn = verify_tensoriality(conn, *R);
      double s = t.seconds();
      worst = std::max({worst, gl, tn});
      slowest = std::max(slowest, s);
      ++combos;
      if (!(gl < 1e-9 && tn < 1e-9 && s < 5.0)) {
        o.pass = false;
        o.detail += b.name + " partition " + std::to_string(variant) + " failed; ";
      }
    }
  o.detail += std::to_string(combos) + " combinations, max residual " + fmt("%.2e", worst) + fmt(", slowest %.2f s", slowest);
  return o;
}

Outcome closedness() {
  Outcome o;
  double dmax = 0, omax = 0;
  auto sphere = build_atlas("sphere2", 200);
  auto part = build_partition(sphere, catalog_bumps(*sphere, 0));
  for (int k = -2; k <= 3; ++k) {
    auto ch = chern_form(curvature(connection_from_partition(clutching_bundle(sphere, k), part)), 1);
    dmax = std::max(dmax, closedness_residual(*ch));
    omax = std::max(omax, overlap_mismatch(*ch));
  }
  o.pass = dmax < 1e-8 && omax < 1e-9;
  o.detail = fmt("max |d Ch_1| %.2e", dmax) + fmt(", max overlap mismatch %.2e", omax);
  return o;
}

Outcome integrality() {
  Outcome o;
  double gap = 0, slowest = 0;
  for (int k = -2; k <= 3; ++k) {
    Timer t;
    auto sphere = build_atlas("sphere2", 200);
    auto part = build_partition(sphere, catalog_bumps(*sphere, 0));
    auto ch = chern_form(curvature(connection_from_partition(clutching_bundle(sphere, k), part)), 1);
    ChernNumber n = chern_number(*part, *ch);
    double s = t.seconds();
    double err = std::abs(n.value - Complex(kSign * k, 0));
    gap = std::max(gap, err);
    slowest = std::max(slowest, s);
    o.pass = o.pass && err < 1e-3 && s < 10.0;
  }
  o.detail = fmt("max |integral - s k| %.2e", gap) + fmt(", slowest %.2f s", slowest);
  return o;
}

Outcome projector_identities() {
  Outcome o;
  double idem = 0, trace = 0;
  for (const auto& b : catalog(200, 200, 64)) {
    auto part = build_partition(b.g->atlas_ptr(), catalog_bumps(b.g->atlas(), 0));
    ProjectorReport r = verify_projector(*build_projector(b.g, part), b.g->rank());
    idem = std::max(idem, r.idempotency);
    trace = std::max(trace, r.trace_residual);
  }
  o.pass = idem < 1e-12 && trace < 1e-12;
  o.detail = fmt("max |Q^2 - Q| %.2e", idem) + fmt(", max |Tr Q - n| %.2e", trace);
  return o;
}

// Connection-route and projector-route integrals for both partitions.
struct RouteData {
  double route = 0;
  double partitions = 0;
};

const RouteData& route_data() {
  static RouteData d = [] {
    RouteData r;
    auto sphere = build_atlas("sphere2", 300);
    for (int k = -2; k <= 3; ++k) {
      auto g = clutching_bundle(sphere, k);
      Complex conn[2];
      for (int v = 0; v < 2; ++v) {
        auto part = build_partition(sphere, catalog_bumps(*sphere, v));
        conn[v] = chern_number(*part, *chern_form(curvature(connection_from_partition(g, part)), 1)).value;
        Complex proj = chern_number(*part, *chern_from_projector(build_projector(g, part), 1)).value;
        r.route = std::max(r.route, std::abs(conn[v] - proj));
      }
      r.partitions = std::max(r.partitions, std::abs(conn[0] - conn[1]));
    }
    return r;
  }();
  return d;
}

Outcome route_agreement() {
  const RouteData& d = route_data();
  return {d.route < 1e-6, fmt("max |conn - proj| %.2e at resolution 300", d.route)};
}

Outcome connection_independence() {
  const RouteData& d = route_data();
  return {d.partitions < 1e-6, fmt("max |partition 0 - partition 1| %.2e at resolution 300", d.partitions)};
}

Outcome exact_identities() {
  Outcome o;
  Timer t;
  std::size_t pairs = 0;
  for (const auto& name : catalog_algebra_names()) {
    NcEngine e(load_catalog_algebra(name).algebra);
    IdentityReport r = verify_identities(e, 5);
    pairs += r.leibniz_pairs;
    if (!r.pass()) {
      o.pass = false;
      o.detail += name + ": " + r.first_failure + "; ";
    }
  }
  double s = t.seconds();
  o.pass = o.pass && s < 60.0;
  o.detail += std::to_string(pairs) + " Leibniz pairs, degree 5, " + fmt("%.2f s total", s);
  return o;
}

Outcome homology_comparison() {
  Outcome o;
  std::string dims;
  for (const auto& name : catalog_algebra_names()) {
    NcEngine e(load_catalog_algebra(name).algebra);
    dims += (dims.empty() ? "" : "; ") + name + " ";
    for (const auto& row : verify_hbar_kernel(e, 4)) {
      dims += (row.n ? "," : "") + std::to_string(row.hbar);
      if (!row.pass) {
        o.pass = false;
        dims += "(kernel " + std::to_string(row.kernel) + ")";
      }
    }
  }
  o.detail = "dim Hbar_0..4: " + dims;
  return o;
}

Outcome chern_classes() {
  Outcome o;
  int closed = 0, conj = 0;
  for (const auto& name : catalog_algebra_names()) {
    CatalogAlgebra cat = load_catalog_algebra(name);
    NcEngine e(cat.algebra);
    for (const auto& q : cat.idempotents)
      for (int p = 0; p <= 1; ++p) {
        AlgebraicChern ch = chern_idempotent(e, q, p);
        o.pass = o.pass && ch.closed && odd_trace_vanishes(e, q, p);
        ++closed;
        for (const auto& u : cat.invertibles) {
          if (u.size != q.size) continue;
          ConjugationReport r = verify_chern_invariance_alg(e, q, u, p);
          o.pass = o.pass && r.conjugate_idempotent && r.in_image;
          ++conj;
        }
      }
  }
  o.detail = std::to_string(closed) + " classes closed, " + std::to_string(conj) + " conjugations in Im dbar";
  return o;
}

Outcome determinism() {
  const auto bundle = parse_config(R"({"schema": "v1", "manifold": "sphere2", "resolution": 100,
    "bundle": {"catalog": "clutching", "degree": 2}, "partitions": [{"catalog": 0}, {"catalog": 1}]})");
  const auto algebra = parse_config(R"({"schema": "v1", "algebra": "upper-triangular-2", "n_max": 3})");
  parallel::set_threads(1);
  bool same = true;
  std::size_t bytes = 0;
  for (int round = 0; round < 2; ++round) {
    std::string text[2];
    for (int rep = 0; rep < 2; ++rep) {
      JobResult r = round == 0 ? run_bundle_report(bundle) : run_algebra_report(algebra);
      text[rep] = r.report.dump(2) + r.csv;
    }
    same = same && text[0] == text[1];
    bytes += text[0].size();
  }
  parallel::set_threads(0);
  return {same, std::to_string(bytes) + " report bytes compared with --threads 1"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* title;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"cocycle law", cocycle_law},
      {"connection gluing and curvature tensoriality", gluing_tensoriality},
      {"Chern form closedness and chart independence", closedness},
      {"integrality of the first Chern number", integrality},
      {"projector idempotency and trace", projector_identities},
      {"route agreement", route_agreement},
      {"connection independence", connection_independence},
      {"exact identities of the universal forms", exact_identities},
      {"Hbar_n equals the kernel of B_*", homology_comparison},
      {"algebraic Chern classes", chern_classes},
      {"determinism", determinism},
  };
  int failed = 0, id = 0;
  for (const auto& c : criteria) {
    ++id;
    Timer t;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %2d  %-46s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, c.title, o.detail.c_str(), t.seconds());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria pass\n", id - failed, id);
  return failed ? 1 : 0;
}
