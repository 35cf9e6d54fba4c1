#include "fibre/jobs.hpp"

#include <chrono>
#include <optional>
#include <set>
#include <sstream>

#include "fibre/chern.hpp"
#include "fibre/nc.hpp"

namespace fibre {

using nlohmann::json;

namespace {

// Collects problems in validate mode; throws the first one otherwise.
class Issues {
 public:
  explicit Issues(std::vector<std::string>* sink) : sink_(sink) {}
  void fail(const std::string& path, const std::string& message) {
    if (!sink_) throw ConfigError(path, message);
    sink_->push_back(path.empty() ? message : path + ": " + message);
  }

 private:
  std::vector<std::string>* sink_;
};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed, Issues& is) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) is.fail(join(path, k), "unknown field");
}

std::optional<int> get_int(const json& obj, const std::string& key, const std::string& path, Issues& is,
                           std::optional<int> fallback, int lo, int hi) {
  if (!obj.contains(key)) {
    if (!fallback) is.fail(join(path, key), "required integer is missing");
    return fallback;
  }
  const json& v = obj[key];
  if (!v.is_number_integer()) {
    is.fail(join(path, key), "expected an integer");
    return std::nullopt;
  }
  long x = v.get<long>();
  if (x < lo || x > hi) {
    is.fail(join(path, key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return std::nullopt;
  }
  return static_cast<int>(x);
}

std::optional<double> get_number(const json& v, const std::string& path, Issues& is) {
  if (!v.is_number()) {
    is.fail(path, "expected a number");
    return std::nullopt;
  }
  return v.get<double>();
}

std::optional<Expr> get_expr(const json& v, const std::string& path, Issues& is) {
  if (!v.is_string()) {
    is.fail(path, "expected an expression string");
    return std::nullopt;
  }
  try {
    return parse(v.get<std::string>());
  } catch (const ParseError& e) {
    is.fail(path, e.what());
    return std::nullopt;
  }
}

void check_header(const json& config, const std::string& job, Issues& is) {
  if (!config.contains("schema")) is.fail("schema", "missing schema version (expected \"v1\")");
  else if (config["schema"] != "v1") is.fail("schema", "unsupported schema version " + config["schema"].dump() + " (expected \"v1\")");
  if (config.contains("job") && config["job"] != job)
    is.fail("job", "expected \"" + job + "\" for this command, found " + config["job"].dump());
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double lap() {
    auto t = std::chrono::steady_clock::now();
    double s = std::chrono::duration<double>(t - t0).count();
    t0 = t;
    return s;
  }
};

std::string num(double x) { return json(x).dump(); }

// ---------------------------------------------------------------------------
// bundle jobs

struct TransitionSpec {
  int from = 0, to = 0, component = 0;
  std::vector<Expr> entries;
};

struct PartitionSpec {
  int variant = -1;  // catalog family, or -1 for explicit bumps
  std::vector<Expr> bumps;
};

struct BundleThresholds {
  Thresholds base;
  double gluing = 1e-9;
  double closedness = 1e-8;
  double overlap = 1e-9;
  double projector = 1e-12;
};

struct BundleConfig {
  std::string manifold;
  int resolution = 200;
  int dim = 0;
  int charts = 0;
  std::string kind;
  int rank = 1;
  int degree = 0;
  std::vector<int> degrees;
  std::vector<double> theta;
  std::vector<TransitionSpec> transitions;
  std::vector<PartitionSpec> partitions;
  std::vector<int> p;
  BundleThresholds th;
};

void parse_thresholds(const json& config, BundleThresholds* bt, Thresholds* t, Issues& is) {
  if (!config.contains("thresholds")) return;
  const json& th = config["thresholds"];
  if (!th.is_object()) {
    is.fail("thresholds", "expected an object");
    return;
  }
  std::map<std::string, double*> slots;
  if (t) slots = {{"residual", &t->residual}, {"route_delta", &t->route_delta}, {"integrality", &t->integrality}};
  if (bt)
    slots = {{"residual", &bt->base.residual},  {"route_delta", &bt->base.route_delta},
             {"integrality", &bt->base.integrality}, {"gluing", &bt->gluing},
             {"closedness", &bt->closedness},    {"overlap", &bt->overlap},
             {"projector", &bt->projector}};
  for (const auto& [k, v] : th.items()) {
    auto slot = slots.find(k);
    if (slot == slots.end()) {
      is.fail(join("thresholds", k), "unknown threshold");
      continue;
    }
    auto x = get_number(v, join("thresholds", k), is);
    if (x && !(*x > 0)) is.fail(join("thresholds", k), "must be positive");
    else if (x) *slot->second = *x;
  }
}

int chart_index(const Atlas& atlas, const json& v, const std::string& path, Issues& is) {
  if (v.is_number_integer()) {
    int c = v.get<int>();
    if (c >= 0 && c < atlas.chart_count()) return c;
  } else if (v.is_string()) {
    for (int c = 0; c < atlas.chart_count(); ++c)
      if (atlas.chart(c).name == v.get<std::string>()) return c;
  }
  std::string names;
  for (int c = 0; c < atlas.chart_count(); ++c) names += (c ? ", " : "") + atlas.chart(c).name;
  is.fail(path, "no chart " + v.dump() + " on " + atlas.id() + " (charts: " + names + ")");
  return -1;
}

BundleConfig parse_bundle(const json& config, Issues& is) {
  BundleConfig c;
  if (!config.is_object()) {
    is.fail("", "config must be a JSON object");
    return c;
  }
  check_header(config, "bundle", is);
  check_keys(config, "", {"schema", "job", "description", "manifold", "resolution", "bundle", "partitions", "p", "thresholds"}, is);
  parse_thresholds(config, &c.th, nullptr, is);
  if (auto r = get_int(config, "resolution", "", is, 200, 8, 4000)) c.resolution = *r;

  std::shared_ptr<const Atlas> atlas;
  if (!config.contains("manifold") || !config["manifold"].is_string()) {
    is.fail("manifold", "required manifold id is missing");
  } else {
    c.manifold = config["manifold"].get<std::string>();
    try {
      atlas = build_atlas(c.manifold, 8);
      c.dim = atlas->dim();
      c.charts = atlas->chart_count();
    } catch (const UnknownManifold&) {
      is.fail("manifold", "unknown manifold '" + c.manifold + "' (expected sphere2, circle3 or torus4)");
    }
  }

  // bundle
  if (!config.contains("bundle") || !config["bundle"].is_object()) {
    is.fail("bundle", "required object is missing");
  } else {
    const json& b = config["bundle"];
    const std::string bp = "bundle";
    auto need_manifold = [&](const char* id) {
      if (atlas && c.manifold != id) is.fail(join(bp, "catalog"), "'" + c.kind + "' bundles live on " + id);
    };
    if (b.contains("catalog")) {
      check_keys(b, bp, {"catalog", "rank", "degree", "degrees", "theta"}, is);
      c.kind = b["catalog"].is_string() ? b["catalog"].get<std::string>() : "";
      if (c.kind == "trivial") {
        if (auto r = get_int(b, "rank", bp, is, 1, 1, 4)) c.rank = *r;
      } else if (c.kind == "clutching" || c.kind == "torus-degree") {
        need_manifold(c.kind == "clutching" ? "sphere2" : "torus4");
        if (auto d = get_int(b, "degree", bp, is, std::nullopt, -50, 50)) c.degree = *d;
      } else if (c.kind == "clutching-sum") {
        need_manifold("sphere2");
        if (!b.contains("degrees") || !b["degrees"].is_array() || b["degrees"].empty() || b["degrees"].size() > 4) {
          is.fail(join(bp, "degrees"), "expected an array of 1 to 4 integers");
        } else {
          for (std::size_t i = 0; i < b["degrees"].size(); ++i) {
            if (!b["degrees"][i].is_number_integer()) is.fail(at(join(bp, "degrees"), i), "expected an integer");
            else c.degrees.push_back(b["degrees"][i].get<int>());
          }
          c.rank = static_cast<int>(c.degrees.size());
        }
      } else if (c.kind == "flat-circle") {
        need_manifold("circle3");
        if (!b.contains("theta")) is.fail(join(bp, "theta"), "required number is missing");
        else if (auto t = get_number(b["theta"], join(bp, "theta"), is)) c.theta = {*t};
      } else if (c.kind == "flat-torus") {
        need_manifold("torus4");
        if (!b.contains("theta") || !b["theta"].is_array() || b["theta"].size() != 2) {
          is.fail(join(bp, "theta"), "expected two holonomy angles");
        } else {
          for (std::size_t i = 0; i < 2; ++i)
            if (auto t = get_number(b["theta"][i], at(join(bp, "theta"), i), is)) c.theta.push_back(*t);
        }
      } else {
        is.fail(join(bp, "catalog"), "unknown bundle " + b["catalog"].dump() +
                                         " (expected trivial, clutching, clutching-sum, flat-circle, flat-torus or torus-degree)");
      }
    } else {
      check_keys(b, bp, {"rank", "transitions"}, is);
      c.kind = "explicit";
      if (auto r = get_int(b, "rank", bp, is, std::nullopt, 1, 4)) c.rank = *r;
      if (!b.contains("transitions") || !b["transitions"].is_array() || b["transitions"].empty()) {
        is.fail(join(bp, "transitions"), "expected a catalog name or a non-empty transitions array");
      } else {
        const json& ts = b["transitions"];
        for (std::size_t k = 0; k < ts.size(); ++k) {
          const std::string tp = at(join(bp, "transitions"), k);
          const json& t = ts[k];
          if (!t.is_object()) {
            is.fail(tp, "expected an object");
            continue;
          }
          check_keys(t, tp, {"from", "to", "component", "entries"}, is);
          TransitionSpec spec;
          bool ok = true;
          if (!t.contains("from") || !t.contains("to")) {
            is.fail(tp, "needs 'from' and 'to' charts");
            ok = false;
          } else if (atlas) {
            spec.from = chart_index(*atlas, t["from"], join(tp, "from"), is);
            spec.to = chart_index(*atlas, t["to"], join(tp, "to"), is);
            ok = spec.from >= 0 && spec.to >= 0;
            if (ok && spec.from == spec.to) {
              is.fail(tp, "transition from a chart to itself");
              ok = false;
            }
          }
          if (auto comp = get_int(t, "component", tp, is, 0, 0, 64)) {
            spec.component = *comp;
            if (ok && atlas && spec.component >= static_cast<int>(atlas->transitions(spec.from, spec.to).size())) {
              is.fail(join(tp, "component"), "charts " + atlas->chart(spec.from).name + " and " + atlas->chart(spec.to).name +
                                                 " have " + std::to_string(atlas->transitions(spec.from, spec.to).size()) +
                                                 " overlap component(s)");
              ok = false;
            }
          }
          if (!t.contains("entries") || !t["entries"].is_array() ||
              t["entries"].size() != static_cast<std::size_t>(c.rank * c.rank)) {
            is.fail(join(tp, "entries"), "expected " + std::to_string(c.rank * c.rank) + " expressions (row-major)");
            ok = false;
          } else {
            for (std::size_t e = 0; e < t["entries"].size(); ++e) {
              auto ex = get_expr(t["entries"][e], at(join(tp, "entries"), e), is);
              if (ex) spec.entries.push_back(*ex);
              else ok = false;
            }
          }
          if (ok) c.transitions.push_back(std::move(spec));
        }
      }
    }
  }

  // partitions of unity
  if (!config.contains("partitions")) {
    c.partitions.push_back({0, {}});
  } else if (!config["partitions"].is_array() || config["partitions"].empty() || config["partitions"].size() > 2) {
    is.fail("partitions", "expected one or two partitions of unity");
  } else {
    for (std::size_t k = 0; k < config["partitions"].size(); ++k) {
      const json& pj = config["partitions"][k];
      const std::string pp = at("partitions", k);
      PartitionSpec ps;
      if (pj.is_object() && pj.contains("catalog")) {
        check_keys(pj, pp, {"catalog"}, is);
        if (!pj["catalog"].is_number_integer() || pj["catalog"].get<int>() < 0 || pj["catalog"].get<int>() > 1) {
          is.fail(join(pp, "catalog"), "catalog bump family must be 0 or 1");
          continue;
        }
        ps.variant = pj["catalog"].get<int>();
      } else if (pj.is_object() && pj.contains("bumps")) {
        check_keys(pj, pp, {"bumps"}, is);
        const json& bj = pj["bumps"];
        if (!bj.is_array() || (atlas && bj.size() != static_cast<std::size_t>(c.charts))) {
          is.fail(join(pp, "bumps"), "expected one bump expression per chart (" + std::to_string(c.charts) + ")");
          continue;
        }
        for (std::size_t i = 0; i < bj.size(); ++i)
          if (auto ex = get_expr(bj[i], at(join(pp, "bumps"), i), is)) ps.bumps.push_back(*ex);
      } else {
        is.fail(pp, "expected {\"catalog\": 0|1} or {\"bumps\": [...]}");
        continue;
      }
      c.partitions.push_back(std::move(ps));
    }
  }

  // degrees of the Chern forms
  if (!config.contains("p")) {
    if (atlas) c.p = {c.dim / 2};
  } else if (!config["p"].is_array() || config["p"].empty()) {
    is.fail("p", "expected a non-empty array of degrees");
  } else {
    for (std::size_t k = 0; k < config["p"].size(); ++k) {
      const json& v = config["p"][k];
      if (!v.is_number_integer() || v.get<int>() < 0) {
        is.fail(at("p", k), "expected a non-negative integer");
      } else if (atlas && 2 * v.get<int>() > c.dim) {
        is.fail(at("p", k), "Ch_" + std::to_string(v.get<int>()) + " has degree above dim " + c.manifold + " = " + std::to_string(c.dim));
      } else {
        c.p.push_back(v.get<int>());
      }
    }
  }
  return c;
}

std::shared_ptr<const Cocycle> make_cocycle(const BundleConfig& c, std::shared_ptr<const Atlas> atlas) {
  if (c.kind == "trivial") return trivial_bundle(atlas, c.rank);
  if (c.kind == "clutching") return clutching_bundle(atlas, c.degree);
  if (c.kind == "clutching-sum") return clutching_sum(atlas, c.degrees);
  if (c.kind == "flat-circle") return flat_circle_bundle(atlas, c.theta.at(0));
  if (c.kind == "flat-torus") return flat_torus_bundle(atlas, c.theta.at(0), c.theta.at(1));
  if (c.kind == "torus-degree") return torus_degree_bundle(atlas, c.degree);
  auto g = std::make_shared<Cocycle>(atlas, c.rank);
  for (const auto& t : c.transitions) g->set(t.to, t.from, t.component, t.entries);
  g->complete_inverses();
  return g;
}

json complex_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace

json parse_config(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    auto pos = what.find("] ");
    throw ConfigError("", "JSON syntax error at byte " + std::to_string(e.byte) + ": " +
                              (pos == std::string::npos ? what : what.substr(pos + 2)));
  }
}

JobResult run_bundle_report(const json& config, bool timings) {
  Issues strict(nullptr);
  BundleConfig c = parse_bundle(config, strict);
  Stopwatch clock;
  json times = json::object();

  auto atlas = build_atlas(c.manifold, c.resolution);
  std::shared_ptr<const Cocycle> g;
  try {
    g = make_cocycle(c, atlas);
  } catch (const std::out_of_range& e) {
    throw ConfigError("bundle.transitions", std::string("incomplete cocycle: ") + e.what());
  }
  times["atlas"] = clock.lap();

  json checks = json::array();
  bool all_pass = true;
  auto check = [&](const std::string& name, double value, double threshold) {
    bool ok = value < threshold;
    all_pass = all_pass && ok;
    checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"pass", ok}});
  };

  json rep;
  rep["schema"] = "v1";
  rep["job"] = "bundle";
  rep["manifold"] = c.manifold;
  rep["resolution"] = c.resolution;
  rep["rank"] = g->rank();
  rep["bundle"] = config["bundle"];
  rep["thresholds"] = {{"residual", c.th.base.residual},   {"route_delta", c.th.base.route_delta},
                       {"integrality", c.th.base.integrality}, {"gluing", c.th.gluing},
                       {"closedness", c.th.closedness},    {"overlap", c.th.overlap},
                       {"projector", c.th.projector}};

  CocycleReport cr = verify_cocycle(*g);
  rep["cocycle"] = {{"max_cocycle_residual", cr.max_cocycle_residual},
                    {"max_inverse_residual", cr.max_inverse_residual},
                    {"min_abs_det", cr.min_abs_det},
                    {"triple_points", cr.triple_points},
                    {"overlap_points", cr.overlap_points}};
  check("cocycle", cr.max_cocycle_residual, c.th.base.residual);
  check("cocycle inverse", cr.max_inverse_residual, c.th.base.residual);
  times["cocycle"] = clock.lap();

  std::ostringstream csv;
  csv << "p,partition,connection_re,connection_im,projector_re,projector_im,route_delta,nearest,integrality_gap\n";
  json parts = json::array();
  std::map<int, std::vector<Complex>> integrals;
  for (std::size_t k = 0; k < c.partitions.size(); ++k) {
    const PartitionSpec& ps = c.partitions[k];
    const std::string tag = "partition " + std::to_string(k);
    auto part = build_partition(atlas, ps.variant >= 0 ? catalog_bumps(*atlas, ps.variant) : ps.bumps);
    const PartitionReport& pr = part->report();
    Connection conn = connection_from_partition(g, part);
    auto R = curvature(conn);
    double gluing = verify_gluing(conn);
    double tensoriality = verify_tensoriality(conn, *R);
    StructureReport st = verify_structure(conn, *R);
    check(tag + " gluing", gluing, c.th.gluing);
    check(tag + " tensoriality", tensoriality, c.th.gluing);

    std::shared_ptr<const MatrixFormField> q;
    try {
      q = build_projector(g, part);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(at("partitions", k), e.what());
    }
    ProjectorReport proj = verify_projector(*q, g->rank());
    check(tag + " projector idempotency", proj.idempotency, c.th.projector);
    check(tag + " projector trace", proj.trace_residual, c.th.projector);

    json pj;
    pj["index"] = k;
    pj["bumps"] = ps.variant >= 0 ? json("catalog " + std::to_string(ps.variant)) : json(nullptr);
    pj["partition"] = {{"max_sum_residual", pr.max_sum_residual},
                       {"max_square_residual", pr.max_square_residual},
                       {"min_alpha", pr.min_alpha},
                       {"support_residual", pr.support_residual}};
    pj["gluing"] = gluing;
    pj["tensoriality"] = tensoriality;
    pj["structure"] = {{"commutator", st.commutator_residual}, {"bianchi", st.bianchi_residual}};
    pj["projector"] = {{"idempotency", proj.idempotency}, {"trace_residual", proj.trace_residual}};
    json chern = json::array();
    for (int p : c.p) {
      auto ch = chern_form(R, p);
      json cj;
      cj["p"] = p;
      cj["closedness"] = closedness_residual(*ch);
      cj["overlap_mismatch"] = overlap_mismatch(*ch);
      check(tag + " Ch_" + std::to_string(p) + " closedness", cj["closedness"].get<double>(), c.th.closedness);
      check(tag + " Ch_" + std::to_string(p) + " overlap", cj["overlap_mismatch"].get<double>(), c.th.overlap);
      if (2 * p == atlas->dim()) {
        ChernNumber a = chern_number(*part, *ch);
        ChernNumber b = chern_number(*part, *chern_from_projector(q, p));
        const double delta = std::abs(a.value - b.value);
        cj["connection"] = complex_json(a.value);
        cj["projector"] = complex_json(b.value);
        cj["route_delta"] = delta;
        cj["nearest"] = a.nearest;
        cj["integrality_gap"] = a.integrality_gap;
        check(tag + " Ch_" + std::to_string(p) + " route delta", delta, c.th.base.route_delta);
        check(tag + " Ch_" + std::to_string(p) + " integrality", a.integrality_gap, c.th.base.integrality);
        integrals[p].push_back(a.value);
        csv << p << ',' << k << ',' << num(a.value.real()) << ',' << num(a.value.imag()) << ',' << num(b.value.real())
            << ',' << num(b.value.imag()) << ',' << num(delta) << ',' << a.nearest << ',' << num(a.integrality_gap) << '\n';
      }
      chern.push_back(cj);
    }
    pj["chern"] = chern;
    parts.push_back(pj);
    times[tag] = clock.lap();
  }
  rep["partitions"] = parts;

  json indep = json::array();
  for (const auto& [p, vals] : integrals)
    if (vals.size() == 2) {
      const double delta = std::abs(vals[0] - vals[1]);
      indep.push_back({{"p", p}, {"delta", delta}});
      check("Ch_" + std::to_string(p) + " partition independence", delta, c.th.base.route_delta);
    }
  rep["partition_independence"] = indep;
  rep["checks"] = checks;
  rep["pass"] = all_pass;
  if (timings) rep["timings"] = times;
  return {rep, csv.str(), all_pass};
}

// ---------------------------------------------------------------------------
// algebra jobs

namespace {

struct AlgebraConfig {
  std::optional<CatalogAlgebra> algebra;
  int n_max = 4;
  int p_max = 1;
  int identity_degree = 5;
  std::optional<std::vector<AlgebraMatrix>> idempotents, invertibles;
};

AlgebraConfig parse_algebra(const json& config, Issues& is) {
  AlgebraConfig c;
  if (!config.is_object()) {
    is.fail("", "config must be a JSON object");
    return c;
  }
  check_header(config, "algebra", is);
  check_keys(config, "", {"schema", "job", "description", "algebra", "n_max", "p_max", "identity_degree", "idempotents", "invertibles"}, is);
  if (auto n = get_int(config, "n_max", "", is, 4, 0, 8)) c.n_max = *n;
  if (auto p = get_int(config, "p_max", "", is, 1, 0, 3)) c.p_max = *p;
  c.identity_degree = std::min(c.n_max + 1, 5);
  if (auto d = get_int(config, "identity_degree", "", is, c.identity_degree, 0, 8)) c.identity_degree = *d;

  if (!config.contains("algebra")) {
    is.fail("algebra", "required catalog name or structure constants are missing");
    return c;
  }
  const json& a = config["algebra"];
  try {
    if (a.is_string()) c.algebra = load_catalog_algebra(a.get<std::string>());
    else if (a.is_object() && a.contains("catalog") && a.size() == 1) c.algebra = load_catalog_algebra(a["catalog"].get<std::string>());
    else c.algebra = algebra_from_json(a);
  } catch (const AlgebraError& e) {
    is.fail("algebra", e.what());
  } catch (const std::invalid_argument& e) {
    is.fail("algebra", e.what());
  } catch (const json::exception& e) {
    is.fail("algebra", e.what());
  }
  if (!c.algebra) return c;

  auto matrices = [&](const char* key, std::optional<std::vector<AlgebraMatrix>>& out) {
    if (!config.contains(key)) return;
    if (!config[key].is_array()) {
      is.fail(key, "expected an array of matrices");
      return;
    }
    out.emplace();
    for (std::size_t k = 0; k < config[key].size(); ++k) {
      try {
        out->push_back(matrix_from_json(c.algebra->algebra, config[key][k]));
      } catch (const std::exception& e) {
        is.fail(at(key, k), e.what());
      }
    }
  };
  matrices("idempotents", c.idempotents);
  matrices("invertibles", c.invertibles);
  if (c.idempotents)
    for (std::size_t k = 0; k < c.idempotents->size(); ++k)
      if (!is_idempotent(c.algebra->algebra, (*c.idempotents)[k])) is.fail(at("idempotents", k), "matrix is not idempotent");
  return c;
}

json rational_terms(const FiniteDimAlgebra& a, const OmegaAlgebra& om, int n, const SparseVec& v) {
  json out = json::array();
  for (const auto& [idx, x] : v) out.push_back({{"coeff", to_string(x)}, {"form", form_label(a, om, n, idx)}});
  return out;
}

json rational_list(const SparseVec& v, std::size_t dim) {
  json out = json::array();
  for (std::size_t k = 0; k < dim; ++k) {
    auto it = v.find(k);
    out.push_back(it == v.end() ? std::string("0") : to_string(it->second));
  }
  return out;
}

}  // namespace

JobResult run_algebra_report(const json& config, bool timings) {
  Issues strict(nullptr);
  AlgebraConfig c = parse_algebra(config, strict);
  Stopwatch clock;
  json times = json::object();
  const CatalogAlgebra& cat = *c.algebra;
  const FiniteDimAlgebra& A = cat.algebra;
  const auto& idempotents = c.idempotents ? *c.idempotents : cat.idempotents;
  const auto& invertibles = c.invertibles ? *c.invertibles : cat.invertibles;
  NcEngine e(A);
  bool all_pass = true;

  json rep;
  rep["schema"] = "v1";
  rep["job"] = "algebra";
  json unit = json::array();
  for (const auto& u : A.unit()) unit.push_back(to_string(u));
  rep["algebra"] = {{"name", A.name()}, {"dim", A.dim()}, {"basis", A.labels()}, {"unit", unit}};
  rep["n_max"] = c.n_max;

  std::ostringstream csv;
  csv << "n,omega,omega_bar,hbar,hbar_reduced,hh,hc,hc_reduced,hh_next,b_rank,b_kernel,hbar_eq_kernel\n";
  json dims = json::array();
  json comparison = json::array();
  for (const auto& row : verify_hbar_kernel(e, c.n_max)) {
    const int n = row.n;
    json d = {{"n", n},
              {"omega", e.omega().dim(n)},
              {"omega_bar", e.reduced_dim(n)},
              {"hbar", e.nc_homology(n).dim()},
              {"hbar_reduced", e.nc_homology_reduced_dim(n)},
              {"hh", e.hochschild(n).dim()},
              {"hc", row.hc},
              {"hc_reduced", row.hc_reduced}};
    dims.push_back(d);
    comparison.push_back({{"n", n},
                   {"hbar", row.hbar},
                   {"reduced_degree_zero", n == 0},
                   {"hc_reduced", row.hc_reduced},
                   {"hh_next", row.hh_next},
                   {"b_rank", row.b_rank},
                   {"b_kernel", row.kernel},
                   {"pass", row.pass}});
    all_pass = all_pass && row.pass;
    csv << n << ',' << d["omega"] << ',' << d["omega_bar"] << ',' << d["hbar"] << ',' << d["hbar_reduced"] << ','
        << d["hh"] << ',' << row.hc << ',' << row.hc_reduced << ',' << row.hh_next << ',' << row.b_rank << ','
        << row.kernel << ',' << (row.pass ? "pass" : "fail") << '\n';
  }
  rep["dimensions"] = dims;
  rep["hbar_vs_b_kernel"] = comparison;
  times["homology"] = clock.lap();

  IdentityReport ids = verify_identities(e, c.identity_degree);
  rep["identities"] = {{"max_degree", ids.max_degree},     {"dimensions", ids.dimensions},
                       {"d_squared", ids.d_squared},       {"leibniz", ids.leibniz},
                       {"leibniz_pairs", ids.leibniz_pairs}, {"d_stable", ids.d_stable},
                       {"first_failure", ids.first_failure}, {"pass", ids.pass()}};
  all_pass = all_pass && ids.pass();
  times["identities"] = clock.lap();

  json chern = json::array();
  for (const auto& q : idempotents)
    for (int p = 0; p <= c.p_max; ++p) {
      AlgebraicChern ch = chern_idempotent(e, q, p);
      bool odd = odd_trace_vanishes(e, q, p);
      json cj = {{"idempotent", q.name},
                 {"p", p},
                 {"normalisation", ch.normalisation},
                 {"representative", rational_terms(A, e.omega(), 2 * p, ch.representative)},
                 {"reduced_zero", ch.reduced.empty()},
                 {"closed", ch.closed},
                 {"odd_trace_vanishes", odd}};
      if (ch.closed) cj["class"] = rational_list(ch.class_coordinates, e.nc_homology(2 * p).dim());
      chern.push_back(cj);
      all_pass = all_pass && ch.closed && odd;
    }
  rep["chern"] = chern;

  json inv = json::array();
  for (const auto& q : idempotents)
    for (const auto& u : invertibles) {
      if (q.size != u.size) continue;
      for (int p = 0; p <= c.p_max; ++p) {
        ConjugationReport r = verify_chern_invariance_alg(e, q, u, p);
        inv.push_back({{"idempotent", q.name},
                       {"invertible", u.name},
                       {"p", p},
                       {"conjugate_idempotent", r.conjugate_idempotent},
                       {"difference_zero", r.difference_zero},
                       {"difference_in_image", r.in_image}});
        all_pass = all_pass && r.conjugate_idempotent && r.in_image;
      }
    }
  rep["invariance"] = inv;
  times["chern"] = clock.lap();
  rep["pass"] = all_pass;
  if (timings) rep["timings"] = times;
  return {rep, csv.str(), all_pass};
}

std::vector<std::string> validate_config(const json& config) {
  std::vector<std::string> out;
  Issues is(&out);
  if (!config.is_object()) {
    is.fail("", "config must be a JSON object");
    return out;
  }
  std::string job;
  if (config.contains("job") && config["job"].is_string()) job = config["job"].get<std::string>();
  else if (config.contains("manifold")) job = "bundle";
  else if (config.contains("algebra")) job = "algebra";
  if (job == "bundle") parse_bundle(config, is);
  else if (job == "algebra") parse_algebra(config, is);
  else is.fail("job", "cannot tell the job kind (expected \"bundle\" or \"algebra\")");
  return out;
}

}  // namespace fibre
