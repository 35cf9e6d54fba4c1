#include "fibre/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fibre/parallel.hpp"

namespace fibre {

using std::numbers::pi;

Domain Domain::interval(double a, double b) {
  Domain d;
  d.shape = Shape::Interval;
  d.x0 = a;
  d.x1 = b;
  return d;
}

Domain Domain::box(double x0, double x1, double y0, double y1) {
  Domain d;
  d.shape = Shape::Box;
  d.x0 = x0;
  d.x1 = x1;
  d.y0 = y0;
  d.y1 = y1;
  return d;
}

Domain Domain::disk(double r) {
  Domain d;
  d.shape = Shape::Disk;
  d.radius = r;
  return d;
}

bool Domain::contains(Point p) const {
  switch (shape) {
    case Shape::Interval: return p.x > x0 && p.x < x1;
    case Shape::Box: return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1;
    case Shape::Disk: return p.x * p.x + p.y * p.y < radius * radius;
  }
  return false;
}

std::vector<Point> Domain::boundary_probe(int count) const {
  std::vector<Point> pts;
  switch (shape) {
    case Shape::Interval:
      pts = {{x0, 0.0}, {x1, 0.0}};
      break;
    case Shape::Disk:
      for (int k = 0; k < count; ++k) {
        double t = 2 * pi * k / count;
        pts.push_back({radius * std::cos(t), radius * std::sin(t)});
      }
      break;
    case Shape::Box: {
      int per_edge = std::max(1, count / 4);
      for (int k = 0; k <= per_edge; ++k) {
        double s = static_cast<double>(k) / per_edge;
        double x = x0 + s * (x1 - x0);
        double y = y0 + s * (y1 - y0);
        pts.push_back({x, y0});
        pts.push_back({x, y1});
        pts.push_back({x0, y});
        pts.push_back({x1, y});
      }
      break;
    }
  }
  return pts;
}

// ---------------------------------------------------------------------------

Transition::Transition(int from, int to, int dim, Expr map_x, Expr map_y)
    : from_(from), to_(to), dim_(dim), map_x_(std::move(map_x)), map_y_(std::move(map_y)) {
  std::vector<Expr> m{map_x_, map_y_};
  map_ = Program(m);
  std::vector<Expr> j;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) j.push_back(differentiate(a == 0 ? map_x_ : map_y_, b));
  jac_ = Program(j);
}

Point Transition::apply(Point p) const {
  auto v = map_(p);
  return {v[0].real(), v[1].real()};
}

std::vector<std::vector<double>> Transition::jacobian(Point p) const {
  auto v = jac_(p);
  std::vector<std::vector<double>> j(static_cast<std::size_t>(dim_), std::vector<double>(static_cast<std::size_t>(dim_)));
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) j[a][b] = v[static_cast<std::size_t>(a * dim_ + b)].real();
  return j;
}

// ---------------------------------------------------------------------------

Atlas::Atlas(std::string id, int dim, std::vector<Chart> charts, std::vector<Transition> transitions)
    : id_(std::move(id)), dim_(dim), charts_(std::move(charts)) {
  const std::size_t r = charts_.size();
  transitions_.assign(r, std::vector<std::vector<Transition>>(r));
  for (auto& t : transitions) transitions_[static_cast<std::size_t>(t.from())][static_cast<std::size_t>(t.to())].push_back(std::move(t));
  for (std::size_t c = 0; c < r; ++c)
    if (transitions_[c][c].empty())
      transitions_[c][c].emplace_back(static_cast<int>(c), static_cast<int>(c), dim_, Expr::x(), dim_ == 2 ? Expr::y() : Expr());

  sample_regions_.resize(r);
  sample_region_index_.resize(r);
  for (std::size_t c = 0; c < r; ++c) {
    std::map<Region, int> seen;
    for (const auto& s : charts_[c].samples) {
      Region reg = region(static_cast<int>(c), s.at);
      auto [it, inserted] = seen.emplace(reg, static_cast<int>(sample_regions_[c].size()));
      if (inserted) sample_regions_[c].push_back(reg);
      sample_region_index_[c].push_back(it->second);
    }
  }
}

const std::vector<Transition>& Atlas::transitions(int from, int to) const {
  return transitions_[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
}

int Atlas::locate(int from, int to, Point p) const {
  if (!chart(from).domain.contains(p)) return -1;
  const auto& ts = transitions(from, to);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    try {
      if (chart(to).domain.contains(ts[k].apply(p))) return static_cast<int>(k);
    } catch (const DomainError&) {
      // the coordinate change is singular here, so p is outside U_to
    }
  }
  return -1;
}

const Transition* Atlas::transition_at(int from, int to, Point p) const {
  int k = locate(from, to, p);
  return k < 0 ? nullptr : &transitions(from, to)[static_cast<std::size_t>(k)];
}

Region Atlas::region(int c, Point p) const {
  const int r = chart_count();
  Region reg(static_cast<std::size_t>(r * r), -1);
  for (int a = 0; a < r; ++a) {
    int ka = locate(c, a, p);
    if (ka < 0) continue;
    Point q = transitions(c, a)[static_cast<std::size_t>(ka)].apply(p);
    for (int b = 0; b < r; ++b) reg[static_cast<std::size_t>(a * r + b)] = locate(a, b, q);
  }
  return reg;
}

std::vector<std::size_t> Atlas::overlap_samples(int from, int to) const {
  std::vector<std::size_t> out;
  const auto& ss = chart(from).samples;
  for (std::size_t k = 0; k < ss.size(); ++k) {
    const Region& reg = sample_regions(from)[static_cast<std::size_t>(sample_region_index(from, k))];
    if (component(reg, from, to) >= 0) out.push_back(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

std::vector<Sample> polar_grid(double radius, int n) {
  // Midpoint rule in (s, theta) with r = radius * s^2. The substitution makes
  // the radial integrand vanish to third order at the centre, so the rule
  // keeps its accuracy for integrands that do not vanish at r = 0.
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n * n));
  const double dt = 2 * pi / n, ds = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) * ds;
    const double r = radius * s * s;
    const double w = 2 * radius * s * ds * r * dt;
    for (int j = 0; j < n; ++j) {
      const double t = (j + 0.5) * dt;
      out.push_back({{r * std::cos(t), r * std::sin(t)}, w});
    }
  }
  return out;
}

std::vector<Sample> box_grid(const Domain& d, int n) {
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n * n));
  const double hx = (d.x1 - d.x0) / n, hy = (d.y1 - d.y0) / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.push_back({{d.x0 + (i + 0.5) * hx, d.y0 + (j + 0.5) * hy}, hx * hy});
  return out;
}

std::vector<Sample> interval_grid(const Domain& d, int n) {
  std::vector<Sample> out;
  const double h = (d.x1 - d.x0) / n;
  for (int i = 0; i < n; ++i) out.push_back({{d.x0 + (i + 0.5) * h, 0.0}, h});
  return out;
}

}  // namespace

std::vector<Sample> sample_domain(const Domain& d, int n) {
  switch (d.shape) {
    case Domain::Shape::Disk: return polar_grid(d.radius, n);
    case Domain::Shape::Box: return box_grid(d, n);
    case Domain::Shape::Interval: return interval_grid(d, n);
  }
  return {};
}

std::shared_ptr<const Atlas> refine_atlas(const Atlas& atlas, const std::vector<int>& parent,
                                          const std::vector<Domain>& patches, int resolution) {
  if (parent.size() != patches.size()) throw std::invalid_argument("one parent chart per patch required");
  std::vector<Chart> charts;
  for (std::size_t a = 0; a < patches.size(); ++a) {
    if (parent[a] < 0 || parent[a] >= atlas.chart_count())
      throw ContainmentError("patch " + std::to_string(a) + " assigned to a nonexistent chart");
    const Domain& outer = atlas.chart(parent[a]).domain;
    for (Point p : patches[a].boundary_probe(256))
      if (!outer.contains(p))
        throw ContainmentError("patch " + std::to_string(a) + " is not contained in chart " +
                               std::to_string(parent[a]));
    charts.push_back({atlas.chart(parent[a]).name + "/" + std::to_string(a), patches[a],
                      sample_domain(patches[a], resolution)});
  }
  std::vector<Transition> ts;
  for (std::size_t a = 0; a < patches.size(); ++a)
    for (std::size_t b = 0; b < patches.size(); ++b) {
      if (a == b) continue;
      for (const auto& t : atlas.transitions(parent[a], parent[b]))
        ts.emplace_back(static_cast<int>(a), static_cast<int>(b), atlas.dim(), t.map_x(), t.map_y());
    }
  return std::make_shared<Atlas>(atlas.id() + "-refined", atlas.dim(), std::move(charts), std::move(ts));
}

namespace {

constexpr double kArcHalfWidth = 0.8 * pi;

double circle_centre(int k) { return 2 * pi * k / 3; }

std::shared_ptr<const Atlas> make_sphere2(int n) {
  std::vector<Chart> charts;
  for (const char* name : {"north", "south"}) {
    Chart c{name, Domain::disk(2.0), {}};
    c.samples = polar_grid(2.0, n);
    charts.push_back(std::move(c));
  }
  // w = conj(z)/|z|^2 = 1/z; the map is its own inverse.
  Expr x = Expr::x(), y = Expr::y();
  Expr r2 = pow(x, 2) + pow(y, 2);
  std::vector<Transition> ts;
  ts.emplace_back(0, 1, 2, x / r2, -y / r2);
  ts.emplace_back(1, 0, 2, x / r2, -y / r2);
  return std::make_shared<Atlas>("sphere2", 2, std::move(charts), std::move(ts));
}

std::shared_ptr<const Atlas> make_circle3(int n) {
  std::vector<Chart> charts;
  for (int k = 0; k < 3; ++k) {
    Domain d = Domain::interval(circle_centre(k) - kArcHalfWidth, circle_centre(k) + kArcHalfWidth);
    charts.push_back({"arc" + std::to_string(k), d, interval_grid(d, n)});
  }
  std::vector<Transition> ts;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      for (int m = -1; m <= 1; ++m) {
        double shift = 2 * pi * m;
        double lo = std::max(charts[i].domain.x0 + shift, charts[j].domain.x0);
        double hi = std::min(charts[i].domain.x1 + shift, charts[j].domain.x1);
        if (lo < hi) ts.emplace_back(i, j, 1, Expr::x() + Expr(shift), Expr());
      }
    }
  return std::make_shared<Atlas>("circle3", 1, std::move(charts), std::move(ts));
}

std::shared_ptr<const Atlas> make_torus4(int n) {
  std::vector<Chart> charts;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Domain d = Domain::box(a * pi - kArcHalfWidth, a * pi + kArcHalfWidth, b * pi - kArcHalfWidth,
                             b * pi + kArcHalfWidth);
      charts.push_back({"patch" + std::to_string(a) + std::to_string(b), d, box_grid(d, n)});
    }
  std::vector<Transition> ts;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      const Domain& di = charts[i].domain;
      const Domain& dj = charts[j].domain;
      for (int m = -1; m <= 1; ++m)
        for (int k = -1; k <= 1; ++k) {
          double sx = 2 * pi * m, sy = 2 * pi * k;
          bool ox = std::max(di.x0 + sx, dj.x0) < std::min(di.x1 + sx, dj.x1);
          bool oy = std::max(di.y0 + sy, dj.y0) < std::min(di.y1 + sy, dj.y1);
          if (ox && oy) ts.emplace_back(i, j, 2, Expr::x() + Expr(sx), Expr::y() + Expr(sy));
        }
    }
  return std::make_shared<Atlas>("torus4", 2, std::move(charts), std::move(ts));
}

}  // namespace

std::shared_ptr<const Atlas> build_atlas(std::string_view manifold_id, int grid_resolution) {
  if (manifold_id != "sphere2" && manifold_id != "circle3" && manifold_id != "torus4")
    throw UnknownManifold("unknown manifold id '" + std::string(manifold_id) + "'");
  if (grid_resolution < 8) throw std::invalid_argument("grid resolution must be at least 8");
  if (manifold_id == "sphere2") return make_sphere2(grid_resolution);
  if (manifold_id == "circle3") return make_circle3(grid_resolution);
  return make_torus4(grid_resolution);
}

std::vector<Expr> catalog_bumps(const Atlas& atlas, int variant) {
  Expr x = Expr::x(), y = Expr::y();
  std::vector<Expr> out;
  auto flat_top = [](const Expr& t, double lo, double hi) { return Expr(1.0) - bump(t, lo, hi); };
  if (atlas.id() == "sphere2") {
    if (variant == 0) {
      out = {flat_top(pow(x, 2) + pow(y, 2), 0.2, 3.0), flat_top(pow(x, 2) + pow(y, 2), 0.2, 3.0)};
    } else {
      out = {flat_top(pow(x, 2) + pow(y, 2), 0.05, 3.5) * (Expr(1.0) + Expr(0.5) * x),
             flat_top(pow(x, 2) + pow(y, 2), 0.5, 3.9)};
    }
  } else if (atlas.id() == "circle3") {
    double lo = variant == 0 ? 1.5 : 2.5, hi = variant == 0 ? 5.5 : 6.0;
    for (int k = 0; k < 3; ++k) out.push_back(flat_top(pow(x - Expr(circle_centre(k)), 2), lo, hi));
  } else if (atlas.id() == "torus4") {
    double lo = variant == 0 ? 0.5 : 1.0, hi = variant == 0 ? 6.2 : 6.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        out.push_back(flat_top(pow(x - Expr(a * pi), 2), lo, hi) * flat_top(pow(y - Expr(b * pi), 2), lo, hi));
  } else {
    throw UnknownManifold("no catalog bumps for '" + atlas.id() + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------

PartitionOfUnity::PartitionOfUnity(std::shared_ptr<const Atlas> atlas, std::vector<Expr> bumps)
    : atlas_(std::move(atlas)), bumps_(std::move(bumps)) {}

const PartitionOfUnity::Local& PartitionOfUnity::local(int chart, const Region& region) const {
  std::lock_guard lock(mu_);
  auto key = std::make_pair(chart, region);
  if (auto it = cache_.find(key); it != cache_.end()) return *it->second;

  const Atlas& A = *atlas_;
  const int r = A.chart_count();
  std::vector<Expr> rho(static_cast<std::size_t>(r));
  Expr total;
  for (int k = 0; k < r; ++k) {
    int comp = A.component(region, chart, k);
    if (comp < 0) continue;
    const Transition& t = A.transitions(chart, k)[static_cast<std::size_t>(comp)];
    rho[k] = k == chart ? bumps_[k] : substitute(bumps_[k], t.map_x(), t.map_y());
    total += rho[k];
  }
  auto local = std::make_unique<Local>();
  Expr squares;
  for (int k = 0; k < r; ++k) {
    local->alpha.push_back(rho[k] / total);
    squares += pow(local->alpha.back(), 2);
  }
  Expr norm = sqrt(squares);
  for (int k = 0; k < r; ++k) local->beta.push_back(local->alpha[k] / norm);
  auto& ref = *local;
  cache_.emplace(std::move(key), std::move(local));
  return ref;
}

std::shared_ptr<const PartitionOfUnity> build_partition(std::shared_ptr<const Atlas> atlas, std::vector<Expr> bumps) {
  if (static_cast<int>(bumps.size()) != atlas->chart_count())
    throw PartitionError("expected one bump per chart (" + std::to_string(atlas->chart_count()) + ")");
  auto part = std::shared_ptr<PartitionOfUnity>(new PartitionOfUnity(atlas, std::move(bumps)));
  const Atlas& A = *atlas;
  const int r = A.chart_count();
  PartitionReport rep;
  rep.min_alpha = 1.0;

  for (int c = 0; c < r; ++c) {
    Expr own[1] = {part->bumps_[c]};
    Program own_prog(own);
    for (const auto& s : A.chart(c).samples) {
      double v = own_prog(s.at)[0].real();
      if (v < 0.0) {
        std::ostringstream os;
        os << "negative bump value " << v << " on chart " << c << " at (" << s.at.x << ", " << s.at.y << ")";
        throw PartitionError(os.str());
      }
    }
    for (const auto& probe : A.chart(c).domain.boundary_probe(256))
      rep.support_residual = std::max(rep.support_residual, std::abs(own_prog(probe)[0]));

    const auto& regions = A.sample_regions(c);
    std::vector<Program> sums, alphas;
    for (const auto& reg : regions) {
      Expr total;
      for (int k = 0; k < r; ++k) {
        int comp = A.component(reg, c, k);
        if (comp < 0) continue;
        const Transition& t = A.transitions(c, k)[static_cast<std::size_t>(comp)];
        total += k == c ? part->bumps_[k] : substitute(part->bumps_[k], t.map_x(), t.map_y());
      }
      Expr tot[1] = {total};
      sums.emplace_back(tot);
      const auto& loc = part->local(c, reg);
      std::vector<Expr> outs = loc.alpha;
      outs.insert(outs.end(), loc.beta.begin(), loc.beta.end());
      alphas.emplace_back(outs);
    }
    const auto& samples = A.chart(c).samples;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      int ri = A.sample_region_index(c, k);
      Point p = samples[k].at;
      if (!(sums[ri](p)[0].real() > 0.0)) {
        std::ostringstream os;
        os << "bumps have a common zero on chart " << c << " at (" << p.x << ", " << p.y << ")";
        throw PartitionError(os.str());
      }
      auto v = alphas[ri](p);
      double sa = 0, sb = 0;
      for (int j = 0; j < r; ++j) {
        sa += v[j].real();
        sb += std::norm(v[r + j]);
        rep.min_alpha = std::min(rep.min_alpha, v[j].real());
      }
      rep.max_sum_residual = std::max(rep.max_sum_residual, std::abs(sa - 1.0));
      rep.max_square_residual = std::max(rep.max_square_residual, std::abs(sb - 1.0));
    }
  }
  part->report_ = rep;
  return part;
}

// ---------------------------------------------------------------------------

Complex integrate(const PartitionOfUnity& partition, const FormField& form) {
  const Atlas& A = partition.atlas();
  Complex total{};
  for (int c = 0; c < A.chart_count(); ++c) {
    const auto& regions = A.sample_regions(c);
    std::vector<Program> progs;
    std::vector<bool> vanishes;
    for (const auto& reg : regions) {
      Form f = form(c, reg);
      if (f.degree() != A.dim())
        throw DegreeMismatch("integrand has degree " + std::to_string(f.degree()) + " on a " +
                             std::to_string(A.dim()) + "-dimensional manifold");
      Expr integrand = partition.local(c, reg).alpha[static_cast<std::size_t>(c)] * f[0];
      vanishes.push_back(integrand.is_zero());
      Expr outs[1] = {integrand};
      progs.emplace_back(outs);
    }
    const auto& samples = A.chart(c).samples;
    std::vector<Complex> partial(parallel::chunk_count(samples.size()));
    parallel::for_chunks(samples.size(), [&](std::size_t b, std::size_t e, std::size_t chunk) {
      std::vector<Complex> scratch;
      Complex out[1];
      Complex acc{};
      for (std::size_t k = b; k < e; ++k) {
        int ri = A.sample_region_index(c, k);
        if (vanishes[ri]) continue;
        progs[ri].run(samples[k].at, scratch, out);
        acc += out[0] * samples[k].weight;
      }
      partial[chunk] = acc;
    });
    for (const auto& v : partial) total += v;
  }
  return total;
}

}  // namespace fibre
