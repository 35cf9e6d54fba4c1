#include "fibre/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fibre/parallel.hpp"

namespace fibre {

using std::numbers::pi;

namespace {

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

Expr z_coordinate() { return Expr::x() + Expr(Complex(0, 1)) * Expr::y(); }

std::vector<Expr> diagonal(const std::vector<Expr>& d) {
  const std::size_t n = d.size();
  std::vector<Expr> m(n * n, Expr(0.0));
  for (std::size_t k = 0; k < n; ++k) m[k * n + k] = d[k];
  return m;
}

std::vector<Expr> identity_entries(int n) { return diagonal(std::vector<Expr>(idx(n), Expr(1.0))); }

Expr determinant(const std::vector<Expr>& m, int n) {
  if (n == 1) return m[0];
  if (n == 2) return m[0] * m[3] - m[1] * m[2];
  Expr det(0.0);
  for (int c = 0; c < n; ++c) {
    std::vector<Expr> minor;
    for (int r = 1; r < n; ++r)
      for (int cc = 0; cc < n; ++cc)
        if (cc != c) minor.push_back(m[idx(r * n + cc)]);
    Expr term = m[idx(c)] * determinant(minor, n - 1);
    det = c % 2 == 0 ? det + term : det - term;
  }
  return det;
}

Point lattice_shift(const Transition& t) { return t.apply({0.0, 0.0}); }

}  // namespace

std::vector<Expr> symbolic_inverse(const std::vector<Expr>& m, int n) {
  if (m.size() != idx(n * n)) throw std::invalid_argument("matrix size does not match rank");
  if (n == 1) return {Expr(1.0) / m[0]};
  Expr det = determinant(m, n);
  std::vector<Expr> inv(idx(n * n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      std::vector<Expr> minor;
      for (int rr = 0; rr < n; ++rr)
        for (int cc = 0; cc < n; ++cc)
          if (rr != r && cc != c) minor.push_back(m[idx(rr * n + cc)]);
      Expr cof = determinant(minor, n - 1);
      if ((r + c) % 2 == 1) cof = -cof;
      inv[idx(c * n + r)] = cof / det;
    }
  return inv;
}

Cocycle::Cocycle(std::shared_ptr<const Atlas> atlas, int rank) : atlas_(std::move(atlas)), rank_(rank) {
  if (rank_ < 1) throw std::invalid_argument("bundle rank must be positive");
  const int r = atlas_->chart_count();
  entries_.resize(idx(r));
  for (int j = 0; j < r; ++j) {
    entries_[idx(j)].resize(idx(r));
    for (int i = 0; i < r; ++i) entries_[idx(j)][idx(i)].resize(atlas_->transitions(i, j).size());
  }
}

void Cocycle::set(int j, int i, int comp, const std::vector<Expr>& entries) {
  if (entries.size() != idx(rank_ * rank_))
    throw RankMismatch("transition function has " + std::to_string(entries.size()) + " entries, rank " +
                       std::to_string(rank_) + " needs " + std::to_string(rank_ * rank_));
  auto& slot = entries_.at(idx(j)).at(idx(i)).at(idx(comp));
  auto e = std::make_unique<Entry>();
  e->g = MatrixForm::functions(rank_, rank_, atlas_->dim(), entries);
  e->eval = MatrixFormEvaluator(e->g);
  slot = std::move(e);
}

bool Cocycle::has(int j, int i, int comp) const {
  if (j < 0 || i < 0 || j >= atlas_->chart_count() || i >= atlas_->chart_count()) return false;
  const auto& v = entries_[idx(j)][idx(i)];
  return comp >= 0 && idx(comp) < v.size() && v[idx(comp)] != nullptr;
}

const Cocycle::Entry& Cocycle::entry(int j, int i, int comp) const {
  if (!has(j, i, comp))
    throw std::out_of_range("transition g_" + std::to_string(j) + std::to_string(i) + " component " +
                            std::to_string(comp) + " is not set");
  return *entries_[idx(j)][idx(i)][idx(comp)];
}

const MatrixForm& Cocycle::matrix(int j, int i, int comp) const { return entry(j, i, comp).g; }

const MatrixFormEvaluator& Cocycle::evaluator(int j, int i, int comp) const { return entry(j, i, comp).eval; }

const MatrixFormEvaluator& Cocycle::derivative_evaluator(int j, int i, int comp) const {
  const Entry& e = entry(j, i, comp);
  std::lock_guard lock(mu_);
  if (!e.deval) e.deval = std::make_unique<MatrixFormEvaluator>(exterior_derivative(e.g));
  return *e.deval;
}

void Cocycle::complete_inverses() {
  const Atlas& A = *atlas_;
  const int r = A.chart_count();
  for (int i = 0; i < r; ++i)
    if (!has(i, i, 0)) set(i, i, 0, identity_entries(rank_));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      if (i == j) continue;
      for (std::size_t comp = 0; comp < A.transitions(i, j).size(); ++comp) {
        if (!has(j, i, static_cast<int>(comp))) continue;
        // find the matching component of U_j n U_i through one sample point
        int back = -1;
        for (const auto& s : A.chart(i).samples) {
          if (A.locate(i, j, s.at) != static_cast<int>(comp)) continue;
          back = A.locate(j, i, A.transitions(i, j)[comp].apply(s.at));
          break;
        }
        if (back < 0 || has(i, j, back)) continue;
        const Transition& t = A.transitions(j, i)[idx(back)];
        std::vector<Expr> inv = symbolic_inverse(matrix(j, i, static_cast<int>(comp)).flatten(), rank_);
        for (auto& e : inv) e = substitute(e, t.map_x(), t.map_y());
        set(i, j, back, inv);
      }
    }
}

// ---------------------------------------------------------------------------
// Catalog

std::shared_ptr<const Cocycle> trivial_bundle(std::shared_ptr<const Atlas> atlas, int rank) {
  auto g = std::make_shared<Cocycle>(atlas, rank);
  for (int i = 0; i < atlas->chart_count(); ++i)
    for (int j = 0; j < atlas->chart_count(); ++j)
      for (std::size_t c = 0; c < atlas->transitions(i, j).size(); ++c)
        g->set(j, i, static_cast<int>(c), identity_entries(rank));
  return g;
}

std::shared_ptr<const Cocycle> clutching_sum(std::shared_ptr<const Atlas> sphere, const std::vector<int>& degrees) {
  if (sphere->chart_count() != 2 || sphere->dim() != 2)
    throw std::invalid_argument("clutching bundles need the two-chart sphere atlas");
  if (degrees.empty()) throw std::invalid_argument("at least one degree required");
  auto g = std::make_shared<Cocycle>(sphere, static_cast<int>(degrees.size()));
  std::vector<Expr> d;
  for (int k : degrees) d.push_back(pow(z_coordinate(), k));
  // w = 1/z on the overlap, so g_{north,south}(w) = z^{-k} = w^k has the same form
  g->set(1, 0, 0, diagonal(d));
  g->set(0, 1, 0, diagonal(d));
  g->complete_inverses();
  return g;
}

std::shared_ptr<const Cocycle> clutching_bundle(std::shared_ptr<const Atlas> sphere, int k) {
  return clutching_sum(std::move(sphere), {k});
}

std::shared_ptr<const Cocycle> flat_circle_bundle(std::shared_ptr<const Atlas> circle, double theta) {
  if (circle->dim() != 1) throw std::invalid_argument("flat circle bundles need a one-dimensional atlas");
  auto g = std::make_shared<Cocycle>(circle, 1);
  for (int i = 0; i < circle->chart_count(); ++i)
    for (int j = 0; j < circle->chart_count(); ++j) {
      const auto& ts = circle->transitions(i, j);
      for (std::size_t c = 0; c < ts.size(); ++c) {
        double m = std::round(lattice_shift(ts[c]).x / (2 * pi));
        g->set(j, i, static_cast<int>(c), {Expr(std::polar(1.0, theta * m))});
      }
    }
  return g;
}

std::shared_ptr<const Cocycle> flat_torus_bundle(std::shared_ptr<const Atlas> torus, double theta1, double theta2) {
  if (torus->dim() != 2) throw std::invalid_argument("flat torus bundles need a two-dimensional atlas");
  auto g = std::make_shared<Cocycle>(torus, 1);
  for (int i = 0; i < torus->chart_count(); ++i)
    for (int j = 0; j < torus->chart_count(); ++j) {
      const auto& ts = torus->transitions(i, j);
      for (std::size_t c = 0; c < ts.size(); ++c) {
        Point s = lattice_shift(ts[c]);
        double m = std::round(s.x / (2 * pi)), n = std::round(s.y / (2 * pi));
        g->set(j, i, static_cast<int>(c), {Expr(std::polar(1.0, theta1 * m + theta2 * n))});
      }
    }
  return g;
}

std::shared_ptr<const Cocycle> torus_degree_bundle(std::shared_ptr<const Atlas> torus, int k) {
  if (torus->dim() != 2) throw std::invalid_argument("torus bundles need a two-dimensional atlas");
  auto g = std::make_shared<Cocycle>(torus, 1);
  for (int i = 0; i < torus->chart_count(); ++i)
    for (int j = 0; j < torus->chart_count(); ++j) {
      const auto& ts = torus->transitions(i, j);
      for (std::size_t c = 0; c < ts.size(); ++c) {
        double m = std::round(lattice_shift(ts[c]).x / (2 * pi));
        g->set(j, i, static_cast<int>(c), {exp(Expr(Complex(0, k * m)) * Expr::y())});
      }
    }
  return g;
}

// ---------------------------------------------------------------------------
// Verification

CocycleReport verify_cocycle(const Cocycle& g) {
  const Atlas& A = g.atlas();
  const int r = A.chart_count();
  const int n = g.rank();
  const NumMatrixForm one = num_identity(n, A.dim());
  CocycleReport rep;
  rep.min_abs_det = 1e300;
  for (int i = 0; i < r; ++i) {
    const auto& samples = A.chart(i).samples;
    struct Partial {
      double cocycle = 0, inverse = 0, det = 1e300;
      std::size_t triples = 0, overlaps = 0;
    };
    std::vector<Partial> partial(parallel::chunk_count(samples.size()));
    parallel::for_chunks(samples.size(), [&](std::size_t b, std::size_t e, std::size_t chunk) {
      std::vector<Complex> scratch;
      Partial acc;
      for (std::size_t s = b; s < e; ++s) {
        Point p = samples[s].at;
        const Region& reg = A.sample_regions(i)[idx(A.sample_region_index(i, s))];
        for (int j = 0; j < r; ++j) {
          if (j == i) continue;
          int cij = A.component(reg, i, j);
          if (cij < 0) continue;
          ++acc.overlaps;
          NumMatrixForm gji = g.evaluator(j, i, cij)(p, scratch);
          Point q = A.transitions(i, j)[idx(cij)].apply(p);
          NumMatrixForm gij = g.evaluator(i, j, A.component(reg, j, i))(q, scratch);
          acc.inverse = std::max(acc.inverse, (gij * gji - one).max_abs());
          acc.det = std::min(acc.det, std::abs(num_det(gji)));
          for (int k = 0; k < r; ++k) {
            if (k == i || k == j) continue;
            int cik = A.component(reg, i, k), cjk = A.component(reg, j, k);
            if (cik < 0 || cjk < 0) continue;
            ++acc.triples;
            NumMatrixForm gki = g.evaluator(k, i, cik)(p, scratch);
            NumMatrixForm gkj = g.evaluator(k, j, cjk)(q, scratch);
            acc.cocycle = std::max(acc.cocycle, (gkj * gji - gki).max_abs());
          }
        }
      }
      partial[chunk] = acc;
    });
    for (const auto& a : partial) {
      rep.max_cocycle_residual = std::max(rep.max_cocycle_residual, a.cocycle);
      rep.max_inverse_residual = std::max(rep.max_inverse_residual, a.inverse);
      rep.min_abs_det = std::min(rep.min_abs_det, a.det);
      rep.triple_points += a.triples;
      rep.overlap_points += a.overlaps;
    }
  }
  if (rep.overlap_points == 0) rep.min_abs_det = 0;
  return rep;
}

double verify_cohomologous(const Cocycle& g, const Cocycle& h, const CoboundaryWitness& lambda) {
  const Atlas& A = g.atlas();
  const int n = g.rank();
  if (h.rank() != n) throw RankMismatch("cocycles have ranks " + std::to_string(n) + " and " + std::to_string(h.rank()));
  if (&h.atlas() != &A) throw std::invalid_argument("cocycles live on different atlases");
  const int r = A.chart_count();
  if (static_cast<int>(lambda.size()) != r) throw std::invalid_argument("one gauge matrix per chart required");
  std::vector<MatrixFormEvaluator> lam;
  for (const auto& l : lambda) {
    if (l.size() != idx(n * n)) throw RankMismatch("gauge matrix does not match the bundle rank");
    lam.emplace_back(MatrixForm::functions(n, n, A.dim(), l));
  }
  double worst = 0;
  for (int i = 0; i < r; ++i) {
    const auto& samples = A.chart(i).samples;
    std::vector<double> partial(parallel::chunk_count(samples.size()));
    parallel::for_chunks(samples.size(), [&](std::size_t b, std::size_t e, std::size_t chunk) {
      std::vector<Complex> scratch;
      double acc = 0;
      for (std::size_t s = b; s < e; ++s) {
        Point p = samples[s].at;
        NumMatrixForm li = lam[idx(i)](p, scratch);
        num_inverse(li, p);  // singular gauge is an error everywhere on the chart
        const Region& reg = A.sample_regions(i)[idx(A.sample_region_index(i, s))];
        for (int j = 0; j < r; ++j) {
          if (j == i) continue;
          int c = A.component(reg, i, j);
          if (c < 0) continue;
          Point q = A.transitions(i, j)[idx(c)].apply(p);
          NumMatrixForm lj_inv = num_inverse(lam[idx(j)](q, scratch), q);
          NumMatrixForm rhs = lj_inv * g.evaluator(j, i, c)(p, scratch) * li;
          acc = std::max(acc, (h.evaluator(j, i, c)(p, scratch) - rhs).max_abs());
        }
      }
      partial[chunk] = acc;
    });
    for (double v : partial) worst = std::max(worst, v);
  }
  return worst;
}

std::shared_ptr<const Cocycle> refine_cocycle(const Cocycle& g, std::shared_ptr<const Atlas> refined,
                                              const std::vector<int>& parent) {
  const Atlas& A = g.atlas();
  if (static_cast<int>(parent.size()) != refined->chart_count())
    throw std::invalid_argument("one parent chart per patch required");
  auto out = std::make_shared<Cocycle>(refined, g.rank());
  for (int a = 0; a < refined->chart_count(); ++a)
    for (int b = 0; b < refined->chart_count(); ++b) {
      const int i = parent[idx(a)], j = parent[idx(b)];
      const std::size_t comps = refined->transitions(a, b).size();
      if (comps != A.transitions(i, j).size())
        throw std::invalid_argument("refined atlas does not inherit the parent overlap maps");
      for (std::size_t c = 0; c < comps; ++c) {
        if (i == j)
          out->set(b, a, static_cast<int>(c), identity_entries(g.rank()));
        else
          out->set(b, a, static_cast<int>(c), g.matrix(j, i, static_cast<int>(c)).flatten());
      }
    }
  return out;
}

}  // namespace fibre
