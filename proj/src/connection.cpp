#include "fibre/connection.hpp"

#include <algorithm>

#include "fibre/parallel.hpp"

namespace fibre {

namespace {

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

MatrixForm substituted(const MatrixForm& m, const Transition& t) {
  std::vector<Expr> entries = m.flatten();
  for (auto& e : entries) e = substitute(e, t.map_x(), t.map_y());
  return MatrixForm::functions(m.rows(), m.cols(), m.dim(), entries);
}

}  // namespace

MatrixFormField::MatrixFormField(std::shared_ptr<const Atlas> atlas, Builder builder)
    : atlas_(std::move(atlas)), builder_(std::move(builder)) {}

const MatrixFormField::Piece& MatrixFormField::piece(int chart, const Region& region) const {
  auto key = std::make_pair(chart, region);
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  auto p = std::make_unique<Piece>();
  p->form = builder_(chart, region);
  p->eval = MatrixFormEvaluator(p->form);
  std::lock_guard lock(mu_);
  auto [it, inserted] = cache_.emplace(std::move(key), std::move(p));
  return *it->second;
}

const MatrixForm& MatrixFormField::at(int chart, const Region& region) const { return piece(chart, region).form; }

const MatrixFormEvaluator& MatrixFormField::evaluator(int chart, const Region& region) const {
  return piece(chart, region).eval;
}

NumMatrixForm MatrixFormField::value(int chart, Point p, std::vector<Complex>& scratch) const {
  return evaluator(chart, atlas_->region(chart, p))(p, scratch);
}

NumMatrixForm MatrixFormField::sample_value(int chart, std::size_t k, std::vector<Complex>& scratch) const {
  const Region& reg = atlas_->sample_regions(chart)[idx(atlas_->sample_region_index(chart, k))];
  return evaluator(chart, reg)(atlas_->chart(chart).samples[k].at, scratch);
}

// ---------------------------------------------------------------------------

Connection make_connection(std::shared_ptr<const Cocycle> g, MatrixFormField::Builder builder) {
  auto field = std::make_shared<MatrixFormField>(g->atlas_ptr(), std::move(builder));
  return Connection{std::move(g), std::move(field)};
}

Connection connection_from_partition(std::shared_ptr<const Cocycle> g,
                                     std::shared_ptr<const PartitionOfUnity> partition) {
  if (partition->atlas_ptr() != g->atlas_ptr())
    throw std::invalid_argument("partition and cocycle live on different atlases");
  auto builder = [G = g, partition](int c, const Region& reg) {
    const Atlas& A = G->atlas();
    const int n = G->rank();
    MatrixForm gamma(n, n, A.dim(), 1);
    const auto& alpha = partition->local(c, reg).alpha;
    for (int k = 0; k < A.chart_count(); ++k) {
      const int ck = A.component(reg, c, k);
      if (k == c || ck < 0 || alpha[idx(k)].is_zero()) continue;
      const Transition& t = A.transitions(c, k)[idx(ck)];
      MatrixForm g_ck = substituted(G->matrix(c, k, A.component(reg, k, c)), t);
      MatrixForm dg_kc = exterior_derivative(G->matrix(k, c, ck));
      gamma = gamma + alpha[idx(k)] * (g_ck * dg_kc);
    }
    return gamma;
  };
  return make_connection(std::move(g), builder);
}

std::shared_ptr<const MatrixFormField> curvature(const Connection& conn) {
  auto gamma = conn.gamma;
  return std::make_shared<MatrixFormField>(gamma->atlas_ptr(), [gamma](int c, const Region& reg) {
    const MatrixForm& G = gamma->at(c, reg);
    return exterior_derivative(G) + G * G;
  });
}

// ---------------------------------------------------------------------------

double max_over_samples(const Atlas& atlas,
                        const std::function<double(int, std::size_t, const Region&, std::vector<Complex>&)>& fn) {
  double worst = 0;
  for (int c = 0; c < atlas.chart_count(); ++c) {
    const std::size_t count = atlas.chart(c).samples.size();
    std::vector<double> partial(parallel::chunk_count(count));
    parallel::for_chunks(count, [&](std::size_t b, std::size_t e, std::size_t chunk) {
      std::vector<Complex> scratch;
      double acc = 0;
      for (std::size_t k = b; k < e; ++k)
        acc = std::max(acc, fn(c, k, atlas.sample_regions(c)[idx(atlas.sample_region_index(c, k))], scratch));
      partial[chunk] = acc;
    });
    for (double v : partial) worst = std::max(worst, v);
  }
  return worst;
}

double max_over_overlaps(const Atlas& atlas,
                         const std::function<double(int, int, int, Point, Point, const Region&, std::vector<Complex>&)>& fn) {
  return max_over_samples(atlas, [&](int i, std::size_t k, const Region& reg, std::vector<Complex>& scratch) {
    Point p = atlas.chart(i).samples[k].at;
    double acc = 0;
    for (int j = 0; j < atlas.chart_count(); ++j) {
      const int c = atlas.component(reg, i, j);
      if (j == i || c < 0) continue;
      Point q = atlas.transitions(i, j)[idx(c)].apply(p);
      acc = std::max(acc, fn(i, j, c, p, q, reg, scratch));
    }
    return acc;
  });
}

double verify_gluing(const Connection& conn) {
  const Cocycle& g = *conn.cocycle;
  const Atlas& A = g.atlas();
  const MatrixFormField& gamma = *conn.gamma;
  return max_over_overlaps(A, [&](int i, int j, int c, Point p, Point q, const Region& reg,
                                  std::vector<Complex>& scratch) {
    NumMatrixForm gi = gamma.evaluator(i, reg)(p, scratch);
    NumMatrixForm gj = pullback(gamma.value(j, q, scratch), A.transitions(i, j)[idx(c)].jacobian(p));
    NumMatrixForm g_ij = g.evaluator(i, j, A.component(reg, j, i))(q, scratch);
    NumMatrixForm g_ji = g.evaluator(j, i, c)(p, scratch);
    NumMatrixForm dg_ji = g.derivative_evaluator(j, i, c)(p, scratch);
    return (gi - (g_ij * gj * g_ji + g_ij * dg_ji)).max_abs();
  });
}

double verify_tensoriality(const Connection& conn, const MatrixFormField& curv) {
  const Cocycle& g = *conn.cocycle;
  const Atlas& A = g.atlas();
  return max_over_overlaps(A, [&](int i, int j, int c, Point p, Point q, const Region& reg,
                                  std::vector<Complex>& scratch) {
    NumMatrixForm ri = curv.evaluator(i, reg)(p, scratch);
    NumMatrixForm rj = pullback(curv.value(j, q, scratch), A.transitions(i, j)[idx(c)].jacobian(p));
    NumMatrixForm g_ij = g.evaluator(i, j, A.component(reg, j, i))(q, scratch);
    NumMatrixForm g_ji = g.evaluator(j, i, c)(p, scratch);
    return (ri - g_ij * rj * g_ji).max_abs();
  });
}

StructureReport verify_structure(const Connection& conn, const MatrixFormField& curv) {
  const Atlas& A = conn.gamma->atlas();
  const MatrixFormField& gamma = *conn.gamma;
  MatrixFormField comm(conn.gamma->atlas_ptr(), [&](int c, const Region& reg) {
    const MatrixForm& G = gamma.at(c, reg);
    return G * G - Expr(0.5) * graded_commutator(G, G);
  });
  MatrixFormField bianchi(conn.gamma->atlas_ptr(), [&](int c, const Region& reg) {
    const MatrixForm& G = gamma.at(c, reg);
    const MatrixForm& R = curv.at(c, reg);
    return exterior_derivative(R) - (R * G - G * R);
  });
  StructureReport rep;
  rep.commutator_residual = max_over_samples(A, [&](int c, std::size_t k, const Region&, std::vector<Complex>& s) {
    return comm.sample_value(c, k, s).max_abs();
  });
  rep.bianchi_residual = max_over_samples(A, [&](int c, std::size_t k, const Region&, std::vector<Complex>& s) {
    return bianchi.sample_value(c, k, s).max_abs();
  });
  return rep;
}

}  // namespace fibre
