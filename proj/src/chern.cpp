#include "fibre/chern.hpp"

#include <cmath>
#include <numbers>

namespace fibre {

namespace {

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

MatrixForm scalar_field(const Form& f) {
  MatrixForm m(1, 1, f.dim(), f.degree());
  m(0, 0) = f;
  return m;
}

}  // namespace

Complex chern_normalisation(int p) {
  Complex denom = 1;
  for (int k = 1; k <= p; ++k) denom *= Complex(0, 2 * std::numbers::pi) * static_cast<double>(k);
  return 1.0 / denom;
}

std::shared_ptr<const MatrixFormField> chern_form(std::shared_ptr<const MatrixFormField> curv, int p) {
  if (p < 0) throw std::invalid_argument("Chern degree must be non-negative");
  if (2 * p > curv->atlas().dim())
    throw DegreeMismatch("Ch_" + std::to_string(p) + " exceeds the manifold dimension");
  const Expr norm(chern_normalisation(p));
  return std::make_shared<MatrixFormField>(curv->atlas_ptr(), [curv, p, norm](int c, const Region& reg) {
    return norm * scalar_field(trace(power(curv->at(c, reg), p)));
  });
}

double closedness_residual(const MatrixFormField& ch) {
  MatrixFormField d(ch.atlas_ptr(), [&ch](int c, const Region& reg) { return exterior_derivative(ch.at(c, reg)); });
  return max_over_samples(ch.atlas(), [&d](int c, std::size_t k, const Region&, std::vector<Complex>& s) {
    return d.sample_value(c, k, s).max_abs();
  });
}

double overlap_mismatch(const MatrixFormField& ch) {
  const Atlas& A = ch.atlas();
  return max_over_overlaps(A, [&](int i, int j, int c, Point p, Point q, const Region& reg,
                                  std::vector<Complex>& scratch) {
    NumMatrixForm here = ch.evaluator(i, reg)(p, scratch);
    NumMatrixForm there = pullback(ch.value(j, q, scratch), A.transitions(i, j)[idx(c)].jacobian(p));
    return (here - there).max_abs();
  });
}

ChernNumber chern_number(const PartitionOfUnity& partition, const MatrixFormField& ch) {
  ChernNumber out;
  out.value = integrate(partition, [&ch](int c, const Region& reg) { return ch.at(c, reg)(0, 0); });
  out.nearest = std::lround(out.value.real());
  out.integrality_gap = std::abs(out.value - Complex(static_cast<double>(out.nearest), 0));
  return out;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const MatrixFormField> build_projector(std::shared_ptr<const Cocycle> g,
                                                       std::shared_ptr<const PartitionOfUnity> partition) {
  if (partition->atlas_ptr() != g->atlas_ptr())
    throw std::invalid_argument("partition and cocycle live on different atlases");
  auto builder = [g, partition](int c, const Region& reg) {
    const Atlas& A = g->atlas();
    const int r = A.chart_count(), n = g->rank();
    const auto& beta = partition->local(c, reg).beta;
    MatrixForm q(r * n, r * n, A.dim(), 0);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        const Expr w = beta[idx(i)] * beta[idx(j)];
        if (w.is_zero()) continue;
        MatrixForm block;
        if (i == j) {
          block = MatrixForm::identity(n, A.dim());
        } else {
          const int ji = A.component(reg, j, i);
          if (ji < 0)
            throw std::invalid_argument("partition functions of charts " + std::to_string(i) + " and " +
                                        std::to_string(j) + " overlap outside U_" + std::to_string(i) + " n U_" +
                                        std::to_string(j));
          std::vector<Expr> entries = g->matrix(i, j, ji).flatten();  // chart-j coordinates
          if (j != c) {
            const Transition& t = A.transitions(c, j)[idx(A.component(reg, c, j))];
            for (auto& e : entries) e = substitute(e, t.map_x(), t.map_y());
          }
          block = MatrixForm::functions(n, n, A.dim(), entries);
        }
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) q(i * n + a, j * n + b) = w * block(a, b);
      }
    return q;
  };
  return std::make_shared<MatrixFormField>(g->atlas_ptr(), builder);
}

ProjectorReport verify_projector(const MatrixFormField& q, int rank) {
  ProjectorReport rep;
  rep.idempotency = max_over_samples(q.atlas(), [&q](int c, std::size_t k, const Region&, std::vector<Complex>& s) {
    NumMatrixForm v = q.sample_value(c, k, s);
    return (v * v - v).max_abs();
  });
  rep.trace_residual = max_over_samples(q.atlas(), [&](int c, std::size_t k, const Region&, std::vector<Complex>& s) {
    NumMatrixForm v = q.sample_value(c, k, s);
    Complex tr = 0;
    for (int a = 0; a < v.rows; ++a) tr += v.at(a, a, 0);
    return std::abs(tr - Complex(rank, 0));
  });
  return rep;
}

std::shared_ptr<const MatrixFormField> chern_from_projector(std::shared_ptr<const MatrixFormField> q, int p) {
  if (p < 0) throw std::invalid_argument("Chern degree must be non-negative");
  if (2 * p > q->atlas().dim()) throw DegreeMismatch("Ch_" + std::to_string(p) + " exceeds the manifold dimension");
  const Expr norm(chern_normalisation(p));
  return std::make_shared<MatrixFormField>(q->atlas_ptr(), [q, p, norm](int c, const Region& reg) {
    const MatrixForm& Q = q->at(c, reg);
    return norm * scalar_field(trace(Q * power(exterior_derivative(Q), 2 * p)));
  });
}

InvarianceReport verify_chern_invariance(std::shared_ptr<const Cocycle> g,
                                         std::shared_ptr<const PartitionOfUnity> a,
                                         std::shared_ptr<const PartitionOfUnity> b, int p) {
  InvarianceReport rep;
  const bool top = 2 * p == g->atlas().dim();
  rep.has_integrals = top;
  for (int pass = 0; pass < 2; ++pass) {
    const auto& part = pass == 0 ? a : b;
    auto ch = chern_form(curvature(connection_from_partition(g, part)), p);
    rep.closedness = std::max(rep.closedness, closedness_residual(*ch));
    rep.overlap_mismatch = std::max(rep.overlap_mismatch, overlap_mismatch(*ch));
    if (top) (pass == 0 ? rep.integral_a : rep.integral_b) = chern_number(*part, *ch).value;
  }
  if (top) rep.integral_delta = std::abs(rep.integral_a - rep.integral_b);
  return rep;
}

}  // namespace fibre
