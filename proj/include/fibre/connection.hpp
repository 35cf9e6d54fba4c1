#pragma once

// Connections assembled from a cocycle and a partition of unity, their
// curvature, and pointwise verification of the transformation laws.

#include <functional>
#include <map>
#include <memory>
#include <mutex>

#include "fibre/cocycle.hpp"

namespace fibre {

/// Chart-local matrix-valued form given piecewise by region. Symbolic pieces
/// and their compiled evaluators are built once per (chart, region).
class MatrixFormField {
 public:
  using Builder = std::function<MatrixForm(int chart, const Region& region)>;

  MatrixFormField(std::shared_ptr<const Atlas> atlas, Builder builder);

  const Atlas& atlas() const { return *atlas_; }
  const std::shared_ptr<const Atlas>& atlas_ptr() const { return atlas_; }
  const MatrixForm& at(int chart, const Region& region) const;
  const MatrixFormEvaluator& evaluator(int chart, const Region& region) const;
  /// Value at a point of `chart`; the region is computed from the point.
  NumMatrixForm value(int chart, Point p, std::vector<Complex>& scratch) const;
  /// Value at sample k of `chart`.
  NumMatrixForm sample_value(int chart, std::size_t k, std::vector<Complex>& scratch) const;

 private:
  struct Piece {
    MatrixForm form;
    MatrixFormEvaluator eval;
  };
  const Piece& piece(int chart, const Region& region) const;

  std::shared_ptr<const Atlas> atlas_;
  Builder builder_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, Region>, std::unique_ptr<Piece>> cache_;
};

struct Connection {
  std::shared_ptr<const Cocycle> cocycle;
  std::shared_ptr<const MatrixFormField> gamma;  // rank x rank 1-forms
};

/// Gamma_c = sum_k alpha_k g_ck dg_kc, assembled symbolically per region.
Connection connection_from_partition(std::shared_ptr<const Cocycle> g,
                                     std::shared_ptr<const PartitionOfUnity> partition);

/// Connection with an arbitrary chart-local builder (for perturbations).
Connection make_connection(std::shared_ptr<const Cocycle> g, MatrixFormField::Builder builder);

/// R = dGamma + Gamma ^ Gamma.
std::shared_ptr<const MatrixFormField> curvature(const Connection& conn);

/// max |Gamma_i - (g_ij Gamma_j g_ji + g_ij dg_ji)| over overlap samples,
/// with Gamma_j pulled back to chart i.
double verify_gluing(const Connection& conn);

/// max |R_i - g_ij R_j g_ji| over overlap samples.
double verify_tensoriality(const Connection& conn, const MatrixFormField& curv);

/// max |Gamma ^ Gamma - [Gamma, Gamma] / 2| and max |dR - (R Gamma - Gamma R)| over all samples.
struct StructureReport {
  double commutator_residual = 0;
  double bianchi_residual = 0;
};
StructureReport verify_structure(const Connection& conn, const MatrixFormField& curv);

/// Maximum over every sample of every chart of fn(chart, sample index, region, scratch).
double max_over_samples(const Atlas& atlas,
                        const std::function<double(int, std::size_t, const Region&, std::vector<Complex>&)>& fn);

/// Maximum over samples p of chart i lying in U_i n U_j (i != j) of
/// fn(i, j, component, p, q, region_p, scratch), q the image of p in chart j.
double max_over_overlaps(const Atlas& atlas,
                         const std::function<double(int, int, int, Point, Point, const Region&, std::vector<Complex>&)>& fn);

}  // namespace fibre
