#pragma once

// Transition cocycles of complex vector bundles over a catalog atlas.
//
// g_ji is stored per connected component of U_i n U_j, in chart-i
// coordinates, with the component numbered as in atlas.transitions(i, j).
// At a point p of chart i the component is atlas.component(region, i, j).

#include <memory>
#include <mutex>
#include <vector>

#include "fibre/forms.hpp"
#include "fibre/geometry.hpp"

namespace fibre {

class RankMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Cocycle {
 public:
  Cocycle(std::shared_ptr<const Atlas> atlas, int rank);

  const Atlas& atlas() const { return *atlas_; }
  const std::shared_ptr<const Atlas>& atlas_ptr() const { return atlas_; }
  int rank() const { return rank_; }

  /// g_ji on component `comp` of U_i n U_j; entries row-major, chart-i coordinates.
  void set(int j, int i, int comp, const std::vector<Expr>& entries);
  bool has(int j, int i, int comp) const;
  /// Degree-0 matrix form; throws std::out_of_range when unset.
  const MatrixForm& matrix(int j, int i, int comp) const;
  const MatrixFormEvaluator& evaluator(int j, int i, int comp) const;
  /// Evaluator of dg_ji in chart-i coordinates.
  const MatrixFormEvaluator& derivative_evaluator(int j, int i, int comp) const;

  /// Fills every unset g_ij from g_ji by symbolic inversion and a change of
  /// coordinates, and sets g_ii = 1.
  void complete_inverses();

 private:
  struct Entry {
    MatrixForm g;
    MatrixFormEvaluator eval;
    mutable std::unique_ptr<MatrixFormEvaluator> deval;
  };
  const Entry& entry(int j, int i, int comp) const;

  std::shared_ptr<const Atlas> atlas_;
  int rank_;
  std::vector<std::vector<std::vector<std::unique_ptr<Entry>>>> entries_;  // [j][i][comp]
  mutable std::mutex mu_;
};

/// Symbolic inverse of a square matrix of functions (cofactor expansion).
std::vector<Expr> symbolic_inverse(const std::vector<Expr>& m, int n);

// Catalog bundles.
std::shared_ptr<const Cocycle> trivial_bundle(std::shared_ptr<const Atlas> atlas, int rank);
/// Line bundle on sphere2 with g_{south,north} = (x+iy)^k in north coordinates.
std::shared_ptr<const Cocycle> clutching_bundle(std::shared_ptr<const Atlas> sphere, int k);
/// diag((x+iy)^k_1, ..., (x+iy)^k_n) on sphere2.
std::shared_ptr<const Cocycle> clutching_sum(std::shared_ptr<const Atlas> sphere, const std::vector<int>& degrees);
/// Flat line bundle on circle3 with holonomy exp(i theta): g_ji = exp(i theta m)
/// on the component where chart j's coordinate is chart i's plus 2 pi m.
std::shared_ptr<const Cocycle> flat_circle_bundle(std::shared_ptr<const Atlas> circle, double theta);
/// Flat line bundle on torus4 with holonomies exp(i theta_1), exp(i theta_2).
std::shared_ptr<const Cocycle> flat_torus_bundle(std::shared_ptr<const Atlas> torus, double theta1, double theta2);
/// Line bundle on torus4 with g_ji = exp(i k m y) for the lattice shift 2 pi (m, n);
/// its first Chern number is -k.
std::shared_ptr<const Cocycle> torus_degree_bundle(std::shared_ptr<const Atlas> torus, int k);

struct CocycleReport {
  double max_cocycle_residual = 0;  // |g_kj g_ji - g_ki| on triple overlaps
  double max_inverse_residual = 0;  // |g_ij g_ji - 1|
  double min_abs_det = 0;
  std::size_t triple_points = 0;
  std::size_t overlap_points = 0;
};

/// Checks the cocycle identities at every sample of every overlap.
CocycleReport verify_cocycle(const Cocycle& g);

/// Chart-wise gauge change lambda_i (rank x rank, chart-i coordinates).
using CoboundaryWitness = std::vector<std::vector<Expr>>;

/// max |h_ji - lambda_j^{-1} g_ji lambda_i| over overlap samples. Throws
/// RankMismatch, or DomainError where some lambda_i is singular.
double verify_cohomologous(const Cocycle& g, const Cocycle& h, const CoboundaryWitness& lambda);

/// Cocycle of `g` restricted to a refinement built by refine_atlas.
std::shared_ptr<const Cocycle> refine_cocycle(const Cocycle& g, std::shared_ptr<const Atlas> refined,
                                              const std::vector<int>& parent);

}  // namespace fibre
