#pragma once

// Chern character forms from curvature and from the projector of a bundle,
// their integrals, and the checks that tie both routes together.

#include <memory>

#include "fibre/connection.hpp"

namespace fibre {

/// 1 / ((2 pi i)^p p!).
Complex chern_normalisation(int p);

/// Ch_p = (1/((2 pi i)^p p!)) Tr R^p as a 1x1 field of degree 2p.
std::shared_ptr<const MatrixFormField> chern_form(std::shared_ptr<const MatrixFormField> curv, int p);

/// max |d Ch| over all samples.
double closedness_residual(const MatrixFormField& ch);
/// max |Ch_i - phi* Ch_j| over overlap samples.
double overlap_mismatch(const MatrixFormField& ch);

struct ChernNumber {
  Complex value;
  long nearest = 0;
  double integrality_gap = 0;  // |value - nearest|, imaginary part included
};

/// Integral of a top-degree Chern form; throws DegreeMismatch otherwise.
ChernNumber chern_number(const PartitionOfUnity& partition, const MatrixFormField& ch);

/// Rank-n bundle projector Q on C^{r n}: block (i, j) = beta_i beta_j g_ij in
/// every chart. Throws std::invalid_argument when the partition is not
/// supported inside the overlaps where the cocycle is defined.
std::shared_ptr<const MatrixFormField> build_projector(std::shared_ptr<const Cocycle> g,
                                                       std::shared_ptr<const PartitionOfUnity> partition);

struct ProjectorReport {
  double idempotency = 0;     // max |Q^2 - Q|
  double trace_residual = 0;  // max |Tr Q - n|
};
ProjectorReport verify_projector(const MatrixFormField& q, int rank);

/// (1/((2 pi i)^p p!)) Tr(Q (dQ)^{2p}).
std::shared_ptr<const MatrixFormField> chern_from_projector(std::shared_ptr<const MatrixFormField> q, int p);

struct InvarianceReport {
  double closedness = 0;
  double overlap_mismatch = 0;
  bool has_integrals = false;  // only for top degree
  Complex integral_a, integral_b;
  double integral_delta = 0;
};

/// Compares Ch_p built from two partitions of unity.
InvarianceReport verify_chern_invariance(std::shared_ptr<const Cocycle> g,
                                         std::shared_ptr<const PartitionOfUnity> a,
                                         std::shared_ptr<const PartitionOfUnity> b, int p);

}  // namespace fibre
