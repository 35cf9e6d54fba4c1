#pragma once

// Exact sparse linear algebra over Q.

#include <gmpxx.h>

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace fibre {

using Rational = mpq_class;
using SparseVec = std::map<std::size_t, Rational>;

/// Parses "p", "-p/q" or a decimal literal into an exact rational.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);

void axpy(SparseVec& y, const Rational& a, const SparseVec& x);  // y += a x
SparseVec scaled(const SparseVec& x, const Rational& a);

/// Incremental row echelon form. Each stored row has a distinct leading
/// index (its pivot) with coefficient 1. Optionally remembers, for every
/// stored row, which combination of inserted vectors produced it.
class Echelon {
 public:
  explicit Echelon(bool track = false) : track_(track) {}

  /// Reduces v against the stored rows; returns the remainder. When `tag`
  /// is given it receives the combination of inserted vectors subtracted.
  SparseVec reduce(SparseVec v, SparseVec* tag = nullptr) const;
  /// Inserts v with identifier `id` (used in tags). Returns true if v was
  /// independent of the stored rows. When tracking, a dependent v records
  /// the relation in relations().
  bool insert(const SparseVec& v, std::size_t id = 0);
  /// Inserts v with an empty tag and records no relation, so tags and
  /// coordinates only see vectors added through insert().
  bool insert_untagged(const SparseVec& v);
  bool contains(const SparseVec& v) const { return reduce(v).empty(); }

  std::size_t rank() const { return rows_.size(); }
  bool is_pivot(std::size_t col) const { return rows_.count(col) != 0; }
  /// Tracked relations sum_i c_i v_i = 0 among inserted vectors.
  const std::vector<SparseVec>& relations() const { return relations_; }
  /// Expresses v (assumed in the span) as a combination of inserted vectors.
  SparseVec coordinates(const SparseVec& v) const;

 private:
  struct Row {
    SparseVec v;
    SparseVec tag;
  };
  bool add_row(SparseVec rem, SparseVec tag);

  bool track_;
  std::map<std::size_t, Row> rows_;
  std::vector<SparseVec> relations_;
};

/// Dense rational matrix stored as sparse columns (column k = image of basis vector k).
struct SparseMatrix {
  std::size_t rows = 0;
  std::vector<SparseVec> cols;

  SparseVec apply(const SparseVec& x) const;
  bool is_zero() const;
};

SparseMatrix compose(const SparseMatrix& a, const SparseMatrix& b);  // a after b
std::size_t rank(const SparseMatrix& m);

}  // namespace fibre
