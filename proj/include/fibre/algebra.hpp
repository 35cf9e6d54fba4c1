#pragma once

// Finite-dimensional unital associative algebras over Q given by structure
// constants, and the catalog of example algebras shipped as JSON data.

#include "json.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "fibre/rational.hpp"

namespace fibre {

/// Associativity or unit failure; `triple` names the offending basis indices
/// (for a unit failure only the first entry is meaningful).
class AlgebraError : public std::invalid_argument {
 public:
  AlgebraError(const std::string& what, std::array<int, 3> triple)
      : std::invalid_argument(what), triple_(triple) {}
  const std::array<int, 3>& triple() const { return triple_; }

 private:
  std::array<int, 3> triple_;
};

class SizeCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest vector-space dimension the algebraic engine will build. Defaults
/// to 5000; FIBRE_FORGE_SIZE_CAP overrides.
std::size_t size_cap();

using Vec = std::vector<Rational>;  // dense coordinates in the algebra basis

class FiniteDimAlgebra {
 public:
  /// table[i][j] = coordinates of e_i e_j. Validates associativity and the unit.
  FiniteDimAlgebra(std::string name, std::vector<std::string> labels, std::vector<std::vector<Vec>> table, Vec unit);

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Vec& product(int i, int j) const { return table_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  const Vec& unit() const { return unit_; }

  Vec multiply(const Vec& a, const Vec& b) const;
  Vec basis(int k) const;
  Vec zero() const { return Vec(static_cast<std::size_t>(dim()), 0); }

  // A-bar = A / Q.1 uses the basis vectors other than `unit_pivot()`.
  int unit_pivot() const { return pivot_; }
  int bar_dim() const { return dim() - 1; }
  /// Coordinates in A-bar of the class of e_k.
  const SparseVec& bar(int k) const { return bars_[static_cast<std::size_t>(k)]; }
  SparseVec bar(const Vec& a) const;
  /// Basis index of A lifting A-bar basis vector `b`.
  int lift(int b) const { return b < pivot_ ? b : b + 1; }

 private:
  std::string name_;
  std::vector<std::string> labels_;
  std::vector<std::vector<Vec>> table_;
  Vec unit_;
  int pivot_ = 0;
  std::vector<SparseVec> bars_;
};

/// Square matrix over the algebra; entries row-major.
struct AlgebraMatrix {
  std::string name;
  int size = 0;
  std::vector<Vec> entries;
  const Vec& at(int r, int c) const { return entries[static_cast<std::size_t>(r * size + c)]; }
};

AlgebraMatrix matrix_product(const FiniteDimAlgebra& a, const AlgebraMatrix& x, const AlgebraMatrix& y);
bool is_idempotent(const FiniteDimAlgebra& a, const AlgebraMatrix& q);
/// Exact inverse; throws std::domain_error if singular.
AlgebraMatrix matrix_inverse(const FiniteDimAlgebra& a, const AlgebraMatrix& u);

struct CatalogAlgebra {
  FiniteDimAlgebra algebra;
  std::vector<AlgebraMatrix> idempotents;
  std::vector<AlgebraMatrix> invertibles;
};

/// Parses {"name", "basis", "unit", "table", optional "idempotents", "invertibles"}.
CatalogAlgebra algebra_from_json(const nlohmann::json& j);
/// Loads data/algebras/<name>.json.
CatalogAlgebra load_catalog_algebra(const std::string& name);
std::vector<std::string> catalog_algebra_names();
AlgebraMatrix matrix_from_json(const FiniteDimAlgebra& a, const nlohmann::json& j);

}  // namespace fibre
