#pragma once

// Exact noncommutative differential forms, the commutator quotient complex,
// Hochschild and cyclic homology, and the algebraic Chern character.
//
// Omega^n(A) and the normalized Hochschild chains share the model A (x) Abar^n
// with basis (alpha; beta_1..beta_n), index alpha*(m-1)^n + sum beta_i (m-1)^(n-i).

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fibre/algebra.hpp"

namespace fibre {

/// Ker(outgoing) / Im(incoming) on a space of dimension `dim`, with chosen
/// cycle representatives and a coordinate map on classes.
class HomologyGroup {
 public:
  HomologyGroup() = default;
  /// outgoing: columns indexed by the space; incoming: maps into the space.
  HomologyGroup(std::size_t dim, const SparseMatrix* outgoing, const SparseMatrix* incoming);

  std::size_t dim() const { return reps_.size(); }
  const std::vector<SparseVec>& representatives() const { return reps_; }
  std::size_t cycles_dim() const { return cycles_; }
  std::size_t boundaries_dim() const { return boundaries_; }
  /// Coordinates of the class of `cycle`; throws std::domain_error if it is not a cycle.
  SparseVec coordinates(const SparseVec& cycle) const;
  bool is_boundary(const SparseVec& v) const;

 private:
  std::vector<SparseVec> reps_;
  std::size_t cycles_ = 0;
  std::size_t boundaries_ = 0;
  Echelon basis_{true};
};

/// Omega*(A) with differential and product.
class OmegaAlgebra {
 public:
  explicit OmegaAlgebra(FiniteDimAlgebra a, std::size_t cap = size_cap());

  const FiniteDimAlgebra& algebra() const { return a_; }
  /// m (m-1)^n; throws SizeCapExceeded above the cap.
  std::size_t dim(int n) const;
  std::size_t index(int alpha, const std::vector<int>& beta) const;
  void decode(int n, std::size_t idx, int& alpha, std::vector<int>& beta) const;

  /// out += c * (a0 (x) bar_1 (x) ... (x) bar_n), a0 in A coordinates, bars in Abar coordinates.
  void add_term(SparseVec& out, const Rational& c, const SparseVec& a0, const std::vector<SparseVec>& bars) const;

  SparseVec embed(const Vec& a) const;         // a in Omega^0
  SparseVec differential(const Vec& a) const;  // da in Omega^1
  SparseVec d(int n, const SparseVec& x) const;
  SparseMatrix d_matrix(int n) const;          // Omega^n -> Omega^(n+1)
  SparseVec multiply(int p, const SparseVec& x, int q, const SparseVec& y) const;
  SparseVec left(int n, const Vec& a, const SparseVec& x) const;
  SparseVec right(int n, const SparseVec& x, const Vec& a) const;

  /// Degree-n generators of the graded commutator subspace: [a, theta] for
  /// theta in Omega^n and [da, theta'] for theta' in Omega^(n-1), with a
  /// running over a basis of A (resp. Abar).
  std::vector<SparseVec> commutator_generators(int n) const;
  /// All [omega, theta] over basis pairs of total degree n (slow, for cross-checks).
  std::vector<SparseVec> commutator_all_pairs(int n) const;

 private:
  const SparseVec& right_basis(int n, std::size_t idx, int b) const;
  SparseVec multiply_basis(int p, std::size_t i, int q, std::size_t j) const;
  std::size_t radix_pow(int n) const;

  FiniteDimAlgebra a_;
  std::size_t cap_;
  mutable std::map<std::tuple<int, std::size_t, int>, SparseVec> right_cache_;
};

/// The cyclic quotient A^(n+1) / (1 - t) with t(a0,...,an) = (-1)^n (an,a0,...,a(n-1)).
struct LambdaSpace {
  int n = 0;
  std::size_t tuples = 0;            // m^(n+1)
  std::vector<std::size_t> orbit;    // tuple -> orbit id, or npos when the orbit vanishes
  std::vector<int> sign;             // tuple = sign * representative of its orbit
  std::vector<std::size_t> reps;     // orbit id -> representative tuple
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t dim() const { return reps.size(); }
};

struct HbarKernelRow {
  int n = 0;
  std::size_t hbar = 0;        // dim Hbar_n (reduced when n = 0)
  std::size_t hc = 0;
  std::size_t hc_reduced = 0;
  std::size_t hh_next = 0;     // dim HH_(n+1)
  std::size_t b_rank = 0;      // rank of B_* on HCbar_n
  std::size_t kernel = 0;
  bool pass = false;
};

/// Replaces the chain-level image B(orbit) (fault injection in tests).
using BHook = std::function<SparseVec(int n, std::size_t orbit, SparseVec image)>;

/// Lazily computed homological data of one algebra. Not thread-safe.
class NcEngine {
 public:
  explicit NcEngine(FiniteDimAlgebra a, std::size_t cap = size_cap());

  const OmegaAlgebra& omega() const { return omega_; }
  const FiniteDimAlgebra& algebra() const { return omega_.algebra(); }

  // commutator quotient complex
  const Echelon& commutators(int n);
  std::size_t reduced_dim(int n);
  /// Coordinates in the quotient basis of Omegabar^n.
  SparseVec project(int n, const SparseVec& v);
  /// Omega^n element representing quotient basis vector k.
  SparseVec lift(int n, std::size_t k);
  const SparseMatrix& dbar(int n);
  const HomologyGroup& nc_homology(int n);
  /// dim Hbar_0 modulo the class of 1 (equals nc_homology(n).dim() for n > 0).
  std::size_t nc_homology_reduced_dim(int n);

  // normalized Hochschild complex
  SparseVec hochschild_b(int n, const SparseVec& x) const;  // Cbar_n -> Cbar_(n-1)
  const SparseMatrix& b_matrix(int n);
  const HomologyGroup& hochschild(int n);
  /// Normalized B(a0,...,an) = sum_i (-1)^(ni) (1, a_i, ..., a_n, a_0, ..., a_(i-1)), Cbar_n -> Cbar_(n+1).
  SparseVec connes_B(int n, const SparseVec& x) const;
  SparseMatrix connes_B_matrix(int n);

  // cyclic complex
  const LambdaSpace& lambda(int n);
  const SparseMatrix& lambda_b(int n);  // C^lambda_n -> C^lambda_(n-1)
  const HomologyGroup& cyclic(int n);
  /// dim HC_n minus one when the class of 1^(n+1) is nonzero.
  std::size_t cyclic_reduced_dim(int n);
  /// Chain-level B of an orbit representative into Cbar_(n+1).
  SparseVec lambda_B(int n, std::size_t orbit);

  /// Kernel of B_*: HCbar_n -> HH_(n+1).
  HbarKernelRow connes_B_kernel(int n, const BHook& hook = nullptr);

 private:
  struct Slice {
    std::optional<Echelon> comm;
    std::vector<std::size_t> quotient_cols;
    std::map<std::size_t, std::size_t> col_index;
    std::optional<SparseMatrix> dbar;
    std::optional<HomologyGroup> hbar;
    std::optional<SparseMatrix> b;
    std::optional<HomologyGroup> hh;
    std::optional<LambdaSpace> lambda;
    std::optional<SparseMatrix> lambda_b;
    std::optional<HomologyGroup> hc;
  };
  Slice& slice(int n);
  SparseVec tuple_to_lambda(int n, const SparseVec& tuples);
  SparseVec unit_tensor(int n);  // 1^(n+1) in C^lambda_n

  OmegaAlgebra omega_;
  std::size_t cap_;
  std::map<int, Slice> slices_;
};

/// Per-degree comparison for 1 <= n <= n_max, plus the reduced degree-0 row first.
std::vector<HbarKernelRow> verify_hbar_kernel(NcEngine& e, int n_max, const BHook& hook = nullptr);

struct IdentityReport {
  int max_degree = 0;
  bool dimensions = true;   // dim Omega^n = m (m-1)^n and Omega^1 = Ker(A (x) A -> A)
  bool d_squared = true;    // d d = 0 into degrees <= max_degree
  bool leibniz = true;      // on basis pairs with deg(omega theta) + 1 <= max_degree
  bool d_stable = true;     // d of commutator generators lands in the commutator subspace
  std::size_t leibniz_pairs = 0;
  std::string first_failure;
  bool pass() const { return dimensions && d_squared && leibniz && d_stable; }
};

/// Exact checks of the differential graded structure up to `max_degree`.
IdentityReport verify_identities(NcEngine& e, int max_degree);

/// Human-readable basis label of Omega^n, e.g. "E11 dE12 dE21".
std::string form_label(const FiniteDimAlgebra& a, const OmegaAlgebra& om, int n, std::size_t idx);

/// Normalisation 1/((2 pi i)^p p!) kept as text; it never changes a kernel or an image.
std::string chern_tag(int p);

struct AlgebraicChern {
  int p = 0;
  std::string normalisation;
  SparseVec representative;  // Trace(Q (dQ)^(2p)) in Omega^(2p)
  SparseVec reduced;         // its image in Omegabar^(2p)
  bool closed = false;       // dbar(reduced) == 0
  SparseVec class_coordinates;
};

/// Trace(Q (dQ)^k) (with_q) or Trace((dQ)^k) in Omega^k.
SparseVec trace_form(const OmegaAlgebra& om, const AlgebraMatrix& q, int k, bool with_q);
/// Throws std::invalid_argument if Q is not idempotent.
AlgebraicChern chern_idempotent(NcEngine& e, const AlgebraMatrix& q, int p);
/// Whether Trace((dQ)^(2p+1)) vanishes in Omegabar^(2p+1).
bool odd_trace_vanishes(NcEngine& e, const AlgebraMatrix& q, int p);

struct ConjugationReport {
  int p = 0;
  bool conjugate_idempotent = false;
  bool difference_zero = false;   // Ch(uQu^-1) - Ch(Q) is already 0 in Omegabar^(2p)
  bool in_image = false;          // ... lies in Im dbar
  std::size_t difference_terms = 0;
};

/// Throws std::domain_error if u is singular.
ConjugationReport verify_chern_invariance_alg(NcEngine& e, const AlgebraMatrix& q, const AlgebraMatrix& u, int p);

}  // namespace fibre
