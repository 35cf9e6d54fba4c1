#pragma once

// Chart-local differential forms with expression coefficients, matrices of
// such forms, and their numerical counterparts at a single point.

#include <vector>

#include "fibre/expr.hpp"

namespace fibre {

/// Degree-q form on a d-dimensional chart (d in {1, 2}). Coefficients are
/// indexed by the increasing coordinate monomials dx^I, |I| = q; dx^dy is
/// stored once, with the sign absorbed into the coefficient.
class Form {
 public:
  Form() = default;
  Form(int dim, int degree);

  static Form function(int dim, const Expr& f);
  /// The coordinate 1-form dx_axis.
  static Form coordinate(int dim, int axis);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return coeffs_.size(); }
  Expr& operator[](std::size_t k) { return coeffs_[k]; }
  const Expr& operator[](std::size_t k) const { return coeffs_[k]; }
  const std::vector<Expr>& coefficients() const { return coeffs_; }
  bool is_zero() const;

  /// Bitmask of the k-th monomial (bit a set <=> dx_a present).
  static const std::vector<unsigned>& monomials(int dim, int degree);

  friend Form operator+(const Form& a, const Form& b);
  friend Form operator-(const Form& a, const Form& b);
  friend Form operator*(const Expr& f, const Form& a);
  Form& operator+=(const Form& o) { return *this = *this + o; }

 private:
  int dim_ = 2;
  int degree_ = 0;
  std::vector<Expr> coeffs_;
};

Form wedge(const Form& a, const Form& b);
Form exterior_derivative(const Form& a);

/// rows x cols matrix whose entries are forms of one common degree.
class MatrixForm {
 public:
  MatrixForm() = default;
  MatrixForm(int rows, int cols, int dim, int degree);

  static MatrixForm identity(int n, int dim);
  /// Degree-0 matrix from function entries (row-major).
  static MatrixForm functions(int rows, int cols, int dim, const std::vector<Expr>& entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int dim() const { return dim_; }
  int degree() const { return degree_; }
  Form& operator()(int r, int c) { return entries_[static_cast<std::size_t>(r * cols_ + c)]; }
  const Form& operator()(int r, int c) const { return entries_[static_cast<std::size_t>(r * cols_ + c)]; }
  bool is_zero() const;

  /// All coefficient expressions, entry-major then monomial.
  std::vector<Expr> flatten() const;
  std::size_t components() const { return Form::monomials(dim_, degree_).size(); }

  friend MatrixForm operator+(const MatrixForm& a, const MatrixForm& b);
  friend MatrixForm operator-(const MatrixForm& a, const MatrixForm& b);
  /// Matrix product with entries combined by the wedge product.
  friend MatrixForm operator*(const MatrixForm& a, const MatrixForm& b);
  friend MatrixForm operator*(const Expr& f, const MatrixForm& a);

 private:
  int rows_ = 0;
  int cols_ = 0;
  int dim_ = 2;
  int degree_ = 0;
  std::vector<Form> entries_;
};

MatrixForm exterior_derivative(const MatrixForm& m);
Form trace(const MatrixForm& m);
/// Wedge power m^k (k >= 0, square m); m^0 is the identity.
MatrixForm power(const MatrixForm& m, int k);
/// [a, b] = ab - (-1)^{deg a deg b} ba.
MatrixForm graded_commutator(const MatrixForm& a, const MatrixForm& b);

/// Value of a MatrixForm at one point: rows x cols x components, row-major.
struct NumMatrixForm {
  int rows = 0;
  int cols = 0;
  int dim = 2;
  int degree = 0;
  std::vector<Complex> data;

  std::size_t components() const { return Form::monomials(dim, degree).size(); }
  Complex& at(int r, int c, std::size_t k) { return data[(static_cast<std::size_t>(r * cols + c)) * components() + k]; }
  Complex at(int r, int c, std::size_t k) const {
    return data[(static_cast<std::size_t>(r * cols + c)) * components() + k];
  }
  double max_abs() const;
};

NumMatrixForm operator-(const NumMatrixForm& a, const NumMatrixForm& b);
NumMatrixForm operator+(const NumMatrixForm& a, const NumMatrixForm& b);
/// Products where one side is degree 0 (a plain complex matrix).
NumMatrixForm operator*(const NumMatrixForm& a, const NumMatrixForm& b);
NumMatrixForm scale(const NumMatrixForm& a, Complex s);
NumMatrixForm num_identity(int n, int dim);
/// Pulls a form expressed in target coordinates back along a map with
/// Jacobian `jac` (jac[a][b] = d target_a / d source_b), both dimension dim.
NumMatrixForm pullback(const NumMatrixForm& m, const std::vector<std::vector<double>>& jac);
/// Inverse of a degree-0 square matrix; throws DomainError if singular.
NumMatrixForm num_inverse(const NumMatrixForm& m, Point at);
Complex num_det(const NumMatrixForm& m);

/// Evaluates a MatrixForm through a compiled program of its coefficients.
class MatrixFormEvaluator {
 public:
  MatrixFormEvaluator() = default;
  explicit MatrixFormEvaluator(const MatrixForm& m);
  NumMatrixForm operator()(Point p, std::vector<Complex>& scratch) const;
  NumMatrixForm operator()(Point p) const;
  const MatrixForm& form() const { return form_; }

 private:
  MatrixForm form_;
  Program program_;
};

}  // namespace fibre
