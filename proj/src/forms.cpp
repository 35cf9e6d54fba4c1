#include "fibre/forms.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fibre {

namespace {

int popcount(unsigned m) { return std::popcount(m); }

// Sign of dx^I ^ dx^J relative to dx^{I u J} in increasing order.
int wedge_sign(unsigned I, unsigned J) {
  int inversions = 0;
  for (unsigned i = I; i; i &= i - 1) {
    int a = std::countr_zero(i);
    inversions += popcount(J & ((1u << a) - 1u));
  }
  return (inversions % 2) ? -1 : 1;
}

std::size_t index_of(int dim, int degree, unsigned mask) {
  const auto& mons = Form::monomials(dim, degree);
  for (std::size_t k = 0; k < mons.size(); ++k)
    if (mons[k] == mask) return k;
  throw std::logic_error("monomial not found");
}

void check_compatible(const Form& a, const Form& b) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) throw std::invalid_argument("form dimension/degree mismatch");
}

}  // namespace

const std::vector<unsigned>& Form::monomials(int dim, int degree) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::vector<unsigned>> table;
  std::lock_guard lock(mu);
  auto key = std::make_pair(dim, degree);
  auto it = table.find(key);
  if (it == table.end()) {
    std::vector<unsigned> mons;
    if (degree >= 0 && degree <= dim)
      for (unsigned m = 0; m < (1u << dim); ++m)
        if (popcount(m) == degree) mons.push_back(m);
    it = table.emplace(key, std::move(mons)).first;
  }
  return it->second;
}

Form::Form(int dim, int degree) : dim_(dim), degree_(degree), coeffs_(monomials(dim, degree).size()) {}

Form Form::function(int dim, const Expr& f) {
  Form r(dim, 0);
  r.coeffs_[0] = f;
  return r;
}

Form Form::coordinate(int dim, int axis) {
  Form r(dim, 1);
  r.coeffs_[index_of(dim, 1, 1u << axis)] = Expr(1.0);
  return r;
}

bool Form::is_zero() const {
  for (const auto& c : coeffs_)
    if (!c.is_zero()) return false;
  return true;
}

Form operator+(const Form& a, const Form& b) {
  check_compatible(a, b);
  Form r(a.dim_, a.degree_);
  for (std::size_t k = 0; k < r.coeffs_.size(); ++k) r.coeffs_[k] = a.coeffs_[k] + b.coeffs_[k];
  return r;
}

Form operator-(const Form& a, const Form& b) {
  check_compatible(a, b);
  Form r(a.dim_, a.degree_);
  for (std::size_t k = 0; k < r.coeffs_.size(); ++k) r.coeffs_[k] = a.coeffs_[k] - b.coeffs_[k];
  return r;
}

Form operator*(const Expr& f, const Form& a) {
  Form r(a.dim_, a.degree_);
  for (std::size_t k = 0; k < r.coeffs_.size(); ++k) r.coeffs_[k] = f * a.coeffs_[k];
  return r;
}

Form wedge(const Form& a, const Form& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("form dimension mismatch");
  const int dim = a.dim();
  Form r(dim, a.degree() + b.degree());
  if (r.size() == 0) return r;
  const auto& ma = Form::monomials(dim, a.degree());
  const auto& mb = Form::monomials(dim, b.degree());
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (std::size_t j = 0; j < mb.size(); ++j) {
      if ((ma[i] & mb[j]) || b[j].is_zero()) continue;
      Expr term = a[i] * b[j];
      std::size_t k = index_of(dim, r.degree(), ma[i] | mb[j]);
      r[k] = wedge_sign(ma[i], mb[j]) > 0 ? r[k] + term : r[k] - term;
    }
  }
  return r;
}

Form exterior_derivative(const Form& a) {
  const int dim = a.dim();
  Form r(dim, a.degree() + 1);
  if (r.size() == 0) return r;
  const auto& mons = Form::monomials(dim, a.degree());
  for (std::size_t i = 0; i < mons.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (int axis = 0; axis < dim; ++axis) {
      unsigned bit = 1u << axis;
      if (mons[i] & bit) continue;
      Expr partial = differentiate(a[i], axis);
      if (partial.is_zero()) continue;
      std::size_t k = index_of(dim, r.degree(), mons[i] | bit);
      r[k] = wedge_sign(bit, mons[i]) > 0 ? r[k] + partial : r[k] - partial;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

MatrixForm::MatrixForm(int rows, int cols, int dim, int degree)
    : rows_(rows), cols_(cols), dim_(dim), degree_(degree),
      entries_(static_cast<std::size_t>(rows * cols), Form(dim, degree)) {}

MatrixForm MatrixForm::identity(int n, int dim) {
  MatrixForm r(n, n, dim, 0);
  for (int i = 0; i < n; ++i) r(i, i)[0] = Expr(1.0);
  return r;
}

MatrixForm MatrixForm::functions(int rows, int cols, int dim, const std::vector<Expr>& entries) {
  if (entries.size() != static_cast<std::size_t>(rows * cols)) throw std::invalid_argument("entry count mismatch");
  MatrixForm r(rows, cols, dim, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) r.entries_[k][0] = entries[k];
  return r;
}

bool MatrixForm::is_zero() const {
  for (const auto& f : entries_)
    if (!f.is_zero()) return false;
  return true;
}

std::vector<Expr> MatrixForm::flatten() const {
  std::vector<Expr> out;
  out.reserve(entries_.size() * components());
  for (const auto& f : entries_)
    for (std::size_t k = 0; k < f.size(); ++k) out.push_back(f[k]);
  return out;
}

MatrixForm operator+(const MatrixForm& a, const MatrixForm& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix shape mismatch");
  MatrixForm r = a;
  for (std::size_t k = 0; k < r.entries_.size(); ++k) r.entries_[k] = a.entries_[k] + b.entries_[k];
  return r;
}

MatrixForm operator-(const MatrixForm& a, const MatrixForm& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix shape mismatch");
  MatrixForm r = a;
  for (std::size_t k = 0; k < r.entries_.size(); ++k) r.entries_[k] = a.entries_[k] - b.entries_[k];
  return r;
}

MatrixForm operator*(const MatrixForm& a, const MatrixForm& b) {
  if (a.cols_ != b.rows_ || a.dim_ != b.dim_) throw std::invalid_argument("matrix shape mismatch");
  MatrixForm r(a.rows_, b.cols_, a.dim_, a.degree_ + b.degree_);
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < b.cols_; ++k) {
      Form acc(a.dim_, r.degree_);
      for (int j = 0; j < a.cols_; ++j) {
        if (a(i, j).is_zero() || b(j, k).is_zero()) continue;
        acc += wedge(a(i, j), b(j, k));
      }
      r(i, k) = acc;
    }
  return r;
}

MatrixForm operator*(const Expr& f, const MatrixForm& a) {
  MatrixForm r = a;
  for (auto& e : r.entries_) e = f * e;
  return r;
}

MatrixForm exterior_derivative(const MatrixForm& m) {
  MatrixForm r(m.rows(), m.cols(), m.dim(), m.degree() + 1);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = exterior_derivative(m(i, j));
  return r;
}

Form trace(const MatrixForm& m) {
  Form r(m.dim(), m.degree());
  for (int i = 0; i < std::min(m.rows(), m.cols()); ++i) r += m(i, i);
  return r;
}

MatrixForm power(const MatrixForm& m, int k) {
  MatrixForm r = MatrixForm::identity(m.rows(), m.dim());
  for (int i = 0; i < k; ++i) r = r * m;
  return r;
}

MatrixForm graded_commutator(const MatrixForm& a, const MatrixForm& b) {
  MatrixForm ab = a * b;
  MatrixForm ba = b * a;
  if ((a.degree() * b.degree()) % 2 == 0) return ab - ba;
  return ab + ba;
}

// ---------------------------------------------------------------------------

double NumMatrixForm::max_abs() const {
  double m = 0.0;
  for (const auto& v : data) m = std::max(m, std::abs(v));
  return m;
}

NumMatrixForm operator-(const NumMatrixForm& a, const NumMatrixForm& b) {
  if (a.data.size() != b.data.size()) throw std::invalid_argument("numeric form shape mismatch");
  NumMatrixForm r = a;
  for (std::size_t k = 0; k < r.data.size(); ++k) r.data[k] -= b.data[k];
  return r;
}

NumMatrixForm operator+(const NumMatrixForm& a, const NumMatrixForm& b) {
  if (a.data.size() != b.data.size()) throw std::invalid_argument("numeric form shape mismatch");
  NumMatrixForm r = a;
  for (std::size_t k = 0; k < r.data.size(); ++k) r.data[k] += b.data[k];
  return r;
}

NumMatrixForm operator*(const NumMatrixForm& a, const NumMatrixForm& b) {
  if (a.cols != b.rows) throw std::invalid_argument("numeric matrix shape mismatch");
  if (a.degree != 0 && b.degree != 0) throw std::invalid_argument("numeric product needs a degree-0 factor");
  NumMatrixForm r{a.rows, b.cols, a.dim, a.degree + b.degree, {}};
  const std::size_t nc = r.components();
  r.data.assign(static_cast<std::size_t>(r.rows * r.cols) * nc, Complex{});
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      for (int k = 0; k < b.cols; ++k)
        for (std::size_t c = 0; c < nc; ++c) {
          Complex x = a.degree == 0 ? a.at(i, j, 0) * b.at(j, k, c) : a.at(i, j, c) * b.at(j, k, 0);
          r.at(i, k, c) += x;
        }
  return r;
}

NumMatrixForm scale(const NumMatrixForm& a, Complex s) {
  NumMatrixForm r = a;
  for (auto& v : r.data) v *= s;
  return r;
}

NumMatrixForm num_identity(int n, int dim) {
  NumMatrixForm r{n, n, dim, 0, std::vector<Complex>(static_cast<std::size_t>(n * n))};
  for (int i = 0; i < n; ++i) r.at(i, i, 0) = 1.0;
  return r;
}

NumMatrixForm pullback(const NumMatrixForm& m, const std::vector<std::vector<double>>& jac) {
  const int dim = m.dim;
  NumMatrixForm r = m;
  if (m.degree == 0) return r;
  const auto& mons = Form::monomials(dim, m.degree);
  const std::size_t nc = mons.size();
  // coefficient of dx_src^K in the pullback of dx_tgt^I is the minor det J[I, K]
  auto minor = [&](unsigned I, unsigned K) {
    std::vector<int> rows, cols;
    for (int a = 0; a < dim; ++a) {
      if (I & (1u << a)) rows.push_back(a);
      if (K & (1u << a)) cols.push_back(a);
    }
    if (rows.size() == 1) return jac[rows[0]][cols[0]];
    if (rows.size() == 2)
      return jac[rows[0]][cols[0]] * jac[rows[1]][cols[1]] - jac[rows[0]][cols[1]] * jac[rows[1]][cols[0]];
    throw std::logic_error("pullback supports dimension <= 2");
  };
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j)
      for (std::size_t k = 0; k < nc; ++k) {
        Complex acc{};
        for (std::size_t s = 0; s < nc; ++s) acc += m.at(i, j, s) * minor(mons[s], mons[k]);
        r.at(i, j, k) = acc;
      }
  return r;
}

namespace {

// Gaussian elimination with partial pivoting on a complex matrix.
std::vector<Complex> lu_inverse(std::vector<Complex> a, int n, Complex* det_out) {
  std::vector<Complex> inv(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] = 1.0;
  Complex det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[static_cast<std::size_t>(r * n + c)]) > std::abs(a[static_cast<std::size_t>(piv * n + c)])) piv = r;
    if (a[static_cast<std::size_t>(piv * n + c)] == Complex{}) {
      if (det_out) *det_out = 0.0;
      return {};
    }
    if (piv != c) {
      for (int k = 0; k < n; ++k) {
        std::swap(a[static_cast<std::size_t>(c * n + k)], a[static_cast<std::size_t>(piv * n + k)]);
        std::swap(inv[static_cast<std::size_t>(c * n + k)], inv[static_cast<std::size_t>(piv * n + k)]);
      }
      det = -det;
    }
    Complex p = a[static_cast<std::size_t>(c * n + c)];
    det *= p;
    for (int k = 0; k < n; ++k) {
      a[static_cast<std::size_t>(c * n + k)] /= p;
      inv[static_cast<std::size_t>(c * n + k)] /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      Complex f = a[static_cast<std::size_t>(r * n + c)];
      if (f == Complex{}) continue;
      for (int k = 0; k < n; ++k) {
        a[static_cast<std::size_t>(r * n + k)] -= f * a[static_cast<std::size_t>(c * n + k)];
        inv[static_cast<std::size_t>(r * n + k)] -= f * inv[static_cast<std::size_t>(c * n + k)];
      }
    }
  }
  if (det_out) *det_out = det;
  return inv;
}

}  // namespace

NumMatrixForm num_inverse(const NumMatrixForm& m, Point at) {
  if (m.degree != 0 || m.rows != m.cols) throw std::invalid_argument("inverse of non-square or non-function matrix");
  Complex det;
  auto inv = lu_inverse(m.data, m.rows, &det);
  if (inv.empty()) throw DomainError("singular matrix", at);
  return NumMatrixForm{m.rows, m.cols, m.dim, 0, std::move(inv)};
}

Complex num_det(const NumMatrixForm& m) {
  if (m.degree != 0 || m.rows != m.cols) throw std::invalid_argument("determinant of non-square or non-function matrix");
  Complex det;
  lu_inverse(m.data, m.rows, &det);
  return det;
}

MatrixFormEvaluator::MatrixFormEvaluator(const MatrixForm& m) : form_(m) {
  auto flat = m.flatten();
  program_ = Program(flat);
}

NumMatrixForm MatrixFormEvaluator::operator()(Point p, std::vector<Complex>& scratch) const {
  NumMatrixForm r{form_.rows(), form_.cols(), form_.dim(), form_.degree(), {}};
  r.data.resize(program_.size());
  program_.run(p, scratch, r.data);
  return r;
}

NumMatrixForm MatrixFormEvaluator::operator()(Point p) const {
  std::vector<Complex> scratch;
  return (*this)(p, scratch);
}

}  // namespace fibre
