#include "fibre/nc.hpp"

#include <sstream>

namespace fibre {

namespace {

SparseVec unit_vec(std::size_t k) { return SparseVec{{k, Rational(1)}}; }

SparseVec sparse(const Vec& a) {
  SparseVec out;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] != 0) out.emplace(k, a[k]);
  return out;
}

Rational sign(long e) { return (e % 2 == 0) ? Rational(1) : Rational(-1); }

std::size_t checked_pow(std::size_t base, int n, std::size_t cap, const std::string& what) {
  std::size_t v = 1;
  for (int i = 0; i < n; ++i) {
    v *= base;
    if (v > cap) throw SizeCapExceeded(what + " exceeds the size cap " + std::to_string(cap));
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

HomologyGroup::HomologyGroup(std::size_t dim, const SparseMatrix* outgoing, const SparseMatrix* incoming) {
  std::vector<SparseVec> kernel;
  if (outgoing) {
    Echelon cols(true);
    for (std::size_t k = 0; k < dim; ++k) cols.insert(outgoing->cols.at(k), k);
    kernel = cols.relations();
  } else {
    for (std::size_t k = 0; k < dim; ++k) kernel.push_back(unit_vec(k));
  }
  cycles_ = kernel.size();
  if (incoming)
    for (const auto& c : incoming->cols)
      if (basis_.insert_untagged(c)) ++boundaries_;
  for (auto& z : kernel)
    if (basis_.insert(z, reps_.size())) reps_.push_back(std::move(z));
}

SparseVec HomologyGroup::coordinates(const SparseVec& cycle) const {
  try {
    return basis_.coordinates(cycle);
  } catch (const std::domain_error&) {
    throw std::domain_error("vector is not a cycle");
  }
}

bool HomologyGroup::is_boundary(const SparseVec& v) const {
  SparseVec tag;
  return basis_.reduce(v, &tag).empty() && tag.empty();
}

// ---------------------------------------------------------------------------

OmegaAlgebra::OmegaAlgebra(FiniteDimAlgebra a, std::size_t cap) : a_(std::move(a)), cap_(cap) {}

std::size_t OmegaAlgebra::radix_pow(int n) const {
  std::size_t v = 1;
  for (int i = 0; i < n; ++i) v *= static_cast<std::size_t>(a_.bar_dim());
  return v;
}

std::size_t OmegaAlgebra::dim(int n) const {
  if (n < 0) return 0;
  const std::size_t m = static_cast<std::size_t>(a_.dim());
  std::size_t v = checked_pow(m - 1, n, cap_, "dim Omega^" + std::to_string(n) + "(" + a_.name() + ")") * m;
  if (v > cap_)
    throw SizeCapExceeded("dim Omega^" + std::to_string(n) + "(" + a_.name() + ") = " + std::to_string(v) +
                          " exceeds the size cap " + std::to_string(cap_));
  return v;
}

std::size_t OmegaAlgebra::index(int alpha, const std::vector<int>& beta) const {
  const std::size_t w = static_cast<std::size_t>(a_.bar_dim());
  std::size_t idx = static_cast<std::size_t>(alpha);
  for (int b : beta) idx = idx * w + static_cast<std::size_t>(b);
  return idx;
}

void OmegaAlgebra::decode(int n, std::size_t idx, int& alpha, std::vector<int>& beta) const {
  const std::size_t w = static_cast<std::size_t>(a_.bar_dim());
  beta.assign(static_cast<std::size_t>(n), 0);
  for (int i = n - 1; i >= 0; --i) {
    beta[static_cast<std::size_t>(i)] = static_cast<int>(idx % w);
    idx /= w;
  }
  alpha = static_cast<int>(idx);
}

void OmegaAlgebra::add_term(SparseVec& out, const Rational& c, const SparseVec& a0,
                            const std::vector<SparseVec>& bars) const {
  if (c == 0) return;
  const std::size_t w = static_cast<std::size_t>(a_.bar_dim());
  std::vector<std::pair<std::size_t, Rational>> cur, next;
  for (const auto& [k, x] : a0) cur.emplace_back(k, c * x);
  for (const auto& bar : bars) {
    if (bar.empty()) return;
    next.clear();
    for (const auto& [idx, x] : cur)
      for (const auto& [b, y] : bar) next.emplace_back(idx * w + b, x * y);
    cur.swap(next);
  }
  for (const auto& [idx, x] : cur) {
    auto [it, inserted] = out.try_emplace(idx, 0);
    it->second += x;
    if (it->second == 0) out.erase(it);
  }
}

SparseVec OmegaAlgebra::embed(const Vec& a) const { return sparse(a); }

SparseVec OmegaAlgebra::differential(const Vec& a) const {
  SparseVec out;
  add_term(out, 1, sparse(a_.unit()), {a_.bar(a)});
  return out;
}

SparseVec OmegaAlgebra::d(int n, const SparseVec& x) const {
  // d(a0 da1 ... dan) = 1 da0 da1 ... dan
  SparseVec out;
  const SparseVec one = sparse(a_.unit());
  int alpha;
  std::vector<int> beta;
  std::vector<SparseVec> bars;
  for (const auto& [idx, c] : x) {
    decode(n, idx, alpha, beta);
    bars.assign(1, a_.bar(alpha));
    for (int b : beta) bars.push_back(unit_vec(static_cast<std::size_t>(b)));
    add_term(out, c, one, bars);
  }
  return out;
}

SparseMatrix OmegaAlgebra::d_matrix(int n) const {
  SparseMatrix m;
  m.rows = dim(n + 1);
  const std::size_t cols = dim(n);
  m.cols.reserve(cols);
  for (std::size_t k = 0; k < cols; ++k) m.cols.push_back(d(n, unit_vec(k)));
  return m;
}

const SparseVec& OmegaAlgebra::right_basis(int n, std::size_t idx, int b) const {
  auto key = std::make_tuple(n, idx, b);
  if (auto it = right_cache_.find(key); it != right_cache_.end()) return it->second;

  // (a0 da1 ... dan) b with a_(n+1) = b:
  //   sum_i (-1)^(n-i) a0 da1 ... d(a_i a_(i+1)) ... da_(n+1) + (-1)^n a0 a1 da2 ... da_(n+1)
  int alpha;
  std::vector<int> beta;
  decode(n, idx, alpha, beta);
  SparseVec out;
  if (n == 0) {
    out = sparse(a_.product(alpha, b));
  } else {
    std::vector<int> a(static_cast<std::size_t>(n + 2));
    for (int i = 1; i <= n; ++i) a[static_cast<std::size_t>(i)] = a_.lift(beta[static_cast<std::size_t>(i - 1)]);
    a[static_cast<std::size_t>(n + 1)] = b;
    auto bar_of = [&](int j) {
      return j <= n ? unit_vec(static_cast<std::size_t>(beta[static_cast<std::size_t>(j - 1)])) : a_.bar(b);
    };
    const SparseVec a0 = unit_vec(static_cast<std::size_t>(alpha));
    std::vector<SparseVec> bars;
    for (int i = 1; i <= n; ++i) {
      bars.clear();
      for (int j = 1; j < i; ++j) bars.push_back(bar_of(j));
      bars.push_back(a_.bar(a_.product(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(i + 1)])));
      for (int j = i + 2; j <= n + 1; ++j) bars.push_back(bar_of(j));
      add_term(out, sign(n - i), a0, bars);
    }
    bars.clear();
    for (int j = 2; j <= n + 1; ++j) bars.push_back(bar_of(j));
    add_term(out, sign(n), sparse(a_.product(alpha, a[1])), bars);
  }
  return right_cache_.emplace(key, std::move(out)).first->second;
}

SparseVec OmegaAlgebra::multiply_basis(int p, std::size_t i, int q, std::size_t j) const {
  // omega (b0 db1 ... dbq) = (omega b0) db1 ... dbq
  const std::size_t tail_size = radix_pow(q);
  const std::size_t b0 = j / tail_size;
  const std::size_t tail = j % tail_size;
  SparseVec out;
  for (const auto& [k, c] : right_basis(p, i, static_cast<int>(b0))) out.emplace(k * tail_size + tail, c);
  return out;
}

SparseVec OmegaAlgebra::multiply(int p, const SparseVec& x, int q, const SparseVec& y) const {
  SparseVec out;
  for (const auto& [i, a] : x)
    for (const auto& [j, b] : y) axpy(out, a * b, multiply_basis(p, i, q, j));
  return out;
}

SparseVec OmegaAlgebra::left(int n, const Vec& a, const SparseVec& x) const {
  const std::size_t tail_size = radix_pow(n);
  SparseVec out;
  for (const auto& [idx, c] : x) {
    const Vec prod = a_.multiply(a, a_.basis(static_cast<int>(idx / tail_size)));
    for (std::size_t k = 0; k < prod.size(); ++k) {
      if (prod[k] == 0) continue;
      auto [it, inserted] = out.try_emplace(k * tail_size + idx % tail_size, 0);
      it->second += c * prod[k];
      if (it->second == 0) out.erase(it);
    }
  }
  return out;
}

SparseVec OmegaAlgebra::right(int n, const SparseVec& x, const Vec& a) const {
  SparseVec out;
  for (const auto& [idx, c] : x)
    for (int b = 0; b < a_.dim(); ++b)
      if (a[static_cast<std::size_t>(b)] != 0) axpy(out, c * a[static_cast<std::size_t>(b)], right_basis(n, idx, b));
  return out;
}

std::vector<SparseVec> OmegaAlgebra::commutator_generators(int n) const {
  // Every graded commutator [xy, z] = [x, yz] + (-1)^(|x|(|y|+|z|)) [y, zx], so
  // commutators with a generator a or da of Omega on the left span them all.
  std::vector<SparseVec> gens;
  const std::size_t dn = dim(n);
  const std::size_t tail_n = radix_pow(n);
  for (int a = 0; a < a_.dim(); ++a)
    for (std::size_t t = 0; t < dn; ++t) {
      SparseVec g;
      const Vec& left_prod = a_.product(a, static_cast<int>(t / tail_n));
      for (std::size_t k = 0; k < left_prod.size(); ++k)
        if (left_prod[k] != 0) g.emplace(k * tail_n + t % tail_n, left_prod[k]);
      axpy(g, -1, right_basis(n, t, a));
      if (!g.empty()) gens.push_back(std::move(g));
    }
  if (n == 0) return gens;
  const std::size_t dm = dim(n - 1);
  const SparseVec one = sparse(a_.unit());
  int alpha;
  std::vector<int> beta;
  std::vector<SparseVec> bars;
  for (int b = 0; b < a_.bar_dim(); ++b) {
    const int la = a_.lift(b);
    for (std::size_t t = 0; t < dm; ++t) {
      decode(n - 1, t, alpha, beta);
      SparseVec g;
      // da (a0 dbeta) = d(a a0) dbeta - a da0 dbeta
      bars.assign(1, a_.bar(a_.product(la, alpha)));
      for (int x : beta) bars.push_back(unit_vec(static_cast<std::size_t>(x)));
      add_term(g, 1, one, bars);
      bars[0] = a_.bar(alpha);
      add_term(g, -1, unit_vec(static_cast<std::size_t>(la)), bars);
      // (a0 dbeta) da
      bars.clear();
      for (int x : beta) bars.push_back(unit_vec(static_cast<std::size_t>(x)));
      bars.push_back(unit_vec(static_cast<std::size_t>(b)));
      add_term(g, -sign(n - 1), unit_vec(static_cast<std::size_t>(alpha)), bars);
      if (!g.empty()) gens.push_back(std::move(g));
    }
  }
  return gens;
}

std::vector<SparseVec> OmegaAlgebra::commutator_all_pairs(int n) const {
  std::vector<SparseVec> gens;
  for (int p = 0; p <= n; ++p) {
    const int q = n - p;
    for (std::size_t i = 0; i < dim(p); ++i)
      for (std::size_t j = 0; j < dim(q); ++j) {
        SparseVec g = multiply_basis(p, i, q, j);
        axpy(g, -sign(static_cast<long>(p) * q), multiply_basis(q, j, p, i));
        if (!g.empty()) gens.push_back(std::move(g));
      }
  }
  return gens;
}

// ---------------------------------------------------------------------------

NcEngine::NcEngine(FiniteDimAlgebra a, std::size_t cap) : omega_(std::move(a), cap), cap_(cap) {}

NcEngine::Slice& NcEngine::slice(int n) { return slices_[n]; }

const Echelon& NcEngine::commutators(int n) {
  Slice& s = slice(n);
  if (!s.comm) {
    Echelon e;
    for (const auto& g : omega_.commutator_generators(n)) e.insert_untagged(g);
    const std::size_t dn = omega_.dim(n);
    for (std::size_t c = 0; c < dn; ++c)
      if (!e.is_pivot(c)) {
        s.col_index.emplace(c, s.quotient_cols.size());
        s.quotient_cols.push_back(c);
      }
    s.comm = std::move(e);
  }
  return *s.comm;
}

std::size_t NcEngine::reduced_dim(int n) {
  commutators(n);
  return slice(n).quotient_cols.size();
}

SparseVec NcEngine::project(int n, const SparseVec& v) {
  const Echelon& k = commutators(n);
  const Slice& s = slice(n);
  SparseVec out;
  for (const auto& [c, x] : k.reduce(v)) out.emplace(s.col_index.at(c), x);
  return out;
}

SparseVec NcEngine::lift(int n, std::size_t k) {
  commutators(n);
  return unit_vec(slice(n).quotient_cols.at(k));
}

const SparseMatrix& NcEngine::dbar(int n) {
  Slice& s = slice(n);
  if (!s.dbar) {
    SparseMatrix m;
    m.rows = reduced_dim(n + 1);
    const std::size_t cols = reduced_dim(n);
    for (std::size_t k = 0; k < cols; ++k) m.cols.push_back(project(n + 1, omega_.d(n, lift(n, k))));
    slice(n).dbar = std::move(m);
  }
  return *slice(n).dbar;
}

const HomologyGroup& NcEngine::nc_homology(int n) {
  if (!slice(n).hbar) {
    const SparseMatrix& out = dbar(n);
    const SparseMatrix* in = n > 0 ? &dbar(n - 1) : nullptr;
    slice(n).hbar = HomologyGroup(reduced_dim(n), &out, in);
  }
  return *slice(n).hbar;
}

std::size_t NcEngine::nc_homology_reduced_dim(int n) {
  const HomologyGroup& h = nc_homology(n);
  if (n > 0) return h.dim();
  SparseVec one = project(0, omega_.embed(algebra().unit()));
  return (one.empty() || h.coordinates(one).empty()) ? h.dim() : h.dim() - 1;
}

// ---------------------------------------------------------------------------

SparseVec NcEngine::hochschild_b(int n, const SparseVec& x) const {
  SparseVec out;
  if (n == 0) return out;
  const FiniteDimAlgebra& A = algebra();
  int alpha;
  std::vector<int> beta;
  std::vector<SparseVec> bars;
  for (const auto& [idx, c] : x) {
    omega_.decode(n, idx, alpha, beta);
    auto a = [&](int i) { return i == 0 ? alpha : A.lift(beta[static_cast<std::size_t>(i - 1)]); };
    auto bar_of = [&](int i) { return unit_vec(static_cast<std::size_t>(beta[static_cast<std::size_t>(i - 1)])); };
    bars.clear();
    for (int j = 2; j <= n; ++j) bars.push_back(bar_of(j));
    omega_.add_term(out, c, sparse(A.product(alpha, a(1))), bars);
    for (int i = 1; i < n; ++i) {
      bars.clear();
      for (int j = 1; j < i; ++j) bars.push_back(bar_of(j));
      bars.push_back(A.bar(A.product(a(i), a(i + 1))));
      for (int j = i + 2; j <= n; ++j) bars.push_back(bar_of(j));
      omega_.add_term(out, c * sign(i), unit_vec(static_cast<std::size_t>(alpha)), bars);
    }
    bars.clear();
    for (int j = 1; j < n; ++j) bars.push_back(bar_of(j));
    omega_.add_term(out, c * sign(n), sparse(A.product(a(n), alpha)), bars);
  }
  return out;
}

const SparseMatrix& NcEngine::b_matrix(int n) {
  Slice& s = slice(n);
  if (!s.b) {
    SparseMatrix m;
    m.rows = omega_.dim(n - 1);
    const std::size_t cols = omega_.dim(n);
    for (std::size_t k = 0; k < cols; ++k) m.cols.push_back(hochschild_b(n, unit_vec(k)));
    slice(n).b = std::move(m);
  }
  return *slice(n).b;
}

const HomologyGroup& NcEngine::hochschild(int n) {
  if (!slice(n).hh) {
    const SparseMatrix* out = n > 0 ? &b_matrix(n) : nullptr;
    const SparseMatrix& in = b_matrix(n + 1);
    slice(n).hh = HomologyGroup(omega_.dim(n), out, &in);
  }
  return *slice(n).hh;
}

SparseVec NcEngine::connes_B(int n, const SparseVec& x) const {
  const FiniteDimAlgebra& A = algebra();
  const SparseVec one = sparse(A.unit());
  SparseVec out;
  int alpha;
  std::vector<int> beta;
  std::vector<SparseVec> slots, bars;
  for (const auto& [idx, c] : x) {
    omega_.decode(n, idx, alpha, beta);
    slots.assign(1, A.bar(alpha));
    for (int b : beta) slots.push_back(unit_vec(static_cast<std::size_t>(b)));
    for (int i = 0; i <= n; ++i) {
      bars.clear();
      for (int j = 0; j <= n; ++j) bars.push_back(slots[static_cast<std::size_t>((i + j) % (n + 1))]);
      omega_.add_term(out, c * sign(static_cast<long>(n) * i), one, bars);
    }
  }
  return out;
}

SparseMatrix NcEngine::connes_B_matrix(int n) {
  SparseMatrix m;
  m.rows = omega_.dim(n + 1);
  const std::size_t cols = omega_.dim(n);
  for (std::size_t k = 0; k < cols; ++k) m.cols.push_back(connes_B(n, unit_vec(k)));
  return m;
}

// ---------------------------------------------------------------------------

const LambdaSpace& NcEngine::lambda(int n) {
  Slice& s = slice(n);
  if (s.lambda) return *s.lambda;
  const std::size_t m = static_cast<std::size_t>(algebra().dim());
  LambdaSpace L;
  L.n = n;
  L.tuples = checked_pow(m, n + 1, cap_, "dim A^(" + std::to_string(n + 1) + ")");
  L.orbit.assign(L.tuples, LambdaSpace::npos);
  L.sign.assign(L.tuples, 0);
  const std::size_t top = L.tuples / m;  // m^n
  auto rot = [&](std::size_t t) { return (t % m) * top + t / m; };  // (a0..an) -> (an, a0..a(n-1))
  std::vector<std::size_t> orbit_of_rep(L.tuples, LambdaSpace::npos);
  for (std::size_t t = 0; t < L.tuples; ++t) {
    std::size_t r = t, rep = t, k_rep = 0, period = 0;
    for (std::size_t k = 1; k <= static_cast<std::size_t>(n + 1); ++k) {
      r = rot(r);
      if (r < rep) {
        rep = r;
        k_rep = k;
      }
      if (r == t && period == 0) period = k;
    }
    if ((static_cast<std::size_t>(n) * period) % 2 == 1) continue;  // the orbit is killed by 1 - t
    if (rep == t) {
      orbit_of_rep[t] = L.reps.size();
      L.reps.push_back(t);
    }
    // t = rot^j(rep) with j = -k_rep mod period, and rot x = (-1)^n x in the quotient
    const std::size_t j = (period - k_rep % period) % period;
    L.orbit[t] = orbit_of_rep[rep];
    L.sign[t] = (static_cast<std::size_t>(n) * j) % 2 == 0 ? 1 : -1;
  }
  if (L.reps.size() > cap_) throw SizeCapExceeded("dim C^lambda_" + std::to_string(n) + " exceeds the size cap");
  s.lambda = std::move(L);
  return *s.lambda;
}

SparseVec NcEngine::tuple_to_lambda(int n, const SparseVec& tuples) {
  const LambdaSpace& L = lambda(n);
  SparseVec out;
  for (const auto& [t, c] : tuples) {
    if (L.orbit[t] == LambdaSpace::npos) continue;
    auto [it, inserted] = out.try_emplace(L.orbit[t], 0);
    it->second += c * L.sign[t];
    if (it->second == 0) out.erase(it);
  }
  return out;
}

const SparseMatrix& NcEngine::lambda_b(int n) {
  if (slice(n).lambda_b) return *slice(n).lambda_b;
  const FiniteDimAlgebra& A = algebra();
  const std::size_t m = static_cast<std::size_t>(A.dim());
  const LambdaSpace& L = lambda(n);
  lambda(n - 1);
  SparseMatrix mat;
  mat.rows = lambda(n - 1).dim();
  std::vector<std::size_t> digits(static_cast<std::size_t>(n + 1));
  for (std::size_t o = 0; o < L.dim(); ++o) {
    std::size_t t = L.reps[o];
    for (int i = n; i >= 0; --i) {
      digits[static_cast<std::size_t>(i)] = t % m;
      t /= m;
    }
    SparseVec image;
    // faces: (a0..a_i a_(i+1)..an) and the wrap-around (an a0, a1..a(n-1))
    for (int i = 0; i <= n; ++i) {
      const bool wrap = i == n;
      const Vec& prod = wrap ? A.product(static_cast<int>(digits[static_cast<std::size_t>(n)]), static_cast<int>(digits[0]))
                             : A.product(static_cast<int>(digits[static_cast<std::size_t>(i)]),
                                         static_cast<int>(digits[static_cast<std::size_t>(i + 1)]));
      for (std::size_t k = 0; k < m; ++k) {
        if (prod[k] == 0) continue;
        std::size_t idx = 0;
        for (int j = 0; j < n; ++j) {
          std::size_t dgt;
          if (wrap) dgt = j == 0 ? k : digits[static_cast<std::size_t>(j)];
          else if (j < i) dgt = digits[static_cast<std::size_t>(j)];
          else if (j == i) dgt = k;
          else dgt = digits[static_cast<std::size_t>(j + 1)];
          idx = idx * m + dgt;
        }
        auto [it, inserted] = image.try_emplace(idx, 0);
        it->second += sign(i) * prod[k];
        if (it->second == 0) image.erase(it);
      }
    }
    mat.cols.push_back(tuple_to_lambda(n - 1, image));
  }
  slice(n).lambda_b = std::move(mat);
  return *slice(n).lambda_b;
}

const HomologyGroup& NcEngine::cyclic(int n) {
  if (!slice(n).hc) {
    const SparseMatrix* out = n > 0 ? &lambda_b(n) : nullptr;
    const SparseMatrix& in = lambda_b(n + 1);
    slice(n).hc = HomologyGroup(lambda(n).dim(), out, &in);
  }
  return *slice(n).hc;
}

SparseVec NcEngine::unit_tensor(int n) {
  const Vec& u = algebra().unit();
  const std::size_t m = u.size();
  std::vector<std::pair<std::size_t, Rational>> cur{{0, Rational(1)}}, next;
  for (int i = 0; i <= n; ++i) {
    next.clear();
    for (const auto& [t, c] : cur)
      for (std::size_t k = 0; k < m; ++k)
        if (u[k] != 0) next.emplace_back(t * m + k, c * u[k]);
    cur.swap(next);
  }
  SparseVec tuples(cur.begin(), cur.end());
  return tuple_to_lambda(n, tuples);
}

std::size_t NcEngine::cyclic_reduced_dim(int n) {
  const HomologyGroup& h = cyclic(n);
  SparseVec one = unit_tensor(n);
  return (one.empty() || h.coordinates(one).empty()) ? h.dim() : h.dim() - 1;
}

SparseVec NcEngine::lambda_B(int n, std::size_t orbit) {
  const FiniteDimAlgebra& A = algebra();
  const std::size_t m = static_cast<std::size_t>(A.dim());
  std::size_t t = lambda(n).reps.at(orbit);
  std::vector<SparseVec> slots(static_cast<std::size_t>(n + 1)), bars;
  for (int i = n; i >= 0; --i) {
    slots[static_cast<std::size_t>(i)] = A.bar(static_cast<int>(t % m));
    t /= m;
  }
  const SparseVec one = sparse(A.unit());
  SparseVec out;
  for (int i = 0; i <= n; ++i) {
    bars.clear();
    for (int j = 0; j <= n; ++j) bars.push_back(slots[static_cast<std::size_t>((i + j) % (n + 1))]);
    omega_.add_term(out, sign(static_cast<long>(n) * i), one, bars);
  }
  return out;
}

HbarKernelRow NcEngine::connes_B_kernel(int n, const BHook& hook) {
  HbarKernelRow row;
  row.n = n;
  const HomologyGroup& hc = cyclic(n);
  const HomologyGroup& hh = hochschild(n + 1);
  row.hc = hc.dim();
  row.hc_reduced = cyclic_reduced_dim(n);
  row.hh_next = hh.dim();
  Echelon image;
  for (const auto& rep : hc.representatives()) {
    SparseVec chain;
    for (const auto& [o, c] : rep) {
      SparseVec b = lambda_B(n, o);
      if (hook) b = hook(n, o, std::move(b));
      axpy(chain, c, b);
    }
    SparseVec coords;
    try {
      coords = hh.coordinates(chain);
    } catch (const std::domain_error&) {
      throw std::logic_error("representative lift failure: B of a cyclic " + std::to_string(n) +
                             "-cycle is not a Hochschild cycle");
    }
    image.insert_untagged(coords);
  }
  row.b_rank = image.rank();
  row.kernel = row.hc_reduced >= row.b_rank ? row.hc_reduced - row.b_rank : 0;
  row.hbar = nc_homology_reduced_dim(n);
  row.pass = row.hc_reduced >= row.b_rank && row.hbar == row.kernel;
  return row;
}

std::vector<HbarKernelRow> verify_hbar_kernel(NcEngine& e, int n_max, const BHook& hook) {
  std::vector<HbarKernelRow> rows;
  for (int n = 0; n <= n_max; ++n) rows.push_back(e.connes_B_kernel(n, hook));
  return rows;
}

// ---------------------------------------------------------------------------

IdentityReport verify_identities(NcEngine& e, int max_degree) {
  IdentityReport r;
  r.max_degree = max_degree;
  const OmegaAlgebra& om = e.omega();
  const FiniteDimAlgebra& A = e.algebra();
  const std::size_t m = static_cast<std::size_t>(A.dim());
  auto fail = [&](bool& flag, const std::string& what) {
    flag = false;
    if (r.first_failure.empty()) r.first_failure = what;
  };

  std::size_t expect = m;
  for (int n = 0; n <= max_degree; ++n, expect *= m - 1)
    if (om.dim(n) != expect) fail(r.dimensions, "dim Omega^" + std::to_string(n) + " = " + std::to_string(om.dim(n)));
  // Omega^1 against the kernel of the multiplication map
  if (max_degree >= 1) {
    SparseMatrix mult, iota;
    mult.rows = m;
    iota.rows = m * m;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) mult.cols.push_back(sparse(A.product(static_cast<int>(i), static_cast<int>(j))));
    int alpha;
    std::vector<int> beta;
    for (std::size_t idx = 0; idx < om.dim(1); ++idx) {
      om.decode(1, idx, alpha, beta);
      const int a1 = A.lift(beta[0]);
      SparseVec c = unit_vec(static_cast<std::size_t>(alpha) * m + static_cast<std::size_t>(a1));
      const Vec& p = A.product(alpha, a1);
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l)
          if (p[k] != 0 && A.unit()[l] != 0) axpy(c, -p[k] * A.unit()[l], unit_vec(k * m + l));
      iota.cols.push_back(std::move(c));
    }
    if (!compose(mult, iota).is_zero() || rank(iota) != om.dim(1) || m * m - rank(mult) != om.dim(1))
      fail(r.dimensions, "Omega^1 differs from the kernel of multiplication");
  }

  std::vector<SparseMatrix> d;
  for (int n = 0; n < max_degree; ++n) d.push_back(om.d_matrix(n));
  for (int n = 0; n + 2 <= max_degree; ++n)
    if (!compose(d[static_cast<std::size_t>(n + 1)], d[static_cast<std::size_t>(n)]).is_zero())
      fail(r.d_squared, "d d != 0 on Omega^" + std::to_string(n));

  for (int p = 0; p < max_degree; ++p)
    for (int q = 0; p + q + 1 <= max_degree; ++q)
      for (std::size_t i = 0; i < om.dim(p) && r.leibniz; ++i)
        for (std::size_t j = 0; j < om.dim(q); ++j) {
          const SparseVec x = unit_vec(i), y = unit_vec(j);
          SparseVec lhs = d[static_cast<std::size_t>(p + q)].apply(om.multiply(p, x, q, y));
          axpy(lhs, -1, om.multiply(p + 1, d[static_cast<std::size_t>(p)].cols[i], q, y));
          axpy(lhs, -sign(p), om.multiply(p, x, q + 1, d[static_cast<std::size_t>(q)].cols[j]));
          ++r.leibniz_pairs;
          if (!lhs.empty()) {
            fail(r.leibniz, "Leibniz fails for " + form_label(A, om, p, i) + " and " + form_label(A, om, q, j));
            break;
          }
        }

  for (int n = 0; n < max_degree; ++n) {
    const Echelon& next = e.commutators(n + 1);
    for (const auto& g : om.commutator_generators(n))
      if (!next.contains(d[static_cast<std::size_t>(n)].apply(g))) {
        fail(r.d_stable, "d leaves the commutator subspace in degree " + std::to_string(n));
        break;
      }
  }
  return r;
}

std::string form_label(const FiniteDimAlgebra& a, const OmegaAlgebra& om, int n, std::size_t idx) {
  int alpha;
  std::vector<int> beta;
  om.decode(n, idx, alpha, beta);
  std::string s = a.labels()[static_cast<std::size_t>(alpha)];
  for (int b : beta) s += " d" + a.labels()[static_cast<std::size_t>(a.lift(b))];
  return s;
}

std::string chern_tag(int p) {
  if (p == 0) return "1";
  std::ostringstream os;
  os << "1/((2 pi i)^" << p << " " << p << "!)";
  return os.str();
}

SparseVec trace_form(const OmegaAlgebra& om, const AlgebraMatrix& q, int k, bool with_q) {
  const int r = q.size;
  std::vector<SparseVec> dq, cur;
  for (const auto& e : q.entries) dq.push_back(om.differential(e));
  int deg;
  int steps;
  if (with_q) {
    for (const auto& e : q.entries) cur.push_back(om.embed(e));
    deg = 0;
    steps = k;
  } else {
    if (k == 0) throw std::invalid_argument("trace of an empty product");
    cur = dq;
    deg = 1;
    steps = k - 1;
  }
  for (int s = 0; s < steps; ++s) {
    std::vector<SparseVec> next(static_cast<std::size_t>(r * r));
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        for (int l = 0; l < r; ++l)
          axpy(next[static_cast<std::size_t>(i * r + j)], 1,
               om.multiply(deg, cur[static_cast<std::size_t>(i * r + l)], 1, dq[static_cast<std::size_t>(l * r + j)]));
    cur.swap(next);
    ++deg;
  }
  SparseVec tr;
  for (int i = 0; i < r; ++i) axpy(tr, 1, cur[static_cast<std::size_t>(i * r + i)]);
  return tr;
}

AlgebraicChern chern_idempotent(NcEngine& e, const AlgebraMatrix& q, int p) {
  if (!is_idempotent(e.algebra(), q)) throw std::invalid_argument("matrix '" + q.name + "' is not idempotent");
  AlgebraicChern out;
  out.p = p;
  out.normalisation = chern_tag(p);
  out.representative = trace_form(e.omega(), q, 2 * p, true);
  out.reduced = e.project(2 * p, out.representative);
  out.closed = e.project(2 * p + 1, e.omega().d(2 * p, out.representative)).empty();
  if (out.closed) out.class_coordinates = e.nc_homology(2 * p).coordinates(out.reduced);
  return out;
}

bool odd_trace_vanishes(NcEngine& e, const AlgebraMatrix& q, int p) {
  return e.project(2 * p + 1, trace_form(e.omega(), q, 2 * p + 1, false)).empty();
}

ConjugationReport verify_chern_invariance_alg(NcEngine& e, const AlgebraMatrix& q, const AlgebraMatrix& u, int p) {
  if (q.size != u.size) throw std::invalid_argument("idempotent and conjugator have different sizes");
  const FiniteDimAlgebra& A = e.algebra();
  AlgebraMatrix uq = matrix_product(A, matrix_product(A, u, q), matrix_inverse(A, u));
  ConjugationReport rep;
  rep.p = p;
  rep.conjugate_idempotent = is_idempotent(A, uq);
  SparseVec diff = trace_form(e.omega(), uq, 2 * p, true);
  axpy(diff, -1, trace_form(e.omega(), q, 2 * p, true));
  SparseVec red = e.project(2 * p, diff);
  rep.difference_zero = red.empty();
  rep.difference_terms = red.size();
  if (p == 0) {
    rep.in_image = red.empty();
  } else {
    Echelon im;
    for (const auto& c : e.dbar(2 * p - 1).cols) im.insert_untagged(c);
    rep.in_image = im.contains(red);
  }
  return rep;
}

}  // namespace fibre
