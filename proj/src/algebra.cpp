#include "fibre/algebra.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fibre {

std::size_t size_cap() {
  if (const char* env = std::getenv("FIBRE_FORGE_SIZE_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 5000;
}

namespace {

std::string vec_str(const Vec& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i].get_str();
  os << ')';
  return os.str();
}

}  // namespace

FiniteDimAlgebra::FiniteDimAlgebra(std::string name, std::vector<std::string> labels,
                                   std::vector<std::vector<Vec>> table, Vec unit)
    : name_(std::move(name)), labels_(std::move(labels)), table_(std::move(table)), unit_(std::move(unit)) {
  const std::size_t m = labels_.size();
  if (m == 0) throw std::invalid_argument("algebra '" + name_ + "' has an empty basis");
  if (unit_.size() != m) throw std::invalid_argument("unit has " + std::to_string(unit_.size()) + " coordinates, expected " + std::to_string(m));
  if (table_.size() != m) throw std::invalid_argument("product table must have " + std::to_string(m) + " rows");
  for (std::size_t i = 0; i < m; ++i) {
    if (table_[i].size() != m) throw std::invalid_argument("product table row " + std::to_string(i) + " has the wrong length");
    for (std::size_t j = 0; j < m; ++j)
      if (table_[i][j].size() != m)
        throw std::invalid_argument("product e" + std::to_string(i) + "*e" + std::to_string(j) + " has the wrong length");
  }

  for (int i = 0; i < dim(); ++i) {
    Vec e = basis(i);
    if (multiply(unit_, e) != e || multiply(e, unit_) != e)
      throw AlgebraError("unit " + vec_str(unit_) + " does not act as the identity on " + labels_[static_cast<std::size_t>(i)],
                         {i, -1, -1});
  }
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      for (int k = 0; k < dim(); ++k) {
        Vec left = multiply(product(i, j), basis(k));
        Vec right = multiply(basis(i), product(j, k));
        if (left != right) {
          const auto& L = labels_;
          throw AlgebraError("associativity fails for (" + L[static_cast<std::size_t>(i)] + ", " + L[static_cast<std::size_t>(j)] +
                                 ", " + L[static_cast<std::size_t>(k)] + "): " + vec_str(left) + " != " + vec_str(right),
                             {i, j, k});
        }
      }

  // drop the basis vector carrying the first nonzero unit coordinate;
  // its class in A/Q.1 is -(1/u_p) sum_{k != p} u_k e_k
  pivot_ = 0;
  while (unit_[static_cast<std::size_t>(pivot_)] == 0) ++pivot_;
  bars_.resize(m);
  for (int k = 0; k < dim(); ++k) {
    if (k != pivot_) {
      bars_[static_cast<std::size_t>(k)].emplace(static_cast<std::size_t>(k < pivot_ ? k : k - 1), 1);
      continue;
    }
    const Rational up = unit_[static_cast<std::size_t>(pivot_)];
    for (int l = 0; l < dim(); ++l) {
      if (l == pivot_ || unit_[static_cast<std::size_t>(l)] == 0) continue;
      bars_[static_cast<std::size_t>(k)].emplace(static_cast<std::size_t>(l < pivot_ ? l : l - 1),
                                                 -unit_[static_cast<std::size_t>(l)] / up);
    }
  }
}

Vec FiniteDimAlgebra::multiply(const Vec& a, const Vec& b) const {
  Vec out = zero();
  for (int i = 0; i < dim(); ++i) {
    if (a[static_cast<std::size_t>(i)] == 0) continue;
    for (int j = 0; j < dim(); ++j) {
      if (b[static_cast<std::size_t>(j)] == 0) continue;
      const Rational c = a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
      const Vec& e = product(i, j);
      for (std::size_t k = 0; k < out.size(); ++k)
        if (e[k] != 0) out[k] += c * e[k];
    }
  }
  return out;
}

Vec FiniteDimAlgebra::basis(int k) const {
  Vec e = zero();
  e[static_cast<std::size_t>(k)] = 1;
  return e;
}

SparseVec FiniteDimAlgebra::bar(const Vec& a) const {
  SparseVec out;
  for (int k = 0; k < dim(); ++k)
    if (a[static_cast<std::size_t>(k)] != 0) axpy(out, a[static_cast<std::size_t>(k)], bars_[static_cast<std::size_t>(k)]);
  return out;
}

AlgebraMatrix matrix_product(const FiniteDimAlgebra& a, const AlgebraMatrix& x, const AlgebraMatrix& y) {
  if (x.size != y.size) throw std::invalid_argument("matrix sizes differ");
  const int r = x.size;
  AlgebraMatrix out{x.name + "*" + y.name, r, std::vector<Vec>(static_cast<std::size_t>(r * r), a.zero())};
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Vec& acc = out.entries[static_cast<std::size_t>(i * r + j)];
      for (int k = 0; k < r; ++k) {
        Vec t = a.multiply(x.at(i, k), y.at(k, j));
        for (std::size_t l = 0; l < acc.size(); ++l) acc[l] += t[l];
      }
    }
  return out;
}

bool is_idempotent(const FiniteDimAlgebra& a, const AlgebraMatrix& q) {
  return matrix_product(a, q, q).entries == q.entries;
}

AlgebraMatrix matrix_inverse(const FiniteDimAlgebra& a, const AlgebraMatrix& u) {
  // solve u v = 1 as a linear system in the r*r*m coordinates of v
  const int r = u.size;
  const int m = a.dim();
  const std::size_t n = static_cast<std::size_t>(r * r * m);
  auto flatten = [&](const AlgebraMatrix& x) {
    SparseVec v;
    for (std::size_t e = 0; e < x.entries.size(); ++e)
      for (int k = 0; k < m; ++k)
        if (x.entries[e][static_cast<std::size_t>(k)] != 0) v.emplace(e * static_cast<std::size_t>(m) + static_cast<std::size_t>(k), x.entries[e][static_cast<std::size_t>(k)]);
    return v;
  };
  auto unit_matrix = [&] {
    AlgebraMatrix one{"1", r, std::vector<Vec>(static_cast<std::size_t>(r * r), a.zero())};
    for (int i = 0; i < r; ++i) one.entries[static_cast<std::size_t>(i * r + i)] = a.unit();
    return one;
  };
  Echelon columns(true);
  for (std::size_t c = 0; c < n; ++c) {
    AlgebraMatrix e{"e", r, std::vector<Vec>(static_cast<std::size_t>(r * r), a.zero())};
    e.entries[c / static_cast<std::size_t>(m)][c % static_cast<std::size_t>(m)] = 1;
    columns.insert(flatten(matrix_product(a, u, e)), c);
  }
  AlgebraMatrix one = unit_matrix();
  SparseVec coords;
  try {
    coords = columns.coordinates(flatten(one));
  } catch (const std::domain_error&) {
    throw std::domain_error("matrix '" + u.name + "' is not invertible");
  }
  AlgebraMatrix v{u.name + "^-1", r, std::vector<Vec>(static_cast<std::size_t>(r * r), a.zero())};
  for (const auto& [c, x] : coords) v.entries[c / static_cast<std::size_t>(m)][c % static_cast<std::size_t>(m)] = x;
  if (matrix_product(a, v, u).entries != one.entries)
    throw std::domain_error("matrix '" + u.name + "' has a right inverse but no left inverse");
  return v;
}

namespace {

Rational json_rational(const nlohmann::json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_float()) throw std::invalid_argument(where + ": write non-integers as strings such as \"1/3\"");
  throw std::invalid_argument(where + ": expected a rational number");
}

Vec json_vec(const nlohmann::json& j, std::size_t m, const std::string& where) {
  if (!j.is_array() || j.size() != m)
    throw std::invalid_argument(where + ": expected an array of " + std::to_string(m) + " coordinates");
  Vec v;
  for (std::size_t k = 0; k < m; ++k) v.push_back(json_rational(j[k], where));
  return v;
}

}  // namespace

AlgebraMatrix matrix_from_json(const FiniteDimAlgebra& a, const nlohmann::json& j) {
  const std::size_t m = static_cast<std::size_t>(a.dim());
  AlgebraMatrix out;
  out.name = j.value("name", std::string("Q"));
  if (!j.contains("entries") || !j["entries"].is_array())
    throw std::invalid_argument("matrix '" + out.name + "': missing entries");
  const auto& e = j["entries"];
  const std::size_t count = e.size();
  std::size_t r = 0;
  while (r * r < count) ++r;
  if (r * r != count || r == 0)
    throw std::invalid_argument("matrix '" + out.name + "': entry count " + std::to_string(count) + " is not a square");
  out.size = static_cast<int>(r);
  for (std::size_t k = 0; k < count; ++k)
    out.entries.push_back(json_vec(e[k], m, "matrix '" + out.name + "' entry " + std::to_string(k)));
  return out;
}

CatalogAlgebra algebra_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("algebra must be a JSON object");
  for (const char* key : {"name", "basis", "unit", "table"})
    if (!j.contains(key)) throw std::invalid_argument(std::string("algebra: missing field '") + key + "'");
  std::vector<std::string> labels = j["basis"].get<std::vector<std::string>>();
  const std::size_t m = labels.size();
  Vec unit = json_vec(j["unit"], m, "unit");
  const auto& t = j["table"];
  if (!t.is_array() || t.size() != m) throw std::invalid_argument("table: expected " + std::to_string(m) + " rows");
  std::vector<std::vector<Vec>> table(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!t[i].is_array() || t[i].size() != m)
      throw std::invalid_argument("table row " + std::to_string(i) + ": expected " + std::to_string(m) + " products");
    for (std::size_t k = 0; k < m; ++k)
      table[i].push_back(json_vec(t[i][k], m, "table[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
  }
  CatalogAlgebra out{FiniteDimAlgebra(j["name"].get<std::string>(), labels, std::move(table), std::move(unit)), {}, {}};
  if (j.contains("idempotents"))
    for (const auto& q : j["idempotents"]) out.idempotents.push_back(matrix_from_json(out.algebra, q));
  if (j.contains("invertibles"))
    for (const auto& u : j["invertibles"]) out.invertibles.push_back(matrix_from_json(out.algebra, u));
  return out;
}

namespace {

std::filesystem::path algebra_dir() {
  if (const char* env = std::getenv("FIBRE_FORGE_DATA")) return std::filesystem::path(env) / "algebras";
  return std::filesystem::path(FIBRE_DATA_DIR) / "algebras";
}

}  // namespace

std::vector<std::string> catalog_algebra_names() {
  return {"rationals", "product", "dual-numbers", "matrices-2", "upper-triangular-2"};
}

CatalogAlgebra load_catalog_algebra(const std::string& name) {
  auto path = algebra_dir() / (name + ".json");
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("unknown algebra '" + name + "' (no " + path.string() + ")");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return algebra_from_json(j);
}

}  // namespace fibre
