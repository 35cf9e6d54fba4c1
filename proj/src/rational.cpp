#include "fibre/rational.hpp"

#include <stdexcept>

namespace fibre {

Rational parse_rational(const std::string& text) {
  std::string s = text;
  auto dot = s.find('.');
  if (dot != std::string::npos && s.find('/') == std::string::npos && s.find_first_of("eE") == std::string::npos) {
    // decimal literal: shift the point into a denominator
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::string denom = "1" + std::string(s.size() - dot - 1, '0');
    s = digits + "/" + denom;
  }
  Rational q;
  if (s.empty() || q.set_str(s, 10) != 0) throw std::invalid_argument("not a rational number: '" + text + "'");
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

void axpy(SparseVec& y, const Rational& a, const SparseVec& x) {
  if (a == 0) return;
  for (const auto& [k, v] : x) {
    auto [it, inserted] = y.try_emplace(k, 0);
    it->second += a * v;
    if (it->second == 0) y.erase(it);
  }
}

SparseVec scaled(const SparseVec& x, const Rational& a) {
  SparseVec out;
  if (a == 0) return out;
  for (const auto& [k, v] : x) out.emplace(k, v * a);
  return out;
}

SparseVec Echelon::reduce(SparseVec v, SparseVec* tag) const {
  for (auto it = v.begin(); it != v.end();) {
    auto row = rows_.find(it->first);
    if (row == rows_.end()) {
      ++it;
      continue;
    }
    const Rational c = it->second;
    // every other entry of the row lies strictly after the pivot
    for (auto r = std::next(row->second.v.begin()); r != row->second.v.end(); ++r) {
      auto [slot, inserted] = v.try_emplace(r->first, 0);
      slot->second -= c * r->second;
      if (slot->second == 0) v.erase(slot);
    }
    if (tag) axpy(*tag, c, row->second.tag);
    it = v.erase(it);
  }
  return v;
}

bool Echelon::insert(const SparseVec& v, std::size_t id) {
  SparseVec subtracted;
  SparseVec rem = reduce(v, track_ ? &subtracted : nullptr);
  SparseVec tag;
  if (track_) {
    tag.emplace(id, 1);
    axpy(tag, -1, subtracted);
  }
  if (rem.empty()) {
    if (track_) relations_.push_back(std::move(tag));
    return false;
  }
  return add_row(std::move(rem), std::move(tag));
}

bool Echelon::insert_untagged(const SparseVec& v) {
  SparseVec rem = reduce(v);
  if (rem.empty()) return false;
  return add_row(std::move(rem), {});
}

bool Echelon::add_row(SparseVec rem, SparseVec tag) {
  const Rational lead = rem.begin()->second;
  if (lead != 1) {
    const Rational inv = 1 / lead;
    for (auto& [k, x] : rem) x *= inv;
    for (auto& [k, x] : tag) x *= inv;
  }
  const std::size_t pivot = rem.begin()->first;
  rows_.emplace(pivot, Row{std::move(rem), std::move(tag)});
  return true;
}

SparseVec Echelon::coordinates(const SparseVec& v) const {
  if (!track_) throw std::logic_error("coordinates need a tracking echelon");
  SparseVec tag;
  SparseVec rem = reduce(v, &tag);
  if (!rem.empty()) throw std::domain_error("vector is not in the span");
  return tag;
}

SparseVec SparseMatrix::apply(const SparseVec& x) const {
  SparseVec out;
  for (const auto& [k, v] : x) axpy(out, v, cols.at(k));
  return out;
}

bool SparseMatrix::is_zero() const {
  for (const auto& c : cols)
    if (!c.empty()) return false;
  return true;
}

SparseMatrix compose(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out;
  out.rows = a.rows;
  out.cols.reserve(b.cols.size());
  for (const auto& c : b.cols) out.cols.push_back(a.apply(c));
  return out;
}

std::size_t rank(const SparseMatrix& m) {
  Echelon e;
  for (const auto& c : m.cols) e.insert(c);
  return e.rank();
}

}  // namespace fibre
