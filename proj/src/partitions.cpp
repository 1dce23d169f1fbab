#include "symcap/symrep.hpp"

#include <algorithm>
#include <numeric>

#include "symcap/errors.hpp"

namespace symcap {

int Partition::weight() const { return std::accumulate(parts.begin(), parts.end(), 0); }

std::string Partition::label() const {
  std::string s = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(parts[i]);
  }
  return s + ")";
}

std::vector<Partition> enumerate_partitions(int d, int k) {
  if (d < 1 || k < 1) throw std::invalid_argument("enumerate_partitions needs d, k >= 1");
  std::vector<Partition> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int rem, int maxpart) -> void {
    if (rem == 0) {
      out.push_back({cur});
      return;
    }
    if (static_cast<int>(cur.size()) == d) return;
    for (int p = std::min(rem, maxpart); p >= 1; --p) {
      cur.push_back(p);
      self(self, rem - p, p);
      cur.pop_back();
    }
  };
  rec(rec, k, k);
  return out;
}

int Tableau::at(int row, int col) const {
  int off = 0;
  for (int r = 0; r < row; ++r) off += shape.parts[r];
  return entries[off + col];
}

std::vector<int> Tableau::content(int d) const {
  std::vector<int> c(d, 0);
  for (int e : entries) ++c[e];
  return c;
}

std::string Tableau::str() const {
  std::string s;
  std::size_t pos = 0;
  for (std::size_t r = 0; r < shape.parts.size(); ++r) {
    if (r) s += "/";
    for (int c = 0; c < shape.parts[r]; ++c) s += std::to_string(entries[pos++] + 1);
  }
  return s;
}

std::vector<Tableau> enumerate_ssyt(const Partition& shape, int d) {
  if (shape.height() > d) return {};
  const int n = shape.weight();
  std::vector<int> row_of(n), col_of(n), start(shape.height() + 1, 0);
  for (int r = 0, pos = 0; r < shape.height(); ++r) {
    start[r + 1] = start[r] + shape.parts[r];
    for (int c = 0; c < shape.parts[r]; ++c, ++pos) {
      row_of[pos] = r;
      col_of[pos] = c;
    }
  }
  std::vector<Tableau> out;
  std::vector<int> fill(n);
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == n) {
      out.push_back({shape, fill});
      return;
    }
    int r = row_of[pos], c = col_of[pos];
    int lo = 0;
    if (c > 0) lo = std::max(lo, fill[pos - 1]);
    if (r > 0) lo = std::max(lo, fill[start[r - 1] + c] + 1);
    // Leave room for the strictly increasing cells still below in this column.
    int below = 0;
    for (int rr = r + 1; rr < shape.height() && shape.parts[rr] > c; ++rr) ++below;
    for (int v = lo; v < d - below; ++v) {
      fill[pos] = v;
      self(self, pos + 1);
    }
  };
  rec(rec, 0);
  return out;
}

std::uint64_t count_ssyt(const Partition& shape, int d) {
  if (shape.height() > d) return 0;
  unsigned __int128 num = 1, den = 1;
  for (int r = 0; r < shape.height(); ++r)
    for (int c = 0; c < shape.parts[r]; ++c) {
      int arm = shape.parts[r] - c - 1, leg = 0;
      for (int rr = r + 1; rr < shape.height() && shape.parts[rr] > c; ++rr) ++leg;
      num *= static_cast<unsigned>(d + c - r);
      den *= static_cast<unsigned>(arm + leg + 1);
      if (num > (static_cast<unsigned __int128>(1) << 100)) throw CapacityError("tableau count overflow");
    }
  return static_cast<std::uint64_t>(num / den);
}

std::uint64_t SymmetryReport::max_block() const {
  std::uint64_t m = 0;
  for (auto b : block_sizes) m = std::max(m, b);
  return m;
}

SymmetryReport symmetry_census(int d, int k) {
  SymmetryReport rep;
  unsigned __int128 amb = 1;
  for (int v = 0; v < 2 * k; ++v) {
    amb *= static_cast<unsigned>(d);
    if (amb > UINT64_MAX) throw CapacityError("ambient dimension overflows 64 bits");
  }
  rep.ambient_dim = static_cast<std::uint64_t>(amb);
  rep.invariant_dim = orbit_count(d, k);
  for (const auto& p : enumerate_partitions(d, k)) {
    rep.labels.push_back(p.label());
    rep.block_sizes.push_back(count_ssyt(p, d));
  }
  return rep;
}

}  // namespace symcap
