#include <cmath>
#include <stdexcept>

#include "symcap/errors.hpp"
#include "symcap/symrep.hpp"

namespace symcap {

namespace {

std::uint64_t multinomial_step(std::uint64_t placed, int e) {
  std::uint64_t b = 1;
  for (int i = 1; i <= e; ++i) b = b * (placed - e + i) / i;
  return b;
}

struct TripleCounter {
  int d;
  const std::uint8_t* er;
  const std::uint8_t* es;
  const std::uint8_t* et;
  std::vector<int> used_r;  // running sum over z of B[x][y][z]
  std::vector<int> used_s;  // running sum over x of B[x][y][z]
  std::uint64_t total = 0;

  // Cell (x,z) of E^t is split over y; cells are visited in row-major order.
  void cell(int xz, std::uint64_t weight) {
    if (xz == d * d) {
      for (int c = 0; c < d * d; ++c)
        if (used_r[c] != er[c] || used_s[c] != es[c]) return;
      total += weight;
      return;
    }
    split(xz, 0, et[xz], 0, weight);
  }

  void split(int xz, int y, int rem, std::uint64_t placed, std::uint64_t weight) {
    const int x = xz / d, z = xz % d;
    if (y == d - 1) {
      int v = rem;
      if (used_r[x * d + y] + v > er[x * d + y] || used_s[y * d + z] + v > es[y * d + z]) return;
      used_r[x * d + y] += v;
      used_s[y * d + z] += v;
      cell(xz + 1, weight * multinomial_step(placed + v, v));
      used_r[x * d + y] -= v;
      used_s[y * d + z] -= v;
      return;
    }
    for (int v = 0; v <= rem; ++v) {
      if (used_r[x * d + y] + v > er[x * d + y] || used_s[y * d + z] + v > es[y * d + z]) break;
      used_r[x * d + y] += v;
      used_s[y * d + z] += v;
      split(xz, y + 1, rem - v, placed + v, weight * multinomial_step(placed + v, v));
      used_r[x * d + y] -= v;
      used_s[y * d + z] -= v;
    }
  }
};

bool marginals_match(const OrbitTable& table, std::size_t r, std::size_t s, std::size_t t) {
  const int d = table.d();
  for (int a = 0; a < d; ++a) {
    int rr = 0, rc = 0, sr = 0, sc = 0, tr = 0, tc = 0;
    for (int b = 0; b < d; ++b) {
      rr += table.entry(r, a, b);
      rc += table.entry(r, b, a);
      sr += table.entry(s, a, b);
      sc += table.entry(s, b, a);
      tr += table.entry(t, a, b);
      tc += table.entry(t, b, a);
    }
    if (rr != tr || rc != sr || sc != tc) return false;
  }
  return true;
}

}  // namespace

std::uint64_t regular_rep_params(const OrbitTable& table, std::size_t r, std::size_t s, std::size_t t) {
  if (r >= table.size() || s >= table.size() || t >= table.size())
    throw std::out_of_range("orbit index out of range");
  if (!marginals_match(table, r, s, t)) return 0;
  const int d = table.d();
  TripleCounter tc{d, table.entries(r), table.entries(s), table.entries(t),
                   std::vector<int>(d * d, 0), std::vector<int>(d * d, 0)};
  tc.cell(0, 1);
  return tc.total;
}

RealMatrix regular_rep_matrix(const OrbitTable& table, std::size_t r) {
  const std::size_t m = table.size();
  RealMatrix out = RealMatrix::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      std::uint64_t p = regular_rep_params(table, r, j, i);
      if (p)
        out(i, j) = static_cast<double>(p) *
                    std::sqrt(static_cast<double>(table.size_of(i)) / static_cast<double>(table.size_of(j)));
    }
  return out;
}

ComplexMatrix regular_rep(const InvariantOperator& op) {
  const OrbitTable& table = *op.table;
  ComplexMatrix out = ComplexMatrix::Zero(table.size(), table.size());
  for (std::size_t r = 0; r < table.size(); ++r)
    if (op.coeffs[r] != 0.0) out += op.coeffs[r] * regular_rep_matrix(table, r).cast<Complex>();
  return out;
}

InvariantOperator multiply(const InvariantOperator& a, const InvariantOperator& b) {
  if (a.table.get() != b.table.get() && (a.table->d() != b.table->d() || a.table->k() != b.table->k()))
    throw DimensionError("multiply: operands live on different orbit tables");
  const OrbitTable& table = *a.table;
  InvariantOperator out{a.table, std::vector<Complex>(table.size(), 0.0)};
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (a.coeffs[r] == 0.0) continue;
    for (std::size_t s = 0; s < table.size(); ++s) {
      if (b.coeffs[s] == 0.0) continue;
      for (std::size_t t = 0; t < table.size(); ++t) {
        std::uint64_t p = regular_rep_params(table, r, s, t);
        if (p) out.coeffs[t] += a.coeffs[r] * b.coeffs[s] * static_cast<double>(p);
      }
    }
  }
  return out;
}

}  // namespace symcap
