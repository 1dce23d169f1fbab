#include "symcap/orbits.hpp"

#include <algorithm>
#include <string>

#include "symcap/errors.hpp"

namespace symcap {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw CapacityError("orbit size overflows 64 bits");
  return out;
}

std::uint64_t binom_u64(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    acc = acc * (n - r + i) / i;
    if (acc > UINT64_MAX) throw CapacityError("binomial overflows 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace

OrbitKey OrbitKey::transposed() const {
  OrbitKey t = *this;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) t.E[a * d + b] = at(b, a);
  return t;
}

bool OrbitKey::is_diagonal() const {
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (a != b && at(a, b) != 0) return false;
  return true;
}

std::vector<int> OrbitKey::row_sums() const {
  std::vector<int> s(d, 0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) s[a] += at(a, b);
  return s;
}

std::vector<int> OrbitKey::col_sums() const {
  std::vector<int> s(d, 0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) s[b] += at(a, b);
  return s;
}

OrbitKey orbit_key_of_pair(const Word& i, const Word& j, int d) {
  if (i.size() != j.size()) throw DimensionError("index words differ in length");
  OrbitKey key{d, static_cast<int>(i.size()), std::vector<int>(static_cast<std::size_t>(d) * d, 0)};
  for (std::size_t v = 0; v < i.size(); ++v) {
    if (i[v] < 0 || i[v] >= d || j[v] < 0 || j[v] >= d)
      throw std::out_of_range("symbol out of range in index word");
    ++key.E[i[v] * d + j[v]];
  }
  return key;
}

std::uint64_t orbit_size(const OrbitKey& key) {
  // Product of binomials avoids forming k! directly.
  std::uint64_t out = 1, placed = 0;
  for (int e : key.E) {
    placed += e;
    out = checked_mul(out, binom_u64(placed, e));
  }
  return out;
}

std::uint64_t orbit_trace(const OrbitKey& key) {
  if (!key.is_diagonal()) return 0;
  return orbit_size(key);
}

std::uint64_t orbit_count(int d, int k) {
  if (d < 1 || k < 1) throw std::invalid_argument("orbit_count needs d >= 1 and k >= 1");
  std::uint64_t n = static_cast<std::uint64_t>(d) * d;
  return binom_u64(k + n - 1, n - 1);
}

OrbitTable::OrbitTable(int d, int k) : d_(d), k_(k), cells_(d * d) {
  if (d < 1 || k < 1) throw std::invalid_argument("enumerate_orbits needs d >= 1 and k >= 1");
  if (k > 255) throw CapacityError("k above 255 is not supported");
  std::uint64_t count;
  try {
    count = orbit_count(d, k);
  } catch (const CapacityError&) {
    count = UINT64_MAX;
  }
  if (count > kMaxOrbits)
    throw CapacityError("orbit count for d=" + std::to_string(d) + ", k=" + std::to_string(k) +
                        " exceeds the cap of " + std::to_string(kMaxOrbits));

  binom_.assign(k + cells_ + 1, std::vector<std::uint64_t>(cells_ + 1, 0));
  for (int a = 0; a <= k + cells_; ++a) {
    binom_[a][0] = 1;
    for (int b = 1; b <= std::min(a, cells_); ++b)
      binom_[a][b] = binom_[a - 1][b - 1] + (b <= a - 1 ? binom_[a - 1][b] : 0);
  }

  flat_.reserve(count * cells_);
  sizes_.reserve(count);
  std::vector<int> cur(cells_, 0);
  // Compositions of k into cells_ parts in ascending lexicographic order.
  auto rec = [&](auto&& self, int pos, int rem) -> void {
    if (pos == cells_ - 1) {
      cur[pos] = rem;
      for (int v : cur) flat_.push_back(static_cast<std::uint8_t>(v));
      sizes_.push_back(orbit_size(OrbitKey{d_, k_, cur}));
      return;
    }
    for (int v = 0; v <= rem; ++v) {
      cur[pos] = v;
      self(self, pos + 1, rem - v);
    }
  };
  rec(rec, 0, k);

  transpose_.resize(sizes_.size());
  std::vector<int> t(cells_);
  for (std::size_t r = 0; r < sizes_.size(); ++r) {
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) t[a * d_ + b] = entry(r, b, a);
    transpose_[r] = index_of(t);
  }
}

std::uint64_t OrbitTable::count_completions(int rem, int parts) const {
  if (parts <= 0) return rem == 0 ? 1 : 0;
  return binom_[rem + parts - 1][parts - 1];
}

std::size_t OrbitTable::index_of(const std::vector<int>& E) const {
  if (static_cast<int>(E.size()) != cells_) throw DimensionError("E has wrong size");
  std::size_t rank = 0;
  int rem = k_;
  for (int i = 0; i < cells_ - 1; ++i) {
    if (E[i] < 0 || E[i] > rem) throw std::invalid_argument("E entries must be nonnegative and sum to k");
    for (int v = 0; v < E[i]; ++v) rank += count_completions(rem - v, cells_ - i - 1);
    rem -= E[i];
  }
  if (E[cells_ - 1] != rem) throw std::invalid_argument("E entries must sum to k");
  return rank;
}

OrbitKey OrbitTable::key(std::size_t r) const {
  OrbitKey key{d_, k_, std::vector<int>(cells_)};
  for (int c = 0; c < cells_; ++c) key.E[c] = flat_[r * cells_ + c];
  return key;
}

bool OrbitTable::is_diagonal(std::size_t r) const {
  for (int a = 0; a < d_; ++a)
    for (int b = 0; b < d_; ++b)
      if (a != b && entry(r, a, b) != 0) return false;
  return true;
}

std::pair<Word, Word> OrbitTable::representative(std::size_t r) const {
  Word i, j;
  i.reserve(k_);
  j.reserve(k_);
  for (int a = 0; a < d_; ++a)
    for (int b = 0; b < d_; ++b)
      for (int c = 0; c < entry(r, a, b); ++c) {
        i.push_back(a);
        j.push_back(b);
      }
  return {i, j};
}

std::shared_ptr<const OrbitTable> enumerate_orbits(int d, int k) {
  return std::make_shared<const OrbitTable>(d, k);
}

bool InvariantOperator::is_hermitian(double tol) const {
  for (std::size_t r = 0; r < coeffs.size(); ++r)
    if (std::abs(coeffs[r] - std::conj(coeffs[table->transpose_index(r)])) > tol) return false;
  return true;
}

InvariantOperator identity_operator(std::shared_ptr<const OrbitTable> table) {
  InvariantOperator op{table, std::vector<Complex>(table->size(), 0.0)};
  for (std::size_t r = 0; r < table->size(); ++r)
    if (table->is_diagonal(r)) op.coeffs[r] = 1.0;
  return op;
}

InvariantOperator expand_tensor_power(const ChoiMatrix& choi, int k,
                                      std::shared_ptr<const OrbitTable> table) {
  const int d = choi.dim();
  if (table->d() != d || table->k() != k) throw DimensionError("orbit table does not match (dX*dY, k)");
  InvariantOperator op{table, std::vector<Complex>(table->size())};
  const ComplexMatrix& j = choi.matrix();
  for (std::size_t r = 0; r < table->size(); ++r) {
    Complex z = 1.0;
    const std::uint8_t* e = table->entries(r);
    for (int a = 0; a < d && z != 0.0; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < e[a * d + b]; ++c) z *= j(a, b);
    op.coeffs[r] = z;
  }
  return op;
}

std::vector<Complex> OrbitLinearMap::apply(const std::vector<Complex>& in) const {
  if (in.size() != sources) throw DimensionError("coefficient vector has wrong length");
  std::vector<Complex> out(targets, 0.0);
  for (const auto& e : entries) out[e.target] += e.value * in[e.source];
  return out;
}

namespace {

void check_tables(const OrbitTable& xy, const OrbitTable& part, int dpart, Dims dims) {
  if (xy.d() != dims.dx * dims.dy) throw DimensionError("X⊗Y table does not match dX*dY");
  if (part.d() != dpart || part.k() != xy.k()) throw DimensionError("subsystem table mismatch");
}

}  // namespace

OrbitLinearMap partial_trace_map(const OrbitTable& table_xy, const OrbitTable& table_x, Dims dims) {
  check_tables(table_xy, table_x, dims.dx, dims);
  const int dx = dims.dx, dy = dims.dy, d = dx * dy;
  OrbitLinearMap map{table_x.size(), table_xy.size(), {}};
  std::vector<int> ex(dx * dx);
  for (std::size_t r = 0; r < table_xy.size(); ++r) {
    bool ok = true;
    std::fill(ex.begin(), ex.end(), 0);
    for (int a = 0; a < d && ok; ++a)
      for (int b = 0; b < d; ++b) {
        int e = table_xy.entry(r, a, b);
        if (e == 0) continue;
        if (a % dy != b % dy) {
          ok = false;
          break;
        }
        ex[(a / dy) * dx + b / dy] += e;
      }
    if (!ok) continue;
    // Number of Y-words completing a fixed X-pair: one multinomial per X cell.
    std::uint64_t mult = 1;
    for (int x = 0; x < dx; ++x)
      for (int xp = 0; xp < dx; ++xp) {
        std::uint64_t placed = 0;
        for (int y = 0; y < dy; ++y) {
          int e = table_xy.entry(r, x * dy + y, xp * dy + y);
          placed += e;
          mult = checked_mul(mult, binom_u64(placed, e));
        }
      }
    map.entries.push_back({table_x.index_of(ex), r, static_cast<double>(mult)});
  }
  return map;
}

std::vector<std::size_t> partial_transpose_map(const OrbitTable& table_xy, Dims dims) {
  const int dy = dims.dy, d = dims.dx * dims.dy;
  if (table_xy.d() != d) throw DimensionError("X⊗Y table does not match dX*dY");
  std::vector<std::size_t> perm(table_xy.size());
  std::vector<int> t(d * d);
  for (std::size_t r = 0; r < table_xy.size(); ++r) {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        // (x,y),(x',y') <- (x,y'),(x',y)
        int src_a = (a / dy) * dy + b % dy, src_b = (b / dy) * dy + a % dy;
        t[a * d + b] = table_xy.entry(r, src_a, src_b);
      }
    perm[r] = table_xy.index_of(t);
  }
  return perm;
}

OrbitLinearMap identity_embed_map(const OrbitTable& table_y, const OrbitTable& table_xy, Dims dims) {
  check_tables(table_xy, table_y, dims.dy, dims);
  const int dy = dims.dy, d = dims.dx * dims.dy;
  OrbitLinearMap map{table_xy.size(), table_y.size(), {}};
  std::vector<int> ey(dy * dy);
  for (std::size_t r = 0; r < table_xy.size(); ++r) {
    bool ok = true;
    std::fill(ey.begin(), ey.end(), 0);
    for (int a = 0; a < d && ok; ++a)
      for (int b = 0; b < d; ++b) {
        int e = table_xy.entry(r, a, b);
        if (e == 0) continue;
        if (a / dy != b / dy) {
          ok = false;
          break;
        }
        ey[(a % dy) * dy + b % dy] += e;
      }
    if (ok) map.entries.push_back({r, table_y.index_of(ey), 1.0});
  }
  return map;
}

std::size_t word_index(const Word& w, int d) {
  std::size_t idx = 0;
  for (int s : w) idx = idx * d + s;
  return idx;
}

Word index_word(std::size_t idx, int d, int k) {
  Word w(k);
  for (int v = k - 1; v >= 0; --v) {
    w[v] = static_cast<int>(idx % d);
    idx /= d;
  }
  return w;
}

namespace {

std::size_t dense_dim(const OrbitTable& table) {
  std::size_t n = 1;
  for (int v = 0; v < table.k(); ++v) {
    n *= table.d();
    if (n > 4096) throw CapacityError("dense reconstruction limited to dimension 4096");
  }
  return n;
}

}  // namespace

ComplexMatrix dense_orbit_matrix(const OrbitTable& table, std::size_t r) {
  std::size_t n = dense_dim(table);
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    Word i = index_word(a, table.d(), table.k());
    for (std::size_t b = 0; b < n; ++b)
      if (table.index_of(orbit_key_of_pair(i, index_word(b, table.d(), table.k()), table.d())) == r)
        m(a, b) = 1.0;
  }
  return m;
}

ComplexMatrix to_dense(const InvariantOperator& op) {
  const OrbitTable& table = *op.table;
  std::size_t n = dense_dim(table);
  ComplexMatrix m(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    Word i = index_word(a, table.d(), table.k());
    for (std::size_t b = 0; b < n; ++b)
      m(a, b) = op.coeffs[table.index_of(orbit_key_of_pair(i, index_word(b, table.d(), table.k()), table.d()))];
  }
  return m;
}

InvariantOperator from_dense(const ComplexMatrix& m, std::shared_ptr<const OrbitTable> table) {
  std::size_t n = dense_dim(*table);
  if (static_cast<std::size_t>(m.rows()) != n || static_cast<std::size_t>(m.cols()) != n)
    throw DimensionError("dense matrix does not match the orbit table");
  InvariantOperator op{table, std::vector<Complex>(table->size())};
  for (std::size_t r = 0; r < table->size(); ++r) {
    auto [i, j] = table->representative(r);
    op.coeffs[r] = m(word_index(i, table->d()), word_index(j, table->d()));
  }
  return op;
}

}  // namespace symcap
