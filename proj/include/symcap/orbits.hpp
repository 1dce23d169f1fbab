#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "symcap/channels.hpp"
#include "symcap/linalg.hpp"

namespace symcap {

// E-matrix label of an S_k orbit of index pairs: E(a,b) counts the copies v
// with i_v = a and j_v = b.
struct OrbitKey {
  int d = 0;
  int k = 0;
  std::vector<int> E;  // row-major d×d

  int at(int a, int b) const { return E[static_cast<std::size_t>(a) * d + b]; }
  bool operator==(const OrbitKey&) const = default;
  OrbitKey transposed() const;
  bool is_diagonal() const;
  std::vector<int> row_sums() const;
  std::vector<int> col_sums() const;
};

using Word = std::vector<int>;

OrbitKey orbit_key_of_pair(const Word& i, const Word& j, int d);

// k! / prod E(a,b)!
std::uint64_t orbit_size(const OrbitKey& key);

// tr C_r: zero unless E is diagonal.
std::uint64_t orbit_trace(const OrbitKey& key);

class OrbitTable {
 public:
  static constexpr std::size_t kMaxOrbits = 10'000'000;

  OrbitTable(int d, int k);

  int d() const { return d_; }
  int k() const { return k_; }
  std::size_t size() const { return sizes_.size(); }

  OrbitKey key(std::size_t r) const;
  const std::uint8_t* entries(std::size_t r) const { return &flat_[r * cells_]; }
  int entry(std::size_t r, int a, int b) const { return flat_[r * cells_ + a * d_ + b]; }
  std::uint64_t size_of(std::size_t r) const { return sizes_[r]; }
  const std::vector<std::uint64_t>& sizes() const { return sizes_; }

  // Position of E in the lexicographic order.
  std::size_t index_of(const std::vector<int>& E) const;
  std::size_t index_of(const OrbitKey& key) const { return index_of(key.E); }
  std::size_t transpose_index(std::size_t r) const { return transpose_[r]; }
  bool is_diagonal(std::size_t r) const;

  // Lexicographically smallest pair (i, j) in the orbit.
  std::pair<Word, Word> representative(std::size_t r) const;

 private:
  std::uint64_t count_completions(int rem, int parts) const;

  int d_;
  int k_;
  int cells_;
  std::vector<std::uint8_t> flat_;
  std::vector<std::uint64_t> sizes_;
  std::vector<std::size_t> transpose_;
  std::vector<std::vector<std::uint64_t>> binom_;
};

std::uint64_t orbit_count(int d, int k);
std::shared_ptr<const OrbitTable> enumerate_orbits(int d, int k);

// Coefficient vector over the orbit basis {C_r}.
struct InvariantOperator {
  std::shared_ptr<const OrbitTable> table;
  std::vector<Complex> coeffs;

  bool is_hermitian(double tol = 1e-12) const;
};

InvariantOperator identity_operator(std::shared_ptr<const OrbitTable> table);

// z_r = product of Choi entries along a representative of orbit r.
InvariantOperator expand_tensor_power(const ChoiMatrix& choi, int k,
                                      std::shared_ptr<const OrbitTable> table);

// Sparse linear map between coefficient vectors.
struct OrbitLinearMap {
  struct Entry {
    std::size_t target;
    std::size_t source;
    double value;
  };
  std::size_t targets = 0;
  std::size_t sources = 0;
  std::vector<Entry> entries;

  std::vector<Complex> apply(const std::vector<Complex>& in) const;
};

// tr_{Y^k} in coefficient form: orbits of X⊗Y to orbits of X.
OrbitLinearMap partial_trace_map(const OrbitTable& table_xy, const OrbitTable& table_x, Dims dims);

// r -> T(r) with C_r^{T_Y} = C_{T(r)}.
std::vector<std::size_t> partial_transpose_map(const OrbitTable& table_xy, Dims dims);

// S -> Q^T (I_X ⊗ S) Q in coefficient form: orbits of Y to orbits of X⊗Y.
OrbitLinearMap identity_embed_map(const OrbitTable& table_y, const OrbitTable& table_xy, Dims dims);

// Dense helpers, only for small d^k.
std::size_t word_index(const Word& w, int d);
Word index_word(std::size_t idx, int d, int k);
ComplexMatrix dense_orbit_matrix(const OrbitTable& table, std::size_t r);
ComplexMatrix to_dense(const InvariantOperator& op);
// Coefficients of a dense S_k-invariant matrix, read off at representatives.
InvariantOperator from_dense(const ComplexMatrix& m, std::shared_ptr<const OrbitTable> table);

}  // namespace symcap
