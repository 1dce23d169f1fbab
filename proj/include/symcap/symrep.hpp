#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "symcap/orbits.hpp"

namespace symcap {

struct Partition {
  std::vector<int> parts;

  int weight() const;
  int height() const { return static_cast<int>(parts.size()); }
  std::string label() const;  // "(2,1)"
  bool operator==(const Partition&) const = default;
};

// Partitions of k with at most d parts, lexicographically descending.
std::vector<Partition> enumerate_partitions(int d, int k);

// Semistandard filling. Entries are 0-based and stored row after row.
struct Tableau {
  Partition shape;
  std::vector<int> entries;

  int at(int row, int col) const;
  std::vector<int> content(int d) const;
  std::string str() const;  // 1-based, rows separated by '/'
};

// All semistandard tableaux of the shape over [d], in lexicographic order of
// the concatenated rows.
std::vector<Tableau> enumerate_ssyt(const Partition& shape, int d);

// |T_{λ,d}| by the hook-content formula.
std::uint64_t count_ssyt(const Partition& shape, int d);

// Homogeneous polynomial in x_{a,b}; keys are row-major exponent matrices.
struct MonomialPoly {
  int d = 0;
  int k = 0;
  std::map<std::vector<int>, std::int64_t> terms;
};

MonomialPoly f_polynomial(const Tableau& tau, const Tableau& gamma, int d);

// Cells (a,b) allowed to carry exponent. Empty means all cells.
using CellMask = std::vector<bool>;

struct PartitionBlock {
  Partition shape;
  std::vector<Tableau> tableaux;
  std::vector<int> group_of;                     // tableau -> content group
  std::vector<int> local_of;                     // tableau -> position in its group
  std::vector<std::vector<int>> groups;          // content group -> tableau indices
  std::map<std::vector<int>, int> group_by_content;
  Eigen::MatrixXd gram;                          // integer valued
  Eigen::MatrixXd gram_inv_sqrt;
  // Per orbit r, the dense sub-block rows groups[ga(r)] × cols groups[gb(r)],
  // row-major from offsets[r].
  std::vector<std::size_t> offsets;
  std::vector<int> row_group;                    // per orbit, -1 when empty
  std::vector<int> col_group;
  std::vector<std::int64_t> raw;
  std::vector<double> normalized;

  std::size_t size() const { return tableaux.size(); }
  std::int64_t raw_entry(std::size_t r, int tau, int gamma) const;
  double normalized_entry(std::size_t r, int tau, int gamma) const;
};

class BlockCoefficients {
 public:
  BlockCoefficients(std::shared_ptr<const OrbitTable> table, CellMask mask);

  const OrbitTable& table() const { return *table_; }
  std::shared_ptr<const OrbitTable> table_ptr() const { return table_; }
  const std::vector<PartitionBlock>& blocks() const { return blocks_; }
  const CellMask& mask() const { return mask_; }
  bool orbit_allowed(std::size_t r) const;

 private:
  void build_block(PartitionBlock& blk);

  std::shared_ptr<const OrbitTable> table_;
  CellMask mask_;
  std::vector<PartitionBlock> blocks_;
};

std::shared_ptr<const BlockCoefficients> block_coefficients(int d, int k,
                                                            std::shared_ptr<const OrbitTable> table,
                                                            const CellMask& mask = {});

struct BlockDiagOperator {
  std::vector<Partition> shapes;
  std::vector<ComplexMatrix> blocks;

  bool is_psd(double tol = 1e-9) const;
  double min_eigenvalue() const;
};

BlockDiagOperator apply_phi(const InvariantOperator& op, const BlockCoefficients& coeffs);

// Structure constants of C_r C_s = sum_t p_rs^t C_t.
std::uint64_t regular_rep_params(const OrbitTable& table, std::size_t r, std::size_t s, std::size_t t);

// psi(C_r) in the basis C_i / ||C_i||.
RealMatrix regular_rep_matrix(const OrbitTable& table, std::size_t r);

// psi of a general coefficient vector.
ComplexMatrix regular_rep(const InvariantOperator& op);

// Product of invariant operators through the structure constants.
InvariantOperator multiply(const InvariantOperator& a, const InvariantOperator& b);

struct SymmetryReport {
  std::uint64_t ambient_dim = 0;
  std::uint64_t invariant_dim = 0;
  std::vector<std::string> labels;
  std::vector<std::uint64_t> block_sizes;
  std::uint64_t max_block() const;
  std::size_t block_count() const { return block_sizes.size(); }
};

SymmetryReport symmetry_census(int d, int k);

}  // namespace symcap
