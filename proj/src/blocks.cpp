#include <limits>
#include <stdexcept>

#include "fpoly.hpp"
#include "symcap/errors.hpp"
#include "symcap/parallel.hpp"
#include "symcap/symrep.hpp"

namespace symcap {

namespace {

// Transportation feasibility: some E supported on allowed cells has row sums
// ra and column sums cb.
bool contents_compatible(const std::vector<int>& ra, const std::vector<int>& cb, const CellMask& mask,
                         int d) {
  if (mask.empty()) return true;
  for (unsigned s = 1; s < (1u << d); ++s) {
    int supply = 0, demand = 0;
    unsigned nbr = 0;
    for (int a = 0; a < d; ++a)
      if (s & (1u << a)) {
        supply += ra[a];
        for (int b = 0; b < d; ++b)
          if (mask[a * d + b]) nbr |= 1u << b;
      }
    for (int b = 0; b < d; ++b)
      if (nbr & (1u << b)) demand += cb[b];
    if (supply > demand) return false;
  }
  return true;
}

}  // namespace

std::int64_t PartitionBlock::raw_entry(std::size_t r, int tau, int gamma) const {
  if (row_group[r] != group_of[tau] || col_group[r] != group_of[gamma]) return 0;
  std::size_t kb = groups[col_group[r]].size();
  return raw[offsets[r] + local_of[tau] * kb + local_of[gamma]];
}

double PartitionBlock::normalized_entry(std::size_t r, int tau, int gamma) const {
  if (row_group[r] != group_of[tau] || col_group[r] != group_of[gamma]) return 0.0;
  std::size_t kb = groups[col_group[r]].size();
  return normalized[offsets[r] + local_of[tau] * kb + local_of[gamma]];
}

BlockCoefficients::BlockCoefficients(std::shared_ptr<const OrbitTable> table, CellMask mask)
    : table_(std::move(table)), mask_(std::move(mask)) {
  const int d = table_->d();
  if (!mask_.empty()) {
    if (mask_.size() != static_cast<std::size_t>(d) * d) throw DimensionError("cell mask has wrong size");
    for (int a = 0; a < d; ++a)
      if (!mask_[a * d + a]) throw std::invalid_argument("cell mask must allow the diagonal");
  }
  for (const auto& shape : enumerate_partitions(d, table_->k())) {
    blocks_.emplace_back();
    blocks_.back().shape = shape;
    build_block(blocks_.back());
  }
}

bool BlockCoefficients::orbit_allowed(std::size_t r) const {
  if (mask_.empty()) return true;
  const int d = table_->d();
  const std::uint8_t* e = table_->entries(r);
  for (int c = 0; c < d * d; ++c)
    if (e[c] && !mask_[c]) return false;
  return true;
}

void BlockCoefficients::build_block(PartitionBlock& blk) {
  const OrbitTable& table = *table_;
  const int d = table.d();
  blk.tableaux = enumerate_ssyt(blk.shape, d);
  const int m = static_cast<int>(blk.tableaux.size());
  blk.group_of.resize(m);
  blk.local_of.resize(m);
  std::vector<std::vector<int>> contents(m);
  for (int t = 0; t < m; ++t) {
    contents[t] = blk.tableaux[t].content(d);
    auto [it, fresh] = blk.group_by_content.try_emplace(contents[t], static_cast<int>(blk.groups.size()));
    if (fresh) blk.groups.emplace_back();
    blk.group_of[t] = it->second;
    blk.local_of[t] = static_cast<int>(blk.groups[it->second].size());
    blk.groups[it->second].push_back(t);
  }

  const std::size_t n = table.size();
  blk.offsets.assign(n + 1, 0);
  blk.row_group.assign(n, -1);
  blk.col_group.assign(n, -1);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t len = 0;
    if (orbit_allowed(r)) {
      OrbitKey key = table.key(r);
      auto ga = blk.group_by_content.find(key.row_sums());
      auto gb = blk.group_by_content.find(key.col_sums());
      if (ga != blk.group_by_content.end() && gb != blk.group_by_content.end()) {
        blk.row_group[r] = ga->second;
        blk.col_group[r] = gb->second;
        len = blk.groups[ga->second].size() * blk.groups[gb->second].size();
      }
    }
    blk.offsets[r + 1] = blk.offsets[r] + len;
  }
  blk.raw.assign(blk.offsets[n], 0);

  std::vector<std::vector<std::vector<std::vector<int>>>> fills(m);
  for (int t = 0; t < m; ++t) fills[t] = detail::row_rearrangements(blk.tableaux[t]);

  auto slot = [&](std::size_t r, int tau, int gamma) -> std::int64_t& {
    std::size_t kb = blk.groups[blk.col_group[r]].size();
    return blk.raw[blk.offsets[r] + blk.local_of[tau] * kb + blk.local_of[gamma]];
  };

  // B[tau][gamma][E] = B[gamma][tau][E^T], so only tau <= gamma is expanded.
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t ti) {
    const int tau = static_cast<int>(ti);
    detail::FExpander ex(blk.shape, d, mask_);
    for (int gamma = tau; gamma < m; ++gamma) {
      if (!contents_compatible(contents[tau], contents[gamma], mask_, d)) continue;
      ex.expand(fills[tau], fills[gamma], [&](const std::vector<int>& counts, std::int64_t c) {
        std::size_t r = table.index_of(counts);
        slot(r, tau, gamma) += c;
        if (gamma != tau) slot(table.transpose_index(r), gamma, tau) += c;
      });
    }
  });

  blk.gram = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t r = 0; r < n; ++r) {
    if (!table.is_diagonal(r) || blk.row_group[r] < 0) continue;
    const auto& g = blk.groups[blk.row_group[r]];
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j)
        blk.gram(g[i], g[j]) += static_cast<double>(blk.raw[blk.offsets[r] + i * g.size() + j]);
  }

  blk.gram_inv_sqrt = Eigen::MatrixXd::Zero(m, m);
  std::vector<Eigen::MatrixXd> ginv(blk.groups.size());
  for (std::size_t gi = 0; gi < blk.groups.size(); ++gi) {
    const auto& g = blk.groups[gi];
    Eigen::MatrixXd sub(g.size(), g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) sub(i, j) = blk.gram(g[i], g[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    if (es.eigenvalues().minCoeff() < 1e-10)
      throw std::runtime_error("singular Gram matrix for partition " + blk.shape.label());
    ginv[gi] = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
               es.eigenvectors().transpose();
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) blk.gram_inv_sqrt(g[i], g[j]) = ginv[gi](i, j);
  }

  blk.normalized.assign(blk.raw.size(), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    if (blk.row_group[r] < 0) continue;
    const auto& ga = ginv[blk.row_group[r]];
    const auto& gb = ginv[blk.col_group[r]];
    Eigen::MatrixXd b(ga.rows(), gb.rows());
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j)
        b(i, j) = static_cast<double>(blk.raw[blk.offsets[r] + i * b.cols() + j]);
    Eigen::MatrixXd nb = ga * b * gb;
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j) blk.normalized[blk.offsets[r] + i * b.cols() + j] = nb(i, j);
  }
}

std::shared_ptr<const BlockCoefficients> block_coefficients(int d, int k,
                                                            std::shared_ptr<const OrbitTable> table,
                                                            const CellMask& mask) {
  if (!table || table->d() != d || table->k() != k)
    throw DimensionError("block_coefficients: orbit table does not match (d, k)");
  return std::make_shared<const BlockCoefficients>(std::move(table), mask);
}

bool BlockDiagOperator::is_psd(double tol) const { return min_eigenvalue() >= -tol; }

double BlockDiagOperator::min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    if (b.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(b, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

BlockDiagOperator apply_phi(const InvariantOperator& op, const BlockCoefficients& coeffs) {
  const OrbitTable& table = coeffs.table();
  if (!op.table || op.table->d() != table.d() || op.table->k() != table.k() ||
      op.coeffs.size() != table.size())
    throw DimensionError("apply_phi: operator and coefficients disagree on (d, k)");
  double scale = 0.0;
  for (const auto& z : op.coeffs) scale = std::max(scale, std::abs(z));
  BlockDiagOperator out;
  for (const auto& blk : coeffs.blocks()) {
    ComplexMatrix m = ComplexMatrix::Zero(blk.size(), blk.size());
    for (std::size_t r = 0; r < table.size(); ++r) {
      const Complex z = op.coeffs[r];
      if (z == 0.0) continue;
      if (!coeffs.orbit_allowed(r)) {
        if (std::abs(z) > 1e-12 * std::max(1.0, scale))
          throw std::invalid_argument("apply_phi: operator has weight on masked orbits");
        continue;
      }
      if (blk.row_group[r] < 0) continue;
      const auto& ga = blk.groups[blk.row_group[r]];
      const auto& gb = blk.groups[blk.col_group[r]];
      const double* v = &blk.normalized[blk.offsets[r]];
      for (std::size_t i = 0; i < ga.size(); ++i)
        for (std::size_t j = 0; j < gb.size(); ++j) m(ga[i], gb[j]) += z * v[i * gb.size() + j];
    }
    out.shapes.push_back(blk.shape);
    out.blocks.push_back(std::move(m));
  }
  return out;
}

}  // namespace symcap
