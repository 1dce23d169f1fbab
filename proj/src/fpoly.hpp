#pragma once

// Expansion engine for f_{tau,gamma}: distinct row rearrangements of both
// tableaux, with the column-stabilizer double sum collapsed to h!·det per
// column.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "symcap/symrep.hpp"

namespace symcap::detail {

struct PermTable {
  std::vector<std::vector<int>> perms;
  std::vector<int> signs;
};

inline PermTable perms_of(int h) {
  PermTable t;
  std::vector<int> p(h);
  for (int i = 0; i < h; ++i) p[i] = i;
  do {
    int inv = 0;
    for (int a = 0; a < h; ++a)
      for (int b = a + 1; b < h; ++b)
        if (p[a] > p[b]) ++inv;
    t.perms.push_back(p);
    t.signs.push_back(inv % 2 ? -1 : 1);
  } while (std::next_permutation(p.begin(), p.end()));
  return t;
}

// Every distinct filling obtained by permuting entries within rows, returned
// column by column: fill[c] lists column c from the first row down.
inline std::vector<std::vector<std::vector<int>>> row_rearrangements(const Tableau& t) {
  const auto& parts = t.shape.parts;
  std::vector<std::vector<std::vector<int>>> row_perms(parts.size());
  std::size_t off = 0;
  for (std::size_t r = 0; r < parts.size(); ++r) {
    std::vector<int> row(t.entries.begin() + off, t.entries.begin() + off + parts[r]);
    off += parts[r];
    std::sort(row.begin(), row.end());
    do row_perms[r].push_back(row);
    while (std::next_permutation(row.begin(), row.end()));
  }
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::size_t> choice(parts.size(), 0);
  const int ncols = parts.empty() ? 0 : parts[0];
  for (;;) {
    std::vector<std::vector<int>> cols(ncols);
    for (std::size_t r = 0; r < parts.size(); ++r)
      for (int c = 0; c < parts[r]; ++c) cols[c].push_back(row_perms[r][choice[r]][c]);
    out.push_back(std::move(cols));
    std::size_t r = 0;
    while (r < parts.size() && ++choice[r] == row_perms[r].size()) choice[r++] = 0;
    if (r == parts.size()) break;
  }
  return out;
}

class FExpander {
 public:
  FExpander(const Partition& shape, int d, const CellMask& mask) : d_(d), mask_(mask) {
    ncols_ = shape.parts.empty() ? 0 : shape.parts[0];
    int maxh = shape.height();
    for (int h = 0; h <= maxh; ++h) tables_.push_back(perms_of(h));
    heights_.assign(ncols_, 0);
    for (int p : shape.parts)
      for (int c = 0; c < p; ++c) ++heights_[c];
    scale_ = 1;
    for (int h : heights_)
      for (int f = 2; f <= h; ++f) scale_ *= f;
    counts_.assign(static_cast<std::size_t>(d) * d, 0);
  }

  // Calls sink(counts, coefficient) once per (signed) term.
  template <class Sink>
  void expand(const std::vector<std::vector<std::vector<int>>>& fa,
              const std::vector<std::vector<std::vector<int>>>& fb, Sink&& sink) {
    for (const auto& a : fa)
      for (const auto& b : fb) column(a, b, 0, 1, sink);
  }

 private:
  template <class Sink>
  void column(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b, int c,
              int sign, Sink& sink) {
    if (c == ncols_) {
      sink(counts_, static_cast<std::int64_t>(sign) * scale_);
      return;
    }
    const int h = heights_[c];
    const PermTable& pt = tables_[h];
    for (std::size_t s = 0; s < pt.perms.size(); ++s) {
      int i = 0;
      for (; i < h; ++i) {
        int cell = a[c][i] * d_ + b[c][pt.perms[s][i]];
        if (!mask_.empty() && !mask_[cell]) break;
        ++counts_[cell];
      }
      if (i == h) column(a, b, c + 1, sign * pt.signs[s], sink);
      for (int u = 0; u < i; ++u) --counts_[a[c][u] * d_ + b[c][pt.perms[s][u]]];
    }
  }

  int d_;
  const CellMask& mask_;
  int ncols_ = 0;
  std::vector<int> heights_;
  std::vector<PermTable> tables_;
  std::int64_t scale_ = 1;
  std::vector<int> counts_;
};

}  // namespace symcap::detail
