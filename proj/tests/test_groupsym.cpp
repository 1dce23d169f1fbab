#include <cmath>

#include <doctest.h>

#include "symcap/groupsym.hpp"
#include "symcap/symrep.hpp"

using namespace symcap;

TEST_CASE("gad z2 spec") {
  const auto s = gad_z2_spec();
  CHECK(s.mult == std::vector<int>{2, 2});
  CHECK(s.ambient_dim() == 4);
  CHECK_NOTHROW(s.check());
  GroupSymmetrySpec bad{{0, 2}, {}};
  CHECK_THROWS(bad.check());
}

TEST_CASE("irrep labels") {
  const auto labels = h_irrep_labels(gad_z2_spec(), 2);
  CHECK(labels.size() == 5);
  std::uint64_t best = 0;
  for (const auto& [lab, m] : labels) {
    int total = 0;
    for (std::size_t i = 0; i < lab.composition.size(); ++i) {
      total += lab.composition[i];
      CHECK(lab.parts[i].weight() == lab.composition[i]);
      CHECK(lab.parts[i].height() <= 2);
    }
    CHECK(total == 2);
    std::uint64_t expect = 1;
    for (std::size_t i = 0; i < lab.parts.size(); ++i)
      if (lab.composition[i] > 0) expect *= count_ssyt(lab.parts[i], 2);
    CHECK(m == expect);
    best = std::max(best, m);
  }
  CHECK(best == 4);
}

TEST_CASE("trivial group reduces to the symmetric group") {
  GroupSymmetrySpec s{{4}, {}};
  for (int k = 1; k <= 6; ++k) {
    const auto h = h_census(s, k);
    const auto plain = symmetry_census(4, k);
    CHECK(h.invariant_dim == plain.invariant_dim);
    CHECK(h.block_count() == plain.block_count());
    CHECK(h.max_block() == plain.max_block());
  }
}

TEST_CASE("census") {
  const std::uint64_t dims[] = {36, 120, 330, 792, 1716, 3432, 6435, 11440, 19448};
  const std::uint64_t maxb[] = {4, 6, 9, 12, 16, 20, 25, 30, 36};
  const std::size_t count[] = {5, 8, 14, 20, 30, 40, 55, 70, 91};
  for (int k = 2; k <= 10; ++k) {
    CAPTURE(k);
    const auto c = h_census(gad_z2_spec(), k);
    CHECK(c.invariant_dim == dims[k - 2]);
    CHECK(c.max_block() == maxb[k - 2]);
    CHECK(c.block_count() == count[k - 2]);
    std::uint64_t sq = 0;
    for (auto b : c.block_sizes) sq += b * b;
    CHECK(sq == c.invariant_dim);
    CHECK(c.ambient_dim == static_cast<std::uint64_t>(std::pow(16.0, k)));
  }
  const auto one = h_census(gad_z2_spec(), 1);
  CHECK(one.invariant_dim == 8);
  CHECK(one.max_block() == 2);
  CHECK(one.block_count() == 2);
}

TEST_CASE("census bounds") {
  for (int k = 1; k <= 10; ++k) {
    const auto h = h_census(gad_z2_spec(), k);
    CHECK(h.invariant_dim <= symmetry_census(4, k).invariant_dim);
    CHECK(double(h.invariant_dim) <= k * std::pow(k + 2.0, 8) / 256.0);
  }
}

TEST_CASE("diagonal invariance mask") {
  Eigen::VectorXcd zz(4);
  zz << 1, -1, -1, 1;
  const auto m = diagonal_invariance_mask({zz});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) CHECK(m[a * 4 + b] == (zz(a) == zz(b)));
  CHECK(diagonal_invariance_mask({}).empty());
}
