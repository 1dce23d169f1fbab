#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "symcap/symrep.hpp"

namespace symcap {

// Multiplicities of the irreducible representations of a finite group G in
// the local space. Only the counts enter the census.
struct GroupSymmetrySpec {
  std::vector<int> mult;
  std::vector<int> irrep_dims;  // defaults to all ones

  int ambient_dim() const;
  void check() const;
};

// Z2 acting on C^2 ⊗ C^2 through Z ⊗ Z: two irreps, each twice.
GroupSymmetrySpec gad_z2_spec();

struct HIrrepLabel {
  std::vector<int> composition;
  std::vector<Partition> parts;
  std::string str() const;
};

std::vector<std::pair<HIrrepLabel, std::uint64_t>> h_irrep_labels(const GroupSymmetrySpec& spec, int k);

SymmetryReport h_census(const GroupSymmetrySpec& spec, int k);

// Cells (a,b) of the local space on which an operator may be supported and
// stay invariant under conjugation by every diagonal unitary listed (given by
// its diagonal). Used to restrict program variables to the invariant orbits.
CellMask diagonal_invariance_mask(const std::vector<Eigen::VectorXcd>& generators, double tol = 1e-12);

}  // namespace symcap
