#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "symcap/linalg.hpp"
#include "symcap/solver.hpp"

namespace symcap {

// Hermitian matrix kept as its upper triangle (row <= col).
struct SparseHermitian {
  struct Entry {
    int row;
    int col;
    Complex value;
  };
  int dim = 0;
  std::vector<Entry> entries;

  void add(int row, int col, Complex v);  // any (row, col); stored upper
  bool empty() const { return entries.empty(); }
  bool is_real(double tol = 0.0) const;
  ComplexMatrix dense() const;
  static SparseHermitian from_dense(const ComplexMatrix& m, double drop = 0.0);
};

// constant + sum_v x_v * terms[v], a Hermitian matrix affine in the scalars.
struct AffineBlock {
  int dim = 0;
  ComplexMatrix constant;
  std::vector<std::pair<std::size_t, SparseHermitian>> terms;

  static AffineBlock zero(int dim);
  static AffineBlock constant_block(const ComplexMatrix& c);
  static AffineBlock scalar_identity(std::size_t var, int dim);  // x * I

  AffineBlock& add(const AffineBlock& other, double scale = 1.0);
  ComplexMatrix evaluate(const std::vector<double>& x) const;
  bool is_real() const;
};

AffineBlock operator+(const AffineBlock& a, const AffineBlock& b);
AffineBlock operator-(const AffineBlock& a, const AffineBlock& b);
// [[a, b], [b, c]] for Hermitian b.
AffineBlock stack2x2(const AffineBlock& a, const AffineBlock& b, const AffineBlock& c);

struct LinearConstraint {  // sum coeff * x + constant >= 0
  std::string name;
  std::vector<std::pair<std::size_t, double>> terms;
  double constant = 0.0;
};

struct ProgramBlockInfo {
  std::string space;      // "XY", "X" or "Y"
  std::string partition;  // e.g. "(2,1)"
  int size = 0;
};

struct ReducedProgram {
  std::vector<std::string> scalars;
  std::vector<ProgramBlockInfo> blocks;
  std::vector<std::pair<std::string, AffineBlock>> lmis;
  std::vector<LinearConstraint> linear;
  std::vector<std::pair<std::size_t, double>> objective;  // minimize

  std::size_t add_scalar(const std::string& name);
  std::size_t add_scalars(const std::string& prefix, std::size_t count);  // returns first index
  void add_lmi(const std::string& name, AffineBlock block);
  bool is_complex() const;
  void check() const;
};

nlohmann::json to_json(const ReducedProgram& prog);
ReducedProgram program_from_json(const nlohmann::json& j);

// Splits every LMI into the connected components of its sparsity pattern,
// embeds complex blocks as real ones, and collects linear constraints in one
// diagonal block.
StandardFormSDP lower_program(const ReducedProgram& prog);

// x is indexed like prog.scalars.
SDPSolution solve_program(const ReducedProgram& prog, const SolverConfig& cfg = {});

}  // namespace symcap
