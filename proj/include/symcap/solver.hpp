#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "symcap/linalg.hpp"

namespace symcap {

// Upper-triangle entry of a symmetric block matrix (0-based).
struct BlockEntry {
  int block;
  int row;
  int col;
  double value;
};

// SDPA primal form:  minimize c^T x  subject to  sum_i x_i F_i - F_0 ⪰ 0.
// F[0] is F_0; F[i] belongs to variable x_i (1-based, as in SDPA files).
// A negative block size marks a diagonal block.
struct StandardFormSDP {
  std::vector<int> block_sizes;
  std::vector<double> c;
  std::vector<std::vector<BlockEntry>> F;

  std::size_t num_vars() const { return c.size(); }
  void check() const;
};

struct SolverConfig {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 200;
  double damping = 0.98;
  bool verbose = false;
};

enum class SolveStatus { optimal, infeasible, max_iter, numerical_failure };

std::string to_string(SolveStatus s);

struct SDPSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  double objective = 0.0;       // c^T x at the returned x
  double dual_objective = 0.0;  // <F_0, Y> at the returned multiplier
  std::vector<double> x;
  // Relative residuals: the LMI side (sum x_i F_i - F_0 - Z) and the
  // multiplier side (F_i • Y - c_i).
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;  // relative duality gap
  int iterations = 0;
  std::string message;
};

SDPSolution solve(const StandardFormSDP& sdp, const SolverConfig& cfg = {});

// [[Re, -Im], [Im, Re]]
RealMatrix real_embed(const ComplexMatrix& h);

void write_sdpa(const StandardFormSDP& sdp, std::ostream& out);
StandardFormSDP read_sdpa(std::istream& in);
void write_sdpa_file(const StandardFormSDP& sdp, const std::string& path);
StandardFormSDP read_sdpa_file(const std::string& path);

}  // namespace symcap
