#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symcap/channels.hpp"
#include "symcap/program.hpp"
#include "symcap/symrep.hpp"

namespace symcap {

// t = num / 2^log2den in (0,1), num odd.
struct Dyadic {
  long long num = 1;
  int log2den = 1;

  double value() const;
  static Dyadic from_weight(double t);  // throws for non-dyadic weights
};

// Supplies a fresh Hermitian slack block for intermediate geometric means.
// slot counts the slacks requested by one encoding call.
using SlackProvider = std::function<AffineBlock(ReducedProgram&, int slot)>;

// Hermitian basis of dim×dim matrices: E_ii, E_ij + E_ji and, unless
// real_only, i(E_ij - E_ji).
std::vector<SparseHermitian> hermitian_basis(int dim, bool real_only);

// New scalars for a free Hermitian block, returned as an affine block.
AffineBlock add_free_hermitian(ReducedProgram& prog, const std::string& name, int dim, bool real_only);

SlackProvider free_hermitian_slack(int dim, bool real_only, const std::string& prefix);

// lhs ⪯ sigma #_t a, for dyadic t.
void encode_geomean_constraint(ReducedProgram& prog, const AffineBlock& lhs, const AffineBlock& sigma,
                               const AffineBlock& a, double t, const SlackProvider& slack = {},
                               const std::string& name = "geomean");

// Orbit coefficients of an operator: sparse list of (orbit, weight).
using OrbitCombo = std::vector<std::pair<std::size_t, Complex>>;

// S_k-invariant operators on H^{⊗k} together with their block-diagonal
// images, optionally restricted to orbits supported on masked cells.
class InvariantSpace {
 public:
  InvariantSpace(std::shared_ptr<const BlockCoefficients> coeffs, bool real_only);

  const OrbitTable& table() const { return coeffs_->table(); }
  std::shared_ptr<const OrbitTable> table_ptr() const { return coeffs_->table_ptr(); }
  const BlockCoefficients& coeffs() const { return *coeffs_; }
  bool real_only() const { return real_only_; }

  // Basis of the Hermitian part of the (restricted) invariant algebra.
  const std::vector<OrbitCombo>& basis() const { return basis_; }
  std::size_t num_blocks() const { return coeffs_->blocks().size(); }
  int block_size(std::size_t b) const { return static_cast<int>(coeffs_->blocks()[b].size()); }
  std::string block_label(std::size_t b) const { return coeffs_->blocks()[b].shape.label(); }

  SparseHermitian phi(std::size_t b, const OrbitCombo& combo) const;
  ComplexMatrix phi_dense(std::size_t b, const std::vector<Complex>& coeffs) const;

  // Operator from basis weights x[first .. first + basis().size()).
  std::vector<Complex> assemble(const std::vector<double>& x, std::size_t first) const;

 private:
  std::shared_ptr<const BlockCoefficients> coeffs_;
  bool real_only_;
  std::vector<OrbitCombo> basis_;
};

// Spaces for X⊗Y, X and Y at a fixed k, shared between programs.
struct ReductionContext {
  int dx = 0;
  int dy = 0;
  int k = 0;
  bool real_only = true;
  bool restricted = false;
  std::shared_ptr<const InvariantSpace> xy, x, y;
};

// Restriction of all spaces to orbits invariant under the diagonal local
// unitaries given per space; the caller must have verified the channels are
// invariant under them.
struct DiagonalSymmetry {
  std::vector<Eigen::VectorXcd> xy, x, y;
};

DiagonalSymmetry z2_symmetry();  // Z⊗Z on qubit X⊗Y

// Cached by (dx, dy, k, real_only, symmetry).
std::shared_ptr<const ReductionContext> reduction_context(int dx, int dy, int k, bool real_only,
                                                          const std::optional<DiagonalSymmetry>& sym = std::nullopt);

struct ProgramSpec {
  ReducedProgram program;
  std::size_t y_var = 0;  // the epigraph scalar being minimized
  std::map<std::string, std::size_t> operators;  // first scalar of each operator variable
};

ProgramSpec build_dsharp_dense(const ChoiMatrix& n, const ChoiMatrix& m, double alpha, int k, double perturb = 0.0);

ProgramSpec build_dsharp_reduced(const ChoiMatrix& n, const ChoiMatrix& m, double alpha, const ReductionContext& ctx,
                                 double perturb = 0.0);

ProgramSpec build_upsilon(const ChoiMatrix& n, double alpha, const ReductionContext& ctx);

ProgramSpec build_theta_stage1(const ChoiMatrix& n, double alpha, const ReductionContext& ctx1);

struct BoundResult {
  SDPSolution solution;
  double y = 0.0;       // optimal epigraph value
  double total = 0.0;   // log2(y)/(alpha-1), bits
  double per_copy = 0.0;
  int k = 1;
  bool inexact = false;  // solver stopped short of its tolerances; value is from an LMI-feasible point
};

BoundResult solve_bound(const ProgramSpec& spec, double alpha, int k, const SolverConfig& cfg = {});

struct ThetaResult {
  ChoiMatrix m_star;
  BoundResult stage1;
  BoundResult stage2;  // per_copy is the reported bound
};

ThetaResult run_theta(const ChoiMatrix& n, double alpha, int k, const SolverConfig& cfg = {},
                      const std::optional<DiagonalSymmetry>& sym = std::nullopt, double perturb = 0.0);

// The stage-1 optimizer recovered from a solved stage-1 program.
ChoiMatrix theta_choi_from_solution(const ProgramSpec& stage1, const ReductionContext& ctx1,
                                    const std::vector<double>& x);

double beta_sdp(const ChoiMatrix& j, const SolverConfig& cfg = {});

long long k_for_accuracy(double alpha, int dx, int dy, double epsilon);

// Checks that a channel commutes with the diagonal symmetry (throws if not).
void require_symmetry(const ChoiMatrix& c, const DiagonalSymmetry& sym);

}  // namespace symcap
