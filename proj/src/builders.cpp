#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "symcap/errors.hpp"
#include "symcap/groupsym.hpp"
#include "symcap/orbits.hpp"
#include "symcap/parallel.hpp"
#include "symcap/programs.hpp"

namespace symcap {

// ---------------------------------------------------------------------------
// InvariantSpace

InvariantSpace::InvariantSpace(std::shared_ptr<const BlockCoefficients> coeffs, bool real_only)
    : coeffs_(std::move(coeffs)), real_only_(real_only) {
  const OrbitTable& t = coeffs_->table();
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (!coeffs_->orbit_allowed(r)) continue;
    const std::size_t rt = t.transpose_index(r);
    if (rt < r) continue;
    if (rt == r) {
      basis_.push_back({{r, 1.0}});
      continue;
    }
    basis_.push_back({{r, 1.0}, {rt, 1.0}});
    if (!real_only_) basis_.push_back({{r, Complex(0.0, 1.0)}, {rt, Complex(0.0, -1.0)}});
  }
}

SparseHermitian InvariantSpace::phi(std::size_t b, const OrbitCombo& combo) const {
  const PartitionBlock& blk = coeffs_->blocks()[b];
  const int m = static_cast<int>(blk.size());
  std::unordered_map<long long, Complex> acc;
  double scale = 0.0;
  for (const auto& [r, z] : combo) {
    if (blk.row_group[r] < 0) continue;
    const auto& ga = blk.groups[blk.row_group[r]];
    const auto& gb = blk.groups[blk.col_group[r]];
    const double* v = &blk.normalized[blk.offsets[r]];
    for (std::size_t i = 0; i < ga.size(); ++i)
      for (std::size_t j = 0; j < gb.size(); ++j) {
        if (ga[i] > gb[j]) continue;  // upper triangle carries the Hermitian matrix
        const double c = v[i * gb.size() + j];
        if (c == 0.0) continue;
        acc[static_cast<long long>(ga[i]) * m + gb[j]] += z * c;
        scale = std::max(scale, std::abs(z * c));
      }
  }
  SparseHermitian out{m, {}};
  std::vector<std::pair<long long, Complex>> items(acc.begin(), acc.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, val] : items) {
    if (std::abs(val) <= 1e-13 * scale) continue;
    Complex v = val;
    if (std::abs(v.imag()) <= 1e-15 * scale) v = v.real();
    out.entries.push_back({static_cast<int>(key / m), static_cast<int>(key % m), v});
  }
  return out;
}

ComplexMatrix InvariantSpace::phi_dense(std::size_t b, const std::vector<Complex>& coeffs) const {
  OrbitCombo combo;
  for (std::size_t r = 0; r < coeffs.size(); ++r)
    if (coeffs[r] != 0.0) combo.emplace_back(r, coeffs[r]);
  ComplexMatrix m = phi(b, combo).dense();
  return m;
}

std::vector<Complex> InvariantSpace::assemble(const std::vector<double>& x, std::size_t first) const {
  std::vector<Complex> out(table().size(), 0.0);
  for (std::size_t i = 0; i < basis_.size(); ++i)
    for (const auto& [r, z] : basis_[i]) out[r] += x.at(first + i) * z;
  return out;
}

// ---------------------------------------------------------------------------
// Contexts

DiagonalSymmetry z2_symmetry() {
  DiagonalSymmetry s;
  Eigen::VectorXcd zz(4), z(2);
  zz << 1.0, -1.0, -1.0, 1.0;
  z << 1.0, -1.0;
  s.xy = {zz};
  s.x = {z};
  s.y = {z};
  return s;
}

void require_symmetry(const ChoiMatrix& c, const DiagonalSymmetry& sym) {
  if (sym.x.size() != sym.y.size()) throw std::invalid_argument("symmetry: X and Y generator counts differ");
  std::vector<UnitaryPair> gens;
  for (std::size_t i = 0; i < sym.x.size(); ++i) {
    if (sym.x[i].size() != c.dx() || sym.y[i].size() != c.dy())
      throw DimensionError("symmetry generators do not match the channel dimensions");
    gens.emplace_back(sym.x[i].asDiagonal().toDenseMatrix(), sym.y[i].asDiagonal().toDenseMatrix());
  }
  if (!check_group_symmetry(c, gens, 1e-10))
    throw std::invalid_argument("channel is not invariant under the requested symmetry group");
}

namespace {

std::string mask_key(const CellMask& m) {
  std::string s;
  for (bool b : m) s.push_back(b ? '1' : '0');
  return s;
}

std::shared_ptr<const BlockCoefficients> cached_coefficients(int d, int k, const CellMask& mask) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, std::string>, std::shared_ptr<const BlockCoefficients>> cache;
  const auto key = std::make_tuple(d, k, mask_key(mask));
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto coeffs = block_coefficients(d, k, enumerate_orbits(d, k), mask);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, coeffs);
  return coeffs;
}

std::string sym_key(const std::optional<DiagonalSymmetry>& sym) {
  if (!sym) return "none";
  std::ostringstream os;
  os.precision(17);
  for (const auto* list : {&sym->xy, &sym->x, &sym->y}) {
    os << '|';
    for (const auto& v : *list)
      for (Eigen::Index i = 0; i < v.size(); ++i) os << v(i).real() << ',' << v(i).imag() << ';';
  }
  return os.str();
}

}  // namespace

std::shared_ptr<const ReductionContext> reduction_context(int dx, int dy, int k, bool real_only,
                                                          const std::optional<DiagonalSymmetry>& sym) {
  if (dx < 1 || dy < 1 || k < 1) throw DimensionError("reduction context needs positive dimensions and k");
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const ReductionContext>> cache;
  std::ostringstream key;
  key << dx << ' ' << dy << ' ' << k << ' ' << real_only << ' ' << sym_key(sym);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key.str()); it != cache.end()) return it->second;
  }
  auto ctx = std::make_shared<ReductionContext>();
  ctx->dx = dx;
  ctx->dy = dy;
  ctx->k = k;
  ctx->real_only = real_only;
  ctx->restricted = sym.has_value();
  CellMask mxy, mx, my;
  if (sym) {
    mxy = diagonal_invariance_mask(sym->xy);
    mx = diagonal_invariance_mask(sym->x);
    my = diagonal_invariance_mask(sym->y);
    if (!mxy.empty() && static_cast<int>(mxy.size()) != dx * dy * dx * dy)
      throw DimensionError("X⊗Y symmetry generators have the wrong dimension");
  }
  ctx->xy = std::make_shared<InvariantSpace>(cached_coefficients(dx * dy, k, mxy), real_only);
  ctx->x = std::make_shared<InvariantSpace>(cached_coefficients(dx, k, mx), real_only);
  ctx->y = std::make_shared<InvariantSpace>(cached_coefficients(dy, k, my), real_only);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key.str(), ctx);
  return ctx;
}

// ---------------------------------------------------------------------------
// Program assembly helpers

namespace {

// An invariant operator variable: weights on space.basis().
struct OpVar {
  const InvariantSpace* space = nullptr;
  std::size_t first = 0;
};

OpVar add_op(ReducedProgram& prog, const InvariantSpace& space, const std::string& name) {
  return {&space, prog.add_scalars(name, space.basis().size())};
}

// Images of a variable's basis under a coefficient map into another space.
struct MappedVar {
  const InvariantSpace* target = nullptr;
  std::size_t first = 0;
  std::vector<OrbitCombo> images;  // per source basis element
};

MappedVar identity_mapped(const OpVar& v) { return {v.space, v.first, v.space->basis()}; }

MappedVar through_map(const OpVar& v, const InvariantSpace& target, const OrbitLinearMap& map) {
  std::vector<std::vector<std::pair<std::size_t, double>>> by_source(map.sources);
  for (const auto& e : map.entries) by_source[e.source].emplace_back(e.target, e.value);
  MappedVar out{&target, v.first, {}};
  for (const auto& combo : v.space->basis()) {
    std::map<std::size_t, Complex> acc;
    for (const auto& [r, z] : combo)
      for (const auto& [t, w] : by_source[r]) acc[t] += z * w;
    OrbitCombo img;
    for (const auto& [t, z] : acc)
      if (z != 0.0) img.emplace_back(t, z);
    out.images.push_back(std::move(img));
  }
  return out;
}

MappedVar through_perm(const OpVar& v, const std::vector<std::size_t>& perm) {
  MappedVar out{v.space, v.first, {}};
  for (const auto& combo : v.space->basis()) {
    OrbitCombo img;
    for (const auto& [r, z] : combo) img.emplace_back(perm[r], z);
    out.images.push_back(std::move(img));
  }
  return out;
}

// Per-block affine images, computed once per block in parallel.
std::vector<AffineBlock> blocks_of(const MappedVar& v) {
  const InvariantSpace& sp = *v.target;
  std::vector<AffineBlock> out(sp.num_blocks());
  parallel_for(sp.num_blocks(), [&](std::size_t b) {
    AffineBlock blk = AffineBlock::zero(sp.block_size(b));
    for (std::size_t i = 0; i < v.images.size(); ++i) {
      SparseHermitian s = sp.phi(b, v.images[i]);
      if (!s.empty()) blk.terms.emplace_back(v.first + i, std::move(s));
    }
    out[b] = std::move(blk);
  });
  return out;
}

std::vector<AffineBlock> blocks_of(const OpVar& v) { return blocks_of(identity_mapped(v)); }

std::vector<AffineBlock> constant_blocks(const InvariantSpace& sp, const InvariantOperator& op) {
  BlockDiagOperator d = apply_phi(op, sp.coeffs());
  std::vector<AffineBlock> out;
  for (auto& m : d.blocks) out.push_back(AffineBlock::constant_block(m));
  return out;
}

std::vector<AffineBlock> choi_blocks(const InvariantSpace& sp, const ChoiMatrix& c, int k) {
  return constant_blocks(sp, expand_tensor_power(c, k, sp.table_ptr()));
}

std::vector<AffineBlock> identity_blocks(const InvariantSpace& sp) {
  return constant_blocks(sp, identity_operator(sp.table_ptr()));
}

void register_blocks(ReducedProgram& prog, const std::string& space, const InvariantSpace& sp) {
  for (std::size_t b = 0; b < sp.num_blocks(); ++b) prog.blocks.push_back({space, sp.block_label(b), sp.block_size(b)});
}

std::string tag(const InvariantSpace& sp, std::size_t b) { return "[" + sp.block_label(b) + "]"; }

// Orbit-parametrized slacks, one invariant operator per slot shared by all
// blocks of the space.
class SharedSlacks {
 public:
  SharedSlacks(const InvariantSpace& sp, std::string prefix) : sp_(sp), prefix_(std::move(prefix)) {}

  SlackProvider for_block(std::size_t b) {
    return [this, b](ReducedProgram& prog, int slot) {
      auto it = slots_.find(slot);
      if (it == slots_.end()) {
        OpVar v = add_op(prog, sp_, prefix_ + std::to_string(slot));
        it = slots_.emplace(slot, blocks_of(v)).first;
      }
      return it->second[b];
    };
  }

 private:
  const InvariantSpace& sp_;
  std::string prefix_;
  std::map<int, std::vector<AffineBlock>> slots_;
};

void require_real_compat(const ChoiMatrix& c, const ReductionContext& ctx) {
  if (c.dx() != ctx.dx || c.dy() != ctx.dy) throw DimensionError("channel dimensions do not match the context");
  if (ctx.real_only && c.matrix().imag().cwiseAbs().maxCoeff() > 1e-14)
    throw std::invalid_argument("complex Choi matrix used with a real-only context");
}

void require_support(const ChoiMatrix& n, const ChoiMatrix& m, double perturb) {
  if (perturb == 0.0 && !support_contained(n.matrix(), m.matrix()))
    throw InfeasibleError("infeasible: support of J^N is not contained in the support of J^M (divergence is +inf)");
}

void check_alpha(double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  Dyadic::from_weight(1.0 / alpha);
}

// y·I - phi_X(tr_Y a) ⪰ 0 per X block.
void add_norm_epigraph(ReducedProgram& prog, const ReductionContext& ctx, const OpVar& a, std::size_t y,
                       const std::string& name) {
  const OrbitLinearMap tr = partial_trace_map(ctx.xy->table(), ctx.x->table(), {ctx.dx, ctx.dy});
  auto blocks = blocks_of(through_map(a, *ctx.x, tr));
  for (std::size_t b = 0; b < blocks.size(); ++b)
    prog.add_lmi(name + tag(*ctx.x, b), AffineBlock::scalar_identity(y, blocks[b].dim) - blocks[b]);
}

}  // namespace

// ---------------------------------------------------------------------------
// D#

ProgramSpec build_dsharp_reduced(const ChoiMatrix& n, const ChoiMatrix& m, double alpha, const ReductionContext& ctx,
                                 double perturb) {
  check_alpha(alpha);
  require_real_compat(n, ctx);
  require_real_compat(m, ctx);
  require_support(n, m, perturb);
  const InvariantSpace& xy = *ctx.xy;
  ProgramSpec spec;
  ReducedProgram& prog = spec.program;
  register_blocks(prog, "XY", xy);
  register_blocks(prog, "X", *ctx.x);

  const auto lhs = choi_blocks(xy, n, ctx.k);
  auto sigma = choi_blocks(xy, m, ctx.k);
  const OpVar a = add_op(prog, xy, "A");
  spec.operators["A"] = a.first;
  const auto a_blocks = blocks_of(a);
  SharedSlacks slacks(xy, "G");
  for (std::size_t b = 0; b < xy.num_blocks(); ++b) {
    if (perturb != 0.0) sigma[b].constant += perturb * ComplexMatrix::Identity(sigma[b].dim, sigma[b].dim);
    encode_geomean_constraint(prog, lhs[b], sigma[b], a_blocks[b], 1.0 / alpha, slacks.for_block(b),
                              "geomean" + tag(xy, b));
  }
  spec.y_var = prog.add_scalar("y");
  add_norm_epigraph(prog, ctx, a, spec.y_var, "norm");
  prog.objective = {{spec.y_var, 1.0}};
  return spec;
}

namespace {

ComplexMatrix kron_power(const ComplexMatrix& m, int k) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int i = 0; i < k; ++i) out = kron(out, m);
  return out;
}

}  // namespace

ProgramSpec build_dsharp_dense(const ChoiMatrix& n, const ChoiMatrix& m, double alpha, int k, double perturb) {
  check_alpha(alpha);
  if (n.dx() != m.dx() || n.dy() != m.dy()) throw DimensionError("channels differ in dimensions");
  if (k < 1) throw DimensionError("k must be positive");
  require_support(n, m, perturb);
  const int d = n.dim();
  const int dx = n.dx(), dy = n.dy();
  long long dim = 1, dimx = 1;
  for (int i = 0; i < k; ++i) {
    dim *= d;
    dimx *= dx;
    if (dim > 64) throw DimensionError("dense formulation limited to (dX dY)^k <= 64");
  }
  const bool real = n.matrix().imag().cwiseAbs().maxCoeff() == 0.0 && m.matrix().imag().cwiseAbs().maxCoeff() == 0.0;
  ProgramSpec spec;
  ReducedProgram& prog = spec.program;
  prog.blocks.push_back({"XY", "dense", static_cast<int>(dim)});
  prog.blocks.push_back({"X", "dense", static_cast<int>(dimx)});

  const AffineBlock lhs = AffineBlock::constant_block(kron_power(n.matrix(), k));
  ComplexMatrix s = kron_power(m.matrix(), k);
  if (perturb != 0.0) s += perturb * ComplexMatrix::Identity(dim, dim);
  const AffineBlock sigma = AffineBlock::constant_block(s);
  const AffineBlock a = add_free_hermitian(prog, "A", static_cast<int>(dim), real);
  spec.operators["A"] = a.terms.front().first;
  encode_geomean_constraint(prog, lhs, sigma, a, 1.0 / alpha, free_hermitian_slack(static_cast<int>(dim), real, "G"),
                            "geomean");

  // tr over the Y factors of each copy
  AffineBlock tr = AffineBlock::zero(static_cast<int>(dimx));
  for (const auto& [var, h] : a.terms) {
    SparseHermitian img{static_cast<int>(dimx), {}};
    for (const auto& e : h.entries) {
      long long ra = e.row, cb = e.col, xa = 0, xb = 0, pow = 1;
      bool same = true;
      for (int c = 0; c < k; ++c) {
        const long long da = ra % d, db = cb % d;
        ra /= d;
        cb /= d;
        if (da % dy != db % dy) same = false;
        xa += (da / dy) * pow;
        xb += (db / dy) * pow;
        pow *= dx;
      }
      if (same) img.add(static_cast<int>(xa), static_cast<int>(xb), e.value);
    }
    if (!img.empty()) tr.terms.emplace_back(var, std::move(img));
  }
  spec.y_var = prog.add_scalar("y");
  prog.add_lmi("norm", AffineBlock::scalar_identity(spec.y_var, static_cast<int>(dimx)) - tr);
  prog.objective = {{spec.y_var, 1.0}};
  return spec;
}

BoundResult solve_bound(const ProgramSpec& spec, double alpha, int k, const SolverConfig& cfg) {
  BoundResult r;
  r.k = k;
  r.solution = solve_program(spec.program, cfg);
  if (r.solution.status != SolveStatus::optimal) {
    // y from an LMI-feasible point is still a valid upper bound.
    const bool usable = r.solution.status != SolveStatus::infeasible && r.solution.primal_residual <= 1e-7 &&
                        r.solution.gap <= 1e-5;
    if (r.solution.status == SolveStatus::infeasible)
      throw InfeasibleError("infeasible: " + r.solution.message);
    if (!usable) throw CapacityError("solver failed: " + to_string(r.solution.status) + " " + r.solution.message);
    r.inexact = true;
  }
  r.y = r.solution.x.at(spec.y_var);
  if (r.y <= 0.0) {
    r.total = -std::numeric_limits<double>::infinity();
  } else {
    r.total = std::log2(r.y) / (alpha - 1.0);
  }
  r.per_copy = r.total / k;
  return r;
}

// ---------------------------------------------------------------------------
// Upsilon

ProgramSpec build_upsilon(const ChoiMatrix& n, double alpha, const ReductionContext& ctx) {
  check_alpha(alpha);
  require_real_compat(n, ctx);
  const InvariantSpace& xy = *ctx.xy;
  const InvariantSpace& ys = *ctx.y;
  const Dims dims{ctx.dx, ctx.dy};
  ProgramSpec spec;
  ReducedProgram& prog = spec.program;
  register_blocks(prog, "XY", xy);
  register_blocks(prog, "X", *ctx.x);
  register_blocks(prog, "Y", ys);

  const OpVar z = add_op(prog, xy, "A");
  const OpVar x = add_op(prog, xy, "M");
  const OpVar rv = add_op(prog, xy, "R");
  const OpVar w = add_op(prog, ys, "S");
  spec.operators = {{"A", z.first}, {"M", x.first}, {"R", rv.first}, {"S", w.first}};

  const auto transpose = partial_transpose_map(xy.table(), dims);
  const auto lhs = choi_blocks(xy, n, ctx.k);
  const auto zb = blocks_of(z);
  const auto xb = blocks_of(x);
  const auto rb = blocks_of(rv);
  const auto xtb = blocks_of(through_perm(x, transpose));
  const auto rtb = blocks_of(through_perm(rv, transpose));
  const auto wb = blocks_of(through_map(w, xy, identity_embed_map(ys.table(), xy.table(), dims)));
  SharedSlacks slacks(xy, "G");
  for (std::size_t b = 0; b < xy.num_blocks(); ++b) {
    const std::string t = tag(xy, b);
    encode_geomean_constraint(prog, lhs[b], xb[b], zb[b], 1.0 / alpha, slacks.for_block(b), "geomean" + t);
    prog.add_lmi("R+MT" + t, rb[b] + xtb[b]);
    prog.add_lmi("R-MT" + t, rb[b] - xtb[b]);
    prog.add_lmi("S+RT" + t, wb[b] + rtb[b]);
    prog.add_lmi("S-RT" + t, wb[b] - rtb[b]);
    prog.add_lmi("M" + t, xb[b]);
  }
  const auto wy = blocks_of(w);
  for (std::size_t b = 0; b < wy.size(); ++b) prog.add_lmi("S" + tag(ys, b), wy[b]);

  LinearConstraint trace{"trS", {}, 1.0};
  for (std::size_t i = 0; i < ys.basis().size(); ++i) {
    double t = 0.0;
    for (const auto& [r, c] : ys.basis()[i])
      if (ys.table().is_diagonal(r)) t += c.real() * static_cast<double>(ys.table().size_of(r));
    if (t != 0.0) trace.terms.emplace_back(w.first + i, -t);
  }
  prog.linear.push_back(std::move(trace));

  spec.y_var = prog.add_scalar("y");
  add_norm_epigraph(prog, ctx, z, spec.y_var, "norm");
  prog.objective = {{spec.y_var, 1.0}};
  return spec;
}

// ---------------------------------------------------------------------------
// Theta

ProgramSpec build_theta_stage1(const ChoiMatrix& n, double alpha, const ReductionContext& ctx) {
  check_alpha(alpha);
  require_real_compat(n, ctx);
  if (ctx.k != 1) throw DimensionError("stage one of Theta works on a single copy");
  const InvariantSpace& xy = *ctx.xy;
  const Dims dims{ctx.dx, ctx.dy};
  ProgramSpec spec;
  ReducedProgram& prog = spec.program;
  register_blocks(prog, "XY", xy);
  register_blocks(prog, "X", *ctx.x);

  const OpVar mv = add_op(prog, xy, "M");
  const OpVar a = add_op(prog, xy, "A");
  const OpVar rv = add_op(prog, xy, "R");
  spec.operators = {{"M", mv.first}, {"A", a.first}, {"R", rv.first}};
  const auto transpose = partial_transpose_map(xy.table(), dims);
  const auto lhs = choi_blocks(xy, n, 1);
  const auto mb = blocks_of(mv);
  const auto ab = blocks_of(a);
  const auto rb = blocks_of(rv);
  const auto mtb = blocks_of(through_perm(mv, transpose));
  SharedSlacks slacks(xy, "G");
  for (std::size_t b = 0; b < xy.num_blocks(); ++b) {
    const std::string t = tag(xy, b);
    encode_geomean_constraint(prog, lhs[b], mb[b], ab[b], 1.0 / alpha, slacks.for_block(b), "geomean" + t);
    prog.add_lmi("R+MT" + t, rb[b] + mtb[b]);
    prog.add_lmi("R-MT" + t, rb[b] - mtb[b]);
    prog.add_lmi("M" + t, mb[b]);
  }
  const OrbitLinearMap tr = partial_trace_map(xy.table(), ctx.x->table(), dims);
  const auto trr = blocks_of(through_map(rv, *ctx.x, tr));
  const auto id = identity_blocks(*ctx.x);
  for (std::size_t b = 0; b < trr.size(); ++b) prog.add_lmi("trR" + tag(*ctx.x, b), id[b] - trr[b]);

  spec.y_var = prog.add_scalar("y");
  add_norm_epigraph(prog, ctx, a, spec.y_var, "norm");
  prog.objective = {{spec.y_var, 1.0}};
  return spec;
}

ChoiMatrix theta_choi_from_solution(const ProgramSpec& stage1, const ReductionContext& ctx1,
                                    const std::vector<double>& x) {
  const auto it = stage1.operators.find("M");
  if (it == stage1.operators.end()) throw std::invalid_argument("stage-one program has no M operator");
  InvariantOperator op{ctx1.xy->table_ptr(), ctx1.xy->assemble(x, it->second)};
  ComplexMatrix m = to_dense(op);
  m = 0.5 * (m + m.adjoint()).eval();
  return ChoiMatrix(ctx1.dx, ctx1.dy, HermitianOperator(m));
}

ThetaResult run_theta(const ChoiMatrix& n, double alpha, int k, const SolverConfig& cfg,
                      const std::optional<DiagonalSymmetry>& sym, double perturb) {
  const bool real = n.matrix().imag().cwiseAbs().maxCoeff() == 0.0;
  if (sym) require_symmetry(n, *sym);
  auto ctx1 = reduction_context(n.dx(), n.dy(), 1, real, sym);
  ProgramSpec s1 = build_theta_stage1(n, alpha, *ctx1);
  ThetaResult out;
  out.stage1 = solve_bound(s1, alpha, 1, cfg);
  out.m_star = theta_choi_from_solution(s1, *ctx1, out.stage1.solution.x);
  auto ctxk = reduction_context(n.dx(), n.dy(), k, real, sym);
  ProgramSpec s2 = build_dsharp_reduced(n, out.m_star, alpha, *ctxk, perturb);
  out.stage2 = solve_bound(s2, alpha, k, cfg);
  return out;
}

// ---------------------------------------------------------------------------
// beta

double beta_sdp(const ChoiMatrix& j, const SolverConfig& cfg) {
  const int dx = j.dx(), dy = j.dy(), d = j.dim();
  const bool real = j.matrix().imag().cwiseAbs().maxCoeff() == 0.0;
  ReducedProgram prog;
  prog.blocks.push_back({"XY", "dense", d});
  prog.blocks.push_back({"Y", "dense", dy});
  const AffineBlock r = add_free_hermitian(prog, "R", d, real);
  const AffineBlock s = add_free_hermitian(prog, "S", dy, real);
  const AffineBlock jt = AffineBlock::constant_block(partial_transpose(j.matrix(), j.dims()));

  auto ptranspose = [&](const SparseHermitian& h) {
    SparseHermitian out{d, {}};
    for (const auto& e : h.entries) {
      const int xa = e.row / dy, ya = e.row % dy, xb = e.col / dy, yb = e.col % dy;
      out.add(xa * dy + yb, xb * dy + ya, e.value);
    }
    return out;
  };
  AffineBlock rt = AffineBlock::zero(d);
  for (const auto& [v, h] : r.terms) rt.terms.emplace_back(v, ptranspose(h));
  AffineBlock is = AffineBlock::zero(d);
  for (const auto& [v, h] : s.terms) {
    SparseHermitian out{d, {}};
    for (const auto& e : h.entries)
      for (int x = 0; x < dx; ++x) out.add(x * dy + e.row, x * dy + e.col, e.value);
    is.terms.emplace_back(v, std::move(out));
  }
  prog.add_lmi("R+JT", r + jt);
  prog.add_lmi("R-JT", r - jt);
  prog.add_lmi("S+RT", is + rt);
  prog.add_lmi("S-RT", is - rt);
  for (const auto& [v, h] : s.terms)
    if (h.entries.size() == 1 && h.entries[0].row == h.entries[0].col) prog.objective.emplace_back(v, 1.0);
  SDPSolution sol = solve_program(prog, cfg);
  if (sol.status != SolveStatus::optimal && sol.status != SolveStatus::max_iter)
    throw CapacityError("beta SDP failed: " + to_string(sol.status));
  return sol.objective;
}

long long k_for_accuracy(double alpha, int dx, int dy, double epsilon) {
  if (!(alpha > 1.0) || !(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("k_for_accuracy needs alpha > 1 and epsilon in (0,1]");
  if (dx < 1 || dy < 1) throw DimensionError("k_for_accuracy needs positive dimensions");
  const double d = static_cast<double>(dx) * dy;
  const double k = std::ceil(8.0 * alpha * d * d * d / ((alpha - 1.0) * epsilon));
  if (k > 1e15) throw std::overflow_error("k_for_accuracy: value out of range");
  return static_cast<long long>(k);
}

}  // namespace symcap
