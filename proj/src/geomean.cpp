#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "symcap/errors.hpp"
#include "symcap/programs.hpp"

namespace symcap {

double Dyadic::value() const { return std::ldexp(static_cast<double>(num), -log2den); }

Dyadic Dyadic::from_weight(double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("geometric-mean weight must lie in (0,1)");
  for (int m = 1; m <= 30; ++m) {
    const double scaled = std::ldexp(t, m);
    const double r = std::round(scaled);
    if (std::abs(scaled - r) <= 1e-12 * std::ldexp(1.0, m)) {
      Dyadic d{static_cast<long long>(r), m};
      while (d.num % 2 == 0 && d.log2den > 0) {
        d.num /= 2;
        --d.log2den;
      }
      return d;
    }
  }
  throw std::invalid_argument("geometric-mean weight " + std::to_string(t) + " is not dyadic");
}

std::vector<SparseHermitian> hermitian_basis(int dim, bool real_only) {
  std::vector<SparseHermitian> out;
  for (int i = 0; i < dim; ++i) {
    SparseHermitian h{dim, {}};
    h.add(i, i, 1.0);
    out.push_back(std::move(h));
  }
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      SparseHermitian h{dim, {}};
      h.add(i, j, 1.0);
      out.push_back(std::move(h));
      if (!real_only) {
        SparseHermitian g{dim, {}};
        g.add(i, j, Complex(0.0, 1.0));
        out.push_back(std::move(g));
      }
    }
  return out;
}

AffineBlock add_free_hermitian(ReducedProgram& prog, const std::string& name, int dim, bool real_only) {
  auto basis = hermitian_basis(dim, real_only);
  const std::size_t first = prog.add_scalars(name, basis.size());
  AffineBlock out = AffineBlock::zero(dim);
  for (std::size_t i = 0; i < basis.size(); ++i) out.terms.emplace_back(first + i, std::move(basis[i]));
  return out;
}

SlackProvider free_hermitian_slack(int dim, bool real_only, const std::string& prefix) {
  return [=](ReducedProgram& prog, int slot) {
    return add_free_hermitian(prog, prefix + "_" + std::to_string(slot), dim, real_only);
  };
}

namespace {

// [[c, s], [s, l2]] ⪰ 0 with constant c, after the congruence diag(T, I),
// T = (c + δI)^{-1/2}. The multiplier of the unscaled block grows like
// 1/λ_min(c)^2, which ruins the solver's accuracy at larger k.
AffineBlock preconditioned_stack(const AffineBlock& c, const AffineBlock& s, const AffineBlock& l2) {
  const int n = c.dim;
  const double top = std::max(c.constant.cwiseAbs().maxCoeff(), 1e-300);
  // T is built per connected component of c so the LMI keeps its sparsity.
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(c.constant(i, j)) > 1e-14 * top) parent[find(i)] = find(j);
  std::map<int, std::vector<int>> comps;
  for (int i = 0; i < n; ++i) comps[find(i)].push_back(i);

  ComplexMatrix t = ComplexMatrix::Zero(n, n);
  for (const auto& [root, idx] : comps) {
    const int m = static_cast<int>(idx.size());
    ComplexMatrix sub(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) sub(i, j) = c.constant(idx[i], idx[j]);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sub);
    const Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-9 * top) return stack2x2(c, s, l2);
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) w(i) = 1.0 / std::sqrt(std::max(ev(i), 0.0) + 1e-9 * top);
    const ComplexMatrix ts = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) t(idx[i], idx[j]) = ts(i, j);
  }

  AffineBlock out = AffineBlock::zero(2 * n);
  out.constant.topLeftCorner(n, n) = t * c.constant * t;
  out.constant.topRightCorner(n, n) = t * s.constant;
  out.constant.bottomLeftCorner(n, n) = s.constant * t;
  out.constant.bottomRightCorner(n, n) = l2.constant;
  out.constant = (0.5 * (out.constant + out.constant.adjoint())).eval();
  for (const auto& [v, h] : s.terms) {
    const ComplexMatrix m = t * h.dense();
    const double drop = 1e-15 * m.cwiseAbs().maxCoeff();
    SparseHermitian u{2 * n, {}};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::abs(m(i, j)) > drop) u.entries.push_back({i, n + j, m(i, j)});
    out.terms.emplace_back(v, std::move(u));
  }
  for (const auto& [v, h] : l2.terms) {
    SparseHermitian u{2 * n, {}};
    for (const auto& e : h.entries) u.entries.push_back({n + e.row, n + e.col, e.value});
    out.terms.emplace_back(v, std::move(u));
  }
  return out;
}

AffineBlock hyp_block(const AffineBlock& l1, const AffineBlock& s, const AffineBlock& l2) {
  if (l1.terms.empty()) return preconditioned_stack(l1, s, l2);
  return stack2x2(l1, s, l2);
}

struct Encoder {
  ReducedProgram& prog;
  const AffineBlock& sigma;
  const AffineBlock& a;
  const SlackProvider& slack;
  std::string name;
  int slots = 0;
  std::map<std::pair<long long, int>, AffineBlock> memo;

  // s ⪯ sigma #_t a
  void bound(const AffineBlock& s, Dyadic t) {
    if (t.log2den == 1) {
      prog.add_lmi(name + "/hyp" + std::to_string(slots), hyp_block(sigma, s, a));
      ++slots;
      return;
    }
    const AffineBlock l1 = side(Dyadic{t.num - 1, t.log2den});
    const AffineBlock l2 = side(Dyadic{t.num + 1, t.log2den});
    prog.add_lmi(name + "/hyp" + std::to_string(slots), hyp_block(l1, s, l2));
    ++slots;
  }

  // A block below sigma #_t a for an arbitrary (not reduced) t.
  AffineBlock side(Dyadic t) {
    while (t.num != 0 && t.num % 2 == 0) {
      t.num /= 2;
      --t.log2den;
    }
    if (t.num == 0) return sigma;
    if (t.log2den == 0) return a;
    auto key = std::make_pair(t.num, t.log2den);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    AffineBlock fresh = slack(prog, slots);
    bound(fresh, t);
    memo.emplace(key, fresh);
    return fresh;
  }
};

}  // namespace

void encode_geomean_constraint(ReducedProgram& prog, const AffineBlock& lhs, const AffineBlock& sigma,
                               const AffineBlock& a, double t, const SlackProvider& slack, const std::string& name) {
  if (lhs.dim != sigma.dim || lhs.dim != a.dim) throw DimensionError("geometric-mean blocks differ in size");
  const Dyadic d = Dyadic::from_weight(t);
  SlackProvider provider = slack;
  if (!provider) {
    const bool real = lhs.is_real() && sigma.is_real() && a.is_real();
    provider = free_hermitian_slack(lhs.dim, real, name + "/G");
  }
  Encoder enc{prog, sigma, a, provider, name, 0, {}};
  const AffineBlock g = provider(prog, enc.slots);
  ++enc.slots;
  prog.add_lmi(name + "/upper", g - lhs);
  enc.bound(g, d);
}

}  // namespace symcap
