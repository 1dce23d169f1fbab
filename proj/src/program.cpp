#include "symcap/program.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "symcap/errors.hpp"

namespace symcap {

void SparseHermitian::add(int row, int col, Complex v) {
  if (v == 0.0) return;
  if (row > col) {
    std::swap(row, col);
    v = std::conj(v);
  }
  entries.push_back({row, col, v});
}

bool SparseHermitian::is_real(double tol) const {
  for (const auto& e : entries)
    if (std::abs(e.value.imag()) > tol) return false;
  return true;
}

ComplexMatrix SparseHermitian::dense() const {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (const auto& e : entries) {
    m(e.row, e.col) += e.value;
    if (e.row != e.col) m(e.col, e.row) += std::conj(e.value);
  }
  return m;
}

SparseHermitian SparseHermitian::from_dense(const ComplexMatrix& m, double drop) {
  SparseHermitian s;
  s.dim = static_cast<int>(m.rows());
  for (int i = 0; i < s.dim; ++i)
    for (int j = i; j < s.dim; ++j)
      if (std::abs(m(i, j)) > drop) s.entries.push_back({i, j, i == j ? Complex(m(i, j).real(), 0.0) : m(i, j)});
  return s;
}

AffineBlock AffineBlock::zero(int dim) {
  AffineBlock b;
  b.dim = dim;
  b.constant = ComplexMatrix::Zero(dim, dim);
  return b;
}

AffineBlock AffineBlock::constant_block(const ComplexMatrix& c) {
  AffineBlock b;
  b.dim = static_cast<int>(c.rows());
  b.constant = c;
  return b;
}

AffineBlock AffineBlock::scalar_identity(std::size_t var, int dim) {
  AffineBlock b = zero(dim);
  SparseHermitian s;
  s.dim = dim;
  for (int i = 0; i < dim; ++i) s.entries.push_back({i, i, 1.0});
  b.terms.emplace_back(var, std::move(s));
  return b;
}

AffineBlock& AffineBlock::add(const AffineBlock& other, double scale) {
  if (other.dim != dim) throw DimensionError("affine blocks differ in size");
  constant += scale * other.constant;
  for (const auto& [v, s] : other.terms) {
    SparseHermitian t = s;
    if (scale != 1.0)
      for (auto& e : t.entries) e.value *= scale;
    terms.emplace_back(v, std::move(t));
  }
  return *this;
}

ComplexMatrix AffineBlock::evaluate(const std::vector<double>& x) const {
  ComplexMatrix m = constant;
  for (const auto& [v, s] : terms) {
    if (x.at(v) == 0.0) continue;
    for (const auto& e : s.entries) {
      m(e.row, e.col) += x[v] * e.value;
      if (e.row != e.col) m(e.col, e.row) += x[v] * std::conj(e.value);
    }
  }
  return m;
}

bool AffineBlock::is_real() const {
  if (constant.size() && constant.imag().cwiseAbs().maxCoeff() > 0.0) return false;
  for (const auto& t : terms)
    if (!t.second.is_real()) return false;
  return true;
}

AffineBlock operator+(const AffineBlock& a, const AffineBlock& b) {
  AffineBlock out = a;
  return out.add(b);
}

AffineBlock operator-(const AffineBlock& a, const AffineBlock& b) {
  AffineBlock out = a;
  return out.add(b, -1.0);
}

AffineBlock stack2x2(const AffineBlock& a, const AffineBlock& b, const AffineBlock& c) {
  if (a.dim != b.dim || b.dim != c.dim) throw DimensionError("stack2x2 needs equal block sizes");
  const int n = a.dim;
  AffineBlock out = AffineBlock::zero(2 * n);
  out.constant.topLeftCorner(n, n) = a.constant;
  out.constant.topRightCorner(n, n) = b.constant;
  out.constant.bottomLeftCorner(n, n) = b.constant.adjoint();
  out.constant.bottomRightCorner(n, n) = c.constant;
  auto shifted = [&](const SparseHermitian& s, int off) {
    SparseHermitian t;
    t.dim = 2 * n;
    t.entries.reserve(s.entries.size());
    for (const auto& e : s.entries) t.entries.push_back({e.row + off, e.col + off, e.value});
    return t;
  };
  for (const auto& [v, s] : a.terms) out.terms.emplace_back(v, shifted(s, 0));
  for (const auto& [v, s] : c.terms) out.terms.emplace_back(v, shifted(s, n));
  for (const auto& [v, s] : b.terms) {
    SparseHermitian t;
    t.dim = 2 * n;
    for (const auto& e : s.entries) {
      t.entries.push_back({e.row, n + e.col, e.value});
      if (e.row != e.col) t.entries.push_back({e.col, n + e.row, std::conj(e.value)});
    }
    out.terms.emplace_back(v, std::move(t));
  }
  return out;
}

std::size_t ReducedProgram::add_scalar(const std::string& name) {
  scalars.push_back(name);
  return scalars.size() - 1;
}

std::size_t ReducedProgram::add_scalars(const std::string& prefix, std::size_t count) {
  std::size_t first = scalars.size();
  for (std::size_t i = 0; i < count; ++i) scalars.push_back(prefix + "[" + std::to_string(i) + "]");
  return first;
}

void ReducedProgram::add_lmi(const std::string& name, AffineBlock block) {
  lmis.emplace_back(name, std::move(block));
}

bool ReducedProgram::is_complex() const {
  for (const auto& l : lmis)
    if (!l.second.is_real()) return true;
  return false;
}

void ReducedProgram::check() const {
  const std::size_t n = scalars.size();
  for (const auto& [name, blk] : lmis) {
    if (blk.constant.rows() != blk.dim || blk.constant.cols() != blk.dim)
      throw DimensionError("LMI " + name + ": constant has wrong size");
    double asym = blk.dim ? (blk.constant - blk.constant.adjoint()).cwiseAbs().maxCoeff() : 0.0;
    if (asym > 1e-9 * std::max(1.0, blk.constant.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("LMI " + name + ": constant is not Hermitian");
    for (const auto& [v, s] : blk.terms) {
      if (v >= n) throw std::out_of_range("LMI " + name + " refers to an undeclared variable");
      if (s.dim != blk.dim) throw DimensionError("LMI " + name + ": coefficient has wrong size");
    }
  }
  for (const auto& l : linear)
    for (const auto& t : l.terms)
      if (t.first >= n) throw std::out_of_range("linear constraint refers to an undeclared variable");
  for (const auto& t : objective)
    if (t.first >= n) throw std::out_of_range("objective refers to an undeclared variable");
}

namespace {

nlohmann::json sparse_json(const SparseHermitian& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : s.entries) arr.push_back({e.row, e.col, e.value.real(), e.value.imag()});
  return arr;
}

SparseHermitian sparse_from_json(const nlohmann::json& j, int dim) {
  SparseHermitian s;
  s.dim = dim;
  for (const auto& e : j) s.add(e.at(0).get<int>(), e.at(1).get<int>(), Complex(e.at(2).get<double>(), e.at(3).get<double>()));
  return s;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

nlohmann::json to_json(const ReducedProgram& prog) {
  nlohmann::json j;
  j["scalars"] = prog.scalars;
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : prog.blocks) j["blocks"].push_back({{"space", b.space}, {"partition", b.partition}, {"size", b.size}});
  j["lmis"] = nlohmann::json::array();
  for (const auto& [name, blk] : prog.lmis) {
    nlohmann::json l;
    l["name"] = name;
    l["dim"] = blk.dim;
    l["constant"] = sparse_json(SparseHermitian::from_dense(blk.constant));
    l["terms"] = nlohmann::json::array();
    for (const auto& [v, s] : blk.terms) l["terms"].push_back({{"var", v}, {"coeffmatrix", sparse_json(s)}});
    j["lmis"].push_back(std::move(l));
  }
  j["linear"] = nlohmann::json::array();
  for (const auto& c : prog.linear)
    j["linear"].push_back({{"name", c.name}, {"terms", c.terms}, {"constant", c.constant}, {"sense", ">="}});
  j["objective"] = {{"sense", "minimize"}, {"terms", prog.objective}};
  return j;
}

ReducedProgram program_from_json(const nlohmann::json& j) {
  ReducedProgram prog;
  try {
    prog.scalars = j.at("scalars").get<std::vector<std::string>>();
    for (const auto& b : j.at("blocks"))
      prog.blocks.push_back({b.at("space").get<std::string>(), b.at("partition").get<std::string>(), b.at("size").get<int>()});
    for (const auto& l : j.at("lmis")) {
      int dim = l.at("dim").get<int>();
      AffineBlock blk = AffineBlock::constant_block(sparse_from_json(l.at("constant"), dim).dense());
      for (const auto& t : l.at("terms"))
        blk.terms.emplace_back(t.at("var").get<std::size_t>(), sparse_from_json(t.at("coeffmatrix"), dim));
      prog.add_lmi(l.at("name").get<std::string>(), std::move(blk));
    }
    for (const auto& c : j.at("linear"))
      prog.linear.push_back({c.at("name").get<std::string>(),
                             c.at("terms").get<std::vector<std::pair<std::size_t, double>>>(),
                             c.at("constant").get<double>()});
    prog.objective = j.at("objective").at("terms").get<std::vector<std::pair<std::size_t, double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed program JSON: ") + e.what());
  }
  prog.check();
  return prog;
}

StandardFormSDP lower_program(const ReducedProgram& prog) {
  prog.check();
  StandardFormSDP sdp;
  const std::size_t nvar = prog.scalars.size();
  sdp.c.assign(nvar, 0.0);
  for (const auto& [v, coef] : prog.objective) sdp.c[v] += coef;
  sdp.F.assign(nvar + 1, {});

  for (const auto& [name, blk] : prog.lmis) {
    const int n = blk.dim;
    UnionFind uf(n);
    std::vector<char> touched(n, 0);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (blk.constant(i, j) != 0.0) {
          uf.unite(i, j);
          if (i != j) touched[i] = touched[j] = 1;
        }
    for (const auto& [v, s] : blk.terms)
      for (const auto& e : s.entries)
        if (e.value != 0.0) {
          uf.unite(e.row, e.col);
          touched[e.row] = touched[e.col] = 1;
        }
    // Component index and local position of every node.
    std::vector<int> comp_of(n, -1), local(n);
    std::vector<std::vector<int>> comps;
    std::vector<int> root_comp(n, -1);
    for (int i = 0; i < n; ++i) {
      int r = uf.find(i);
      if (root_comp[r] < 0) {
        root_comp[r] = static_cast<int>(comps.size());
        comps.emplace_back();
      }
      comp_of[i] = root_comp[r];
      local[i] = static_cast<int>(comps[comp_of[i]].size());
      comps[comp_of[i]].push_back(i);
    }
    // Collect (comp, var+1 or 0, row, col) -> value.
    std::vector<std::tuple<int, std::size_t, int, int, Complex>> items;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (blk.constant(i, j) != 0.0) items.emplace_back(comp_of[i], 0, local[i], local[j], -blk.constant(i, j));
    for (const auto& [v, s] : blk.terms)
      for (const auto& e : s.entries) {
        int a = local[e.row], b = local[e.col];
        Complex val = e.value;
        if (a > b) {
          std::swap(a, b);
          val = std::conj(val);
        }
        items.emplace_back(comp_of[e.row], v + 1, a, b, val);
      }
    std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) {
      return std::make_tuple(std::get<0>(x), std::get<1>(x), std::get<2>(x), std::get<3>(x)) <
             std::make_tuple(std::get<0>(y), std::get<1>(y), std::get<2>(y), std::get<3>(y));
    });
    std::vector<char> comp_complex(comps.size(), 0), comp_live(comps.size(), 0);
    for (const auto& it : items) {
      if (std::get<4>(it).imag() != 0.0) comp_complex[std::get<0>(it)] = 1;
      if (std::get<1>(it) != 0) comp_live[std::get<0>(it)] = 1;
    }
    std::vector<int> block_id(comps.size(), -1);
    for (std::size_t c = 0; c < comps.size(); ++c) {
      bool isolated = comps[c].size() == 1 && !touched[comps[c][0]];
      if (!comp_live[c]) {
        // Constant-only component: keep it only if it can fail.
        Eigen::Index sz = static_cast<Eigen::Index>(comps[c].size());
        ComplexMatrix sub(sz, sz);
        for (Eigen::Index a = 0; a < sz; ++a)
          for (Eigen::Index b = 0; b < sz; ++b) sub(a, b) = blk.constant(comps[c][a], comps[c][b]);
        if (isolated ? sub(0, 0).real() >= 0.0 : HermitianOperator(sub).min_eigenvalue() >= -1e-12) continue;
      }
      block_id[c] = static_cast<int>(sdp.block_sizes.size());
      int sz = static_cast<int>(comps[c].size());
      sdp.block_sizes.push_back(comp_complex[c] ? 2 * sz : sz);
    }
    for (std::size_t idx = 0; idx < items.size();) {
      auto [c, m, a, b, val] = items[idx];
      Complex sum = 0.0;
      while (idx < items.size() && std::get<0>(items[idx]) == c && std::get<1>(items[idx]) == m &&
             std::get<2>(items[idx]) == a && std::get<3>(items[idx]) == b)
        sum += std::get<4>(items[idx++]);
      if (block_id[c] < 0 || sum == 0.0) continue;
      auto& dst = sdp.F[m];
      const int bid = block_id[c];
      if (!comp_complex[c]) {
        dst.push_back({bid, a, b, sum.real()});
      } else {
        const int sz = static_cast<int>(comps[c].size());
        if (sum.real() != 0.0) {
          dst.push_back({bid, a, b, sum.real()});
          dst.push_back({bid, sz + a, sz + b, sum.real()});
        }
        if (a != b && sum.imag() != 0.0) {
          dst.push_back({bid, a, sz + b, -sum.imag()});
          dst.push_back({bid, b, sz + a, sum.imag()});
        }
      }
    }
  }

  if (!prog.linear.empty()) {
    const int bid = static_cast<int>(sdp.block_sizes.size());
    sdp.block_sizes.push_back(-static_cast<int>(prog.linear.size()));
    for (std::size_t l = 0; l < prog.linear.size(); ++l) {
      const int row = static_cast<int>(l);
      if (prog.linear[l].constant != 0.0) sdp.F[0].push_back({bid, row, row, -prog.linear[l].constant});
      for (const auto& [v, coef] : prog.linear[l].terms)
        if (coef != 0.0) sdp.F[v + 1].push_back({bid, row, row, coef});
    }
  }
  return sdp;
}

SDPSolution solve_program(const ReducedProgram& prog, const SolverConfig& cfg) {
  return solve(lower_program(prog), cfg);
}

}  // namespace symcap
