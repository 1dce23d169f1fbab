#include "symcap/groupsym.hpp"

#include <algorithm>
#include <stdexcept>

namespace symcap {

int GroupSymmetrySpec::ambient_dim() const {
  int n = 0;
  for (std::size_t i = 0; i < mult.size(); ++i) n += mult[i] * (irrep_dims.empty() ? 1 : irrep_dims[i]);
  return n;
}

void GroupSymmetrySpec::check() const {
  if (mult.empty()) throw std::invalid_argument("group spec needs at least one irrep");
  if (!irrep_dims.empty() && irrep_dims.size() != mult.size())
    throw std::invalid_argument("irrep_dims and mult differ in length");
  for (int m : mult)
    if (m < 1) throw std::invalid_argument("irrep multiplicities must be positive");
  for (int d : irrep_dims)
    if (d < 1) throw std::invalid_argument("irrep dimensions must be positive");
}

GroupSymmetrySpec gad_z2_spec() { return {{2, 2}, {1, 1}}; }

std::string HIrrepLabel::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += " ";
    s += parts[i].parts.empty() ? "()" : parts[i].label();
  }
  return s + "]";
}

std::vector<std::pair<HIrrepLabel, std::uint64_t>> h_irrep_labels(const GroupSymmetrySpec& spec, int k) {
  spec.check();
  if (k < 1) throw std::invalid_argument("k must be positive");
  const std::size_t t = spec.mult.size();
  std::vector<std::pair<HIrrepLabel, std::uint64_t>> out;
  std::vector<int> comp(t, 0);
  std::vector<Partition> chosen(t);

  auto pick = [&](auto&& self, std::size_t i, std::uint64_t mult) -> void {
    if (i == t) {
      out.push_back({{comp, chosen}, mult});
      return;
    }
    if (comp[i] == 0) {
      chosen[i] = Partition{};
      self(self, i + 1, mult);
      return;
    }
    for (const auto& p : enumerate_partitions(spec.mult[i], comp[i])) {
      chosen[i] = p;
      self(self, i + 1, mult * count_ssyt(p, spec.mult[i]));
    }
  };
  auto compose = [&](auto&& self, std::size_t i, int rem) -> void {
    if (i == t - 1) {
      comp[i] = rem;
      pick(pick, 0, 1);
      return;
    }
    for (int v = rem; v >= 0; --v) {
      comp[i] = v;
      self(self, i + 1, rem - v);
    }
  };
  compose(compose, 0, k);
  return out;
}

SymmetryReport h_census(const GroupSymmetrySpec& spec, int k) {
  SymmetryReport rep;
  unsigned __int128 amb = 1;
  for (int v = 0; v < 2 * k; ++v) amb *= static_cast<unsigned>(spec.ambient_dim());
  rep.ambient_dim = amb > UINT64_MAX ? UINT64_MAX : static_cast<std::uint64_t>(amb);
  for (const auto& [label, mult] : h_irrep_labels(spec, k)) {
    rep.labels.push_back(label.str());
    rep.block_sizes.push_back(mult);
    rep.invariant_dim += mult * mult;
  }
  return rep;
}

CellMask diagonal_invariance_mask(const std::vector<Eigen::VectorXcd>& generators, double tol) {
  if (generators.empty()) return {};
  const Eigen::Index d = generators.front().size();
  CellMask mask(static_cast<std::size_t>(d * d), true);
  for (const auto& g : generators) {
    if (g.size() != d) throw std::invalid_argument("generators differ in dimension");
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b)
        if (std::abs(g(a) * std::conj(g(b)) - 1.0) > tol) mask[a * d + b] = false;
  }
  return mask;
}

}  // namespace symcap
