#include <algorithm>
#include <numeric>

#include <doctest.h>

#include "support/test_util.hpp"
#include "symcap/errors.hpp"
#include "symcap/orbits.hpp"

using namespace symcap;
using testutil::max_abs;

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

std::vector<int> digits(std::size_t idx, int d, int k) {
  std::vector<int> w(k);
  for (int v = k - 1; v >= 0; --v) {
    w[v] = static_cast<int>(idx % d);
    idx /= d;
  }
  return w;
}

std::vector<int> count_e(const std::vector<int>& i, const std::vector<int>& j, int d) {
  std::vector<int> e(d * d, 0);
  for (std::size_t v = 0; v < i.size(); ++v) ++e[i[v] * d + j[v]];
  return e;
}

// Orbit label of every matrix entry, computed without the library.
std::vector<std::size_t> orbit_of_entries(const OrbitTable& t) {
  const std::size_t n = ipow(t.d(), t.k());
  std::vector<std::size_t> lab(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      lab[a * n + b] = t.index_of(count_e(digits(a, t.d(), t.k()), digits(b, t.d(), t.k()), t.d()));
  return lab;
}

ComplexMatrix dense_from(const OrbitTable& t, const std::vector<std::size_t>& lab, const std::vector<Complex>& z) {
  const std::size_t n = ipow(t.d(), t.k());
  ComplexMatrix m(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) m(a, b) = z[lab[a * n + b]];
  return m;
}

std::vector<Complex> unit(std::size_t n, std::size_t r) {
  std::vector<Complex> z(n, 0.0);
  z[r] = 1.0;
  return z;
}

std::vector<Complex> random_coeffs(std::size_t n) {
  const auto v = testutil::random_complex(static_cast<int>(n), 1);
  return {v.data(), v.data() + n};
}

// Transpose each Y factor of an operator on (X⊗Y)^{⊗k}.
ComplexMatrix dense_pt_y(const ComplexMatrix& m, int dx, int dy, int k) {
  const int d = dx * dy;
  const std::size_t n = m.rows();
  ComplexMatrix out(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      auto wa = digits(a, d, k), wb = digits(b, d, k);
      for (int v = 0; v < k; ++v) {
        const int xa = wa[v] / dy, ya = wa[v] % dy, xb = wb[v] / dy, yb = wb[v] % dy;
        wa[v] = xa * dy + yb;
        wb[v] = xb * dy + ya;
      }
      std::size_t na = 0, nb = 0;
      for (int v = 0; v < k; ++v) {
        na = na * d + wa[v];
        nb = nb * d + wb[v];
      }
      out(a, b) = m(na, nb);
    }
  return out;
}

}  // namespace

TEST_CASE("orbit counts") {
  CHECK(enumerate_orbits(2, 1)->size() == 4);
  CHECK(enumerate_orbits(4, 2)->size() == 136);
  CHECK(enumerate_orbits(4, 4)->size() == 3876);
  CHECK(orbit_count(4, 6) == 54264);
  CHECK(orbit_count(1, 7) == 1);
  CHECK_THROWS_AS(enumerate_orbits(4, 20), CapacityError);
  CHECK_THROWS(enumerate_orbits(0, 2));
}

TEST_CASE("orbit table order and completeness") {
  for (int d = 1; d <= 4; ++d)
    for (int k = 1; k <= 6; ++k) {
      const auto t = enumerate_orbits(d, k);
      std::uint64_t total = 0;
      for (std::size_t r = 0; r < t->size(); ++r) total += t->size_of(r);
      CHECK(total == ipow(d, 2 * k));
      for (std::size_t r = 1; r < t->size(); ++r) CHECK(t->key(r - 1).E < t->key(r).E);
      for (std::size_t r = 0; r < t->size(); r += 7) {
        CHECK(t->index_of(t->key(r)) == r);
        CHECK(t->key(t->transpose_index(r)) == t->key(r).transposed());
        std::uint64_t fact = 1, denom = 1;
        for (int v = 2; v <= k; ++v) fact *= v;
        for (int e : t->key(r).E)
          for (int v = 2; v <= e; ++v) denom *= v;
        CHECK(t->size_of(r) == fact / denom);
      }
    }
}

TEST_CASE("orbit keys of pairs") {
  auto e = orbit_key_of_pair({0, 0}, {0, 0}, 2);
  CHECK(e.E == std::vector<int>{2, 0, 0, 0});
  e = orbit_key_of_pair({0, 1}, {1, 0}, 2);
  CHECK(e.E == std::vector<int>{0, 1, 1, 0});
  const Word i = {0, 2, 1, 3, 3}, j = {1, 1, 0, 2, 3};
  const auto base = orbit_key_of_pair(i, j, 4);
  std::vector<int> perm(5);
  std::iota(perm.begin(), perm.end(), 0);
  while (std::next_permutation(perm.begin(), perm.end())) {
    Word pi(5), pj(5);
    for (int v = 0; v < 5; ++v) {
      pi[v] = i[perm[v]];
      pj[v] = j[perm[v]];
    }
    CHECK(orbit_key_of_pair(pi, pj, 4) == base);
  }
  CHECK_THROWS(orbit_key_of_pair({0, 4}, {0, 0}, 4));
  CHECK_THROWS_AS(orbit_key_of_pair({0}, {0, 0}, 4), DimensionError);
}

TEST_CASE("representatives") {
  const auto t = enumerate_orbits(3, 3);
  for (std::size_t r = 0; r < t->size(); ++r) {
    const auto [i, j] = t->representative(r);
    CHECK(orbit_key_of_pair(i, j, 3) == t->key(r));
  }
  // Lexicographically smallest over a brute force enumeration.
  const auto t2 = enumerate_orbits(2, 2);
  std::vector<std::pair<Word, Word>> best(t2->size(), {Word{9}, Word{9}});
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      const Word i = digits(a, 2, 2), j = digits(b, 2, 2);
      const std::size_t r = t2->index_of(count_e(i, j, 2));
      if (std::pair{i, j} < best[r]) best[r] = {i, j};
    }
  for (std::size_t r = 0; r < t2->size(); ++r) CHECK(t2->representative(r) == best[r]);
}

TEST_CASE("orbit trace") {
  CHECK(orbit_trace({2, 2, {2, 0, 0, 0}}) == 1);
  CHECK(orbit_trace({2, 2, {1, 0, 0, 1}}) == 2);
  CHECK(orbit_trace({2, 2, {1, 1, 0, 0}}) == 0);
  const auto t = enumerate_orbits(2, 3);
  const auto lab = orbit_of_entries(*t);
  for (std::size_t r = 0; r < t->size(); ++r)
    CHECK(std::abs(dense_from(*t, lab, unit(t->size(), r)).trace() - double(orbit_trace(t->key(r)))) < 1e-12);
}

TEST_CASE("dense orbit matrices are orthogonal") {
  for (int k = 1; k <= 3; ++k) {
    const auto t = enumerate_orbits(2, k);
    const auto lab = orbit_of_entries(*t);
    std::vector<ComplexMatrix> c;
    for (std::size_t r = 0; r < t->size(); ++r) {
      c.push_back(dense_from(*t, lab, unit(t->size(), r)));
      CHECK(max_abs(c.back() - dense_orbit_matrix(*t, r)) == 0.0);
    }
    for (std::size_t r = 0; r < c.size(); ++r)
      for (std::size_t s = 0; s < c.size(); ++s) {
        const double ip = c[r].cwiseProduct(c[s]).sum().real();
        CHECK(ip == (r == s ? double(t->size_of(r)) : 0.0));
      }
  }
}

TEST_CASE("dense round trip") {
  const auto t = enumerate_orbits(2, 3);
  const auto lab = orbit_of_entries(*t);
  InvariantOperator op{t, random_coeffs(t->size())};
  const ComplexMatrix m = to_dense(op);
  CHECK(max_abs(m - dense_from(*t, lab, op.coeffs)) == 0.0);
  const auto back = from_dense(m, t);
  for (std::size_t r = 0; r < t->size(); ++r) CHECK(back.coeffs[r] == op.coeffs[r]);
  CHECK(index_word(word_index({1, 0, 1}, 2), 2, 3) == Word{1, 0, 1});
}

TEST_CASE("hermiticity of coefficient vectors") {
  const auto t = enumerate_orbits(2, 2);
  InvariantOperator op{t, random_coeffs(t->size())};
  CHECK_FALSE(op.is_hermitian());
  for (std::size_t r = 0; r < t->size(); ++r) op.coeffs[t->transpose_index(r)] = std::conj(op.coeffs[r]);
  for (std::size_t r = 0; r < t->size(); ++r)
    if (t->transpose_index(r) == r) op.coeffs[r] = op.coeffs[r].real();
  CHECK(op.is_hermitian());
  CHECK(max_abs(to_dense(op) - to_dense(op).adjoint()) == 0.0);
}

TEST_CASE("tensor power expansion") {
  SUBCASE("k = 1 returns the Choi entries") {
    const auto j = gad_choi(0.3, 0.9);
    const auto t = enumerate_orbits(4, 1);
    const auto op = expand_tensor_power(j, 1, t);
    CHECK(max_abs(to_dense(op) - j.matrix()) == 0.0);
  }
  for (const auto& j : {choi_from_kraus({ComplexMatrix::Identity(2, 2)}), gad_choi(0.3, 0),
                        choi_from_kraus(testutil::random_kraus(2, 2, 2))}) {
    const auto t = enumerate_orbits(4, 2);
    const auto lab = orbit_of_entries(*t);
    const auto op = expand_tensor_power(j, 2, t);
    CHECK(max_abs(dense_from(*t, lab, op.coeffs) - kron(j.matrix(), j.matrix())) < 1e-15);
    CHECK(op.is_hermitian());
  }
  SUBCASE("qutrit-qubit at k = 2") {
    const auto j = choi_from_kraus(testutil::random_kraus(3, 2, 2));
    const auto t = enumerate_orbits(6, 2);
    const auto op = expand_tensor_power(j, 2, t);
    CHECK(max_abs(to_dense(op) - kron(j.matrix(), j.matrix())) < 1e-14);
  }
  CHECK_THROWS_AS(expand_tensor_power(gad_choi(0.3, 0), 2, enumerate_orbits(2, 2)), DimensionError);
}

TEST_CASE("partial trace map") {
  for (auto [dx, dy, k] : {std::tuple{2, 2, 1}, {2, 2, 2}, {2, 2, 3}, {3, 2, 2}, {2, 3, 2}}) {
    CAPTURE(dx);
    CAPTURE(dy);
    CAPTURE(k);
    const auto txy = enumerate_orbits(dx * dy, k), tx = enumerate_orbits(dx, k);
    const auto map = partial_trace_map(*txy, *tx, {dx, dy});
    CHECK(map.sources == txy->size());
    CHECK(map.targets == tx->size());
    const auto lab = orbit_of_entries(*txy), labx = orbit_of_entries(*tx);
    const ComplexMatrix p = testutil::interleave_to_grouped(dx, dy, k);
    const std::size_t nx = ipow(dx, k), ny = ipow(dy, k);
    auto dense_tr = [&](const std::vector<Complex>& z) {
      const ComplexMatrix g = p * dense_from(*txy, lab, z) * p.transpose();
      ComplexMatrix out = ComplexMatrix::Zero(nx, nx);
      for (std::size_t a = 0; a < nx; ++a)
        for (std::size_t b = 0; b < nx; ++b)
          for (std::size_t y = 0; y < ny; ++y) out(a, b) += g(a * ny + y, b * ny + y);
      return out;
    };
    if (txy->size() <= 200)
      for (std::size_t r = 0; r < txy->size(); ++r)
        CHECK(max_abs(dense_tr(unit(txy->size(), r)) - dense_from(*tx, labx, map.apply(unit(txy->size(), r)))) < 1e-12);
    const auto z = random_coeffs(txy->size());
    CHECK(max_abs(dense_tr(z) - dense_from(*tx, labx, map.apply(z))) < 1e-10);
  }
  SUBCASE("trace preservation") {
    const auto txy = enumerate_orbits(4, 2), tx = enumerate_orbits(2, 2);
    const auto map = partial_trace_map(*txy, *tx, {2, 2});
    const auto w = map.apply(expand_tensor_power(choi_from_kraus(testutil::random_kraus(2, 2, 3)), 2, txy).coeffs);
    const auto id = identity_operator(tx);
    for (std::size_t r = 0; r < tx->size(); ++r) CHECK(std::abs(w[r] - id.coeffs[r]) < 1e-12);
  }
  SUBCASE("off-diagonal on Y contributes nothing") {
    const auto txy = enumerate_orbits(4, 1), tx = enumerate_orbits(2, 1);
    const auto map = partial_trace_map(*txy, *tx, {2, 2});
    // |x=0,y=0><x=1,y=1|
    const std::size_t r = txy->index_of(count_e({0}, {3}, 4));
    const auto out = map.apply(unit(txy->size(), r));
    for (auto v : out) CHECK(v == Complex(0.0));
  }
  CHECK_THROWS_AS(partial_trace_map(*enumerate_orbits(4, 2), *enumerate_orbits(2, 3), {2, 2}), DimensionError);
}

TEST_CASE("partial transpose map") {
  for (auto [dx, dy, k] : {std::tuple{2, 2, 1}, {2, 2, 2}, {2, 3, 2}}) {
    const auto t = enumerate_orbits(dx * dy, k);
    const auto lab = orbit_of_entries(*t);
    const auto tm = partial_transpose_map(*t, {dx, dy});
    CHECK(tm.size() == t->size());
    std::vector<bool> seen(t->size(), false);
    for (std::size_t r = 0; r < t->size(); ++r) {
      CHECK(tm[tm[r]] == r);
      seen[tm[r]] = true;
      if (t->is_diagonal(r)) CHECK(tm[r] == r);
      CHECK(max_abs(dense_pt_y(dense_from(*t, lab, unit(t->size(), r)), dx, dy, k) -
                    dense_from(*t, lab, unit(t->size(), tm[r]))) == 0.0);
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
  }
}

TEST_CASE("identity embedding map") {
  for (auto [dx, dy, k] : {std::tuple{2, 2, 1}, {2, 2, 2}, {3, 2, 2}}) {
    const auto txy = enumerate_orbits(dx * dy, k), ty = enumerate_orbits(dy, k);
    const auto map = identity_embed_map(*ty, *txy, {dx, dy});
    const auto lab = orbit_of_entries(*txy), laby = orbit_of_entries(*ty);
    const ComplexMatrix p = testutil::interleave_to_grouped(dx, dy, k);
    const ComplexMatrix ix = ComplexMatrix::Identity(ipow(dx, k), ipow(dx, k));
    for (std::size_t s = 0; s < ty->size(); ++s) {
      const ComplexMatrix expect = p.transpose() * kron(ix, dense_from(*ty, laby, unit(ty->size(), s))) * p;
      const auto out = map.apply(unit(ty->size(), s));
      CHECK(max_abs(dense_from(*txy, lab, out) - expect) == 0.0);
      if (!ty->is_diagonal(s))
        for (std::size_t r = 0; r < txy->size(); ++r)
          if (out[r] != Complex(0.0)) {
            const auto [i, j] = txy->representative(r);
            for (int v = 0; v < k; ++v) CHECK(i[v] / dy == j[v] / dy);
          }
    }
    // identity on Y goes to the identity on X⊗Y
    const auto id = map.apply(identity_operator(ty).coeffs);
    const auto idxy = identity_operator(txy);
    for (std::size_t r = 0; r < txy->size(); ++r) CHECK(id[r] == idxy.coeffs[r]);
  }
}
