#include <cmath>

#include <doctest.h>

#include "oracle_values.hpp"
#include "support/test_util.hpp"
#include "symcap/errors.hpp"
#include "symcap/programs.hpp"

using namespace symcap;

namespace {

double dsharp(const ChoiMatrix& n, const ChoiMatrix& m, int k, bool masked = false, double alpha = 2.0) {
  const bool real = n.matrix().imag().cwiseAbs().maxCoeff() == 0.0 && m.matrix().imag().cwiseAbs().maxCoeff() == 0.0;
  std::optional<DiagonalSymmetry> sym;
  if (masked) sym = z2_symmetry();
  const auto ctx = reduction_context(n.dx(), n.dy(), k, real, sym);
  return solve_bound(build_dsharp_reduced(n, m, alpha, *ctx), alpha, k).per_copy;
}

double dsharp_dense(const ChoiMatrix& n, const ChoiMatrix& m, int k, double alpha = 2.0) {
  return solve_bound(build_dsharp_dense(n, m, alpha, k), alpha, k).per_copy;
}

double upsilon(double p, int k) {
  const auto ctx = reduction_context(2, 2, k, true, z2_symmetry());
  return solve_bound(build_upsilon(gad_choi(p, 0), 2.0, *ctx), 2.0, k).per_copy;
}

ChoiMatrix phased_gad(double p, double q) {
  ComplexMatrix s = ComplexMatrix::Identity(2, 2);
  s(1, 1) = Complex(0, 1);
  auto ks = gad_kraus(p, q);
  for (auto& k : ks) k = s * k;
  return choi_from_kraus(ks);
}

// max t s.t. t·lhs ⪯ sigma #_w a, solved as min -t.
double max_scale_below_mean(const ComplexMatrix& lhs, const ComplexMatrix& sigma, const ComplexMatrix& a, double w) {
  const bool real = lhs.imag().cwiseAbs().maxCoeff() == 0.0 && sigma.imag().cwiseAbs().maxCoeff() == 0.0 &&
                    a.imag().cwiseAbs().maxCoeff() == 0.0;
  const int n = static_cast<int>(lhs.rows());
  ReducedProgram prog;
  const auto t = prog.add_scalar("t");
  AffineBlock l = AffineBlock::zero(n);
  l.terms.push_back({t, SparseHermitian::from_dense(lhs)});
  encode_geomean_constraint(prog, l, AffineBlock::constant_block(sigma), AffineBlock::constant_block(a), w,
                            free_hermitian_slack(n, real, "G"));
  prog.objective = {{t, -1.0}};
  const auto r = solve_program(prog);
  REQUIRE(r.status == SolveStatus::optimal);
  return r.x[t];
}

double lambda_min(const ComplexMatrix& m) { return testutil::min_eig(m); }

}  // namespace

TEST_CASE("dyadic weights") {
  auto d = Dyadic::from_weight(0.5);
  CHECK(d.num == 1);
  CHECK(d.log2den == 1);
  d = Dyadic::from_weight(0.375);
  CHECK(d.num == 3);
  CHECK(d.log2den == 3);
  CHECK(d.value() == 0.375);
  CHECK_THROWS(Dyadic::from_weight(1.0 / 3.0));
  CHECK_THROWS(Dyadic::from_weight(0.0));
  CHECK_THROWS(Dyadic::from_weight(1.0));
}

TEST_CASE("hermitian basis") {
  CHECK(hermitian_basis(3, true).size() == 6);
  CHECK(hermitian_basis(3, false).size() == 9);
  ReducedProgram prog;
  const auto blk = add_free_hermitian(prog, "H", 2, false);
  CHECK(prog.scalars.size() == 4);
  ComplexMatrix v = blk.evaluate({1.0, 2.0, 3.0, 4.0});
  CHECK(v.isApprox(v.adjoint()));
}

TEST_CASE("geometric-mean encoding") {
  SUBCASE("sigma = a = I") {
    ComplexMatrix l = ComplexMatrix::Zero(2, 2);
    l.diagonal() << 2.0, 0.5;
    const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    CHECK(max_scale_below_mean(l, id, id, 0.5) == doctest::Approx(0.5).epsilon(1e-7));
  }
  SUBCASE("commuting boundary case") {
    ComplexMatrix s = ComplexMatrix::Zero(2, 2), a = ComplexMatrix::Zero(2, 2);
    s.diagonal() << 1, 4;
    a.diagonal() << 4, 1;
    CHECK(max_scale_below_mean(2.0 * ComplexMatrix::Identity(2, 2), s, a, 0.5) == doctest::Approx(1.0).epsilon(1e-7));
  }
  SUBCASE("extremality: the mean plus eps I is out of reach") {
    const ComplexMatrix s = testutil::random_psd(2, 0.2, true), a = testutil::random_psd(2, 0.2, true);
    const ComplexMatrix g = geometric_mean(HermitianOperator(s), HermitianOperator(a), 0.5).matrix();
    const double eps = 1e-2;
    const ComplexMatrix lhs = g + eps * ComplexMatrix::Identity(2, 2);
    // exact optimum: λmin(lhs^{-1/2} g lhs^{-1/2}) < 1
    const ComplexMatrix li = hermitian_apply(lhs, [](double v) { return 1 / std::sqrt(v); });
    const double expect = lambda_min(li * g * li);
    CHECK(expect < 1.0);
    CHECK(max_scale_below_mean(lhs, s, a, 0.5) == doctest::Approx(expect).epsilon(1e-6));
  }
  SUBCASE("dyadic weights against the closed-form mean") {
    for (double w : {0.5, 0.25, 0.75, 0.375}) {
      CAPTURE(w);
      const ComplexMatrix s = testutil::random_psd(3, 0.3), a = testutil::random_psd(3, 0.3);
      const ComplexMatrix g = geometric_mean(HermitianOperator(s), HermitianOperator(a), w).matrix();
      // t·I ⪯ s #_w a  ⇔  t ≤ λmin(s #_w a)
      CHECK(max_scale_below_mean(ComplexMatrix::Identity(3, 3), s, a, w) == doctest::Approx(lambda_min(g)).epsilon(1e-6));
    }
  }
  SUBCASE("rejections") {
    ReducedProgram prog;
    const auto id = AffineBlock::constant_block(ComplexMatrix::Identity(2, 2));
    CHECK_THROWS(encode_geomean_constraint(prog, id, id, id, 1.0 / 3.0, free_hermitian_slack(2, true, "G")));
    CHECK_THROWS_AS(encode_geomean_constraint(prog, id, AffineBlock::constant_block(ComplexMatrix::Identity(3, 3)), id,
                                              0.5, free_hermitian_slack(2, true, "G")),
                    DimensionError);
  }
}

TEST_CASE("dense divergence") {
  const auto n = gad_choi(0.3, 0);
  CHECK(dsharp_dense(n, n, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(dsharp_dense(n, gad_choi(0.4, 0.9), 1) == doctest::Approx(oracle::dsharp_k1_p04).epsilon(3e-7));
  CHECK(dsharp_dense(n, gad_choi(0.4, 0.9), 2) * 2 == doctest::Approx(oracle::dsharp_k2_total_p04).epsilon(3e-7));
  CHECK_THROWS_AS(build_dsharp_dense(n, gad_choi(0.4, 0.9), 2.0, 4), DimensionError);
  CHECK_THROWS_AS(build_dsharp_dense(n, gad_choi(0.4, 0.9), 3.0, 1), std::invalid_argument);
}

TEST_CASE("reduced divergence") {
  const auto n = gad_choi(0.3, 0);
  SUBCASE("reference values at k = 1") {
    CHECK(dsharp(n, gad_choi(0.4, 0.9), 1) == doctest::Approx(oracle::dsharp_k1_p04).epsilon(3e-7));
    CHECK(dsharp(n, gad_choi(0.6, 0.9), 1) == doctest::Approx(oracle::dsharp_k1_p06).epsilon(3e-7));
    CHECK(dsharp(n, gad_choi(0.8, 0.9), 1) == doctest::Approx(oracle::dsharp_k1_p08).epsilon(3e-7));
  }
  SUBCASE("equal channels give zero") {
    const auto f = gad_choi(0.3, 0.2);
    for (int k = 1; k <= 3; ++k) CHECK(std::abs(dsharp(f, f, k)) < 1e-6);
    const auto m = gad_choi(0.6, 0.9);
    CHECK(std::abs(dsharp(m, m, 2)) < 1e-6);
  }
  SUBCASE("dense agreement at k = 2") {
    const auto m = gad_choi(0.4, 0.9);
    const double red = dsharp(n, m, 2);
    CHECK(red * 2 == doctest::Approx(oracle::dsharp_k2_total_p04).epsilon(3e-7));
    CHECK(dsharp(n, m, 2, true) == doctest::Approx(red).epsilon(1e-7));
    CHECK(dsharp_dense(n, m, 2) == doctest::Approx(red).epsilon(1e-7));
  }
  SUBCASE("singular second argument") {
    const auto ctx = reduction_context(2, 2, 1, true);
    CHECK_THROWS_AS(build_dsharp_reduced(gad_choi(0.3, 0.2), n, 2.0, *ctx), InfeasibleError);
    CHECK_THROWS_AS(build_dsharp_reduced(gad_choi(0.4, 0), n, 2.0, *ctx), InfeasibleError);
    CHECK_THROWS_AS(build_dsharp_dense(gad_choi(0.4, 0), n, 2.0, 1), InfeasibleError);
    // Equal supports: no interior point, so the regularized form is used.
    const double v = solve_bound(build_dsharp_reduced(n, n, 2.0, *ctx, 1e-7), 2.0, 1).per_copy;
    CHECK(std::abs(v) < 1e-5);
  }
  SUBCASE("k = 3 against the frozen dense value") {
    // dense 64×64 program solved once: 1.9786831 bits per copy
    const double red = dsharp(n, gad_choi(0.4, 0.9), 3, true);
    CHECK(red == doctest::Approx(oracle::dsharp_k3_per_copy_dense).epsilon(2e-7));
  }
  SUBCASE("complex channels") {
    const auto nc = phased_gad(0.3, 0.2), mc = gad_choi(0.5, 0.4);
    CHECK(dsharp(nc, mc, 1) == doctest::Approx(oracle::dsharp_phased_k1).epsilon(3e-7));
    CHECK(dsharp_dense(nc, mc, 1) == doctest::Approx(oracle::dsharp_phased_k1).epsilon(3e-7));
    CHECK(dsharp(nc, mc, 2) * 2 == doctest::Approx(oracle::dsharp_phased_k2_total).epsilon(3e-7));
    const auto ctx = reduction_context(2, 2, 1, true);
    CHECK_THROWS(build_dsharp_reduced(nc, mc, 2.0, *ctx));
  }
  SUBCASE("random pairs: dense and reduced agree") {
    for (int trial = 0; trial < 3; ++trial) {
      const auto a = choi_from_kraus(testutil::random_kraus(2, 2, 2, true));
      const auto b = choi_from_kraus(testutil::random_kraus(2, 2, 4, true));
      for (int k = 1; k <= 2; ++k) {
        const double d = dsharp_dense(a, b, k), r = dsharp(a, b, k);
        CHECK(std::abs(d - r) <= 1e-5 * std::max(1.0, std::abs(d)));
      }
    }
  }
  SUBCASE("symmetry mask needs a symmetric channel") {
    const auto ctx = reduction_context(2, 2, 2, true, z2_symmetry());
    ComplexMatrix h(2, 2);
    h << 1, 1, 1, -1;
    const auto rotated = choi_from_kraus({std::sqrt(0.5) * h});
    CHECK_THROWS(require_symmetry(rotated, z2_symmetry()));
    CHECK_NOTHROW(require_symmetry(gad_choi(0.2, 0.7), z2_symmetry()));
  }
}

TEST_CASE("divergence properties") {
  const auto n = gad_choi(0.3, 0), m = gad_choi(0.6, 0.9);
  SUBCASE("scale covariance") {
    const double base = dsharp(n, m, 1);
    for (double c : {0.5, 2.0, 3.0}) CHECK(dsharp(n, m.scaled(c), 1) == doctest::Approx(base - std::log2(c)).epsilon(1e-7));
  }
  SUBCASE("nonnegative against channels") {
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = choi_from_kraus(testutil::random_kraus(2, 2, 3, true));
      const auto b = choi_from_kraus(testutil::random_kraus(2, 2, 4, true));
      CHECK(dsharp(a, b, 1) >= -1e-7);
    }
  }
  SUBCASE("per-copy value does not increase with k") {
    for (auto [pn, pm, qm] : {std::tuple{0.3, 0.4, 0.9}, {0.3, 0.8, 0.9}, {0.2, 0.5, 0.3}}) {
      const auto a = gad_choi(pn, 0), b = gad_choi(pm, qm);
      double prev = dsharp(a, b, 1);
      for (int k = 2; k <= 3; ++k) {
        const double cur = dsharp(a, b, k, true);
        CHECK(cur <= prev + 1e-7);
        prev = cur;
      }
    }
  }
  SUBCASE("larger alpha with dyadic 1/alpha") {
    const double a43 = dsharp(n, m, 1, false, 4.0 / 3.0);
    CHECK(dsharp_dense(n, m, 1, 4.0 / 3.0) == doctest::Approx(a43).epsilon(1e-6));
    CHECK(dsharp(n, m, 2, false, 4.0 / 3.0) == doctest::Approx(dsharp_dense(n, m, 2, 4.0 / 3.0)).epsilon(1e-5));
    CHECK(std::isfinite(dsharp(n, m, 1, false, 8.0 / 5.0)));
  }
}

TEST_CASE("upsilon") {
  SUBCASE("k = 1 against the dense reference") {
    CHECK(upsilon(0.1, 1) == doctest::Approx(oracle::upsilon_k1_p01).epsilon(1e-6));
    CHECK(upsilon(0.5, 1) == doctest::Approx(oracle::upsilon_k1_p05).epsilon(1e-6));
    CHECK(upsilon(0.75, 1) == doctest::Approx(oracle::upsilon_k1_p075).epsilon(1e-6));
  }
  SUBCASE("noiseless qubit") { CHECK(upsilon(0.0, 1) == doctest::Approx(1.0).epsilon(1e-6)); }
  SUBCASE("chain") {
    for (double p : {0.1, 0.5, 0.75}) {
      const double cb = std::log2(1 + std::sqrt(1 - p));
      const double u1 = upsilon(p, 1);
      CHECK(u1 <= cb + 1e-6);
      for (int k = 2; k <= 3; ++k) CHECK(upsilon(p, k) <= u1 + 1e-7);
    }
  }
  SUBCASE("unmasked agrees at k = 2") {
    const auto ctx = reduction_context(2, 2, 2, true);
    const double full = solve_bound(build_upsilon(gad_choi(0.5, 0), 2.0, *ctx), 2.0, 2).per_copy;
    CHECK(full == doctest::Approx(upsilon(0.5, 2)).epsilon(1e-7));
  }
}

TEST_CASE("theta") {
  SUBCASE("constant channel") {
    for (int k : {1, 2}) {
      const auto r = run_theta(gad_choi(1.0, 0), 2.0, k, {}, z2_symmetry());
      CHECK(std::abs(r.stage2.per_copy) <= 1e-6);
    }
  }
  SUBCASE("stage one against the dense reference") {
    CHECK(run_theta(gad_choi(0.05, 0), 2.0, 1).stage1.total == doctest::Approx(oracle::theta_s1_p005).epsilon(1e-6));
    CHECK(run_theta(gad_choi(0.25, 0), 2.0, 1).stage1.total == doctest::Approx(oracle::theta_s1_p025).epsilon(1e-6));
    CHECK(run_theta(gad_choi(0.5, 0), 2.0, 1).stage1.total == doctest::Approx(oracle::theta_s1_p05).epsilon(1e-6));
  }
  SUBCASE("stage two") {
    const auto r = run_theta(gad_choi(0.5, 0), 2.0, 2, {}, z2_symmetry());
    CHECK(validate(r.m_star, ValidationMode::cp, 1e-7).pass);
    CHECK(r.stage2.per_copy <= r.stage1.total + 1e-7);
    CHECK(r.stage2.k == 2);
    // stage two at k = 1 reproduces stage one
    const auto one = run_theta(gad_choi(0.5, 0), 2.0, 1);
    CHECK(one.stage2.per_copy == doctest::Approx(one.stage1.total).epsilon(1e-6));
  }
}

TEST_CASE("beta") {
  for (auto [p, expect] : {std::pair{0.1, oracle::beta_p01}, {0.5, oracle::beta_p05}, {0.75, oracle::beta_p075}}) {
    CHECK(beta_sdp(gad_choi(p, 0)) == doctest::Approx(1 + std::sqrt(1 - p)).epsilon(1e-6));
    CHECK(beta_sdp(gad_choi(p, 0)) == doctest::Approx(expect).epsilon(1e-6));
  }
  CHECK(beta_sdp(gad_choi(0.0, 0)) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(beta_sdp(phased_gad(0.3, 0.2)) == doctest::Approx(oracle::beta_phased).epsilon(1e-6));
  const ChoiMatrix zero(2, 2, HermitianOperator(ComplexMatrix::Zero(4, 4)));
  CHECK(std::abs(beta_sdp(zero)) <= 1e-6);
}

TEST_CASE("copies needed for a target accuracy") {
  CHECK(k_for_accuracy(2.0, 2, 2, 1.0) == 1024);
  CHECK(k_for_accuracy(2.0, 2, 2, 0.5) == 2048);
  long long prev = k_for_accuracy(2.0, 2, 2, 0.05);
  for (double eps = 0.1; eps <= 1.0; eps += 0.05) {
    const long long k = k_for_accuracy(2.0, 2, 2, eps);
    CHECK(k <= prev);
    prev = k;
  }
  CHECK(k_for_accuracy(3.0, 2, 2, 1.0) == 768);
  CHECK_THROWS(k_for_accuracy(1.0, 2, 2, 0.5));
  CHECK_THROWS(k_for_accuracy(2.0, 2, 2, 0.0));
  CHECK_THROWS(k_for_accuracy(2.0, 2, 2, 1.5));
}
