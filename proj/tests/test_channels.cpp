#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "support/test_util.hpp"
#include "symcap/channels.hpp"
#include "symcap/errors.hpp"

using namespace symcap;
using testutil::max_abs;

namespace {

ComplexMatrix phi_plus() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  for (int a : {0, 3})
    for (int b : {0, 3}) m(a, b) = 1.0;
  return m;
}

ComplexMatrix ket_bra(int i, int j) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(i, j) = 1.0;
  return m;
}

// Channel output on |a><b| read from the Choi matrix, compared against the
// Kraus action.
ComplexMatrix apply_via_choi(const ChoiMatrix& j, const ComplexMatrix& rho) {
  const int dx = j.dx(), dy = j.dy();
  ComplexMatrix out = ComplexMatrix::Zero(dy, dy);
  for (int a = 0; a < dx; ++a)
    for (int b = 0; b < dx; ++b) out += rho(a, b) * j.matrix().block(a * dy, b * dy, dy, dy);
  return out;
}

}  // namespace

TEST_CASE("choi from kraus") {
  SUBCASE("identity channel") {
    auto j = choi_from_kraus({ComplexMatrix::Identity(2, 2)});
    CHECK(max_abs(j.matrix() - phi_plus()) == 0.0);
    CHECK(j.op().trace() == doctest::Approx(2.0));
  }
  SUBCASE("constant channel to |0>") {
    auto j = choi_from_kraus({ket_bra(0, 0), ket_bra(0, 1)});
    CHECK(max_abs(j.matrix() - kron(ComplexMatrix::Identity(2, 2), ket_bra(0, 0))) == 0.0);
  }
  SUBCASE("gad kraus matches gad choi") {
    CHECK(max_abs(choi_from_kraus(gad_kraus(0.3, 0)).matrix() - gad_choi(0.3, 0).matrix()) < 1e-15);
    CHECK(max_abs(choi_from_kraus(gad_kraus(0.3, 0.9)).matrix() - gad_choi(0.3, 0.9).matrix()) < 1e-15);
  }
  SUBCASE("choi reproduces the channel action") {
    const auto ks = testutil::random_kraus(2, 3, 3);
    const auto j = choi_from_kraus(ks);
    CHECK(j.dx() == 2);
    CHECK(j.dy() == 3);
    const ComplexMatrix rho = testutil::random_psd(2);
    ComplexMatrix direct = ComplexMatrix::Zero(3, 3);
    for (const auto& k : ks) direct += k * rho * k.adjoint();
    CHECK(max_abs(apply_via_choi(j, rho) - direct) < 1e-12);
  }
  SUBCASE("random kraus lists give PSD output") {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<ComplexMatrix> ks;
      for (int i = 0; i < 3; ++i) ks.push_back(testutil::random_complex(2, 2));
      CHECK(validate(choi_from_kraus(ks), ValidationMode::cp).pass);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS(choi_from_kraus({}));
    CHECK_THROWS_AS(choi_from_kraus({ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)}), DimensionError);
  }
}

TEST_CASE("gad choi") {
  SUBCASE("p = 0 is the identity channel") {
    for (double q : {0.0, 0.4, 1.0}) CHECK(max_abs(gad_choi(0.0, q).matrix() - phi_plus()) < 1e-15);
  }
  SUBCASE("p = 1, q = 0 is the constant channel") {
    CHECK(max_abs(gad_choi(1.0, 0.0).matrix() - kron(ComplexMatrix::Identity(2, 2), ket_bra(0, 0))) < 1e-15);
  }
  SUBCASE("action on basis states") {
    const double p = 0.3, q = 0.9;
    const auto j = gad_choi(p, q);
    // |1><1| decays to |0> with probability p(1-q) + excites back with q.
    ComplexMatrix out = apply_via_choi(j, ket_bra(1, 1));
    CHECK(out(0, 0).real() == doctest::Approx(p * (1 - q)));
    CHECK(out(1, 1).real() == doctest::Approx(1 - p * (1 - q)));
    out = apply_via_choi(j, ket_bra(0, 1));
    CHECK(out(0, 1).real() == doctest::Approx(std::sqrt(1 - p)));
    CHECK(j.matrix().imag().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("CPTP on a 21 x 21 grid") {
    for (int a = 0; a <= 20; ++a)
      for (int b = 0; b <= 20; ++b) {
        const auto r = validate(gad_choi(a / 20.0, b / 20.0), ValidationMode::channel);
        CHECK(r.pass);
        CHECK(r.trace_residual < 1e-12);
      }
  }
  SUBCASE("out of range") {
    CHECK_THROWS(gad_choi(-0.1, 0));
    CHECK_THROWS(gad_choi(0.5, 1.5));
  }
}

TEST_CASE("validate") {
  CHECK(validate(gad_choi(0.5, 0.2), ValidationMode::channel).pass);
  const auto half = gad_choi(0.5, 0).scaled(0.5);
  CHECK(validate(half, ValidationMode::subchannel).pass);
  CHECK_FALSE(validate(half, ValidationMode::channel).pass);
  CHECK(validate(half, ValidationMode::channel).trace_residual == doctest::Approx(0.5));
  CHECK(validate(half, ValidationMode::subchannel).subchannel_slack == doctest::Approx(0.5));
  const ChoiMatrix neg(2, 2, HermitianOperator(ComplexMatrix(-ComplexMatrix::Identity(4, 4))));
  const auto r = validate(neg, ValidationMode::cp);
  CHECK_FALSE(r.pass);
  CHECK(r.min_eigenvalue == doctest::Approx(-1.0));
  const auto twice = gad_choi(0.5, 0).scaled(2.0);
  CHECK_FALSE(validate(twice, ValidationMode::subchannel).pass);
}

TEST_CASE("group symmetry") {
  const ComplexMatrix z = pauli_z(), x = pauli_x(), id = ComplexMatrix::Identity(2, 2);
  for (double p : {0.0, 0.3, 0.7, 1.0})
    for (double q : {0.0, 0.25, 0.9}) CHECK(check_group_symmetry(gad_choi(p, q), {{z, z}}));
  CHECK_FALSE(check_group_symmetry(gad_choi(0.3, 0), {{x, x}}));
  CHECK(check_group_symmetry(choi_from_kraus(testutil::random_kraus(2, 2, 2)), {{id, id}}));
  CHECK_THROWS_AS(check_group_symmetry(gad_choi(0.3, 0), {{ComplexMatrix::Identity(3, 3), id}}), DimensionError);
}

TEST_CASE("channel spec grammar") {
  auto s = parse_channel_spec("gad:0.3,0.9");
  CHECK(s.family == ChannelSpec::Family::gad);
  CHECK(max_abs(build_channel(s).matrix() - gad_choi(0.3, 0.9).matrix()) == 0.0);
  s = parse_channel_spec("ad:0.25");
  CHECK(max_abs(build_channel(s).matrix() - gad_choi(0.25, 0).matrix()) == 0.0);
  CHECK_THROWS_AS(parse_channel_spec("gad:0.3"), ParseError);
  CHECK_THROWS_AS(parse_channel_spec("gad:0.3,x"), ParseError);
  CHECK_THROWS_AS(parse_channel_spec("ad:1.5"), ParseError);
  CHECK_THROWS_AS(parse_channel_spec("depol:0.1"), ParseError);
  CHECK_THROWS_AS(parse_channel_spec("0.3"), ParseError);
  CHECK_THROWS_AS(parse_channel_spec("kraus:file.json"), ParseError);
}

TEST_CASE("kraus files") {
  const auto ks = parse_kraus_json("[[[[1,0],[0,0]],[[0,0],[0,1]]]]");
  REQUIRE(ks.size() == 1);
  CHECK(ks[0](0, 0) == Complex(1, 0));
  CHECK(ks[0](1, 1) == Complex(0, 1));
  CHECK(ks[0](0, 1) == Complex(0, 0));
  const auto two = parse_kraus_json("[[[[1,0],[0,0]],[[0,0],[0,1]]], [[[0,0],[0,0]],[[0,0],[0,0]]]]");
  CHECK(two.size() == 2);
  CHECK_THROWS_AS(parse_kraus_json("not json"), ParseError);
  CHECK_THROWS_AS(parse_kraus_json("[]"), ParseError);
  CHECK_THROWS_AS(parse_kraus_json("[[[[1,0],[0,0]],[[0,0]]]]"), ParseError);
  CHECK_THROWS_AS(parse_kraus_json("[[[1,2]]]"), ParseError);

  const std::string path = "test_channels_kraus.json";
  {
    std::ofstream f(path);
    f << "[[[[1,0],[0,0]],[[0,0],[1,0]]]]";
  }
  const auto j = build_channel(parse_channel_spec("kraus:@" + path));
  CHECK(max_abs(j.matrix() - phi_plus()) < 1e-15);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_kraus_file("no_such_file.json"), ParseError);
}
