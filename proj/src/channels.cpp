#include "symcap/channels.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "symcap/errors.hpp"

namespace symcap {

ChoiMatrix::ChoiMatrix(int dx, int dy, HermitianOperator op) : dx_(dx), dy_(dy), op_(std::move(op)) {
  if (dx < 1 || dy < 1 || op_.dim() != static_cast<Eigen::Index>(dx) * dy)
    throw DimensionError("Choi operator dimension must equal dX*dY");
}

ChoiMatrix ChoiMatrix::scaled(double c) const {
  return ChoiMatrix(dx_, dy_, HermitianOperator(op_.matrix() * c));
}

ChoiMatrix choi_from_kraus(const std::vector<ComplexMatrix>& kraus) {
  if (kraus.empty()) throw std::invalid_argument("empty Kraus list");
  const auto dy = kraus.front().rows(), dx = kraus.front().cols();
  if (dx == 0 || dy == 0) throw DimensionError("empty Kraus operator");
  ComplexMatrix j = ComplexMatrix::Zero(dx * dy, dx * dy);
  Eigen::VectorXcd v(dx * dy);
  for (const auto& k : kraus) {
    if (k.rows() != dy || k.cols() != dx) throw DimensionError("Kraus operators differ in shape");
    // v = sum_x |x> ⊗ K|x>
    for (Eigen::Index x = 0; x < dx; ++x)
      for (Eigen::Index y = 0; y < dy; ++y) v(x * dy + y) = k(y, x);
    j += v * v.adjoint();
  }
  return ChoiMatrix(static_cast<int>(dx), static_cast<int>(dy), HermitianOperator(j));
}

std::vector<ComplexMatrix> gad_kraus(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("gad parameters must lie in [0,1]");
  std::vector<ComplexMatrix> ks(4, ComplexMatrix::Zero(2, 2));
  ks[0](0, 0) = std::sqrt(1 - q);
  ks[0](1, 1) = std::sqrt((1 - q) * (1 - p));
  ks[1](0, 1) = std::sqrt(p * (1 - q));
  ks[2](0, 0) = std::sqrt(q * (1 - p));
  ks[2](1, 1) = std::sqrt(q);
  ks[3](1, 0) = std::sqrt(p * q);
  return ks;
}

ChoiMatrix gad_choi(double p, double q) { return choi_from_kraus(gad_kraus(p, q)); }

ValidationReport validate(const ChoiMatrix& choi, ValidationMode mode, double tol) {
  ValidationReport r;
  r.min_eigenvalue = choi.op().min_eigenvalue();
  r.psd = r.min_eigenvalue >= -tol;
  ComplexMatrix tx = partial_trace(choi.op(), Subsystem::Y, choi.dims()).matrix();
  ComplexMatrix id = ComplexMatrix::Identity(choi.dx(), choi.dx());
  HermitianOperator diff(tx - id);
  r.trace_residual = operator_norm(diff);
  r.subchannel_slack = HermitianOperator(id - tx).min_eigenvalue();
  switch (mode) {
    case ValidationMode::cp: r.pass = r.psd; break;
    case ValidationMode::channel: r.pass = r.psd && r.trace_residual <= tol; break;
    case ValidationMode::subchannel: r.pass = r.psd && r.subchannel_slack >= -tol; break;
  }
  return r;
}

bool check_group_symmetry(const ChoiMatrix& choi, const std::vector<UnitaryPair>& generators,
                          double tol) {
  for (const auto& [ux, uy] : generators) {
    if (ux.rows() != choi.dx() || ux.cols() != choi.dx() || uy.rows() != choi.dy() ||
        uy.cols() != choi.dy())
      throw DimensionError("symmetry generator dimension mismatch");
    ComplexMatrix u = kron(ux, uy);
    ComplexMatrix moved = u * choi.matrix() * u.adjoint();
    if ((moved - choi.matrix()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

namespace {

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw ParseError("bad number '" + tok + "'");
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ParseError("bad number '" + tok + "' in channel spec");
    }
  }
  return out;
}

}  // namespace

ChannelSpec parse_channel_spec(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw ParseError("channel spec needs 'family:args': " + text);
  std::string family = text.substr(0, colon), args = text.substr(colon + 1);
  ChannelSpec spec;
  spec.text = text;
  if (family == "gad" || family == "ad") {
    spec.family = ChannelSpec::Family::gad;
    spec.params = parse_numbers(args);
    if (family == "ad") {
      if (spec.params.size() != 1) throw ParseError("ad takes one parameter: " + text);
      spec.params.push_back(0.0);
    }
    if (spec.params.size() != 2) throw ParseError("gad takes two parameters: " + text);
    for (double v : spec.params)
      if (!(v >= 0.0 && v <= 1.0)) throw ParseError("gad parameters must lie in [0,1]: " + text);
  } else if (family == "kraus") {
    if (args.empty() || args[0] != '@') throw ParseError("kraus spec must be kraus:@file");
    spec.family = ChannelSpec::Family::kraus;
    spec.kraus = load_kraus_file(args.substr(1));
  } else {
    throw ParseError("unknown channel family '" + family + "'");
  }
  return spec;
}

ChoiMatrix build_channel(const ChannelSpec& spec) {
  switch (spec.family) {
    case ChannelSpec::Family::gad: return gad_choi(spec.params.at(0), spec.params.at(1));
    case ChannelSpec::Family::kraus: return choi_from_kraus(spec.kraus);
    case ChannelSpec::Family::raw_choi: return spec.choi;
  }
  throw std::logic_error("unreachable");
}

std::vector<ComplexMatrix> parse_kraus_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("Kraus file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array() || doc.empty()) throw ParseError("Kraus file must be a nonempty array");
  std::vector<ComplexMatrix> out;
  for (const auto& mat : doc) {
    if (!mat.is_array() || mat.empty() || !mat[0].is_array())
      throw ParseError("each Kraus operator must be a nested array");
    Eigen::Index rows = static_cast<Eigen::Index>(mat.size());
    Eigen::Index cols = static_cast<Eigen::Index>(mat[0].size());
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (!mat[i].is_array() || static_cast<Eigen::Index>(mat[i].size()) != cols)
        throw ParseError("ragged Kraus operator");
      for (Eigen::Index j = 0; j < cols; ++j) {
        const auto& e = mat[i][j];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
          throw ParseError("Kraus entries must be [re, im] pairs");
        m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ComplexMatrix> load_kraus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open Kraus file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kraus_json(ss.str());
}

ComplexMatrix pauli_x() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

}  // namespace symcap
