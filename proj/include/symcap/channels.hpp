#pragma once

#include <string>
#include <utility>
#include <vector>

#include "symcap/linalg.hpp"

namespace symcap {

// Choi matrix of a CP map X -> Y, stored on X⊗Y (input factor first).
class ChoiMatrix {
 public:
  ChoiMatrix() = default;
  ChoiMatrix(int dx, int dy, HermitianOperator op);

  int dx() const { return dx_; }
  int dy() const { return dy_; }
  int dim() const { return dx_ * dy_; }
  const HermitianOperator& op() const { return op_; }
  const ComplexMatrix& matrix() const { return op_.matrix(); }
  Dims dims() const { return {dx_, dy_}; }

  ChoiMatrix scaled(double c) const;

 private:
  int dx_ = 0;
  int dy_ = 0;
  HermitianOperator op_;
};

ChoiMatrix choi_from_kraus(const std::vector<ComplexMatrix>& kraus);

// Generalized amplitude damping with damping p and excitation q.
std::vector<ComplexMatrix> gad_kraus(double p, double q);
ChoiMatrix gad_choi(double p, double q);

enum class ValidationMode { cp, channel, subchannel };

struct ValidationReport {
  bool pass = false;
  bool psd = false;
  double min_eigenvalue = 0.0;
  double trace_residual = 0.0;    // ||tr_Y J - I||_inf
  double subchannel_slack = 0.0;  // lambda_min(I - tr_Y J)
};

ValidationReport validate(const ChoiMatrix& choi, ValidationMode mode, double tol = 1e-10);

using UnitaryPair = std::pair<ComplexMatrix, ComplexMatrix>;

bool check_group_symmetry(const ChoiMatrix& choi, const std::vector<UnitaryPair>& generators,
                          double tol = 1e-10);

struct ChannelSpec {
  enum class Family { gad, kraus, raw_choi };
  Family family = Family::gad;
  std::vector<double> params;  // gad: {p, q}
  std::vector<ComplexMatrix> kraus;
  ChoiMatrix choi;  // raw_choi only
  std::string text;  // original string, for records
};

// Grammar: "gad:p,q", "ad:p", "kraus:@path".
ChannelSpec parse_channel_spec(const std::string& text);
ChoiMatrix build_channel(const ChannelSpec& spec);

// JSON array of matrices, each a nested array of [re, im] pairs.
std::vector<ComplexMatrix> load_kraus_file(const std::string& path);
std::vector<ComplexMatrix> parse_kraus_json(const std::string& json_text);

ComplexMatrix pauli_x();
ComplexMatrix pauli_z();

}  // namespace symcap
