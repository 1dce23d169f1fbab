#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace symcap {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

// Square matrix equal to its conjugate transpose. The constructor checks the
// property up to 1e-12 (relative to the largest entry) and then symmetrizes.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(ComplexMatrix m);

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }
  Eigen::VectorXd eigenvalues() const;
  double min_eigenvalue() const;

 private:
  ComplexMatrix m_;
};

struct Dims {
  int dx = 1;
  int dy = 1;
};

enum class Subsystem { X, Y };

// Traces out the named subsystem of an operator on X⊗Y.
HermitianOperator partial_trace(const HermitianOperator& op, Subsystem traced, Dims dims);

// Transposes the Y factor of an operator on X⊗Y.
HermitianOperator partial_transpose(const HermitianOperator& op, Dims dims);
ComplexMatrix partial_transpose(const ComplexMatrix& op, Dims dims);

// Partial trace of a multipartite operator. dims lists the local dimensions in
// tensor order; keep[i] says whether factor i survives.
ComplexMatrix partial_trace_multi(const ComplexMatrix& op, const std::vector<int>& dims,
                                  const std::vector<bool>& keep);

// a #_t b, with inverses taken on the support of a (eigenvalues above 1e-12).
HermitianOperator geometric_mean(const HermitianOperator& a, const HermitianOperator& b, double t);

// Whether the range of the PSD matrix a lies in the support of b (eigenvalues
// of b above 1e-12).
bool support_contained(const ComplexMatrix& a, const ComplexMatrix& b);

double operator_norm(const HermitianOperator& op);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Hermitian function of a PSD-or-not operator through its eigendecomposition.
template <class F>
ComplexMatrix hermitian_apply(const ComplexMatrix& m, F f) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  Eigen::VectorXd v = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * v.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace symcap
