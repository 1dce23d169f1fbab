#include "symcap/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "symcap/errors.hpp"

namespace symcap {

namespace {

constexpr double kHermTol = 1e-12;
constexpr double kSupportCutoff = 1e-12;

void check_bipartite(const HermitianOperator& op, Dims dims) {
  if (dims.dx < 1 || dims.dy < 1 || op.dim() != static_cast<Eigen::Index>(dims.dx) * dims.dy)
    throw DimensionError("operator dimension does not match dX*dY");
}

}  // namespace

HermitianOperator::HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionError("Hermitian operator must be square");
  if (m_.size() == 0) return;
  double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermTol * scale) throw std::invalid_argument("matrix is not Hermitian");
  ComplexMatrix sym = (m_ + m_.adjoint()) * 0.5;
  m_ = std::move(sym);
}

Eigen::VectorXd HermitianOperator::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double HermitianOperator::min_eigenvalue() const {
  if (m_.size() == 0) return 0.0;
  return eigenvalues().minCoeff();
}

ComplexMatrix partial_trace_multi(const ComplexMatrix& op, const std::vector<int>& dims,
                                  const std::vector<bool>& keep) {
  if (dims.size() != keep.size()) throw DimensionError("dims and keep differ in length");
  Eigen::Index total = 1, kept = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    total *= dims[i];
    if (keep[i]) kept *= dims[i];
  }
  if (op.rows() != total || op.cols() != total) throw DimensionError("operator size mismatch");

  // Map each full index to (kept index, traced index).
  std::vector<Eigen::Index> kidx(total), tidx(total);
  for (Eigen::Index a = 0; a < total; ++a) {
    Eigen::Index rem = a, ki = 0, ti = 0, kmul = 1, tmul = 1;
    for (int f = static_cast<int>(dims.size()) - 1; f >= 0; --f) {
      int digit = static_cast<int>(rem % dims[f]);
      rem /= dims[f];
      if (keep[f]) {
        ki += digit * kmul;
        kmul *= dims[f];
      } else {
        ti += digit * tmul;
        tmul *= dims[f];
      }
    }
    kidx[a] = ki;
    tidx[a] = ti;
  }
  ComplexMatrix out = ComplexMatrix::Zero(kept, kept);
  for (Eigen::Index a = 0; a < total; ++a)
    for (Eigen::Index b = 0; b < total; ++b)
      if (tidx[a] == tidx[b]) out(kidx[a], kidx[b]) += op(a, b);
  return out;
}

HermitianOperator partial_trace(const HermitianOperator& op, Subsystem traced, Dims dims) {
  check_bipartite(op, dims);
  std::vector<bool> keep = {traced != Subsystem::X, traced != Subsystem::Y};
  return HermitianOperator(partial_trace_multi(op.matrix(), {dims.dx, dims.dy}, keep));
}

ComplexMatrix partial_transpose(const ComplexMatrix& op, Dims dims) {
  const int dx = dims.dx, dy = dims.dy;
  if (op.rows() != dx * dy || op.cols() != dx * dy)
    throw DimensionError("operator dimension does not match dX*dY");
  ComplexMatrix out(op.rows(), op.cols());
  for (int x = 0; x < dx; ++x)
    for (int xp = 0; xp < dx; ++xp)
      for (int y = 0; y < dy; ++y)
        for (int yp = 0; yp < dy; ++yp)
          out(x * dy + y, xp * dy + yp) = op(x * dy + yp, xp * dy + y);
  return out;
}

HermitianOperator partial_transpose(const HermitianOperator& op, Dims dims) {
  check_bipartite(op, dims);
  return HermitianOperator(partial_transpose(op.matrix(), dims));
}

HermitianOperator geometric_mean(const HermitianOperator& a, const HermitianOperator& b, double t) {
  if (a.dim() != b.dim()) throw DimensionError("geometric_mean operands differ in size");
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("geometric_mean weight must lie in (0,1)");
  double scale = std::max({1.0, a.matrix().cwiseAbs().maxCoeff(), b.matrix().cwiseAbs().maxCoeff()});
  if (a.min_eigenvalue() < -1e-10 * scale || b.min_eigenvalue() < -1e-10 * scale)
    throw NotPsdError("geometric_mean requires PSD operands");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.matrix());
  const auto& ev = es.eigenvalues();
  Eigen::VectorXd s(ev.size()), sinv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    bool on = ev(i) > kSupportCutoff;
    s(i) = on ? std::sqrt(ev(i)) : 0.0;
    sinv(i) = on ? 1.0 / std::sqrt(ev(i)) : 0.0;
  }
  const ComplexMatrix& u = es.eigenvectors();
  ComplexMatrix ah = u * s.asDiagonal() * u.adjoint();
  ComplexMatrix aih = u * sinv.asDiagonal() * u.adjoint();
  ComplexMatrix inner = aih * b.matrix() * aih;
  inner = (inner + inner.adjoint()) * 0.5;
  ComplexMatrix pw = hermitian_apply(inner, [t](double x) { return x > 0.0 ? std::pow(x, t) : 0.0; });
  ComplexMatrix out = ah * pw * ah;
  return HermitianOperator((out + out.adjoint()) * 0.5);
}

bool support_contained(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("support_contained: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(b);
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    if (es.eigenvalues()(i) <= 1e-12) kernel.push_back(i);
  if (kernel.empty()) return true;
  ComplexMatrix q(b.rows(), static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t j = 0; j < kernel.size(); ++j) q.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(kernel[j]);
  const ComplexMatrix c = q.adjoint() * a * q;
  return c.cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff());
}

double operator_norm(const HermitianOperator& op) {
  if (op.dim() == 0) return 0.0;
  return op.eigenvalues().cwiseAbs().maxCoeff();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace symcap
