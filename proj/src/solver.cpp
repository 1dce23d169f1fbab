#include "symcap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

#include "symcap/errors.hpp"
#include "symcap/parallel.hpp"

namespace symcap {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max-iter";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

void StandardFormSDP::check() const {
  if (F.size() != c.size() + 1) throw DimensionError("SDP needs one matrix per variable plus F_0");
  for (int s : block_sizes)
    if (s == 0) throw DimensionError("SDP block of size zero");
  for (const auto& mat : F)
    for (const auto& e : mat) {
      if (e.block < 0 || e.block >= static_cast<int>(block_sizes.size()))
        throw DimensionError("SDP entry refers to a missing block");
      int n = std::abs(block_sizes[e.block]);
      if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n) throw DimensionError("SDP entry out of block range");
      if (block_sizes[e.block] < 0 && e.row != e.col) throw DimensionError("off-diagonal entry in a diagonal block");
      if (!std::isfinite(e.value)) throw std::invalid_argument("SDP entry is not finite");
    }
}

RealMatrix real_embed(const ComplexMatrix& h) {
  const Eigen::Index n = h.rows();
  RealMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  out.bottomRightCorner(n, n) = h.real();
  return out;
}

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Symmetric sparse matrix listed with both triangles.
struct SparseSym {
  std::vector<int> r, c;
  std::vector<double> v;

  double dot(const Mat& x) const {
    double s = 0.0;
    for (std::size_t e = 0; e < v.size(); ++e) s += v[e] * x(r[e], c[e]);
    return s;
  }
  void add_to(Mat& m, double scale) const {
    for (std::size_t e = 0; e < v.size(); ++e) m(r[e], c[e]) += scale * v[e];
  }
  double frob2() const {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  }
};

struct Term {
  std::size_t var;
  SparseSym a;
};

struct Block {
  int n = 0;
  Mat C;
  std::vector<Term> terms;  // sorted by var
};

struct Problem {
  std::vector<Block> blocks;
  Vec b;
  Vec scale;  // x_i = y_i / scale_i, each constraint matrix of unit norm
  std::size_t m = 0;
};

Problem lower(const StandardFormSDP& sdp) {
  sdp.check();
  Problem p;
  p.m = sdp.num_vars();
  p.b = Vec(p.m);
  for (std::size_t i = 0; i < p.m; ++i) p.b(i) = -sdp.c[i];

  // Diagonal blocks become runs of 1x1 blocks.
  std::vector<int> first(sdp.block_sizes.size());
  int count = 0;
  for (std::size_t k = 0; k < sdp.block_sizes.size(); ++k) {
    first[k] = count;
    count += sdp.block_sizes[k] < 0 ? -sdp.block_sizes[k] : 1;
  }
  p.blocks.resize(count);
  for (std::size_t k = 0; k < sdp.block_sizes.size(); ++k) {
    if (sdp.block_sizes[k] < 0) {
      for (int i = 0; i < -sdp.block_sizes[k]; ++i) p.blocks[first[k] + i].n = 1;
    } else {
      p.blocks[first[k]].n = sdp.block_sizes[k];
    }
  }
  for (auto& blk : p.blocks) blk.C = Mat::Zero(blk.n, blk.n);

  auto place = [&](const BlockEntry& e) {
    if (sdp.block_sizes[e.block] < 0) return std::tuple<int, int, int>{first[e.block] + e.row, 0, 0};
    int r = std::min(e.row, e.col), c = std::max(e.row, e.col);
    return std::tuple<int, int, int>{first[e.block], r, c};
  };

  for (const auto& e : sdp.F[0]) {
    auto [bi, r, c] = place(e);
    p.blocks[bi].C(r, c) -= e.value;
    if (r != c) p.blocks[bi].C(c, r) -= e.value;
  }
  for (std::size_t i = 1; i <= p.m; ++i) {
    std::map<std::tuple<int, int, int>, double> acc;
    for (const auto& e : sdp.F[i]) acc[place(e)] -= e.value;
    int cur = -1;
    for (const auto& [key, v] : acc) {
      auto [bi, r, c] = key;
      if (v == 0.0) continue;
      if (bi != cur) {
        p.blocks[bi].terms.push_back({i - 1, {}});
        cur = bi;
      }
      auto& a = p.blocks[bi].terms.back().a;
      a.r.push_back(r);
      a.c.push_back(c);
      a.v.push_back(v);
      if (r != c) {
        a.r.push_back(c);
        a.c.push_back(r);
        a.v.push_back(v);
      }
    }
  }
  Vec norm2 = Vec::Zero(p.m);
  for (const auto& blk : p.blocks)
    for (const auto& t : blk.terms) norm2(t.var) += t.a.frob2();
  p.scale = Vec::Ones(p.m);
  for (std::size_t i = 0; i < p.m; ++i)
    if (norm2(i) > 0.0) p.scale(i) = std::sqrt(norm2(i));
  for (auto& blk : p.blocks)
    for (auto& t : blk.terms)
      for (double& v : t.a.v) v /= p.scale(t.var);
  p.b = p.b.cwiseQuotient(p.scale);
  return p;
}

struct Point {
  std::vector<Mat> X, Z;
  Vec y;
};

Vec apply_A(const Problem& p, const std::vector<Mat>& X) {
  Vec out = Vec::Zero(p.m);
  for (std::size_t k = 0; k < p.blocks.size(); ++k)
    for (const auto& t : p.blocks[k].terms) out(t.var) += t.a.dot(X[k]);
  return out;
}

std::vector<Mat> apply_At(const Problem& p, const Vec& y) {
  std::vector<Mat> out;
  out.reserve(p.blocks.size());
  for (const auto& blk : p.blocks) {
    Mat m = Mat::Zero(blk.n, blk.n);
    for (const auto& t : blk.terms) t.a.add_to(m, y(t.var));
    out.push_back(std::move(m));
  }
  return out;
}

double inner(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double frob(const std::vector<Mat>& a) { return std::sqrt(inner(a, a)); }

Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

struct Scaling {
  Mat G, Ginv, W, LX, LZ;
  Vec v;
};

bool nt_scaling(const Mat& X, const Mat& Z, Scaling& s) {
  Eigen::LLT<Mat> lx(X), lz(Z);
  if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  s.LX = lx.matrixL();
  s.LZ = lz.matrixL();
  Mat prod = s.LZ.transpose() * s.LX;
  Eigen::JacobiSVD<Mat> svd(prod, Eigen::ComputeFullU | Eigen::ComputeFullV);
  s.v = svd.singularValues();
  if (s.v.minCoeff() <= 0.0 || !s.v.allFinite()) return false;
  Vec isq = s.v.cwiseSqrt().cwiseInverse();
  s.G = s.LX * svd.matrixV() * isq.asDiagonal();
  s.Ginv = isq.asDiagonal() * svd.matrixU().transpose() * s.LZ.transpose();
  s.W = s.G * s.G.transpose();
  return true;
}

// Largest step keeping L L^T + alpha*D PSD, given the Cholesky factor L.
double max_step(const Mat& L, const Mat& D) {
  Mat t = L.triangularView<Eigen::Lower>().solve(D);
  t = L.triangularView<Eigen::Lower>().solve(t.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(t), Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  return lo >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
}

Mat schur_matrix(const Problem& p, const std::vector<Scaling>& sc) {
  Mat M = Mat::Zero(p.m, p.m);
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const Block& blk = p.blocks[k];
    const Mat& W = sc[k].W;
    const int n = blk.n;
    std::size_t total_nnz = 0;
    for (const auto& t : blk.terms) total_nnz += t.a.v.size();
    parallel_for(blk.terms.size(), [&](std::size_t ii) {
      const SparseSym& ai = blk.terms[ii].a;
      const std::size_t vi = blk.terms[ii].var;
      const double dense_cost = static_cast<double>(n) * n * n + static_cast<double>(total_nnz);
      const double pair_cost = static_cast<double>(ai.v.size()) * static_cast<double>(total_nnz);
      if (pair_cost < dense_cost) {
        // tr(A W B W) = sum a_pq b_rs W_qr W_sp
        for (std::size_t jj = ii; jj < blk.terms.size(); ++jj) {
          const SparseSym& aj = blk.terms[jj].a;
          double s = 0.0;
          for (std::size_t e = 0; e < ai.v.size(); ++e)
            for (std::size_t f = 0; f < aj.v.size(); ++f)
              s += ai.v[e] * aj.v[f] * W(ai.c[e], aj.r[f]) * W(aj.c[f], ai.r[e]);
          M(vi, blk.terms[jj].var) += s;
        }
      } else {
        Mat T = Mat::Zero(n, n);
        for (std::size_t e = 0; e < ai.v.size(); ++e) T.row(ai.r[e]) += ai.v[e] * W.row(ai.c[e]);
        Mat P = W * T;
        for (std::size_t jj = ii; jj < blk.terms.size(); ++jj)
          M(vi, blk.terms[jj].var) += blk.terms[jj].a.dot(P);
      }
    });
  }
  for (std::size_t i = 0; i < p.m; ++i)
    for (std::size_t j = i + 1; j < p.m; ++j) {
      double s = M(i, j) + M(j, i);
      M(i, j) = M(j, i) = s;
    }
  return M;
}

class SchurSolver {
 public:
  bool factor(const Mat& M) {
    regularized_ = false;
    llt_.compute(M);
    if (llt_.info() == Eigen::Success) {
      use_ldlt_ = false;
      return true;
    }
    regularized_ = true;
    double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 6; ++attempt, reg *= 100.0) {
      Mat R = M;
      R.diagonal().array() += reg;
      llt_.compute(R);
      if (llt_.info() == Eigen::Success) {
        use_ldlt_ = false;
        return true;
      }
    }
    ldlt_.compute(M);
    use_ldlt_ = true;
    return ldlt_.info() == Eigen::Success;
  }
  Vec solve(const Vec& rhs) const { return use_ldlt_ ? Vec(ldlt_.solve(rhs)) : Vec(llt_.solve(rhs)); }
  bool regularized() const { return regularized_; }

 private:
  Eigen::LLT<Mat> llt_;
  Eigen::LDLT<Mat> ldlt_;
  bool use_ldlt_ = false;
  bool regularized_ = false;
};

struct Direction {
  std::vector<Mat> dX, dZ;
  Vec dy;
};

// Solves for the step given the complementarity target Rc (X-space form).
Direction direction(const Problem& p, const std::vector<Scaling>& sc, const SchurSolver& schur, const Vec& rp,
                    const std::vector<Mat>& Rd, const std::vector<Mat>& Rc) {
  std::vector<Mat> wrw(p.blocks.size());
  for (std::size_t k = 0; k < p.blocks.size(); ++k) wrw[k] = sc[k].W * Rd[k] * sc[k].W;
  Vec rhs = rp - apply_A(p, Rc) + apply_A(p, wrw);
  Direction d;
  d.dy = schur.solve(rhs);
  // Refine against the unassembled operator; M loses accuracy near the end.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<Mat> t = apply_At(p, d.dy);
    for (std::size_t k = 0; k < p.blocks.size(); ++k) t[k] = sc[k].W * t[k] * sc[k].W;
    Vec r = rhs - apply_A(p, t);
    if (!(r.norm() > 1e-15 * rhs.norm())) break;
    d.dy += schur.solve(r);
  }
  std::vector<Mat> aty = apply_At(p, d.dy);
  d.dZ.resize(p.blocks.size());
  d.dX.resize(p.blocks.size());
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    d.dZ[k] = sym(Rd[k] - aty[k]);
    d.dX[k] = sym(Rc[k] - sc[k].W * d.dZ[k] * sc[k].W);
  }
  return d;
}

}  // namespace

SDPSolution solve(const StandardFormSDP& sdp, const SolverConfig& cfg) {
  if (!(cfg.gap_tol > 0.0 && cfg.feas_tol > 0.0)) throw std::invalid_argument("solver tolerances must be positive");
  Problem p = lower(sdp);
  const std::size_t nb = p.blocks.size();
  SDPSolution sol;
  sol.x.assign(p.m, 0.0);
  if (nb == 0) {
    sol.status = SolveStatus::numerical_failure;
    sol.message = "program has no constraint blocks";
    return sol;
  }

  double total_n = 0.0, normC = 0.0, normb = p.b.norm();  // row-normalized data
  std::vector<Mat> C(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    total_n += p.blocks[k].n;
    C[k] = p.blocks[k].C;
    normC += C[k].squaredNorm();
  }
  normC = std::sqrt(normC);

  // Starting point in the style of standard infeasible-start codes.
  Point pt;
  pt.y = Vec::Zero(p.m);
  for (std::size_t k = 0; k < nb; ++k) {
    const double n = p.blocks[k].n;
    double xi = std::max(10.0, std::sqrt(n)), eta = std::max({10.0, std::sqrt(n), C[k].norm()});
    for (const auto& t : p.blocks[k].terms) {
      double an = std::sqrt(t.a.frob2());
      xi = std::max(xi, n * (1.0 + std::abs(p.b(t.var))) / (1.0 + an));
      eta = std::max(eta, an);
    }
    pt.X.push_back(xi * Mat::Identity(p.blocks[k].n, p.blocks[k].n));
    pt.Z.push_back(eta * Mat::Identity(p.blocks[k].n, p.blocks[k].n));
  }
  const double normX0 = frob(pt.X), normZ0 = frob(pt.Z);

  std::vector<Scaling> sc(nb);
  int stalls = 0;
  // Best iterate seen, returned if the run later breaks down.
  SDPSolution best;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_iter = 0;  // last iteration that halved the merit of the previous one
  double anchor_merit = std::numeric_limits<double>::infinity();
  const double relaxed = std::max(10.0 * std::max(cfg.gap_tol, cfg.feas_tol), 1e-7);
  auto finish = [&](SolveStatus st, const char* msg) {
    sol.status = st;
    sol.message = msg;
    if (best_merit <= relaxed) {
      best.iterations = sol.iterations;
      best.status = SolveStatus::optimal;
      best.message = std::string("accepted at reduced accuracy after: ") + msg;
      return best;
    }
    if (best_merit < std::numeric_limits<double>::infinity()) {
      best.iterations = sol.iterations;
      best.status = st;
      best.message = msg;
      return best;
    }
    return sol;
  };
  for (int iter = 0;; ++iter) {
    Vec rp = p.b - apply_A(p, pt.X);
    std::vector<Mat> aty = apply_At(p, pt.y);
    std::vector<Mat> Rd(nb);
    for (std::size_t k = 0; k < nb; ++k) Rd[k] = C[k] - pt.Z[k] - aty[k];
    const double pobj = inner(C, pt.X), dobj = p.b.dot(pt.y);
    const double mu = inner(pt.X, pt.Z) / total_n;
    sol.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.dual_residual = rp.norm() / (1.0 + normb);
    sol.primal_residual = frob(Rd) / (1.0 + normC);
    sol.iterations = iter;
    for (std::size_t i = 0; i < p.m; ++i) sol.x[i] = pt.y(i) / p.scale(i);
    sol.objective = -dobj;
    sol.dual_objective = -pobj;
    if (cfg.verbose)
      std::fprintf(stderr, "%3d pobj %+.10e dobj %+.10e gap %.2e pinf %.2e dinf %.2e mu %.2e\n", iter, -dobj, -pobj,
                   sol.gap, sol.primal_residual, sol.dual_residual, mu);
    if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(mu))
      return finish(SolveStatus::numerical_failure, "non-finite iterate");
    const double merit = std::max({sol.gap, sol.primal_residual, sol.dual_residual});
    if (merit < 0.5 * anchor_merit) {
      best_iter = iter;
      anchor_merit = merit;
    }
    if (merit < best_merit) {
      best_merit = merit;
      best = sol;
    }
    if (sol.gap <= cfg.gap_tol && sol.primal_residual <= cfg.feas_tol && sol.dual_residual <= cfg.feas_tol) {
      sol.status = SolveStatus::optimal;
      return sol;
    }
    // Certificates: a growing X with A(X) -> 0 and <C,X> < 0 shows the LMI
    // is infeasible; a growing y with A^T y + Z -> 0 and b^T y > 0 shows it
    // is unbounded.
    const double nx = frob(pt.X), ny = pt.y.norm();
    if (nx > 1e8 * std::max(1.0, normX0)) {
      // Without a strictly feasible point X can also diverge with a violation
      // at round-off level; that is not a certificate.
      double cert = -pobj / nx, res = (p.b - rp).norm() / nx;
      if (cert > 0.0 && res < 1e-6 * cert && cert > 1e-6 * (1.0 + normC)) {
        sol.status = SolveStatus::infeasible;
        sol.message = "LMI infeasible (multiplier certificate)";
        return sol;
      }
    }
    if (ny > 1e8 * std::max(1.0, normZ0)) {
      std::vector<Mat> r2(nb);
      for (std::size_t k = 0; k < nb; ++k) r2[k] = aty[k] + pt.Z[k];
      double cert = dobj / ny, res = frob(r2) / ny;
      if (cert > 0.0 && res < 1e-6 * cert && cert > 1e-6 * (1.0 + normb)) {
        sol.status = SolveStatus::infeasible;
        sol.message = "objective unbounded below";
        return sol;
      }
    }
    if (iter - best_iter >= 20) return finish(SolveStatus::numerical_failure, "no progress in 20 iterations");
    if (iter >= cfg.max_iter) return finish(SolveStatus::max_iter, "iteration limit reached");

    for (std::size_t k = 0; k < nb; ++k)
      if (!nt_scaling(pt.X[k], pt.Z[k], sc[k]))
        return finish(SolveStatus::numerical_failure, "lost positive definiteness while scaling");
    SchurSolver schur;
    if (!schur.factor(schur_matrix(p, sc)))
      return finish(SolveStatus::numerical_failure, "Schur complement factorization failed");
    // A singular Schur complement near the end means the optimal face is
    // degenerate; further steps only lose accuracy.
    if (schur.regularized() && best_merit <= relaxed)
      return finish(SolveStatus::numerical_failure, "Schur complement became singular");

    // Predictor (affine scaling): Rc = -X.
    std::vector<Mat> Rc(nb);
    for (std::size_t k = 0; k < nb; ++k) Rc[k] = -pt.X[k];
    Direction pred = direction(p, sc, schur, rp, Rd, Rc);
    double ap = 1.0, ad = 1.0;
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step(sc[k].LX, pred.dX[k]));
      ad = std::min(ad, max_step(sc[k].LZ, pred.dZ[k]));
    }
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      mu_aff += (pt.X[k] + ap * pred.dX[k]).cwiseProduct(pt.Z[k] + ad * pred.dZ[k]).sum();
    mu_aff /= total_n;
    const double expon = mu > 1e-6 ? 1.0 : std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    double sigma = std::min(1.0, std::pow(std::max(mu_aff, 0.0) / mu, std::max(expon, 2.0)));

    // Corrector in the scaled space, V-Lyapunov solve elementwise.
    for (std::size_t k = 0; k < nb; ++k) {
      const Scaling& s = sc[k];
      Mat dxs = s.Ginv * pred.dX[k] * s.Ginv.transpose();
      Mat dzs = s.G.transpose() * pred.dZ[k] * s.G;
      Mat R = -0.5 * (dxs * dzs + dzs * dxs);
      for (Eigen::Index i = 0; i < R.rows(); ++i) R(i, i) += sigma * mu - s.v(i) * s.v(i);
      Mat S(R.rows(), R.cols());
      for (Eigen::Index i = 0; i < R.rows(); ++i)
        for (Eigen::Index j = 0; j < R.cols(); ++j) S(i, j) = 2.0 * R(i, j) / (s.v(i) + s.v(j));
      Rc[k] = s.G * sym(S) * s.G.transpose();
    }
    Direction dir = direction(p, sc, schur, rp, Rd, Rc);
    ap = 1.0;
    ad = 1.0;
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, cfg.damping * max_step(sc[k].LX, dir.dX[k]));
      ad = std::min(ad, cfg.damping * max_step(sc[k].LZ, dir.dZ[k]));
    }
    if (!std::isfinite(ap) || !std::isfinite(ad) || !dir.dy.allFinite())
      return finish(SolveStatus::numerical_failure, "non-finite search direction");
    stalls = (ap < 1e-8 && ad < 1e-8) ? stalls + 1 : 0;
    if (stalls >= 5) return finish(SolveStatus::numerical_failure, "step lengths stalled");
    // Back off until the new iterates factor; the step-length bound can be
    // off by rounding when X or Z is nearly singular.
    auto advance = [&](std::vector<Mat>& cur, const std::vector<Mat>& d, double& a) {
      std::vector<Mat> next(nb);
      for (int tries = 0; tries < 30; ++tries, a *= 0.8) {
        bool ok = true;
        for (std::size_t k = 0; k < nb && ok; ++k) {
          next[k] = sym(cur[k] + a * d[k]);
          Eigen::LLT<Mat> llt(next[k]);
          ok = llt.info() == Eigen::Success;
        }
        if (ok) {
          cur = std::move(next);
          return true;
        }
      }
      return false;
    };
    if (!advance(pt.X, dir.dX, ap) || !advance(pt.Z, dir.dZ, ad))
      return finish(SolveStatus::numerical_failure, "lost positive definiteness along the step");
    pt.y += ad * dir.dy;
  }
}

}  // namespace symcap
