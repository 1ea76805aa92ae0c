#include "maed/linalg.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace maed {

bool all_finite(const ComplexMatrix& a) {
  return a.allFinite();
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions disagree (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + ")");
  }
  return a * b;
}

ComplexMatrix hermitian(const ComplexMatrix& a) {
  return a.adjoint();
}

double frobenius_norm_sq(const ComplexMatrix& a) {
  return a.squaredNorm();
}

ComplexMatrix solve_hermitian_posdef(const ComplexMatrix& g, const ComplexMatrix& b) {
  if (g.rows() != g.cols()) {
    throw DimensionError("solve_hermitian_posdef: G must be square");
  }
  if (g.rows() != b.rows()) {
    throw DimensionError("solve_hermitian_posdef: G and B row counts disagree");
  }
  Eigen::LLT<ComplexMatrix> llt(g);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("solve_hermitian_posdef: Cholesky failed (matrix not positive definite)");
  }
  ComplexMatrix x = llt.solve(b);
  const double bnorm = b.norm();
  const double resid = (g * x - b).norm();
  if (!x.allFinite() || resid > 1e-10 * std::max(bnorm, 1e-300)) {
    throw NumericalError("solve_hermitian_posdef: solution residual too large (system near singular)");
  }
  return x;
}

ComplexMatrix right_pseudo_inverse(const ComplexMatrix& s) {
  if (s.rows() > s.cols()) {
    throw DimensionError("right_pseudo_inverse: expects a wide matrix (rows <= cols)");
  }
  const ComplexMatrix gram = s * s.adjoint();
  Eigen::LLT<ComplexMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("right_pseudo_inverse: row Gram matrix not positive definite (rank deficient)");
  }
  // S^H (S S^H)^{-1} == (G^{-1} S)^H for Hermitian G.
  ComplexMatrix pinv = llt.solve(s).adjoint();
  const Eigen::Index n = s.rows();
  const double dev = (s * pinv - ComplexMatrix::Identity(n, n)).norm();
  if (!pinv.allFinite() || dev > 1e-9 * static_cast<double>(n)) {
    throw NumericalError("right_pseudo_inverse: S * pinv(S) deviates from identity (rank deficient)");
  }
  return pinv;
}

ComplexMatrix orth_complement_projector(const ComplexVector& p) {
  const double nsq = p.squaredNorm();
  if (nsq == 0.0) {
    throw NumericalError("orth_complement_projector: zero vector has no direction");
  }
  const Eigen::Index n = p.size();
  ComplexMatrix proj = ComplexMatrix::Identity(n, n);
  proj.noalias() -= (p * p.adjoint()) / nsq;
  return proj;
}

ComplexMatrix apply_orth_complement(const ComplexVector& p, const ComplexMatrix& x) {
  const double nsq = p.squaredNorm();
  if (nsq == 0.0) {
    throw NumericalError("apply_orth_complement: zero vector has no direction");
  }
  if (p.size() != x.rows()) {
    throw DimensionError("apply_orth_complement: p length must match x rows");
  }
  ComplexMatrix out = x;
  out.noalias() -= p * ((p.adjoint() * x) / nsq);
  return out;
}

ComplexVector dominant_eigenvector(const ComplexMatrix& m, double tol, int max_iter,
                                   const std::optional<ComplexVector>& seed) {
  if (m.rows() != m.cols()) {
    throw DimensionError("dominant_eigenvector: matrix must be square");
  }
  ComplexVector v;
  if (seed.has_value()) {
    if (seed->size() != m.rows()) {
      throw DimensionError("dominant_eigenvector: seed length must match matrix order");
    }
    v = *seed;
  } else {
    Eigen::Index best_col = 0;
    const Eigen::RowVectorXd col_norms = m.colwise().norm();
    col_norms.maxCoeff(&best_col);
    v = m.col(best_col);
  }
  const double vn = v.norm();
  if (vn == 0.0) {
    throw NumericalError("dominant_eigenvector: zero matrix (or zero seed) has no dominant direction");
  }
  v /= vn;

  ComplexVector best = v;
  double best_rel = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= max_iter; ++it) {
    ComplexVector w = m * v;
    const double lambda = (v.dot(w)).real();  // Rayleigh quotient, real for Hermitian m
    const double resid = (w - lambda * v).norm();
    const double rel = lambda > 0.0 ? resid / lambda : resid;
    if (rel < best_rel) {
      best_rel = rel;
      best = v;
    }
    if (resid <= tol * lambda) {
      return v;
    }
    const double wn = w.norm();
    if (wn == 0.0) {
      throw NumericalError("dominant_eigenvector: iterate annihilated (M v = 0)");
    }
    v = w / wn;
  }
  throw PowerIterationError("dominant_eigenvector: no convergence within max_iter", best, best_rel);
}

ComplexVector power_step(const ComplexMatrix& m, const ComplexVector& v) {
  if (m.rows() != m.cols()) {
    throw DimensionError("power_step: matrix must be square");
  }
  if (m.cols() != v.size()) {
    throw DimensionError("power_step: vector length must match matrix order");
  }
  ComplexVector w = m * v;
  const double wn = w.norm();
  if (wn == 0.0) {
    throw NumericalError("power_step: M v = 0, no direction to renormalize");
  }
  return w / wn;
}

}  // namespace maed
