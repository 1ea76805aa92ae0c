#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace maed {

using Complex = std::complex<double>;

// Dense column-major storage throughout (Eigen default).
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Shape violations detectable before any arithmetic.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Value-dependent failures: singular pivots, rank deficiency, zero vectors.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when power iteration runs out of iterations. Carries the best
// iterate seen so that callers tracking a slowly separating subspace can
// keep going with the approximation.
struct PowerIterationError : NumericalError {
  ComplexVector best_iterate;
  double relative_residual;
  PowerIterationError(const std::string& msg, ComplexVector best, double rel_res)
      : NumericalError(msg), best_iterate(std::move(best)), relative_residual(rel_res) {}
};

bool all_finite(const ComplexMatrix& a);

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix hermitian(const ComplexMatrix& a);

double frobenius_norm_sq(const ComplexMatrix& a);

/// Solves G X = B for Hermitian positive-definite G via Cholesky.
/// The solution is checked to a relative residual of 1e-10 in Frobenius
/// norm; failures (indefinite or numerically singular G) throw.
ComplexMatrix solve_hermitian_posdef(const ComplexMatrix& g, const ComplexMatrix& b);

/// Right pseudo-inverse S^H (S S^H)^{-1} of a full-row-rank wide matrix,
/// so that S * pinv(S) = I. Throws NumericalError when the row Gram matrix
/// is numerically singular.
ComplexMatrix right_pseudo_inverse(const ComplexMatrix& s);

/// I - p p^H / ||p||^2: orthogonal projection onto the complement of span(p).
ComplexMatrix orth_complement_projector(const ComplexVector& p);

/// Applies orth_complement_projector(p) to x without forming the projector.
ComplexMatrix apply_orth_complement(const ComplexVector& p, const ComplexMatrix& x);

/// Dominant eigenvector of a Hermitian PSD matrix by power iteration.
/// Converged when ||M v - lambda v|| <= tol * lambda with lambda = v^H M v.
/// The global phase of the result is unconstrained; consumers must be
/// phase-invariant. The seed defaults to the largest-norm column of M,
/// normalized, so runs are reproducible. Throws PowerIterationError
/// (carrying the best iterate) when max_iter is exhausted.
ComplexVector dominant_eigenvector(const ComplexMatrix& m, double tol = 1e-6,
                                   int max_iter = 500,
                                   const std::optional<ComplexVector>& seed = std::nullopt);

/// One power-method step M v / ||M v||, normalized to unit length.
/// Throws NumericalError when M v = 0.
ComplexVector power_step(const ComplexMatrix& m, const ComplexVector& v);

}  // namespace maed
