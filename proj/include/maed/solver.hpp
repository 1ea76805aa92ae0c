#pragma once

#include "maed/channel.hpp"
#include "maed/linalg.hpp"

#include <optional>
#include <vector>

namespace maed {

struct SolverConfig {
  int t_max = 30;
  double tau0 = 0.1;
  // false disables the interference-subspace projection entirely (the
  // jammerless joint-estimation-and-detection mode used by the jljed
  // baseline); the residual/subspace bookkeeping is skipped.
  bool project_enabled = true;
  double power_tol = 1e-6;
  int power_max_iter = 500;
  double bb_floor = 1e-6;
  double bb_ceil = 1e3;
  // Test seam: start from a given data block instead of zeros.
  std::optional<ComplexMatrix> initial_data;
};

struct SolverDiagnostics {
  // Objective value at the top of each iteration plus the final iterate
  // (t_max + 1 entries).
  std::vector<double> objective;
  // Stepsize actually used per iteration (t_max entries).
  std::vector<double> stepsize;
  // Power steps that hit a zero or vanishing residual and kept the
  // previous subspace estimate.
  int degenerate_subspace_updates = 0;
  // False when the initial eigensolve stopped on max_iter and the solver
  // continued from the best iterate.
  bool eigen_converged = true;
};

struct SolverResult {
  ComplexMatrix S_D_soft;  // relaxed payload iterate, U x D
  ComplexMatrix S_D_hard;  // nearest QPSK points
  BitMatrix bits;          // demapped payload bits, U x 2D
  // Unit-norm estimate of the interference direction; absent when
  // projection is disabled or the residual vanished before the first
  // update.
  std::optional<ComplexVector> p_hat;
  SolverDiagnostics diag;
};

/// || P Y (I - pinv(S) S) ||_F^2: energy of the projected receive matrix
/// outside the row space of the symbol iterate. Throws when S is
/// row-rank-deficient.
double residual_objective(const ComplexMatrix& P, const ComplexMatrix& Y,
                          const ComplexMatrix& S_tilde);

/// Ascent direction of residual_objective in the symbol iterate:
/// pinv(S)^H Y^H P Y (I - pinv(S) S). The objective *decreases* along +G;
/// the first-order expansion is
///   f(S + eps * Delta) = f(S) - 2 eps Re<G, Delta> + O(eps^2),
/// with <A, B> = trace(A^H B). The -2 factor is pinned by the
/// finite-difference calibration test.
ComplexMatrix residual_gradient(const ComplexMatrix& P, const ComplexMatrix& Y,
                                const ComplexMatrix& S_tilde);

/// Projection onto the constraint set: pilot columns reset to S_T, data
/// entries clipped to the QPSK convex hull (|Re|, |Im| <= sqrt(Es/2)).
ComplexMatrix project_feasible(const ComplexMatrix& S_candidate, const ComplexMatrix& S_T,
                               double Es);

/// E = Y (I - pinv(S) S): the part of Y unexplained by the row space of S.
ComplexMatrix row_space_residual(const ComplexMatrix& Y, const ComplexMatrix& S_tilde);

/// Unit-norm estimate of the dominant residual direction. First call runs
/// power iteration on E E^H to convergence (falling back to the best
/// iterate when it is slow to separate); subsequent calls refine prev_p
/// with a single power step. A vanishing step keeps prev_p.
ComplexVector update_subspace(const ComplexMatrix& E, const std::optional<ComplexVector>& prev_p,
                              bool first, const SolverConfig& cfg);

/// Spectral stepsize from successive iterate/gradient differences
/// (gradients in the canonical convention where Re<dS, dG> >= 0 near a
/// minimum). Even parity uses <dS,dS>/<dS,dG>, odd uses <dS,dG>/<dG,dG>;
/// the result is clamped to [bb_floor, bb_ceil]. Non-positive or
/// non-finite curvature falls back to tau_prev.
double bb_stepsize(const ComplexMatrix& S_prev, const ComplexMatrix& S_curr,
                   const ComplexMatrix& G_prev, const ComplexMatrix& G_curr, double tau_prev,
                   int iter_parity, const SolverConfig& cfg);

struct HardDecision {
  ComplexMatrix symbols;
  BitMatrix bits;
};

/// Entry-wise nearest QPSK point, sign(Re) sqrt(Es/2) + i sign(Im) sqrt(Es/2),
/// ties at exact zero broken toward +. Bits invert the Gray map.
HardDecision hard_decision(const ComplexMatrix& S_soft, double Es);

/// Joint interference mitigation, channel estimation and data detection:
/// alternates a proximal gradient step in the symbol matrix with a rank-1
/// subspace re-estimate from the fit residual, nulling the estimated
/// interference direction in the objective. The subspace estimate is
/// warm-started from the residual of the all-pilot initial iterate, fully
/// re-solved after the first symbol update, and refined by single power
/// steps from then on. Deterministic given its inputs.
SolverResult run_maed(const ComplexMatrix& Y, const ComplexMatrix& S_T, double Es,
                      const SolverConfig& cfg);

}  // namespace maed
