#include "maed/solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <vector>

namespace maed {

namespace {

// G^{-1} S for G = S S^H. Well-defined whenever S has full row rank; with
// orthogonal pilots in the left block, G >= T Es I and the factorization
// cannot fail on solver iterates.
ComplexMatrix row_gram_solve(const ComplexMatrix& s) {
  const ComplexMatrix gram = s * s.adjoint();
  Eigen::LLT<ComplexMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("symbol matrix is row-rank deficient");
  }
  ComplexMatrix w = llt.solve(s);
  if (!w.allFinite()) {
    throw NumericalError("row-space solve produced non-finite values");
  }
  return w;
}

}  // namespace

double residual_objective(const ComplexMatrix& P, const ComplexMatrix& Y,
                          const ComplexMatrix& S_tilde) {
  return (P * row_space_residual(Y, S_tilde)).squaredNorm();
}

ComplexMatrix residual_gradient(const ComplexMatrix& P, const ComplexMatrix& Y,
                                const ComplexMatrix& S_tilde) {
  if (Y.cols() != S_tilde.cols() || P.rows() != P.cols() || P.cols() != Y.rows()) {
    throw DimensionError("residual_gradient: nonconformal arguments");
  }
  const ComplexMatrix w = row_gram_solve(S_tilde);  // (pinv S)^H
  const ComplexMatrix m = Y.adjoint() * (P * Y);    // K x K
  const ComplexMatrix t = w * m;
  return t - (t * S_tilde.adjoint()) * w;  // t (I - S^H w)
}

ComplexMatrix project_feasible(const ComplexMatrix& S_candidate, const ComplexMatrix& S_T,
                               double Es) {
  if (S_candidate.rows() != S_T.rows() || S_candidate.cols() < S_T.cols()) {
    throw DimensionError("project_feasible: candidate does not contain a pilot block");
  }
  const double box = std::sqrt(Es / 2.0);
  ComplexMatrix out = S_candidate;
  out.leftCols(S_T.cols()) = S_T;
  for (Eigen::Index c = S_T.cols(); c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const Complex v = out(r, c);
      out(r, c) = Complex(std::clamp(v.real(), -box, box), std::clamp(v.imag(), -box, box));
    }
  }
  return out;
}

ComplexMatrix row_space_residual(const ComplexMatrix& Y, const ComplexMatrix& S_tilde) {
  if (Y.cols() != S_tilde.cols()) {
    throw DimensionError("row_space_residual: Y and S must agree in columns");
  }
  const ComplexMatrix w = row_gram_solve(S_tilde);
  ComplexMatrix e = Y;
  e.noalias() -= (Y * S_tilde.adjoint()) * w;
  return e;
}

ComplexVector update_subspace(const ComplexMatrix& E, const std::optional<ComplexVector>& prev_p,
                              bool first, const SolverConfig& cfg) {
  if (first || !prev_p.has_value()) {
    try {
      return dominant_eigenvector(E * E.adjoint(), cfg.power_tol, cfg.power_max_iter);
    } catch (const PowerIterationError& slow) {
      // Slowly separating spectrum: the best iterate is good enough to
      // seed the per-iteration power steps that follow.
      return slow.best_iterate;
    } catch (const NumericalError&) {
      if (prev_p.has_value()) {
        return *prev_p;
      }
      throw;
    }
  }
  // Single power step on E E^H, applied matrix-free.
  ComplexVector v = E * (E.adjoint() * (*prev_p));
  const double vn = v.norm();
  if (vn == 0.0) {
    return *prev_p;
  }
  return v / vn;
}

double bb_stepsize(const ComplexMatrix& S_prev, const ComplexMatrix& S_curr,
                   const ComplexMatrix& G_prev, const ComplexMatrix& G_curr, double tau_prev,
                   int iter_parity, const SolverConfig& cfg) {
  if (S_prev.rows() != S_curr.rows() || S_prev.cols() != S_curr.cols() ||
      G_prev.rows() != G_curr.rows() || G_prev.cols() != G_curr.cols() ||
      S_curr.rows() != G_curr.rows() || S_curr.cols() != G_curr.cols()) {
    throw DimensionError("bb_stepsize: nonconformal arguments");
  }
  const ComplexMatrix ds = S_curr - S_prev;
  const ComplexMatrix dg = G_curr - G_prev;
  double num, den;
  if (iter_parity % 2 == 0) {
    num = ds.squaredNorm();
    den = ds.cwiseProduct(dg.conjugate()).sum().real();  // Re<ds, dg>
  } else {
    num = ds.cwiseProduct(dg.conjugate()).sum().real();
    den = dg.squaredNorm();
  }
  if (!(den > 0.0) || !std::isfinite(den) || !std::isfinite(num)) {
    return tau_prev;
  }
  const double tau = num / den;
  if (!std::isfinite(tau)) {
    return tau_prev;
  }
  return std::clamp(tau, cfg.bb_floor, cfg.bb_ceil);
}

HardDecision hard_decision(const ComplexMatrix& S_soft, double Es) {
  const double amp = std::sqrt(Es / 2.0);
  HardDecision out;
  out.symbols = ComplexMatrix(S_soft.rows(), S_soft.cols());
  out.bits = BitMatrix(S_soft.rows(), 2 * S_soft.cols());
  for (Eigen::Index c = 0; c < S_soft.cols(); ++c) {
    for (Eigen::Index r = 0; r < S_soft.rows(); ++r) {
      const uint8_t b_re = S_soft(r, c).real() < 0.0 ? 1 : 0;
      const uint8_t b_im = S_soft(r, c).imag() < 0.0 ? 1 : 0;
      out.bits(r, 2 * c) = b_re;
      out.bits(r, 2 * c + 1) = b_im;
      out.symbols(r, c) = Complex(b_re ? -amp : amp, b_im ? -amp : amp);
    }
  }
  return out;
}

namespace {

// Nonmonotone backtracking safeguard around the spectral stepsize, as in
// standard forward-backward splitting implementations: a trial step must
// satisfy a sufficient-decrease condition against the worst recent
// objective value, else the stepsize is halved. Without it, a fixed tau0
// against an interference-dominated first gradient throws the iterate to
// the constraint-box corners and the curvature estimates never recover.
constexpr int kBacktrackWindow = 10;
constexpr int kBacktrackMaxTrials = 50;

}  // namespace

SolverResult run_maed(const ComplexMatrix& Y, const ComplexMatrix& S_T, double Es,
                      const SolverConfig& cfg) {
  const Eigen::Index B = Y.rows();
  const Eigen::Index K = Y.cols();
  const Eigen::Index U = S_T.rows();
  const Eigen::Index T = S_T.cols();
  const Eigen::Index D = K - T;
  if (D < 1 || T < U || B < U) {
    throw DimensionError("run_maed: inconsistent dimensions");
  }
  if (cfg.t_max < 1 || !(cfg.tau0 > 0.0)) {
    throw NumericalError("run_maed: invalid solver configuration");
  }

  ComplexMatrix S(U, K);
  S.leftCols(T) = S_T;
  if (cfg.initial_data.has_value()) {
    if (cfg.initial_data->rows() != U || cfg.initial_data->cols() != D) {
      throw DimensionError("run_maed: initial_data must be U x D");
    }
    S.rightCols(D) = *cfg.initial_data;
  } else {
    S.rightCols(D).setZero();
  }

  SolverResult result;
  result.diag.objective.reserve(cfg.t_max + 1);
  result.diag.stepsize.reserve(cfg.t_max);

  const ComplexMatrix YhY = Y.adjoint() * Y;  // reused every iteration
  const double y_norm_sq = Y.squaredNorm();

  std::optional<ComplexVector> p_hat;
  ComplexVector u;  // Y^H p_hat, kept in sync with p_hat
  double u_norm_sq = 0.0;

  // With M = Y^H (I - p p^H) Y and W = (pinv S)^H = G^{-1} S:
  //   f    = tr(M) - Re tr(W M S^H),
  //   grad = (W M S^H) W - W M          (ascent direction; step is S - tau grad).
  // W M = W Y^H Y - (W u) u^H, so only the W Y^H Y part needs a fresh
  // matrix product when S changes.
  const auto fitted_term = [&](const ComplexMatrix& s_cur, const ComplexMatrix& w_cur,
                               const ComplexMatrix& wyy) -> double {
    ComplexMatrix t = wyy;
    if (p_hat.has_value()) {
      t.noalias() -= (w_cur * u) * u.adjoint();
    }
    return t.cwiseProduct(s_cur.conjugate()).sum().real();
  };
  const auto objective_at = [&](const ComplexMatrix& s_cur, const ComplexMatrix& w_cur,
                                const ComplexMatrix& wyy) -> double {
    return (y_norm_sq - u_norm_sq) - fitted_term(s_cur, w_cur, wyy);
  };

  ComplexMatrix W = row_gram_solve(S);
  ComplexMatrix WYY = W * YhY;

  // The gradient of the current objective at a given iterate; wyy = W YhY
  // must belong to the same iterate. The rank-1 projector correction uses
  // the *current* u, so the stepsize below always compares two gradients
  // of the same objective even though the projector moved in between.
  const auto gradient_at = [&](const ComplexMatrix& s_cur, const ComplexMatrix& w_cur,
                               const ComplexMatrix& wyy) -> ComplexMatrix {
    ComplexMatrix wm = wyy;
    if (p_hat.has_value()) {
      wm.noalias() -= (w_cur * u) * u.adjoint();
    }
    ComplexMatrix g = (wm * s_cur.adjoint()) * w_cur;
    g -= wm;
    return g;
  };
  const auto refresh_u = [&] {
    u.noalias() = Y.adjoint() * (*p_hat);
    u_norm_sq = u.squaredNorm();
  };

  // Warm-start the subspace estimate from the residual of the all-pilot
  // iterate. The first gradient step is taken at full tau0 and lands on the
  // constraint box; without this warm start, that step can absorb a strong
  // data-phase interferer into the symbol estimate before the direction is
  // ever measured, and the eigensolve after the step degenerates into a
  // lottery between the interferer and the self-inflicted fit error.
  if (cfg.project_enabled) {
    ComplexMatrix e0 = Y;
    e0.noalias() -= (Y * S.adjoint()) * W;
    if (e0.squaredNorm() > 1e-28 * std::max(y_norm_sq, 1.0)) {
      try {
        p_hat = dominant_eigenvector(e0 * e0.adjoint(), cfg.power_tol, cfg.power_max_iter);
      } catch (const PowerIterationError& slow) {
        p_hat = slow.best_iterate;
        result.diag.eigen_converged = false;
      }
      refresh_u();
    }
  }

  double tau = cfg.tau0;
  std::vector<double> recent_f;
  ComplexMatrix S_prev, W_prev, WYY_prev;
  for (int t = 0; t < cfg.t_max; ++t) {
    const double f_t = objective_at(S, W, WYY);
    ComplexMatrix grad = gradient_at(S, W, WYY);
    result.diag.objective.push_back(f_t);
    recent_f.push_back(f_t);
    if (recent_f.size() > static_cast<size_t>(kBacktrackWindow)) {
      recent_f.erase(recent_f.begin());
    }
    const double f_ref = *std::max_element(recent_f.begin(), recent_f.end());

    ComplexMatrix S_cand, W_cand, WYY_cand;
    if (t == 0) {
      // First step at tau0 as given; the feasibility projection bounds it.
      // A pilot-phase-only interferer hides inside the channel fit of the
      // initial iterate and only becomes measurable in the residual after
      // this step has committed the data block.
      S_cand = project_feasible(S - tau * grad, S_T, Es);
      W_cand = row_gram_solve(S_cand);
      WYY_cand.noalias() = W_cand * YhY;
    } else {
      const ComplexMatrix grad_prev = gradient_at(S_prev, W_prev, WYY_prev);
      tau = bb_stepsize(S_prev, S, grad_prev, grad, tau, t, cfg);

      // Backtracked proximal gradient step. The directional derivative
      // along dS is 2 Re<grad, dS>, hence the quadratic model below.
      for (int trial = 0; trial < kBacktrackMaxTrials; ++trial) {
        S_cand = project_feasible(S - tau * grad, S_T, Es);
        W_cand = row_gram_solve(S_cand);
        WYY_cand.noalias() = W_cand * YhY;
        const double f_cand = objective_at(S_cand, W_cand, WYY_cand);
        const ComplexMatrix ds = S_cand - S;
        const double model = f_ref + 2.0 * ds.cwiseProduct(grad.conjugate()).sum().real() +
                             ds.squaredNorm() / tau;
        if (f_cand <= model + 1e-9 * std::abs(f_ref) || tau <= 1e-15) {
          break;
        }
        tau *= 0.5;
      }
    }
    result.diag.stepsize.push_back(tau);

    S_prev = std::move(S);
    W_prev = std::move(W);
    WYY_prev = std::move(WYY);
    S = std::move(S_cand);
    W = std::move(W_cand);
    WYY = std::move(WYY_cand);

    if (cfg.project_enabled) {
      ComplexMatrix E = Y;
      E.noalias() -= (Y * S.adjoint()) * W;
      // A vanishing residual carries no direction; keep the previous
      // estimate (or none) rather than tracking noise.
      if (E.squaredNorm() <= 1e-28 * std::max(y_norm_sq, 1.0)) {
        ++result.diag.degenerate_subspace_updates;
      } else if (t == 0 || !p_hat.has_value()) {
        // Full eigensolve on the first post-step residual (replacing the
        // warm start); single power steps refine it afterwards.
        try {
          p_hat = dominant_eigenvector(E * E.adjoint(), cfg.power_tol, cfg.power_max_iter);
        } catch (const PowerIterationError& slow) {
          p_hat = slow.best_iterate;
          result.diag.eigen_converged = false;
        }
      } else {
        ComplexVector v = E * (E.adjoint() * (*p_hat));
        const double vn = v.norm();
        if (vn == 0.0) {
          ++result.diag.degenerate_subspace_updates;
        } else {
          *p_hat = v / vn;
        }
      }
      if (p_hat.has_value()) {
        refresh_u();
      }
    }
  }
  result.diag.objective.push_back(objective_at(S, W, WYY));

  result.S_D_soft = S.rightCols(D);
  HardDecision hd = hard_decision(result.S_D_soft, Es);
  result.S_D_hard = std::move(hd.symbols);
  result.bits = std::move(hd.bits);
  result.p_hat = std::move(p_hat);
  return result;
}

}  // namespace maed
