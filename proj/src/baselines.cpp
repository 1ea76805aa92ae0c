#include "maed/baselines.hpp"

#include <Eigen/Cholesky>

namespace maed {

ComplexMatrix ls_channel_estimate(const ComplexMatrix& Y_T, const ComplexMatrix& S_T) {
  if (Y_T.cols() != S_T.cols()) {
    throw DimensionError("ls_channel_estimate: pilot column counts disagree");
  }
  return Y_T * right_pseudo_inverse(S_T);
}

DetectorOutput lmmse_detect(const ComplexMatrix& H_hat, const ComplexMatrix& Y_D, double N0,
                            double Es) {
  if (H_hat.rows() != Y_D.rows()) {
    throw DimensionError("lmmse_detect: channel and receive matrix row counts disagree");
  }
  const Eigen::Index U = H_hat.cols();
  ComplexMatrix gram = H_hat.adjoint() * H_hat;
  gram += (N0 / Es) * ComplexMatrix::Identity(U, U);
  Eigen::LLT<ComplexMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("lmmse_detect: regularized Gram matrix not positive definite");
  }
  DetectorOutput out;
  out.S_D_soft = llt.solve(H_hat.adjoint() * Y_D);
  if (!out.S_D_soft.allFinite()) {
    throw NumericalError("lmmse_detect: non-finite solution");
  }
  HardDecision hd = hard_decision(out.S_D_soft, Es);
  out.S_D_hard = std::move(hd.symbols);
  out.bits = std::move(hd.bits);
  return out;
}

DetectorOutput detect_lmmse_baseline(const ReceivedFrame& frame, const SystemConfig& cfg) {
  const auto Y_T = frame.Y.leftCols(cfg.T);
  const auto Y_D = frame.Y.rightCols(cfg.D);
  ComplexMatrix h_hat = ls_channel_estimate(Y_T, frame.truth.S_T);
  DetectorOutput out = lmmse_detect(h_hat, Y_D, frame.truth.N0, cfg.Es);
  out.H_hat = std::move(h_hat);
  return out;
}

DetectorOutput detect_genie_pos(const ReceivedFrame& frame, const SystemConfig& cfg) {
  // Null the jammer with its ground-truth channel direction, then proceed
  // exactly as the plain baseline in the projected space.
  const ComplexMatrix py = apply_orth_complement(frame.truth.hj, frame.Y);
  ComplexMatrix h_hat = ls_channel_estimate(py.leftCols(cfg.T), frame.truth.S_T);
  DetectorOutput out = lmmse_detect(h_hat, py.rightCols(cfg.D), frame.truth.N0, cfg.Es);
  out.H_hat = std::move(h_hat);
  return out;
}

DetectorOutput detect_jl_jed(const ReceivedFrame& frame_jammerless, const SystemConfig& cfg,
                             const SolverConfig& solver_cfg) {
  SolverConfig jed_cfg = solver_cfg;
  jed_cfg.project_enabled = false;
  SolverResult r = run_maed(frame_jammerless.Y, frame_jammerless.truth.S_T, cfg.Es, jed_cfg);
  DetectorOutput out;
  out.S_D_soft = std::move(r.S_D_soft);
  out.S_D_hard = std::move(r.S_D_hard);
  out.bits = std::move(r.bits);
  return out;
}

}  // namespace maed
