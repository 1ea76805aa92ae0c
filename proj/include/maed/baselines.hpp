#pragma once

#include "maed/channel.hpp"
#include "maed/linalg.hpp"
#include "maed/solver.hpp"

namespace maed {

struct DetectorOutput {
  ComplexMatrix S_D_hard;
  BitMatrix bits;
  ComplexMatrix S_D_soft;
  ComplexMatrix H_hat;  // empty when the detector forms no explicit estimate
};

/// Least-squares channel estimate from the pilot block:
/// H_hat = Y_T * pinv(S_T).
ComplexMatrix ls_channel_estimate(const ComplexMatrix& Y_T, const ComplexMatrix& S_T);

/// Linear MMSE equalizer with per-stream regularization N0/Es, followed by
/// hard decisions: S_hat = (H^H H + (N0/Es) I)^{-1} H^H Y_D.
DetectorOutput lmmse_detect(const ComplexMatrix& H_hat, const ComplexMatrix& Y_D, double N0,
                            double Es);

/// Jammer-oblivious reference: LS channel estimation on the pilot block,
/// LMMSE detection on the data block.
DetectorOutput detect_lmmse_baseline(const ReceivedFrame& frame, const SystemConfig& cfg);

/// Genie-aided reference: projects the receive matrix onto the orthogonal
/// complement of the true jammer channel before LS + LMMSE.
DetectorOutput detect_genie_pos(const ReceivedFrame& frame, const SystemConfig& cfg);

/// Upper bound: joint estimation/detection without the subspace projection,
/// run on a jammerless frame.
DetectorOutput detect_jl_jed(const ReceivedFrame& frame_jammerless, const SystemConfig& cfg,
                             const SolverConfig& solver_cfg);

}  // namespace maed
