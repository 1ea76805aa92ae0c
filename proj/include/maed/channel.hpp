#pragma once

#include "maed/linalg.hpp"
#include "maed/rng.hpp"

#include <cstdint>

namespace maed {

using BitMatrix = Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class JammerKind {
  None,
  Barrage,             // active over the entire coherence block
  Pilot,               // active during the pilot phase only
  Data,                // active during the data phase only
  Sparse,              // active in a random fraction of single-slot bursts
  ImpersonateSingle,   // replays one UE's pilot row, silent in the data phase
  ImpersonateAverage,  // replays the average of several pilot rows
};

enum class JammerConstellation { Gaussian, Qpsk };

// How strength_db is interpreted: total receive energy over the block
// relative to the average UE (rho_E), or receive power during the jammer's
// active phase (rho_P). rho_P = rho_E / duty_cycle.
enum class StrengthMode { TotalEnergy, ActivePower };

struct JammerProfile {
  JammerKind kind = JammerKind::None;
  JammerConstellation constellation = JammerConstellation::Gaussian;
  double strength_db = 0.0;
  StrengthMode strength_mode = StrengthMode::TotalEnergy;
  double sparse_duty = 0.2;  // alpha, Sparse only
  int target_ue = 0;         // ImpersonateSingle
  int target_count = 1;      // ImpersonateAverage
};

struct SystemConfig {
  int B = 128;  // basestation antennas
  int U = 32;   // single-antenna UEs
  int T = 32;   // pilot slots (power of two)
  int D = 64;   // payload slots
  double Es = 1.0;
  double snr_db = 0.0;  // +infinity means noiseless
  JammerProfile jammer;
  uint64_t rng_seed = 0;

  int k() const { return T + D; }  // coherence block length
  void validate() const;           // throws on inconsistent parameters
};

struct FrameTruth {
  ComplexMatrix H;    // B x U uplink channel
  ComplexVector hj;   // B jammer channel
  ComplexMatrix S_T;  // U x T pilots
  ComplexMatrix S_D;  // U x D payload symbols
  BitMatrix bits;     // U x 2D payload bits (re, im interleaved per symbol)
  ComplexVector w;    // K jammer symbols, exact zeros where inactive
  double N0 = 0.0;    // noise variance actually applied
};

struct ReceivedFrame {
  ComplexMatrix Y;  // B x K
  FrameTruth truth;
};

/// First U rows of the T x T Sylvester Hadamard matrix, entries +-sqrt(Es).
/// Rows are mutually orthogonal with Gram T * Es * I.
ComplexMatrix hadamard_pilots(int U, int T, double Es);

/// i.i.d. CN(0, 1) entries (Rayleigh-fading coefficients).
ComplexMatrix draw_rayleigh_channel(Rng& rng, int rows, int cols);

struct QpskPayload {
  BitMatrix bits;        // U x 2D
  ComplexMatrix symbols; // U x D
};

/// Uniform bits Gray-mapped onto QPSK with symbol energy Es:
/// (b_re, b_im) -> sqrt(Es/2) * ((1 - 2 b_re) + i (1 - 2 b_im)).
QpskPayload draw_qpsk_payload(Rng& rng, int U, int D, double Es);

/// N0 = U * Es / snr_linear, from E||HS||_F^2 = B K U Es and
/// E||N||_F^2 = B K N0 with unit-variance channel entries.
double noise_variance_from_snr(const SystemConfig& cfg);

/// Fraction of the coherence block the jammer is active: 1, T/K, D/K or
/// alpha for barrage, pilot, data and sparse jammers; T/K for the
/// impersonation kinds (pilot phase only). Zero for JammerKind::None.
double jammer_duty_cycle(const JammerProfile& profile, const SystemConfig& cfg);

/// Per-slot jammer symbols over the whole block; inactive slots are exact
/// zeros. Active-slot symbol energy Ej follows the strength mode:
/// ActivePower -> Ej = rho * Es, TotalEnergy -> Ej = rho * Es / duty.
ComplexVector jammer_transmit(const JammerProfile& profile, const SystemConfig& cfg,
                              const ComplexMatrix& S_T, Rng& rng);

/// Y = H S + hj w^T + N. Draw order is fixed (H, hj, payload, jammer, noise)
/// so a seed pins the frame bit-exactly; kinds that draw no jammer symbols
/// (None, impersonation) leave the other draws untouched.
ReceivedFrame synthesize_frame(const SystemConfig& cfg, Rng& rng);

/// Jammerless twin: same H, S and noise realization with the jammer term
/// removed from Y and w zeroed.
ReceivedFrame strip_jammer(const ReceivedFrame& frame);

}  // namespace maed
