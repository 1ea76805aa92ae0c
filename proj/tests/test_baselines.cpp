#include "maed/baselines.hpp"

#include "doctest.h"

#include <cmath>

using namespace maed;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ComplexMatrix random_matrix(Rng& rng, int rows, int cols) {
  ComplexMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      m(r, c) = rng.complex_gaussian();
    }
  }
  return m;
}

// Gauss-Jordan inverse, intentionally independent of the Cholesky path.
ComplexMatrix gauss_jordan_inverse(ComplexMatrix a) {
  const Eigen::Index n = a.rows();
  ComplexMatrix inv = ComplexMatrix::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) {
        pivot = r;
      }
    }
    a.row(col).swap(a.row(pivot));
    inv.row(col).swap(inv.row(pivot));
    const Complex d = a(col, col);
    a.row(col) /= d;
    inv.row(col) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r != col) {
        const Complex factor = a(r, col);
        a.row(r) -= factor * a.row(col);
        inv.row(r) -= factor * inv.row(col);
      }
    }
  }
  return inv;
}

long long count_bit_errors(const BitMatrix& got, const BitMatrix& want) {
  long long errors = 0;
  for (Eigen::Index c = 0; c < want.cols(); ++c) {
    for (Eigen::Index r = 0; r < want.rows(); ++r) {
      errors += got(r, c) != want(r, c);
    }
  }
  return errors;
}

SystemConfig small_config() {
  SystemConfig cfg;
  cfg.B = 16;
  cfg.U = 4;
  cfg.T = 8;
  cfg.D = 16;
  return cfg;
}

double baseline_ber(SystemConfig cfg, JammerKind kind, double snr_db, int frames, uint64_t seed,
                    DetectorOutput (*detector)(const ReceivedFrame&, const SystemConfig&)) {
  cfg.jammer.kind = kind;
  cfg.snr_db = snr_db;
  long long errors = 0;
  for (int f = 0; f < frames; ++f) {
    Rng rng(derive_seed(seed, 0, f));
    const ReceivedFrame frame = synthesize_frame(cfg, rng);
    errors += count_bit_errors(detector(frame, cfg).bits, frame.truth.bits);
  }
  return static_cast<double>(errors) / (static_cast<double>(frames) * cfg.U * 2 * cfg.D);
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("ls_channel_estimate: exact inversion, noise gain, jammer bias") {
  SystemConfig cfg = small_config();
  const ComplexMatrix pilots = hadamard_pilots(cfg.U, cfg.T, cfg.Es);
  Rng rng(400);

  const ComplexMatrix h = random_matrix(rng, cfg.B, cfg.U);
  const ComplexMatrix h_hat = ls_channel_estimate(h * pilots, pilots);
  CHECK((h_hat - h).norm() <= 1e-9 * h.norm());

  // Noise-only input: E||H_hat||_F^2 = B U N0 / (T Es).
  const double n0 = 0.5;
  double acc = 0.0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const ComplexMatrix noise = std::sqrt(n0) * random_matrix(rng, cfg.B, cfg.T);
    acc += ls_channel_estimate(noise, pilots).squaredNorm();
  }
  const double expected = cfg.B * cfg.U * n0 / (cfg.T * cfg.Es);
  CHECK(acc / trials == doctest::Approx(expected).epsilon(0.05));

  // Pilot jammer shifts the estimate by hj w_T^T S_T^H / (T Es), exactly.
  const ComplexVector hj = random_matrix(rng, cfg.B, 1);
  ComplexVector w_t(cfg.T);
  for (int t = 0; t < cfg.T; ++t) w_t(t) = rng.complex_gaussian();
  const ComplexMatrix y_t = h * pilots + hj * w_t.transpose();
  const ComplexMatrix biased = ls_channel_estimate(y_t, pilots);
  const ComplexMatrix bias = hj * (w_t.transpose() * pilots.adjoint()) / (cfg.T * cfg.Es);
  CHECK((biased - (h + bias)).norm() <= 1e-9 * h.norm());
}

TEST_CASE("lmmse_detect: zero-forcing limit, Wiener shrinkage, algebraic oracle") {
  Rng rng(401);
  const int u = 4;
  const ComplexMatrix h = random_matrix(rng, u, u);  // square invertible
  const QpskPayload payload = draw_qpsk_payload(rng, u, 12, 1.0);
  const ComplexMatrix y = h * payload.symbols;
  const DetectorOutput zf = lmmse_detect(h, y, 0.0, 1.0);
  CHECK(zf.bits == payload.bits);
  CHECK((zf.S_D_soft - payload.symbols).norm() <= 1e-8 * payload.symbols.norm());

  // Identity channel: per-entry Wiener shrinkage 1 / (1 + N0).
  const double n0 = 0.7;
  const ComplexMatrix eye = ComplexMatrix::Identity(u, u);
  const ComplexMatrix y2 = random_matrix(rng, u, 6);
  const DetectorOutput wiener = lmmse_detect(eye, y2, n0, 1.0);
  CHECK((wiener.S_D_soft - y2 / (1.0 + n0)).norm() <= 1e-12 * y2.norm());

  // 8x4 system against an independently coded normal-equations solution.
  const ComplexMatrix h84 = random_matrix(rng, 8, 4);
  const ComplexMatrix y84 = random_matrix(rng, 8, 5);
  const double es = 2.0, n084 = 0.3;
  const DetectorOutput out = lmmse_detect(h84, y84, n084, es);
  const ComplexMatrix gram = h84.adjoint() * h84 + (n084 / es) * ComplexMatrix::Identity(4, 4);
  const ComplexMatrix oracle = gauss_jordan_inverse(gram) * (h84.adjoint() * y84);
  CHECK((out.S_D_soft - oracle).norm() <= 1e-10 * oracle.norm());
}

TEST_CASE("detect_lmmse_baseline: clean-channel sanity and exact zero-noise recovery") {
  SystemConfig cfg = small_config();

  // Zero noise, zero jammer: exact recovery.
  cfg.snr_db = kInf;
  Rng rng(402);
  const ReceivedFrame frame = synthesize_frame(cfg, rng);
  const DetectorOutput out = detect_lmmse_baseline(frame, cfg);
  CHECK(out.bits == frame.truth.bits);

  // Full-scale jammerless at 40 dB: essentially error-free.
  SystemConfig full;
  const double ber = baseline_ber(full, JammerKind::None, 40.0, 100, 403, detect_lmmse_baseline);
  CHECK(ber <= 1e-4);
}

TEST_CASE("detect_lmmse_baseline vs detect_genie_pos under a strong jammer") {
  SystemConfig full;
  full.jammer.strength_db = 25.0;
  full.jammer.strength_mode = StrengthMode::TotalEnergy;
  const double lmmse = baseline_ber(full, JammerKind::Barrage, 10.0, 200, 404, detect_lmmse_baseline);
  const double genie = baseline_ber(full, JammerKind::Barrage, 10.0, 200, 404, detect_genie_pos);
  CHECK(lmmse >= 10.0 * genie);
}

TEST_CASE("detect_genie_pos: exact jammer nulling and jammer-type independence") {
  SystemConfig cfg = small_config();
  cfg.jammer.kind = JammerKind::Sparse;
  cfg.jammer.strength_db = 30.0;
  cfg.snr_db = kInf;
  Rng rng(405);
  const ReceivedFrame frame = synthesize_frame(cfg, rng);
  const ComplexMatrix jam = frame.truth.hj * frame.truth.w.transpose();
  CHECK(apply_orth_complement(frame.truth.hj, jam).norm() <= 1e-10 * jam.norm());
  // Noiseless: nulling the jammer restores exact detection.
  CHECK(detect_genie_pos(frame, cfg).bits == frame.truth.bits);

  // BER is statistically identical across jammer types (2 sigma).
  SystemConfig full;
  full.jammer.strength_db = 25.0;
  const int frames = 150;
  const double bits = static_cast<double>(frames) * full.U * 2 * full.D;
  std::vector<double> bers;
  for (JammerKind kind :
       {JammerKind::Barrage, JammerKind::Pilot, JammerKind::Data, JammerKind::Sparse}) {
    bers.push_back(baseline_ber(full, kind, 4.0, frames, 406, detect_genie_pos));
  }
  for (size_t i = 1; i < bers.size(); ++i) {
    const double sigma = std::sqrt((bers[0] * (1 - bers[0]) + bers[i] * (1 - bers[i])) / bits);
    CHECK(std::abs(bers[i] - bers[0]) <= 2.0 * sigma);
  }
}

TEST_CASE("detect_genie_pos: jammerless cost of one projected dimension is negligible") {
  // Projecting out one of 128 dimensions costs a sliver of receive SNR;
  // on common random frames the gap is systematic but must stay small.
  SystemConfig full;
  const int frames = 150;
  const double bits = static_cast<double>(frames) * full.U * 2 * full.D;
  const double genie = baseline_ber(full, JammerKind::None, 4.0, frames, 407, detect_genie_pos);
  const double lmmse = baseline_ber(full, JammerKind::None, 4.0, frames, 407, detect_lmmse_baseline);
  const double sigma = std::sqrt((genie * (1 - genie) + lmmse * (1 - lmmse)) / bits);
  CHECK(std::abs(genie - lmmse) <= 0.05 * lmmse + 2.0 * sigma);
}

TEST_CASE("detect_jl_jed: definitional equivalence and exact zero-noise recovery") {
  SystemConfig cfg = small_config();
  cfg.snr_db = 6.0;
  Rng rng(408);
  const ReceivedFrame frame = synthesize_frame(cfg, rng);
  SolverConfig solver;
  const DetectorOutput out = detect_jl_jed(frame, cfg, solver);
  SolverConfig off = solver;
  off.project_enabled = false;
  const SolverResult direct = run_maed(frame.Y, frame.truth.S_T, cfg.Es, off);
  CHECK(out.bits == direct.bits);
  CHECK((out.S_D_soft - direct.S_D_soft).norm() == 0.0);

  cfg.snr_db = kInf;
  Rng rng2(409);
  const ReceivedFrame clean = synthesize_frame(cfg, rng2);
  SolverConfig deep;
  deep.t_max = 60;
  CHECK(detect_jl_jed(clean, cfg, deep).bits == clean.truth.bits);
}

}  // TEST_SUITE
