#include "maed/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace maed {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

namespace {

void validate_profile(const JammerProfile& profile, const SystemConfig& cfg) {
  switch (profile.kind) {
    case JammerKind::Sparse:
      if (!(profile.sparse_duty > 0.0 && profile.sparse_duty <= 1.0)) {
        throw NumericalError("JammerProfile: sparse_duty must lie in (0, 1]");
      }
      if (std::llround(profile.sparse_duty * cfg.k()) < 1) {
        throw NumericalError("JammerProfile: sparse_duty too small, no active slot");
      }
      break;
    case JammerKind::ImpersonateSingle:
      if (profile.target_ue < 0 || profile.target_ue >= cfg.U) {
        throw DimensionError("JammerProfile: target_ue out of range");
      }
      break;
    case JammerKind::ImpersonateAverage:
      if (profile.target_count < 1 || profile.target_count > cfg.U) {
        throw DimensionError("JammerProfile: target_count out of range");
      }
      break;
    default:
      break;
  }
}

}  // namespace

void SystemConfig::validate() const {
  if (B < 1 || U < 1 || B < U) {
    throw DimensionError("SystemConfig: need B >= U >= 1");
  }
  if (T < U) {
    throw DimensionError("SystemConfig: need T >= U for full-rank pilots");
  }
  if (!is_power_of_two(T)) {
    throw DimensionError("SystemConfig: T must be a power of two (Hadamard pilots)");
  }
  if (D < 1) {
    throw DimensionError("SystemConfig: need D >= 1");
  }
  if (!(Es > 0.0)) {
    throw NumericalError("SystemConfig: Es must be positive");
  }
  validate_profile(jammer, *this);
}

ComplexMatrix hadamard_pilots(int U, int T, double Es) {
  if (!is_power_of_two(T)) {
    throw DimensionError("hadamard_pilots: T must be a power of two");
  }
  if (U < 1 || U > T) {
    throw DimensionError("hadamard_pilots: need 1 <= U <= T");
  }
  // Sylvester recursion on sign patterns, then scale to symbol energy.
  Eigen::MatrixXd h(1, 1);
  h(0, 0) = 1.0;
  for (int n = 1; n < T; n *= 2) {
    Eigen::MatrixXd next(2 * n, 2 * n);
    next.topLeftCorner(n, n) = h;
    next.topRightCorner(n, n) = h;
    next.bottomLeftCorner(n, n) = h;
    next.bottomRightCorner(n, n) = -h;
    h = std::move(next);
  }
  return (std::sqrt(Es) * h.topRows(U)).cast<Complex>();
}

ComplexMatrix draw_rayleigh_channel(Rng& rng, int rows, int cols) {
  ComplexMatrix m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      m(r, c) = rng.complex_gaussian();
    }
  }
  return m;
}

QpskPayload draw_qpsk_payload(Rng& rng, int U, int D, double Es) {
  QpskPayload out;
  out.bits = BitMatrix(U, 2 * D);
  out.symbols = ComplexMatrix(U, D);
  const double amp = std::sqrt(Es / 2.0);
  for (int d = 0; d < D; ++d) {
    for (int u = 0; u < U; ++u) {
      const uint8_t b_re = rng.bit() ? 1 : 0;
      const uint8_t b_im = rng.bit() ? 1 : 0;
      out.bits(u, 2 * d) = b_re;
      out.bits(u, 2 * d + 1) = b_im;
      out.symbols(u, d) = Complex(amp * (1.0 - 2.0 * b_re), amp * (1.0 - 2.0 * b_im));
    }
  }
  return out;
}

double noise_variance_from_snr(const SystemConfig& cfg) {
  const double snr_linear = db_to_linear(cfg.snr_db);
  return cfg.U * cfg.Es / snr_linear;  // +inf SNR yields exactly 0
}

double jammer_duty_cycle(const JammerProfile& profile, const SystemConfig& cfg) {
  const double K = cfg.k();
  switch (profile.kind) {
    case JammerKind::None:
      return 0.0;
    case JammerKind::Barrage:
      return 1.0;
    case JammerKind::Pilot:
    case JammerKind::ImpersonateSingle:
    case JammerKind::ImpersonateAverage:
      return cfg.T / K;
    case JammerKind::Data:
      return cfg.D / K;
    case JammerKind::Sparse:
      return profile.sparse_duty;
  }
  return 0.0;
}

namespace {

// Active-slot symbol energy implied by the profile's strength setting.
double active_symbol_energy(const JammerProfile& profile, const SystemConfig& cfg) {
  const double rho = db_to_linear(profile.strength_db);
  if (profile.strength_mode == StrengthMode::ActivePower) {
    return rho * cfg.Es;
  }
  return rho * cfg.Es / jammer_duty_cycle(profile, cfg);
}

void fill_active_symbols(const JammerProfile& profile, double Ej, Rng& rng,
                         ComplexVector& w, const std::vector<int>& slots) {
  if (profile.constellation == JammerConstellation::Gaussian) {
    const double scale = std::sqrt(Ej);
    for (int s : slots) {
      w(s) = scale * rng.complex_gaussian();
    }
  } else {
    const double amp = std::sqrt(Ej / 2.0);
    for (int s : slots) {
      const double re = rng.bit() ? -amp : amp;
      const double im = rng.bit() ? -amp : amp;
      w(s) = Complex(re, im);
    }
  }
}

}  // namespace

ComplexVector jammer_transmit(const JammerProfile& profile, const SystemConfig& cfg,
                              const ComplexMatrix& S_T, Rng& rng) {
  validate_profile(profile, cfg);
  const int K = cfg.k();
  ComplexVector w = ComplexVector::Zero(K);
  if (profile.kind == JammerKind::None) {
    return w;
  }
  const double Ej = active_symbol_energy(profile, cfg);

  std::vector<int> slots;
  switch (profile.kind) {
    case JammerKind::Barrage:
      slots.resize(K);
      std::iota(slots.begin(), slots.end(), 0);
      break;
    case JammerKind::Pilot:
      slots.resize(cfg.T);
      std::iota(slots.begin(), slots.end(), 0);
      break;
    case JammerKind::Data:
      slots.resize(cfg.D);
      std::iota(slots.begin(), slots.end(), cfg.T);
      break;
    case JammerKind::Sparse: {
      // Exactly round(alpha K) distinct slots, redrawn per frame.
      const int m = static_cast<int>(std::llround(profile.sparse_duty * K));
      std::vector<int> idx(K);
      std::iota(idx.begin(), idx.end(), 0);
      for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(rng.below(K - i));
        std::swap(idx[i], idx[j]);
      }
      slots.assign(idx.begin(), idx.begin() + m);
      break;
    }
    case JammerKind::ImpersonateSingle: {
      // Replay the target UE's pilot row (no conjugation) at active power Ej.
      const double scale = std::sqrt(Ej / cfg.Es);
      for (int t = 0; t < cfg.T; ++t) {
        w(t) = scale * S_T(profile.target_ue, t);
      }
      return w;
    }
    case JammerKind::ImpersonateAverage: {
      // Average of the first target_count pilot rows, rescaled so the mean
      // active-slot power is Ej.
      ComplexVector avg = ComplexVector::Zero(cfg.T);
      for (int u = 0; u < profile.target_count; ++u) {
        avg += S_T.row(u).transpose();
      }
      avg /= static_cast<double>(profile.target_count);
      const double norm = avg.norm();  // > 0 for orthogonal pilot rows
      const double scale = std::sqrt(Ej * cfg.T) / norm;
      w.head(cfg.T) = scale * avg;
      return w;
    }
    case JammerKind::None:
      return w;
  }

  fill_active_symbols(profile, Ej, rng, w, slots);
  return w;
}

ReceivedFrame synthesize_frame(const SystemConfig& cfg, Rng& rng) {
  cfg.validate();
  const int K = cfg.k();

  ReceivedFrame frame;
  FrameTruth& truth = frame.truth;
  truth.H = draw_rayleigh_channel(rng, cfg.B, cfg.U);
  truth.hj = draw_rayleigh_channel(rng, cfg.B, 1);
  truth.S_T = hadamard_pilots(cfg.U, cfg.T, cfg.Es);
  QpskPayload payload = draw_qpsk_payload(rng, cfg.U, cfg.D, cfg.Es);
  truth.bits = std::move(payload.bits);
  truth.S_D = std::move(payload.symbols);
  truth.w = jammer_transmit(cfg.jammer, cfg, truth.S_T, rng);
  truth.N0 = noise_variance_from_snr(cfg);

  ComplexMatrix S(cfg.U, K);
  S.leftCols(cfg.T) = truth.S_T;
  S.rightCols(cfg.D) = truth.S_D;

  frame.Y.noalias() = truth.H * S;
  frame.Y.noalias() += truth.hj * truth.w.transpose();
  if (truth.N0 > 0.0) {
    const double scale = std::sqrt(truth.N0);
    for (int c = 0; c < K; ++c) {
      for (int r = 0; r < cfg.B; ++r) {
        frame.Y(r, c) += scale * rng.complex_gaussian();
      }
    }
  }
  return frame;
}

ReceivedFrame strip_jammer(const ReceivedFrame& frame) {
  ReceivedFrame twin = frame;
  twin.Y.noalias() -= frame.truth.hj * frame.truth.w.transpose();
  twin.truth.w.setZero();
  return twin;
}

}  // namespace maed
