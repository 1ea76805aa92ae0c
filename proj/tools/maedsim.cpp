// Command-line driver: Monte-Carlo BER sweeps, figure presets and a quick
// property self-test for the jammer-mitigating MU-MIMO detection library.

#include "CLI11.hpp"

#include "maed/baselines.hpp"
#include "maed/harness.hpp"
#include "maed/solver.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace {

using namespace maed;

ExperimentSpec default_spec() {
  ExperimentSpec spec;
  spec.snr_grid_db = {-10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10};
  spec.detectors = {DetectorKind::Lmmse, DetectorKind::GeniePos, DetectorKind::Maed,
                    DetectorKind::JlJed};
  spec.frames_per_point = 1000;
  spec.master_seed = 1;
  return spec;
}

std::vector<double> snr_range(double lo, double hi, double step) {
  std::vector<double> grid;
  for (double s = lo; s <= hi + 1e-9; s += step) {
    grid.push_back(s);
  }
  return grid;
}

void relabel(std::vector<BerRecord>& records, const std::string& from, const std::string& to) {
  for (auto& r : records) {
    if (r.detector == from) {
      r.detector = to;
    }
  }
}

std::vector<BerRecord> run_figure(const std::string& name, int frames, uint64_t seed) {
  ExperimentSpec spec = default_spec();
  spec.frames_per_point = frames;
  spec.master_seed = seed;

  const JammerKind strong_kinds[] = {JammerKind::Barrage, JammerKind::Pilot, JammerKind::Data,
                                     JammerKind::Sparse};
  auto strong = [&](JammerKind kind) {
    spec.base.jammer.kind = kind;
    spec.base.jammer.constellation = JammerConstellation::Gaussian;
    spec.base.jammer.strength_db = 25.0;
    spec.base.jammer.strength_mode = StrengthMode::TotalEnergy;
    spec.base.jammer.sparse_duty = 0.2;
    return run_experiment(spec);
  };
  auto weak = [&](JammerKind kind) {
    spec.base.jammer.kind = kind;
    spec.base.jammer.constellation = JammerConstellation::Qpsk;
    spec.base.jammer.strength_db = 0.0;
    spec.base.jammer.strength_mode = StrengthMode::ActivePower;
    spec.base.jammer.sparse_duty = 0.2;
    return run_experiment(spec);
  };

  if (name == "fig2a") return strong(strong_kinds[0]);
  if (name == "fig2b") return strong(strong_kinds[1]);
  if (name == "fig2c") return strong(strong_kinds[2]);
  if (name == "fig2d") return strong(strong_kinds[3]);
  if (name == "fig3a") return weak(strong_kinds[0]);
  if (name == "fig3b") return weak(strong_kinds[1]);
  if (name == "fig3c") return weak(strong_kinds[2]);
  if (name == "fig3d") return weak(strong_kinds[3]);

  if (name == "fig4a") {
    spec.snr_grid_db = snr_range(-10, 20, 2);
    return run_experiment(spec);
  }
  if (name == "fig4b") {
    // Convergence study: detection depth sweep, with and without a strong
    // barrage jammer; the jammerless upper bound for reference.
    spec.snr_grid_db = snr_range(-10, 20, 2);
    std::vector<BerRecord> all;
    for (int t_max : {10, 30, 100}) {
      spec.solver.t_max = t_max;
      spec.detectors = {DetectorKind::Maed};
      spec.base.jammer.kind = JammerKind::None;
      auto jl = run_experiment(spec);
      relabel(jl, "maed", "maed_t" + std::to_string(t_max) + "_jl");
      all.insert(all.end(), jl.begin(), jl.end());

      spec.base.jammer.kind = JammerKind::Barrage;
      spec.base.jammer.constellation = JammerConstellation::Gaussian;
      spec.base.jammer.strength_db = 25.0;
      spec.base.jammer.strength_mode = StrengthMode::TotalEnergy;
      auto jammed = run_experiment(spec);
      relabel(jammed, "maed", "maed_t" + std::to_string(t_max) + "_j25");
      all.insert(all.end(), jammed.begin(), jammed.end());
    }
    spec.solver.t_max = 30;
    spec.detectors = {DetectorKind::JlJed};
    spec.base.jammer.kind = JammerKind::None;
    auto bound = run_experiment(spec);
    all.insert(all.end(), bound.begin(), bound.end());
    return all;
  }

  if (name == "fig5a") {
    spec.snr_grid_db = snr_range(-10, 14, 2);
    spec.base.jammer.kind = JammerKind::ImpersonateSingle;
    spec.base.jammer.target_ue = 0;
    spec.base.jammer.strength_db = 25.0;
    spec.base.jammer.strength_mode = StrengthMode::ActivePower;
    spec.per_ue_report = true;
    return run_experiment(spec);
  }
  if (name == "fig5b") {
    spec.snr_grid_db = snr_range(-10, 14, 2);
    spec.base.jammer.kind = JammerKind::ImpersonateAverage;
    spec.base.jammer.strength_db = 25.0;
    spec.base.jammer.strength_mode = StrengthMode::ActivePower;
    std::vector<BerRecord> all;
    spec.detectors = {DetectorKind::Maed};
    for (int count : {2, 4, 8}) {
      spec.base.jammer.target_count = count;
      auto rows = run_experiment(spec);
      relabel(rows, "maed", "maed_m" + std::to_string(count));
      all.insert(all.end(), rows.begin(), rows.end());
    }
    spec.detectors = {DetectorKind::JlJed};
    auto bound = run_experiment(spec);
    all.insert(all.end(), bound.begin(), bound.end());
    return all;
  }

  throw CLI::ValidationError("figure", "unknown preset '" + name + "' (fig2a..fig5b)");
}

ComplexMatrix selftest_random(Rng& rng, int rows, int cols) {
  ComplexMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      m(r, c) = rng.complex_gaussian();
    }
  }
  return m;
}

int run_selftest() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    failures += ok ? 0 : 1;
  };

  {
    Rng rng(1);
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const ComplexMatrix s = selftest_random(rng, 4, 10);
      const ComplexMatrix p = right_pseudo_inverse(s);
      ok = ok && (s * p * s - s).norm() <= 1e-9 * s.norm();
      ok = ok && (p * s * p - p).norm() <= 1e-9 * p.norm();
      ok = ok && ((s * p) - (s * p).adjoint()).norm() <= 1e-9;
      ok = ok && ((p * s) - (p * s).adjoint()).norm() <= 1e-9 * (p * s).norm();
    }
    report("pseudo-inverse identities", ok);
  }
  {
    Rng rng(2);
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const ComplexVector v = selftest_random(rng, 12, 1);
      const ComplexMatrix p = orth_complement_projector(v);
      ok = ok && (p * p - p).norm() <= 1e-12 * 12;
      ok = ok && (p - p.adjoint()).norm() <= 1e-12 * 12;
      ok = ok && (p * v).norm() <= 1e-12 * v.norm();
    }
    report("orthogonal-complement projector invariants", ok);
  }
  {
    Rng rng(3);
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const ComplexMatrix y = selftest_random(rng, 8, 12);
      ComplexMatrix s(4, 12);
      s.leftCols(4) = hadamard_pilots(4, 4, 2.0);
      s.rightCols(8) = 0.5 * selftest_random(rng, 4, 8);
      const ComplexVector dir = selftest_random(rng, 8, 1);
      const ComplexMatrix p = orth_complement_projector(dir);
      const ComplexMatrix g = residual_gradient(p, y, s);
      ComplexMatrix delta = ComplexMatrix::Zero(4, 12);
      delta.rightCols(8) = selftest_random(rng, 4, 8);
      delta /= delta.norm();
      const double eps = 1e-5;
      const double fd = (residual_objective(p, y, s + eps * delta) -
                         residual_objective(p, y, s - eps * delta)) /
                        (2 * eps);
      const double model = -2.0 * g.cwiseProduct(delta.conjugate()).sum().real();
      ok = ok && std::abs(fd - model) <= 1e-4 * std::max(std::abs(fd), 1e-9);
    }
    report("objective gradient vs finite differences", ok);
  }
  {
    // Interference-direction identifiability on noiseless strong-jammer
    // frames at full scale.
    SystemConfig cfg;
    cfg.snr_db = std::numeric_limits<double>::infinity();
    cfg.jammer.kind = JammerKind::Barrage;
    cfg.jammer.strength_db = 25.0;
    SolverConfig solver;
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      Rng rng(derive_seed(4, 0, trial));
      const ReceivedFrame frame = synthesize_frame(cfg, rng);
      const SolverResult r = run_maed(frame.Y, frame.truth.S_T, cfg.Es, solver);
      ok = ok && r.p_hat.has_value() &&
           std::abs(r.p_hat->dot(frame.truth.hj / frame.truth.hj.norm())) >= 0.99;
    }
    report("subspace identifiability at 25 dB", ok);
  }
  {
    ExperimentSpec spec;
    spec.base.B = 16;
    spec.base.U = 4;
    spec.base.T = 8;
    spec.base.D = 16;
    spec.snr_grid_db = {0.0, 6.0};
    spec.detectors = {DetectorKind::Lmmse, DetectorKind::Maed};
    spec.frames_per_point = 10;
    spec.master_seed = 5;
    spec.solver.t_max = 10;
    const std::string a = to_csv(run_experiment(spec), false);
    const std::string b = to_csv(run_experiment(spec), false);
    report("seeded experiment determinism", a == b);
  }
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"massive MU-MIMO uplink simulator: joint jammer mitigation, channel estimation "
               "and data detection, with LMMSE / genie-projection / jammerless-bound baselines"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "run a Monte-Carlo BER sweep");
  std::string config_path, out_path;
  std::string snr_list, jammer, constellation, detectors, exclude;
  double rho_e = 0, rho_p = 0, duty = 0;
  int frames = 0, tmax = 0, target_ue = -1, target_count = 0;
  uint64_t seed = 0;
  bool per_ue = false, no_wallclock = false;
  sweep->add_option("--config", config_path, "experiment file (key = value lines)");
  sweep->add_option("--snr-db", snr_list, "comma-separated SNR grid in dB");
  sweep->add_option("--jammer", jammer,
                    "none|barrage|pilot|data|sparse|impersonate_single|impersonate_average");
  auto* oe = sweep->add_option("--rho-e-db", rho_e, "jammer strength: total receive energy ratio");
  auto* op = sweep->add_option("--rho-p-db", rho_p, "jammer strength: active-phase power ratio");
  auto* od = sweep->add_option("--duty", duty, "sparse jammer duty cycle in (0,1]");
  sweep->add_option("--constellation", constellation, "jammer symbols: gaussian|qpsk");
  auto* ou = sweep->add_option("--target-ue", target_ue, "impersonated UE index");
  auto* oc = sweep->add_option("--target-count", target_count, "impersonated pilot count");
  sweep->add_option("--detectors", detectors, "subset of lmmse,geniepos,maed,jljed");
  auto* of = sweep->add_option("--frames", frames, "frames per SNR point");
  auto* os = sweep->add_option("--seed", seed, "master seed");
  auto* ot = sweep->add_option("--tmax", tmax, "solver iterations");
  sweep->add_flag("--per-ue", per_ue, "report per-UE BER columns");
  sweep->add_option("--exclude-ues", exclude, "UE indices excluded from the aggregate BER");
  sweep->add_flag("--no-wallclock", no_wallclock, "omit the wallclock column (byte-stable CSV)");
  sweep->add_option("--out", out_path, "output CSV path")->required();

  auto* figure = app.add_subcommand("figure", "run a named scenario preset");
  std::string fig_name, fig_out = "figure.csv";
  int fig_frames = 1000;
  uint64_t fig_seed = 1;
  bool fig_no_wallclock = false;
  figure->add_option("name", fig_name, "fig2a..fig2d, fig3a..fig3d, fig4a, fig4b, fig5a, fig5b")
      ->required();
  figure->add_option("--frames", fig_frames, "frames per SNR point");
  figure->add_option("--seed", fig_seed, "master seed");
  figure->add_option("--out", fig_out, "output CSV path");
  figure->add_flag("--no-wallclock", fig_no_wallclock, "omit the wallclock column");

  auto* selftest = app.add_subcommand("selftest", "run the quick property suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      ExperimentSpec spec =
          config_path.empty() ? default_spec() : load_experiment_file(config_path);
      if (spec.detectors.empty()) {
        spec.detectors = default_spec().detectors;
      }
      if (spec.snr_grid_db.empty()) {
        spec.snr_grid_db = default_spec().snr_grid_db;
      }
      if (!snr_list.empty()) apply_experiment_key(spec, "snr_grid_db", snr_list);
      if (!jammer.empty()) apply_experiment_key(spec, "jammer", jammer);
      if (!constellation.empty()) apply_experiment_key(spec, "constellation", constellation);
      if (oe->count()) apply_experiment_key(spec, "rho_e_db", std::to_string(rho_e));
      if (op->count()) apply_experiment_key(spec, "rho_p_db", std::to_string(rho_p));
      if (od->count()) apply_experiment_key(spec, "sparse_duty", std::to_string(duty));
      if (ou->count()) apply_experiment_key(spec, "target_ue", std::to_string(target_ue));
      if (oc->count()) apply_experiment_key(spec, "target_count", std::to_string(target_count));
      if (!detectors.empty()) apply_experiment_key(spec, "detectors", detectors);
      if (of->count()) apply_experiment_key(spec, "frames_per_point", std::to_string(frames));
      if (os->count()) apply_experiment_key(spec, "master_seed", std::to_string(seed));
      if (ot->count()) apply_experiment_key(spec, "t_max", std::to_string(tmax));
      if (per_ue) spec.per_ue_report = true;
      if (!exclude.empty()) apply_experiment_key(spec, "exclude_ues", exclude);

      const auto records = run_experiment(spec);
      emit_csv(records, out_path, !no_wallclock);
      std::printf("wrote %zu records to %s\n", records.size(), out_path.c_str());
      return 0;
    }
    if (figure->parsed()) {
      const auto records = run_figure(fig_name, fig_frames, fig_seed);
      emit_csv(records, fig_out, !fig_no_wallclock);
      std::printf("wrote %zu records to %s\n", records.size(), fig_out.c_str());
      return 0;
    }
    if (selftest->parsed()) {
      return run_selftest();
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
