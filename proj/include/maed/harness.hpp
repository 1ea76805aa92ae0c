#pragma once

#include "maed/baselines.hpp"
#include "maed/channel.hpp"
#include "maed/solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace maed {

enum class DetectorKind { Lmmse, GeniePos, Maed, JlJed };

std::string detector_name(DetectorKind kind);
DetectorKind detector_from_name(const std::string& name);  // throws on unknown names

struct ExperimentSpec {
  SystemConfig base;
  std::vector<double> snr_grid_db;
  std::vector<DetectorKind> detectors;
  int frames_per_point = 1000;
  uint64_t master_seed = 1;
  SolverConfig solver;
  bool per_ue_report = false;
  // UEs excluded from the aggregate error count (per-UE columns still
  // report everyone).
  std::vector<int> exclude_ues;

  void validate() const;
};

struct BerRecord {
  std::string detector;
  double snr_db = 0.0;
  long long bit_errors = 0;
  long long bits_total = 0;
  double ber = 0.0;
  std::vector<double> per_ue_ber;  // empty unless per_ue_report
  double wallclock_s = 0.0;        // summed seconds spent inside the detector
};

/// Runs the Monte-Carlo sweep. Every detector sees the same frames at each
/// grid point (common random numbers; frame seeds derive from
/// (master_seed, snr index, frame index), so results are independent of
/// thread count). The jljed detector runs on a jammerless twin of each
/// frame. Records come back sorted by detector name, then ascending SNR.
std::vector<BerRecord> run_experiment(const ExperimentSpec& spec);

/// CSV with header detector,snr_db,bits_total,bit_errors,ber,wallclock_s
/// (plus ue<i>_ber columns when per-UE data is present); values printed
/// with 6 significant digits. Dropping the wallclock column makes equal
/// runs byte-identical.
std::string to_csv(const std::vector<BerRecord>& records, bool include_wallclock = true);
void emit_csv(const std::vector<BerRecord>& records, const std::string& path,
              bool include_wallclock = true);

/// Flat key-value experiment file (one `key = value` per line, '#' starts
/// a comment); keys mirror the ExperimentSpec fields. Unknown keys throw.
ExperimentSpec load_experiment_file(const std::string& path);
ExperimentSpec parse_experiment_text(const std::string& text);

/// Applies one config-file key to the experiment (shared by the file loader
/// and command-line overrides).
void apply_experiment_key(ExperimentSpec& spec, const std::string& key, const std::string& value);

/// Runs fn(0..n-1) across worker threads (hardware concurrency by default).
/// The first exception thrown by any task is rethrown after completion.
void parallel_for(int n, const std::function<void(int)>& fn, int num_threads = 0);

}  // namespace maed
