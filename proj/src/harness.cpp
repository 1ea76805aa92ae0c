#include "maed/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace maed {

std::string detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Lmmse:
      return "lmmse";
    case DetectorKind::GeniePos:
      return "geniepos";
    case DetectorKind::Maed:
      return "maed";
    case DetectorKind::JlJed:
      return "jljed";
  }
  return "?";
}

DetectorKind detector_from_name(const std::string& name) {
  if (name == "lmmse") return DetectorKind::Lmmse;
  if (name == "geniepos") return DetectorKind::GeniePos;
  if (name == "maed") return DetectorKind::Maed;
  if (name == "jljed") return DetectorKind::JlJed;
  throw std::invalid_argument("unknown detector '" + name + "'");
}

void ExperimentSpec::validate() const {
  base.validate();
  if (snr_grid_db.empty()) {
    throw std::invalid_argument("ExperimentSpec: empty SNR grid");
  }
  if (detectors.empty()) {
    throw std::invalid_argument("ExperimentSpec: no detectors selected");
  }
  if (frames_per_point < 1) {
    throw std::invalid_argument("ExperimentSpec: frames_per_point must be >= 1");
  }
  for (int ue : exclude_ues) {
    if (ue < 0 || ue >= base.U) {
      throw std::invalid_argument("ExperimentSpec: excluded UE index out of range");
    }
  }
}

void parallel_for(int n, const std::function<void(int)>& fn, int num_threads) {
  if (n <= 0) {
    return;
  }
  int workers = num_threads > 0 ? num_threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back(worker);
  }
  for (auto& th : pool) {
    th.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

namespace {

struct FrameCounts {
  std::vector<long long> ue_errors;  // per UE
  double seconds = 0.0;
};

long long count_row_errors(const BitMatrix& got, const BitMatrix& want, int ue) {
  long long errors = 0;
  for (Eigen::Index c = 0; c < want.cols(); ++c) {
    errors += got(ue, c) != want(ue, c);
  }
  return errors;
}

}  // namespace

std::vector<BerRecord> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const int U = spec.base.U;
  const long long bits_per_frame_ue = 2LL * spec.base.D;
  const bool need_twin =
      std::find(spec.detectors.begin(), spec.detectors.end(), DetectorKind::JlJed) !=
      spec.detectors.end();

  std::vector<bool> counted(U, true);
  for (int ue : spec.exclude_ues) {
    counted[ue] = false;
  }
  const long long counted_ues = std::count(counted.begin(), counted.end(), true);

  std::vector<BerRecord> records;
  for (size_t snr_idx = 0; snr_idx < spec.snr_grid_db.size(); ++snr_idx) {
    SystemConfig cfg = spec.base;
    cfg.snr_db = spec.snr_grid_db[snr_idx];

    // One slot per (detector, frame) so the reduction below is independent
    // of the execution order.
    std::vector<std::vector<FrameCounts>> counts(
        spec.detectors.size(), std::vector<FrameCounts>(spec.frames_per_point));

    parallel_for(spec.frames_per_point, [&](int frame_idx) {
      SystemConfig frame_cfg = cfg;
      frame_cfg.rng_seed = derive_seed(spec.master_seed, snr_idx, frame_idx);
      Rng rng(frame_cfg.rng_seed);
      ReceivedFrame frame;
      try {
        frame = synthesize_frame(frame_cfg, rng);
        ReceivedFrame twin;
        if (need_twin) {
          twin = strip_jammer(frame);
        }
        for (size_t d = 0; d < spec.detectors.size(); ++d) {
          const auto t0 = std::chrono::steady_clock::now();
          BitMatrix bits;
          switch (spec.detectors[d]) {
            case DetectorKind::Lmmse:
              bits = detect_lmmse_baseline(frame, frame_cfg).bits;
              break;
            case DetectorKind::GeniePos:
              bits = detect_genie_pos(frame, frame_cfg).bits;
              break;
            case DetectorKind::Maed:
              bits = run_maed(frame.Y, frame.truth.S_T, frame_cfg.Es, spec.solver).bits;
              break;
            case DetectorKind::JlJed:
              bits = detect_jl_jed(twin, frame_cfg, spec.solver).bits;
              break;
          }
          FrameCounts& fc = counts[d][frame_idx];
          fc.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          fc.ue_errors.resize(U);
          for (int ue = 0; ue < U; ++ue) {
            fc.ue_errors[ue] = count_row_errors(bits, frame.truth.bits, ue);
          }
        }
      } catch (const std::exception& e) {
        throw std::runtime_error("frame " + std::to_string(frame_idx) + " at snr " +
                                 std::to_string(cfg.snr_db) + " dB: " + e.what());
      }
    });

    for (size_t d = 0; d < spec.detectors.size(); ++d) {
      BerRecord rec;
      rec.detector = detector_name(spec.detectors[d]);
      rec.snr_db = cfg.snr_db;
      std::vector<long long> ue_errors(U, 0);
      for (const FrameCounts& fc : counts[d]) {
        rec.wallclock_s += fc.seconds;
        for (int ue = 0; ue < U; ++ue) {
          ue_errors[ue] += fc.ue_errors[ue];
        }
      }
      for (int ue = 0; ue < U; ++ue) {
        if (counted[ue]) {
          rec.bit_errors += ue_errors[ue];
        }
      }
      rec.bits_total = counted_ues * bits_per_frame_ue * spec.frames_per_point;
      rec.ber = rec.bits_total > 0 ? static_cast<double>(rec.bit_errors) / rec.bits_total : 0.0;
      if (spec.per_ue_report) {
        rec.per_ue_ber.resize(U);
        const double ue_bits = static_cast<double>(bits_per_frame_ue) * spec.frames_per_point;
        for (int ue = 0; ue < U; ++ue) {
          rec.per_ue_ber[ue] = ue_errors[ue] / ue_bits;
        }
      }
      records.push_back(std::move(rec));
    }
  }

  std::sort(records.begin(), records.end(), [](const BerRecord& a, const BerRecord& b) {
    if (a.detector != b.detector) return a.detector < b.detector;
    return a.snr_db < b.snr_db;
  });
  return records;
}

namespace {

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string to_csv(const std::vector<BerRecord>& records, bool include_wallclock) {
  std::vector<const BerRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) {
    ordered.push_back(&r);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const BerRecord* a, const BerRecord* b) {
    if (a->detector != b->detector) return a->detector < b->detector;
    return a->snr_db < b->snr_db;
  });
  size_t ue_cols = 0;
  for (const auto& r : records) {
    ue_cols = std::max(ue_cols, r.per_ue_ber.size());
  }
  std::ostringstream out;
  out << "detector,snr_db,bits_total,bit_errors,ber";
  if (include_wallclock) {
    out << ",wallclock_s";
  }
  for (size_t u = 0; u < ue_cols; ++u) {
    out << ",ue" << u << "_ber";
  }
  out << "\n";
  for (const BerRecord* rp : ordered) {
    const BerRecord& r = *rp;
    out << r.detector << ',' << format_g6(r.snr_db) << ',' << r.bits_total << ',' << r.bit_errors
        << ',' << format_g6(r.ber);
    if (include_wallclock) {
      out << ',' << format_g6(r.wallclock_s);
    }
    for (size_t u = 0; u < ue_cols; ++u) {
      out << ',' << (u < r.per_ue_ber.size() ? format_g6(r.per_ue_ber[u]) : "");
    }
    out << "\n";
  }
  return out.str();
}

void emit_csv(const std::vector<BerRecord>& records, const std::string& path,
              bool include_wallclock) {
  std::ofstream file(path);
  if (!file) {
    throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
  }
  file << to_csv(records, include_wallclock);
  if (!file.good()) {
    throw std::runtime_error("emit_csv: write to '" + path + "' failed");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      items.push_back(item);
    }
  }
  return items;
}

JammerKind jammer_kind_from_name(const std::string& name) {
  if (name == "none") return JammerKind::None;
  if (name == "barrage") return JammerKind::Barrage;
  if (name == "pilot") return JammerKind::Pilot;
  if (name == "data") return JammerKind::Data;
  if (name == "sparse") return JammerKind::Sparse;
  if (name == "impersonate_single") return JammerKind::ImpersonateSingle;
  if (name == "impersonate_average") return JammerKind::ImpersonateAverage;
  throw std::invalid_argument("unknown jammer kind '" + name + "'");
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

}  // namespace

void apply_experiment_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  if (key == "B") {
    spec.base.B = std::stoi(value);
  } else if (key == "U") {
    spec.base.U = std::stoi(value);
  } else if (key == "T") {
    spec.base.T = std::stoi(value);
  } else if (key == "D") {
    spec.base.D = std::stoi(value);
  } else if (key == "Es") {
    spec.base.Es = std::stod(value);
  } else if (key == "snr_grid_db") {
    spec.snr_grid_db.clear();
    for (const auto& v : split_list(value)) {
      spec.snr_grid_db.push_back(std::stod(v));
    }
  } else if (key == "jammer") {
    spec.base.jammer.kind = jammer_kind_from_name(value);
  } else if (key == "constellation") {
    if (value == "gaussian") {
      spec.base.jammer.constellation = JammerConstellation::Gaussian;
    } else if (value == "qpsk") {
      spec.base.jammer.constellation = JammerConstellation::Qpsk;
    } else {
      throw std::invalid_argument("unknown constellation '" + value + "'");
    }
  } else if (key == "rho_e_db") {
    spec.base.jammer.strength_db = std::stod(value);
    spec.base.jammer.strength_mode = StrengthMode::TotalEnergy;
  } else if (key == "rho_p_db") {
    spec.base.jammer.strength_db = std::stod(value);
    spec.base.jammer.strength_mode = StrengthMode::ActivePower;
  } else if (key == "sparse_duty") {
    spec.base.jammer.sparse_duty = std::stod(value);
  } else if (key == "target_ue") {
    spec.base.jammer.target_ue = std::stoi(value);
  } else if (key == "target_count") {
    spec.base.jammer.target_count = std::stoi(value);
  } else if (key == "detectors") {
    spec.detectors.clear();
    for (const auto& v : split_list(value)) {
      spec.detectors.push_back(detector_from_name(v));
    }
  } else if (key == "frames_per_point") {
    spec.frames_per_point = std::stoi(value);
  } else if (key == "master_seed") {
    spec.master_seed = std::stoull(value);
  } else if (key == "t_max") {
    spec.solver.t_max = std::stoi(value);
  } else if (key == "tau0") {
    spec.solver.tau0 = std::stod(value);
  } else if (key == "per_ue_report") {
    spec.per_ue_report = parse_bool(value);
  } else if (key == "exclude_ues") {
    spec.exclude_ues.clear();
    for (const auto& v : split_list(value)) {
      spec.exclude_ues.push_back(std::stoi(v));
    }
  } else {
    throw std::invalid_argument("unknown experiment key '" + key + "'");
  }
}

ExperimentSpec parse_experiment_text(const std::string& text) {
  ExperimentSpec spec;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("experiment file line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    try {
      apply_experiment_key(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("experiment file line " + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return spec;
}

ExperimentSpec load_experiment_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("cannot open experiment file '" + path + "'");
  }
  std::ostringstream buf;
  buf << file.rdbuf();
  return parse_experiment_text(buf.str());
}

}  // namespace maed
