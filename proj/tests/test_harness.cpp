#include "maed/harness.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace maed;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.base.B = 16;
  spec.base.U = 4;
  spec.base.T = 8;
  spec.base.D = 16;
  spec.snr_grid_db = {0.0, 10.0};
  spec.detectors = {DetectorKind::Lmmse};
  spec.frames_per_point = 20;
  spec.master_seed = 42;
  spec.solver.t_max = 10;
  return spec;
}

const BerRecord& find_record(const std::vector<BerRecord>& records, const std::string& detector,
                             double snr) {
  for (const auto& r : records) {
    if (r.detector == detector && r.snr_db == snr) {
      return r;
    }
  }
  throw std::runtime_error("record not found");
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("run_experiment: noiseless jammerless single frame decodes exactly") {
  ExperimentSpec spec = small_spec();
  spec.snr_grid_db = {kInf};
  spec.frames_per_point = 1;
  const auto records = run_experiment(spec);
  REQUIRE(records.size() == 1);
  CHECK(records[0].ber == 0.0);
  CHECK(records[0].bit_errors == 0);
  CHECK(records[0].bits_total == 4 * 2 * 16);
}

TEST_CASE("run_experiment: frames are paired across detector subsets") {
  ExperimentSpec lone = small_spec();
  lone.base.jammer.kind = JammerKind::Barrage;
  lone.base.jammer.strength_db = 20.0;
  lone.detectors = {DetectorKind::Maed};
  ExperimentSpec crowd = lone;
  crowd.detectors = {DetectorKind::Lmmse, DetectorKind::Maed, DetectorKind::JlJed,
                     DetectorKind::GeniePos};
  const auto a = run_experiment(lone);
  const auto b = run_experiment(crowd);
  for (double snr : lone.snr_grid_db) {
    CHECK(find_record(a, "maed", snr).bit_errors == find_record(b, "maed", snr).bit_errors);
  }
}

TEST_CASE("run_experiment: reproducible CSV for equal seeds, distinct otherwise") {
  ExperimentSpec spec = small_spec();
  spec.detectors = {DetectorKind::Lmmse, DetectorKind::JlJed};
  const std::string a = to_csv(run_experiment(spec), false);
  const std::string b = to_csv(run_experiment(spec), false);
  CHECK(a == b);
  spec.master_seed = 43;
  CHECK(to_csv(run_experiment(spec), false) != a);
}

TEST_CASE("run_experiment: per-UE reporting and exclusions") {
  ExperimentSpec spec = small_spec();
  spec.snr_grid_db = {-5.0};
  spec.per_ue_report = true;
  const auto with_all = run_experiment(spec);
  REQUIRE(with_all[0].per_ue_ber.size() == 4);
  const double bits_per_ue = 2.0 * spec.base.D * spec.frames_per_point;
  double reconstructed = 0.0;
  for (double ue_ber : with_all[0].per_ue_ber) {
    reconstructed += ue_ber * bits_per_ue;
  }
  CHECK(reconstructed == doctest::Approx(static_cast<double>(with_all[0].bit_errors)));

  spec.exclude_ues = {1, 2};
  const auto excl = run_experiment(spec);
  CHECK(excl[0].bits_total == 2 * static_cast<long long>(bits_per_ue));
  const double kept = (with_all[0].per_ue_ber[0] + with_all[0].per_ue_ber[3]) * bits_per_ue;
  CHECK(static_cast<double>(excl[0].bit_errors) == doctest::Approx(kept));
}

TEST_CASE("run_experiment: lmmse BER non-increasing in SNR up to noise") {
  ExperimentSpec spec;
  spec.base.B = 32;
  spec.base.U = 8;
  spec.base.T = 8;
  spec.base.D = 24;
  spec.snr_grid_db = {0.0, 5.0, 10.0, 15.0};
  spec.detectors = {DetectorKind::Lmmse};
  spec.frames_per_point = 100;
  spec.master_seed = 7;
  const auto records = run_experiment(spec);
  for (size_t i = 1; i < records.size(); ++i) {
    const double prev = records[i - 1].ber;
    const double cur = records[i].ber;
    const double bits = static_cast<double>(records[i].bits_total);
    const double sigma =
        std::sqrt((prev * (1 - prev) + cur * (1 - cur)) / bits + 1e-12);
    CHECK(cur <= prev + 2.0 * sigma);
  }
}

TEST_CASE("emit_csv and to_csv: layout, ordering, parse-back") {
  CHECK(to_csv({}, true) == "detector,snr_db,bits_total,bit_errors,ber,wallclock_s\n");

  BerRecord rec;
  rec.detector = "lmmse";
  rec.snr_db = 2.5;
  rec.bits_total = 4096;
  rec.bit_errors = 17;
  rec.ber = 17.0 / 4096.0;
  rec.wallclock_s = 0.125;
  const std::string one = to_csv({rec}, true);
  CHECK(one ==
        "detector,snr_db,bits_total,bit_errors,ber,wallclock_s\n"
        "lmmse,2.5,4096,17,0.00415039,0.125\n");
  CHECK(to_csv({rec}, false) ==
        "detector,snr_db,bits_total,bit_errors,ber\nlmmse,2.5,4096,17,0.00415039\n");

  // Parse back the ber field and compare at 6 significant digits.
  std::stringstream ss(one);
  std::string line;
  std::getline(ss, line);
  std::getline(ss, line);
  const auto last_comma = line.rfind(',');
  const auto prev_comma = line.rfind(',', last_comma - 1);
  const double parsed = std::stod(line.substr(prev_comma + 1, last_comma - prev_comma - 1));
  char expect[32];
  std::snprintf(expect, sizeof expect, "%.6g", rec.ber);
  CHECK(parsed == std::stod(expect));

  // Sorted by detector then ascending SNR.
  BerRecord r2 = rec;
  r2.detector = "maed";
  r2.snr_db = -1.0;
  BerRecord r3 = rec;
  r3.snr_db = -4.0;
  const std::string multi = to_csv({rec, r2, r3}, false);
  const auto lmmse_low = multi.find("lmmse,-4");
  const auto lmmse_high = multi.find("lmmse,2.5");
  const auto maed_row = multi.find("maed,-1");
  CHECK(lmmse_low != std::string::npos);
  CHECK(lmmse_low < lmmse_high);
  CHECK(lmmse_high < maed_row);

  CHECK_THROWS(emit_csv({rec}, "/nonexistent-dir/x/y.csv", true));
}

TEST_CASE("experiment file loader: round trip and errors") {
  const std::string text =
      "# scenario\n"
      "B = 64\n"
      "U = 16\n"
      "T = 16\n"
      "D = 32\n"
      "Es = 2.0\n"
      "snr_grid_db = -10, -5, 0\n"
      "jammer = sparse\n"
      "constellation = qpsk\n"
      "rho_e_db = 25\n"
      "sparse_duty = 0.25\n"
      "detectors = maed, jljed\n"
      "frames_per_point = 50\n"
      "master_seed = 99\n"
      "t_max = 20\n"
      "per_ue_report = true\n"
      "exclude_ues = 0, 3\n";
  const ExperimentSpec spec = parse_experiment_text(text);
  CHECK(spec.base.B == 64);
  CHECK(spec.base.U == 16);
  CHECK(spec.base.Es == 2.0);
  CHECK(spec.snr_grid_db == std::vector<double>{-10, -5, 0});
  CHECK(spec.base.jammer.kind == JammerKind::Sparse);
  CHECK(spec.base.jammer.constellation == JammerConstellation::Qpsk);
  CHECK(spec.base.jammer.strength_db == 25.0);
  CHECK(spec.base.jammer.strength_mode == StrengthMode::TotalEnergy);
  CHECK(spec.base.jammer.sparse_duty == 0.25);
  REQUIRE(spec.detectors.size() == 2);
  CHECK(spec.detectors[0] == DetectorKind::Maed);
  CHECK(spec.detectors[1] == DetectorKind::JlJed);
  CHECK(spec.frames_per_point == 50);
  CHECK(spec.master_seed == 99);
  CHECK(spec.solver.t_max == 20);
  CHECK(spec.per_ue_report);
  CHECK(spec.exclude_ues == std::vector<int>{0, 3});

  CHECK_THROWS(parse_experiment_text("nonsense_key = 3\n"));
  CHECK_THROWS(parse_experiment_text("B 64\n"));
  CHECK_THROWS(parse_experiment_text("jammer = quantum\n"));
  CHECK_THROWS(load_experiment_file("/does/not/exist.cfg"));
}

TEST_CASE("parallel_for: covers the range once and propagates errors") {
  std::vector<int> hits(1000, 0);
  parallel_for(1000, [&](int i) { hits[i]++; }, 4);
  for (int h : hits) {
    CHECK(h == 1);
  }
  CHECK_THROWS_AS(
      parallel_for(16, [](int i) { if (i == 7) throw std::runtime_error("boom"); }, 4),
      std::runtime_error);
}

}  // TEST_SUITE
