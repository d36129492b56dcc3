#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "povmkit/experiment.hpp"
#include "povmkit/io_util.hpp"

using namespace povmkit;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  ExperimentConfig::RandomSpec spec;
  spec.qubits = 3;
  spec.terms = 20;
  spec.scale = 0.5;
  spec.options.axis_weights = {0.5, 0.05, 0.05, 0.4};
  cfg.random_observable_spec = spec;
  cfg.state_bits = "000";
  cfg.scheme = Scheme::CS;
  cfg.settings = 3000;
  cfg.shots_per_setting = 25;
  cfg.caps = JobCaps{300, 100};
  cfg.qdt_repeats_per_job = 4;
  cfg.qdt_shots = 100;
  cfg.run_qdt = true;
  cfg.use_qdt_effects = true;
  cfg.seed = 2024;
  cfg.output_dir = "out";
  return cfg;
}

/// Infinite-statistics mean of the ideal-effects estimator under symmetric
/// per-qubit flips: every Pauli factor shrinks by (1 - 2 e_q).
double biased_reference(const Observable& obs, const ProductState& state,
                        const std::vector<double>& flips) {
  double total = 0.0;
  for (const auto& [coeff, str] : obs.terms) {
    double factor = 1.0;
    for (auto [q, axis] : str.factors) {
      factor *= (1.0 - 2.0 * flips[static_cast<std::size_t>(q)]) *
                bloch_component(state.qubits[static_cast<std::size_t>(q)], axis);
    }
    total += coeff * factor;
  }
  return total;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config json round-trips through the canonical echo") {
  ExperimentConfig cfg = small_config();
  cfg.noise_flip_range = {0.01, 0.05};
  ExperimentConfig::TelegraphSpec tel;
  tel.qubit = 1;
  tel.e_good = 0.015;
  tel.e_bad = 0.08;
  tel.window = {0.3, 0.5};
  cfg.telegraph = tel;
  cfg.check_max_abs_err_sigma = 4.0;

  const std::string text = config_to_json_text(cfg);
  const ExperimentConfig parsed = config_from_json_text(text);
  CHECK(config_to_json_text(parsed) == text);

  // Rates-based telegraph with asymmetric flips round-trips too.
  cfg.telegraph->window.reset();
  cfg.telegraph->rates = {1.0 / 600.0, 1.0 / 300.0};
  cfg.telegraph->e_bad_reverse = 0.05;
  const std::string rates_text = config_to_json_text(cfg);
  CHECK(config_to_json_text(config_from_json_text(rates_text)) == rates_text);
}

TEST_CASE("config validation rejects bad fields") {
  CHECK_THROWS_AS(config_from_json_text("not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text("{}"), ConfigError);

  ExperimentConfig cfg = small_config();
  cfg.settings = 0;
  CHECK_THROWS_AS(cfg.require_valid(), ConfigError);

  cfg = small_config();
  cfg.basis_floor = 0.5;
  CHECK_THROWS_AS(cfg.require_valid(), ConfigError);

  cfg = small_config();
  cfg.noise_flip = 0.7;
  CHECK_THROWS_AS(cfg.require_valid(), ConfigError);

  cfg = small_config();
  cfg.state_bits.reset();
  CHECK_THROWS_AS(cfg.require_valid(), ConfigError);

  cfg = small_config();
  ExperimentConfig::TelegraphSpec tel;
  tel.qubit = 0;
  tel.e_good = 0.01;
  tel.e_bad = 0.05;
  CHECK_THROWS_AS((cfg.telegraph = tel, cfg.require_valid()), ConfigError);
}

TEST_CASE("noiseless run is unbiased within four standard errors") {
  ExperimentConfig cfg = small_config();
  cfg.run_qdt = false;
  cfg.use_qdt_effects = false;
  cfg.settings = 2000;

  const ExperimentBundle bundle = run_experiment(cfg);
  REQUIRE(bundle.repetitions.size() == 1);
  const auto& rep = bundle.repetitions[0];
  const double abs_err =
      absolute_error(rep.ideal_report, rep.reference_energy);
  REQUIRE(rep.ideal_report.standard_error.has_value());
  CHECK(abs_err < 4.0 * *rep.ideal_report.standard_error);
  CHECK(!rep.qdt_report.has_value());
}

TEST_CASE("readout noise biases the ideal-effects estimate and QDT fixes it") {
  ExperimentConfig cfg = small_config();
  cfg.noise_flips = std::vector<double>{0.08, 0.12, 0.10};
  cfg.settings = 9000;

  const ExperimentBundle bundle = run_experiment(cfg);
  const auto& rep = bundle.repetitions[0];

  const std::vector<double> flips = {0.08, 0.12, 0.10};
  const double biased =
      biased_reference(bundle.observable, bundle.state, flips);
  const double truth = rep.reference_energy;

  // The ideal-effects estimate concentrates on the biased value...
  const double sigma = *rep.ideal_report.standard_error;
  CHECK(std::abs(rep.ideal_report.mean - biased) < 4.0 * sigma);
  // ...and the configured noise makes that value measurably wrong.
  CHECK(std::abs(biased - truth) > 5.0 * sigma);
  CHECK(absolute_error(rep.ideal_report, truth) > 4.0 * sigma);

  // The QDT-effects estimate is unbiased for the truth.
  REQUIRE(rep.qdt_report.has_value());
  const double qdt_sigma = *rep.qdt_report->standard_error;
  CHECK(absolute_error(*rep.qdt_report, truth) < 4.0 * qdt_sigma);
}

TEST_CASE("repetitions use distinct sub-seeds") {
  ExperimentConfig cfg = small_config();
  cfg.settings = 200;
  cfg.repetitions = 3;
  const ExperimentBundle bundle = run_experiment(cfg);
  REQUIRE(bundle.repetitions.size() == 3);
  CHECK(bundle.repetitions[0].rep_seed != bundle.repetitions[1].rep_seed);
  CHECK(bundle.repetitions[0].ideal_report.mean !=
        bundle.repetitions[1].ideal_report.mean);
  // Reports carry one ideal and one qdt row per repetition.
  const ReportRows rows = bundle_report_rows(bundle);
  CHECK(rows.rows.size() == 6);
}

TEST_CASE("identical config and seed reproduce the bundle byte for byte") {
  ExperimentConfig cfg = small_config();
  cfg.settings = 400;
  const ExperimentBundle a = run_experiment(cfg);
  const ExperimentBundle b = run_experiment(cfg);
  CHECK(bundle_reports_csv(a) == bundle_reports_csv(b));
  CHECK(bundle_reports_json(a) == bundle_reports_json(b));

  const auto dir_a = std::filesystem::temp_directory_path() / "povmkit_eq_a";
  const auto dir_b = std::filesystem::temp_directory_path() / "povmkit_eq_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  write_bundle(a, dir_a);
  write_bundle(b, dir_b);
  CHECK(read_text_file(dir_a / "reports.csv") ==
        read_text_file(dir_b / "reports.csv"));
  CHECK(read_text_file(dir_a / "rep000" / "shots.csv") ==
        read_text_file(dir_b / "rep000" / "shots.csv"));
}

TEST_CASE("replay from the raw streams reproduces the reports exactly") {
  ExperimentConfig cfg = small_config();
  cfg.settings = 400;
  const ExperimentBundle bundle = run_experiment(cfg);
  const auto dir =
      std::filesystem::temp_directory_path() / "povmkit_replay";
  std::filesystem::remove_all(dir);
  write_bundle(bundle, dir);
  CHECK(replay_reports_csv(dir) == read_text_file(dir / "reports.csv"));
}

TEST_CASE("scheme comparison favors LBCS on a Z-heavy observable") {
  ExperimentConfig cs = small_config();
  ExperimentConfig::RandomSpec spec;
  spec.qubits = 4;
  spec.terms = 30;
  spec.scale = 0.5;
  spec.options.axis_weights = {0.35, 0.04, 0.04, 0.57};
  cs.random_observable_spec = spec;
  cs.state_bits = "0000";
  cs.settings = 1500;
  cs.shots_per_setting = 10;
  cs.run_qdt = false;
  cs.use_qdt_effects = false;
  cs.repetitions = 6;

  ExperimentConfig lbcs = cs;
  lbcs.scheme = Scheme::LBCS;

  const SchemeComparison comparison = compare_schemes(cs, lbcs);
  REQUIRE(comparison.rows.size() == 6);
  CHECK(comparison.lbcs_std_err_wins >= 5);

  // Mismatched pairs are rejected.
  ExperimentConfig other = lbcs;
  other.random_observable_spec->qubits = 5;
  other.state_bits = "00000";
  CHECK_THROWS_AS(compare_schemes(cs, other), ConfigError);
  CHECK_THROWS_AS(compare_schemes(cs, cs), ConfigError);
}

TEST_CASE("flip-range noise is drawn deterministically from the seed") {
  ExperimentConfig cfg = small_config();
  cfg.noise_flip_range = {0.01, 0.05};
  cfg.settings = 100;
  cfg.run_qdt = false;
  cfg.use_qdt_effects = false;
  const ExperimentBundle a = run_experiment(cfg);
  const ExperimentBundle b = run_experiment(cfg);
  for (int q = 0; q < 3; ++q) {
    const double ea = a.repetitions[0].model.statics[static_cast<std::size_t>(q)].a(1, 0);
    const double eb = b.repetitions[0].model.statics[static_cast<std::size_t>(q)].a(1, 0);
    CHECK(ea == eb);
    CHECK(ea >= 0.01);
    CHECK(ea <= 0.05);
  }
}

TEST_CASE("telegraph window builds the expected trajectory") {
  ExperimentConfig cfg = small_config();
  cfg.settings = 2000;
  ExperimentConfig::TelegraphSpec tel;
  tel.qubit = 1;
  tel.e_good = 0.0;
  tel.e_bad = 0.08;
  tel.window = {0.25, 0.45};
  cfg.telegraph = tel;

  const ExperimentBundle bundle = run_experiment(cfg);
  const auto& model = bundle.repetitions[0].model;
  REQUIRE(model.trajectories[1].has_value());
  const auto& traj = *model.trajectories[1];
  const double duration = bundle.repetitions[0].schedule.end_time();
  CHECK(traj.duration == duration);
  CHECK(traj.at(0.2 * duration) == Regime::Good);
  CHECK(traj.at(0.3 * duration) == Regime::Bad);
  CHECK(traj.at(0.5 * duration) == Regime::Good);
}

}  // TEST_SUITE
