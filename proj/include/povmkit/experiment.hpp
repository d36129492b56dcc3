#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "povmkit/detector.hpp"
#include "povmkit/estimator.hpp"
#include "povmkit/monitor.hpp"
#include "povmkit/pauli.hpp"
#include "povmkit/povm.hpp"
#include "povmkit/qdt.hpp"
#include "povmkit/schedule.hpp"
#include "povmkit/simulate.hpp"

namespace povmkit {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Scheme { CS, LBCS };

/// One experiment, fully determined by this structure plus its seed.
struct ExperimentConfig {
  // Observable source: a Hamiltonian file or a synthetic random spec.
  std::optional<std::string> observable_file;
  struct RandomSpec {
    int qubits = 0;
    int terms = 0;
    double scale = 1.0;
    RandomObservableOptions options;
  };
  std::optional<RandomSpec> random_observable_spec;

  // State: computational bitstring or per-qubit (theta, phi) Bloch angles.
  std::optional<std::string> state_bits;
  std::optional<std::vector<std::pair<double, double>>> state_bloch;

  Scheme scheme = Scheme::CS;
  double basis_floor = kDefaultBasisFloor;

  int settings = 1;           // S
  int shots_per_setting = 1;  // T
  JobCaps caps;
  double slot_seconds = 10.0;

  // Static readout noise: one flip for all qubits, per-qubit flips, or a
  // range sampled per qubit from the config seed.
  std::optional<double> noise_flip;
  std::optional<std::vector<double>> noise_flips;
  std::optional<std::pair<double, double>> noise_flip_range;

  struct TelegraphSpec {
    int qubit = 0;
    double e_good = 0.0;
    double e_bad = 0.0;
    // Asymmetric 1 -> 0 flips; symmetric when absent.
    std::optional<double> e_good_reverse;
    std::optional<double> e_bad_reverse;
    // Either switching rates or one fixed bad window in runtime fractions.
    std::optional<std::pair<double, double>> rates;   // (good->bad, bad->good)
    std::optional<std::pair<double, double>> window;  // (start, end) in [0,1]
  };
  std::optional<TelegraphSpec> telegraph;

  ScheduleMode schedule_mode = ScheduleMode::Blended;
  int qdt_repeats_per_job = 4;
  int qdt_shots = 100;  // per instance (blended) or per circuit (regular)
  bool run_qdt = true;
  bool use_qdt_effects = true;

  int repetitions = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  // Optional CI thresholds applied to the final estimate of every
  // repetition (the QDT-effects estimate when present).
  std::optional<double> check_max_abs_err;
  std::optional<double> check_max_std_err;
  std::optional<double> check_max_abs_err_sigma;

  void require_valid() const;
};

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical echo; parsing it back yields an equal config.
std::string config_to_json_text(const ExperimentConfig& config);

/// Everything one repetition produced.
struct RepetitionResult {
  std::uint64_t rep_seed = 0;
  std::vector<BasisDistribution> dists;
  Schedule schedule;
  DetectorModel model;
  std::vector<SettingBlock> blocks;
  bool has_qdt = false;
  QdtRun qdt_run;
  TomographyData tomography;
  std::vector<RecoveryResult> recoveries;
  double reference_energy = 0.0;
  EstimateReport ideal_report;
  std::vector<CurvePoint> ideal_curve;
  std::optional<EstimateReport> qdt_report;
  std::vector<CurvePoint> qdt_curve;
};

struct ExperimentBundle {
  ExperimentConfig config;
  Observable observable;
  ProductState state;
  std::vector<RepetitionResult> repetitions;
};

/// Schedule -> simulate -> (recover QDT effects) -> estimate with ideal AND
/// recovered effects. Deterministic for a fixed (config, seed).
ExperimentBundle run_experiment(const ExperimentConfig& config);

/// The configured observable (parsed file or seeded random spec).
Observable resolve_observable(const ExperimentConfig& config);
/// The configured detector with trajectories sampled for `duration`.
DetectorModel resolve_detector(const ExperimentConfig& config, int num_qubits,
                               double duration, std::uint64_t rep_seed);

/// Writes the artifact bundle (reports, curves, raw streams, schedules,
/// POVM serializations) under `dir`.
void write_bundle(const ExperimentBundle& bundle,
                  const std::filesystem::path& dir);

/// Report rows in stable order: per repetition, the ideal-effects estimate
/// then (when present) the QDT-effects estimate.
struct ReportRows {
  struct Row {
    std::string label;
    EstimateReport report;
    double abs_error = 0.0;
  };
  double reference_energy = 0.0;
  std::vector<Row> rows;
};

ReportRows bundle_report_rows(const ExperimentBundle& bundle);
std::string reports_csv(const ReportRows& rows);
std::string reports_json(const ReportRows& rows);

std::string bundle_reports_csv(const ExperimentBundle& bundle);
std::string bundle_reports_json(const ExperimentBundle& bundle);

/// Re-runs estimation from a bundle's raw streams on disk; the resulting
/// rows are byte-identical to the shipped reports.
ReportRows replay_reports(const std::filesystem::path& dir);
std::string replay_reports_csv(const std::filesystem::path& dir);

/// Paired CS/LBCS comparison at equal total shots.
struct SchemeComparison {
  struct Row {
    int rep = 0;
    double cs_std_err = 0.0;
    double lbcs_std_err = 0.0;
    double cs_abs_err = 0.0;
    double lbcs_abs_err = 0.0;
  };
  std::vector<Row> rows;
  int lbcs_std_err_wins = 0;
};

/// Requires the two configs to agree on everything but the scheme.
SchemeComparison compare_schemes(const ExperimentConfig& cs_config,
                                 const ExperimentConfig& lbcs_config);

std::string comparison_csv(const SchemeComparison& comparison);

}  // namespace povmkit
