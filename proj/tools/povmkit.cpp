// Command-line harness for configuration-driven measurement experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error,
// 4 a configured acceptance threshold failed.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "povmkit/experiment.hpp"
#include "povmkit/io_util.hpp"
#include "povmkit/monitor.hpp"
#include "povmkit/qdt.hpp"
#include "povmkit/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitThreshold = 4;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> settings;
  std::optional<int> shots;
  std::optional<int> repetitions;
  std::optional<std::string> scheme;
  std::optional<std::string> output;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--settings", o.settings, "Override the settings count S");
  cmd->add_option("--shots", o.shots, "Override shots per setting T");
  cmd->add_option("--repetitions", o.repetitions,
                  "Override the repetition count");
  cmd->add_option("--scheme", o.scheme, "Override the scheme (cs|lbcs)");
  cmd->add_option("--output", o.output, "Override the output directory");
}

povmkit::ExperimentConfig load_with_overrides(const std::string& path,
                                              const Overrides& o) {
  povmkit::ExperimentConfig cfg = povmkit::load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.settings) cfg.settings = *o.settings;
  if (o.shots) cfg.shots_per_setting = *o.shots;
  if (o.repetitions) cfg.repetitions = *o.repetitions;
  if (o.scheme) {
    if (*o.scheme == "cs") cfg.scheme = povmkit::Scheme::CS;
    else if (*o.scheme == "lbcs") cfg.scheme = povmkit::Scheme::LBCS;
    else throw povmkit::ConfigError("--scheme must be cs or lbcs");
  }
  if (o.output) cfg.output_dir = *o.output;
  cfg.require_valid();
  return cfg;
}

/// Applies the config's optional CI thresholds to the final estimate of
/// every repetition. Returns false on any violation.
bool apply_checks(const povmkit::ExperimentBundle& bundle) {
  const auto& cfg = bundle.config;
  if (!cfg.check_max_abs_err && !cfg.check_max_std_err &&
      !cfg.check_max_abs_err_sigma) {
    return true;
  }
  bool ok = true;
  for (std::size_t rep = 0; rep < bundle.repetitions.size(); ++rep) {
    const auto& r = bundle.repetitions[rep];
    const povmkit::EstimateReport& report =
        cfg.use_qdt_effects && r.qdt_report ? *r.qdt_report : r.ideal_report;
    const double abs_err = povmkit::absolute_error(report, r.reference_energy);
    if (cfg.check_max_abs_err && abs_err > *cfg.check_max_abs_err) {
      std::cerr << "check failed (rep " << rep << "): abs_err " << abs_err
                << " > " << *cfg.check_max_abs_err << "\n";
      ok = false;
    }
    if (cfg.check_max_std_err && report.standard_error &&
        *report.standard_error > *cfg.check_max_std_err) {
      std::cerr << "check failed (rep " << rep << "): std_err "
                << *report.standard_error << " > " << *cfg.check_max_std_err
                << "\n";
      ok = false;
    }
    if (cfg.check_max_abs_err_sigma && report.standard_error &&
        abs_err > *cfg.check_max_abs_err_sigma * *report.standard_error) {
      std::cerr << "check failed (rep " << rep << "): abs_err " << abs_err
                << " exceeds " << *cfg.check_max_abs_err_sigma
                << " standard errors\n";
      ok = false;
    }
  }
  return ok;
}

povmkit::Axis parse_axis(const std::string& s) {
  if (s == "X") return povmkit::Axis::X;
  if (s == "Y") return povmkit::Axis::Y;
  if (s == "Z") return povmkit::Axis::Z;
  throw povmkit::ConfigError("--basis must be X, Y, or Z");
}

void emit(const std::optional<std::string>& path, const std::string& text) {
  if (path) {
    povmkit::write_text_file(*path, text);
  } else {
    std::cout << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Pauli-POVM measurement simulation and estimation"};
  app.require_subcommand(1);

  // run
  std::string run_config;
  Overrides run_overrides;
  auto* run = app.add_subcommand(
      "run", "Run a configured experiment and write its bundle");
  run->add_option("--config", run_config, "Experiment config (JSON)")
      ->required();
  add_override_flags(run, run_overrides);

  // compare
  std::string cmp_cs, cmp_lbcs;
  std::optional<std::string> cmp_out;
  auto* cmp = app.add_subcommand(
      "compare", "Paired CS/LBCS comparison at equal total shots");
  cmp->add_option("--cs", cmp_cs, "CS config")->required();
  cmp->add_option("--lbcs", cmp_lbcs, "LBCS config")->required();
  cmp->add_option("-o,--output", cmp_out, "Write the comparison CSV here");

  // qdt
  std::string qdt_config;
  std::optional<std::string> qdt_counts;
  std::optional<std::string> qdt_out;
  auto* qdt = app.add_subcommand(
      "qdt", "Run detector tomography alone, or recover from counts");
  qdt->add_option("--config", qdt_config,
                  "Experiment config providing the noise model and QDT plan");
  qdt->add_option("--counts", qdt_counts,
                  "Recover from an existing counts CSV instead of simulating");
  qdt->add_option("-o,--output", qdt_out, "Output directory");

  // monitor
  std::string mon_stream;
  int mon_shots = 0, mon_qubit = 0, mon_expected = 0;
  std::string mon_basis = "Z";
  std::optional<std::string> mon_out;
  auto* mon = app.add_subcommand(
      "monitor", "Per-job drift series from a shot stream");
  mon->add_option("--stream", mon_stream, "shots.csv from a bundle")
      ->required();
  mon->add_option("--shots-per-setting", mon_shots, "T of the stream")
      ->required();
  mon->add_option("--qubit", mon_qubit, "Qubit index")->required();
  mon->add_option("--basis", mon_basis, "Basis restriction (X|Y|Z)");
  mon->add_option("--expected", mon_expected, "Expected outcome (0|1)");
  mon->add_option("-o,--output", mon_out, "Write the series CSV here");

  // report
  std::string rep_bundle;
  std::string rep_format = "csv";
  std::optional<std::string> rep_out;
  auto* rep = app.add_subcommand(
      "report", "Replay estimation from a bundle's raw streams");
  rep->add_option("--bundle", rep_bundle, "Bundle directory")->required();
  rep->add_option("--format", rep_format, "csv or json");
  rep->add_option("-o,--output", rep_out, "Write the document here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  std::string context;
  try {
    if (run->parsed()) {
      context = " [" + run_config + "]";
      const auto cfg = load_with_overrides(run_config, run_overrides);
      const auto bundle = povmkit::run_experiment(cfg);
      povmkit::write_bundle(bundle, cfg.output_dir);
      std::cout << povmkit::bundle_reports_csv(bundle);
      if (!apply_checks(bundle)) return kExitThreshold;
    } else if (cmp->parsed()) {
      const auto comparison = povmkit::compare_schemes(
          povmkit::load_config(cmp_cs), povmkit::load_config(cmp_lbcs));
      std::string text = povmkit::comparison_csv(comparison);
      emit(cmp_out, text);
      std::cout << "lbcs_std_err_wins " << comparison.lbcs_std_err_wins << "/"
                << comparison.rows.size() << "\n";
    } else if (qdt->parsed()) {
      povmkit::TomographyData data;
      std::vector<povmkit::BasisDistribution> dists;
      if (qdt_counts) {
        data = povmkit::tomography_from_csv(
            povmkit::read_text_file(*qdt_counts));
        dists.assign(data.qubits.size(),
                     povmkit::BasisDistribution::symmetric());
      } else if (!qdt_config.empty()) {
        const auto cfg = povmkit::load_config(qdt_config);
        const auto obs = povmkit::resolve_observable(cfg);
        const int n = obs.num_qubits;
        // Calibration only: no experiment circuits, one leading QDT job.
        const auto schedule = povmkit::regular_schedule(
            0, 1, cfg.qdt_shots, cfg.caps, cfg.slot_seconds);
        const auto model = povmkit::resolve_detector(
            cfg, n, schedule.end_time(),
            povmkit::rng::sub_seed(cfg.seed, 0));
        const auto qdt_run = povmkit::run_qdt_circuits(
            schedule, n, model, povmkit::rng::sub_seed(cfg.seed, 4));
        data = povmkit::TomographyData::from_qdt_run(qdt_run, n);
        if (cfg.scheme == povmkit::Scheme::LBCS) {
          dists = povmkit::lbcs_bias(obs, cfg.basis_floor);
        } else {
          dists.assign(static_cast<std::size_t>(n),
                       povmkit::BasisDistribution::symmetric());
        }
      } else {
        throw povmkit::ConfigError("qdt needs --config or --counts");
      }
      const auto results = povmkit::recover_all(data, dists);
      std::vector<povmkit::LocalPovm> recovered;
      for (const auto& r : results) recovered.push_back(r.povm);
      const std::string povm_text = povmkit::serialize_local_povms(recovered);
      const std::string counts_text = povmkit::tomography_to_csv(data);
      if (qdt_out) {
        povmkit::write_text_file(std::filesystem::path(*qdt_out) /
                                     "povm_qdt.txt",
                                 povm_text);
        povmkit::write_text_file(std::filesystem::path(*qdt_out) /
                                     "qdt_counts.csv",
                                 counts_text);
      } else {
        std::cout << povm_text;
      }
      for (std::size_t q = 0; q < results.size(); ++q) {
        std::cerr << "qubit " << q << ": "
                  << (results[q].converged ? "converged" : "not converged")
                  << " in " << results[q].iterations << " iterations"
                  << (results[q].degenerate_data ? " (degenerate data)" : "")
                  << "\n";
      }
    } else if (mon->parsed()) {
      const auto blocks = povmkit::setting_blocks_from_csv(
          povmkit::read_text_file(mon_stream), mon_shots);
      const auto series = povmkit::drift_monitor(
          blocks, mon_qubit, parse_axis(mon_basis), mon_expected);
      emit(mon_out, povmkit::drift_to_csv(series));
    } else if (rep->parsed()) {
      const auto rows = povmkit::replay_reports(rep_bundle);
      if (rep_format == "csv") {
        emit(rep_out, povmkit::reports_csv(rows));
      } else if (rep_format == "json") {
        emit(rep_out, povmkit::reports_json(rows));
      } else {
        throw povmkit::ConfigError("--format must be csv or json");
      }
    }
  } catch (const povmkit::ConfigError& e) {
    std::cerr << "config error" << context << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const povmkit::ParseError& e) {
    std::cerr << "parse error" << context << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error" << context << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
