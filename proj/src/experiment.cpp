#include "povmkit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "povmkit/io_util.hpp"
#include "povmkit/rng.hpp"

namespace povmkit {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSaltObservable = 1'000'000'007ULL;
constexpr std::uint64_t kSaltNoiseStatic = 1'000'000'009ULL;

[[noreturn]] void config_fail(const std::string& where,
                              const std::string& what) {
  throw ConfigError("config field '" + where + "': " + what);
}

double get_double(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) config_fail(key, "expected a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& key) {
  if (!j.at(key).is_number_integer()) config_fail(key, "expected an integer");
  return j.at(key).get<int>();
}

}  // namespace

void ExperimentConfig::require_valid() const {
  if (observable_file.has_value() == random_observable_spec.has_value()) {
    throw ConfigError(
        "exactly one of observable.file and observable.random is required");
  }
  if (state_bits.has_value() == state_bloch.has_value()) {
    throw ConfigError("exactly one of state.bits and state.bloch is required");
  }
  if (random_observable_spec) {
    if (random_observable_spec->qubits < 1 ||
        random_observable_spec->terms < 1) {
      throw ConfigError("observable.random needs qubits >= 1, terms >= 1");
    }
  }
  if (!(basis_floor > 0.0) || basis_floor > 1.0 / 3.0) {
    throw ConfigError("floor must lie in (0, 1/3]");
  }
  if (settings < 1 || shots_per_setting < 1) {
    throw ConfigError("settings and shots_per_setting must be >= 1");
  }
  if (caps.circuits_per_job < 1 || caps.shots_per_circuit < 1) {
    throw ConfigError("caps must be >= 1");
  }
  if (!(slot_seconds > 0.0)) {
    throw ConfigError("slot_seconds must be positive");
  }
  int sources = 0;
  sources += noise_flip.has_value();
  sources += noise_flips.has_value();
  sources += noise_flip_range.has_value();
  if (sources > 1) {
    throw ConfigError("at most one of noise.flip/.flips/.flip_range");
  }
  auto check_flip = [](double e) {
    if (!(e >= 0.0 && e <= 0.5)) {
      throw ConfigError("flip probabilities must lie in [0, 0.5]");
    }
  };
  if (noise_flip) check_flip(*noise_flip);
  if (noise_flips) {
    for (double e : *noise_flips) check_flip(e);
  }
  if (noise_flip_range) {
    check_flip(noise_flip_range->first);
    check_flip(noise_flip_range->second);
    if (noise_flip_range->first > noise_flip_range->second) {
      throw ConfigError("noise.flip_range must be ordered");
    }
  }
  if (telegraph) {
    if (telegraph->qubit < 0) config_fail("noise.telegraph.qubit", ">= 0");
    if (!(0.0 <= telegraph->e_good && telegraph->e_good <= telegraph->e_bad &&
          telegraph->e_bad <= 0.5)) {
      throw ConfigError("telegraph needs 0 <= e_good <= e_bad <= 0.5");
    }
    if (telegraph->rates.has_value() == telegraph->window.has_value()) {
      throw ConfigError(
          "telegraph needs exactly one of rates and window");
    }
    if (telegraph->window) {
      const auto [a, b] = *telegraph->window;
      if (!(0.0 <= a && a < b && b <= 1.0)) {
        throw ConfigError("telegraph.window must satisfy 0 <= start < end "
                          "<= 1");
      }
    }
    if (telegraph->rates &&
        (telegraph->rates->first < 0.0 || telegraph->rates->second < 0.0)) {
      throw ConfigError("telegraph rates must be >= 0");
    }
  }
  if (run_qdt) {
    if (qdt_shots < 1) throw ConfigError("qdt.shots must be >= 1");
    if (schedule_mode == ScheduleMode::Blended && qdt_repeats_per_job < 1) {
      throw ConfigError("qdt.repeats_per_job must be >= 1");
    }
  }
  if (use_qdt_effects && !run_qdt) {
    throw ConfigError("use_qdt_effects requires qdt.enabled");
  }
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  ExperimentConfig cfg;
  try {
    const json& obs = j.at("observable");
    if (obs.contains("file")) {
      cfg.observable_file = obs.at("file").get<std::string>();
    }
    if (obs.contains("random")) {
      const json& r = obs.at("random");
      ExperimentConfig::RandomSpec spec;
      spec.qubits = get_int(r, "qubits");
      spec.terms = get_int(r, "terms");
      spec.scale = r.contains("scale") ? get_double(r, "scale") : 1.0;
      if (r.contains("axis_weights")) {
        const auto w = r.at("axis_weights").get<std::vector<double>>();
        if (w.size() != 4) {
          config_fail("observable.random.axis_weights", "needs 4 entries");
        }
        std::copy(w.begin(), w.end(), spec.options.axis_weights.begin());
      }
      if (r.contains("decay")) spec.options.decay = get_double(r, "decay");
      cfg.random_observable_spec = spec;
    }

    const json& state = j.at("state");
    if (state.contains("bits")) {
      cfg.state_bits = state.at("bits").get<std::string>();
    }
    if (state.contains("bloch")) {
      cfg.state_bloch =
          state.at("bloch").get<std::vector<std::pair<double, double>>>();
    }

    if (j.contains("scheme")) {
      const auto s = j.at("scheme").get<std::string>();
      if (s == "cs") cfg.scheme = Scheme::CS;
      else if (s == "lbcs") cfg.scheme = Scheme::LBCS;
      else config_fail("scheme", "must be 'cs' or 'lbcs'");
    }
    if (j.contains("floor")) cfg.basis_floor = get_double(j, "floor");
    cfg.settings = get_int(j, "settings");
    cfg.shots_per_setting = get_int(j, "shots_per_setting");
    if (j.contains("caps")) {
      cfg.caps.circuits_per_job = get_int(j.at("caps"), "circuits_per_job");
      cfg.caps.shots_per_circuit = get_int(j.at("caps"), "shots_per_circuit");
    }
    if (j.contains("slot_seconds")) {
      cfg.slot_seconds = get_double(j, "slot_seconds");
    }

    if (j.contains("noise")) {
      const json& noise = j.at("noise");
      if (noise.contains("flip")) cfg.noise_flip = get_double(noise, "flip");
      if (noise.contains("flips")) {
        cfg.noise_flips = noise.at("flips").get<std::vector<double>>();
      }
      if (noise.contains("flip_range")) {
        const auto r = noise.at("flip_range").get<std::vector<double>>();
        if (r.size() != 2) config_fail("noise.flip_range", "needs 2 entries");
        cfg.noise_flip_range = {r[0], r[1]};
      }
      if (noise.contains("telegraph")) {
        const json& t = noise.at("telegraph");
        ExperimentConfig::TelegraphSpec spec;
        spec.qubit = get_int(t, "qubit");
        spec.e_good = get_double(t, "e_good");
        spec.e_bad = get_double(t, "e_bad");
        if (t.contains("e_good_reverse")) {
          spec.e_good_reverse = get_double(t, "e_good_reverse");
        }
        if (t.contains("e_bad_reverse")) {
          spec.e_bad_reverse = get_double(t, "e_bad_reverse");
        }
        if (t.contains("rates")) {
          const auto r = t.at("rates").get<std::vector<double>>();
          if (r.size() != 2) {
            config_fail("noise.telegraph.rates", "needs 2 entries");
          }
          spec.rates = {r[0], r[1]};
        }
        if (t.contains("window")) {
          const auto w = t.at("window").get<std::vector<double>>();
          if (w.size() != 2) {
            config_fail("noise.telegraph.window", "needs 2 entries");
          }
          spec.window = {w[0], w[1]};
        }
        cfg.telegraph = spec;
      }
    }

    if (j.contains("schedule")) {
      const auto s = j.at("schedule").get<std::string>();
      if (s == "blended") cfg.schedule_mode = ScheduleMode::Blended;
      else if (s == "regular") cfg.schedule_mode = ScheduleMode::Regular;
      else config_fail("schedule", "must be 'blended' or 'regular'");
    }
    if (j.contains("qdt")) {
      const json& q = j.at("qdt");
      if (q.contains("enabled")) cfg.run_qdt = q.at("enabled").get<bool>();
      if (q.contains("repeats_per_job")) {
        cfg.qdt_repeats_per_job = get_int(q, "repeats_per_job");
      }
      if (q.contains("shots")) cfg.qdt_shots = get_int(q, "shots");
    }
    if (j.contains("use_qdt_effects")) {
      cfg.use_qdt_effects = j.at("use_qdt_effects").get<bool>();
    }
    if (!cfg.run_qdt) cfg.use_qdt_effects = false;
    if (j.contains("repetitions")) cfg.repetitions = get_int(j, "repetitions");
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output")) {
      cfg.output_dir = j.at("output").get<std::string>();
    }
    if (j.contains("checks")) {
      const json& c = j.at("checks");
      if (c.contains("max_abs_err")) {
        cfg.check_max_abs_err = get_double(c, "max_abs_err");
      }
      if (c.contains("max_std_err")) {
        cfg.check_max_std_err = get_double(c, "max_std_err");
      }
      if (c.contains("max_abs_err_sigma")) {
        cfg.check_max_abs_err_sigma = get_double(c, "max_abs_err_sigma");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.require_valid();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return config_from_json_text(text);
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j;
  j["schema"] = 1;
  if (cfg.observable_file) {
    j["observable"]["file"] = *cfg.observable_file;
  } else {
    json r;
    r["qubits"] = cfg.random_observable_spec->qubits;
    r["terms"] = cfg.random_observable_spec->terms;
    r["scale"] = cfg.random_observable_spec->scale;
    r["axis_weights"] = cfg.random_observable_spec->options.axis_weights;
    r["decay"] = cfg.random_observable_spec->options.decay;
    j["observable"]["random"] = r;
  }
  if (cfg.state_bits) {
    j["state"]["bits"] = *cfg.state_bits;
  } else {
    j["state"]["bloch"] = *cfg.state_bloch;
  }
  j["scheme"] = cfg.scheme == Scheme::CS ? "cs" : "lbcs";
  j["floor"] = cfg.basis_floor;
  j["settings"] = cfg.settings;
  j["shots_per_setting"] = cfg.shots_per_setting;
  j["caps"]["circuits_per_job"] = cfg.caps.circuits_per_job;
  j["caps"]["shots_per_circuit"] = cfg.caps.shots_per_circuit;
  j["slot_seconds"] = cfg.slot_seconds;
  json noise = json::object();
  if (cfg.noise_flip) noise["flip"] = *cfg.noise_flip;
  if (cfg.noise_flips) noise["flips"] = *cfg.noise_flips;
  if (cfg.noise_flip_range) {
    noise["flip_range"] = {cfg.noise_flip_range->first,
                           cfg.noise_flip_range->second};
  }
  if (cfg.telegraph) {
    json t;
    t["qubit"] = cfg.telegraph->qubit;
    t["e_good"] = cfg.telegraph->e_good;
    t["e_bad"] = cfg.telegraph->e_bad;
    if (cfg.telegraph->e_good_reverse) {
      t["e_good_reverse"] = *cfg.telegraph->e_good_reverse;
    }
    if (cfg.telegraph->e_bad_reverse) {
      t["e_bad_reverse"] = *cfg.telegraph->e_bad_reverse;
    }
    if (cfg.telegraph->rates) {
      t["rates"] = {cfg.telegraph->rates->first, cfg.telegraph->rates->second};
    }
    if (cfg.telegraph->window) {
      t["window"] = {cfg.telegraph->window->first,
                     cfg.telegraph->window->second};
    }
    noise["telegraph"] = t;
  }
  j["noise"] = noise;
  j["schedule"] =
      cfg.schedule_mode == ScheduleMode::Blended ? "blended" : "regular";
  j["qdt"]["enabled"] = cfg.run_qdt;
  j["qdt"]["repeats_per_job"] = cfg.qdt_repeats_per_job;
  j["qdt"]["shots"] = cfg.qdt_shots;
  j["use_qdt_effects"] = cfg.use_qdt_effects;
  j["repetitions"] = cfg.repetitions;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output_dir;
  if (cfg.check_max_abs_err || cfg.check_max_std_err ||
      cfg.check_max_abs_err_sigma) {
    json c = json::object();
    if (cfg.check_max_abs_err) c["max_abs_err"] = *cfg.check_max_abs_err;
    if (cfg.check_max_std_err) c["max_std_err"] = *cfg.check_max_std_err;
    if (cfg.check_max_abs_err_sigma) {
      c["max_abs_err_sigma"] = *cfg.check_max_abs_err_sigma;
    }
    j["checks"] = c;
  }
  return j.dump(2) + "\n";
}

namespace {

Observable build_observable(const ExperimentConfig& cfg) {
  if (cfg.observable_file) {
    return parse_observable(read_text_file(*cfg.observable_file));
  }
  const auto& spec = *cfg.random_observable_spec;
  return random_observable(spec.qubits, spec.terms, spec.scale,
                           rng::sub_seed(cfg.seed, kSaltObservable),
                           spec.options);
}

ProductState build_state(const ExperimentConfig& cfg, int num_qubits) {
  ProductState state;
  if (cfg.state_bits) {
    state = ProductState::computational(*cfg.state_bits);
  } else {
    state = ProductState::from_bloch(*cfg.state_bloch);
  }
  if (state.num_qubits() != num_qubits) {
    throw ConfigError("state covers " + std::to_string(state.num_qubits()) +
                      " qubits, observable needs " +
                      std::to_string(num_qubits));
  }
  return state;
}

std::vector<double> build_static_flips(const ExperimentConfig& cfg,
                                       int num_qubits) {
  const auto n = static_cast<std::size_t>(num_qubits);
  if (cfg.noise_flips) {
    if (cfg.noise_flips->size() != n) {
      throw ConfigError("noise.flips needs one entry per qubit");
    }
    return *cfg.noise_flips;
  }
  if (cfg.noise_flip) {
    return std::vector<double>(n, *cfg.noise_flip);
  }
  if (cfg.noise_flip_range) {
    const auto [lo, hi] = *cfg.noise_flip_range;
    std::vector<double> flips(n);
    const std::uint64_t noise_seed = rng::sub_seed(cfg.seed, kSaltNoiseStatic);
    for (std::size_t q = 0; q < n; ++q) {
      flips[q] =
          lo + (hi - lo) * rng::uniform01(noise_seed, rng::Stream::NoiseStatic,
                                          q);
    }
    return flips;
  }
  return std::vector<double>(n, 0.0);
}

/// Settings packed into capped jobs, no calibration circuits.
Schedule experiment_only_schedule(const ExperimentConfig& cfg) {
  Schedule schedule;
  schedule.mode = ScheduleMode::Regular;
  schedule.slot_seconds = cfg.slot_seconds;
  int job_index = 0;
  int next_setting = 0;
  while (next_setting < cfg.settings) {
    Job job;
    job.index = job_index;
    job.slot_start = static_cast<double>(job_index) * cfg.slot_seconds;
    ++job_index;
    while (next_setting < cfg.settings &&
           static_cast<int>(job.circuits.size()) < cfg.caps.circuits_per_job) {
      job.circuits.push_back(
          {CircuitKind::Experiment, next_setting++, cfg.shots_per_setting});
    }
    schedule.jobs.push_back(std::move(job));
  }
  return schedule;
}

DetectorModel build_model(const ExperimentConfig& cfg, int num_qubits,
                          double duration, std::uint64_t rep_seed) {
  DetectorModel model =
      DetectorModel::static_flips(build_static_flips(cfg, num_qubits));
  if (cfg.telegraph) {
    const auto& spec = *cfg.telegraph;
    if (spec.qubit >= num_qubits) {
      throw ConfigError("telegraph qubit index out of range");
    }
    TelegraphProcess proc;
    proc.e_good = spec.e_good;
    proc.e_bad = spec.e_bad;
    proc.e_good_reverse = spec.e_good_reverse;
    proc.e_bad_reverse = spec.e_bad_reverse;
    const auto q = static_cast<std::size_t>(spec.qubit);
    if (spec.rates) {
      proc.rate_good_to_bad = spec.rates->first;
      proc.rate_bad_to_good = spec.rates->second;
      proc.initial = TelegraphProcess::Initial::Stationary;
      model.telegraph[q] = proc;
      model.trajectories[q] = sample_regime_trajectory(
          proc, duration, rng::sub_seed(rep_seed, 2));
    } else {
      model.telegraph[q] = proc;
      RegimeTrajectory traj;
      traj.duration = duration;
      const double a = spec.window->first * duration;
      const double b = spec.window->second * duration;
      if (a > 0.0) traj.segments.push_back({0.0, Regime::Good});
      traj.segments.push_back({a, Regime::Bad});
      if (b < duration) traj.segments.push_back({b, Regime::Good});
      model.trajectories[q] = std::move(traj);
    }
  }
  return model;
}

std::vector<std::int64_t> curve_grid(int settings) {
  std::vector<std::int64_t> grid;
  if (settings < 4) {
    grid.push_back(settings);
    return grid;
  }
  const double lo = std::max(2.0, static_cast<double>(settings) / 1000.0);
  const double hi = static_cast<double>(settings);
  const int points = 16;
  for (int k = 0; k < points; ++k) {
    const double f = static_cast<double>(k) / (points - 1);
    const auto s = static_cast<std::int64_t>(
        std::llround(lo * std::pow(hi / lo, f)));
    if (grid.empty() || s > grid.back()) grid.push_back(s);
  }
  if (grid.back() != settings) grid.push_back(settings);
  return grid;
}

}  // namespace

Observable resolve_observable(const ExperimentConfig& config) {
  config.require_valid();
  return build_observable(config);
}

DetectorModel resolve_detector(const ExperimentConfig& config, int num_qubits,
                               double duration, std::uint64_t rep_seed) {
  return build_model(config, num_qubits, duration, rep_seed);
}

ExperimentBundle run_experiment(const ExperimentConfig& config) {
  config.require_valid();

  ExperimentBundle bundle;
  bundle.config = config;
  bundle.observable = build_observable(config);
  const int n = bundle.observable.num_qubits;
  bundle.state = build_state(config, n);

  std::vector<BasisDistribution> dists;
  if (config.scheme == Scheme::LBCS) {
    dists = lbcs_bias(bundle.observable, config.basis_floor);
  } else {
    dists.assign(static_cast<std::size_t>(n), BasisDistribution::symmetric());
  }
  const ProductPovm ideal_povm = make_product_povm([&] {
    std::vector<LocalPovm> locals;
    locals.reserve(dists.size());
    for (const auto& d : dists) locals.push_back(ideal_local_povm(d));
    return locals;
  }());

  const ExperimentPlan plan{config.settings, config.shots_per_setting,
                            config.caps, config.seed};
  plan.require_valid();
  Schedule schedule;
  if (!config.run_qdt) {
    schedule = experiment_only_schedule(config);
  } else if (config.schedule_mode == ScheduleMode::Blended) {
    schedule = blended_schedule(plan, config.qdt_repeats_per_job,
                                config.qdt_shots, config.slot_seconds);
  } else {
    schedule = regular_schedule(plan, config.qdt_shots, config.slot_seconds);
  }

  const double reference = exact_expectation(bundle.observable, bundle.state);
  const auto grid = curve_grid(config.settings);

  for (int rep = 0; rep < config.repetitions; ++rep) {
    RepetitionResult result;
    result.rep_seed = rng::sub_seed(config.seed, static_cast<std::uint64_t>(rep));
    result.dists = dists;
    result.schedule = schedule;
    result.model =
        build_model(config, n, schedule.end_time(), result.rep_seed);
    result.reference_energy = reference;

    const auto settings = sample_settings(dists, config.settings,
                                          rng::sub_seed(result.rep_seed, 1));
    result.blocks =
        simulate_shots(bundle.state, settings, config.shots_per_setting,
                       result.model, schedule, rng::sub_seed(result.rep_seed, 3));

    result.ideal_report = estimate(bundle.observable, ideal_povm,
                                   result.blocks);
    result.ideal_curve = error_vs_shots_curve(result.blocks, bundle.observable,
                                              ideal_povm, grid, reference);

    result.has_qdt = config.run_qdt;
    if (config.run_qdt) {
      result.qdt_run = run_qdt_circuits(schedule, n, result.model,
                                        rng::sub_seed(result.rep_seed, 4));
      result.tomography = TomographyData::from_qdt_run(result.qdt_run, n);
      result.recoveries = recover_all(result.tomography, dists);
      // The with/without-QDT contrast is always available from one run.
      std::vector<LocalPovm> recovered;
      recovered.reserve(result.recoveries.size());
      for (const auto& r : result.recoveries) recovered.push_back(r.povm);
      const ProductPovm qdt_povm = make_product_povm(std::move(recovered));
      result.qdt_report = estimate(bundle.observable, qdt_povm, result.blocks);
      result.qdt_curve = error_vs_shots_curve(
          result.blocks, bundle.observable, qdt_povm, grid, reference);
    }
    bundle.repetitions.push_back(std::move(result));
  }
  return bundle;
}

namespace {

std::string rep_dir_name(int rep) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "rep%03d", rep);
  return buf;
}

std::string rep_label(int rep, const char* kind) {
  return rep_dir_name(rep) + "/" + kind;
}

}  // namespace

ReportRows bundle_report_rows(const ExperimentBundle& bundle) {
  ReportRows rows;
  for (std::size_t rep = 0; rep < bundle.repetitions.size(); ++rep) {
    const auto& r = bundle.repetitions[rep];
    rows.reference_energy = r.reference_energy;
    rows.rows.push_back({rep_label(static_cast<int>(rep), "ideal"),
                         r.ideal_report,
                         absolute_error(r.ideal_report, r.reference_energy)});
    if (r.qdt_report) {
      rows.rows.push_back(
          {rep_label(static_cast<int>(rep), "qdt"), *r.qdt_report,
           absolute_error(*r.qdt_report, r.reference_energy)});
    }
  }
  return rows;
}

std::string reports_csv(const ReportRows& rows) {
  std::string out = report_csv_header();
  for (const auto& row : rows.rows) {
    out += report_csv_row(row.label, row.report, row.abs_error);
  }
  return out;
}

std::string reports_json(const ReportRows& rows) {
  json reports = json::array();
  for (const auto& row : rows.rows) {
    json r;
    r["label"] = row.label;
    r["S"] = row.report.settings;
    r["T"] = row.report.shots_per_setting;
    r["mean"] = row.report.mean;
    r["variance"] = row.report.variance;
    r["std_err"] = row.report.standard_error
                       ? json(*row.report.standard_error)
                       : json(nullptr);
    r["abs_err"] = row.abs_error;
    r["saving_factor"] = row.report.saving_factor
                             ? json(*row.report.saving_factor)
                             : json(nullptr);
    r["variance_clamped"] = row.report.variance_clamped;
    reports.push_back(r);
  }
  json root;
  root["schema"] = 1;
  root["reference_energy"] = rows.reference_energy;
  root["reports"] = reports;
  return root.dump(2) + "\n";
}

std::string bundle_reports_csv(const ExperimentBundle& bundle) {
  return reports_csv(bundle_report_rows(bundle));
}

std::string bundle_reports_json(const ExperimentBundle& bundle) {
  return reports_json(bundle_report_rows(bundle));
}

void write_bundle(const ExperimentBundle& bundle,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "config.json", config_to_json_text(bundle.config));
  write_text_file(dir / "observable.txt",
                  serialize_observable(bundle.observable));
  write_text_file(dir / "reports.csv", bundle_reports_csv(bundle));
  write_text_file(dir / "reports.json", bundle_reports_json(bundle));

  for (std::size_t rep = 0; rep < bundle.repetitions.size(); ++rep) {
    const auto& r = bundle.repetitions[rep];
    const auto rep_dir = dir / rep_dir_name(static_cast<int>(rep));
    std::filesystem::create_directories(rep_dir);
    write_text_file(rep_dir / "schedule.csv", schedule_to_csv(r.schedule));
    write_text_file(rep_dir / "shots.csv", setting_blocks_to_csv(r.blocks));

    std::vector<LocalPovm> ideal_locals;
    for (const auto& d : r.dists) ideal_locals.push_back(ideal_local_povm(d));
    write_text_file(rep_dir / "povm_ideal.txt",
                    serialize_local_povms(ideal_locals));
    if (r.has_qdt) {
      write_text_file(rep_dir / "qdt_counts.csv",
                      tomography_to_csv(r.tomography));
      std::vector<LocalPovm> recovered;
      for (const auto& rec : r.recoveries) recovered.push_back(rec.povm);
      write_text_file(rep_dir / "povm_qdt.txt",
                      serialize_local_povms(recovered));
    }
    if (r.model.has_fluctuation()) {
      write_text_file(rep_dir / "trajectory.csv",
                      trajectories_to_csv(r.model));
    }
    write_text_file(rep_dir / "curve_ideal.csv", curve_csv(r.ideal_curve));
    if (!r.qdt_curve.empty()) {
      write_text_file(rep_dir / "curve_qdt.csv", curve_csv(r.qdt_curve));
    }
  }
}

ReportRows replay_reports(const std::filesystem::path& dir) {
  const ExperimentConfig config = load_config(dir / "config.json");
  const Observable obs =
      parse_observable(read_text_file(dir / "observable.txt"));
  ProductState state;
  if (config.state_bits) {
    state = ProductState::computational(*config.state_bits);
  } else {
    state = ProductState::from_bloch(*config.state_bloch);
  }
  ReportRows rows;
  rows.reference_energy = exact_expectation(obs, state);

  for (int rep = 0; rep < config.repetitions; ++rep) {
    const auto rep_dir = dir / rep_dir_name(rep);
    const auto blocks =
        setting_blocks_from_csv(read_text_file(rep_dir / "shots.csv"),
                                config.shots_per_setting);
    const auto ideal_locals =
        parse_local_povms(read_text_file(rep_dir / "povm_ideal.txt"));
    const ProductPovm ideal_povm = make_product_povm(ideal_locals);
    const EstimateReport ideal_report = estimate(obs, ideal_povm, blocks);
    rows.rows.push_back(
        {rep_label(rep, "ideal"), ideal_report,
         absolute_error(ideal_report, rows.reference_energy)});
    const auto qdt_path = rep_dir / "povm_qdt.txt";
    if (std::filesystem::exists(qdt_path)) {
      const auto qdt_locals = parse_local_povms(read_text_file(qdt_path));
      const ProductPovm qdt_povm = make_product_povm(qdt_locals);
      const EstimateReport qdt_report = estimate(obs, qdt_povm, blocks);
      rows.rows.push_back(
          {rep_label(rep, "qdt"), qdt_report,
           absolute_error(qdt_report, rows.reference_energy)});
    }
  }
  return rows;
}

std::string replay_reports_csv(const std::filesystem::path& dir) {
  return reports_csv(replay_reports(dir));
}

SchemeComparison compare_schemes(const ExperimentConfig& cs_config,
                                 const ExperimentConfig& lbcs_config) {
  if (cs_config.scheme != Scheme::CS || lbcs_config.scheme != Scheme::LBCS) {
    throw ConfigError("compare needs a CS config and an LBCS config");
  }
  auto stripped = [](ExperimentConfig c) {
    c.scheme = Scheme::CS;
    c.output_dir.clear();
    return config_to_json_text(c);
  };
  if (stripped(cs_config) != stripped(lbcs_config)) {
    throw ConfigError(
        "compare requires identical observable/state/noise/plan across the "
        "pair (only the scheme may differ)");
  }

  const ExperimentBundle cs = run_experiment(cs_config);
  const ExperimentBundle lbcs = run_experiment(lbcs_config);
  if (cs.observable.num_qubits != lbcs.observable.num_qubits) {
    throw ConfigError("compared experiments differ in qubit count");
  }

  SchemeComparison comparison;
  for (std::size_t rep = 0; rep < cs.repetitions.size(); ++rep) {
    const auto& rc = cs.repetitions[rep];
    const auto& rl = lbcs.repetitions[rep];
    const bool use_qdt = cs_config.use_qdt_effects;
    const EstimateReport& cr =
        use_qdt && rc.qdt_report ? *rc.qdt_report : rc.ideal_report;
    const EstimateReport& lr =
        use_qdt && rl.qdt_report ? *rl.qdt_report : rl.ideal_report;
    if (!cr.standard_error || !lr.standard_error) {
      throw ConfigError("compare needs S >= 2 for standard errors");
    }
    SchemeComparison::Row row;
    row.rep = static_cast<int>(rep);
    row.cs_std_err = *cr.standard_error;
    row.lbcs_std_err = *lr.standard_error;
    row.cs_abs_err = absolute_error(cr, rc.reference_energy);
    row.lbcs_abs_err = absolute_error(lr, rl.reference_energy);
    if (row.lbcs_std_err < row.cs_std_err) ++comparison.lbcs_std_err_wins;
    comparison.rows.push_back(row);
  }
  return comparison;
}

std::string comparison_csv(const SchemeComparison& comparison) {
  std::string out = "rep,cs_std_err,lbcs_std_err,cs_abs_err,lbcs_abs_err\n";
  for (const auto& row : comparison.rows) {
    out += std::to_string(row.rep) + "," + fmt_g17(row.cs_std_err) + "," +
           fmt_g17(row.lbcs_std_err) + "," + fmt_g17(row.cs_abs_err) + "," +
           fmt_g17(row.lbcs_abs_err) + "\n";
  }
  return out;
}

}  // namespace povmkit
