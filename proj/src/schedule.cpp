#include "povmkit/schedule.hpp"

#include <stdexcept>

#include "povmkit/io_util.hpp"

namespace povmkit {

std::uint64_t Schedule::total_shots() const {
  std::uint64_t total = 0;
  for (const auto& job : jobs) {
    for (const auto& c : job.circuits) {
      total += static_cast<std::uint64_t>(c.shots);
    }
  }
  return total;
}

namespace {

void check_plan(int num_settings, int shots_per_setting, const JobCaps& caps) {
  if (num_settings < 0 || (num_settings > 0 && shots_per_setting < 1)) {
    throw std::invalid_argument("experiment plan requires S >= 0, T >= 1");
  }
  if (caps.circuits_per_job < 1 || caps.shots_per_circuit < 1) {
    throw std::invalid_argument("job caps must be >= 1");
  }
  if (num_settings > 0 && shots_per_setting > caps.shots_per_circuit) {
    throw std::invalid_argument(
        "shots per setting exceed the shots-per-circuit cap");
  }
}

Job make_job(int index, double slot_seconds) {
  Job job;
  job.index = index;
  job.slot_start = static_cast<double>(index) * slot_seconds;
  return job;
}

}  // namespace

Schedule blended_schedule(int num_settings, int shots_per_setting,
                          int qdt_repeats_per_job, int qdt_shots_per_instance,
                          const JobCaps& caps, double slot_seconds) {
  check_plan(num_settings, shots_per_setting, caps);
  if (qdt_repeats_per_job < 1 || qdt_shots_per_instance < 1) {
    throw std::invalid_argument("blended schedule requires QDT repeats and "
                                "shots >= 1");
  }
  if (qdt_shots_per_instance > caps.shots_per_circuit) {
    throw std::invalid_argument(
        "QDT shots per instance exceed the shots-per-circuit cap");
  }
  const int qdt_per_job = qdt_repeats_per_job * kQdtCircuitCount;
  const int exp_per_job = caps.circuits_per_job - qdt_per_job;
  if (exp_per_job < 1) {
    throw std::invalid_argument(
        "circuits-per-job cap cannot fit the QDT block plus one experiment "
        "circuit");
  }

  Schedule schedule;
  schedule.mode = ScheduleMode::Blended;
  schedule.slot_seconds = slot_seconds;

  int next_setting = 0;
  int job_index = 0;
  while (next_setting < num_settings || job_index == 0) {
    Job job = make_job(job_index++, slot_seconds);
    const int exp_count =
        std::min(exp_per_job, num_settings - next_setting);
    // Even interleave: QDT instance k goes after floor(k * E / Q)
    // experiment circuits.
    int emitted_exp = 0;
    for (int k = 0; k < qdt_per_job; ++k) {
      const int target = exp_count * k / qdt_per_job;
      while (emitted_exp < target) {
        job.circuits.push_back(
            {CircuitKind::Experiment, next_setting++, shots_per_setting});
        ++emitted_exp;
      }
      job.circuits.push_back(
          {CircuitKind::Qdt, k % kQdtCircuitCount, qdt_shots_per_instance});
    }
    while (emitted_exp < exp_count) {
      job.circuits.push_back(
          {CircuitKind::Experiment, next_setting++, shots_per_setting});
      ++emitted_exp;
    }
    schedule.jobs.push_back(std::move(job));
    if (num_settings == 0) break;
  }
  return schedule;
}

Schedule regular_schedule(int num_settings, int shots_per_setting,
                          int qdt_shots, const JobCaps& caps,
                          double slot_seconds) {
  check_plan(num_settings, shots_per_setting, caps);
  if (qdt_shots < 1) {
    throw std::invalid_argument("regular schedule requires QDT shots >= 1");
  }

  Schedule schedule;
  schedule.mode = ScheduleMode::Regular;
  schedule.slot_seconds = slot_seconds;

  int job_index = 0;
  // Leading QDT job(s); the shots-per-circuit cap applies to experiment
  // circuits only, so a full-statistics calibration fits one job.
  int next_circuit = 0;
  while (next_circuit < kQdtCircuitCount) {
    Job job = make_job(job_index++, slot_seconds);
    while (next_circuit < kQdtCircuitCount &&
           static_cast<int>(job.circuits.size()) < caps.circuits_per_job) {
      job.circuits.push_back({CircuitKind::Qdt, next_circuit++, qdt_shots});
    }
    schedule.jobs.push_back(std::move(job));
  }
  int next_setting = 0;
  while (next_setting < num_settings) {
    Job job = make_job(job_index++, slot_seconds);
    while (next_setting < num_settings &&
           static_cast<int>(job.circuits.size()) < caps.circuits_per_job) {
      job.circuits.push_back(
          {CircuitKind::Experiment, next_setting++, shots_per_setting});
    }
    schedule.jobs.push_back(std::move(job));
  }
  return schedule;
}

std::vector<int> setting_to_job(const Schedule& schedule) {
  std::vector<int> map;
  for (const auto& job : schedule.jobs) {
    for (const auto& c : job.circuits) {
      if (c.kind != CircuitKind::Experiment) continue;
      if (c.id >= static_cast<int>(map.size())) {
        map.resize(static_cast<std::size_t>(c.id) + 1, -1);
      }
      if (map[static_cast<std::size_t>(c.id)] != -1) {
        throw std::logic_error("setting appears in two jobs");
      }
      map[static_cast<std::size_t>(c.id)] = job.index;
    }
  }
  for (std::size_t s = 0; s < map.size(); ++s) {
    if (map[s] == -1) {
      throw std::logic_error("setting " + std::to_string(s) +
                             " missing from schedule");
    }
  }
  return map;
}

std::vector<QdtInstance> qdt_instances(const Schedule& schedule) {
  std::vector<QdtInstance> instances;
  for (const auto& job : schedule.jobs) {
    for (const auto& c : job.circuits) {
      if (c.kind == CircuitKind::Qdt) {
        instances.push_back({job.index, job.slot_start, c.id, c.shots});
      }
    }
  }
  return instances;
}

std::string schedule_to_csv(const Schedule& schedule) {
  std::string out = "job,slot_start,circuit_kind,circuit_id,shots\n";
  for (const auto& job : schedule.jobs) {
    for (const auto& c : job.circuits) {
      out += std::to_string(job.index) + "," + fmt_g17(job.slot_start) + "," +
             (c.kind == CircuitKind::Experiment ? "experiment" : "qdt") + "," +
             std::to_string(c.id) + "," + std::to_string(c.shots) + "\n";
    }
  }
  return out;
}

}  // namespace povmkit
