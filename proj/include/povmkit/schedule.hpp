#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "povmkit/qdt_circuits.hpp"

namespace povmkit {

enum class CircuitKind { Experiment, Qdt };

/// One circuit submission inside a job: an experiment setting (id = setting
/// index) or a QDT circuit (id = index into qdt_circuit_list()).
struct CircuitRef {
  CircuitKind kind;
  int id;
  int shots;
};

struct JobCaps {
  int circuits_per_job = 300;
  int shots_per_circuit = 100;
};

struct Job {
  int index = 0;
  double slot_start = 0.0;
  std::vector<CircuitRef> circuits;
};

enum class ScheduleMode { Regular, Blended };

/// Ordered jobs covering every planned (circuit, shot) exactly once. Jobs
/// map to time through fixed wall-time slots; a job is one time point.
struct Schedule {
  ScheduleMode mode = ScheduleMode::Blended;
  double slot_seconds = 10.0;
  std::vector<Job> jobs;

  double end_time() const {
    return static_cast<double>(jobs.size()) * slot_seconds;
  }
  std::uint64_t total_shots() const;
};

/// Every job carries `qdt_repeats_per_job` copies of each of the twelve QDT
/// circuits, spread evenly among the experiment circuits by a deterministic
/// round-robin interleave; experiment circuits keep plan order.
Schedule blended_schedule(int num_settings, int shots_per_setting,
                          int qdt_repeats_per_job, int qdt_shots_per_instance,
                          const JobCaps& caps, double slot_seconds = 10.0);

/// All QDT circuits in leading job(s) at `qdt_shots` each, then experiment
/// jobs. The non-blended baseline.
Schedule regular_schedule(int num_settings, int shots_per_setting,
                          int qdt_shots, const JobCaps& caps,
                          double slot_seconds = 10.0);

/// job index for each experiment setting, indexed by setting id.
std::vector<int> setting_to_job(const Schedule& schedule);

struct QdtInstance {
  int job;
  double time;
  int circuit;  // index into qdt_circuit_list()
  int shots;
};
std::vector<QdtInstance> qdt_instances(const Schedule& schedule);

/// CSV rows `job,slot_start,circuit_kind,circuit_id,shots`.
std::string schedule_to_csv(const Schedule& schedule);

}  // namespace povmkit
