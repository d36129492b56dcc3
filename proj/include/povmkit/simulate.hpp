#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "povmkit/detector.hpp"
#include "povmkit/pauli.hpp"
#include "povmkit/povm.hpp"
#include "povmkit/qdt_circuits.hpp"
#include "povmkit/schedule.hpp"

namespace povmkit {

/// One joint choice of per-qubit measurement basis.
using MeasurementSetting = std::vector<Axis>;

/// All shots of one measurement setting, with job/time provenance. Outcomes
/// are bit-packed, qubit q at bit q, in shot order.
struct SettingBlock {
  MeasurementSetting setting;
  std::vector<std::uint64_t> outcomes;
  int job_index = 0;
  double timestamp = 0.0;

  int shots() const { return static_cast<int>(outcomes.size()); }
};

struct ExperimentPlan {
  int num_settings = 1;       // S
  int shots_per_setting = 1;  // T
  JobCaps caps;
  std::uint64_t seed = 0;

  void require_valid() const;
};

/// Schedule builders driven by a validated plan.
Schedule blended_schedule(const ExperimentPlan& plan, int qdt_repeats_per_job,
                          int qdt_shots_per_instance,
                          double slot_seconds = 10.0);
Schedule regular_schedule(const ExperimentPlan& plan, int qdt_shots,
                          double slot_seconds = 10.0);

/// S independent settings, each qubit's basis drawn from its distribution.
/// Fully determined by (dists, num_settings, seed).
std::vector<MeasurementSetting> sample_settings(
    std::span<const BasisDistribution> dists, int num_settings,
    std::uint64_t seed);

/// Samples every experiment circuit in the schedule: per qubit, the ideal
/// projective outcome in the setting's basis, then the effective assignment
/// error at the shot's job time. Qubits are independent by design. Each
/// variate is keyed by (seed, setting, shot, qubit), so the result does not
/// depend on evaluation order.
std::vector<SettingBlock> simulate_shots(const ProductState& state,
                                         std::span<const MeasurementSetting>
                                             settings,
                                         int shots_per_setting,
                                         const DetectorModel& model,
                                         const Schedule& schedule,
                                         std::uint64_t seed);

/// Per-qubit outcome tallies of one QDT circuit instance.
struct QdtSlotCounts {
  int job = 0;
  double time = 0.0;
  int shots = 0;
  std::vector<std::array<std::uint64_t, 2>> counts;  // [qubit][outcome]
};

/// Tomography shots for one (input, basis) circuit over the given schedule
/// slots; the same input state is prepared on every qubit in parallel.
QdtSlotCounts simulate_qdt_shots(QdtInput input, Axis basis, int circuit_id,
                                 int job, double time, int shots,
                                 std::uint64_t shot_offset, int num_qubits,
                                 const DetectorModel& model,
                                 std::uint64_t seed);

/// All QDT data of one schedule: per circuit, its per-slot tallies in
/// schedule order.
struct QdtRun {
  std::array<std::vector<QdtSlotCounts>, kQdtCircuitCount> circuits;

  /// Total counts for one circuit, summed over slots: [qubit][outcome].
  std::vector<std::array<std::uint64_t, 2>> totals(int circuit,
                                                   int num_qubits) const;
};

QdtRun run_qdt_circuits(const Schedule& schedule, int num_qubits,
                        const DetectorModel& model, std::uint64_t seed);

/// Line format `job,timestamp,setting-string,outcome-bits,count`; outcomes
/// of one block are aggregated by count and sorted, rows grouped per block.
std::string setting_blocks_to_csv(std::span<const SettingBlock> blocks);

/// Inverse of setting_blocks_to_csv; `shots_per_setting` delimits blocks.
std::vector<SettingBlock> setting_blocks_from_csv(const std::string& text,
                                                  int shots_per_setting);

}  // namespace povmkit
