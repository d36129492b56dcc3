#include "povmkit/simulate.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "povmkit/io_util.hpp"
#include "povmkit/rng.hpp"

namespace povmkit {

void ExperimentPlan::require_valid() const {
  if (num_settings < 1 || shots_per_setting < 1) {
    throw std::invalid_argument("plan requires S >= 1 and T >= 1");
  }
  if (caps.circuits_per_job < 1 || caps.shots_per_circuit < 1) {
    throw std::invalid_argument("job caps must be >= 1");
  }
}

Schedule blended_schedule(const ExperimentPlan& plan, int qdt_repeats_per_job,
                          int qdt_shots_per_instance, double slot_seconds) {
  plan.require_valid();
  return blended_schedule(plan.num_settings, plan.shots_per_setting,
                          qdt_repeats_per_job, qdt_shots_per_instance,
                          plan.caps, slot_seconds);
}

Schedule regular_schedule(const ExperimentPlan& plan, int qdt_shots,
                          double slot_seconds) {
  plan.require_valid();
  return regular_schedule(plan.num_settings, plan.shots_per_setting, qdt_shots,
                          plan.caps, slot_seconds);
}

std::vector<MeasurementSetting> sample_settings(
    std::span<const BasisDistribution> dists, int num_settings,
    std::uint64_t seed) {
  if (num_settings < 1) {
    throw std::invalid_argument("num_settings must be >= 1");
  }
  for (const auto& d : dists) d.require_valid(0.0);

  std::vector<MeasurementSetting> settings(
      static_cast<std::size_t>(num_settings));
  for (int i = 0; i < num_settings; ++i) {
    MeasurementSetting& setting = settings[static_cast<std::size_t>(i)];
    setting.resize(dists.size());
    for (std::size_t q = 0; q < dists.size(); ++q) {
      const double u =
          rng::uniform01(seed, rng::Stream::Settings,
                         static_cast<std::uint64_t>(i), q);
      double acc = 0.0;
      Axis basis = Axis::Z;
      for (Axis b : kAxes) {
        acc += dists[q][b];
        if (u < acc) {
          basis = b;
          break;
        }
      }
      setting[q] = basis;
    }
  }
  return settings;
}

namespace {

int sample_qubit_outcome(const Eigen::Vector2cd& psi, Axis basis,
                         const AssignmentMatrix& assignment, double u_ideal,
                         double u_readout) {
  const double p1_ideal = 0.5 * (1.0 - bloch_component(psi, basis));
  const int ideal = u_ideal < p1_ideal ? 1 : 0;
  const double p1_reported = assignment.a(1, ideal);
  return u_readout < p1_reported ? 1 : 0;
}

}  // namespace

std::vector<SettingBlock> simulate_shots(const ProductState& state,
                                         std::span<const MeasurementSetting>
                                             settings,
                                         int shots_per_setting,
                                         const DetectorModel& model,
                                         const Schedule& schedule,
                                         std::uint64_t seed) {
  const int n = state.num_qubits();
  if (n < 1 || n > 64) {
    throw std::invalid_argument("simulator supports 1..64 qubits");
  }
  if (model.num_qubits() != n) {
    throw std::invalid_argument("detector model qubit count mismatch");
  }
  if (shots_per_setting < 1) {
    throw std::invalid_argument("shots_per_setting must be >= 1");
  }
  state.validate();

  const std::vector<int> job_of = setting_to_job(schedule);
  if (job_of.size() != settings.size()) {
    throw std::invalid_argument(
        "schedule experiment circuits do not match the setting list");
  }

  std::vector<SettingBlock> blocks(settings.size());
  std::vector<AssignmentMatrix> assignment(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const MeasurementSetting& setting = settings[i];
    if (static_cast<int>(setting.size()) != n) {
      throw std::invalid_argument("setting length mismatch");
    }
    SettingBlock& block = blocks[i];
    block.setting = setting;
    block.job_index = job_of[i];
    block.timestamp =
        schedule.jobs[static_cast<std::size_t>(block.job_index)].slot_start;
    for (int q = 0; q < n; ++q) {
      assignment[static_cast<std::size_t>(q)] =
          effective_assignment(model, q, block.timestamp);
    }
    block.outcomes.resize(static_cast<std::size_t>(shots_per_setting));
    for (int t = 0; t < shots_per_setting; ++t) {
      std::uint64_t packed = 0;
      for (int q = 0; q < n; ++q) {
        const auto qs = static_cast<std::size_t>(q);
        const double u_ideal =
            rng::uniform01(seed, rng::Stream::ShotIdeal,
                           static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(t),
                           static_cast<std::uint64_t>(q));
        const double u_readout =
            rng::uniform01(seed, rng::Stream::ShotReadout,
                           static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(t),
                           static_cast<std::uint64_t>(q));
        const int outcome = sample_qubit_outcome(
            state.qubits[qs], setting[qs], assignment[qs], u_ideal, u_readout);
        packed |= static_cast<std::uint64_t>(outcome) << q;
      }
      block.outcomes[static_cast<std::size_t>(t)] = packed;
    }
  }
  return blocks;
}

QdtSlotCounts simulate_qdt_shots(QdtInput input, Axis basis, int circuit_id,
                                 int job, double time, int shots,
                                 std::uint64_t shot_offset, int num_qubits,
                                 const DetectorModel& model,
                                 std::uint64_t seed) {
  QdtSlotCounts slot;
  slot.job = job;
  slot.time = time;
  slot.shots = shots;
  slot.counts.assign(static_cast<std::size_t>(num_qubits), {0, 0});

  const Eigen::Vector2cd psi = qdt_input_state(input);
  for (int q = 0; q < num_qubits; ++q) {
    const AssignmentMatrix assignment = effective_assignment(model, q, time);
    auto& tally = slot.counts[static_cast<std::size_t>(q)];
    for (int t = 0; t < shots; ++t) {
      const std::uint64_t shot = shot_offset + static_cast<std::uint64_t>(t);
      const double u_ideal =
          rng::uniform01(seed, rng::Stream::QdtIdeal,
                         static_cast<std::uint64_t>(circuit_id), shot,
                         static_cast<std::uint64_t>(q));
      const double u_readout =
          rng::uniform01(seed, rng::Stream::QdtReadout,
                         static_cast<std::uint64_t>(circuit_id), shot,
                         static_cast<std::uint64_t>(q));
      const int outcome =
          sample_qubit_outcome(psi, basis, assignment, u_ideal, u_readout);
      ++tally[static_cast<std::size_t>(outcome)];
    }
  }
  return slot;
}

std::vector<std::array<std::uint64_t, 2>> QdtRun::totals(
    int circuit, int num_qubits) const {
  std::vector<std::array<std::uint64_t, 2>> total(
      static_cast<std::size_t>(num_qubits), {0, 0});
  for (const auto& slot : circuits[static_cast<std::size_t>(circuit)]) {
    for (std::size_t q = 0; q < slot.counts.size(); ++q) {
      total[q][0] += slot.counts[q][0];
      total[q][1] += slot.counts[q][1];
    }
  }
  return total;
}

QdtRun run_qdt_circuits(const Schedule& schedule, int num_qubits,
                        const DetectorModel& model, std::uint64_t seed) {
  const auto list = qdt_circuit_list();
  QdtRun run;
  std::array<std::uint64_t, kQdtCircuitCount> shot_offsets{};
  for (const QdtInstance& inst : qdt_instances(schedule)) {
    const auto [input, basis] = list[static_cast<std::size_t>(inst.circuit)];
    auto& offset = shot_offsets[static_cast<std::size_t>(inst.circuit)];
    run.circuits[static_cast<std::size_t>(inst.circuit)].push_back(
        simulate_qdt_shots(input, basis, inst.circuit, inst.job, inst.time,
                           inst.shots, offset, num_qubits, model, seed));
    offset += static_cast<std::uint64_t>(inst.shots);
  }
  return run;
}

std::string setting_blocks_to_csv(std::span<const SettingBlock> blocks) {
  std::string out = "job,timestamp,setting,outcomes,count\n";
  for (const auto& block : blocks) {
    const int n = static_cast<int>(block.setting.size());
    std::string setting_str;
    for (Axis a : block.setting) setting_str += axis_char(a);

    std::map<std::uint64_t, std::uint64_t> aggregated;
    for (std::uint64_t o : block.outcomes) ++aggregated[o];

    for (const auto& [packed, count] : aggregated) {
      std::string bits(static_cast<std::size_t>(n), '0');
      for (int q = 0; q < n; ++q) {
        if ((packed >> q) & 1u) bits[static_cast<std::size_t>(q)] = '1';
      }
      out += std::to_string(block.job_index) + "," + fmt_g17(block.timestamp) +
             "," + setting_str + "," + bits + "," + std::to_string(count) +
             "\n";
    }
  }
  return out;
}

std::vector<SettingBlock> setting_blocks_from_csv(const std::string& text,
                                                  int shots_per_setting) {
  if (shots_per_setting < 1) {
    throw std::invalid_argument("shots_per_setting must be >= 1");
  }
  std::vector<SettingBlock> blocks;
  SettingBlock current;
  int remaining = 0;

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line.rfind("job,", 0) == 0) continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t pos = 0; pos <= line.size(); ++pos) {
      if (pos == line.size() || line[pos] == ',') {
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
      }
    }
    if (fields.size() != 5) {
      throw ParseError(static_cast<int>(i) + 1,
                       "expected job,timestamp,setting,outcomes,count");
    }
    std::uint64_t job = 0, count = 0;
    double timestamp = 0.0;
    if (!parse_u64(fields[0], job) || !parse_double(fields[1], timestamp) ||
        !parse_u64(fields[4], count) || count == 0) {
      throw ParseError(static_cast<int>(i) + 1, "malformed shot record");
    }
    if (remaining == 0) {
      current = SettingBlock{};
      current.job_index = static_cast<int>(job);
      current.timestamp = timestamp;
      current.setting.clear();
      for (char c : fields[2]) {
        switch (c) {
          case 'X':
            current.setting.push_back(Axis::X);
            break;
          case 'Y':
            current.setting.push_back(Axis::Y);
            break;
          case 'Z':
            current.setting.push_back(Axis::Z);
            break;
          default:
            throw ParseError(static_cast<int>(i) + 1, "bad setting string");
        }
      }
      remaining = shots_per_setting;
    }
    if (fields[2].size() != current.setting.size()) {
      throw ParseError(static_cast<int>(i) + 1, "setting length changed "
                                                "inside a block");
    }
    if (fields[3].size() != current.setting.size()) {
      throw ParseError(static_cast<int>(i) + 1, "outcome length mismatch");
    }
    std::uint64_t packed = 0;
    for (std::size_t q = 0; q < fields[3].size(); ++q) {
      if (fields[3][q] == '1') {
        packed |= std::uint64_t{1} << q;
      } else if (fields[3][q] != '0') {
        throw ParseError(static_cast<int>(i) + 1, "bad outcome bits");
      }
    }
    if (static_cast<int>(count) > remaining) {
      throw ParseError(static_cast<int>(i) + 1,
                       "block exceeds shots_per_setting");
    }
    current.outcomes.insert(current.outcomes.end(), count, packed);
    remaining -= static_cast<int>(count);
    if (remaining == 0) blocks.push_back(std::move(current));
  }
  if (remaining != 0) {
    throw ParseError(static_cast<int>(lines.size()),
                     "stream truncated mid-block");
  }
  return blocks;
}

}  // namespace povmkit
