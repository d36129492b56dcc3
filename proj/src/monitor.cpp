#include "povmkit/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "povmkit/io_util.hpp"

namespace povmkit {

std::vector<DriftPoint> drift_monitor(std::span<const SettingBlock> blocks,
                                      int qubit, Axis basis,
                                      int expected_outcome) {
  if (blocks.empty()) {
    throw std::invalid_argument("no blocks to monitor");
  }
  if (expected_outcome != 0 && expected_outcome != 1) {
    throw std::invalid_argument("expected outcome must be 0 or 1");
  }

  struct JobTally {
    double time = 0.0;
    std::uint64_t expected = 0;
    std::uint64_t total = 0;
  };
  std::map<int, JobTally> jobs;
  for (const auto& block : blocks) {
    if (qubit < 0 || static_cast<std::size_t>(qubit) >= block.setting.size()) {
      throw std::out_of_range("qubit index out of range");
    }
    auto& tally = jobs[block.job_index];
    tally.time = block.timestamp;
    if (block.setting[static_cast<std::size_t>(qubit)] != basis) continue;
    for (std::uint64_t packed : block.outcomes) {
      const int bit = static_cast<int>((packed >> qubit) & 1u);
      ++tally.total;
      if (bit == expected_outcome) ++tally.expected;
    }
  }

  std::vector<DriftPoint> series;
  series.reserve(jobs.size());
  for (const auto& [job, tally] : jobs) {
    DriftPoint point;
    point.job = job;
    point.time = tally.time;
    point.matching_shots = tally.total;
    if (tally.total == 0) {
      point.gap = true;
    } else {
      const double p =
          static_cast<double>(tally.expected) / static_cast<double>(tally.total);
      point.frequency = p;
      point.sigma = std::sqrt(p * (1.0 - p) /
                              static_cast<double>(tally.total));
    }
    series.push_back(point);
  }
  std::sort(series.begin(), series.end(),
            [](const DriftPoint& a, const DriftPoint& b) {
              return a.time < b.time || (a.time == b.time && a.job < b.job);
            });
  return series;
}

double FrequencyTally::frequency() const {
  return total > 0
             ? static_cast<double>(expected) / static_cast<double>(total)
             : 0.0;
}

double FrequencyTally::sigma() const {
  if (total == 0) return 0.0;
  const double p = frequency();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(total));
}

namespace {

ConsistencyGap make_gap(const std::string& label, const FrequencyTally& a,
                        const FrequencyTally& b) {
  ConsistencyGap gap;
  gap.label = label;
  if (a.total == 0 || b.total == 0) {
    gap.undefined = true;
    return gap;
  }
  gap.gap = std::abs(a.frequency() - b.frequency());
  gap.sigma = std::sqrt(a.sigma() * a.sigma() + b.sigma() * b.sigma());
  gap.exceeds_3_sigma = gap.gap > 3.0 * gap.sigma;
  return gap;
}

}  // namespace

ConsistencyReport compare_qdt_consistency(const FrequencyTally& blended,
                                          const FrequencyTally& non_blended,
                                          const FrequencyTally& experiment) {
  ConsistencyReport report;
  report.gaps[0] = make_gap("blended_vs_experiment", blended, experiment);
  report.gaps[1] =
      make_gap("non_blended_vs_experiment", non_blended, experiment);
  report.gaps[2] =
      make_gap("blended_vs_non_blended", blended, non_blended);
  return report;
}

std::string drift_to_csv(std::span<const DriftPoint> points) {
  std::string out = "job,time,frequency,sigma\n";
  for (const auto& p : points) {
    out += std::to_string(p.job) + "," + fmt_g17(p.time) + ",";
    if (p.gap) {
      out += "na,na\n";
    } else {
      out += fmt_g17(p.frequency) + "," + fmt_g17(p.sigma) + "\n";
    }
  }
  return out;
}

}  // namespace povmkit
