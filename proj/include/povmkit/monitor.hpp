#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "povmkit/simulate.hpp"

namespace povmkit {

struct DriftPoint {
  int job = 0;
  double time = 0.0;
  std::uint64_t matching_shots = 0;
  double frequency = 0.0;  // of the expected outcome
  double sigma = 0.0;      // binomial, sqrt(p(1-p)/n)
  bool gap = false;        // job had no shots matching the basis restriction
};

/// Per-job frequency of `expected_outcome` on `qubit`, restricted to shots
/// whose setting measures `basis` there; ordered by execution time. Jobs
/// with no matching shots are emitted flagged rather than dropped.
std::vector<DriftPoint> drift_monitor(std::span<const SettingBlock> blocks,
                                      int qubit, Axis basis,
                                      int expected_outcome);

/// Counts of the expected outcome against a total, for consistency checks.
struct FrequencyTally {
  std::uint64_t expected = 0;
  std::uint64_t total = 0;

  double frequency() const;
  double sigma() const;
};

struct ConsistencyGap {
  std::string label;
  double gap = 0.0;
  double sigma = 0.0;  // combined
  bool exceeds_3_sigma = false;
  bool undefined = false;  // a side had zero shots
};

struct ConsistencyReport {
  std::array<ConsistencyGap, 3> gaps;  // blended/exp, nonblended/exp,
                                       // blended/nonblended
};

ConsistencyReport compare_qdt_consistency(const FrequencyTally& blended,
                                          const FrequencyTally& non_blended,
                                          const FrequencyTally& experiment);

/// CSV rows `job,time,frequency,sigma`; gap rows render frequency and
/// sigma as "na".
std::string drift_to_csv(std::span<const DriftPoint> points);

}  // namespace povmkit
