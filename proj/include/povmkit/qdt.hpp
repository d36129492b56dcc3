#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "povmkit/povm.hpp"
#include "povmkit/qdt_circuits.hpp"
#include "povmkit/simulate.hpp"

namespace povmkit {

/// Twelve-circuit count data for one qubit. Counts are doubles so exact
/// probabilities can be supplied in place of finite-shot tallies.
struct QubitTomographyData {
  /// counts[input][basis][outcome]
  std::array<std::array<std::array<double, 2>, 3>, 4> counts{};
  /// Optional density-matrix overrides for imperfect input states; ideal
  /// pure states otherwise.
  std::array<std::optional<Eigen::Matrix2cd>, 4> input_overrides{};

  double& count(QdtInput input, Axis basis, int outcome) {
    return counts[static_cast<std::size_t>(input)]
                 [static_cast<std::size_t>(basis)]
                 [static_cast<std::size_t>(outcome)];
  }
  double count(QdtInput input, Axis basis, int outcome) const {
    return counts[static_cast<std::size_t>(input)]
                 [static_cast<std::size_t>(basis)]
                 [static_cast<std::size_t>(outcome)];
  }
};

struct TomographyData {
  std::vector<QubitTomographyData> qubits;

  int num_qubits() const { return static_cast<int>(qubits.size()); }

  static TomographyData from_qdt_run(const QdtRun& run, int num_qubits);
};

/// Knobs for the likelihood solver.
struct RecoverySettings {
  int max_iterations = 20000;
  /// Stop when the objective improves by less than this per iteration...
  double tolerance = 1e-13;
  /// ...and the iterate itself has stopped moving. Near rank-deficient
  /// optima the objective flattens long before the effects settle.
  double settle_tolerance = 1e-11;
  double psd_tolerance = 1e-9;
};

struct RecoveryResult {
  LocalPovm povm;
  bool converged = false;
  /// Some outcome was never observed for any input; the fit is forced to a
  /// rank-deficient effect and the POVM is no longer informationally
  /// complete.
  bool degenerate_data = false;
  int iterations = 0;
  /// Per-basis log-likelihood trace, one entry per accepted iterate.
  std::array<std::vector<double>, 3> objective_history;
};

/// Maximum-likelihood recovery of one qubit's noisy effects from its
/// twelve-circuit counts. Per basis, fits the two-outcome POVM {M_{B,0},
/// M_{B,1}} (completeness exact, PSD preserved) by a diluted multiplicative
/// ascent; the returned effects are p_B * M_{B,b} with the known sampling
/// distribution p.
RecoveryResult recover_local_povm(const QubitTomographyData& data,
                                  const BasisDistribution& probs,
                                  const RecoverySettings& settings = {});

/// Per-qubit recovery; qubits are independent.
std::vector<RecoveryResult> recover_all(const TomographyData& data,
                                        std::span<const BasisDistribution>
                                            probs,
                                        const RecoverySettings& settings = {});

/// Outcome tally of one qubit restricted to shots whose setting measures
/// `basis` there; feeds drift monitoring and consistency checks.
struct MarginalCounts {
  std::array<std::uint64_t, 2> counts = {0, 0};
  bool empty = true;

  std::uint64_t total() const { return counts[0] + counts[1]; }
};

MarginalCounts marginalize_counts(std::span<const SettingBlock> blocks,
                                  int qubit, Axis basis);

/// CSV rows `qubit,input,basis,outcome,count`.
std::string tomography_to_csv(const TomographyData& data);
TomographyData tomography_from_csv(const std::string& text);

}  // namespace povmkit
