#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "povmkit/povm.hpp"

namespace povmkit {

/// Column-stochastic readout map: a(reported, ideal).
struct AssignmentMatrix {
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity();

  static AssignmentMatrix identity() { return {}; }
  /// Equal 0->1 and 1->0 error probability e.
  static AssignmentMatrix symmetric_flip(double e);
  /// Independent error probabilities P(1|0) = e01 and P(0|1) = e10.
  static AssignmentMatrix flips(double e01, double e10);

  bool valid() const;
  void require_valid() const;
};

enum class Regime { Good, Bad };

/// Two-state continuous-time switching process for the readout flip
/// probability; unbalanced rates are allowed. Flips are symmetric unless a
/// reverse (1 -> 0) probability is set for a regime.
struct TelegraphProcess {
  double e_good = 0.0;
  double e_bad = 0.0;
  std::optional<double> e_good_reverse;
  std::optional<double> e_bad_reverse;
  double rate_good_to_bad = 0.0;  // 1/seconds
  double rate_bad_to_good = 0.0;  // 1/seconds
  enum class Initial { Good, Bad, Stationary } initial = Initial::Stationary;

  void require_valid() const;
  /// Stationary probability of the bad regime (Good when both rates vanish).
  double stationary_bad_fraction() const;
  /// The flip channel of a regime as an assignment matrix.
  AssignmentMatrix regime_flip(Regime regime) const;
};

/// Piecewise-constant regime timeline covering [0, duration].
struct RegimeTrajectory {
  struct Segment {
    double start;
    Regime regime;
  };
  std::vector<Segment> segments;
  double duration = 0.0;

  Regime at(double time) const;
};

/// Exponential holding times with each regime's exit rate; deterministic
/// for a fixed seed.
RegimeTrajectory sample_regime_trajectory(const TelegraphProcess& process,
                                          double duration, std::uint64_t seed);

/// Static per-qubit assignment errors plus optional telegraph fluctuation.
/// Trajectories are sampled once per experiment and read-only afterwards;
/// the telegraph flip composes after the static matrix.
struct DetectorModel {
  std::vector<AssignmentMatrix> statics;
  std::vector<std::optional<TelegraphProcess>> telegraph;
  std::vector<std::optional<RegimeTrajectory>> trajectories;

  static DetectorModel noiseless(int num_qubits);
  static DetectorModel static_flips(const std::vector<double>& e);

  int num_qubits() const { return static_cast<int>(statics.size()); }
  bool has_fluctuation() const;
  /// Samples trajectories for every qubit carrying a telegraph process.
  void sample_trajectories(double duration, std::uint64_t seed);
};

/// Readout-noisy effects: Pi~_{B,b} = sum_b' A(b, b') Pi_{B,b'}; preserves
/// completeness exactly and positivity by convexity.
LocalPovm noisy_effects(const LocalPovm& ideal, const AssignmentMatrix& a);

/// The assignment matrix in force at `time` on `qubit`: the static matrix
/// followed by the regime's symmetric flip channel.
AssignmentMatrix effective_assignment(const DetectorModel& model, int qubit,
                                      double time);

/// Duration-weighted average of the noisy effects over a trajectory; the
/// detector that blended calibration measures.
LocalPovm time_averaged_effects(const LocalPovm& ideal,
                                const DetectorModel& model, int qubit,
                                const RegimeTrajectory& trajectory);

/// CSV rows `time,qubit,regime,flip_probability`, one per segment.
std::string trajectories_to_csv(const DetectorModel& model);

}  // namespace povmkit
