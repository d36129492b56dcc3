#include "povmkit/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "povmkit/io_util.hpp"
#include "povmkit/rng.hpp"

namespace povmkit {

namespace {

constexpr std::size_t kMaxSegments = 10'000'000;

}  // namespace

AssignmentMatrix AssignmentMatrix::symmetric_flip(double e) {
  return flips(e, e);
}

AssignmentMatrix AssignmentMatrix::flips(double e01, double e10) {
  AssignmentMatrix m;
  m.a << 1.0 - e01, e10, e01, 1.0 - e10;
  m.require_valid();
  return m;
}

bool AssignmentMatrix::valid() const {
  for (int c = 0; c < 2; ++c) {
    double sum = 0.0;
    for (int r = 0; r < 2; ++r) {
      const double x = a(r, c);
      if (!(x >= 0.0 && x <= 1.0)) return false;
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) return false;
  }
  return true;
}

void AssignmentMatrix::require_valid() const {
  if (!valid()) {
    throw std::invalid_argument(
        "assignment matrix must be column-stochastic with entries in [0,1]");
  }
}

void TelegraphProcess::require_valid() const {
  if (!(0.0 <= e_good && e_good <= e_bad && e_bad <= 0.5)) {
    throw std::invalid_argument(
        "telegraph process requires 0 <= e_good <= e_bad <= 0.5");
  }
  for (const auto& reverse : {e_good_reverse, e_bad_reverse}) {
    if (reverse && !(*reverse >= 0.0 && *reverse <= 0.5)) {
      throw std::invalid_argument(
          "telegraph reverse flip probabilities must lie in [0, 0.5]");
    }
  }
  if (rate_good_to_bad < 0.0 || rate_bad_to_good < 0.0) {
    throw std::invalid_argument("telegraph switching rates must be >= 0");
  }
}

AssignmentMatrix TelegraphProcess::regime_flip(Regime regime) const {
  const double forward = regime == Regime::Good ? e_good : e_bad;
  const auto& reverse = regime == Regime::Good ? e_good_reverse : e_bad_reverse;
  return AssignmentMatrix::flips(forward, reverse.value_or(forward));
}

double TelegraphProcess::stationary_bad_fraction() const {
  const double total = rate_good_to_bad + rate_bad_to_good;
  return total > 0.0 ? rate_good_to_bad / total : 0.0;
}

Regime RegimeTrajectory::at(double time) const {
  if (segments.empty() || time < 0.0 || time > duration) {
    throw std::out_of_range("time outside sampled trajectory");
  }
  // Last segment whose start is <= time.
  auto it = std::upper_bound(
      segments.begin(), segments.end(), time,
      [](double t, const Segment& s) { return t < s.start; });
  return std::prev(it)->regime;
}

RegimeTrajectory sample_regime_trajectory(const TelegraphProcess& process,
                                          double duration,
                                          std::uint64_t seed) {
  process.require_valid();
  if (!(duration > 0.0)) {
    throw std::invalid_argument("duration must be positive");
  }

  Regime regime;
  switch (process.initial) {
    case TelegraphProcess::Initial::Good:
      regime = Regime::Good;
      break;
    case TelegraphProcess::Initial::Bad:
      regime = Regime::Bad;
      break;
    case TelegraphProcess::Initial::Stationary: {
      const double u = rng::uniform01(seed, rng::Stream::Telegraph, 0);
      regime = u < process.stationary_bad_fraction() ? Regime::Bad
                                                     : Regime::Good;
      break;
    }
    default:
      throw std::logic_error("bad initial regime");
  }

  RegimeTrajectory traj;
  traj.duration = duration;
  double t = 0.0;
  std::uint64_t k = 1;
  while (t < duration) {
    traj.segments.push_back({t, regime});
    if (traj.segments.size() > kMaxSegments) {
      throw std::runtime_error(
          "telegraph trajectory exceeds the segment limit; rates are too "
          "fast for this duration");
    }
    const double exit_rate = regime == Regime::Good
                                 ? process.rate_good_to_bad
                                 : process.rate_bad_to_good;
    if (exit_rate <= 0.0) break;
    const double u = rng::uniform01(seed, rng::Stream::Telegraph, k++);
    t += -std::log1p(-u) / exit_rate;
    regime = regime == Regime::Good ? Regime::Bad : Regime::Good;
  }
  return traj;
}

DetectorModel DetectorModel::noiseless(int num_qubits) {
  DetectorModel model;
  model.statics.assign(static_cast<std::size_t>(num_qubits),
                       AssignmentMatrix::identity());
  model.telegraph.assign(static_cast<std::size_t>(num_qubits), std::nullopt);
  model.trajectories.assign(static_cast<std::size_t>(num_qubits),
                            std::nullopt);
  return model;
}

DetectorModel DetectorModel::static_flips(const std::vector<double>& e) {
  DetectorModel model = noiseless(static_cast<int>(e.size()));
  for (std::size_t q = 0; q < e.size(); ++q) {
    model.statics[q] = AssignmentMatrix::symmetric_flip(e[q]);
  }
  return model;
}

bool DetectorModel::has_fluctuation() const {
  return std::any_of(telegraph.begin(), telegraph.end(),
                     [](const auto& t) { return t.has_value(); });
}

void DetectorModel::sample_trajectories(double duration, std::uint64_t seed) {
  trajectories.assign(statics.size(), std::nullopt);
  for (std::size_t q = 0; q < telegraph.size(); ++q) {
    if (telegraph[q]) {
      trajectories[q] = sample_regime_trajectory(
          *telegraph[q], duration, rng::sub_seed(seed, q));
    }
  }
}

LocalPovm noisy_effects(const LocalPovm& ideal, const AssignmentMatrix& a) {
  a.require_valid();
  LocalPovm noisy;
  noisy.probs = ideal.probs;
  for (Axis basis : kAxes) {
    for (int b = 0; b < 2; ++b) {
      noisy.effect(basis, b) = a.a(b, 0) * ideal.effect(basis, 0) +
                               a.a(b, 1) * ideal.effect(basis, 1);
    }
  }
  return noisy;
}

AssignmentMatrix effective_assignment(const DetectorModel& model, int qubit,
                                      double time) {
  const auto q = static_cast<std::size_t>(qubit);
  if (qubit < 0 || q >= model.statics.size()) {
    throw std::out_of_range("qubit index out of range");
  }
  AssignmentMatrix eff = model.statics[q];
  if (model.telegraph[q]) {
    if (!model.trajectories[q]) {
      throw std::logic_error(
          "telegraph qubit has no sampled trajectory; call "
          "sample_trajectories first");
    }
    const Regime regime = model.trajectories[q]->at(time);
    eff.a = model.telegraph[q]->regime_flip(regime).a * eff.a;
  }
  return eff;
}

LocalPovm time_averaged_effects(const LocalPovm& ideal,
                                const DetectorModel& model, int qubit,
                                const RegimeTrajectory& trajectory) {
  const auto q = static_cast<std::size_t>(qubit);
  if (qubit < 0 || q >= model.statics.size()) {
    throw std::out_of_range("qubit index out of range");
  }
  if (trajectory.segments.empty() || trajectory.duration <= 0.0) {
    throw std::invalid_argument("trajectory does not cover the experiment");
  }
  const TelegraphProcess* proc =
      model.telegraph[q] ? &*model.telegraph[q] : nullptr;

  LocalPovm averaged;
  averaged.probs = ideal.probs;
  for (auto& e : averaged.effects) e = Eigen::Matrix2cd::Zero();

  for (std::size_t s = 0; s < trajectory.segments.size(); ++s) {
    const auto& seg = trajectory.segments[s];
    const double end = s + 1 < trajectory.segments.size()
                           ? trajectory.segments[s + 1].start
                           : trajectory.duration;
    const double weight = (end - seg.start) / trajectory.duration;
    if (weight <= 0.0) continue;
    AssignmentMatrix eff = model.statics[q];
    if (proc) {
      eff.a = proc->regime_flip(seg.regime).a * eff.a;
    }
    const LocalPovm segment_povm = noisy_effects(ideal, eff);
    for (std::size_t k = 0; k < 6; ++k) {
      averaged.effects[k] += weight * segment_povm.effects[k];
    }
  }
  return averaged;
}

std::string trajectories_to_csv(const DetectorModel& model) {
  std::string out = "time,qubit,regime,flip_probability\n";
  for (std::size_t q = 0; q < model.trajectories.size(); ++q) {
    if (!model.trajectories[q]) continue;
    const auto& proc = *model.telegraph[q];
    for (const auto& seg : model.trajectories[q]->segments) {
      const bool bad = seg.regime == Regime::Bad;
      out += fmt_g17(seg.start) + "," + std::to_string(q) + "," +
             (bad ? "bad" : "good") + "," +
             fmt_g17(bad ? proc.e_bad : proc.e_good) + "\n";
    }
  }
  return out;
}

}  // namespace povmkit
