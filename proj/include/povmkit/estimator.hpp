#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "povmkit/povm.hpp"
#include "povmkit/simulate.hpp"

namespace povmkit {

/// Running omega moments of a repeated-settings experiment. Merging is
/// associative and commutative, so parallel reductions match sequential
/// ones up to floating-point reassociation.
struct MomentAccumulator {
  std::int64_t settings = 0;          // S
  std::int64_t shots_per_setting = 0; // T
  double sum_omega = 0.0;
  double sum_omega_sq = 0.0;
  double sum_setting_mean_sq = 0.0;

  /// Folds in one setting's total omega and total omega^2 over its T shots.
  void add_setting(double block_sum, double block_sum_sq, std::int64_t shots);
  void merge(const MomentAccumulator& other);

  std::int64_t total_shots() const { return settings * shots_per_setting; }
  /// <omega>
  double mean() const;
  /// <omega^2>
  double second_moment() const;
  /// <<omega>_i^2>, the conditional second moment over settings.
  double conditional_second_moment() const;
};

struct EstimateReport {
  double mean = 0.0;
  double variance = 0.0;
  /// sqrt(variance); absent for S = 1 where the settings term is undefined.
  std::optional<double> standard_error;
  std::int64_t settings = 0;
  std::int64_t shots_per_setting = 0;
  MomentAccumulator moments;
  std::optional<double> saving_factor;
  /// Sampling noise drove the variance estimate below zero; clamped to 0.
  bool variance_clamped = false;
};

/// Repeated-settings estimator: mean over all shots and the variance split
///   Var = (<<w>_i^2> - <w>^2) / S + (<w^2> - <<w>_i^2>) / (S T),
/// with sample moments plugged in directly. Per-setting means keep results
/// from different settings separate; identical outcomes within one block
/// are aggregated by count before omega evaluation.
EstimateReport estimate(const Observable& obs, const ProductPovm& povm,
                        std::span<const SettingBlock> blocks);

/// F = 1 - (<w^2> - <<w>_i^2>) / (<w^2> - <w>^2), clamped to [0, 1];
/// absent when the total variance vanishes.
std::optional<double> saving_factor(const MomentAccumulator& moments);

double absolute_error(const EstimateReport& report, double reference_energy);

struct CurvePoint {
  std::int64_t settings = 0;
  std::int64_t shots = 0;
  double mean = 0.0;
  std::optional<double> standard_error;
  double abs_error = 0.0;
};

/// Prefix-based re-estimation over an increasing grid of setting counts,
/// consuming settings in schedule order.
std::vector<CurvePoint> error_vs_shots_curve(
    std::span<const SettingBlock> blocks, const Observable& obs,
    const ProductPovm& povm, std::span<const std::int64_t> prefix_settings,
    double reference_energy);

/// CSV row `label,S,T,mean,variance,std_err,abs_err,saving_factor`;
/// unavailable fields render as "na".
std::string report_csv_header();
std::string report_csv_row(const std::string& label,
                           const EstimateReport& report,
                           std::optional<double> abs_error);

/// Line-per-field text record with the same content as the CSV row.
std::string report_text(const std::string& label, const EstimateReport& report,
                        std::optional<double> abs_error);

std::string curve_csv(std::span<const CurvePoint> points);

}  // namespace povmkit
