#include "povmkit/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "povmkit/io_util.hpp"

namespace povmkit {

void MomentAccumulator::add_setting(double block_sum, double block_sum_sq,
                                    std::int64_t shots) {
  if (shots_per_setting == 0) {
    shots_per_setting = shots;
  } else if (shots_per_setting != shots) {
    throw std::invalid_argument("ragged shots per setting");
  }
  const double mean_i = block_sum / static_cast<double>(shots);
  settings += 1;
  sum_omega += block_sum;
  sum_omega_sq += block_sum_sq;
  sum_setting_mean_sq += mean_i * mean_i;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.settings == 0) return;
  if (shots_per_setting == 0) {
    shots_per_setting = other.shots_per_setting;
  } else if (shots_per_setting != other.shots_per_setting) {
    throw std::invalid_argument("ragged shots per setting");
  }
  settings += other.settings;
  sum_omega += other.sum_omega;
  sum_omega_sq += other.sum_omega_sq;
  sum_setting_mean_sq += other.sum_setting_mean_sq;
}

double MomentAccumulator::mean() const {
  return sum_omega / static_cast<double>(total_shots());
}

double MomentAccumulator::second_moment() const {
  return sum_omega_sq / static_cast<double>(total_shots());
}

double MomentAccumulator::conditional_second_moment() const {
  return sum_setting_mean_sq / static_cast<double>(settings);
}

namespace {

EstimateReport report_from_moments(const MomentAccumulator& acc) {
  EstimateReport report;
  report.settings = acc.settings;
  report.shots_per_setting = acc.shots_per_setting;
  report.moments = acc;
  report.mean = acc.mean();

  const double s = static_cast<double>(acc.settings);
  const double st = static_cast<double>(acc.total_shots());
  const double m1 = acc.mean();
  const double m2 = acc.second_moment();
  const double c2 = acc.conditional_second_moment();
  double variance = (c2 - m1 * m1) / s + (m2 - c2) / st;
  if (variance < 0.0) {
    variance = 0.0;
    report.variance_clamped = true;
  }
  report.variance = variance;
  if (acc.settings >= 2) {
    report.standard_error = std::sqrt(variance);
  }
  report.saving_factor = saving_factor(acc);
  return report;
}

}  // namespace

EstimateReport estimate(const Observable& obs, const ProductPovm& povm,
                        std::span<const SettingBlock> blocks) {
  if (blocks.empty()) {
    throw std::invalid_argument("no setting blocks to estimate from");
  }

  OmegaEvaluator eval(obs, povm);
  MomentAccumulator acc;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> aggregated;
  for (const auto& block : blocks) {
    if (block.outcomes.empty()) {
      throw std::invalid_argument("empty setting block");
    }
    eval.set_setting(block.setting);

    aggregated.clear();
    {
      std::vector<std::uint64_t> sorted(block.outcomes);
      std::sort(sorted.begin(), sorted.end());
      for (std::uint64_t o : sorted) {
        if (!aggregated.empty() && aggregated.back().first == o) {
          ++aggregated.back().second;
        } else {
          aggregated.emplace_back(o, 1);
        }
      }
    }

    double block_sum = 0.0;
    double block_sum_sq = 0.0;
    for (const auto& [outcome, count] : aggregated) {
      const double w = eval.value(outcome);
      const double c = static_cast<double>(count);
      block_sum += c * w;
      block_sum_sq += c * w * w;
    }
    acc.add_setting(block_sum, block_sum_sq, block.shots());
  }
  return report_from_moments(acc);
}

std::optional<double> saving_factor(const MomentAccumulator& moments) {
  const double m1 = moments.mean();
  const double m2 = moments.second_moment();
  const double c2 = moments.conditional_second_moment();
  const double denom = m2 - m1 * m1;
  if (!(denom > 0.0)) return std::nullopt;
  const double f = 1.0 - (m2 - c2) / denom;
  return std::clamp(f, 0.0, 1.0);
}

double absolute_error(const EstimateReport& report, double reference_energy) {
  return std::abs(report.mean - reference_energy);
}

std::vector<CurvePoint> error_vs_shots_curve(
    std::span<const SettingBlock> blocks, const Observable& obs,
    const ProductPovm& povm, std::span<const std::int64_t> prefix_settings,
    double reference_energy) {
  for (std::size_t k = 0; k < prefix_settings.size(); ++k) {
    if (prefix_settings[k] < 1 ||
        prefix_settings[k] > static_cast<std::int64_t>(blocks.size()) ||
        (k > 0 && prefix_settings[k] <= prefix_settings[k - 1])) {
      throw std::invalid_argument(
          "prefix grid must be increasing and within the block count");
    }
  }

  std::vector<CurvePoint> curve;
  curve.reserve(prefix_settings.size());

  // One pass: per-block tallies first, then prefix sums.
  OmegaEvaluator eval(obs, povm);
  MomentAccumulator acc;
  std::size_t next_block = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> aggregated;
  for (std::int64_t prefix : prefix_settings) {
    while (static_cast<std::int64_t>(next_block) < prefix) {
      const auto& block = blocks[next_block++];
      if (block.outcomes.empty()) {
        throw std::invalid_argument("empty setting block");
      }
      eval.set_setting(block.setting);
      aggregated.clear();
      std::vector<std::uint64_t> sorted(block.outcomes);
      std::sort(sorted.begin(), sorted.end());
      for (std::uint64_t o : sorted) {
        if (!aggregated.empty() && aggregated.back().first == o) {
          ++aggregated.back().second;
        } else {
          aggregated.emplace_back(o, 1);
        }
      }
      double block_sum = 0.0, block_sum_sq = 0.0;
      for (const auto& [outcome, count] : aggregated) {
        const double w = eval.value(outcome);
        const double c = static_cast<double>(count);
        block_sum += c * w;
        block_sum_sq += c * w * w;
      }
      acc.add_setting(block_sum, block_sum_sq, block.shots());
    }
    EstimateReport report = report_from_moments(acc);
    CurvePoint point;
    point.settings = report.settings;
    point.shots = report.moments.total_shots();
    point.mean = report.mean;
    point.standard_error = report.standard_error;
    point.abs_error = std::abs(report.mean - reference_energy);
    curve.push_back(point);
  }
  return curve;
}

namespace {

std::string opt_field(std::optional<double> v) {
  return v ? fmt_g17(*v) : std::string("na");
}

}  // namespace

std::string report_csv_header() {
  return "label,S,T,mean,variance,std_err,abs_err,saving_factor\n";
}

std::string report_csv_row(const std::string& label,
                           const EstimateReport& report,
                           std::optional<double> abs_error) {
  return label + "," + std::to_string(report.settings) + "," +
         std::to_string(report.shots_per_setting) + "," +
         fmt_g17(report.mean) + "," + fmt_g17(report.variance) + "," +
         opt_field(report.standard_error) + "," + opt_field(abs_error) + "," +
         opt_field(report.saving_factor) + "\n";
}

std::string report_text(const std::string& label, const EstimateReport& report,
                        std::optional<double> abs_error) {
  std::string out = "report " + label + "\n";
  out += "S " + std::to_string(report.settings) + "\n";
  out += "T " + std::to_string(report.shots_per_setting) + "\n";
  out += "mean " + fmt_g17(report.mean) + "\n";
  out += "variance " + fmt_g17(report.variance) + "\n";
  out += "std_err " + opt_field(report.standard_error) + "\n";
  out += "abs_err " + opt_field(abs_error) + "\n";
  out += "saving_factor " + opt_field(report.saving_factor) + "\n";
  return out;
}

std::string curve_csv(std::span<const CurvePoint> points) {
  std::string out = "settings,shots,mean,std_err,abs_err\n";
  for (const auto& p : points) {
    out += std::to_string(p.settings) + "," + std::to_string(p.shots) + "," +
           fmt_g17(p.mean) + "," + opt_field(p.standard_error) + "," +
           fmt_g17(p.abs_error) + "\n";
  }
  return out;
}

}  // namespace povmkit
