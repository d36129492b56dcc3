#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "povmkit/pauli.hpp"

namespace povmkit {

/// Probabilities of picking each measurement direction on one qubit.
struct BasisDistribution {
  std::array<double, 3> p = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  double operator[](Axis a) const { return p[static_cast<std::size_t>(a)]; }
  double& operator[](Axis a) { return p[static_cast<std::size_t>(a)]; }

  static BasisDistribution symmetric() { return {}; }

  /// Nonnegative entries summing to 1 within 1e-12, each at least `floor`.
  bool valid(double floor = 0.0) const;
  void require_valid(double floor = 0.0) const;
};

constexpr double kDefaultBasisFloor = 0.01;

/// Index of effect (basis, outcome) in the canonical six-effect order
/// (X,0), (X,1), (Y,0), (Y,1), (Z,0), (Z,1).
inline int effect_index(Axis basis, int outcome) {
  return 2 * static_cast<int>(basis) + outcome;
}

/// Six-outcome single-qubit measurement: one effect per (basis, outcome),
/// together with the basis sampling distribution that scales the effects.
struct LocalPovm {
  std::array<Eigen::Matrix2cd, 6> effects;
  BasisDistribution probs;

  const Eigen::Matrix2cd& effect(Axis basis, int outcome) const {
    return effects[static_cast<std::size_t>(effect_index(basis, outcome))];
  }
  Eigen::Matrix2cd& effect(Axis basis, int outcome) {
    return effects[static_cast<std::size_t>(effect_index(basis, outcome))];
  }
};

/// Thrown when a detector's effects no longer span the single-qubit
/// operator space and no dual frame exists.
struct NotInformationallyComplete : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dual effects D_i paired 1:1 with a LocalPovm's effects; any Hermitian A
/// decomposes as sum_i Tr[D_i A] Pi_i.
struct DualFrame {
  std::array<Eigen::Matrix2cd, 6> duals;
  double frame_operator_condition = 0.0;

  const Eigen::Matrix2cd& dual(Axis basis, int outcome) const {
    return duals[static_cast<std::size_t>(effect_index(basis, outcome))];
  }
};

/// Per-qubit POVMs with their duals and cached Pauli weights; the complete
/// classical description of one product measurement.
struct ProductPovm {
  std::vector<LocalPovm> locals;
  std::vector<DualFrame> duals;
  /// weights[q][op][basis][outcome] = Tr[D_{basis,outcome} sigma_op].
  std::vector<std::array<std::array<std::array<double, 2>, 3>, 4>> weights;

  int num_qubits() const { return static_cast<int>(locals.size()); }
};

/// Checks PSD (eigenvalues >= -1e-9) and completeness (effects sum to the
/// identity within 1e-9 entrywise); throws std::invalid_argument otherwise.
void validate_local_povm(const LocalPovm& povm);

/// Effects {p_B |b_B><b_B|} of randomly chosen Pauli measurements.
LocalPovm ideal_local_povm(const BasisDistribution& dist);

/// Canonical least-squares dual via frame-operator inversion. Throws
/// NotInformationallyComplete when the frame operator is singular or has
/// condition number >= 1e8.
DualFrame canonical_dual(const LocalPovm& povm);

/// Tr[D_{basis,outcome} sigma_axis].
double pauli_weight(const DualFrame& dual, PauliOp axis, Axis basis,
                    int outcome);

ProductPovm make_product_povm(std::vector<LocalPovm> locals);

/// The scalar omega for one (setting, outcome) pair:
/// sum_P c_P prod_{q in supp(P)} Tr[D^{(q)}_{B_q, b_q} sigma_{P_q}].
double omega_value(const Observable& obs, const ProductPovm& povm,
                   std::span<const Axis> setting, std::span<const int> outcome);

/// Reusable evaluator for the same quantity over many outcomes of one
/// setting; outcomes are bit-packed with qubit q at bit q.
class OmegaEvaluator {
 public:
  OmegaEvaluator(const Observable& obs, const ProductPovm& povm);

  void set_setting(std::span<const Axis> setting);
  double value(std::uint64_t packed_outcome) const;

 private:
  const Observable* obs_;
  const ProductPovm* povm_;
  // Flattened factor storage: per term, [offset, offset+count) in factors_.
  struct Factor {
    int qubit;
    double w0, w1;  // weight at outcome 0 / 1 under the current setting
  };
  struct Term {
    double coeff;
    std::size_t offset;
    std::size_t count;
    bool alive;
  };
  std::vector<Factor> factors_;
  std::vector<Term> terms_;
};

/// Per-qubit basis distributions biased toward the observable: at each
/// qubit, p_B is proportional to the absolute coefficient mass of terms
/// acting with axis B there, floored and renormalized to stay
/// informationally complete.
std::vector<BasisDistribution> lbcs_bias(const Observable& obs, double floor);

/// Text serialization of per-qubit POVMs; decimal with 17 significant
/// digits, so values round-trip bit-exactly.
std::string serialize_local_povms(const std::vector<LocalPovm>& locals);
std::vector<LocalPovm> parse_local_povms(const std::string& text);

}  // namespace povmkit
