#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace povmkit {

/// Measurement/operator axis. Values index lookup tables throughout.
enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline char axis_char(Axis a) { return "XYZ"[static_cast<int>(a)]; }

constexpr std::array<Axis, 3> kAxes = {Axis::X, Axis::Y, Axis::Z};

/// Single-qubit Pauli operator including the identity.
enum class PauliOp : int { I = 0, X = 1, Y = 2, Z = 3 };

inline PauliOp to_op(Axis a) {
  return static_cast<PauliOp>(static_cast<int>(a) + 1);
}

struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_number(line) {}
  int line_number;
};

/// Tensor product of single-qubit Paulis, stored sparsely: qubits absent
/// from `factors` carry the identity. Kept sorted by qubit index.
struct PauliString {
  std::vector<std::pair<int, Axis>> factors;

  bool is_identity() const { return factors.empty(); }
  int max_qubit() const {
    return factors.empty() ? -1 : factors.back().first;
  }
  bool operator==(const PauliString&) const = default;
  bool operator<(const PauliString& other) const {
    return factors < other.factors;
  }

  /// Dense representation over `num_qubits` characters, e.g. "XIZI".
  std::string dense(int num_qubits) const;
};

/// Weighted sum of Pauli strings on a fixed qubit register.
struct Observable {
  int num_qubits = 0;
  std::vector<std::pair<double, PauliString>> terms;

  bool operator==(const Observable&) const = default;
};

/// Separable pure state: one normalized 2-vector per qubit.
struct ProductState {
  std::vector<Eigen::Vector2cd> qubits;

  int num_qubits() const { return static_cast<int>(qubits.size()); }

  /// State |b_0 b_1 ... b_{N-1}> from a string of '0'/'1' characters.
  static ProductState computational(const std::string& bits);
  /// One qubit per (theta, phi) Bloch angle pair.
  static ProductState from_bloch(
      const std::vector<std::pair<double, double>>& angles);

  /// Throws if any qubit vector deviates from unit norm by more than 1e-12.
  void validate() const;
};

/// Single-qubit eigenstates used across the toolkit: |0>, |1>, |+>, |+y>,
/// |->, |-y>. Index pairs with `axis_eigenstate`.
Eigen::Vector2cd axis_eigenstate(Axis basis, int outcome);

/// <psi| sigma_axis |psi> for a normalized single-qubit state.
double bloch_component(const Eigen::Vector2cd& psi, Axis axis);

const Eigen::Matrix2cd& pauli_matrix(Axis axis);

/// sigma_op with sigma_I = identity.
const Eigen::Matrix2cd& pauli_op_matrix(PauliOp op);

/// Parses the Hamiltonian text format:
///   qubits <N>
///   <coefficient> <dense IXYZ string of length N>
///   <coefficient> <sparse tokens like X0 Z3>
/// '#' starts a comment; duplicate strings merge by coefficient addition;
/// the result is canonically ordered so line order never matters.
Observable parse_observable(const std::string& text);

std::string serialize_observable(const Observable& obs);

/// Sum_P c_P prod_q <psi_q| sigma_{P_q} |psi_q>. Exact up to rounding.
double exact_expectation(const Observable& obs, const ProductState& state);

/// Controls for synthetic observables. The defaults reproduce the plain
/// uniform generator; axis weights and coefficient decay shape the term
/// population toward chemistry-like spectra.
struct RandomObservableOptions {
  /// Relative weight of I, X, Y, Z at each qubit position.
  std::array<double, 4> axis_weights = {1.0, 1.0, 1.0, 1.0};
  /// |coefficient| of term j is scaled by exp(-decay * j / (num_terms - 1)).
  double decay = 0.0;
};

Observable random_observable(int num_qubits, int num_terms,
                             double coefficient_scale, std::uint64_t seed,
                             const RandomObservableOptions& options = {});

}  // namespace povmkit
