#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <utility>

#include "povmkit/pauli.hpp"

namespace povmkit {

/// Informationally complete input states for detector tomography.
enum class QdtInput : int { Zero = 0, One = 1, Plus = 2, PlusY = 3 };

constexpr std::array<QdtInput, 4> kQdtInputs = {
    QdtInput::Zero, QdtInput::One, QdtInput::Plus, QdtInput::PlusY};

std::string qdt_input_label(QdtInput input);
QdtInput qdt_input_from_label(const std::string& label);

Eigen::Vector2cd qdt_input_state(QdtInput input);

/// The twelve (input, basis) tomography circuits, input-major order starting
/// at (|0>, X). The count is independent of the number of qubits.
constexpr int kQdtCircuitCount = 12;
std::array<std::pair<QdtInput, Axis>, kQdtCircuitCount> qdt_circuit_list();

}  // namespace povmkit
