// Independent reference implementations used only by tests. These avoid the
// library's code paths on purpose: dense statevector contraction for
// expectation values, a hand-rolled Gauss-Jordan frame inversion in a
// different operator basis for dual frames, and explicit enumeration of the
// (setting, outcome) space for decomposition and moment checks.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "povmkit/pauli.hpp"
#include "povmkit/povm.hpp"

namespace oracles {

using complexd = std::complex<double>;

// ---------------------------------------------------------------------------
// Dense statevector oracle.

/// Full 2^N amplitudes of a product state, qubit 0 least significant.
inline std::vector<complexd> dense_state(const povmkit::ProductState& state) {
  const int n = state.num_qubits();
  std::vector<complexd> amps(std::size_t{1} << n, complexd(1.0, 0.0));
  for (std::size_t idx = 0; idx < amps.size(); ++idx) {
    complexd a(1.0, 0.0);
    for (int q = 0; q < n; ++q) {
      a *= state.qubits[static_cast<std::size_t>(q)]((idx >> q) & 1u);
    }
    amps[idx] = a;
  }
  return amps;
}

/// sigma_axis applied on qubit q of a dense vector.
inline std::vector<complexd> apply_pauli(const std::vector<complexd>& amps,
                                         int qubit, povmkit::Axis axis) {
  std::vector<complexd> out(amps.size());
  const std::size_t mask = std::size_t{1} << qubit;
  for (std::size_t idx = 0; idx < amps.size(); ++idx) {
    switch (axis) {
      case povmkit::Axis::X:
        out[idx] = amps[idx ^ mask];
        break;
      case povmkit::Axis::Y:
        out[idx] = (idx & mask) ? complexd(0, 1) * amps[idx ^ mask]
                                : complexd(0, -1) * amps[idx ^ mask];
        break;
      case povmkit::Axis::Z:
        out[idx] = (idx & mask) ? -amps[idx] : amps[idx];
        break;
    }
  }
  return out;
}

/// <psi|O|psi> by direct contraction; supports up to ~14 qubits.
inline double dense_expectation(const povmkit::Observable& obs,
                                const povmkit::ProductState& state) {
  const auto psi = dense_state(state);
  complexd total(0.0, 0.0);
  for (const auto& [coeff, str] : obs.terms) {
    std::vector<complexd> phi = psi;
    for (auto [q, axis] : str.factors) phi = apply_pauli(phi, q, axis);
    complexd ip(0.0, 0.0);
    for (std::size_t idx = 0; idx < psi.size(); ++idx) {
      ip += std::conj(psi[idx]) * phi[idx];
    }
    total += coeff * ip;
  }
  return total.real();
}

// ---------------------------------------------------------------------------
// Independent dual-frame oracle.
//
// Hermitian 2x2 matrices are parameterized as (a, b, Re c, Im c) with
// M = [[a, c], [conj(c), b]]. In these coordinates tr(A B) = a_A a_B +
// b_A b_B + 2 Re_A Re_B + 2 Im_A Im_B, so the frame operator becomes the
// 4x4 matrix V V^T W with W = diag(1, 1, 2, 2), inverted by Gauss-Jordan.

using Param4 = std::array<double, 4>;

inline Param4 to_param(const Eigen::Matrix2cd& m) {
  return {m(0, 0).real(), m(1, 1).real(), m(0, 1).real(), m(0, 1).imag()};
}

inline double param_trace_product(const Param4& x, const Param4& y) {
  return x[0] * y[0] + x[1] * y[1] + 2.0 * (x[2] * y[2] + x[3] * y[3]);
}

inline std::array<std::array<double, 4>, 4> gauss_jordan_inverse(
    std::array<std::array<double, 4>, 4> m) {
  std::array<std::array<double, 4>, 4> inv{};
  for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-14) {
      throw std::runtime_error("oracle frame matrix is singular");
    }
    std::swap(m[col], m[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = m[col][col];
    for (int c = 0; c < 4; ++c) {
      m[col][c] /= d;
      inv[col][c] /= d;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = m[r][col];
      for (int c = 0; c < 4; ++c) {
        m[r][c] -= f * m[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

/// Canonical duals of six effects, as Param4 coordinates.
inline std::array<Param4, 6> oracle_duals(const povmkit::LocalPovm& povm) {
  std::array<Param4, 6> v;
  for (int i = 0; i < 6; ++i) {
    v[static_cast<std::size_t>(i)] =
        to_param(povm.effects[static_cast<std::size_t>(i)]);
  }
  // F = sum_i v_i (v_i^T W): F[r][c] = sum_i v_i[r] * (W v_i)[c].
  const std::array<double, 4> w = {1.0, 1.0, 2.0, 2.0};
  std::array<std::array<double, 4>, 4> f{};
  for (const auto& vi : v) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        f[r][c] += vi[static_cast<std::size_t>(r)] * w[static_cast<std::size_t>(c)] *
                   vi[static_cast<std::size_t>(c)];
      }
    }
  }
  const auto finv = gauss_jordan_inverse(f);
  std::array<Param4, 6> duals;
  for (int i = 0; i < 6; ++i) {
    for (int r = 0; r < 4; ++r) {
      double acc = 0.0;
      for (int c = 0; c < 4; ++c) {
        acc += finv[r][c] * v[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      }
      duals[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)] = acc;
    }
  }
  return duals;
}

inline Param4 pauli_param(povmkit::PauliOp op) {
  switch (op) {
    case povmkit::PauliOp::I:
      return {1.0, 1.0, 0.0, 0.0};
    case povmkit::PauliOp::X:
      return {0.0, 0.0, 1.0, 0.0};
    case povmkit::PauliOp::Y:
      return {0.0, 0.0, 0.0, -1.0};  // [[0,-i],[i,0]]: c = -i
    case povmkit::PauliOp::Z:
      return {1.0, -1.0, 0.0, 0.0};
  }
  throw std::logic_error("bad op");
}

/// Tr[D_{basis,outcome} sigma_op] through the oracle path.
inline double oracle_weight(const povmkit::LocalPovm& povm, povmkit::PauliOp op,
                            povmkit::Axis basis, int outcome) {
  const auto duals = oracle_duals(povm);
  const auto d =
      duals[static_cast<std::size_t>(povmkit::effect_index(basis, outcome))];
  return param_trace_product(d, pauli_param(op));
}

// ---------------------------------------------------------------------------
// Enumeration oracles for small systems.

/// Single-qubit density matrix of a pure state.
inline Eigen::Matrix2cd density(const Eigen::Vector2cd& psi) {
  return psi * psi.adjoint();
}

struct EnumeratedPoint {
  std::vector<povmkit::Axis> setting;
  std::uint64_t outcome = 0;
  double probability = 0.0;  // Pr[setting] * Pr[outcome | setting]
};

/// Every (setting, outcome) pair with its joint probability under the POVM
/// Born rule: prod_q Tr[rho_q Pi_{B_q, b_q}].
inline std::vector<EnumeratedPoint> enumerate_joint(
    const povmkit::ProductState& state,
    const std::vector<povmkit::LocalPovm>& locals) {
  const int n = state.num_qubits();
  std::vector<EnumeratedPoint> points;
  std::vector<povmkit::Axis> setting(static_cast<std::size_t>(n));
  std::size_t num_settings = 1;
  for (int q = 0; q < n; ++q) num_settings *= 3;

  for (std::size_t s = 0; s < num_settings; ++s) {
    std::size_t code = s;
    for (int q = 0; q < n; ++q) {
      setting[static_cast<std::size_t>(q)] =
          static_cast<povmkit::Axis>(code % 3);
      code /= 3;
    }
    for (std::uint64_t outcome = 0; outcome < (std::uint64_t{1} << n);
         ++outcome) {
      double p = 1.0;
      for (int q = 0; q < n; ++q) {
        const auto qs = static_cast<std::size_t>(q);
        const int b = static_cast<int>((outcome >> q) & 1u);
        const Eigen::Matrix2cd rho = density(state.qubits[qs]);
        p *= (rho * locals[qs].effect(setting[qs], b)).trace().real();
      }
      points.push_back({setting, outcome, p});
    }
  }
  return points;
}

inline double trace_distance(const Eigen::Matrix2cd& a,
                             const Eigen::Matrix2cd& b) {
  const Eigen::Matrix2cd d = a - b;
  const double mean = 0.5 * (d(0, 0).real() + d(1, 1).real());
  const double det = (d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0)).real();
  const double r = std::sqrt(std::max(0.0, mean * mean - det));
  return 0.5 * (std::abs(mean + r) + std::abs(mean - r));
}

inline Eigen::Matrix2cd random_hermitian(std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Matrix2cd m;
  const double a = normal(gen), b = normal(gen);
  const complexd c(normal(gen), normal(gen));
  m << a, c, std::conj(c), b;
  return m;
}

}  // namespace oracles
