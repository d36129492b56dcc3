#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "povmkit/detector.hpp"
#include "povmkit/povm.hpp"

using namespace povmkit;

namespace {

LocalPovm symmetric_ideal() {
  return ideal_local_povm(BasisDistribution::symmetric());
}

}  // namespace

TEST_SUITE("povm") {

TEST_CASE("ideal effects follow the definition") {
  const LocalPovm povm = symmetric_ideal();
  const Eigen::Matrix2cd z0 = povm.effect(Axis::Z, 0);
  CHECK(z0(0, 0).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(z0(1, 1)) == doctest::Approx(0.0));
  CHECK(std::abs(z0(0, 1)) == doctest::Approx(0.0));

  BasisDistribution biased;
  biased.p = {0.9, 0.05, 0.05};
  const LocalPovm skew = ideal_local_povm(biased);
  const Eigen::Vector2cd plus = axis_eigenstate(Axis::X, 0);
  const Eigen::Matrix2cd expected = 0.9 * (plus * plus.adjoint());
  CHECK((skew.effect(Axis::X, 0) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("ideal effects sum to the identity for any distribution") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    BasisDistribution d;
    double raw[3] = {u(gen), u(gen), u(gen)};
    const double total = raw[0] + raw[1] + raw[2];
    for (int b = 0; b < 3; ++b) d.p[static_cast<std::size_t>(b)] = raw[b] / total;
    d.p[2] = 1.0 - d.p[0] - d.p[1];
    const LocalPovm povm = ideal_local_povm(d);
    Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
    for (const auto& e : povm.effects) sum += e;
    CHECK((sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_NOTHROW(validate_local_povm(povm));
  }
}

TEST_CASE("canonical dual matches the frozen symmetric values") {
  const DualFrame dual = canonical_dual(symmetric_ideal());
  // Frozen from the independent Gauss-Jordan frame oracle: the symmetric
  // dual of (Z,0) is 3|0><0| - I, so Tr[D Z] = 3 and Tr[D I] = 1.
  CHECK(pauli_weight(dual, PauliOp::Z, Axis::Z, 0) ==
        doctest::Approx(3.0).epsilon(1e-12));
  for (Axis basis : kAxes) {
    for (int b = 0; b < 2; ++b) {
      CHECK(pauli_weight(dual, PauliOp::I, basis, b) ==
            doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("canonical dual agrees with the independent frame oracle") {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    BasisDistribution d;
    double raw[3] = {u(gen), u(gen), u(gen)};
    const double total = raw[0] + raw[1] + raw[2];
    for (int b = 0; b < 3; ++b) d.p[static_cast<std::size_t>(b)] = raw[b] / total;
    d.p[2] = 1.0 - d.p[0] - d.p[1];
    LocalPovm povm = ideal_local_povm(d);
    if (trial % 2 == 1) {
      povm = noisy_effects(povm, AssignmentMatrix::symmetric_flip(0.03));
    }
    const DualFrame dual = canonical_dual(povm);
    for (int op = 0; op < 4; ++op) {
      for (Axis basis : kAxes) {
        for (int b = 0; b < 2; ++b) {
          CHECK(pauli_weight(dual, static_cast<PauliOp>(op), basis, b) ==
                doctest::Approx(oracles::oracle_weight(
                                    povm, static_cast<PauliOp>(op), basis, b))
                    .epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("canonical dual satisfies the reconstruction identity") {
  std::mt19937_64 gen(23);
  std::vector<LocalPovm> povms;
  povms.push_back(symmetric_ideal());
  BasisDistribution biased;
  biased.p = {0.6, 0.1, 0.3};
  povms.push_back(ideal_local_povm(biased));
  povms.push_back(
      noisy_effects(symmetric_ideal(), AssignmentMatrix::flips(0.02, 0.05)));

  for (const auto& povm : povms) {
    const DualFrame dual = canonical_dual(povm);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Matrix2cd a = oracles::random_hermitian(gen);
      Eigen::Matrix2cd rebuilt = Eigen::Matrix2cd::Zero();
      for (Axis basis : kAxes) {
        for (int b = 0; b < 2; ++b) {
          const double coeff = (dual.dual(basis, b) * a).trace().real();
          rebuilt += coeff * povm.effect(basis, b);
        }
      }
      CHECK((rebuilt - a).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("rank-deficient POVM is rejected as not informationally complete") {
  BasisDistribution d;
  d.p = {0.5, 0.0, 0.5};  // bypasses the floor on purpose
  const LocalPovm povm = ideal_local_povm(d);
  CHECK_THROWS_AS(canonical_dual(povm), NotInformationallyComplete);
}

TEST_CASE("pauli weights of the symmetric ideal POVM") {
  const DualFrame dual = canonical_dual(symmetric_ideal());
  CHECK(pauli_weight(dual, PauliOp::Z, Axis::X, 0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pauli_weight(dual, PauliOp::Z, Axis::X, 1) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // On-match weights are +-1/p_B.
  for (Axis axis : kAxes) {
    for (int b = 0; b < 2; ++b) {
      const double w = pauli_weight(dual, to_op(axis), axis, b);
      CHECK(std::abs(w) == doctest::Approx(3.0).epsilon(1e-9));
      CHECK((b == 0 ? w : -w) > 0.0);
    }
  }
}

TEST_CASE("pauli weights of a biased ideal POVM are 1/p on match") {
  BasisDistribution d;
  d.p = {0.5, 0.2, 0.3};
  const DualFrame dual = canonical_dual(ideal_local_povm(d));
  for (Axis axis : kAxes) {
    CHECK(pauli_weight(dual, to_op(axis), axis, 0) ==
          doctest::Approx(1.0 / d[axis]).epsilon(1e-9));
    for (Axis basis : kAxes) {
      if (basis == axis) continue;
      CHECK(pauli_weight(dual, to_op(axis), basis, 0) ==
            doctest::Approx(0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("omega value on single-qubit Z observable") {
  const Observable obs = parse_observable("qubits 1\n1.0 Z\n");
  const ProductPovm povm = make_product_povm({symmetric_ideal()});
  const std::vector<Axis> setting_z = {Axis::Z};
  const std::vector<Axis> setting_x = {Axis::X};
  const std::vector<int> outcome0 = {0};
  CHECK(omega_value(obs, povm, setting_z, outcome0) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK(omega_value(obs, povm, setting_x, outcome0) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("omega of a pure identity observable is its coefficient") {
  const Observable obs = parse_observable("qubits 3\n0.75 III\n");
  const ProductPovm povm = make_product_povm(
      {symmetric_ideal(), symmetric_ideal(), symmetric_ideal()});
  for (Axis a : kAxes) {
    const std::vector<Axis> setting = {a, Axis::Z, Axis::X};
    for (int bits = 0; bits < 8; ++bits) {
      const std::vector<int> outcome = {bits & 1, (bits >> 1) & 1,
                                        (bits >> 2) & 1};
      CHECK(omega_value(obs, povm, setting, outcome) == doctest::Approx(0.75));
    }
  }
}

TEST_CASE("omega evaluator matches one-shot omega_value") {
  const Observable obs = random_observable(4, 30, 1.0, 55);
  std::vector<LocalPovm> locals;
  for (int q = 0; q < 4; ++q) {
    locals.push_back(noisy_effects(
        symmetric_ideal(), AssignmentMatrix::symmetric_flip(0.01 * (q + 1))));
  }
  const ProductPovm povm = make_product_povm(locals);
  OmegaEvaluator eval(obs, povm);
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Axis> setting;
    std::vector<int> outcome;
    std::uint64_t packed = 0;
    for (int q = 0; q < 4; ++q) {
      setting.push_back(static_cast<Axis>(gen() % 3));
      const int b = static_cast<int>(gen() % 2);
      outcome.push_back(b);
      packed |= static_cast<std::uint64_t>(b) << q;
    }
    eval.set_setting(setting);
    CHECK(eval.value(packed) ==
          doctest::Approx(omega_value(obs, povm, setting, outcome))
              .epsilon(1e-12));
  }
}

TEST_CASE("decomposition completeness by brute force up to 4 qubits") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> angle(0.0, 3.14159);
  for (int n : {1, 2, 3, 4}) {
    const Observable obs =
        random_observable(n, std::min(20, 1 << (2 * n)), 1.0,
                          400 + static_cast<std::uint64_t>(n));
    std::vector<std::pair<double, double>> angles;
    for (int q = 0; q < n; ++q) angles.emplace_back(angle(gen), angle(gen));
    const ProductState state = ProductState::from_bloch(angles);

    std::vector<LocalPovm> locals;
    for (int q = 0; q < n; ++q) {
      BasisDistribution d;
      d.p = {0.5, 0.25, 0.25};
      LocalPovm local = ideal_local_povm(
          q % 2 == 0 ? BasisDistribution::symmetric() : d);
      if (q % 2 == 1) {
        local = noisy_effects(local, AssignmentMatrix::symmetric_flip(0.02));
      }
      locals.push_back(local);
    }
    const ProductPovm povm = make_product_povm(locals);

    double total = 0.0;
    for (const auto& point : oracles::enumerate_joint(state, locals)) {
      std::vector<int> outcome;
      for (int q = 0; q < n; ++q) {
        outcome.push_back(static_cast<int>((point.outcome >> q) & 1u));
      }
      total +=
          point.probability * omega_value(obs, povm, point.setting, outcome);
    }
    CHECK(total ==
          doctest::Approx(exact_expectation(obs, state)).epsilon(1e-8));
  }
}

TEST_CASE("lbcs bias follows the clamp-and-renormalize rule") {
  SUBCASE("single-axis qubit") {
    const Observable obs = parse_observable("qubits 1\n0.7 Z\n");
    const auto dists = lbcs_bias(obs, 0.05);
    REQUIRE(dists.size() == 1);
    CHECK(dists[0][Axis::X] == doctest::Approx(0.05));
    CHECK(dists[0][Axis::Y] == doctest::Approx(0.05));
    CHECK(dists[0][Axis::Z] == doctest::Approx(0.90));
  }
  SUBCASE("identity-only observable is symmetric") {
    const Observable obs = parse_observable("qubits 2\n1.0 II\n");
    for (const auto& d : lbcs_bias(obs, 0.05)) {
      for (Axis a : kAxes) CHECK(d[a] == doctest::Approx(1.0 / 3.0));
    }
  }
  SUBCASE("equal X and Z mass") {
    const Observable obs = parse_observable("qubits 1\n0.4 X\n-0.4 Z\n");
    const auto dists = lbcs_bias(obs, 0.05);
    CHECK(dists[0][Axis::X] == doctest::Approx(0.475));
    CHECK(dists[0][Axis::Y] == doctest::Approx(0.05));
    CHECK(dists[0][Axis::Z] == doctest::Approx(0.475));
  }
}

TEST_CASE("lbcs bias always yields valid floored distributions") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Observable obs = random_observable(6, 60, 1.0, 900 + seed);
    for (const auto& d : lbcs_bias(obs, 0.01)) {
      CHECK(d.valid(0.01));
    }
  }
  const Observable obs = parse_observable("qubits 1\n1.0 Z\n");
  CHECK_THROWS_AS(lbcs_bias(obs, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lbcs_bias(obs, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(lbcs_bias(Observable{1, {}}, 0.05), std::invalid_argument);
}

TEST_CASE("povm serialization round-trips bit-exactly") {
  std::vector<LocalPovm> locals;
  BasisDistribution d;
  d.p = {0.123456789012345678, 0.3, 0.0};
  d.p[2] = 1.0 - d.p[0] - d.p[1];
  locals.push_back(noisy_effects(ideal_local_povm(d),
                                 AssignmentMatrix::flips(0.017, 0.041)));
  locals.push_back(symmetric_ideal());

  const std::string text = serialize_local_povms(locals);
  const auto parsed = parse_local_povms(text);
  REQUIRE(parsed.size() == locals.size());
  for (std::size_t q = 0; q < locals.size(); ++q) {
    for (int b = 0; b < 3; ++b) {
      CHECK(parsed[q].probs.p[static_cast<std::size_t>(b)] ==
            locals[q].probs.p[static_cast<std::size_t>(b)]);
    }
    for (int k = 0; k < 6; ++k) {
      CHECK((parsed[q].effects[static_cast<std::size_t>(k)] -
             locals[q].effects[static_cast<std::size_t>(k)])
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
  }
  // Serialization is stable under a round trip.
  CHECK(serialize_local_povms(parsed) == text);
}

}  // TEST_SUITE
