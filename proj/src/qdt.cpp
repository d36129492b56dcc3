#include "povmkit/qdt.hpp"

#include <cmath>
#include <stdexcept>

#include "povmkit/io_util.hpp"

namespace povmkit {

std::string qdt_input_label(QdtInput input) {
  switch (input) {
    case QdtInput::Zero:
      return "0";
    case QdtInput::One:
      return "1";
    case QdtInput::Plus:
      return "+";
    case QdtInput::PlusY:
      return "+y";
  }
  throw std::logic_error("bad QDT input");
}

QdtInput qdt_input_from_label(const std::string& label) {
  if (label == "0") return QdtInput::Zero;
  if (label == "1") return QdtInput::One;
  if (label == "+") return QdtInput::Plus;
  if (label == "+y") return QdtInput::PlusY;
  throw std::invalid_argument("unknown QDT input label '" + label + "'");
}

Eigen::Vector2cd qdt_input_state(QdtInput input) {
  switch (input) {
    case QdtInput::Zero:
      return axis_eigenstate(Axis::Z, 0);
    case QdtInput::One:
      return axis_eigenstate(Axis::Z, 1);
    case QdtInput::Plus:
      return axis_eigenstate(Axis::X, 0);
    case QdtInput::PlusY:
      return axis_eigenstate(Axis::Y, 0);
  }
  throw std::logic_error("bad QDT input");
}

std::array<std::pair<QdtInput, Axis>, kQdtCircuitCount> qdt_circuit_list() {
  std::array<std::pair<QdtInput, Axis>, kQdtCircuitCount> list;
  std::size_t k = 0;
  for (QdtInput input : kQdtInputs) {
    for (Axis basis : kAxes) {
      list[k++] = {input, basis};
    }
  }
  return list;
}

TomographyData TomographyData::from_qdt_run(const QdtRun& run,
                                            int num_qubits) {
  TomographyData data;
  data.qubits.resize(static_cast<std::size_t>(num_qubits));
  const auto list = qdt_circuit_list();
  for (int c = 0; c < kQdtCircuitCount; ++c) {
    const auto [input, basis] = list[static_cast<std::size_t>(c)];
    const auto totals = run.totals(c, num_qubits);
    for (int q = 0; q < num_qubits; ++q) {
      for (int b = 0; b < 2; ++b) {
        data.qubits[static_cast<std::size_t>(q)].count(input, basis, b) +=
            static_cast<double>(totals[static_cast<std::size_t>(q)]
                                      [static_cast<std::size_t>(b)]);
      }
    }
  }
  return data;
}

namespace {

Eigen::Matrix2cd hermitize(const Eigen::Matrix2cd& m) {
  return 0.5 * (m + m.adjoint());
}

/// Inverse square root of a positive definite 2x2 Hermitian matrix.
Eigen::Matrix2cd inv_sqrt(const Eigen::Matrix2cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
  Eigen::Vector2d vals = es.eigenvalues();
  for (int k = 0; k < 2; ++k) {
    if (vals(k) < 1e-300) {
      throw std::runtime_error("likelihood normalizer is singular");
    }
    vals(k) = 1.0 / std::sqrt(vals(k));
  }
  return es.eigenvectors() * vals.asDiagonal() *
         es.eigenvectors().adjoint();
}

struct BasisFit {
  std::array<Eigen::Matrix2cd, 2> effect;  // normalized two-outcome POVM
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective;
};

/// Diluted multiplicative likelihood ascent for one measurement basis:
/// maximizes sum_{in,b} n_{in,b} log(p_B Tr[rho_in M_b]) over two-outcome
/// POVMs. The update M_b <- L^{-1/2} R_b M_b R_b L^{-1/2} with
/// L = sum_b R_b M_b R_b keeps PSD and completeness; a step is damped
/// toward the identity whenever it would lower the objective.
BasisFit fit_basis(const std::array<Eigen::Matrix2cd, 4>& rho,
                   const std::array<std::array<double, 2>, 4>& n,
                   double log_prob_basis, const RecoverySettings& settings) {
  double total_counts = 0.0;
  for (const auto& row : n) total_counts += row[0] + row[1];

  auto log_likelihood = [&](const std::array<Eigen::Matrix2cd, 2>& m) {
    double ll = total_counts * log_prob_basis;
    for (std::size_t in = 0; in < 4; ++in) {
      for (std::size_t b = 0; b < 2; ++b) {
        if (n[in][b] <= 0.0) continue;
        const double p = (rho[in] * m[b]).trace().real();
        ll += n[in][b] * std::log(std::max(p, 1e-300));
      }
    }
    return ll;
  };

  BasisFit fit;
  // The four informationally complete inputs pin the two-outcome POVM
  // exactly: solving Tr[rho_in M_0] = f_in gives the unconstrained optimum
  // by moment matching. When that solution is PSD-feasible it already
  // maximizes the likelihood and the ascent below only polishes; otherwise
  // fall back to an interior start near the ideal effect blended with a
  // full-rank floor (pure projectors are rank-deficient fixed points of
  // the multiplicative update).
  bool seeded = false;
  {
    Eigen::Matrix4d system;
    Eigen::Vector4d freq;
    const double r = 1.0 / std::sqrt(2.0);
    for (int in = 0; in < 4; ++in) {
      for (int k = 0; k < 4; ++k) {
        system(in, k) =
            r *
            (rho[static_cast<std::size_t>(in)] *
             pauli_op_matrix(static_cast<PauliOp>(k)))
                .trace()
                .real();
      }
      const double total = n[static_cast<std::size_t>(in)][0] +
                           n[static_cast<std::size_t>(in)][1];
      freq(in) = n[static_cast<std::size_t>(in)][0] / total;
    }
    const Eigen::FullPivLU<Eigen::Matrix4d> lu(system);
    if (lu.isInvertible()) {
      const Eigen::Vector4d x = lu.solve(freq);
      Eigen::Matrix2cd m0 = Eigen::Matrix2cd::Zero();
      for (int k = 0; k < 4; ++k) {
        m0 += r * x(k) * pauli_op_matrix(static_cast<PauliOp>(k));
      }
      m0 = hermitize(m0);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m0);
      const Eigen::Vector2d vals = es.eigenvalues();
      if (vals.minCoeff() > -1e-9 && vals.maxCoeff() < 1.0 + 1e-9) {
        const Eigen::Vector2d clipped =
            vals.cwiseMax(0.0).cwiseMin(1.0);
        fit.effect[0] = es.eigenvectors() * clipped.asDiagonal() *
                        es.eigenvectors().adjoint();
        fit.effect[1] = Eigen::Matrix2cd::Identity() - fit.effect[0];
        seeded = true;
      }
    }
  }
  if (!seeded) {
    const double alpha = 0.1;
    for (std::size_t b = 0; b < 2; ++b) {
      const Eigen::Vector2cd v = axis_eigenstate(Axis::Z, static_cast<int>(b));
      // The basis rotation is folded into rho; fitting happens in the
      // measurement frame where the ideal effect is the Z projector.
      fit.effect[b] = (1.0 - alpha) * (v * v.adjoint()) +
                      alpha * 0.5 * Eigen::Matrix2cd::Identity();
    }
  }

  double ll = log_likelihood(fit.effect);
  fit.objective.push_back(ll);

  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    std::array<Eigen::Matrix2cd, 2> r;
    for (std::size_t b = 0; b < 2; ++b) {
      r[b] = Eigen::Matrix2cd::Zero();
      for (std::size_t in = 0; in < 4; ++in) {
        if (n[in][b] <= 0.0) continue;
        const double p =
            std::max((rho[in] * fit.effect[b]).trace().real(), 1e-15);
        r[b] += (n[in][b] / p) * rho[in];
      }
    }

    bool accepted = false;
    std::array<Eigen::Matrix2cd, 2> candidate;
    double candidate_ll = ll;
    for (double dilution = 0.0; dilution <= 1e9;
         dilution = dilution == 0.0 ? 1.0 : dilution * 4.0) {
      std::array<Eigen::Matrix2cd, 2> rd;
      for (std::size_t b = 0; b < 2; ++b) {
        rd[b] = dilution == 0.0
                    ? r[b]
                    : ((r[b] + dilution * Eigen::Matrix2cd::Identity()) /
                       (1.0 + dilution))
                          .eval();
      }
      Eigen::Matrix2cd lambda = Eigen::Matrix2cd::Zero();
      for (std::size_t b = 0; b < 2; ++b) {
        lambda += rd[b] * fit.effect[b] * rd[b];
      }
      const Eigen::Matrix2cd norm = inv_sqrt(hermitize(lambda));
      for (std::size_t b = 0; b < 2; ++b) {
        candidate[b] = hermitize(norm * rd[b] * fit.effect[b] * rd[b] * norm);
      }
      candidate_ll = log_likelihood(candidate);
      if (candidate_ll >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        accepted = true;
        break;
      }
    }
    fit.iterations = iter + 1;
    if (!accepted) {
      // No productive step exists even arbitrarily close to the identity.
      fit.converged = true;
      break;
    }
    const double gain = candidate_ll - ll;
    double movement = 0.0;
    for (std::size_t b = 0; b < 2; ++b) {
      movement = std::max(
          movement, (candidate[b] - fit.effect[b]).cwiseAbs().maxCoeff());
    }
    fit.effect = candidate;
    ll = std::max(candidate_ll, ll);
    fit.objective.push_back(ll);
    if (std::abs(gain) <= settings.tolerance * (1.0 + std::abs(ll)) &&
        movement <= settings.settle_tolerance) {
      fit.converged = true;
      break;
    }
  }

  // Exact per-basis completeness at exit.
  fit.effect[0] = hermitize(fit.effect[0]);
  fit.effect[1] = Eigen::Matrix2cd::Identity() - fit.effect[0];
  return fit;
}

}  // namespace

RecoveryResult recover_local_povm(const QubitTomographyData& data,
                                  const BasisDistribution& probs,
                                  const RecoverySettings& settings) {
  probs.require_valid(0.0);
  if (!(settings.tolerance > 0.0)) {
    throw std::invalid_argument("recovery tolerance must be positive");
  }

  std::array<Eigen::Matrix2cd, 4> rho;
  for (QdtInput input : kQdtInputs) {
    const auto i = static_cast<std::size_t>(input);
    if (data.input_overrides[i]) {
      rho[i] = *data.input_overrides[i];
    } else {
      const Eigen::Vector2cd v = qdt_input_state(input);
      rho[i] = v * v.adjoint();
    }
  }

  RecoveryResult result;
  result.povm.probs = probs;
  result.converged = true;

  for (Axis basis : kAxes) {
    const auto bs = static_cast<std::size_t>(basis);
    std::array<std::array<double, 2>, 4> n{};
    for (QdtInput input : kQdtInputs) {
      const auto i = static_cast<std::size_t>(input);
      for (int b = 0; b < 2; ++b) {
        const double c = data.count(input, basis, b);
        if (c < 0.0) {
          throw std::invalid_argument("negative tomography count");
        }
        n[i][static_cast<std::size_t>(b)] = c;
      }
      if (n[i][0] + n[i][1] <= 0.0) {
        throw std::invalid_argument(
            "every (input, basis) cell needs at least one shot");
      }
    }
    for (int b = 0; b < 2; ++b) {
      double outcome_total = 0.0;
      for (const auto& row : n) outcome_total += row[static_cast<std::size_t>(b)];
      if (outcome_total <= 0.0) result.degenerate_data = true;
    }

    // The measurement basis rotation U maps the detector frame onto Z;
    // fitting uses the rotated inputs U rho U^dagger.
    std::array<Eigen::Matrix2cd, 4> rho_rotated;
    Eigen::Matrix2cd u;
    {
      const Eigen::Vector2cd b0 = axis_eigenstate(basis, 0);
      const Eigen::Vector2cd b1 = axis_eigenstate(basis, 1);
      u.row(0) = b0.adjoint();
      u.row(1) = b1.adjoint();
    }
    for (std::size_t i = 0; i < 4; ++i) {
      rho_rotated[i] = u * rho[i] * u.adjoint();
    }

    BasisFit fit = fit_basis(rho_rotated, n, std::log(probs[basis]), settings);
    result.converged = result.converged && fit.converged;
    result.iterations = std::max(result.iterations, fit.iterations);
    result.objective_history[bs] = std::move(fit.objective);

    // Rotate the fitted effects back to the lab frame and apply p_B.
    for (int b = 0; b < 2; ++b) {
      result.povm.effect(basis, b) =
          probs[basis] *
          (u.adjoint() * fit.effect[static_cast<std::size_t>(b)] * u);
    }
  }
  return result;
}

std::vector<RecoveryResult> recover_all(const TomographyData& data,
                                        std::span<const BasisDistribution>
                                            probs,
                                        const RecoverySettings& settings) {
  if (probs.size() != data.qubits.size()) {
    throw std::invalid_argument("per-qubit distribution count mismatch");
  }
  std::vector<RecoveryResult> results;
  results.reserve(data.qubits.size());
  for (std::size_t q = 0; q < data.qubits.size(); ++q) {
    results.push_back(recover_local_povm(data.qubits[q], probs[q], settings));
  }
  return results;
}

MarginalCounts marginalize_counts(std::span<const SettingBlock> blocks,
                                  int qubit, Axis basis) {
  if (blocks.empty()) {
    throw std::invalid_argument("no blocks to marginalize");
  }
  MarginalCounts tally;
  for (const auto& block : blocks) {
    if (qubit < 0 || static_cast<std::size_t>(qubit) >= block.setting.size()) {
      throw std::out_of_range("qubit index out of range");
    }
    if (block.setting[static_cast<std::size_t>(qubit)] != basis) continue;
    tally.empty = false;
    for (std::uint64_t packed : block.outcomes) {
      ++tally.counts[(packed >> qubit) & 1u];
    }
  }
  return tally;
}

std::string tomography_to_csv(const TomographyData& data) {
  std::string out = "qubit,input,basis,outcome,count\n";
  for (std::size_t q = 0; q < data.qubits.size(); ++q) {
    for (QdtInput input : kQdtInputs) {
      for (Axis basis : kAxes) {
        for (int b = 0; b < 2; ++b) {
          out += std::to_string(q) + "," + qdt_input_label(input) + "," +
                 axis_char(basis) + "," + std::to_string(b) + "," +
                 fmt_g17(data.qubits[q].count(input, basis, b)) + "\n";
        }
      }
    }
  }
  return out;
}

TomographyData tomography_from_csv(const std::string& text) {
  TomographyData data;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line.rfind("qubit,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t pos = 0; pos <= line.size(); ++pos) {
      if (pos == line.size() || line[pos] == ',') {
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
      }
    }
    if (fields.size() != 5) {
      throw ParseError(static_cast<int>(i) + 1,
                       "expected qubit,input,basis,outcome,count");
    }
    std::uint64_t qubit = 0, outcome = 0;
    double count = 0.0;
    if (!parse_u64(fields[0], qubit) || !parse_u64(fields[3], outcome) ||
        outcome > 1 || !parse_double(fields[4], count)) {
      throw ParseError(static_cast<int>(i) + 1, "malformed tomography row");
    }
    Axis basis;
    if (fields[2] == "X") basis = Axis::X;
    else if (fields[2] == "Y") basis = Axis::Y;
    else if (fields[2] == "Z") basis = Axis::Z;
    else throw ParseError(static_cast<int>(i) + 1, "bad basis");
    const QdtInput input = qdt_input_from_label(fields[1]);
    if (qubit >= data.qubits.size()) {
      data.qubits.resize(qubit + 1);
    }
    data.qubits[qubit].count(input, basis, static_cast<int>(outcome)) += count;
  }
  return data;
}

}  // namespace povmkit
