#include "povmkit/povm.hpp"

#include <cmath>

#include "povmkit/io_util.hpp"

namespace povmkit {

namespace {

constexpr double kConditionLimit = 1e8;

/// Coordinates of a Hermitian 2x2 matrix in the orthonormal basis
/// {I, X, Y, Z} / sqrt(2) under the Hilbert-Schmidt inner product.
Eigen::Vector4d vec_hermitian(const Eigen::Matrix2cd& a) {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Vector4d v;
  for (int k = 0; k < 4; ++k) {
    v(k) = r * (a * pauli_op_matrix(static_cast<PauliOp>(k))).trace().real();
  }
  return v;
}

Eigen::Matrix2cd unvec_hermitian(const Eigen::Vector4d& v) {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd a = Eigen::Matrix2cd::Zero();
  for (int k = 0; k < 4; ++k) {
    a += r * v(k) * pauli_op_matrix(static_cast<PauliOp>(k));
  }
  return a;
}

}  // namespace

bool BasisDistribution::valid(double floor) const {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= floor - 1e-15)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= 1e-12;
}

void BasisDistribution::require_valid(double floor) const {
  if (!valid(floor)) {
    throw std::invalid_argument(
        "basis distribution must be nonnegative, sum to 1, and respect the "
        "probability floor");
  }
}

void validate_local_povm(const LocalPovm& povm) {
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (const auto& e : povm.effects) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(e,
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) {
      throw std::invalid_argument("POVM effect is not positive semidefinite");
    }
    sum += e;
  }
  if ((sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("POVM effects do not sum to the identity");
  }
}

LocalPovm ideal_local_povm(const BasisDistribution& dist) {
  dist.require_valid(0.0);
  LocalPovm povm;
  povm.probs = dist;
  for (Axis basis : kAxes) {
    for (int outcome = 0; outcome < 2; ++outcome) {
      const Eigen::Vector2cd v = axis_eigenstate(basis, outcome);
      povm.effect(basis, outcome) = dist[basis] * (v * v.adjoint());
    }
  }
  return povm;
}

DualFrame canonical_dual(const LocalPovm& povm) {
  std::array<Eigen::Vector4d, 6> vecs;
  Eigen::Matrix4d frame = Eigen::Matrix4d::Zero();
  for (std::size_t i = 0; i < 6; ++i) {
    vecs[i] = vec_hermitian(povm.effects[i]);
    frame += vecs[i] * vecs[i].transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(frame);
  const Eigen::Vector4d evals = es.eigenvalues();
  const double lambda_min = evals.minCoeff();
  const double lambda_max = evals.maxCoeff();
  if (lambda_min <= 0.0 || lambda_max / lambda_min >= kConditionLimit) {
    throw NotInformationallyComplete(
        "POVM effects do not span the single-qubit operator space "
        "(frame operator condition number over limit)");
  }

  DualFrame dual;
  dual.frame_operator_condition = lambda_max / lambda_min;
  const Eigen::Matrix4d inverse =
      es.eigenvectors() * evals.cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  for (std::size_t i = 0; i < 6; ++i) {
    dual.duals[i] = unvec_hermitian(inverse * vecs[i]);
  }
  return dual;
}

double pauli_weight(const DualFrame& dual, PauliOp axis, Axis basis,
                    int outcome) {
  return (dual.dual(basis, outcome) * pauli_op_matrix(axis)).trace().real();
}

ProductPovm make_product_povm(std::vector<LocalPovm> locals) {
  ProductPovm povm;
  povm.locals = std::move(locals);
  povm.duals.reserve(povm.locals.size());
  povm.weights.reserve(povm.locals.size());
  for (const auto& local : povm.locals) {
    DualFrame dual = canonical_dual(local);
    auto& w = povm.weights.emplace_back();
    for (int op = 0; op < 4; ++op) {
      for (Axis basis : kAxes) {
        for (int outcome = 0; outcome < 2; ++outcome) {
          w[static_cast<std::size_t>(op)][static_cast<std::size_t>(basis)]
           [static_cast<std::size_t>(outcome)] =
               pauli_weight(dual, static_cast<PauliOp>(op), basis, outcome);
        }
      }
    }
    povm.duals.push_back(std::move(dual));
  }
  return povm;
}

OmegaEvaluator::OmegaEvaluator(const Observable& obs, const ProductPovm& povm)
    : obs_(&obs), povm_(&povm) {
  if (obs.num_qubits != povm.num_qubits()) {
    throw std::invalid_argument("observable and POVM qubit counts differ");
  }
  std::size_t total_factors = 0;
  for (const auto& [coeff, str] : obs.terms) total_factors += str.factors.size();
  factors_.resize(total_factors);
  terms_.reserve(obs.terms.size());
  std::size_t offset = 0;
  for (const auto& [coeff, str] : obs.terms) {
    terms_.push_back({coeff, offset, str.factors.size(), true});
    for (auto [q, axis] : str.factors) {
      factors_[offset++] = Factor{q, 0.0, 0.0};
    }
  }
}

void OmegaEvaluator::set_setting(std::span<const Axis> setting) {
  if (static_cast<int>(setting.size()) != obs_->num_qubits) {
    throw std::invalid_argument("setting length does not match qubit count");
  }
  std::size_t offset = 0;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& str = obs_->terms[t].second;
    bool alive = true;
    for (auto [q, axis] : str.factors) {
      const auto qs = static_cast<std::size_t>(q);
      const auto& w = povm_->weights[qs][static_cast<std::size_t>(to_op(axis))]
                                    [static_cast<std::size_t>(setting[qs])];
      factors_[offset] = Factor{q, w[0], w[1]};
      if (w[0] == 0.0 && w[1] == 0.0) alive = false;
      ++offset;
    }
    terms_[t].alive = alive;
  }
}

double OmegaEvaluator::value(std::uint64_t packed_outcome) const {
  double total = 0.0;
  for (const auto& term : terms_) {
    if (!term.alive) continue;
    double prod = term.coeff;
    const std::size_t end = term.offset + term.count;
    for (std::size_t f = term.offset; f < end; ++f) {
      const Factor& fac = factors_[f];
      prod *= ((packed_outcome >> fac.qubit) & 1u) ? fac.w1 : fac.w0;
      if (prod == 0.0) break;
    }
    total += prod;
  }
  return total;
}

double omega_value(const Observable& obs, const ProductPovm& povm,
                   std::span<const Axis> setting,
                   std::span<const int> outcome) {
  if (setting.size() != outcome.size() ||
      static_cast<int>(setting.size()) != obs.num_qubits) {
    throw std::invalid_argument("setting/outcome length mismatch");
  }
  std::uint64_t packed = 0;
  for (std::size_t q = 0; q < outcome.size(); ++q) {
    if (outcome[q] != 0 && outcome[q] != 1) {
      throw std::invalid_argument("outcome bits must be 0 or 1");
    }
    packed |= static_cast<std::uint64_t>(outcome[q]) << q;
  }
  OmegaEvaluator eval(obs, povm);
  eval.set_setting(setting);
  return eval.value(packed);
}

std::vector<BasisDistribution> lbcs_bias(const Observable& obs, double floor) {
  if (obs.terms.empty()) {
    throw std::invalid_argument("observable has no terms");
  }
  if (!(floor > 0.0) || floor > 1.0 / 3.0) {
    throw std::invalid_argument("floor must lie in (0, 1/3]");
  }
  std::vector<BasisDistribution> dists(
      static_cast<std::size_t>(obs.num_qubits));
  std::vector<std::array<double, 3>> mass(
      static_cast<std::size_t>(obs.num_qubits), {0.0, 0.0, 0.0});
  for (const auto& [coeff, str] : obs.terms) {
    for (auto [q, axis] : str.factors) {
      mass[static_cast<std::size_t>(q)][static_cast<std::size_t>(axis)] +=
          std::abs(coeff);
    }
  }
  for (int q = 0; q < obs.num_qubits; ++q) {
    const auto& m = mass[static_cast<std::size_t>(q)];
    const double total = m[0] + m[1] + m[2];
    BasisDistribution d;
    if (total > 0.0) {
      for (int b = 0; b < 3; ++b) {
        const auto bs = static_cast<std::size_t>(b);
        d.p[bs] = floor + (1.0 - 3.0 * floor) * (m[bs] / total);
      }
    }
    dists[static_cast<std::size_t>(q)] = d;
  }
  return dists;
}

std::string serialize_local_povms(const std::vector<LocalPovm>& locals) {
  std::string out = "povm v1\nqubits " + std::to_string(locals.size()) + "\n";
  for (std::size_t q = 0; q < locals.size(); ++q) {
    const auto& local = locals[q];
    out += "qubit " + std::to_string(q) + "\n";
    out += "probs";
    for (double x : local.probs.p) out += " " + fmt_g17(x);
    out += "\n";
    for (Axis basis : kAxes) {
      for (int outcome = 0; outcome < 2; ++outcome) {
        out += "effect ";
        out += axis_char(basis);
        out += " " + std::to_string(outcome) + "\n";
        const auto& e = local.effect(basis, outcome);
        for (int r = 0; r < 2; ++r) {
          for (int c = 0; c < 2; ++c) {
            if (c > 0) out += " ";
            out += fmt_g17(e(r, c).real()) + " " + fmt_g17(e(r, c).imag());
          }
          out += "\n";
        }
      }
    }
  }
  return out;
}

std::vector<LocalPovm> parse_local_povms(const std::string& text) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  auto next = [&]() -> std::vector<std::string> {
    while (i < lines.size()) {
      auto toks = split_ws(lines[i]);
      ++i;
      if (!toks.empty()) return toks;
    }
    throw ParseError(static_cast<int>(i) + 1, "unexpected end of POVM file");
  };

  auto header = next();
  if (header.size() != 2 || header[0] != "povm" || header[1] != "v1") {
    throw ParseError(1, "expected 'povm v1' header");
  }
  auto qline = next();
  std::uint64_t n = 0;
  if (qline.size() != 2 || qline[0] != "qubits" || !parse_u64(qline[1], n)) {
    throw ParseError(static_cast<int>(i), "expected 'qubits <N>'");
  }

  std::vector<LocalPovm> locals(n);
  for (std::uint64_t q = 0; q < n; ++q) {
    auto ql = next();
    if (ql.size() != 2 || ql[0] != "qubit") {
      throw ParseError(static_cast<int>(i), "expected 'qubit <q>'");
    }
    auto pl = next();
    if (pl.size() != 4 || pl[0] != "probs") {
      throw ParseError(static_cast<int>(i), "expected 'probs <px> <py> <pz>'");
    }
    LocalPovm& local = locals[q];
    for (int b = 0; b < 3; ++b) {
      if (!parse_double(pl[static_cast<std::size_t>(b) + 1],
                        local.probs.p[static_cast<std::size_t>(b)])) {
        throw ParseError(static_cast<int>(i), "malformed probability");
      }
    }
    for (int k = 0; k < 6; ++k) {
      auto el = next();
      if (el.size() != 3 || el[0] != "effect") {
        throw ParseError(static_cast<int>(i), "expected 'effect <basis> <b>'");
      }
      Axis basis;
      if (el[1] == "X") basis = Axis::X;
      else if (el[1] == "Y") basis = Axis::Y;
      else if (el[1] == "Z") basis = Axis::Z;
      else throw ParseError(static_cast<int>(i), "bad basis label");
      std::uint64_t outcome = 0;
      if (!parse_u64(el[2], outcome) || outcome > 1) {
        throw ParseError(static_cast<int>(i), "bad outcome label");
      }
      Eigen::Matrix2cd e;
      for (int r = 0; r < 2; ++r) {
        auto row = next();
        if (row.size() != 4) {
          throw ParseError(static_cast<int>(i),
                           "expected four numbers per effect row");
        }
        double re0, im0, re1, im1;
        if (!parse_double(row[0], re0) || !parse_double(row[1], im0) ||
            !parse_double(row[2], re1) || !parse_double(row[3], im1)) {
          throw ParseError(static_cast<int>(i), "malformed effect entry");
        }
        e(r, 0) = {re0, im0};
        e(r, 1) = {re1, im1};
      }
      local.effect(basis, static_cast<int>(outcome)) = e;
    }
  }
  return locals;
}

}  // namespace povmkit
