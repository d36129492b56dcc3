#include "povmkit/pauli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "povmkit/io_util.hpp"
#include "povmkit/rng.hpp"

namespace povmkit {

namespace {

using complexd = std::complex<double>;

Eigen::Matrix2cd make_pauli(Axis axis) {
  Eigen::Matrix2cd m;
  switch (axis) {
    case Axis::X:
      m << 0, 1, 1, 0;
      break;
    case Axis::Y:
      m << 0, complexd(0, -1), complexd(0, 1), 0;
      break;
    case Axis::Z:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

/// Sorts, merges duplicates, and validates qubit indices.
Observable canonicalize(int num_qubits,
                        std::vector<std::pair<double, PauliString>> terms) {
  std::map<PauliString, double> merged;
  for (auto& [coeff, str] : terms) {
    std::sort(str.factors.begin(), str.factors.end());
    merged[str] += coeff;
  }
  Observable obs;
  obs.num_qubits = num_qubits;
  obs.terms.reserve(merged.size());
  for (auto& [str, coeff] : merged) {
    obs.terms.emplace_back(coeff, str);
  }
  return obs;
}

}  // namespace

std::string PauliString::dense(int num_qubits) const {
  std::string s(static_cast<std::size_t>(num_qubits), 'I');
  for (auto [q, axis] : factors) s[static_cast<std::size_t>(q)] = axis_char(axis);
  return s;
}

Eigen::Vector2cd axis_eigenstate(Axis basis, int outcome) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (basis) {
    case Axis::X:
      return outcome == 0 ? Eigen::Vector2cd(r, r) : Eigen::Vector2cd(r, -r);
    case Axis::Y:
      return outcome == 0 ? Eigen::Vector2cd(r, complexd(0, r))
                          : Eigen::Vector2cd(r, complexd(0, -r));
    case Axis::Z:
      return outcome == 0 ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
  }
  throw std::logic_error("bad axis");
}

double bloch_component(const Eigen::Vector2cd& psi, Axis axis) {
  const complexd cross = std::conj(psi(0)) * psi(1);
  switch (axis) {
    case Axis::X:
      return 2.0 * cross.real();
    case Axis::Y:
      return 2.0 * cross.imag();
    case Axis::Z:
      return std::norm(psi(0)) - std::norm(psi(1));
  }
  throw std::logic_error("bad axis");
}

const Eigen::Matrix2cd& pauli_matrix(Axis axis) {
  static const Eigen::Matrix2cd x = make_pauli(Axis::X);
  static const Eigen::Matrix2cd y = make_pauli(Axis::Y);
  static const Eigen::Matrix2cd z = make_pauli(Axis::Z);
  switch (axis) {
    case Axis::X:
      return x;
    case Axis::Y:
      return y;
    case Axis::Z:
      return z;
  }
  throw std::logic_error("bad axis");
}

const Eigen::Matrix2cd& pauli_op_matrix(PauliOp op) {
  static const Eigen::Matrix2cd identity = Eigen::Matrix2cd::Identity();
  if (op == PauliOp::I) return identity;
  return pauli_matrix(static_cast<Axis>(static_cast<int>(op) - 1));
}

ProductState ProductState::computational(const std::string& bits) {
  ProductState state;
  state.qubits.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("bitstring may contain only '0' and '1'");
    }
    state.qubits.push_back(axis_eigenstate(Axis::Z, c - '0'));
  }
  return state;
}

ProductState ProductState::from_bloch(
    const std::vector<std::pair<double, double>>& angles) {
  ProductState state;
  state.qubits.reserve(angles.size());
  for (auto [theta, phi] : angles) {
    Eigen::Vector2cd v;
    v << std::cos(theta / 2.0),
        std::exp(complexd(0, phi)) * std::sin(theta / 2.0);
    state.qubits.push_back(v);
  }
  return state;
}

void ProductState::validate() const {
  for (std::size_t q = 0; q < qubits.size(); ++q) {
    if (std::abs(qubits[q].norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("qubit " + std::to_string(q) +
                                  " state is not normalized");
    }
  }
}

namespace {

bool is_dense_token(const std::string& tok) {
  return std::all_of(tok.begin(), tok.end(), [](char c) {
    return c == 'I' || c == 'X' || c == 'Y' || c == 'Z';
  });
}

PauliString parse_dense(const std::string& tok, int num_qubits, int line) {
  if (static_cast<int>(tok.size()) != num_qubits) {
    throw ParseError(line, "axis string has length " +
                               std::to_string(tok.size()) + ", expected " +
                               std::to_string(num_qubits));
  }
  PauliString str;
  for (int q = 0; q < num_qubits; ++q) {
    switch (tok[static_cast<std::size_t>(q)]) {
      case 'I':
        break;
      case 'X':
        str.factors.emplace_back(q, Axis::X);
        break;
      case 'Y':
        str.factors.emplace_back(q, Axis::Y);
        break;
      case 'Z':
        str.factors.emplace_back(q, Axis::Z);
        break;
    }
  }
  return str;
}

PauliString parse_sparse(const std::vector<std::string>& tokens,
                         std::size_t first, int num_qubits, int line) {
  PauliString str;
  std::set<int> seen;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    Axis axis;
    switch (tok[0]) {
      case 'X':
        axis = Axis::X;
        break;
      case 'Y':
        axis = Axis::Y;
        break;
      case 'Z':
        axis = Axis::Z;
        break;
      default:
        throw ParseError(line, "illegal character '" + std::string(1, tok[0]) +
                                   "' in term");
    }
    std::uint64_t q = 0;
    if (tok.size() < 2 || !parse_u64(tok.substr(1), q)) {
      throw ParseError(line, "malformed sparse factor '" + tok + "'");
    }
    if (q >= static_cast<std::uint64_t>(num_qubits)) {
      throw ParseError(line, "qubit index " + std::to_string(q) +
                                 " out of range for " +
                                 std::to_string(num_qubits) + " qubits");
    }
    if (!seen.insert(static_cast<int>(q)).second) {
      throw ParseError(line, "qubit " + std::to_string(q) +
                                 " appears twice in one term");
    }
    str.factors.emplace_back(static_cast<int>(q), axis);
  }
  std::sort(str.factors.begin(), str.factors.end());
  return str;
}

}  // namespace

Observable parse_observable(const std::string& text) {
  int num_qubits = -1;
  std::vector<std::pair<double, PauliString>> terms;

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    std::string line = lines[i];
    if (auto pos = line.find('#'); pos != std::string::npos) {
      line.erase(pos);
    }
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    if (num_qubits < 0) {
      std::uint64_t n = 0;
      if (tokens.size() != 2 || tokens[0] != "qubits" ||
          !parse_u64(tokens[1], n) || n == 0) {
        throw ParseError(line_no,
                         "expected header 'qubits <N>' before any term");
      }
      num_qubits = static_cast<int>(n);
      continue;
    }

    double coeff = 0.0;
    if (!parse_double(tokens[0], coeff)) {
      throw ParseError(line_no, "malformed coefficient '" + tokens[0] + "'");
    }
    if (!std::isfinite(coeff)) {
      throw ParseError(line_no, "coefficient is not finite");
    }

    PauliString str;
    if (tokens.size() == 2 && is_dense_token(tokens[1])) {
      str = parse_dense(tokens[1], num_qubits, line_no);
    } else if (tokens.size() == 2 && !is_dense_token(tokens[1]) &&
               tokens[1].find_first_not_of("IXYZ0123456789") !=
                   std::string::npos) {
      // A single token that is neither dense nor sparse: point at the first
      // offending character.
      const auto bad =
          tokens[1].find_first_not_of("IXYZ0123456789");
      throw ParseError(line_no, "illegal character '" +
                                    std::string(1, tokens[1][bad]) +
                                    "' in term");
    } else {
      str = parse_sparse(tokens, 1, num_qubits, line_no);
    }
    terms.emplace_back(coeff, std::move(str));
  }

  if (num_qubits < 0) {
    throw ParseError(static_cast<int>(lines.size()) + 1,
                     "missing 'qubits <N>' header");
  }
  return canonicalize(num_qubits, std::move(terms));
}

std::string serialize_observable(const Observable& obs) {
  std::string out = "qubits " + std::to_string(obs.num_qubits) + "\n";
  for (const auto& [coeff, str] : obs.terms) {
    out += fmt_g17(coeff);
    out += ' ';
    out += str.dense(obs.num_qubits);
    out += '\n';
  }
  return out;
}

double exact_expectation(const Observable& obs, const ProductState& state) {
  if (obs.num_qubits != state.num_qubits()) {
    throw std::invalid_argument("observable is on " +
                                std::to_string(obs.num_qubits) +
                                " qubits, state on " +
                                std::to_string(state.num_qubits()));
  }
  double total = 0.0;
  for (const auto& [coeff, str] : obs.terms) {
    double factor = 1.0;
    for (auto [q, axis] : str.factors) {
      factor *= bloch_component(state.qubits[static_cast<std::size_t>(q)], axis);
      if (factor == 0.0) break;
    }
    total += coeff * factor;
  }
  return total;
}

Observable random_observable(int num_qubits, int num_terms,
                             double coefficient_scale, std::uint64_t seed,
                             const RandomObservableOptions& options) {
  if (num_qubits < 1) {
    throw std::invalid_argument("num_qubits must be positive");
  }
  const double strings_available = std::pow(4.0, num_qubits);
  if (num_terms < 1 || static_cast<double>(num_terms) > strings_available) {
    throw std::invalid_argument("num_terms must be in [1, 4^num_qubits]");
  }

  double wsum = 0.0;
  for (double w : options.axis_weights) wsum += w;
  if (wsum <= 0.0) {
    throw std::invalid_argument("axis weights must have positive sum");
  }
  std::array<double, 4> cum{};
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    acc += options.axis_weights[static_cast<std::size_t>(k)] / wsum;
    cum[static_cast<std::size_t>(k)] = acc;
  }

  std::set<PauliString> used;
  std::vector<std::pair<double, PauliString>> terms;
  std::uint64_t draw = 0;
  while (static_cast<int>(terms.size()) < num_terms) {
    PauliString str;
    for (int q = 0; q < num_qubits; ++q) {
      const double u = rng::uniform01(seed, rng::Stream::ObservableGen, draw,
                                      static_cast<std::uint64_t>(q), 0);
      int k = 0;
      while (k < 3 && u >= cum[static_cast<std::size_t>(k)]) ++k;
      if (k > 0) str.factors.emplace_back(q, static_cast<Axis>(k - 1));
    }
    const double cu = rng::uniform01(seed, rng::Stream::ObservableGen, draw,
                                     static_cast<std::uint64_t>(num_qubits), 1);
    ++draw;
    if (!used.insert(str).second) continue;

    const std::size_t j = terms.size();
    double magnitude_scale = 1.0;
    if (options.decay > 0.0 && num_terms > 1) {
      magnitude_scale = std::exp(-options.decay * static_cast<double>(j) /
                                 static_cast<double>(num_terms - 1));
    }
    const double coeff = coefficient_scale * magnitude_scale * (2.0 * cu - 1.0);
    terms.emplace_back(coeff, std::move(str));
  }
  return canonicalize(num_qubits, std::move(terms));
}

}  // namespace povmkit
