#include "qfolio/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "qfolio/kernels.hpp"
#include "qfolio/rng.hpp"

namespace qfolio::sim {

bool is_parametrized(GateKind kind) { return kind != GateKind::Cz; }

const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::Ry:
      return "ry";
    case GateKind::Cz:
      return "cz";
    case GateKind::Ryz:
      return "ryz";
    case GateKind::Rzy:
      return "rzy";
  }
  return "?";
}

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1) {
    throw std::invalid_argument("StateVector: need at least 1 qubit");
  }
  if (n_qubits > kMaxQubits) {
    throw std::invalid_argument(
        "StateVector: " + std::to_string(n_qubits) +
        " qubits exceeds the dense-simulation limit of " +
        std::to_string(kMaxQubits));
  }
  amps_.assign(std::size_t{1} << n_qubits, {0.0, 0.0});
  amps_[0] = {1.0, 0.0};
}

StateVector StateVector::from_amplitudes(
    int n_qubits, std::vector<std::complex<double>> amps) {
  StateVector state(n_qubits);
  if (amps.size() != state.dim()) {
    throw std::invalid_argument("from_amplitudes: wrong amplitude count");
  }
  state.amps_ = std::move(amps);
  if (std::abs(state.norm_sq() - 1.0) > 1e-10) {
    throw std::invalid_argument("from_amplitudes: state is not normalized");
  }
  return state;
}

void StateVector::apply(const BoundGate& gate) {
  const bool two_qubit = gate.kind != GateKind::Ry;
  if (gate.q0 < 0 || gate.q0 >= n_qubits_ ||
      (two_qubit && (gate.q1 < 0 || gate.q1 >= n_qubits_ || gate.q1 == gate.q0))) {
    throw std::invalid_argument("apply: bad gate operands");
  }
  const auto& ops = kernels::active();
  const double c = std::cos(gate.angle / 2.0);
  const double s = std::sin(gate.angle / 2.0);
  switch (gate.kind) {
    case GateKind::Ry:
      ops.rotate_pairs(amps_.data(), amps_.size(), gate.q0, c, s);
      break;
    case GateKind::Cz:
      ops.phase_flip(amps_.data(), amps_.size(),
                     (std::uint64_t{1} << gate.q0) | (std::uint64_t{1} << gate.q1));
      break;
    case GateKind::Ryz:  // Y on q0, sign conditioned on q1
      ops.rotate_pairs_signed(amps_.data(), amps_.size(), gate.q0, gate.q1, c, s);
      break;
    case GateKind::Rzy:  // Y on q1, sign conditioned on q0
      ops.rotate_pairs_signed(amps_.data(), amps_.size(), gate.q1, gate.q0, c, s);
      break;
  }
}

double StateVector::norm_sq() const {
  return kernels::active().norm_sq(amps_.data(), amps_.size());
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> probs(amps_.size());
  kernels::active().probabilities(amps_.data(), amps_.size(), probs.data());
  return probs;
}

StateVector run_circuit(std::span<const BoundGate> gates, int n_qubits) {
  StateVector state(n_qubits);
  for (const auto& gate : gates) state.apply(gate);
  return state;
}

StateVector run_circuit(std::span<const Gate> gates,
                        std::span<const double> theta, int n_qubits) {
  StateVector state(n_qubits);
  for (const auto& gate : gates) {
    double angle = 0.0;
    if (is_parametrized(gate.kind)) {
      if (gate.slot < 0 || gate.slot >= static_cast<int>(theta.size())) {
        throw std::invalid_argument("run_circuit: unbound parameter slot " +
                                    std::to_string(gate.slot));
      }
      angle = theta[gate.slot];
    }
    state.apply({gate.kind, gate.q0, gate.q1, angle});
  }
  return state;
}

std::vector<Bitstring> sample(const StateVector& state, int n_shots,
                              std::uint64_t seed) {
  if (n_shots < 1) throw std::invalid_argument("sample: n_shots must be >= 1");
  const std::vector<double> probs = state.probabilities();
  std::vector<double> cumulative(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cumulative[i] = acc;
  }
  // acc == 1 within round-off for a normalized state; draws scale with it so
  // the last outcome never falls off the table.
  Rng rng(seed);
  std::vector<Bitstring> shots(n_shots);
  for (int k = 0; k < n_shots; ++k) {
    const double u = rng.uniform() * acc;
    const auto it =
        std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t idx =
        std::min(static_cast<std::size_t>(it - cumulative.begin()),
                 probs.size() - 1);
    shots[k] = static_cast<Bitstring>(idx);
  }
  return shots;
}

std::vector<std::pair<Bitstring, int>> sample_counts(const StateVector& state,
                                                     int n_shots,
                                                     std::uint64_t seed) {
  if (n_shots < 1) throw std::invalid_argument("sample: n_shots must be >= 1");
  // Same draws as sample(): sorting the uniforms lets one forward merge over
  // the cumulative distribution replace per-shot binary searches.
  const std::vector<double> probs = state.probabilities();
  Rng rng(seed);
  std::vector<double> draws(n_shots);
  double total = 0.0;
  for (double p : probs) total += p;
  for (double& u : draws) u = rng.uniform() * total;
  std::sort(draws.begin(), draws.end());

  std::vector<std::pair<Bitstring, int>> counts;
  std::size_t outcome = 0;
  double cumulative = probs.empty() ? 0.0 : probs[0];
  for (const double u : draws) {
    while (u >= cumulative && outcome + 1 < probs.size()) {
      cumulative += probs[++outcome];
    }
    if (!counts.empty() && counts.back().first == outcome) {
      ++counts.back().second;
    } else {
      counts.push_back({static_cast<Bitstring>(outcome), 1});
    }
  }
  return counts;
}

void write_circuit(std::ostream& os, std::span<const Gate> gates, int n_qubits) {
  os << "qubits " << n_qubits << "\n";
  for (const auto& gate : gates) {
    os << gate_name(gate.kind) << " " << gate.q0;
    if (gate.kind != GateKind::Ry) os << " " << gate.q1;
    if (is_parametrized(gate.kind)) os << " slot " << gate.slot;
    os << "\n";
  }
}

}  // namespace qfolio::sim
