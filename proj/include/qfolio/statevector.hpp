#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "qfolio/types.hpp"

namespace qfolio::sim {

// Gate set used by the ansatz families.
//   Ry(t)  = exp(-i t/2 Y)                   one qubit
//   Cz     = diag(1, 1, 1, -1)               two qubits, unparametrized
//   Ryz(t) = exp(-i t/2 Y(x)Z)               Y on q0, Z on q1
//   Rzy(t) = exp(-i t/2 Z(x)Y)               Z on q0, Y on q1
enum class GateKind { Ry, Cz, Ryz, Rzy };

bool is_parametrized(GateKind kind);
const char* gate_name(GateKind kind);

// Circuit element with an unresolved parameter slot. Slots may be shared by
// several gates; slot == -1 marks unparametrized kinds.
struct Gate {
  GateKind kind = GateKind::Ry;
  int q0 = 0;
  int q1 = -1;
  int slot = -1;
};

// Gate with its angle resolved, ready to execute.
struct BoundGate {
  GateKind kind = GateKind::Ry;
  int q0 = 0;
  int q1 = -1;
  double angle = 0.0;
};

// Dense statevector over n qubits. Basis index bit k corresponds to qubit k
// (qubit 0 is the least significant bit). Practical limit ~25 qubits.
class StateVector {
 public:
  static constexpr int kMaxQubits = 25;

  explicit StateVector(int n_qubits);  // |0...0>

  // Adopts explicit amplitudes; must be normalized to within 1e-10.
  static StateVector from_amplitudes(int n_qubits,
                                     std::vector<std::complex<double>> amps);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const std::complex<double>> amplitudes() const { return amps_; }

  void apply(const BoundGate& gate);
  double norm_sq() const;
  std::vector<double> probabilities() const;

 private:
  int n_qubits_;
  std::vector<std::complex<double>> amps_;
};

// Applies the gates in order to |0...0>. The slot-resolving overload throws
// on a parametrized gate whose slot is missing from theta.
StateVector run_circuit(std::span<const BoundGate> gates, int n_qubits);
StateVector run_circuit(std::span<const Gate> gates,
                        std::span<const double> theta, int n_qubits);

// n_shots i.i.d. computational-basis measurements, deterministic given seed.
std::vector<Bitstring> sample(const StateVector& state, int n_shots,
                              std::uint64_t seed);
// Same draws aggregated into (outcome, count), ordered by outcome.
std::vector<std::pair<Bitstring, int>> sample_counts(const StateVector& state,
                                                     int n_shots,
                                                     std::uint64_t seed);

// Plain-text gate list for debugging.
void write_circuit(std::ostream& os, std::span<const Gate> gates, int n_qubits);

}  // namespace qfolio::sim
