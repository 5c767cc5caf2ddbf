#pragma once

#include <span>
#include <string>
#include <vector>

#include "qfolio/statevector.hpp"
#include "qfolio/topology.hpp"

namespace qfolio::ansatz {

// TwoLocal: Ry rotation layers alternating with Cz entanglement layers,
// (r+1)*n parameter slots. Bfcd: Ry layers alternating with shared-parameter
// Ryz*Rzy pair rotations, r*n + r*E slots and no trailing rotation layer.
enum class Family { TwoLocal, Bfcd };

// Bilinear: two sub-layers pairing adjacent line qubits, odd-start pairs
// (1,2),(3,4),... before even-start pairs (0,1),(2,3),...
// Colored: one sub-layer per color class of a properly edge-colored graph.
enum class Entanglement { Bilinear, Colored };

Family parse_family(const std::string& name);
Entanglement parse_entanglement(const std::string& name);
const char* family_name(Family family);
const char* entanglement_name(Entanglement entanglement);

struct AnsatzSpec {
  Family family = Family::TwoLocal;
  Entanglement entanglement = Entanglement::Bilinear;
  topology::CouplingGraph graph;  // node_count == n_qubits
  int repetitions = 1;
  int n_qubits = 0;
};

struct AnsatzCircuit {
  std::vector<sim::Gate> gates;
  int n_qubits = 0;
  int slot_count = 0;
  std::vector<int> slot_multiplicity;  // gates sharing each slot
  int two_qubit_gate_count = 0;
};

// Edge sequence of one entanglement layer. Throws if Colored is requested on
// an uncolored graph, or Bilinear on a graph that is not a line.
std::vector<topology::Edge> entanglement_order(
    const topology::CouplingGraph& graph, Entanglement entanglement);

AnsatzCircuit build(const AnsatzSpec& spec);

// Resolves parameters. Parametrized gates whose bound |theta_slot| < cutoff
// are omitted from this binding only; unparametrized gates are always kept.
std::vector<sim::BoundGate> bind(const AnsatzCircuit& circuit,
                                 std::span<const double> theta, double cutoff);

}  // namespace qfolio::ansatz
