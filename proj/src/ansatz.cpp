#include "qfolio/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qfolio::ansatz {

Family parse_family(const std::string& name) {
  if (name == "twolocal") return Family::TwoLocal;
  if (name == "bfcd") return Family::Bfcd;
  throw std::invalid_argument("unknown ansatz family '" + name +
                              "' (expected twolocal|bfcd)");
}

Entanglement parse_entanglement(const std::string& name) {
  if (name == "bilinear") return Entanglement::Bilinear;
  if (name == "color") return Entanglement::Colored;
  throw std::invalid_argument("unknown entanglement '" + name +
                              "' (expected bilinear|color)");
}

const char* family_name(Family family) {
  return family == Family::TwoLocal ? "twolocal" : "bfcd";
}

const char* entanglement_name(Entanglement entanglement) {
  return entanglement == Entanglement::Bilinear ? "bilinear" : "color";
}

std::vector<topology::Edge> entanglement_order(
    const topology::CouplingGraph& graph, Entanglement entanglement) {
  if (entanglement == Entanglement::Bilinear) {
    // The bilinear map is defined on the line; pairs starting at an odd
    // qubit index come first, then pairs starting at an even index.
    const auto line = topology::line_graph(graph.node_count);
    if (graph.edges != line.edges) {
      throw std::invalid_argument(
          "bilinear entanglement requires the line coupling graph");
    }
    std::vector<topology::Edge> order;
    order.reserve(graph.edges.size());
    for (int parity : {1, 0}) {
      for (int i = parity; i + 1 < graph.node_count; i += 2) {
        order.push_back({i, i + 1});
      }
    }
    return order;
  }
  if (!graph.edge_colors) {
    throw std::invalid_argument(
        "color entanglement requires an edge-colored coupling graph");
  }
  std::vector<std::size_t> idx(graph.edges.size());
  for (std::size_t e = 0; e < idx.size(); ++e) idx[e] = e;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const int ca = (*graph.edge_colors)[a];
    const int cb = (*graph.edge_colors)[b];
    if (ca != cb) return ca < cb;
    return graph.edges[a] < graph.edges[b];
  });
  std::vector<topology::Edge> order;
  order.reserve(idx.size());
  for (std::size_t e : idx) order.push_back(graph.edges[e]);
  return order;
}

AnsatzCircuit build(const AnsatzSpec& spec) {
  if (spec.n_qubits < 2) {
    throw std::invalid_argument("ansatz: need at least 2 qubits");
  }
  if (spec.repetitions < 1) {
    throw std::invalid_argument("ansatz: repetitions must be >= 1");
  }
  if (spec.graph.node_count != spec.n_qubits) {
    throw std::invalid_argument(
        "ansatz: coupling graph size does not match qubit count");
  }
  const auto edges = entanglement_order(spec.graph, spec.entanglement);

  AnsatzCircuit circuit;
  circuit.n_qubits = spec.n_qubits;
  int next_slot = 0;

  auto rotation_layer = [&] {
    for (int qb = 0; qb < spec.n_qubits; ++qb) {
      circuit.gates.push_back({sim::GateKind::Ry, qb, -1, next_slot});
      circuit.slot_multiplicity.push_back(1);
      ++next_slot;
    }
  };

  if (spec.family == Family::TwoLocal) {
    rotation_layer();
    for (int rep = 0; rep < spec.repetitions; ++rep) {
      for (const auto& [u, v] : edges) {
        circuit.gates.push_back({sim::GateKind::Cz, u, v, -1});
        ++circuit.two_qubit_gate_count;
      }
      rotation_layer();
    }
  } else {
    // Bfcd: r x [rotation layer; Ryz(t_e) Rzy(t_e) per edge], with the two
    // gates of an edge sharing one slot and no trailing rotation layer.
    for (int rep = 0; rep < spec.repetitions; ++rep) {
      rotation_layer();
      for (const auto& [u, v] : edges) {
        circuit.gates.push_back({sim::GateKind::Ryz, u, v, next_slot});
        circuit.gates.push_back({sim::GateKind::Rzy, u, v, next_slot});
        circuit.slot_multiplicity.push_back(2);
        ++next_slot;
        circuit.two_qubit_gate_count += 2;
      }
    }
  }
  circuit.slot_count = next_slot;
  return circuit;
}

std::vector<sim::BoundGate> bind(const AnsatzCircuit& circuit,
                                 std::span<const double> theta, double cutoff) {
  if (static_cast<int>(theta.size()) != circuit.slot_count) {
    throw std::invalid_argument(
        "bind: parameter vector length " + std::to_string(theta.size()) +
        " does not match slot count " + std::to_string(circuit.slot_count));
  }
  if (cutoff < 0.0) throw std::invalid_argument("bind: cutoff must be >= 0");
  std::vector<sim::BoundGate> bound;
  bound.reserve(circuit.gates.size());
  for (const auto& gate : circuit.gates) {
    if (!sim::is_parametrized(gate.kind)) {
      bound.push_back({gate.kind, gate.q0, gate.q1, 0.0});
      continue;
    }
    const double angle = theta[gate.slot];
    if (std::abs(angle) < cutoff) continue;
    bound.push_back({gate.kind, gate.q0, gate.q1, angle});
  }
  return bound;
}

}  // namespace qfolio::ansatz
