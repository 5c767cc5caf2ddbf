#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qfolio::oracles {

namespace {

CMat matmul(const CMat& a, const CMat& b, int dim) {
  CMat out(static_cast<std::size_t>(dim) * dim, cplx{0.0, 0.0});
  for (int i = 0; i < dim; ++i) {
    for (int k = 0; k < dim; ++k) {
      const cplx aik = a[i * dim + k];
      for (int j = 0; j < dim; ++j) {
        out[i * dim + j] += aik * b[k * dim + j];
      }
    }
  }
  return out;
}

double max_abs(const CMat& m) {
  double best = 0.0;
  for (const cplx& v : m) best = std::max(best, std::abs(v));
  return best;
}

// Pauli matrices.
const CMat kY{{0.0, 0.0}, {0.0, -1.0}, {0.0, 1.0}, {0.0, 0.0}};
const CMat kZ{{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {-1.0, 0.0}};

// Local two-qubit basis: index = bit(first operand) + 2 * bit(second).
CMat kron_local(const CMat& on_first, const CMat& on_second) {
  CMat out(16, cplx{0.0, 0.0});
  for (int bf_out = 0; bf_out < 2; ++bf_out) {
    for (int bs_out = 0; bs_out < 2; ++bs_out) {
      for (int bf_in = 0; bf_in < 2; ++bf_in) {
        for (int bs_in = 0; bs_in < 2; ++bs_in) {
          out[(bf_out + 2 * bs_out) * 4 + (bf_in + 2 * bs_in)] =
              on_first[bf_out * 2 + bf_in] * on_second[bs_out * 2 + bs_in];
        }
      }
    }
  }
  return out;
}

}  // namespace

CMat expm(const CMat& m, int dim) {
  // Scale until the entries are small, Taylor to machine precision, square
  // back up.
  int squarings = 0;
  double scale = max_abs(m);
  while (scale > 0.5) {
    scale /= 2.0;
    ++squarings;
  }
  const double factor = std::ldexp(1.0, -squarings);
  CMat scaled(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) scaled[i] = m[i] * factor;

  CMat result(static_cast<std::size_t>(dim) * dim, cplx{0.0, 0.0});
  for (int i = 0; i < dim; ++i) result[i * dim + i] = 1.0;
  CMat term = result;
  for (int k = 1; k <= 24; ++k) {
    term = matmul(term, scaled, dim);
    for (auto& v : term) v /= static_cast<double>(k);
    for (std::size_t i = 0; i < result.size(); ++i) result[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) result = matmul(result, result, dim);
  return result;
}

CMat gate_matrix(const sim::BoundGate& gate) {
  const cplx mihalf{0.0, -gate.angle / 2.0};  // -i * angle / 2
  switch (gate.kind) {
    case sim::GateKind::Ry: {
      CMat gen(4);
      for (int i = 0; i < 4; ++i) gen[i] = mihalf * kY[i];
      return expm(gen, 2);
    }
    case sim::GateKind::Cz: {
      CMat cz(16, cplx{0.0, 0.0});
      cz[0] = cz[5] = cz[10] = 1.0;
      cz[15] = -1.0;
      return cz;
    }
    case sim::GateKind::Ryz: {
      CMat gen = kron_local(kY, kZ);
      for (auto& v : gen) v *= mihalf;
      return expm(gen, 4);
    }
    case sim::GateKind::Rzy: {
      CMat gen = kron_local(kZ, kY);
      for (auto& v : gen) v *= mihalf;
      return expm(gen, 4);
    }
  }
  throw std::logic_error("gate_matrix: unknown kind");
}

std::vector<cplx> dense_run_circuit(std::span<const sim::BoundGate> gates,
                                    int n_qubits) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::vector<cplx> state(dim, cplx{0.0, 0.0});
  state[0] = 1.0;
  for (const auto& gate : gates) {
    const CMat u = gate_matrix(gate);
    if (gate.kind == sim::GateKind::Ry) {
      const std::size_t bit = std::size_t{1} << gate.q0;
      for (std::size_t i = 0; i < dim; ++i) {
        if (i & bit) continue;
        const cplx v0 = state[i];
        const cplx v1 = state[i | bit];
        state[i] = u[0] * v0 + u[1] * v1;
        state[i | bit] = u[2] * v0 + u[3] * v1;
      }
    } else {
      const std::size_t b0 = std::size_t{1} << gate.q0;
      const std::size_t b1 = std::size_t{1} << gate.q1;
      for (std::size_t i = 0; i < dim; ++i) {
        if ((i & b0) || (i & b1)) continue;
        const std::size_t idx[4] = {i, i | b0, i | b1, i | b0 | b1};
        cplx in[4], out[4];
        for (int k = 0; k < 4; ++k) in[k] = state[idx[k]];
        for (int r = 0; r < 4; ++r) {
          out[r] = cplx{0.0, 0.0};
          for (int k = 0; k < 4; ++k) out[r] += u[r * 4 + k] * in[k];
        }
        for (int k = 0; k < 4; ++k) state[idx[k]] = out[k];
      }
    }
  }
  return state;
}

bool instance_feasible(const portfolio::PortfolioInstance& instance,
                       Bitstring x) {
  double spend = 0.0;
  for (int i = 0; i < instance.n_bonds(); ++i) {
    if (bit(x, i)) {
      const auto& bond = instance.bonds[i];
      spend += bond.price * bond.lot_size * bond.lot_count;
    }
  }
  if (spend > instance.budget) return false;
  for (int d = 0; d < instance.n_dimensions(); ++d) {
    for (int cls = 0; cls < instance.classes_per_dim[d]; ++cls) {
      for (int j = 0; j < instance.n_metrics; ++j) {
        const auto& tm = instance.targets[d][cls][j];
        if (!tm.guardrail) continue;
        double attained = 0.0;
        for (int i = 0; i < instance.n_bonds(); ++i) {
          const auto& bond = instance.bonds[i];
          if (bond.class_of[d] == cls && bit(x, i)) {
            attained += bond.weight[d][j] * bond.lot_size * bond.lot_count;
          }
        }
        if (attained > tm.target + *tm.guardrail) return false;
        if (attained < tm.target - *tm.guardrail) return false;
      }
    }
  }
  return true;
}

ConstrainedOptimum constrained_optimum(
    const portfolio::PortfolioInstance& instance) {
  const int n = instance.n_bonds();
  if (n > 22) throw std::invalid_argument("constrained_optimum: n too large");
  ConstrainedOptimum best;
  const Bitstring end = Bitstring{1} << n;
  for (Bitstring x = 0; x < end; ++x) {
    if (!instance_feasible(instance, x)) continue;
    const double cost = portfolio::objective_cost(instance, x);
    if (!best.exists || cost < best.cost) {
      best.exists = true;
      best.x = x;
      best.cost = cost;
    }
  }
  return best;
}

double cvar_sorted(std::vector<double> costs, double alpha) {
  std::sort(costs.begin(), costs.end());
  const int n = static_cast<int>(costs.size());
  int k = static_cast<int>(std::ceil(alpha * n));
  k = std::clamp(k, 1, n);
  return std::accumulate(costs.begin(), costs.begin() + k, 0.0) / k;
}

namespace {

// Regularized lower incomplete gamma P(a, x), series + continued fraction.
double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad args");
  if (x == 0.0) return 0.0;
  const double log_gamma = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma);
  }
  // Lentz continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - log_gamma) * h;
  return 1.0 - q;
}

}  // namespace

double chi_square_quantile(int dof, double p) {
  if (dof < 1 || p <= 0.0 || p >= 1.0) {
    throw std::invalid_argument("chi_square_quantile: bad args");
  }
  const double a = dof / 2.0;
  double lo = 0.0;
  double hi = 1.0;
  while (gamma_p(a, hi / 2.0) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_p(a, mid / 2.0) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace qfolio::oracles
