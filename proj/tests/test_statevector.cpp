#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>

#include "oracles.hpp"
#include "qfolio/kernels.hpp"
#include "qfolio/rng.hpp"
#include "qfolio/statevector.hpp"

using namespace qfolio;
using namespace qfolio::sim;

namespace {

using cplx = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;

std::vector<BoundGate> random_circuit(int n_qubits, int n_gates,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BoundGate> gates;
  gates.reserve(n_gates);
  for (int g = 0; g < n_gates; ++g) {
    const int kind = static_cast<int>(rng.uniform_int(4));
    const double angle = rng.uniform(-2.0 * kPi, 2.0 * kPi);
    const int q0 = static_cast<int>(rng.uniform_int(n_qubits));
    int q1 = q0;
    if (n_qubits > 1) {
      while (q1 == q0) q1 = static_cast<int>(rng.uniform_int(n_qubits));
    }
    if (n_qubits == 1 || kind == 0) {
      gates.push_back({GateKind::Ry, q0, -1, angle});
    } else if (kind == 1) {
      gates.push_back({GateKind::Cz, q0, q1, 0.0});
    } else if (kind == 2) {
      gates.push_back({GateKind::Ryz, q0, q1, angle});
    } else {
      gates.push_back({GateKind::Rzy, q0, q1, angle});
    }
  }
  return gates;
}

double max_oracle_diff(const StateVector& state,
                       const std::vector<cplx>& oracle) {
  double worst = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    worst = std::max(worst, std::abs(amps[i] - oracle[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("single-qubit Ry basics") {
  StateVector state(1);
  state.apply({GateKind::Ry, 0, -1, kPi});
  CHECK(std::abs(state.amplitudes()[1] - cplx{1.0, 0.0}) < 1e-12);
  CHECK(std::abs(state.amplitudes()[0]) < 1e-12);
}

TEST_CASE("Cz flips the phase of |11> only") {
  SUBCASE("on the Bell state") {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    auto state = StateVector::from_amplitudes(
        2, {inv_sqrt2, 0.0, 0.0, inv_sqrt2});
    state.apply({GateKind::Cz, 0, 1, 0.0});
    CHECK(state.amplitudes()[0].real() == doctest::Approx(inv_sqrt2));
    CHECK(state.amplitudes()[3].real() == doctest::Approx(-inv_sqrt2));
  }
  SUBCASE("on the uniform superposition") {
    StateVector s(2);
    s.apply({GateKind::Ry, 0, -1, kPi / 2.0});
    s.apply({GateKind::Ry, 1, -1, kPi / 2.0});
    s.apply({GateKind::Cz, 0, 1, 0.0});
    const auto amps = s.amplitudes();
    CHECK(amps[0].real() == doctest::Approx(0.5));
    CHECK(amps[1].real() == doctest::Approx(0.5));
    CHECK(amps[2].real() == doctest::Approx(0.5));
    CHECK(amps[3].real() == doctest::Approx(-0.5));
  }
}

TEST_CASE("Rzy rotates the second operand conditioned on the first") {
  const double theta = 0.83;
  StateVector state(2);
  state.apply({GateKind::Rzy, 0, 1, theta});
  const auto amps = state.amplitudes();
  // |00> -> cos(t/2)|00> + sin(t/2)|01>, writing |q0 q1> (qubit 1 is the Y
  // target, basis index 0b10).
  CHECK(amps[0].real() == doctest::Approx(std::cos(theta / 2.0)));
  CHECK(amps[2].real() == doctest::Approx(std::sin(theta / 2.0)));
  CHECK(std::abs(amps[1]) < 1e-15);
  CHECK(std::abs(amps[3]) < 1e-15);

  SUBCASE("matches the matrix-exponential oracle") {
    const std::vector<BoundGate> gates{{GateKind::Rzy, 0, 1, theta}};
    const auto oracle = oracles::dense_run_circuit(gates, 2);
    CHECK(max_oracle_diff(state, oracle) < 1e-12);
  }
}

TEST_CASE("operand validation") {
  StateVector state(2);
  CHECK_THROWS_AS(state.apply({GateKind::Ry, 2, -1, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(state.apply({GateKind::Cz, 1, 1, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(StateVector(26), std::invalid_argument);
}

TEST_CASE("random circuits match the dense oracle") {
  for (int n = 1; n <= 6; ++n) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto gates = random_circuit(n, 60, 100 * n + seed);
      const auto state = run_circuit(gates, n);
      const auto oracle = oracles::dense_run_circuit(gates, n);
      CHECK(max_oracle_diff(state, oracle) <= 1e-10);
      CHECK(state.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("disjoint Ry gates commute") {
  std::vector<BoundGate> ab{{GateKind::Ry, 0, -1, 0.7},
                            {GateKind::Ry, 2, -1, -1.3}};
  std::vector<BoundGate> ba{ab[1], ab[0]};
  const auto s1 = run_circuit(ab, 3);
  const auto s2 = run_circuit(ba, 3);
  for (std::size_t i = 0; i < s1.dim(); ++i) {
    CHECK(std::abs(s1.amplitudes()[i] - s2.amplitudes()[i]) < 1e-15);
  }
}

TEST_CASE("Ryz and Rzy on the same pair commute") {
  std::vector<BoundGate> prefix{{GateKind::Ry, 0, -1, 0.3},
                                {GateKind::Ry, 1, -1, 1.1},
                                {GateKind::Ry, 2, -1, -0.5}};
  auto c1 = prefix;
  c1.push_back({GateKind::Ryz, 0, 1, 0.9});
  c1.push_back({GateKind::Rzy, 0, 1, -0.4});
  auto c2 = prefix;
  c2.push_back({GateKind::Rzy, 0, 1, -0.4});
  c2.push_back({GateKind::Ryz, 0, 1, 0.9});
  const auto s1 = run_circuit(c1, 3);
  const auto s2 = run_circuit(c2, 3);
  for (std::size_t i = 0; i < s1.dim(); ++i) {
    CHECK(std::abs(s1.amplitudes()[i] - s2.amplitudes()[i]) <= 1e-12);
  }
}

TEST_CASE("norm is preserved over a long random circuit") {
  const auto gates = random_circuit(10, 10000, 7);
  const auto state = run_circuit(gates, 10);
  CHECK(std::abs(state.norm_sq() - 1.0) <= 1e-10);
}

TEST_CASE("slot-resolving run_circuit rejects unbound slots") {
  std::vector<Gate> gates{{GateKind::Ry, 0, -1, 2}};
  std::vector<double> theta{0.5};
  CHECK_THROWS_AS(run_circuit(gates, theta, 1), std::invalid_argument);
  std::vector<Gate> ok{{GateKind::Ry, 0, -1, 0}};
  const auto state = run_circuit(ok, theta, 1);
  CHECK(state.dim() == 2);
}

TEST_CASE("empty circuit leaves |0...0>") {
  const auto state = run_circuit(std::vector<BoundGate>{}, 3);
  CHECK(state.amplitudes()[0].real() == doctest::Approx(1.0));
  CHECK(state.norm_sq() == doctest::Approx(1.0));
}

TEST_CASE("sampling") {
  SUBCASE("a basis state samples to itself") {
    StateVector state(3);
    state.apply({GateKind::Ry, 0, -1, kPi});
    state.apply({GateKind::Ry, 2, -1, kPi});
    for (Bitstring shot : sample(state, 64, 5)) CHECK(shot == 0b101);
  }
  SUBCASE("fair coin lands within 5 sigma") {
    StateVector state(1);
    state.apply({GateKind::Ry, 0, -1, kPi / 2.0});
    const int shots = 8192;
    int ones = 0;
    for (Bitstring shot : sample(state, shots, 11)) ones += shot & 1;
    const double sigma = std::sqrt(shots * 0.25);
    CHECK(std::abs(ones - shots / 2.0) <= 5.0 * sigma);
  }
  SUBCASE("same seed gives the same shots") {
    const auto gates = random_circuit(4, 30, 3);
    const auto state = run_circuit(gates, 4);
    CHECK(sample(state, 512, 17) == sample(state, 512, 17));
    CHECK(sample(state, 512, 17) != sample(state, 512, 18));
  }
  SUBCASE("counts aggregate the same draws") {
    const auto gates = random_circuit(3, 20, 9);
    const auto state = run_circuit(gates, 3);
    const auto shots = sample(state, 256, 23);
    std::map<Bitstring, int> expected;
    for (Bitstring s : shots) ++expected[s];
    const auto counts = sample_counts(state, 256, 23);
    CHECK(counts.size() == expected.size());
    for (const auto& [x, c] : counts) CHECK(expected.at(x) == c);
  }
}

TEST_CASE("sampling chi-square statistic stays below the 99.9% quantile") {
  // Random 4-qubit states (up to 16 nonzero outcomes); Pearson statistic at
  // 2^13 shots against the exact distribution, 100 seeded trials.
  int ok = 0;
  int ran = 0;
  for (int t = 0; t < 100; ++t) {
    const auto gates = random_circuit(4, 40, 1000 + t);
    const auto state = run_circuit(gates, 4);
    const auto probs = state.probabilities();
    int nonzero = 0;
    for (double p : probs) {
      if (p > 1e-12) ++nonzero;
    }
    if (nonzero < 8) continue;
    ++ran;
    const int shots = 8192;
    std::vector<int> observed(probs.size(), 0);
    for (Bitstring s : sample(state, shots, 5000 + t)) ++observed[s];
    double stat = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 1e-12) continue;
      const double expected = shots * probs[i];
      stat += (observed[i] - expected) * (observed[i] - expected) / expected;
    }
    if (stat < oracles::chi_square_quantile(nonzero - 1, 0.999)) ++ok;
  }
  CHECK(ran >= 95);  // generic circuits almost surely fill all outcomes
  CHECK(ok >= ran * 95 / 100);
}
