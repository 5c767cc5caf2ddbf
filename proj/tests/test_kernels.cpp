#include <doctest.h>

#include <complex>
#include <vector>

#include "qfolio/kernels.hpp"
#include "qfolio/rng.hpp"

using namespace qfolio;

namespace {

using cplx = std::complex<double>;

std::vector<cplx> random_state(int n_qubits, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cplx> amps(std::size_t{1} << n_qubits);
  for (auto& a : amps) a = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return amps;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("kernel backend selection") {
  kernels::select(kernels::Backend::Scalar);
  CHECK(std::string(kernels::active().name) == "scalar");
  kernels::select(kernels::Backend::Auto);
  if (kernels::avx2_available()) {
    kernels::select(kernels::Backend::Avx2);
    CHECK(std::string(kernels::active().name) == "avx2");
  }
  kernels::select(kernels::Backend::Auto);
  CHECK(kernels::parse_backend("scalar") == kernels::Backend::Scalar);
  CHECK_THROWS(kernels::parse_backend("sse9"));
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!kernels::avx2_available()) {
    MESSAGE("AVX2 unavailable on this CPU; equivalence checks skipped");
    return;
  }
  const auto& scalar = kernels::scalar_ops();
  const auto& avx2 = kernels::avx2_ops();
  std::uint64_t seed = 42;

  for (int n = 1; n <= 8; ++n) {
    const std::size_t dim = std::size_t{1} << n;

    SUBCASE(("rotate_pairs n=" + std::to_string(n)).c_str()) {
      for (int q = 0; q < n; ++q) {
        auto a = random_state(n, ++seed);
        auto b = a;
        const double c = 0.8365, s = -0.5479;
        scalar.rotate_pairs(a.data(), dim, q, c, s);
        avx2.rotate_pairs(b.data(), dim, q, c, s);
        CHECK(max_diff(a, b) < 1e-13);
      }
    }

    SUBCASE(("rotate_pairs_signed n=" + std::to_string(n)).c_str()) {
      for (int q = 0; q < n; ++q) {
        for (int zq = 0; zq < n; ++zq) {
          if (zq == q) continue;
          auto a = random_state(n, ++seed);
          auto b = a;
          const double c = 0.2955, s = 0.9553;
          scalar.rotate_pairs_signed(a.data(), dim, q, zq, c, s);
          avx2.rotate_pairs_signed(b.data(), dim, q, zq, c, s);
          CHECK(max_diff(a, b) < 1e-13);
        }
      }
    }

    if (n >= 2) {
      SUBCASE(("phase_flip n=" + std::to_string(n)).c_str()) {
        for (int q0 = 0; q0 < n; ++q0) {
          for (int q1 = q0 + 1; q1 < n; ++q1) {
            auto a = random_state(n, ++seed);
            auto b = a;
            const std::uint64_t mask =
                (std::uint64_t{1} << q0) | (std::uint64_t{1} << q1);
            scalar.phase_flip(a.data(), dim, mask);
            avx2.phase_flip(b.data(), dim, mask);
            CHECK(max_diff(a, b) == 0.0);  // pure sign flips, bit-exact
          }
        }
      }
    }

    SUBCASE(("probabilities and norm n=" + std::to_string(n)).c_str()) {
      const auto amps = random_state(n, ++seed);
      std::vector<double> pa(dim), pb(dim);
      scalar.probabilities(amps.data(), dim, pa.data());
      avx2.probabilities(amps.data(), dim, pb.data());
      double worst = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        worst = std::max(worst, std::abs(pa[i] - pb[i]));
      }
      CHECK(worst < 1e-14);
      const double na = scalar.norm_sq(amps.data(), dim);
      const double nb = avx2.norm_sq(amps.data(), dim);
      CHECK(na == doctest::Approx(nb).epsilon(1e-12));
    }
  }
}

TEST_CASE("scalar rotate_pairs acts on the expected pairs") {
  // 3 qubits, rotate qubit 1: pairs (0,2), (1,3), (4,6), (5,7).
  std::vector<cplx> amps(8, cplx{0.0, 0.0});
  amps[0] = 1.0;
  kernels::scalar_ops().rotate_pairs(amps.data(), 8, 1, 0.0, 1.0);
  CHECK(std::abs(amps[2] - cplx{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(amps[0]) < 1e-15);
}
