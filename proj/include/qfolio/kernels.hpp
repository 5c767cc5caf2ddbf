#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>

namespace qfolio::kernels {

enum class Backend { Auto, Scalar, Avx2 };

// Data-parallel inner loops of the statevector simulator. Each entry has a
// scalar reference implementation and may have wider variants; the active
// table is chosen at runtime from CPU features (overridable via select() or
// the QFOLIO_KERNELS environment variable). Variants are equivalence-tested
// against the scalar reference in tests/test_kernels.cpp.
struct Ops {
  // In-place rotation of amplitude pairs (i0, i1 = i0 + 2^q):
  //   amp[i0] <- c*amp[i0] - s*amp[i1]
  //   amp[i1] <- s*amp[i0] + c*amp[i1]
  void (*rotate_pairs)(std::complex<double>* amps, std::size_t n_amps, int q,
                       double c, double s);

  // Same rotation with the sign of s flipped on pairs whose index has bit
  // sign_q set. Realizes two-qubit rotations generated by Y(x)Z / Z(x)Y.
  void (*rotate_pairs_signed)(std::complex<double>* amps, std::size_t n_amps,
                              int q, int sign_q, double c, double s);

  // amp[i] <- -amp[i] wherever (i & mask) == mask.
  void (*phase_flip)(std::complex<double>* amps, std::size_t n_amps,
                     std::uint64_t mask);

  // out[i] <- |amp[i]|^2
  void (*probabilities)(const std::complex<double>* amps, std::size_t n_amps,
                        double* out);

  // sum_i |amp[i]|^2
  double (*norm_sq)(const std::complex<double>* amps, std::size_t n_amps);

  const char* name;
};

const Ops& scalar_ops();

// True when the CPU this process runs on can execute the AVX2+FMA variants.
bool avx2_available();
const Ops& avx2_ops();

// Selects the active table. Backend::Auto probes the CPU and honors the
// QFOLIO_KERNELS environment variable (scalar|avx2|auto). Selecting Avx2 on
// an unsupported CPU throws.
void select(Backend backend);
const Ops& active();

Backend parse_backend(const std::string& name);
const char* backend_name(Backend backend);

}  // namespace qfolio::kernels
