#include "qfolio/kernels.hpp"

// Reference implementations. Plain loops, no intrinsics; every wider variant
// is checked against these.

namespace qfolio::kernels {
namespace {

using cplx = std::complex<double>;

void rotate_pairs_scalar(cplx* amps, std::size_t n_amps, int q, double c,
                         double s) {
  const std::size_t stride = std::size_t{1} << q;
  for (std::size_t base = 0; base < n_amps; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; ++off) {
      const std::size_t i0 = base + off;
      const std::size_t i1 = i0 + stride;
      const cplx a = amps[i0];
      const cplx b = amps[i1];
      amps[i0] = c * a - s * b;
      amps[i1] = s * a + c * b;
    }
  }
}

void rotate_pairs_signed_scalar(cplx* amps, std::size_t n_amps, int q,
                                int sign_q, double c, double s) {
  const std::size_t stride = std::size_t{1} << q;
  const std::size_t sign_bit = std::size_t{1} << sign_q;
  for (std::size_t base = 0; base < n_amps; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; ++off) {
      const std::size_t i0 = base + off;
      const std::size_t i1 = i0 + stride;
      const double se = (i0 & sign_bit) ? -s : s;
      const cplx a = amps[i0];
      const cplx b = amps[i1];
      amps[i0] = c * a - se * b;
      amps[i1] = se * a + c * b;
    }
  }
}

void phase_flip_scalar(cplx* amps, std::size_t n_amps, std::uint64_t mask) {
  for (std::size_t i = 0; i < n_amps; ++i) {
    if ((i & mask) == mask) amps[i] = -amps[i];
  }
}

void probabilities_scalar(const cplx* amps, std::size_t n_amps, double* out) {
  for (std::size_t i = 0; i < n_amps; ++i) {
    out[i] = amps[i].real() * amps[i].real() + amps[i].imag() * amps[i].imag();
  }
}

double norm_sq_scalar(const cplx* amps, std::size_t n_amps) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_amps; ++i) {
    acc += amps[i].real() * amps[i].real() + amps[i].imag() * amps[i].imag();
  }
  return acc;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{rotate_pairs_scalar, rotate_pairs_signed_scalar,
                       phase_flip_scalar,   probabilities_scalar,
                       norm_sq_scalar,      "scalar"};
  return ops;
}

}  // namespace qfolio::kernels
