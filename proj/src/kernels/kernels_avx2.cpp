#include "qfolio/kernels.hpp"

#include <bit>
#include <stdexcept>

// AVX2+FMA variants. Built with per-function target attributes so the rest of
// the binary stays generic; dispatch.cpp only installs this table after a
// runtime CPU probe.

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace qfolio::kernels {
namespace {

using cplx = std::complex<double>;

inline double* dbl(cplx* p) { return reinterpret_cast<double*>(p); }
inline const double* dbl(const cplx* p) {
  return reinterpret_cast<const double*>(p);
}

// Rotates two contiguous spans of `len` complex amplitudes against each
// other: lo <- c*lo - s*hi, hi <- s*lo + c*hi. len is a power of two >= 2.
__attribute__((target("avx2,fma"))) void rotate_span(cplx* lo, cplx* hi,
                                                     std::size_t len, double c,
                                                     double s) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  double* plo = dbl(lo);
  double* phi = dbl(hi);
  for (std::size_t k = 0; k < 2 * len; k += 4) {
    const __m256d v0 = _mm256_loadu_pd(plo + k);
    const __m256d v1 = _mm256_loadu_pd(phi + k);
    const __m256d n0 = _mm256_fnmadd_pd(vs, v1, _mm256_mul_pd(vc, v0));
    const __m256d n1 = _mm256_fmadd_pd(vs, v0, _mm256_mul_pd(vc, v1));
    _mm256_storeu_pd(plo + k, n0);
    _mm256_storeu_pd(phi + k, n1);
  }
}

// q == 0 case: each pair is two adjacent complex numbers, i.e. one __m256d.
__attribute__((target("avx2,fma"))) void rotate_adjacent(cplx* amps,
                                                         std::size_t n_amps,
                                                         double c, double s) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vm = _mm256_set_pd(s, s, -s, -s);  // memory order -s,-s,s,s
  double* p = dbl(amps);
  for (std::size_t k = 0; k < 2 * n_amps; k += 4) {
    const __m256d v = _mm256_loadu_pd(p + k);
    const __m256d sw = _mm256_permute2f128_pd(v, v, 0x01);
    _mm256_storeu_pd(p + k, _mm256_fmadd_pd(vm, sw, _mm256_mul_pd(vc, v)));
  }
}

__attribute__((target("avx2,fma"))) void rotate_pairs_avx2(cplx* amps,
                                                           std::size_t n_amps,
                                                           int q, double c,
                                                           double s) {
  if (q == 0) {
    rotate_adjacent(amps, n_amps, c, s);
    return;
  }
  const std::size_t stride = std::size_t{1} << q;
  for (std::size_t base = 0; base < n_amps; base += 2 * stride) {
    rotate_span(amps + base, amps + base + stride, stride, c, s);
  }
}

// sign_q == 0 case of the signed rotation: the sign of s alternates with
// every complex amplitude inside the span, so fold it into the multiplier.
__attribute__((target("avx2,fma"))) void rotate_span_alt_sign(
    cplx* lo, cplx* hi, std::size_t len, double c, double s) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vm = _mm256_set_pd(-s, -s, s, s);  // memory order s,s,-s,-s
  double* plo = dbl(lo);
  double* phi = dbl(hi);
  for (std::size_t k = 0; k < 2 * len; k += 4) {
    const __m256d v0 = _mm256_loadu_pd(plo + k);
    const __m256d v1 = _mm256_loadu_pd(phi + k);
    const __m256d n0 = _mm256_fnmadd_pd(vm, v1, _mm256_mul_pd(vc, v0));
    const __m256d n1 = _mm256_fmadd_pd(vm, v0, _mm256_mul_pd(vc, v1));
    _mm256_storeu_pd(plo + k, n0);
    _mm256_storeu_pd(phi + k, n1);
  }
}

__attribute__((target("avx2,fma"))) void rotate_pairs_signed_avx2(
    cplx* amps, std::size_t n_amps, int q, int sign_q, double c, double s) {
  const std::size_t stride = std::size_t{1} << q;
  const std::size_t sign_bit = std::size_t{1} << sign_q;
  if (sign_q > q) {
    // Sign is constant over each base block.
    for (std::size_t base = 0; base < n_amps; base += 2 * stride) {
      const double se = (base & sign_bit) ? -s : s;
      if (q == 0) {
        // Single adjacent pair.
        const __m256d vc = _mm256_set1_pd(c);
        const __m256d vm = _mm256_set_pd(se, se, -se, -se);
        double* p = dbl(amps + base);
        const __m256d v = _mm256_loadu_pd(p);
        const __m256d sw = _mm256_permute2f128_pd(v, v, 0x01);
        _mm256_storeu_pd(p, _mm256_fmadd_pd(vm, sw, _mm256_mul_pd(vc, v)));
      } else {
        rotate_span(amps + base, amps + base + stride, stride, c, se);
      }
    }
    return;
  }
  // sign_q < q, hence q >= 1 and spans are contiguous.
  if (sign_q == 0) {
    for (std::size_t base = 0; base < n_amps; base += 2 * stride) {
      rotate_span_alt_sign(amps + base, amps + base + stride, stride, c, s);
    }
    return;
  }
  const std::size_t run = sign_bit;  // complex amplitudes per constant-sign run
  for (std::size_t base = 0; base < n_amps; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; off += 2 * run) {
      rotate_span(amps + base + off, amps + base + stride + off, run, c, s);
      rotate_span(amps + base + off + run, amps + base + stride + off + run,
                  run, c, -s);
    }
  }
}

__attribute__((target("avx2"))) void negate_run(cplx* p, std::size_t len) {
  double* d = dbl(p);
  const std::size_t n_dbl = 2 * len;
  if (n_dbl >= 4) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    for (std::size_t k = 0; k < n_dbl; k += 4) {
      _mm256_storeu_pd(d + k, _mm256_xor_pd(_mm256_loadu_pd(d + k), sign));
    }
  } else {
    const __m128d sign = _mm_set1_pd(-0.0);
    _mm_storeu_pd(d, _mm_xor_pd(_mm_loadu_pd(d), sign));
  }
}

__attribute__((target("avx2"))) void phase_flip_avx2(cplx* amps,
                                                     std::size_t n_amps,
                                                     std::uint64_t mask) {
  const std::uint64_t run = std::uint64_t{1} << std::countr_zero(mask);
  const std::uint64_t free_high = ~mask & (n_amps - 1) & ~(run - 1);
  std::uint64_t t = 0;
  do {
    negate_run(amps + (t | mask), run);
    t = (t - free_high) & free_high;
  } while (t != 0);
}

__attribute__((target("avx2,fma"))) void probabilities_avx2(
    const cplx* amps, std::size_t n_amps, double* out) {
  const double* p = dbl(amps);
  std::size_t i = 0;
  for (; i + 4 <= n_amps; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(p + 2 * i);      // re0 im0 re1 im1
    const __m256d v1 = _mm256_loadu_pd(p + 2 * i + 4);  // re2 im2 re3 im3
    const __m256d s0 = _mm256_mul_pd(v0, v0);
    const __m256d s1 = _mm256_mul_pd(v1, v1);
    // hadd yields p0 p2 p1 p3 across the two lanes; restore order.
    const __m256d h = _mm256_hadd_pd(s0, s1);
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, 0b11011000));
  }
  for (; i < n_amps; ++i) {
    out[i] = amps[i].real() * amps[i].real() + amps[i].imag() * amps[i].imag();
  }
}

__attribute__((target("avx2,fma"))) double norm_sq_avx2(const cplx* amps,
                                                        std::size_t n_amps) {
  const double* p = dbl(amps);
  const std::size_t n_dbl = 2 * n_amps;
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n_dbl; k += 4) {
    const __m256d v = _mm256_loadu_pd(p + k);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  alignas(32) double tmp[4];
  _mm256_store_pd(tmp, acc);
  double res = tmp[0] + tmp[1] + tmp[2] + tmp[3];
  for (; k < n_dbl; ++k) res += p[k] * p[k];
  return res;
}

}  // namespace

bool avx2_available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Ops& avx2_ops() {
  static const Ops ops{rotate_pairs_avx2, rotate_pairs_signed_avx2,
                       phase_flip_avx2,   probabilities_avx2,
                       norm_sq_avx2,      "avx2"};
  return ops;
}

}  // namespace qfolio::kernels

#else  // non-x86: scalar only

namespace qfolio::kernels {

bool avx2_available() { return false; }

const Ops& avx2_ops() {
  throw std::runtime_error("avx2 kernels are not built on this architecture");
}

}  // namespace qfolio::kernels

#endif
