#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qfolio {

// A candidate portfolio / measurement outcome. Bit k corresponds to variable
// (bond, qubit) k; bits at positions >= n must be zero. All modules that take
// a Bitstring are limited to n <= 64 variables, which covers everything the
// dense simulator (25 qubits) and the brute-force oracle (22) can reach.
using Bitstring = std::uint64_t;

inline int popcount(Bitstring x) { return std::popcount(x); }

inline bool bit(Bitstring x, int k) { return (x >> k) & 1u; }

inline Bitstring flip_bit(Bitstring x, int k) { return x ^ (Bitstring{1} << k); }

// "0110..." with character k (from the left) holding variable k.
std::string bitstring_to_string(Bitstring x, int n);
Bitstring parse_bitstring(const std::string& text);

inline void check_bitstring_length(Bitstring x, int n, const char* what) {
  if (n < 64 && (x >> n) != 0) {
    throw std::invalid_argument(std::string(what) +
                                ": bitstring has bits set beyond variable " +
                                std::to_string(n - 1));
  }
}

}  // namespace qfolio
