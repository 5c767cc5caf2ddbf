#include "qfolio/types.hpp"

namespace qfolio {

std::string bitstring_to_string(Bitstring x, int n) {
  std::string out(n, '0');
  for (int k = 0; k < n; ++k) {
    if (bit(x, k)) out[k] = '1';
  }
  return out;
}

Bitstring parse_bitstring(const std::string& text) {
  if (text.size() > 64) {
    throw std::invalid_argument("parse_bitstring: more than 64 characters");
  }
  Bitstring x = 0;
  for (std::size_t k = 0; k < text.size(); ++k) {
    if (text[k] == '1') {
      x |= Bitstring{1} << k;
    } else if (text[k] != '0') {
      throw std::invalid_argument("parse_bitstring: expected only 0/1");
    }
  }
  return x;
}

}  // namespace qfolio
