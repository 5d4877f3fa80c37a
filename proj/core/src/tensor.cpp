#include "fedkgc/tensor.hpp"

#include <cmath>
#include <cstring>

#include "fedkgc/rng.hpp"

namespace fedkgc {

bool all_finite(const Tensor& t) {
  for (double v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool all_finite(const ModelWeights& w) {
  for (const auto& [name, t] : w) {
    if (!all_finite(t)) return false;
  }
  return true;
}

bool bit_equal(const ModelWeights& a, const ModelWeights& b) {
  if (a.size() != b.size()) return false;
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!ia->second.same_shape(ib->second)) return false;
    if (std::memcmp(ia->second.data.data(), ib->second.data.data(),
                    ia->second.data.size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

std::uint64_t weights_checksum(const ModelWeights& w) {
  std::uint64_t h = kFnvOffset;
  for (const auto& [name, t] : w) {
    h = fnv1a64(name, h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(t.rows), h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(t.cols), h);
    for (double v : t.data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      h = fnv1a64_u64(bits, h);
    }
  }
  return h;
}

std::string checksum_hex(std::uint64_t c) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[c & 0xf];
    c >>= 4;
  }
  return s;
}

}  // namespace fedkgc
