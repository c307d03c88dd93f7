#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace detpi {

using Int = mpz_class;
using Rat = mpq_class;

using IntMatrix = std::vector<std::vector<Int>>;
using RatMatrix = std::vector<std::vector<Rat>>;

// Parses an optionally signed decimal integer. Returns false on any junk.
bool parse_int(std::string_view text, Int& out);

std::string to_string(const Int& v);
std::string to_string(const Rat& v);

// 64-bit mix of an arbitrary-precision integer, stable across runs.
std::uint64_t hash_int(const Int& v);

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

IntMatrix identity_matrix(std::size_t n);
IntMatrix matrix_mul(const IntMatrix& a, const IntMatrix& b);

}  // namespace detpi
