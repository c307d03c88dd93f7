#pragma once

#include <cstdint>
#include <vector>

#include "detpi/circuit.hpp"

namespace detpi {

enum class DegreeMode { Degub, DegubPrime, Exact };

const char* degree_mode_name(DegreeMode m);

// Per-node syntactic degree values (upper bounds or exact witness).
struct DegreeAnnotation {
  static constexpr std::uint64_t kCap = std::uint64_t{1} << 62;

  DegreeMode mode = DegreeMode::Exact;
  std::vector<std::uint64_t> degree;  // indexed by node id
  bool overflow = false;              // some value hit kCap

  std::uint64_t operator[](NodeId id) const { return degree.at(id); }
};

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b, bool& overflow) {
  const std::uint64_t cap = DegreeAnnotation::kCap;
  if (a >= cap || b >= cap || a + b >= cap) {
    overflow = true;
    return cap;
  }
  return a + b;
}

// Bottom-up syntactic degrees: Var 1, Const 0 (or 1), Add max, Mul sum.
// Inv nodes are rejected.
DegreeAnnotation syntactic_degrees(const Graph& g, bool constants_as_one);

// Checks the local constraints of an exact witness.
bool verify_exact_witness(const Graph& g, const DegreeAnnotation& w);

}  // namespace detpi
