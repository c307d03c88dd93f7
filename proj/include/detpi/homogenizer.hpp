#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "detpi/circuit.hpp"
#include "detpi/degree.hpp"

namespace detpi {

// Components C^(0..d) over one node pool. Every node of circuit carries
// its declared bound in annotation; dup maps (base node, i) to [v, i].
struct HomogeneousDecomposition {
  Circuit circuit;  // outputs are the components, or the single slice
  std::uint32_t d = 0;
  std::optional<std::uint32_t> only_i;
  DegreeAnnotation annotation;
  std::vector<NodeId> dup;  // base id * (d + 1) + i, kNoNode for unreachable nodes

  NodeId at(NodeId v, std::uint32_t i) const { return dup.at(static_cast<std::size_t>(v) * (d + 1) + i); }
  NodeId component(std::uint32_t i) const;
};

struct HomogenizeOptions {
  // Exact (or degub-prime exact) degrees of the base; [v, i] = 0 above them.
  const DegreeAnnotation* witness = nullptr;
  std::optional<std::uint32_t> only_i;
  bool constants_as_degree_one = false;
  // Drops products with a zero factor and additions of a zero.
  bool prune_zeros = false;
};

HomogeneousDecomposition homogenize(const Circuit& f, std::uint32_t d, const HomogenizeOptions& opt = {});

// A circuit declared homogeneous of degree j: component j is the circuit
// itself, the others are zero.
HomogeneousDecomposition pad_homogeneous(const Circuit& f, std::uint32_t j, std::uint32_t d);

DegreeAnnotation exact_degree_witness(const Circuit& f);

// Balanced sum of the components (or the slice) as a single-output circuit
// with the annotation carried along; sum nodes get the larger bound.
struct AnnotatedCircuit {
  Circuit circuit;
  DegreeAnnotation annotation;
};
AnnotatedCircuit sum_components(const HomogeneousDecomposition& dec);

// Size constant in size(decomposition) <= K * (d + 1)^2 * size(base).
inline constexpr std::size_t kHomogenizeSizeK = 2;

}  // namespace detpi
