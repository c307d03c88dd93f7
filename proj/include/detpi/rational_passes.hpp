#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detpi/circuit.hpp"
#include "detpi/numeric.hpp"

namespace detpi {

struct NumDenPair {
  NodeId num = kNoNode;
  NodeId den = kNoNode;
};

// Num/Den copies of every node reachable from root, built into b.
// Entries for unreachable nodes stay kNoNode.
std::vector<NumDenPair> num_den_nodes(Builder& b, const Graph& g, NodeId root);

struct NumDenResult {
  Circuit num;
  Circuit den;
};
NumDenResult num_den(const Circuit& f);
// Both parts in one circuit with outputs {num, den}.
Circuit num_den_joint(const Circuit& f);

// Num(f) * Inv(Den(f)).
Circuit normalize_division(const Circuit& f);

// 1 + (1-f) + (1-f)^2 + ... + (1-f)^k, a balanced sum over balanced powers.
NodeId inv_k_node(Builder& b, NodeId f, std::uint64_t k);
Circuit inv_k(const Circuit& f, std::uint64_t k);

// Coefficient tables: entry i of the result is the node computing the
// coefficient of z^i, 0 <= i <= k. Inv nodes must not contain z.
// Nodes without z map to their import at i = 0 and to zero above.
std::vector<NodeId> coef_table(Builder& b, const Graph& g, NodeId root, std::uint32_t k, std::uint32_t z,
                               std::vector<NodeId>& import_memo);
bool z_under_division(const Graph& g, NodeId root, std::uint32_t z);

// Coefficient of z^k. Falls back to the Num/Den form when z occurs under a
// division gate. Output var_count is unchanged.
Circuit coef(const Circuit& f, std::uint32_t k, std::uint32_t z);

Circuit build_taydet(std::uint32_t n);
Circuit build_taydet_sharp(std::uint32_t n);

enum class ZeroRule { MulZeroLeft, MulZeroRight, AddZeroLeft, AddZeroRight, MulOneLeft, MulOneRight };
const char* zero_rule_name(ZeroRule r);

struct RewriteStep {
  std::size_t step = 0;
  NodeId node = 0;  // id in the input circuit
  ZeroRule rule = ZeroRule::MulZeroLeft;
};
using RewriteTrace = std::vector<RewriteStep>;

struct SimplifyResult {
  Circuit circuit;
  RewriteTrace trace;
  std::vector<NodeId> node_map;  // input id -> output id (kNoNode when dropped)
};
SimplifyResult simplify_zeros(const Circuit& f);
std::string encode_trace(const RewriteTrace& t);

// Requires at most one Inv, a child of the root product, whose argument
// evaluates to 1 at rho. Variables are shifted x_i = rho_i - w_i, the
// division gate becomes Inv_k, and with back_substitute the result is
// expressed in the original variables again.
Circuit eliminate_division(const Circuit& f, const std::vector<Int>& rho, std::uint64_t k,
                           bool back_substitute = true);

}  // namespace detpi
