#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "detpi/numeric.hpp"

namespace detpi {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

enum class Op : std::uint8_t { Var, Const, Add, Mul, Inv };

const char* op_name(Op op);

// Var: a = variable index. Const: a = slot in the constant table.
// Add/Mul: a, b = children. Inv: a = argument.
struct Node {
  Op op = Op::Const;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
};

class CircuitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Node storage shared by finished circuits and builders.
class Graph {
 public:
  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  Op op(NodeId id) const { return nodes_[id].op; }
  NodeId left(NodeId id) const { return nodes_[id].a; }
  NodeId right(NodeId id) const { return nodes_[id].b; }
  NodeId arg(NodeId id) const { return nodes_[id].a; }
  std::uint32_t var_index(NodeId id) const { return nodes_[id].a; }
  const Int& value(NodeId id) const { return consts_[nodes_[id].a]; }
  bool is_leaf(NodeId id) const {
    const Op o = nodes_[id].op;
    return o == Op::Var || o == Op::Const;
  }
  bool is_const(NodeId id, long v) const {
    return nodes_[id].op == Op::Const && consts_[nodes_[id].a] == v;
  }
  int arity(NodeId id) const {
    switch (nodes_[id].op) {
      case Op::Add:
      case Op::Mul: return 2;
      case Op::Inv: return 1;
      default: return 0;
    }
  }

 protected:
  std::vector<Node> nodes_;
  std::vector<Int> consts_;
};

class Builder;

class Circuit : public Graph {
 public:
  Circuit() = default;

  const std::vector<NodeId>& outputs() const { return outputs_; }
  NodeId output(std::size_t i = 0) const { return outputs_.at(i); }
  std::uint32_t var_count() const { return var_count_; }
  NodeId root() const;  // checked single-output accessor

  // Same ids, same labels, same outputs.
  bool operator==(const Circuit& o) const;

  // Throws CircuitError when an invariant of the IR is violated.
  void validate() const;

  static Circuit from_parts(std::vector<Node> nodes, std::vector<Int> consts,
                            std::vector<NodeId> outputs, std::uint32_t var_count);

 private:
  friend class Builder;
  std::vector<NodeId> outputs_;
  std::uint32_t var_count_ = 0;
};

// Append-only construction. With HashCons sharing, structurally equal nodes
// are returned once; the default keeps every constructed node distinct.
class Builder : public Graph {
 public:
  enum class Sharing { None, HashCons };

  explicit Builder(Sharing sharing = Sharing::None) : sharing_(sharing) {}

  Sharing sharing() const { return sharing_; }

  NodeId var(std::uint32_t index);
  NodeId constant(const Int& v);
  NodeId constant(long v) { return constant(Int(v)); }
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId inv(NodeId a);
  NodeId neg(NodeId a) { return mul(constant(-1), a); }
  NodeId sub(NodeId a, NodeId b) { return add(a, neg(b)); }
  NodeId make(Op op, NodeId a, NodeId b = 0);

  // Copies the sub-DAG of g under root. memo is indexed by g's ids and
  // caches already copied nodes (kNoNode = not yet copied).
  NodeId import(const Graph& g, NodeId root, std::vector<NodeId>& memo);
  NodeId import(const Circuit& c, NodeId root);
  std::vector<NodeId> import_all(const Graph& g);

  std::uint32_t var_bound() const { return var_bound_; }

  // All nodes built so far, in order.
  Circuit finish(std::vector<NodeId> outputs,
                 std::optional<std::uint32_t> var_count = std::nullopt) const;
  // Only the nodes reachable from outputs, renumbered in increasing order.
  Circuit extract(const std::vector<NodeId>& outputs,
                  std::optional<std::uint32_t> var_count = std::nullopt,
                  std::vector<NodeId>* old_to_new = nullptr) const;

 private:
  struct Key {
    Op op;
    std::uint32_t a, b;
    bool operator==(const Key& o) const { return op == o.op && a == o.a && b == o.b; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(
          hash_combine(hash_combine(static_cast<std::uint64_t>(k.op), k.a), k.b));
    }
  };

  NodeId push(Node n);

  Sharing sharing_;
  std::uint32_t var_bound_ = 0;
  std::unordered_map<Key, NodeId, KeyHash> table_;
  std::map<Int, NodeId> const_table_;
};

// ---- structural operations -------------------------------------------

std::vector<char> reachable_mask(const Graph& g, std::span<const NodeId> roots);
std::vector<NodeId> reachable_nodes(const Graph& g, NodeId root);  // ascending ids

// Edge count of the longest directed path; per node and for a circuit.
std::vector<std::uint32_t> node_depths(const Graph& g);
std::size_t depth(const Circuit& c);
std::size_t depth_of(const Graph& g, NodeId root);

std::size_t inv_count(const Circuit& c);  // reachable Inv nodes
bool division_free(const Circuit& c);
bool division_free(const Graph& g, NodeId root);
bool contains_var(const Graph& g, NodeId root, std::uint32_t var);

// Single-output circuit for output i (only the reachable part).
Circuit output_circuit(const Circuit& c, std::size_t i);

struct CombineResult {
  Circuit circuit;
  std::vector<NodeId> left_map;   // f id -> new id
  std::vector<NodeId> right_map;  // g id -> new id
};
CombineResult disjoint_combine(const Circuit& f, const Circuit& g, Op op);

struct SubstituteResult {
  Circuit circuit;
  std::vector<NodeId> node_map;  // old id -> new id of the corresponding node
};
// Every Var leaf with a mapped index becomes a fresh copy of its image.
SubstituteResult substitute(const Circuit& c, const std::map<std::uint32_t, Circuit>& sub);

// f^k as a balanced product tree over references to f's root; k = 0 gives 1.
Circuit power_chain(const Circuit& f, std::uint64_t k);
NodeId power_node(Builder& b, NodeId base, std::uint64_t k);

// Balanced trees; empty sum is 0 and empty product is 1.
NodeId sum_tree(Builder& b, std::span<const NodeId> terms);
NodeId product_tree(Builder& b, std::span<const NodeId> factors);

// Hash of the tree unfolding of each node.
std::vector<std::uint64_t> structural_hashes(const Graph& g);

// True when the two sub-DAGs unfold to the same labelled tree.
bool unfold_equal(const Graph& a, NodeId ra, const Graph& b, NodeId rb);

// Label and child preserving map from the sub-DAG of a under ra onto the
// sub-DAG of b under rb. With injective set, the map must be a bijection.
std::optional<std::vector<std::pair<NodeId, NodeId>>> match_subdag(
    const Graph& a, NodeId ra, const Graph& b, NodeId rb, bool injective);

}  // namespace detpi
