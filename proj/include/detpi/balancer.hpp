#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "detpi/circuit.hpp"
#include "detpi/degree.hpp"
#include "detpi/numeric.hpp"

namespace detpi {

// Boolean reachability: entry [w][v] is set when w is in F_v. Computed by
// repeated squaring of the adjacency-plus-identity matrix.
std::vector<std::vector<bool>> reachability(const Circuit& f);

// Coefficient per leaf node (Var or Const) of the Mul-free sub-DAG at v:
// the number of distinct v-to-leaf paths, by matrix powering.
std::map<NodeId, Int> linear_form_coefficients(const Graph& g, NodeId v);

// Zero nodes (Const 0, products with a zero factor, sums of zeros) carry no
// label. Other nodes get Var 1, Const 1, Mul sum, Add the common label.
// An Add with one zero child is an alias of the other child. An Add whose
// children differ in label is a spine node of a sum of homogeneous parts.
class BalanceContext {
 public:
  enum class Kind : std::uint8_t { Zero, Alias, Leaf, Add, Mul, Spine };

  // Labels are computed from g (constants count as degree one).
  BalanceContext(const Graph& g, Builder& out, std::vector<NodeId> out_leaf_map = {});

  Kind kind(NodeId v) const { return kind_[v]; }
  std::uint64_t label(NodeId v) const { return label_[v]; }
  // Resolves aliases; returns kNoNode for zero nodes.
  NodeId effective(NodeId v) const { return eff_[v]; }
  NodeId eff_left(NodeId v) const { return eff_[g_.left(v)]; }
  NodeId eff_right(NodeId v) const { return eff_[g_.right(v)]; }

  // w in F_v over the effective DAG.
  bool reaches(NodeId w, NodeId v);

  // Mul nodes t in F_v with label(t) > m and both effective children <= m.
  std::vector<NodeId> frontier(NodeId v, std::uint64_t m);

  // Output nodes for [F_v] (v any node) and [d_w f_v].
  NodeId fv(NodeId v);
  NodeId dwfv(NodeId w, NodeId v);

  // Effective child on the derivative side: the larger label, ties left.
  std::pair<NodeId, NodeId> split(NodeId t) const;

  // Effective nodes of F_v in increasing id order.
  std::vector<NodeId> members(NodeId v);
  // Mul nodes over a spine, Inv nodes, or saturated labels.
  bool invalid(NodeId v) const { return invalid_[v] != 0; }

  std::size_t fv_count() const { return fv_memo_.size(); }
  std::size_t dwfv_count() const { return dw_memo_.size(); }
  const Graph& graph() const { return g_; }
  Builder& out() { return out_; }

  NodeId zero_node();
  NodeId one_node();

 private:
  void ensure_reach(NodeId v);
  NodeId build_linear(const std::map<NodeId, Int>& coeffs, const Int& constant);
  NodeId leaf_copy(NodeId leaf);
  NodeId partial_linear_node(NodeId w, NodeId v);
  NodeId linear_node(NodeId v);

  const Graph& g_;
  Builder& out_;
  std::vector<NodeId> leaf_map_;
  std::vector<Kind> kind_;
  std::vector<std::uint64_t> label_;
  std::vector<NodeId> eff_;
  std::vector<char> invalid_;
  std::vector<std::vector<std::uint64_t>> reach_;  // bitset of F_v per effective v, lazily
  std::vector<char> reach_done_;
  std::unordered_map<std::uint64_t, std::vector<NodeId>> frontier_memo_;
  std::unordered_map<NodeId, NodeId> fv_memo_;
  std::unordered_map<std::uint64_t, NodeId> dw_memo_;
  NodeId zero_ = kNoNode, one_ = kNoNode;
};

// Coefficients of d_w f_v for 0 <= label(v) - label(w) <= 1, as leaf
// coefficients plus a constant term.
struct LinearForm {
  std::map<NodeId, Int> coeffs;
  Int constant = 0;
};
LinearForm partial_linear_form(BalanceContext& ctx, NodeId w, NodeId v);

struct BalanceReport {
  std::size_t size_in = 0, size_out = 0;
  std::uint64_t degree = 0;
  std::size_t depth_in = 0, depth_out = 0;
  std::size_t fv_nodes = 0, dwfv_nodes = 0;
};

// f must carry a degub-prime annotation (from the homogenizer); the labels
// recomputed here must not exceed it.
Circuit balance(const Circuit& f, const DegreeAnnotation& annotation, BalanceReport* report = nullptr);

// depth <= C_depth * (ceil(log s) * ceil(log d) + ceil(log d)^2 + 1), size <= C_size * s^3.
// Measured on 2000 random circuits (size <= 40, degree <= 8): depth ratio
// at most 3 (reached at d = 1), size ratio at most 0.12.
inline constexpr std::size_t kBalanceDepthC = 4;
inline constexpr std::size_t kBalanceSizeC = 1;
std::size_t ceil_log2(std::uint64_t x);
std::size_t balance_depth_bound(std::size_t s, std::uint64_t d);

// Taydet# with zero and unit factors removed; degub-prime bounds are O(n).
Circuit build_taydet_sharp_prime(std::uint32_t n);

struct DetBalancedParts {
  Circuit taydet_sharp_prime;
  std::uint32_t degree_bound = 0;  // degub-prime bound used for homogenization
  Circuit homogenized;             // sum of components
  DegreeAnnotation annotation;
  Circuit balanced;
  BalanceReport report;
};
DetBalancedParts build_det_balanced_parts(std::uint32_t n);
Circuit build_det_balanced(std::uint32_t n);

}  // namespace detpi
