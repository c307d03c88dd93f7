#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "detpi/circuit.hpp"
#include "detpi/proof.hpp"

namespace detpi {

class ProofError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LineId = std::uint32_t;
inline constexpr LineId kNoLine = 0xffffffffu;

// Proof lines over one hash-consed node pool. Equal circuits are equal
// node ids, so the witness maps of a materialized proof are identities on
// pool nodes. Repeated axiom and rule applications return the same line.
class ProofEngine {
 public:
  struct Line {
    NodeId lhs = kNoNode, rhs = kNoNode;
    Law law = Law::A1;
    std::array<LineId, 2> prem{kNoLine, kNoLine};
    std::array<NodeId, 3> slot{kNoNode, kNoNode, kNoNode};
  };

  ProofEngine(ProofSystem system, std::uint32_t var_count, std::uint64_t k = 0);

  Builder& pool() { return pool_; }
  const Builder& pool() const { return pool_; }
  ProofSystem system() const { return system_; }
  std::uint64_t k() const { return k_; }
  std::uint32_t var_count() const { return var_count_; }
  void widen_vars(std::uint32_t n) { var_count_ = std::max(var_count_, n); }
  std::size_t size() const { return lines_.size(); }
  const Line& line(LineId i) const { return lines_[i]; }
  NodeId lhs(LineId i) const { return lines_[i].lhs; }
  NodeId rhs(LineId i) const { return lines_[i].rhs; }

  NodeId zero() { return pool_.constant(0); }
  NodeId one() { return pool_.constant(1); }

  LineId a1(NodeId f);
  LineId a2(NodeId f, NodeId g);
  LineId a3(NodeId f, NodeId g, NodeId h);
  LineId a4(NodeId f, NodeId g);
  LineId a5(NodeId f, NodeId g, NodeId h);
  LineId a6(NodeId f, NodeId g, NodeId h);
  LineId a7(NodeId f);
  LineId a8(NodeId f);
  LineId a9(NodeId f);
  // Const nodes b, c: the line (b op c) = (b op c) evaluated, stated as
  // value = b op c.
  LineId a10_add(NodeId b, NodeId c);
  LineId a10_mul(NodeId b, NodeId c);
  // F * Inv(F) = 1, or F * Inv_k(F) = 1 in PCk.
  LineId d(NodeId f);

  LineId r1(LineId p);
  LineId r2(LineId p, LineId q);
  LineId r3(LineId p, LineId q);
  LineId r4(LineId p, LineId q);

  bool is_reflexive(LineId p) const { return lines_[p].lhs == lines_[p].rhs; }
  // R2 fold that skips reflexive steps.
  LineId chain(std::initializer_list<LineId> steps);
  LineId chain(std::span<const LineId> steps);
  LineId sym(LineId p) { return is_reflexive(p) ? p : r1(p); }

  // Balanced sum with the split used by sum_cong.
  NodeId sum_nodes(std::span<const NodeId> terms);
  LineId sum_cong(std::span<const LineId> lines);

  // Dependency closure of the targets, in order, with per-line circuits.
  Proof materialize(std::span<const LineId> targets) const;
  Proof materialize_all() const;

 private:
  LineId axiom(Law law, NodeId lhs, NodeId rhs, std::array<NodeId, 3> slot);
  LineId rule(Law law, NodeId lhs, NodeId rhs, LineId p, LineId q);

  struct Key {
    std::uint8_t law;
    std::uint32_t a, b, c;
    bool operator==(const Key& o) const { return law == o.law && a == o.a && b == o.b && c == o.c; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(hash_combine(hash_combine(hash_combine(k.law, k.a), k.b), k.c));
    }
  };

  ProofSystem system_;
  std::uint32_t var_count_;
  std::uint64_t k_;
  Builder pool_{Builder::Sharing::HashCons};
  std::vector<Line> lines_;
  std::unordered_map<Key, LineId, KeyHash> memo_;
};

// Pool copy of a proof that passed the syntactic check. C1/C2 lines become
// A1 lines since both sides are the same pool node. Returns the line map.
std::vector<LineId> import_proof(ProofEngine& e, const Proof& p);

// Ring normal form over an atom set (Var and Inv nodes are always atoms):
//   0 | t + NF,  t = c * m,  m = 1 | a * m
// with atoms ascending by pool id inside a monomial and terms strictly
// decreasing in lex order.
class Normalizer {
 public:
  struct Result {
    NodeId node = kNoNode;
    LineId line = kNoLine;  // proves input = node
  };

  Normalizer(ProofEngine& e, std::span<const NodeId> atoms = {});

  Result normalize(NodeId v);
  // Throws ProofError when the normal forms differ.
  LineId prove_equal(NodeId a, NodeId b);

  // Exposed pieces, operands in normal form.
  Result merge(NodeId p, NodeId q);
  Result mult(NodeId p, NodeId q);

 private:
  bool atom(NodeId v) const;
  bool zero_hint(NodeId v);
  int compare(NodeId m1, NodeId m2) const;
  Result atom_nf(NodeId a);
  Result combine(NodeId t, NodeId u);
  Result term_poly(NodeId t, NodeId q);
  Result term_term(NodeId t, NodeId u);
  Result mono_mult(NodeId m1, NodeId m2);

  static std::uint64_t key(NodeId a, NodeId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

  ProofEngine& e_;
  std::unordered_set<NodeId> atoms_;
  std::unordered_map<NodeId, Result> nf_;
  std::unordered_map<std::uint64_t, Result> merge_, mult_, tq_, tt_, mm_;
  std::unordered_map<NodeId, char> zero_;
};

// a = b by normal forms. Explicit atoms may collide with expressions over
// other atoms under hash-consing; on a mismatch the atoms that contain other
// atoms or no variable are expanded, and finally all of them.
LineId prove_equal_over(ProofEngine& e, NodeId a, NodeId b, std::span<const NodeId> atoms);

struct IdealTerm {
  LineId hyp;       // L = R
  NodeId multiplier;
};

// lhs = rhs from lhs - rhs = sum c_h (L_h - R_h) as a polynomial identity
// in the atoms: both sides go through rhs + sum c_h (L_h + (-1) R_h).
LineId prove_by_ideal(ProofEngine& e, NodeId lhs, NodeId rhs, std::span<const IdealTerm> hyps,
                      std::span<const NodeId> atoms);

// Rewrites every occurrence of the keys (replacing node lhs(line) by
// rhs(line)) by congruence. Returns the rewritten node and the proof.
class Rewriter {
 public:
  Rewriter(ProofEngine& e, std::unordered_map<NodeId, LineId> repl) : e_(e), repl_(std::move(repl)) {}
  Normalizer::Result rewrite(NodeId v);

 private:
  ProofEngine& e_;
  std::unordered_map<NodeId, LineId> repl_;
  std::unordered_map<NodeId, Normalizer::Result> memo_;
};

}  // namespace detpi
