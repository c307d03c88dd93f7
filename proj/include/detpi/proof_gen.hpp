#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "detpi/balancer.hpp"
#include "detpi/circuit.hpp"
#include "detpi/numeric.hpp"
#include "detpi/proof.hpp"
#include "detpi/proof_engine.hpp"

namespace detpi {

// All n^2 entries of X * X^-1 = I and X^-1 * X = I, level by level, where
// X^-1 is the Schur complement inverse over the full symbolic matrix.
Proof prove_xxinv(std::uint32_t n);

// Det^-1(Z) = z_11 * ... * z_nn (a left comb) for lower triangular Z.
Proof prove_triangular(std::uint32_t n);

// Homogeneous components of src nodes built into dst. With z set, the
// grading counts z only: z contributes the constant 1 in degree one and the
// other variables stay in degree zero (Coef_{z^i}). Without z every
// variable has degree one and division gates are rejected.
class Components {
 public:
  Components(const Graph& src, Builder& dst, std::optional<std::uint32_t> z = std::nullopt)
      : src_(src), dst_(dst), z_(z) {}
  NodeId get(NodeId v, std::uint32_t i);

 private:
  const Graph& src_;
  Builder& dst_;
  std::optional<std::uint32_t> z_;
  std::unordered_map<std::uint64_t, NodeId> memo_;
};

// The component circuit f^(i) as built by the proof transformations.
Circuit component_circuit(const Circuit& f, std::uint32_t i);

// Proofs of (f * Inv_k(f))^(i) = 1 for i = 0 and = 0 for 1 <= i <= k. eta
// proves f^(0) = 1 in PC with lhs encoded as component_circuit(f, 0);
// without eta the equation is derived by normalization.
std::vector<Proof> prove_inv_lemma(const Circuit& f, std::uint64_t k, const Proof* eta = nullptr);

// Proof of Coef_{z^k}(F) = Coef_{z^k}(G) for the last line F = G of p.
Proof coef_transport(const Proof& p, std::uint32_t k, std::uint32_t z);

// Coef_{z^j}(sum_i F_i z^i) = F_j; the F_i must not contain z.
Proof prove_coef_of_sum(const std::vector<Circuit>& f, std::uint32_t z, std::uint32_t j);

// F = G becomes Num(F) * Inv(Den(F)) = Num(G) * Inv(Den(G)) for every line.
Proof normalize_proof(const Proof& p);

struct EliminationResult {
  Proof proof;              // PCk over the shifted variables w, x_i = rho_i - w_i
  std::vector<Proof> good;  // per division gate u: PC proof of u|rho = 1
};
// Every division gate argument must be division free and evaluate to 1 at rho.
EliminationResult eliminate_division_proof(const Proof& p, const std::vector<Int>& rho, std::uint64_t k);

// Proofs of F^(i) = G^(i), i = 0..d, for the last line F = G of p (PC or PCk).
std::vector<Proof> homogenize_proof(const Proof& p, std::uint32_t d);

struct BalanceProofReport {
  std::size_t depth_lhs = 0, depth_rhs = 0;  // balanced endpoints
  std::size_t bound_lhs = 0, bound_rhs = 0;
  std::size_t max_line_depth = 0;
};
// [F] = [G] for the last line F = G of a PC proof with division-free sides,
// where [.] is homogenize (degub-prime, full degree) then balance. The
// endpoints are tied to F and G by normal forms.
Proof balance_proof(const Proof& p, BalanceProofReport* report = nullptr);

struct PipelineResult {
  Proof triangular, normalized;
  EliminationResult eliminated;
  std::vector<Proof> components;
};
// prove_triangular(n), normalize, eliminate division at rho = I with
// k = 2n, homogenize with d = n.
PipelineResult pipeline_identity2(std::uint32_t n);

}  // namespace detpi
