#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "detpi/circuit.hpp"

namespace detpi {

enum class Law : std::uint8_t { A1, A2, A3, A4, A5, A6, A7, A8, A9, A10, C1, C2, D, R1, R2, R3, R4 };
const char* law_name(Law l);
std::optional<Law> parse_law(std::string_view s);
std::size_t premise_count(Law l);
inline bool is_rule(Law l) { return l >= Law::R1; }

enum class ProofSystem : std::uint8_t { PC, PIdiv, PCk };
const char* system_name(ProofSystem s);

using NodeMap = std::vector<std::pair<NodeId, NodeId>>;

// Slots name the schema metavariables of an axiom (A1-A9, D) by node id in
// the line circuit. Maps carry node correspondences:
//   R1     [p -> this]                     over lhs(p) and rhs(p)
//   R2     [p -> this, q -> this, p -> q]  over lhs(p), rhs(q), rhs(p)
//   R3/R4  [p -> this, q -> this]          over both sides of each premise
//   C1/C2  [lhs.l -> rhs.l, lhs.r -> rhs.r]
struct Witness {
  std::vector<NodeId> slots;
  std::vector<NodeMap> maps;
};

// eq has exactly two outputs: lhs and rhs.
struct ProofLine {
  Circuit eq;
  Law law = Law::A1;
  std::vector<std::uint32_t> premises;
  Witness witness;

  NodeId lhs() const { return eq.output(0); }
  NodeId rhs() const { return eq.output(1); }
};

struct Proof {
  ProofSystem system = ProofSystem::PIdiv;
  std::uint64_t k = 0;  // PCk only
  std::uint32_t var_count = 0;
  std::vector<ProofLine> lines;
};

std::string encode_proof(const Proof& p);
Proof decode_proof(std::string_view text);

struct CheckOptions {
  bool semantic = false;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  std::size_t retries = 8;  // resamples per trial when a division by zero occurs
};

struct Verdict {
  bool ok = true;
  std::size_t line = 0;
  std::string reason;
};

Verdict check(const Proof& p, const CheckOptions& opt = {});

struct ProofStats {
  std::size_t lines = 0;
  std::size_t total_nodes = 0;
  std::size_t max_line_nodes = 0;
  std::size_t max_depth = 0;
};
ProofStats proof_stats(const Proof& p);

}  // namespace detpi
