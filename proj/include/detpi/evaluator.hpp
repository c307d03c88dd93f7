#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "detpi/circuit.hpp"
#include "detpi/numeric.hpp"

namespace detpi {

class EvalError : public std::runtime_error {
 public:
  EvalError(NodeId node, const std::string& msg)
      : std::runtime_error("node " + std::to_string(node) + ": " + msg), node_(node) {}
  NodeId node() const { return node_; }

 private:
  NodeId node_;
};

// Assignments are indexed by variable; they must cover the circuit's vars.
std::vector<Rat> eval_rat(const Circuit& f, const std::vector<Rat>& a);
Rat eval_rat_node(const Graph& g, NodeId root, const std::vector<Rat>& a);
std::vector<Int> eval_int(const Circuit& f, const std::vector<Int>& a);
Int eval_int_node(const Graph& g, NodeId root, const std::vector<Int>& a);

class TermCapExceeded : public std::runtime_error {
 public:
  TermCapExceeded(std::size_t cap)
      : std::runtime_error("polynomial expansion exceeded term cap " + std::to_string(cap)) {}
};

class SparsePoly {
 public:
  // (variable, exponent) pairs, sorted by variable, exponents positive.
  using Monomial = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

  SparsePoly() = default;
  static SparsePoly constant(const Int& c);
  static SparsePoly variable(std::uint32_t v);

  const std::map<Monomial, Int>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  void add_term(const Monomial& m, const Int& c);

  SparsePoly operator+(const SparsePoly& o) const;
  SparsePoly operator-(const SparsePoly& o) const;
  SparsePoly operator*(const SparsePoly& o) const;
  SparsePoly scaled(const Int& c) const;
  bool operator==(const SparsePoly& o) const { return terms_ == o.terms_; }
  bool operator!=(const SparsePoly& o) const { return !(*this == o); }

  static std::uint64_t degree_of(const Monomial& m);
  std::int64_t total_degree() const;  // -1 for the zero polynomial
  SparsePoly homogeneous_part(std::uint64_t d) const;
  bool is_homogeneous(std::uint64_t d) const;
  // Coefficient of var^k, as a polynomial in the remaining variables.
  SparsePoly coefficient_of(std::uint32_t var, std::uint32_t k) const;
  // Replaces var by the given polynomial.
  SparsePoly substitute(std::uint32_t var, const SparsePoly& p) const;

  Int evaluate(const std::vector<Int>& a) const;
  Rat evaluate(const std::vector<Rat>& a) const;

  std::string to_string() const;

 private:
  std::map<Monomial, Int> terms_;
};

SparsePoly expand_node(const Graph& g, NodeId root, std::size_t term_cap);
std::vector<SparsePoly> expand(const Circuit& f, std::size_t term_cap);

std::string encode_poly(const SparsePoly& p, std::uint32_t var_count);
SparsePoly decode_poly(std::string_view text);

Int bareiss_det(IntMatrix m);
IntMatrix matrix_pow(const IntMatrix& m, std::uint64_t k);
// Coefficients c[0..n] of det(zI - A), c[i] multiplying z^i.
std::vector<Int> char_poly_oracle(const IntMatrix& a);

// "matrix n" header followed by n*n row-major entries.
std::string encode_matrix(const IntMatrix& m);
IntMatrix decode_matrix(std::string_view text);
// Inline form such as [[1,2],[3,4]].
IntMatrix parse_matrix_literal(std::string_view text);

// Uniform integers in [-2^31, 2^31].
Int sample_int(std::mt19937_64& rng);

struct SamplingVerdict {
  bool equal = true;
  std::size_t trials = 0;
  double failure_bound = 0.0;  // chance that unequal polynomials agreed on every sample
};

// Randomized identity test of two division-free sub-DAGs with degree bound d.
SamplingVerdict sample_equal(const Graph& ga, NodeId ra, const Graph& gb, NodeId rb,
                             std::uint32_t var_count, std::uint64_t degree_bound,
                             std::size_t trials, std::mt19937_64& rng);

}  // namespace detpi
