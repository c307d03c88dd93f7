#include "doctest.h"

#include "detpi/evaluator.hpp"
#include "detpi/proof.hpp"
#include "detpi/proof_engine.hpp"
#include "detpi/proof_gen.hpp"
#include "detpi/rational_passes.hpp"

using namespace detpi;

namespace {

Proof single(ProofEngine& e, LineId l) {
  const LineId t[1] = {l};
  return e.materialize(t);
}

bool checks(const Proof& p) { return check(p).ok; }

bool semantic_ok(const Proof& p, std::size_t trials) {
  CheckOptions o;
  o.semantic = true;
  o.trials = trials;
  return check(p, o).ok;
}

SparsePoly side(const Proof& p, std::size_t i) {
  const ProofLine& l = p.lines.back();
  return expand_node(l.eq, l.eq.output(i), 100000);
}

const char* kR3Fixture = R"(proof 1
system PC
vars 2
lines 3
line 0
circuit 1
vars 2
outputs 2 0 0
nodes 1
0 var 0
end
just A1
slots 1 0
maps 0
endline
line 1
circuit 1
vars 2
outputs 2 0 0
nodes 1
0 var 1
end
just A1
slots 1 0
maps 0
endline
line 2
circuit 1
vars 2
outputs 2 2 2
nodes 3
0 var 0
1 var 1
2 add 0 1
end
just R3 0 1
slots 0
maps 2
map 1 0 0
map 1 0 1
endline
end
)";

}  // namespace

TEST_CASE("checker: x = x by A1") {
  ProofEngine e(ProofSystem::PC, 1);
  const Proof p = single(e, e.a1(e.pool().var(0)));
  REQUIRE(p.lines.size() == 1);
  CHECK(checks(p));
  CHECK(semantic_ok(p, 10));
}

TEST_CASE("checker: R3 fixture and text round trip") {
  const Proof p = decode_proof(kR3Fixture);
  CHECK(checks(p));
  CHECK(encode_proof(p) == kR3Fixture);
}

TEST_CASE("checker: R3 with a wrong witness is rejected at that line") {
  std::string text = kR3Fixture;
  text.replace(text.find("map 1 0 1"), 9, "map 1 0 0");
  const Verdict v = check(decode_proof(text));
  CHECK_FALSE(v.ok);
  CHECK(v.line == 2);
}

TEST_CASE("checker: R2 middle mismatch names the witness") {
  // x = x, y = y, then x = y by transitivity
  std::string text = kR3Fixture;
  const auto at = text.find("line 2");
  text = text.substr(0, at) + R"(line 2
circuit 1
vars 2
outputs 2 0 1
nodes 2
0 var 0
1 var 1
end
just R2 0 1
slots 0
maps 3
map 1 0 0
map 1 0 1
map 1 0 0
endline
end
)";
  const Verdict v = check(decode_proof(text));
  CHECK_FALSE(v.ok);
  CHECK(v.line == 2);
  CHECK(v.reason.find("map 2") != std::string::npos);
}

TEST_CASE("checker: C1 merges disjoint copies") {
  Builder b;
  const NodeId x1 = b.var(0), x2 = b.var(0);
  const NodeId l = b.add(x1, x2), r = b.add(x1, x1);
  Proof p;
  p.system = ProofSystem::PC;
  p.var_count = 1;
  ProofLine line;
  line.eq = b.finish({l, r}, 1);
  line.law = Law::C1;
  line.witness.maps = {{{x1, x1}}, {{x2, x1}}};
  p.lines.push_back(line);
  CHECK(checks(p));
  // shared operands on the disjoint side
  Builder c;
  const NodeId y = c.var(0);
  const NodeId s = c.add(y, y);
  p.lines[0].eq = c.finish({s, s}, 1);
  p.lines[0].witness.maps = {{{y, y}}, {{y, y}}};
  CHECK_FALSE(checks(p));
}

TEST_CASE("checker: A10 is checked arithmetically") {
  ProofEngine e(ProofSystem::PC, 0);
  Proof p = single(e, e.a10_mul(e.pool().constant(6), e.pool().constant(7)));
  CHECK(checks(p));
  Builder b;
  const NodeId v = b.constant(41);
  const NodeId m = b.mul(b.constant(6), b.constant(7));
  p.lines[0].eq = b.finish({v, m}, 0);
  const Verdict bad = check(p);
  CHECK_FALSE(bad.ok);
  CHECK(bad.reason.find("A10") != std::string::npos);
}

TEST_CASE("checker: D is not available in PC") {
  ProofEngine e(ProofSystem::PIdiv, 1);
  Proof p = single(e, e.d(e.pool().var(0)));
  CHECK(checks(p));
  p.system = ProofSystem::PC;
  CHECK_FALSE(checks(p));
}

TEST_CASE("prove_xxinv") {
  const Proof p1 = prove_xxinv(1);
  // X^-1 * X = 1 follows by commutativity from the one D line
  std::size_t d_lines = 0;
  for (const ProofLine& l : p1.lines) d_lines += l.law == Law::D;
  CHECK(d_lines == 1);
  CHECK(p1.lines[0].law == Law::D);
  CHECK(checks(p1));
  const Proof p2 = prove_xxinv(2);
  CHECK(checks(p2));
  CHECK(semantic_ok(p2, 50));
}

TEST_CASE("prove_triangular") {
  CHECK(checks(prove_triangular(1)));
  const Proof p2 = prove_triangular(2);
  CHECK(checks(p2));
  CHECK(semantic_ok(prove_triangular(3), 20));
  // every division gate argument is u_ii - 0 * h
  for (const ProofLine& l : p2.lines)
    for (NodeId v = 0; v < l.eq.size(); ++v)
      if (l.eq.op(v) == Op::Inv) {
        const SparsePoly a = expand_node(l.eq, l.eq.arg(v), 100);
        CHECK(a.term_count() == 1);
        CHECK(a.total_degree() == 1);
      }
}

TEST_CASE("normalize_proof") {
  ProofEngine e(ProofSystem::PIdiv, 1);
  const Proof d = single(e, e.d(e.pool().var(0)));
  const Proof n = normalize_proof(d);
  CHECK(checks(n));
  for (const ProofLine& l : n.lines)
    for (NodeId v = 0; v < l.eq.size(); ++v)
      if (l.eq.op(v) == Op::Inv) CHECK(division_free(l.eq, l.eq.arg(v)));

  ProofEngine f(ProofSystem::PC, 2);
  const NodeId x = f.pool().var(0), y = f.pool().var(1);
  const Proof comm = single(f, f.a2(x, y));
  CHECK(checks(normalize_proof(comm)));

  CHECK(checks(normalize_proof(prove_triangular(2))));
}

TEST_CASE("eliminate_division_proof") {
  ProofEngine e(ProofSystem::PIdiv, 1);
  const Proof d = normalize_proof(single(e, e.d(e.pool().var(0))));
  const EliminationResult r = eliminate_division_proof(d, {Int(1)}, 2);
  CHECK(r.proof.system == ProofSystem::PCk);
  CHECK(r.proof.k == 2);
  CHECK(checks(r.proof));
  CHECK(semantic_ok(r.proof, 20));
  CHECK_FALSE(r.good.empty());
  for (const Proof& g : r.good) CHECK(checks(g));
  for (const ProofLine& l : r.proof.lines) CHECK(division_free(l.eq));

  CHECK_THROWS_AS(eliminate_division_proof(d, {Int(0)}, 2), ProofError);
}

TEST_CASE("inv lemma for f = 1") {
  Builder b;
  const Circuit one = b.finish({b.constant(1)}, 1);
  const auto ps = prove_inv_lemma(one, 3);
  REQUIRE(ps.size() == 4);
  for (const Proof& p : ps) CHECK(checks(p));
}

TEST_CASE("inv lemma for f = 1 - x, k = 2") {
  Builder b;
  const Circuit f = b.finish({b.sub(b.constant(1), b.var(0))}, 1);
  const auto ps = prove_inv_lemma(f, 2);
  REQUIRE(ps.size() == 3);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(checks(ps[i]));
    CHECK(side(ps[i], 0) == SparsePoly::constant(i == 0 ? 1 : 0));
    CHECK(side(ps[i], 1) == SparsePoly::constant(i == 0 ? 1 : 0));
  }
  // oracle: components of (1 - x)(1 + x + x^2)
  const Circuit prod = [&] {
    Builder c;
    const NodeId ff = c.import(f, f.root());
    return c.finish({c.mul(ff, inv_k_node(c, ff, 2))}, 1);
  }();
  const SparsePoly full = expand(prod, 100)[0];
  CHECK(full.homogeneous_part(0) == SparsePoly::constant(1));
  CHECK(full.homogeneous_part(1).is_zero());
  CHECK(full.homogeneous_part(2).is_zero());
}

TEST_CASE("inv lemma with a supplied eta") {
  Builder b;
  const NodeId x = b.var(0);
  const Circuit f = b.finish({b.add(b.mul(b.constant(1), b.constant(1)), x)}, 1);
  const Circuit f0 = component_circuit(f, 0);
  ProofEngine e(ProofSystem::PC, 1);
  const NodeId a = e.pool().import(f0, f0.root());
  const Proof eta = single(e, prove_equal_over(e, a, e.one(), {}));
  REQUIRE(checks(eta));
  const auto ps = prove_inv_lemma(f, 2, &eta);
  REQUIRE(ps.size() == 3);
  for (const Proof& p : ps) CHECK(checks(p));

  ProofEngine w(ProofSystem::PC, 1);
  const Proof wrong = single(w, w.a1(w.pool().var(0)));
  CHECK_THROWS_AS(prove_inv_lemma(f, 2, &wrong), ProofError);
}

TEST_CASE("coef_transport") {
  // z is variable 1
  ProofEngine e(ProofSystem::PC, 2);
  Builder& b = e.pool();
  const NodeId x = b.var(0), z = b.var(1);
  const NodeId t = b.add(b.constant(1), b.mul(z, x));
  const Proof a1 = single(e, e.a1(t));
  const Proof c1 = coef_transport(a1, 1, 1);
  CHECK(checks(c1));
  CHECK(side(c1, 0) == SparsePoly::variable(0));

  const NodeId u = b.mul(z, z);
  const Proof r3 = single(e, e.r3(e.a1(t), e.a4(u, x)));
  REQUIRE(checks(r3));
  for (std::uint32_t k = 0; k <= 2; ++k) {
    const Proof c = coef_transport(r3, k, 1);
    CHECK(checks(c));
    CHECK(side(c, 0) == side(c, 1));
  }
}

TEST_CASE("coefficient of a polynomial sum") {
  std::vector<Circuit> f;
  for (long i = 0; i < 3; ++i) {
    Builder b;
    f.push_back(b.finish({b.add(b.var(0), b.constant(i + 2))}, 2));
  }
  const Proof p = prove_coef_of_sum(f, 1, 1);
  CHECK(checks(p));
  CHECK(semantic_ok(p, 20));
  CHECK(side(p, 1) == expand(f[1], 10)[0]);
}

TEST_CASE("homogenize_proof: A7 with d = 1") {
  ProofEngine e(ProofSystem::PC, 2);
  const NodeId f = e.pool().add(e.pool().var(0), e.pool().mul(e.pool().var(1), e.pool().constant(3)));
  const auto ps = homogenize_proof(single(e, e.a7(f)), 1);
  REQUIRE(ps.size() == 2);
  for (const Proof& p : ps) {
    CHECK(checks(p));
    CHECK(side(p, 0) == side(p, 1));
  }
  CHECK(side(ps[0], 1).is_zero());
}

TEST_CASE("homogenize_proof: R4 product rule") {
  ProofEngine e(ProofSystem::PC, 2);
  Builder& b = e.pool();
  const NodeId x = b.var(0), y = b.var(1);
  const NodeId p1 = b.add(x, b.constant(1)), p2 = b.add(y, b.constant(2));
  const Proof pr = single(e, e.r4(e.a2(x, b.constant(1)), e.a1(p2)));
  REQUIRE(checks(pr));
  const auto ps = homogenize_proof(pr, 2);
  REQUIRE(ps.size() == 3);
  const SparsePoly want = expand_node(b.finish({b.mul(p1, p2)}, 2), b.mul(p1, p2), 100);
  for (std::uint32_t i = 0; i <= 2; ++i) {
    CHECK(checks(ps[i]));
    CHECK(side(ps[i], 0) == want.homogeneous_part(i));
  }
}

TEST_CASE("homogenize_proof: A5 associativity") {
  ProofEngine e(ProofSystem::PC, 3);
  Builder& b = e.pool();
  const NodeId f = b.add(b.var(0), b.constant(1)), g = b.add(b.var(1), b.var(2)), h = b.var(2);
  const auto ps = homogenize_proof(single(e, e.a5(f, g, h)), 3);
  REQUIRE(ps.size() == 4);
  for (const Proof& p : ps) {
    CHECK(checks(p));
    CHECK(side(p, 0) == side(p, 1));
  }
}

TEST_CASE("balance_proof") {
  ProofEngine e(ProofSystem::PC, 2);
  Builder& b = e.pool();
  const NodeId f = b.add(b.var(0), b.mul(b.var(1), b.var(1))), g = b.add(b.var(1), b.constant(3));
  BalanceProofReport rep;
  const Proof p = balance_proof(single(e, e.a4(f, g)), &rep);
  CHECK(checks(p));
  CHECK(rep.depth_lhs <= rep.bound_lhs);
  CHECK(rep.depth_rhs <= rep.bound_rhs);
  CHECK(side(p, 0) == side(p, 1));

  const Proof r3 = balance_proof(decode_proof(kR3Fixture));
  CHECK(checks(r3));

  ProofEngine d(ProofSystem::PIdiv, 1);
  CHECK_THROWS_AS(balance_proof(single(d, d.d(d.pool().var(0)))), ProofError);
}
