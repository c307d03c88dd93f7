#include "doctest.h"

#include "detpi/circuit.hpp"
#include "detpi/degree.hpp"
#include "detpi/evaluator.hpp"
#include "detpi/text_io.hpp"

using namespace detpi;

namespace {
Circuit left_comb(std::uint32_t n) {
  Builder b;
  NodeId acc = b.var(0);
  for (std::uint32_t i = 1; i < n; ++i) acc = b.mul(acc, b.var(i));
  return b.finish({acc});
}
}  // namespace

TEST_CASE("left comb of eight variables has depth 7") {
  const Circuit c = left_comb(8);
  CHECK(depth(c) == 7);
  CHECK(c.var_count() == 8);
}

TEST_CASE("power chain") {
  Builder b;
  const Circuit x = b.finish({b.var(0)});
  const Circuit p = power_chain(x, 4);
  CHECK(eval_int(p, {Int(3)})[0] == 81);
  CHECK(depth(p) == 2);
  CHECK(eval_int(power_chain(x, 0), {Int(5)})[0] == 1);
}

TEST_CASE("text round trip") {
  Builder b;
  const NodeId x = b.var(0), y = b.var(1);
  const NodeId s = b.add(b.mul(x, y), b.constant(Int("-123456789012345678901234567890")));
  const NodeId d = b.inv(s);
  const Circuit c = b.finish({s, d});
  const std::string text = encode(c);
  const Circuit back = decode(text);
  CHECK(back == c);
  CHECK(encode(back) == text);
}

TEST_CASE("decode rejects malformed input with a byte offset") {
  CHECK_THROWS_AS(decode("circuit 1\nvars 1\noutputs 1 0\nnodes 1\n0 add 0 0\nend\n"), FormatError);
  CHECK_THROWS_AS(decode("circuit 1\nvars 1\noutputs 1 3\nnodes 1\n0 var 0\nend\n"), FormatError);
  CHECK_THROWS_AS(decode("circuit 1\nvars 1\noutputs 1 0\nnodes 1\n0 var 0\nend\nextra"), FormatError);
  try {
    decode("circuit 1\nvars 1\noutputs 1 0\nnodes 1\n0 bogus 0\nend\n");
    FAIL("no throw");
  } catch (const FormatError& e) {
    CHECK(e.offset() > 0);
  }
}

TEST_CASE("hash consing shares equal nodes only when asked") {
  Builder plain;
  CHECK(plain.var(0) != plain.var(0));
  Builder pool(Builder::Sharing::HashCons);
  const NodeId a = pool.add(pool.var(0), pool.var(1));
  CHECK(a == pool.add(pool.var(0), pool.var(1)));
}

TEST_CASE("unfold_equal ignores sharing") {
  Builder b;
  const NodeId x = b.var(0);
  const NodeId shared = b.mul(x, x);
  const NodeId copy = b.mul(b.var(0), b.var(0));
  CHECK(unfold_equal(b, shared, b, copy));
  CHECK(match_subdag(b, copy, b, shared, false).has_value());
  CHECK_FALSE(match_subdag(b, copy, b, shared, true).has_value());
}

TEST_CASE("disjoint combine and substitute") {
  Builder b1;
  const Circuit f = b1.finish({b1.add(b1.var(0), b1.constant(1))});
  const auto r = disjoint_combine(f, f, Op::Mul);
  CHECK(eval_int(r.circuit, {Int(2)})[0] == 9);
  Builder b2;
  const Circuit sq = b2.finish({b2.mul(b2.var(0), b2.var(0))});
  const auto s = substitute(f, {{0u, sq}});
  CHECK(eval_int(s.circuit, {Int(3)})[0] == 10);
}

TEST_CASE("syntactic degrees") {
  Builder b;
  const NodeId x = b.var(0);
  const NodeId p = b.mul(b.mul(x, x), b.add(x, b.constant(2)));
  const auto d = syntactic_degrees(b.finish({p}), false);
  CHECK(d.degree[p] == 3);
}
