#include "doctest.h"

#include "detpi/evaluator.hpp"

using namespace detpi;

TEST_CASE("bareiss on small matrices") {
  CHECK(bareiss_det(parse_matrix_literal("[[1,2],[3,4]]")) == -2);
  CHECK(bareiss_det(parse_matrix_literal("[[0,1],[1,0]]")) == -1);
  CHECK(bareiss_det(parse_matrix_literal("[[2,0,0],[0,3,0],[0,0,4]]")) == 24);
  CHECK(bareiss_det(parse_matrix_literal("[[1,2],[2,4]]")) == 0);
  // Vandermonde on 1,2,3,4: product of differences = 12.
  CHECK(bareiss_det(parse_matrix_literal("[[1,1,1,1],[1,2,4,8],[1,3,9,27],[1,4,16,64]]")) == 12);
}

TEST_CASE("characteristic polynomial oracle") {
  const auto c = char_poly_oracle(parse_matrix_literal("[[2,0],[0,3]]"));
  REQUIRE(c.size() == 3);
  CHECK(c[0] == 6);
  CHECK(c[1] == -5);
  CHECK(c[2] == 1);
  const auto m = parse_matrix_literal("[[1,2,3],[4,5,6],[7,8,10]]");
  const auto cp = char_poly_oracle(m);
  CHECK(cp[0] == -bareiss_det(m));
}

TEST_CASE("matrix power") {
  const auto p = matrix_pow(parse_matrix_literal("[[1,1],[0,1]]"), 3);
  CHECK(p == parse_matrix_literal("[[1,3],[0,1]]"));
  CHECK(matrix_pow(p, 0) == identity_matrix(2));
}

TEST_CASE("matrix text formats") {
  const auto m = parse_matrix_literal("[[1,-2],[3,4]]");
  CHECK(decode_matrix(encode_matrix(m)) == m);
  CHECK_THROWS(parse_matrix_literal("[[1,2],[3]]"));
  CHECK_THROWS(parse_matrix_literal("[[1,x]]"));
}

TEST_CASE("sparse polynomials") {
  const SparsePoly x = SparsePoly::variable(0), y = SparsePoly::variable(1);
  const SparsePoly p = (x + y) * (x - y);
  CHECK(p == x * x - y * y);
  CHECK(p.total_degree() == 2);
  CHECK(p.is_homogeneous(2));
  CHECK(p.evaluate(std::vector<Int>{Int(5), Int(3)}) == 16);
  CHECK(decode_poly(encode_poly(p, 2)) == p);
  CHECK(p.substitute(1, SparsePoly::constant(1)) == x * x - SparsePoly::constant(1));
  CHECK(p.coefficient_of(0, 2) == SparsePoly::constant(1));
}

TEST_CASE("expansion, term cap and evaluation errors") {
  Builder b;
  NodeId acc = b.constant(1);
  for (std::uint32_t i = 0; i < 12; ++i) acc = b.mul(acc, b.add(b.var(i), b.constant(1)));
  const Circuit c = b.finish({acc});
  CHECK(expand(c, 5000)[0].term_count() == 4096);
  CHECK_THROWS_AS(expand(c, 100), TermCapExceeded);

  Builder d;
  const NodeId z = d.inv(d.add(d.var(0), d.constant(-1)));
  const Circuit dc = d.finish({z});
  CHECK(eval_rat(dc, {Rat(3)})[0] == Rat(1, 2));
  try {
    eval_rat(dc, {Rat(1)});
    FAIL("no throw");
  } catch (const EvalError& e) {
    CHECK(e.node() == z);
  }
  CHECK_THROWS_AS(eval_int(dc, {Int(3)}), EvalError);
}

TEST_CASE("sampling identity test") {
  Builder b;
  const NodeId x = b.var(0), y = b.var(1);
  const NodeId l = b.mul(b.add(x, y), b.add(x, y));
  const NodeId r = b.add(b.add(b.mul(x, x), b.mul(b.constant(2), b.mul(x, y))), b.mul(y, y));
  const NodeId w = b.add(b.mul(x, x), b.mul(y, y));
  std::mt19937_64 rng(7);
  const auto v = sample_equal(b, l, b, r, 2, 2, 4, rng);
  CHECK(v.equal);
  CHECK(v.failure_bound < 1e-30);
  CHECK_FALSE(sample_equal(b, l, b, w, 2, 2, 4, rng).equal);
}
