#include "doctest.h"

#include "detpi/det_builder.hpp"
#include "detpi/evaluator.hpp"
#include "support.hpp"

using namespace detpi;
using namespace testsupport;

TEST_CASE("inverse circuit") {
  const Circuit i1 = build_inverse(1);
  CHECK(i1.size() == 2);
  CHECK(i1.op(i1.output(0)) == Op::Inv);

  const Circuit i2 = build_inverse(2);
  REQUIRE(i2.outputs().size() == 4);
  const auto v = eval_rat(i2, {Rat(1), Rat(2), Rat(3), Rat(4)});
  CHECK(v[0] == -2);
  CHECK(v[1] == 1);
  CHECK(v[2] == Rat(3, 2));
  CHECK(v[3] == Rat(-1, 2));

  const Circuit i3 = build_inverse(3);
  const auto id = eval_rat(i3, to_rat(flatten(identity_matrix(3))));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(id[i * 3 + j] == (i == j ? 1 : 0));
  CHECK_THROWS(build_inverse(0));
}

TEST_CASE("inverse times matrix is the identity") {
  std::mt19937_64 rng(11);
  for (std::uint32_t n = 1; n <= 4; ++n) {
    const Circuit inv = build_inverse(n);
    for (int t = 0; t < 10; ++t) {
      IntMatrix m;
      do m = random_matrix(rng, n, -9, 9);
      while (!leading_minors_nonzero(m));
      const auto e = eval_rat(inv, to_rat(flatten(m)));
      for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
          Rat s = 0;
          for (std::uint32_t k = 0; k < n; ++k) s += Rat(m[i][k]) * e[k * n + j];
          CHECK(s == (i == j ? 1 : 0));
        }
    }
  }
}

TEST_CASE("Det^-1 agrees with Bareiss") {
  CHECK(build_det_inv(MatrixLayout::full(1)).size() == 1);
  CHECK(eval_rat(build_det_inv(MatrixLayout::full(2)), {Rat(1), Rat(2), Rat(3), Rat(4)})[0] == -2);
  CHECK(eval_rat(build_det_inv(MatrixLayout::full(3)),
                 to_rat(flatten(parse_matrix_literal("[[2,0,0],[0,3,0],[0,0,5]]"))))[0] == 30);
  std::mt19937_64 rng(5);
  for (std::uint32_t n = 1; n <= 5; ++n) {
    const Circuit c = build_det_inv(MatrixLayout::full(n));
    for (int t = 0; t < 20; ++t) {
      IntMatrix m;
      do m = random_matrix(rng, n);
      while (!leading_minors_nonzero(m));
      CHECK(eval_rat(c, to_rat(flatten(m)))[0] == Rat(bareiss_det(m)));
    }
  }
}

TEST_CASE("division gates are Schur complements with a diagonal minuend") {
  for (std::uint32_t n = 1; n <= 4; ++n) {
    const Circuit c = build_det_inv(MatrixLayout::full(n));
    for (NodeId v : reachable_nodes(c, c.root())) {
      if (c.op(v) != Op::Inv) continue;
      NodeId a = c.arg(v);
      if (c.op(a) == Op::Add) a = c.left(a);
      REQUIRE(c.op(a) == Op::Var);
      CHECK(c.var_index(a) % (n + 1) == 0);
      const auto at_id = eval_rat_node(c, c.arg(v), to_rat(flatten(identity_matrix(n))));
      CHECK(at_id == 1);
    }
  }
}

TEST_CASE("shifted and triangular layouts") {
  std::mt19937_64 rng(3);
  const Circuit tri = build_det_inv(MatrixLayout::lower_triangular(3));
  IntMatrix m = random_matrix(rng, 3, 1, 9);
  CHECK(eval_rat(tri, to_rat(flatten(m)))[0] == Rat(m[0][0] * m[1][1] * m[2][2]));
  const Circuit sh = build_det_inv(MatrixLayout::identity_shift(2));
  CHECK(sh.var_count() == 5);
  // z = 0 gives det(I) = 1.
  CHECK(eval_rat(sh, {Rat(5), Rat(6), Rat(7), Rat(8), Rat(0)})[0] == 1);
  // z = 1 gives det(I + X).
  CHECK(eval_rat(sh, {Rat(1), Rat(2), Rat(3), Rat(4), Rat(1)})[0] == Rat(2 * 5 - 2 * 3));
}

TEST_CASE("product layout") {
  const Circuit p1 = build_product_layout(1);
  CHECK(p1.size() == 3);
  const Circuit p2 = build_product_layout(2);
  std::vector<Int> a = flatten(parse_matrix_literal("[[1,2],[3,4]]"));
  const auto idv = flatten(identity_matrix(2));
  a.insert(a.end(), idv.begin(), idv.end());
  CHECK(eval_int(p2, a)[0] == 1);
  std::mt19937_64 rng(9);
  const Circuit d = build_det_inv_product(2);
  for (int t = 0; t < 20; ++t) {
    const IntMatrix x = random_matrix(rng, 2), y = random_matrix(rng, 2);
    const IntMatrix xy = matrix_mul(x, y);
    if (!leading_minors_nonzero(xy)) continue;
    std::vector<Int> in = flatten(x);
    const auto fy = flatten(y);
    in.insert(in.end(), fy.begin(), fy.end());
    CHECK(eval_rat(d, to_rat(in))[0] == Rat(bareiss_det(x) * bareiss_det(y)));
  }
}
