#include "doctest.h"

#include "detpi/det_builder.hpp"
#include "detpi/evaluator.hpp"
#include "detpi/rational_passes.hpp"
#include "detpi/text_io.hpp"
#include "support.hpp"

using namespace detpi;
using namespace testsupport;

namespace {
Circuit one(std::uint32_t vars, NodeId (*fn)(Builder&)) {
  Builder b;
  const NodeId r = fn(b);
  return b.finish({r}, vars);
}
}  // namespace

TEST_CASE("num_den") {
  const Circuit xinv = one(1, [](Builder& b) { return b.inv(b.var(0)); });
  const auto nd = num_den(xinv);
  CHECK(nd.num.size() == 1);
  CHECK(nd.num.is_const(nd.num.root(), 1));
  CHECK(nd.den.op(nd.den.root()) == Op::Var);

  const Circuit f = one(2, [](Builder& b) { return b.add(b.var(0), b.inv(b.var(1))); });
  const auto p = num_den(f);
  const Rat q = Rat(eval_int(p.num, {Int(2), Int(3)})[0]) / Rat(eval_int(p.den, {Int(2), Int(3)})[0]);
  CHECK(q == Rat(7, 3));
  CHECK(q == eval_rat(f, {Rat(2), Rat(3)})[0]);

  const Circuit df = one(1, [](Builder& b) { return b.mul(b.var(0), b.add(b.var(0), b.constant(2))); });
  const auto pd = num_den(df);
  CHECK(eval_int(pd.den, {Int(17)})[0] == 1);
  CHECK(eval_int(pd.num, {Int(3)})[0] == 15);
}

TEST_CASE("num_den agrees with evaluation on Det^-1") {
  std::mt19937_64 rng(21);
  for (std::uint32_t n = 1; n <= 3; ++n) {
    const Circuit c = build_det_inv(MatrixLayout::full(n));
    const auto p = num_den(c);
    CHECK(division_free(p.num));
    CHECK(division_free(p.den));
    for (int t = 0; t < 10; ++t) {
      IntMatrix m;
      do m = random_matrix(rng, n);
      while (!leading_minors_nonzero(m));
      const auto a = flatten(m);
      CHECK(Rat(eval_int(p.num, a)[0]) / Rat(eval_int(p.den, a)[0]) == eval_rat(c, to_rat(a))[0]);
    }
  }
}

TEST_CASE("normalize_division") {
  const Circuit f = one(2, [](Builder& b) { return b.add(b.inv(b.var(0)), b.inv(b.var(1))); });
  const Circuit g = normalize_division(f);
  CHECK(inv_count(g) == 1);
  CHECK(g.op(g.root()) == Op::Mul);
  CHECK(g.op(g.right(g.root())) == Op::Inv);
  CHECK(eval_rat(g, {Rat(2), Rat(3)})[0] == Rat(5, 6));
  const Circuit h = normalize_division(build_det_inv(MatrixLayout::full(3)));
  CHECK(inv_count(h) == 1);
}

TEST_CASE("inv_k") {
  const Circuit f = one(1, [](Builder& b) { return b.sub(b.constant(1), b.var(0)); });
  const auto e = expand(inv_k(f, 3), 1000)[0];
  SparsePoly want = SparsePoly::constant(1);
  SparsePoly x = SparsePoly::variable(0);
  want = want + x + x * x + x * x * x;
  CHECK(e == want);
  const Circuit c1 = one(0, [](Builder& b) { return b.constant(1); });
  CHECK(eval_int(inv_k(c1, 5), {})[0] == 1);
  const Circuit g = one(1, [](Builder& b) { return b.sub(b.constant(1), b.mul(b.constant(2), b.var(0))); });
  CHECK(eval_int(inv_k(g, 2), {Int(1)})[0] == 7);
}

TEST_CASE("coef") {
  // z is variable 1.
  const Circuit zx = one(2, [](Builder& b) { return b.mul(b.var(1), b.var(0)); });
  const Circuit c1 = coef(zx, 1, 1);
  CHECK(eval_int(c1, {Int(7), Int(0)})[0] == 7);
  CHECK_FALSE(contains_var(c1, c1.root(), 1));
  const Circuit xy = one(3, [](Builder& b) { return b.add(b.var(0), b.var(2)); });
  CHECK(eval_int(coef(xy, 2, 1), {Int(4), Int(0), Int(5)})[0] == 0);
  CHECK(eval_int(coef(xy, 0, 1), {Int(4), Int(0), Int(5)})[0] == 9);
  const Circuit lin = one(1, [](Builder& b) {
    const NodeId z = b.var(0);
    return b.mul(b.add(b.mul(b.constant(3), z), b.constant(5)), b.add(b.mul(b.constant(2), z), b.constant(7)));
  });
  CHECK(eval_int(coef(lin, 1, 0), {Int(0)})[0] == 31);
  CHECK(eval_int(coef(lin, 2, 0), {Int(0)})[0] == 6);
  CHECK(eval_int(coef(lin, 0, 0), {Int(0)})[0] == 35);
}

TEST_CASE("coef through a division gate") {
  // 1 / (1 - z*x) = 1 + zx + z^2 x^2 + ...
  const Circuit f = one(2, [](Builder& b) { return b.inv(b.sub(b.constant(1), b.mul(b.var(1), b.var(0)))); });
  const Circuit c = coef(f, 3, 1);
  CHECK(inv_count(c) == 1);
  CHECK(eval_rat(c, {Rat(2), Rat(0)})[0] == 8);
}

TEST_CASE("coefficient reconstruction") {
  std::mt19937_64 rng(4);
  const Circuit f = one(2, [](Builder& b) {
    const NodeId z = b.var(1), x = b.var(0);
    const NodeId p = b.add(b.mul(z, x), b.constant(2));
    return b.mul(b.mul(p, p), b.add(z, x));
  });
  for (int t = 0; t < 5; ++t) {
    const Int x(static_cast<long>(rng() % 100)), z(static_cast<long>(rng() % 100));
    Int sum = 0, zp = 1;
    for (std::uint32_t i = 0; i <= 3; ++i, zp *= z) sum += eval_int(coef(f, i, 1), {x, Int(0)})[0] * zp;
    CHECK(sum == eval_int(f, {x, z})[0]);
  }
}

TEST_CASE("Taydet computes the determinant") {
  for (std::uint32_t n = 1; n <= 3; ++n) {
    const Circuit t = build_taydet(n);
    CHECK(inv_count(t) == 1);
    CHECK(t.var_count() == n * n);
    std::mt19937_64 rng(n);
    for (int s = 0; s < 10; ++s) {
      const IntMatrix m = random_matrix(rng, n);
      CHECK(eval_rat(t, to_rat(flatten(m)))[0] == Rat(bareiss_det(m)));
    }
  }
  CHECK(eval_rat(build_taydet(1), {Rat(-13)})[0] == -13);
  CHECK(eval_rat(build_taydet(2), {Rat(1), Rat(1), Rat(1), Rat(1)})[0] == 0);
}

TEST_CASE("Taydet# is division free and exact") {
  for (std::uint32_t n = 1; n <= 3; ++n) {
    const Circuit t = build_taydet_sharp(n);
    CHECK(division_free(t));
    std::mt19937_64 rng(n + 10);
    for (int s = 0; s < 10; ++s) {
      const IntMatrix m = random_matrix(rng, n);
      CHECK(eval_int(t, flatten(m))[0] == bareiss_det(m));
    }
  }
  const Circuit t2 = build_taydet_sharp(2);
  CHECK(eval_int(t2, {Int(1), Int(2), Int(3), Int(4)})[0] == -2);
  CHECK(eval_int(t2, {Int(0), Int(0), Int(0), Int(0)})[0] == 0);
  SparsePoly want = SparsePoly::variable(0) * SparsePoly::variable(3) - SparsePoly::variable(1) * SparsePoly::variable(2);
  CHECK(expand(t2, 100000)[0] == want);
}

TEST_CASE("simplify_zeros") {
  const Circuit f = one(2, [](Builder& b) { return b.add(b.mul(b.constant(0), b.var(0)), b.var(1)); });
  const auto r = simplify_zeros(f);
  CHECK(r.trace.size() == 2);
  CHECK(r.circuit.size() == 1);
  CHECK(r.circuit.op(r.circuit.root()) == Op::Var);
  const Circuit g = one(2, [](Builder& b) { return b.add(b.mul(b.var(0), b.var(1)), b.var(1)); });
  const auto rg = simplify_zeros(g);
  CHECK(rg.trace.empty());
  CHECK(rg.circuit == g);

  // Det^-1(I + zX) at z = 0.
  for (std::uint32_t n = 1; n <= 3; ++n) {
    const Circuit sh = build_det_inv(MatrixLayout::identity_shift(n));
    Builder zb;
    std::map<std::uint32_t, Circuit> sub{{n * n, zb.finish({zb.constant(0)})}};
    const auto s = simplify_zeros(substitute(sh, sub).circuit);
    CHECK_FALSE(contains_var(s.circuit, s.circuit.root(), 0));
    CHECK(eval_rat(s.circuit, std::vector<Rat>(n * n + 1, Rat(3)))[0] == 1);
  }
}

TEST_CASE("eliminate_division") {
  const Circuit f = one(1, [](Builder& b) {
    const NodeId x = b.var(0);
    return b.mul(x, b.inv(x));
  });
  const Circuit w = eliminate_division(f, {Int(1)}, 2, false);
  CHECK(division_free(w));
  SparsePoly ww = SparsePoly::variable(0);
  CHECK(expand(w, 1000)[0] == SparsePoly::constant(1) - ww * ww * ww);
  CHECK_THROWS(eliminate_division(f, {Int(0)}, 2));
  const Circuit plain = one(1, [](Builder& b) { return b.add(b.var(0), b.constant(1)); });
  CHECK(eliminate_division(plain, {Int(1)}, 2) == plain);
  const Circuit nested = one(1, [](Builder& b) { return b.inv(b.add(b.inv(b.var(0)), b.constant(1))); });
  CHECK_THROWS(eliminate_division(nested, {Int(1)}, 2));
}
