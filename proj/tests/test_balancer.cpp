#include "doctest.h"

#include "detpi/balancer.hpp"
#include "detpi/evaluator.hpp"
#include "detpi/homogenizer.hpp"
#include "detpi/rational_passes.hpp"
#include "support.hpp"

using namespace detpi;
using namespace testsupport;

TEST_CASE("reachability") {
  Builder b;
  const NodeId x = b.var(0), y = b.var(1), z = b.var(2);
  const NodeId xy = b.mul(x, y);
  const NodeId u = b.add(xy, z);
  const NodeId r = b.add(u, xy);
  const Circuit f = b.finish({r}, 3);
  const auto t = reachability(f);
  CHECK(t[x][xy]);
  CHECK(!t[x][z]);
  CHECK(!t[z][xy]);
  CHECK(t[xy][r]);
  CHECK(t[x][r]);
  CHECK(t[r][r]);
}

TEST_CASE("reachability by squaring agrees with the balancer's closure") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Circuit f = random_circuit(rng, 3, 30, 6);
    const auto t = reachability(f);
    Builder out;
    BalanceContext ctx(f, out);
    for (NodeId v = 0; v < f.size(); ++v) {
      if (ctx.effective(v) != v || ctx.kind(v) == BalanceContext::Kind::Alias) continue;
      for (NodeId w = 0; w < f.size(); ++w) {
        if (ctx.effective(w) != w || ctx.kind(w) == BalanceContext::Kind::Alias) continue;
        CHECK(ctx.reaches(w, v) == static_cast<bool>(t[w][v]));
      }
    }
  }
}

TEST_CASE("linear_form coefficients") {
  Builder b;
  const NodeId x1 = b.var(0), x2 = b.var(1);
  const NodeId v = b.add(x1, b.add(x1, x2));
  const NodeId u = b.add(x1, x2);
  const NodeId uu = b.add(u, u);
  const NodeId c = b.constant(5);
  const Circuit f = b.finish({v, uu, c}, 2);
  auto l = linear_form_coefficients(f, v);
  CHECK(l.size() == 2);
  CHECK(l[x1] == 2);
  CHECK(l[x2] == 1);
  l = linear_form_coefficients(f, uu);
  CHECK(l[x1] == 2);
  CHECK(l[x2] == 2);
  l = linear_form_coefficients(f, c);
  CHECK(l.size() == 1);
  CHECK(l[c] == 1);
  Builder m;
  const Circuit g = m.finish({m.mul(m.var(0), m.var(1))}, 2);
  CHECK_THROWS_AS(linear_form_coefficients(g, g.root()), CircuitError);
}

TEST_CASE("partial_linear and frontier") {
  Builder b;
  const NodeId x = b.var(0), y = b.var(1), z = b.var(2);
  const NodeId xy = b.mul(x, y);
  const NodeId r = b.mul(xy, z);
  const Circuit f = b.finish({r}, 3);
  Builder out;
  BalanceContext ctx(f, out);
  CHECK(ctx.label(xy) == 2);
  CHECK(ctx.label(r) == 3);
  CHECK(ctx.frontier(r, 2) == std::vector<NodeId>{r});
  CHECK(ctx.frontier(r, 1) == std::vector<NodeId>{xy});
  CHECK(ctx.frontier(x, 1).empty());

  const LinearForm p = partial_linear_form(ctx, x, xy);
  CHECK(p.constant == 0);
  CHECK(p.coeffs.size() == 1);
  CHECK(p.coeffs.at(y) == 1);
  const LinearForm same = partial_linear_form(ctx, xy, xy);
  CHECK(same.coeffs.empty());
  CHECK(same.constant == 1);
  const LinearForm none = partial_linear_form(ctx, z, xy);
  CHECK(none.coeffs.empty());
  CHECK(none.constant == 0);

  CHECK(out.is_const(ctx.dwfv(z, xy), 0));
  CHECK(out.is_const(ctx.dwfv(xy, xy), 1));
  // d_x (xyz) = yz
  const NodeId d = ctx.dwfv(x, r);
  for (long a : {2L, -3L})
    CHECK(eval_int_node(out, d, {Int(99), Int(a), Int(5)}) == Int(5 * a));
}

TEST_CASE("balance small circuits") {
  Builder b;
  const Circuit x = b.finish({b.var(0)}, 1);
  const Circuit bx = balance(x, syntactic_degrees(x, true));
  REQUIRE(bx.size() == 3);
  CHECK(bx.op(bx.root()) == Op::Mul);
  CHECK(bx.is_const(bx.left(bx.root()), 1));
  CHECK(bx.op(bx.right(bx.root())) == Op::Var);

  Builder c;
  NodeId p = c.var(0);
  for (int i = 1; i < 8; ++i) p = c.mul(p, c.var(0));
  const Circuit comb = c.finish({p}, 1);
  CHECK(comb.size() == 15);
  BalanceReport rep;
  const Circuit bc = balance(comb, syntactic_degrees(comb, true), &rep);
  CHECK(eval_int(bc, {Int(3)})[0] == 6561);
  CHECK(rep.depth_out <= balance_depth_bound(comb.size(), 8));

  CHECK_THROWS_AS(balance(comb, exact_degree_witness(comb)), CircuitError);
}

TEST_CASE("balance preserves random homogeneous sums") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    Builder b;
    std::vector<NodeId> pool{b.var(0), b.var(1), b.var(2), b.constant(3)};
    std::uniform_int_distribution<int> coin(0, 2);
    for (int i = 0; i < 14; ++i) {
      std::uniform_int_distribution<std::size_t> any(0, pool.size() - 1);
      const NodeId u = pool[any(rng)], v = pool[any(rng)];
      pool.push_back(coin(rng) ? b.mul(u, v) : b.add(u, v));
    }
    const Circuit f = b.finish({pool.back()}, 3);
    const DegreeAnnotation w = syntactic_degrees(f, true);
    const auto d = static_cast<std::uint32_t>(w[f.root()]);
    if (d > 40) continue;
    HomogenizeOptions opt;
    opt.witness = &w;
    opt.constants_as_degree_one = true;
    opt.prune_zeros = true;
    const AnnotatedCircuit h = sum_components(homogenize(f, d, opt));
    BalanceReport rep;
    const Circuit g = balance(h.circuit, h.annotation, &rep);
    for (int t = 0; t < 20; ++t) {
      std::uniform_int_distribution<long> e(-9, 9);
      const std::vector<Int> a{Int(e(rng)), Int(e(rng)), Int(e(rng))};
      CHECK(eval_int(g, a)[0] == eval_int(f, a)[0]);
    }
    CHECK(rep.depth_out <= balance_depth_bound(h.circuit.size(), d));
    const auto s = static_cast<std::uint64_t>(h.circuit.size());
    CHECK(g.size() <= kBalanceSizeC * s * s * s);
  }
}

TEST_CASE("derivative degree bound") {
  Builder b;
  const NodeId x = b.var(0), y = b.var(1);
  NodeId p = b.mul(x, y);
  for (int i = 0; i < 4; ++i) p = b.add(b.mul(p, i % 2 ? x : y), b.mul(x, p));
  const Circuit f = b.finish({p}, 2);
  Builder out;
  BalanceContext ctx(f, out);
  for (NodeId v : reachable_nodes(f, f.root()))
    for (NodeId w : reachable_nodes(f, v)) {
      if (2 * ctx.label(w) <= ctx.label(v)) continue;
      const SparsePoly q = expand_node(out, ctx.dwfv(w, v), 100000);
      CHECK(q.total_degree() <= static_cast<std::int64_t>(ctx.label(v) - ctx.label(w)));
    }
}

TEST_CASE("Det_balanced") {
  const Circuit t2 = build_taydet_sharp_prime(2);
  const auto w = syntactic_degrees(t2, true);
  std::uint64_t mx = 0;
  for (NodeId v = 0; v < t2.size(); ++v) mx = std::max(mx, w[v]);
  CHECK(mx <= 3 * 2 + 2);

  std::mt19937_64 rng(77);
  for (std::uint32_t n = 1; n <= 3; ++n) {
    const DetBalancedParts p = build_det_balanced_parts(n);
    CHECK(p.degree_bound <= 3 * n + 2);
    const int trials = n == 2 ? 100 : 20;
    for (int t = 0; t < trials; ++t) {
      const IntMatrix m = random_matrix(rng, n);
      CHECK(eval_int(p.balanced, flatten(m))[0] == bareiss_det(m));
    }
    CHECK(p.report.depth_out <= balance_depth_bound(p.homogenized.size(), p.degree_bound));
  }
  const DetBalancedParts p3 = build_det_balanced_parts(3);
  const std::size_t ls = ceil_log2(p3.homogenized.size()), ln = ceil_log2(3);
  CHECK(p3.report.depth_out <= kBalanceDepthC * (ls * ln + ln * ln));
  CHECK(eval_int(build_det_balanced(2), flatten(parse_matrix_literal("[[1,2],[3,4]]")))[0] == -2);
}
