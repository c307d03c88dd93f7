#include "doctest.h"

#include "detpi/evaluator.hpp"
#include "detpi/homogenizer.hpp"
#include "support.hpp"

using namespace detpi;

namespace {
Circuit x_plus_one_sq() {
  Builder b;
  const NodeId s = b.add(b.var(0), b.constant(1));
  return b.finish({b.mul(s, s)}, 1);
}
}  // namespace

TEST_CASE("homogenize x+1") {
  Builder b;
  const Circuit f = b.finish({b.add(b.var(0), b.constant(1))}, 1);
  const auto h = homogenize(f, 1);
  const auto v = eval_int(h.circuit, {Int(7)});
  REQUIRE(v.size() == 2);
  CHECK(v[0] == 1);
  CHECK(v[1] == 7);
}

TEST_CASE("homogenize (x+1)^2 components") {
  const Circuit f = x_plus_one_sq();
  const auto h = homogenize(f, 2);
  const auto v = eval_int(h.circuit, {Int(3)});
  CHECK(v == std::vector<Int>{1, 6, 9});
  for (std::uint32_t i = 0; i <= 2; ++i) {
    const SparsePoly p = expand_node(h.circuit, h.component(i), 1000);
    CHECK(p.is_homogeneous(i));
  }
  const auto s = sum_components(homogenize(f, 3));
  CHECK(eval_int(s.circuit, {Int(3)})[0] == 16);
}

TEST_CASE("homogenize with witness zeroes slots above the degree") {
  Builder b;
  const NodeId x = b.var(0);
  const Circuit f = b.finish({b.add(b.mul(x, x), b.constant(5))}, 1);
  const DegreeAnnotation w = exact_degree_witness(f);
  CHECK(w[f.root()] == 2);
  HomogenizeOptions opt;
  opt.witness = &w;
  const auto h = homogenize(f, 2, opt);
  const SparsePoly p1 = expand_node(h.circuit, h.component(1), 100);
  CHECK(p1.is_zero());
  CHECK(eval_int(h.circuit, {Int(4)}) == std::vector<Int>{5, 0, 16});
}

TEST_CASE("exact degree witness") {
  Builder b;
  const NodeId x = b.var(0);
  const NodeId m = b.mul(x, x);
  const NodeId r = b.add(m, x);
  const Circuit f = b.finish({r}, 1);
  const auto w = exact_degree_witness(f);
  CHECK(w[x] == 1);
  CHECK(w[m] == 2);
  CHECK(w[r] == 2);
  CHECK(!w.overflow);

  Builder c;
  NodeId y = c.var(0);
  for (int i = 0; i < 64; ++i) y = c.mul(y, y);
  CHECK(exact_degree_witness(c.finish({y}, 1)).overflow);

  Builder k;
  CHECK(exact_degree_witness(k.finish({k.constant(5)}, 0))[0] == 0);
}

TEST_CASE("sum_components edge cases") {
  Builder b;
  const Circuit zero = b.finish({b.constant(0)}, 0);
  CHECK(eval_int(sum_components(homogenize(zero, 2)).circuit, {})[0] == 0);

  const Circuit f = x_plus_one_sq();
  HomogenizeOptions opt;
  opt.only_i = 1;
  const auto slice = homogenize(f, 2, opt);
  CHECK(eval_int(sum_components(slice).circuit, {Int(3)})[0] == 6);
}

TEST_CASE("homogenization preserves the polynomial") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int trial = 0; trial < 30; ++trial) {
    Builder b;
    std::vector<NodeId> pool{b.var(0), b.var(1), b.constant(2), b.constant(-1)};
    for (int i = 0; i < 10; ++i) {
      std::uniform_int_distribution<std::size_t> any(0, pool.size() - 1);
      const NodeId u = pool[any(rng)], v = pool[any(rng)];
      pool.push_back(pick(rng) < 2 ? b.add(u, v) : b.mul(u, v));
    }
    const Circuit f = b.finish({pool.back()}, 2);
    const auto w = exact_degree_witness(f);
    const auto d = static_cast<std::uint32_t>(w[f.root()]);
    const SparsePoly want = expand(f, 100000)[0];
    for (bool with_witness : {false, true}) {
      HomogenizeOptions opt;
      if (with_witness) opt.witness = &w;
      opt.prune_zeros = with_witness;
      const auto h = homogenize(f, d, opt);
      SparsePoly got;
      for (std::uint32_t i = 0; i <= d; ++i) {
        const SparsePoly p = expand_node(h.circuit, h.component(i), 100000);
        CHECK(p == p.homogeneous_part(i));
        got = got + p;
      }
      CHECK(got == want);
      CHECK(h.circuit.size() <= kHomogenizeSizeK * (d + 1) * (d + 1) * f.size());
    }
  }
}
