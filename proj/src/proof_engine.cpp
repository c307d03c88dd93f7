#include "detpi/proof_engine.hpp"

#include <algorithm>

#include "detpi/rational_passes.hpp"

namespace detpi {

ProofEngine::ProofEngine(ProofSystem system, std::uint32_t var_count, std::uint64_t k)
    : system_(system), var_count_(var_count), k_(k) {}

LineId ProofEngine::axiom(Law law, NodeId lhs, NodeId rhs, std::array<NodeId, 3> slot) {
  const Key key{static_cast<std::uint8_t>(law), slot[0], slot[1], slot[2]};
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  const LineId id = static_cast<LineId>(lines_.size());
  Line l;
  l.lhs = lhs;
  l.rhs = rhs;
  l.law = law;
  l.slot = slot;
  lines_.push_back(l);
  memo_.emplace(key, id);
  return id;
}

LineId ProofEngine::rule(Law law, NodeId lhs, NodeId rhs, LineId p, LineId q) {
  const Key key{static_cast<std::uint8_t>(law), p, q, 0};
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  const LineId id = static_cast<LineId>(lines_.size());
  Line l;
  l.lhs = lhs;
  l.rhs = rhs;
  l.law = law;
  l.prem = {p, q};
  lines_.push_back(l);
  memo_.emplace(key, id);
  return id;
}

LineId ProofEngine::a1(NodeId f) { return axiom(Law::A1, f, f, {f, kNoNode, kNoNode}); }
LineId ProofEngine::a2(NodeId f, NodeId g) {
  return axiom(Law::A2, pool_.add(f, g), pool_.add(g, f), {f, g, kNoNode});
}
LineId ProofEngine::a3(NodeId f, NodeId g, NodeId h) {
  return axiom(Law::A3, pool_.add(f, pool_.add(g, h)), pool_.add(pool_.add(f, g), h), {f, g, h});
}
LineId ProofEngine::a4(NodeId f, NodeId g) {
  return axiom(Law::A4, pool_.mul(f, g), pool_.mul(g, f), {f, g, kNoNode});
}
LineId ProofEngine::a5(NodeId f, NodeId g, NodeId h) {
  return axiom(Law::A5, pool_.mul(f, pool_.mul(g, h)), pool_.mul(pool_.mul(f, g), h), {f, g, h});
}
LineId ProofEngine::a6(NodeId f, NodeId g, NodeId h) {
  return axiom(Law::A6, pool_.mul(f, pool_.add(g, h)), pool_.add(pool_.mul(f, g), pool_.mul(f, h)), {f, g, h});
}
LineId ProofEngine::a7(NodeId f) { return axiom(Law::A7, pool_.add(f, zero()), f, {f, kNoNode, kNoNode}); }
LineId ProofEngine::a8(NodeId f) { return axiom(Law::A8, pool_.mul(f, zero()), zero(), {f, kNoNode, kNoNode}); }
LineId ProofEngine::a9(NodeId f) { return axiom(Law::A9, pool_.mul(f, one()), f, {f, kNoNode, kNoNode}); }

LineId ProofEngine::a10_add(NodeId b, NodeId c) {
  const NodeId v = pool_.constant(Int(pool_.value(b) + pool_.value(c)));
  const NodeId r = pool_.add(b, c);
  return axiom(Law::A10, v, r, {v, r, kNoNode});
}
LineId ProofEngine::a10_mul(NodeId b, NodeId c) {
  const NodeId v = pool_.constant(Int(pool_.value(b) * pool_.value(c)));
  const NodeId r = pool_.mul(b, c);
  return axiom(Law::A10, v, r, {v, r, kNoNode});
}

LineId ProofEngine::d(NodeId f) {
  switch (system_) {
    case ProofSystem::PC: throw ProofError("axiom D is not available in PC");
    case ProofSystem::PIdiv: return axiom(Law::D, pool_.mul(f, pool_.inv(f)), one(), {f, kNoNode, kNoNode});
    case ProofSystem::PCk: break;
  }
  return axiom(Law::D, pool_.mul(f, inv_k_node(pool_, f, k_)), one(), {f, kNoNode, kNoNode});
}

LineId ProofEngine::r1(LineId p) { return rule(Law::R1, lines_[p].rhs, lines_[p].lhs, p, kNoLine); }

LineId ProofEngine::r2(LineId p, LineId q) {
  if (lines_[p].rhs != lines_[q].lhs) throw ProofError("transitivity premises do not chain");
  return rule(Law::R2, lines_[p].lhs, lines_[q].rhs, p, q);
}

LineId ProofEngine::r3(LineId p, LineId q) {
  return rule(Law::R3, pool_.add(lines_[p].lhs, lines_[q].lhs), pool_.add(lines_[p].rhs, lines_[q].rhs), p, q);
}

LineId ProofEngine::r4(LineId p, LineId q) {
  return rule(Law::R4, pool_.mul(lines_[p].lhs, lines_[q].lhs), pool_.mul(lines_[p].rhs, lines_[q].rhs), p, q);
}

LineId ProofEngine::chain(std::initializer_list<LineId> steps) {
  return chain(std::span<const LineId>(steps.begin(), steps.size()));
}

LineId ProofEngine::chain(std::span<const LineId> steps) {
  LineId acc = kNoLine;
  for (LineId s : steps) {
    if (acc == kNoLine || is_reflexive(acc)) {
      acc = s;
    } else if (!is_reflexive(s)) {
      acc = r2(acc, s);
    }
  }
  return acc;
}

NodeId ProofEngine::sum_nodes(std::span<const NodeId> terms) {
  if (terms.empty()) return zero();
  if (terms.size() == 1) return terms[0];
  const std::size_t mid = terms.size() / 2;
  return pool_.add(sum_nodes(terms.subspan(0, mid)), sum_nodes(terms.subspan(mid)));
}

LineId ProofEngine::sum_cong(std::span<const LineId> lines) {
  if (lines.empty()) return a1(zero());
  if (lines.size() == 1) return lines[0];
  const std::size_t mid = lines.size() / 2;
  return r3(sum_cong(lines.subspan(0, mid)), sum_cong(lines.subspan(mid)));
}

// ---- materialization ------------------------------------------------------

namespace {

// Reachable pool nodes, ascending.
std::vector<NodeId> collect(const Graph& g, std::initializer_list<NodeId> roots, std::vector<std::uint32_t>& stamp,
                            std::uint32_t epoch) {
  std::vector<NodeId> out;
  std::vector<NodeId> stack(roots);
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    if (stamp[x] == epoch) continue;
    stamp[x] = epoch;
    out.push_back(x);
    const int ar = g.arity(x);
    if (ar >= 1) stack.push_back(g.node(x).a);
    if (ar == 2) stack.push_back(g.node(x).b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

NodeId local_id(const std::vector<NodeId>& nodes, NodeId x) {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
  return static_cast<NodeId>(it - nodes.begin());
}

}  // namespace

Proof ProofEngine::materialize(std::span<const LineId> targets) const {
  std::vector<char> keep(lines_.size(), 0);
  for (LineId t : targets) keep.at(t) = 1;
  for (std::size_t i = lines_.size(); i-- > 0;) {
    if (!keep[i]) continue;
    for (LineId p : lines_[i].prem)
      if (p != kNoLine) keep[p] = 1;
  }
  Proof out;
  out.system = system_;
  out.k = system_ == ProofSystem::PCk ? k_ : 0;
  out.var_count = std::max(var_count_, pool_.var_bound());
  std::vector<LineId> index(lines_.size(), kNoLine);
  std::vector<std::vector<NodeId>> nodes_of(lines_.size());
  std::vector<std::uint32_t> stamp(pool_.size(), 0);
  std::uint32_t epoch = 0;
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    if (!keep[i]) continue;
    const Line& l = lines_[i];
    index[i] = static_cast<LineId>(out.lines.size());
    std::vector<NodeId> nodes = collect(pool_, {l.lhs, l.rhs}, stamp, ++epoch);
    std::vector<Node> cn;
    std::vector<Int> consts;
    cn.reserve(nodes.size());
    for (NodeId x : nodes) {
      Node n = pool_.node(x);
      switch (n.op) {
        case Op::Var: break;
        case Op::Const:
          consts.push_back(pool_.value(x));
          n.a = static_cast<std::uint32_t>(consts.size() - 1);
          break;
        case Op::Inv: n.a = local_id(nodes, n.a); break;
        default:
          n.a = local_id(nodes, n.a);
          n.b = local_id(nodes, n.b);
      }
      cn.push_back(n);
    }
    ProofLine pl;
    pl.eq = Circuit::from_parts(std::move(cn), std::move(consts), {local_id(nodes, l.lhs), local_id(nodes, l.rhs)},
                                out.var_count);
    pl.law = l.law;
    for (LineId p : l.prem)
      if (p != kNoLine) pl.premises.push_back(index[p]);
    auto identity_map = [&](const std::vector<NodeId>& src_nodes, const std::vector<NodeId>& covered,
                            const std::vector<NodeId>& dst_nodes) {
      NodeMap m;
      m.reserve(covered.size());
      for (NodeId x : covered) m.emplace_back(local_id(src_nodes, x), local_id(dst_nodes, x));
      return m;
    };
    switch (l.law) {
      case Law::A10: break;
      case Law::A1:
      case Law::A7:
      case Law::A8:
      case Law::A9:
      case Law::D: pl.witness.slots = {local_id(nodes, l.slot[0])}; break;
      case Law::A2:
      case Law::A4: pl.witness.slots = {local_id(nodes, l.slot[0]), local_id(nodes, l.slot[1])}; break;
      case Law::A3:
      case Law::A5:
      case Law::A6:
        pl.witness.slots = {local_id(nodes, l.slot[0]), local_id(nodes, l.slot[1]), local_id(nodes, l.slot[2])};
        break;
      case Law::R1:
      case Law::R3:
      case Law::R4:
        for (LineId p : l.prem) {
          if (p == kNoLine) continue;
          pl.witness.maps.push_back(identity_map(nodes_of[p], nodes_of[p], nodes));
        }
        break;
      case Law::R2: {
        const Line& a = lines_[l.prem[0]];
        const Line& b = lines_[l.prem[1]];
        const auto ca = collect(pool_, {a.lhs}, stamp, ++epoch);
        const auto cb = collect(pool_, {b.rhs}, stamp, ++epoch);
        const auto cm = collect(pool_, {a.rhs}, stamp, ++epoch);
        pl.witness.maps.push_back(identity_map(nodes_of[l.prem[0]], ca, nodes));
        pl.witness.maps.push_back(identity_map(nodes_of[l.prem[1]], cb, nodes));
        pl.witness.maps.push_back(identity_map(nodes_of[l.prem[0]], cm, nodes_of[l.prem[1]]));
        break;
      }
      default: throw ProofError("pool proofs do not contain C1/C2 lines");
    }
    nodes_of[i] = std::move(nodes);
    out.lines.push_back(std::move(pl));
  }
  return out;
}

Proof ProofEngine::materialize_all() const {
  std::vector<LineId> all(lines_.size());
  for (LineId i = 0; i < all.size(); ++i) all[i] = i;
  return materialize(all);
}

std::vector<LineId> import_proof(ProofEngine& e, const Proof& p) {
  e.widen_vars(p.var_count);
  std::vector<LineId> map;
  map.reserve(p.lines.size());
  Builder& b = e.pool();
  for (const ProofLine& l : p.lines) {
    std::vector<NodeId> memo(l.eq.size(), kNoNode);
    auto imp = [&](NodeId v) { return b.import(l.eq, v, memo); };
    const NodeId L = imp(l.lhs()), R = imp(l.rhs());
    const auto& s = l.witness.slots;
    auto prem = [&](std::size_t i) { return map.at(l.premises.at(i)); };
    LineId id = kNoLine;
    switch (l.law) {
      case Law::A1: id = e.a1(imp(s.at(0))); break;
      case Law::A2: id = e.a2(imp(s.at(0)), imp(s.at(1))); break;
      case Law::A3: id = e.a3(imp(s.at(0)), imp(s.at(1)), imp(s.at(2))); break;
      case Law::A4: id = e.a4(imp(s.at(0)), imp(s.at(1))); break;
      case Law::A5: id = e.a5(imp(s.at(0)), imp(s.at(1)), imp(s.at(2))); break;
      case Law::A6: id = e.a6(imp(s.at(0)), imp(s.at(1)), imp(s.at(2))); break;
      case Law::A7: id = e.a7(imp(s.at(0))); break;
      case Law::A8: id = e.a8(imp(s.at(0))); break;
      case Law::A9: id = e.a9(imp(s.at(0))); break;
      case Law::A10: {
        const NodeId x = b.left(R), y = b.right(R);
        id = b.op(R) == Op::Add ? e.a10_add(x, y) : e.a10_mul(x, y);
        break;
      }
      case Law::C1:
      case Law::C2: id = e.a1(L); break;
      case Law::D: id = e.d(imp(s.at(0))); break;
      case Law::R1: id = e.r1(prem(0)); break;
      case Law::R2: id = e.r2(prem(0), prem(1)); break;
      case Law::R3: id = e.r3(prem(0), prem(1)); break;
      case Law::R4: id = e.r4(prem(0), prem(1)); break;
    }
    if (e.lhs(id) != L || e.rhs(id) != R) throw ProofError("imported line does not match its justification");
    map.push_back(id);
  }
  return map;
}

// ---- normal forms -----------------------------------------------------------

Normalizer::Normalizer(ProofEngine& e, std::span<const NodeId> atoms) : e_(e), atoms_(atoms.begin(), atoms.end()) {}

bool Normalizer::atom(NodeId v) const {
  const Op op = e_.pool().op(v);
  return op == Op::Var || op == Op::Inv || atoms_.count(v) != 0;
}

bool Normalizer::zero_hint(NodeId v) {
  auto it = zero_.find(v);
  if (it != zero_.end()) return it->second;
  const Builder& g = e_.pool();
  bool z = false;
  if (!atom(v)) {
    switch (g.op(v)) {
      case Op::Const: z = g.value(v) == 0; break;
      case Op::Mul: z = zero_hint(g.left(v)) || zero_hint(g.right(v)); break;
      case Op::Add: z = zero_hint(g.left(v)) && zero_hint(g.right(v)); break;
      default: break;
    }
  }
  zero_.emplace(v, z);
  return z;
}

// Sign of m1 - m2 in lex order over ascending atom lists.
int Normalizer::compare(NodeId m1, NodeId m2) const {
  const Builder& g = e_.pool();
  while (true) {
    if (m1 == m2) return 0;
    const bool e1 = g.op(m1) == Op::Const, e2 = g.op(m2) == Op::Const;
    if (e1) return -1;
    if (e2) return 1;
    const NodeId a = g.left(m1), b = g.left(m2);
    if (a != b) return a < b ? 1 : -1;
    m1 = g.right(m1);
    m2 = g.right(m2);
  }
}

Normalizer::Result Normalizer::atom_nf(NodeId a) {
  Builder& b = e_.pool();
  const NodeId one = e_.one();
  const NodeId mono = b.mul(a, one);
  const NodeId t = b.mul(one, mono);
  const NodeId nf = b.add(t, e_.zero());
  const LineId l1 = e_.r1(e_.a9(a));
  const LineId l2 = e_.r1(e_.chain({e_.a4(one, mono), e_.a9(mono)}));
  const LineId l3 = e_.r1(e_.a7(t));
  return {nf, e_.chain({l1, l2, l3})};
}

Normalizer::Result Normalizer::normalize(NodeId v) {
  auto it = nf_.find(v);
  if (it != nf_.end()) return it->second;
  Builder& b = e_.pool();
  Result r;
  if (atom(v)) {
    r = atom_nf(v);
  } else {
    switch (b.op(v)) {
      case Op::Const:
        if (b.value(v) == 0) {
          r = {v, e_.a1(v)};
        } else {
          const NodeId t = b.mul(v, e_.one());
          r.node = b.add(t, e_.zero());
          r.line = e_.chain({e_.r1(e_.a9(v)), e_.r1(e_.a7(t))});
        }
        break;
      case Op::Add: {
        const Result x = normalize(b.left(v));
        const Result y = normalize(b.right(v));
        const Result m = merge(x.node, y.node);
        r = {m.node, e_.chain({e_.r3(x.line, y.line), m.line})};
        break;
      }
      case Op::Mul: {
        const NodeId l = b.left(v), rr = b.right(v);
        const NodeId z = e_.zero();
        if (zero_hint(l)) {
          const Result x = normalize(l);
          if (x.node == z) {
            const LineId s = e_.r4(x.line, e_.a1(rr));
            r = {z, e_.chain({s, e_.a4(z, rr), e_.a8(rr)})};
            break;
          }
        }
        if (zero_hint(rr)) {
          const Result y = normalize(rr);
          if (y.node == z) {
            r = {z, e_.chain({e_.r4(e_.a1(l), y.line), e_.a8(l)})};
            break;
          }
        }
        const Result x = normalize(l);
        const Result y = normalize(rr);
        const Result m = mult(x.node, y.node);
        r = {m.node, e_.chain({e_.r4(x.line, y.line), m.line})};
        break;
      }
      default: throw ProofError("unexpected node in normal form computation");
    }
  }
  nf_.emplace(v, r);
  return r;
}

LineId Normalizer::prove_equal(NodeId a, NodeId b) {
  const Result x = normalize(a);
  const Result y = normalize(b);
  if (x.node != y.node) throw ProofError("sides have different normal forms");
  return e_.chain({x.line, e_.sym(y.line)});
}

Normalizer::Result Normalizer::combine(NodeId t, NodeId u) {
  Builder& b = e_.pool();
  const NodeId c1 = b.left(t), c2 = b.left(u), m = b.right(t);
  const LineId l1 = e_.r3(e_.a4(c1, m), e_.a4(c2, m));
  const LineId l2 = e_.r1(e_.a6(m, c1, c2));
  const LineId sum = e_.a10_add(c1, c2);
  const NodeId c = e_.lhs(sum);
  const LineId l3 = e_.r4(e_.a1(m), e_.r1(sum));
  if (b.value(c) == 0) return {e_.zero(), e_.chain({l1, l2, l3, e_.a8(m)})};
  return {b.mul(c, m), e_.chain({l1, l2, l3, e_.a4(m, c)})};
}

Normalizer::Result Normalizer::merge(NodeId p, NodeId q) {
  auto it = merge_.find(key(p, q));
  if (it != merge_.end()) return it->second;
  Builder& b = e_.pool();
  const NodeId z = e_.zero();
  Result r;
  if (p == z) {
    r = {q, e_.chain({e_.a2(z, q), e_.a7(q)})};
  } else if (q == z) {
    r = {p, e_.a7(p)};
  } else {
    const NodeId t1 = b.left(p), p1 = b.right(p), u1 = b.left(q), q1 = b.right(q);
    const int cmp = compare(b.right(t1), b.right(u1));
    if (cmp > 0) {
      const Result rec = merge(p1, q);
      r.node = b.add(t1, rec.node);
      r.line = e_.chain({e_.r1(e_.a3(t1, p1, q)), e_.r3(e_.a1(t1), rec.line)});
    } else if (cmp < 0) {
      const Result rec = merge(p, q1);
      r.node = b.add(u1, rec.node);
      r.line = e_.chain({e_.a3(p, u1, q1), e_.r3(e_.a2(p, u1), e_.a1(q1)), e_.r1(e_.a3(u1, p, q1)),
                         e_.r3(e_.a1(u1), rec.line)});
    } else {
      const LineId l1 = e_.r1(e_.a3(t1, p1, q));
      const LineId inner = e_.chain({e_.a3(p1, u1, q1), e_.r3(e_.a2(p1, u1), e_.a1(q1)), e_.r1(e_.a3(u1, p1, q1))});
      const LineId l2 = e_.r3(e_.a1(t1), inner);
      const NodeId x = b.add(p1, q1);
      const LineId l3 = e_.a3(t1, u1, x);
      const Result cm = combine(t1, u1);
      const Result rec = merge(p1, q1);
      const LineId l4 = e_.r3(cm.line, rec.line);
      if (cm.node == z) {
        r = {rec.node, e_.chain({l1, l2, l3, l4, e_.a2(z, rec.node), e_.a7(rec.node)})};
      } else {
        r = {b.add(cm.node, rec.node), e_.chain({l1, l2, l3, l4})};
      }
    }
  }
  merge_.emplace(key(p, q), r);
  return r;
}

Normalizer::Result Normalizer::mono_mult(NodeId m1, NodeId m2) {
  auto it = mm_.find(key(m1, m2));
  if (it != mm_.end()) return it->second;
  Builder& b = e_.pool();
  const NodeId one = e_.one();
  Result r;
  if (m1 == one) {
    r = {m2, e_.chain({e_.a4(one, m2), e_.a9(m2)})};
  } else if (m2 == one) {
    r = {m1, e_.a9(m1)};
  } else {
    const NodeId a = b.left(m1), m1r = b.right(m1), c = b.left(m2), m2r = b.right(m2);
    if (a <= c) {
      const Result rec = mono_mult(m1r, m2);
      r.node = b.mul(a, rec.node);
      r.line = e_.chain({e_.r1(e_.a5(a, m1r, m2)), e_.r4(e_.a1(a), rec.line)});
    } else {
      const Result rec = mono_mult(m1, m2r);
      r.node = b.mul(c, rec.node);
      r.line = e_.chain({e_.a5(m1, c, m2r), e_.r4(e_.a4(m1, c), e_.a1(m2r)), e_.r1(e_.a5(c, m1, m2r)),
                         e_.r4(e_.a1(c), rec.line)});
    }
  }
  mm_.emplace(key(m1, m2), r);
  return r;
}

Normalizer::Result Normalizer::term_term(NodeId t, NodeId u) {
  auto it = tt_.find(key(t, u));
  if (it != tt_.end()) return it->second;
  Builder& b = e_.pool();
  const NodeId c1 = b.left(t), m1 = b.right(t), c2 = b.left(u), m2 = b.right(u);
  const LineId l1 = e_.r1(e_.a5(c1, m1, u));
  const LineId inner = e_.chain({e_.a5(m1, c2, m2), e_.r4(e_.a4(m1, c2), e_.a1(m2)), e_.r1(e_.a5(c2, m1, m2))});
  const LineId l2 = e_.r4(e_.a1(c1), inner);
  const LineId l3 = e_.a5(c1, c2, b.mul(m1, m2));
  const Result mm = mono_mult(m1, m2);
  const LineId prod = e_.a10_mul(c1, c2);
  const LineId l4 = e_.r4(e_.r1(prod), mm.line);
  const Result r{b.mul(e_.lhs(prod), mm.node), e_.chain({l1, l2, l3, l4})};
  tt_.emplace(key(t, u), r);
  return r;
}

Normalizer::Result Normalizer::term_poly(NodeId t, NodeId q) {
  auto it = tq_.find(key(t, q));
  if (it != tq_.end()) return it->second;
  Builder& b = e_.pool();
  Result r;
  if (q == e_.zero()) {
    r = {q, e_.a8(t)};
  } else {
    const NodeId u1 = b.left(q), q1 = b.right(q);
    const Result v = term_term(t, u1);
    const Result rest = term_poly(t, q1);
    r.node = b.add(v.node, rest.node);
    r.line = e_.chain({e_.a6(t, u1, q1), e_.r3(v.line, rest.line)});
  }
  tq_.emplace(key(t, q), r);
  return r;
}

Normalizer::Result Normalizer::mult(NodeId p, NodeId q) {
  auto it = mult_.find(key(p, q));
  if (it != mult_.end()) return it->second;
  Builder& b = e_.pool();
  const NodeId z = e_.zero();
  Result r;
  if (p == z) {
    r = {z, e_.chain({e_.a4(z, q), e_.a8(q)})};
  } else {
    const NodeId t1 = b.left(p), p1 = b.right(p);
    const Result x = term_poly(t1, q);
    const Result y = mult(p1, q);
    const LineId lx = e_.chain({e_.a4(q, t1), x.line});
    const LineId ly = e_.chain({e_.a4(q, p1), y.line});
    const Result m = merge(x.node, y.node);
    r.node = m.node;
    r.line = e_.chain({e_.a4(p, q), e_.a6(q, t1, p1), e_.r3(lx, ly), m.line});
  }
  mult_.emplace(key(p, q), r);
  return r;
}

// ---- ideal membership and congruence ----------------------------------------

namespace {

std::vector<NodeId> independent_atoms(const Graph& g, std::span<const NodeId> atoms) {
  std::unordered_set<NodeId> set(atoms.begin(), atoms.end());
  std::vector<NodeId> keep;
  for (NodeId a : atoms) {
    bool nested = false, has_leaf = false;
    for (NodeId v : reachable_nodes(g, a)) {
      if (v != a && set.count(v)) nested = true;
      if (g.op(v) == Op::Var || g.op(v) == Op::Inv) has_leaf = true;
    }
    if (!nested && has_leaf) keep.push_back(a);
  }
  return keep;
}

}  // namespace

LineId prove_equal_over(ProofEngine& e, NodeId a, NodeId b, std::span<const NodeId> atoms) {
  if (!atoms.empty()) {
    try {
      return Normalizer(e, atoms).prove_equal(a, b);
    } catch (const ProofError&) {
    }
    const auto fewer = independent_atoms(e.pool(), atoms);
    if (!fewer.empty() && fewer.size() < atoms.size()) {
      try {
        return Normalizer(e, fewer).prove_equal(a, b);
      } catch (const ProofError&) {
      }
    }
  }
  return Normalizer(e).prove_equal(a, b);
}

LineId prove_by_ideal(ProofEngine& e, NodeId lhs, NodeId rhs, std::span<const IdealTerm> hyps,
                      std::span<const NodeId> atoms) {
  if (hyps.empty()) return prove_equal_over(e, lhs, rhs, atoms);
  Builder& b = e.pool();
  const NodeId m1 = b.constant(-1);
  std::vector<NodeId> before, after;
  std::vector<LineId> steps;
  for (const IdealTerm& h : hyps) {
    const NodeId L = e.lhs(h.hyp), R = e.rhs(h.hyp);
    const NodeId negR = b.mul(m1, R);
    before.push_back(b.mul(h.multiplier, b.add(L, negR)));
    after.push_back(b.mul(h.multiplier, b.add(R, negR)));
    steps.push_back(e.r4(e.a1(h.multiplier), e.r3(h.hyp, e.a1(negR))));
  }
  const NodeId m = b.add(rhs, e.sum_nodes(before));
  const NodeId m2 = b.add(rhs, e.sum_nodes(after));
  const LineId cong = e.r3(e.a1(rhs), e.sum_cong(steps));
  if (e.rhs(cong) != m2) throw ProofError("ideal congruence mismatch");
  return e.chain({prove_equal_over(e, lhs, m, atoms), cong, prove_equal_over(e, m2, rhs, atoms)});
}

Normalizer::Result Rewriter::rewrite(NodeId v) {
  auto it = memo_.find(v);
  if (it != memo_.end()) return it->second;
  Normalizer::Result r;
  auto rp = repl_.find(v);
  Builder& b = e_.pool();
  if (rp != repl_.end()) {
    r = {e_.rhs(rp->second), rp->second};
  } else {
    switch (b.op(v)) {
      case Op::Add:
      case Op::Mul: {
        const auto x = rewrite(b.left(v));
        const auto y = rewrite(b.right(v));
        if (x.node == b.left(v) && y.node == b.right(v) && e_.is_reflexive(x.line) && e_.is_reflexive(y.line)) {
          r = {v, e_.a1(v)};
        } else if (b.op(v) == Op::Add) {
          r = {b.add(x.node, y.node), e_.r3(x.line, y.line)};
        } else {
          r = {b.mul(x.node, y.node), e_.r4(x.line, y.line)};
        }
        break;
      }
      case Op::Inv: {
        const auto x = rewrite(b.arg(v));
        if (!e_.is_reflexive(x.line)) throw ProofError("cannot rewrite below a division gate");
        r = {v, e_.a1(v)};
        break;
      }
      default: r = {v, e_.a1(v)};
    }
  }
  memo_.emplace(v, r);
  return r;
}

}  // namespace detpi
