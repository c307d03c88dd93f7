#include "detpi/proof_gen.hpp"

#include <algorithm>
#include <set>

#include "detpi/det_builder.hpp"
#include "detpi/evaluator.hpp"
#include "detpi/homogenizer.hpp"
#include "detpi/rational_passes.hpp"

namespace detpi {

namespace {

void require_checked(const Proof& p, const char* what) {
  const Verdict v = check(p);
  if (!v.ok)
    throw ProofError(std::string(what) + ": input fails check at line " + std::to_string(v.line) + ": " + v.reason);
}

std::vector<NodeId> non_const(const Graph& g, std::vector<NodeId> v) {
  std::erase_if(v, [&](NodeId x) { return g.op(x) == Op::Const; });
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

// ---- X * X^-1 = I -----------------------------------------------------------

Proof prove_xxinv(std::uint32_t n) {
  if (n == 0) throw ProofError("matrix dimension must be at least 1");
  ProofEngine e(ProofSystem::PIdiv, n * n);
  Builder& b = e.pool();
  const NodeMatrix x = layout_leaves(b, MatrixLayout::full(n));
  const auto levels = build_inverse_levels(b, x, n);
  const NodeId neg1 = b.constant(-1);
  auto delta = [&](std::uint32_t p, std::uint32_t r) { return b.constant(p == r ? 1 : 0); };
  // (X_k E_k)_pr and (E_k X_k)_pr over the leading k x k block.
  auto xe = [&](const NodeMatrix& inv, std::uint32_t k, std::uint32_t p, std::uint32_t r) {
    std::vector<NodeId> t;
    for (std::uint32_t j = 0; j < k; ++j) t.push_back(b.mul(x[p][j], inv[j][r]));
    return sum_tree(b, t);
  };
  auto ex = [&](const NodeMatrix& inv, std::uint32_t k, std::uint32_t p, std::uint32_t r) {
    std::vector<NodeId> t;
    for (std::uint32_t j = 0; j < k; ++j) t.push_back(b.mul(inv[p][j], x[j][r]));
    return sum_tree(b, t);
  };

  std::vector<std::vector<LineId>> H, K;  // previous level
  {
    const NodeId t1 = levels[0].t;
    const LineId d1 = e.d(x[0][0]);
    H = {{d1}};
    K = {{e.chain({e.a4(t1, x[0][0]), d1})}};
    if (e.lhs(H[0][0]) != xe(levels[0].inv, 1, 0, 0) || e.lhs(K[0][0]) != ex(levels[0].inv, 1, 0, 0))
      throw ProofError("level 1 statement mismatch");
  }
  for (std::uint32_t k = 2; k <= n; ++k) {
    const InverseLevel& lv = levels[k - 1];
    const NodeMatrix& prev = levels[k - 2].inv;
    const std::uint32_t m = k - 1;
    std::vector<NodeId> atoms;
    for (const auto& row : prev) atoms.insert(atoms.end(), row.begin(), row.end());
    const LineId dk = e.d(lv.delta);
    const NodeId t = lv.t;
    std::vector<std::vector<LineId>> H2(k, std::vector<LineId>(k)), K2(k, std::vector<LineId>(k));
    for (std::uint32_t p = 0; p < k; ++p) {
      for (std::uint32_t r = 0; r < k; ++r) {
        std::vector<IdealTerm> hx, hk;
        if (p < m && r < m) {
          for (std::uint32_t q = 0; q < m; ++q)
            hx.push_back({H[p][q], b.add(delta(q, r), b.mul(t, b.mul(x[q][m], lv.w[r])))});
          hk.push_back({K[p][r], b.constant(1)});
          for (std::uint32_t q = 0; q < m; ++q) hk.push_back({K[q][r], b.mul(t, b.mul(lv.u[p], x[m][q]))});
        } else if (p < m) {
          for (std::uint32_t q = 0; q < m; ++q) hx.push_back({H[p][q], b.mul(neg1, b.mul(t, x[q][m]))});
          hk.push_back({dk, b.mul(neg1, lv.u[p])});
        } else if (r < m) {
          hx.push_back({dk, b.mul(neg1, lv.w[r])});
          for (std::uint32_t q = 0; q < m; ++q) hk.push_back({K[q][r], b.mul(neg1, b.mul(t, x[m][q]))});
        } else {
          hx.push_back({dk, b.constant(1)});
          hk.push_back({dk, b.constant(1)});
        }
        H2[p][r] = prove_by_ideal(e, xe(lv.inv, k, p, r), delta(p, r), hx, atoms);
        K2[p][r] = prove_by_ideal(e, ex(lv.inv, k, p, r), delta(p, r), hk, atoms);
      }
    }
    H = std::move(H2);
    K = std::move(K2);
  }
  std::vector<LineId> targets;
  for (const auto& row : H) targets.insert(targets.end(), row.begin(), row.end());
  for (const auto& row : K) targets.insert(targets.end(), row.begin(), row.end());
  return e.materialize(targets);
}

// ---- triangular identity --------------------------------------------------------

Proof prove_triangular(std::uint32_t n) {
  if (n == 0) throw ProofError("matrix dimension must be at least 1");
  const MatrixLayout layout = MatrixLayout::lower_triangular(n);
  ProofEngine e(ProofSystem::PIdiv, layout.var_count());
  Builder& b = e.pool();
  const NodeMatrix x = layout_leaves(b, layout);
  const NodeId root = det_inv_node(b, x);
  // Factors of the left comb x_11 * delta_2 * ... * delta_n.
  std::vector<NodeId> factor(n);
  NodeId v = root;
  for (std::uint32_t k = n; k-- > 1;) {
    factor[k] = b.right(v);
    v = b.left(v);
  }
  factor[0] = v;
  Normalizer nz(e);
  LineId acc = e.a1(factor[0]);
  for (std::uint32_t k = 1; k < n; ++k) acc = e.r4(acc, nz.prove_equal(factor[k], x[k][k]));
  if (e.lhs(acc) != root) throw ProofError("triangular statement mismatch");
  const LineId targets[1] = {acc};
  return e.materialize(targets);
}

// ---- components -------------------------------------------------------------------

NodeId Components::get(NodeId v, std::uint32_t i) {
  const std::uint64_t key = (static_cast<std::uint64_t>(v) << 24) | i;
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  const Node& n = src_.node(v);
  NodeId r = kNoNode;
  switch (n.op) {
    case Op::Var:
      if (z_) {
        if (n.a == *z_) {
          r = dst_.constant(i == 1 ? 1 : 0);
        } else {
          r = i == 0 ? dst_.var(n.a) : dst_.constant(0);
        }
      } else {
        r = i == 1 ? dst_.var(n.a) : dst_.constant(0);
      }
      break;
    case Op::Const: r = i == 0 ? dst_.constant(Int(src_.value(v))) : dst_.constant(0); break;
    case Op::Add: r = dst_.add(get(n.a, i), get(n.b, i)); break;
    case Op::Mul: {
      std::vector<NodeId> terms;
      for (std::uint32_t j = 0; j <= i; ++j) terms.push_back(dst_.mul(get(n.a, j), get(n.b, i - j)));
      // Same split as ProofEngine::sum_nodes.
      auto sum = [&](auto&& self, std::size_t lo, std::size_t hi) -> NodeId {
        if (hi - lo == 1) return terms[lo];
        const std::size_t mid = lo + (hi - lo) / 2;
        return dst_.add(self(self, lo, mid), self(self, mid, hi));
      };
      r = sum(sum, 0, terms.size());
      break;
    }
    case Op::Inv:
      if (!z_) throw ProofError("components are defined for division-free circuits only");
      if (contains_var(src_, n.a, *z_)) throw ProofError("variable z occurs under a division gate");
      r = i == 0 ? dst_.inv(get(n.a, 0)) : dst_.constant(0);
      break;
  }
  memo_.emplace(key, r);
  return r;
}

Circuit component_circuit(const Circuit& f, std::uint32_t i) {
  Builder b(Builder::Sharing::HashCons);
  Builder src(Builder::Sharing::HashCons);
  const NodeId r = src.import(f, f.root());
  Components c(src, b);
  return b.extract({c.get(r, i)}, f.var_count());
}

namespace {

// comp(f * Inv_k(f), i) = [i == 0] using eta: comp(f, 0) = 1.
LineId inv_lemma_line(ProofEngine& out, Components& comp, NodeId lhs, NodeId f, std::uint32_t i, std::uint64_t k,
                      LineId eta) {
  if (i > k) throw ProofError("component degree exceeds the truncation order k");
  Builder& b = out.pool();
  const NodeId a0 = comp.get(f, 0);
  if (out.lhs(eta) != a0 || out.rhs(eta) != out.one()) throw ProofError("eta does not prove f^(0) = 1");
  std::unordered_map<NodeId, LineId> repl;
  if (a0 != out.one()) repl.emplace(a0, eta);
  Rewriter rw(out, std::move(repl));
  const auto x = rw.rewrite(comp.get(lhs, i));
  std::vector<NodeId> atoms;
  for (std::uint32_t j = 1; j <= i; ++j) atoms.push_back(rw.rewrite(comp.get(f, j)).node);
  return out.chain({x.line, prove_equal_over(out, x.node, b.constant(i == 0 ? 1 : 0), non_const(b, atoms))});
}

LineId eta_by_normalizer(ProofEngine& out, NodeId a0) {
  Normalizer nz(out);
  try {
    return nz.prove_equal(a0, out.one());
  } catch (const ProofError&) {
    throw ProofError("constant term of a division gate is not 1");
  }
}

// Per-line component transport shared by homogenize_proof and coef_transport.
class Transport {
 public:
  Transport(const ProofEngine& in, ProofEngine& out, std::optional<std::uint32_t> z)
      : in_(in), out_(out), comp_(in.pool(), out.pool(), z), z_(z) {}

  LineId line(LineId l, std::uint32_t i) {
    const std::uint64_t key = (static_cast<std::uint64_t>(l) << 24) | i;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const LineId r = build(l, i);
    memo_.emplace(key, r);
    return r;
  }

  Components& comp() { return comp_; }

 private:
  LineId build(LineId l, std::uint32_t i) {
    const auto& L = in_.line(l);
    const NodeId lhs = comp_.get(L.lhs, i), rhs = comp_.get(L.rhs, i);
    switch (L.law) {
      case Law::R1: return out_.r1(line(L.prem[0], i));
      case Law::R2: return out_.r2(line(L.prem[0], i), line(L.prem[1], i));
      case Law::R3: return out_.r3(line(L.prem[0], i), line(L.prem[1], i));
      case Law::R4: {
        std::vector<LineId> parts;
        for (std::uint32_t j = 0; j <= i; ++j) parts.push_back(out_.r4(line(L.prem[0], j), line(L.prem[1], i - j)));
        const LineId s = out_.sum_cong(parts);
        if (out_.lhs(s) != lhs || out_.rhs(s) != rhs) throw ProofError("product rule transport mismatch");
        return s;
      }
      default: break;
    }
    if (lhs == rhs) return out_.a1(lhs);
    if (L.law == Law::D) return d_line(L, i);
    std::vector<NodeId> atoms;
    for (NodeId s : L.slot) {
      if (s == kNoNode || L.law == Law::A10) continue;
      for (std::uint32_t j = 0; j <= i; ++j) atoms.push_back(comp_.get(s, j));
    }
    return prove_equal_over(out_, lhs, rhs, non_const(out_.pool(), atoms));
  }

  LineId d_line(const ProofEngine::Line& L, std::uint32_t i) {
    const NodeId f = L.slot[0];
    const NodeId lhs = comp_.get(L.lhs, i), rhs = comp_.get(L.rhs, i);
    if (z_) {
      // F * Inv(F) = 1 with F free of z: degree 0 is the same axiom, higher
      // components vanish.
      if (contains_var(in_.pool(), f, *z_)) throw ProofError("variable z occurs under a division gate");
      if (i == 0) {
        const LineId d = out_.d(comp_.get(f, 0));
        if (out_.lhs(d) != lhs) throw ProofError("division axiom transport mismatch");
        return d;
      }
      Normalizer nz(out_);
      return nz.prove_equal(lhs, rhs);
    }
    const NodeId a0 = comp_.get(f, 0);
    auto it = eta_.find(a0);
    if (it == eta_.end()) it = eta_.emplace(a0, eta_by_normalizer(out_, a0)).first;
    return inv_lemma_line(out_, comp_, L.lhs, f, i, in_.k(), it->second);
  }

  const ProofEngine& in_;
  ProofEngine& out_;
  Components comp_;
  std::optional<std::uint32_t> z_;
  std::unordered_map<std::uint64_t, LineId> memo_;
  std::unordered_map<NodeId, LineId> eta_;
};

}  // namespace

std::vector<Proof> prove_inv_lemma(const Circuit& f, std::uint64_t k, const Proof* eta) {
  if (!division_free(f)) throw ProofError("f must be division free");
  ProofEngine out(ProofSystem::PC, f.var_count());
  Builder src(Builder::Sharing::HashCons);
  const NodeId fr = src.import(f, f.root());
  const NodeId lhs = src.mul(fr, inv_k_node(src, fr, k));
  Components comp(src, out.pool());
  LineId eta_line;
  if (eta) {
    if (eta->system != ProofSystem::PC) throw ProofError("eta must be a PC proof");
    require_checked(*eta, "eta");
    if (eta->lines.empty()) throw ProofError("eta is empty");
    eta_line = import_proof(out, *eta).back();
  } else {
    eta_line = eta_by_normalizer(out, comp.get(fr, 0));
  }
  std::vector<Proof> res;
  for (std::uint32_t i = 0; i <= k; ++i) {
    const LineId l = inv_lemma_line(out, comp, lhs, fr, i, k, eta_line);
    const LineId t[1] = {l};
    res.push_back(out.materialize(t));
  }
  return res;
}

Proof coef_transport(const Proof& p, std::uint32_t k, std::uint32_t z) {
  require_checked(p, "coef_transport");
  if (p.lines.empty()) throw ProofError("empty proof");
  if (p.system == ProofSystem::PCk) throw ProofError("coef_transport expects a PC or PIdiv proof");
  ProofEngine in(p.system, p.var_count, p.k);
  const auto map = import_proof(in, p);
  ProofEngine out(p.system, p.var_count);
  Transport tr(in, out, z);
  const LineId t[1] = {tr.line(map.back(), k)};
  return out.materialize(t);
}

Proof prove_coef_of_sum(const std::vector<Circuit>& f, std::uint32_t z, std::uint32_t j) {
  if (j >= f.size()) throw ProofError("coefficient index out of range");
  std::uint32_t vars = z + 1;
  bool div = false;
  for (const Circuit& c : f) {
    if (contains_var(c, c.root(), z)) throw ProofError("summands must not contain z");
    vars = std::max(vars, c.var_count());
    div = div || !division_free(c);
  }
  ProofEngine out(div ? ProofSystem::PIdiv : ProofSystem::PC, vars);
  Builder src(Builder::Sharing::HashCons);
  std::vector<NodeId> terms, roots;
  const NodeId zv = src.var(z);
  for (std::uint32_t i = 0; i < f.size(); ++i) {
    roots.push_back(src.import(f[i], f[i].root()));
    terms.push_back(src.mul(roots.back(), power_node(src, zv, i)));
  }
  const NodeId s = sum_tree(src, terms);
  Components comp(src, out.pool(), z);
  std::vector<NodeId> atoms;
  for (NodeId r : roots) atoms.push_back(comp.get(r, 0));
  const LineId t[1] = {prove_equal_over(out, comp.get(s, j), comp.get(roots[j], 0), non_const(out.pool(), atoms))};
  return out.materialize(t);
}

// ---- Num/Den normalization ----------------------------------------------------

namespace {

class NumDen {
 public:
  NumDen(const Graph& src, Builder& dst) : src_(src), dst_(dst) {}
  std::pair<NodeId, NodeId> get(NodeId v) {
    auto it = memo_.find(v);
    if (it != memo_.end()) return it->second;
    const Node& n = src_.node(v);
    std::pair<NodeId, NodeId> r;
    const NodeId one = dst_.constant(1);
    switch (n.op) {
      case Op::Var: r = {dst_.var(n.a), one}; break;
      case Op::Const: r = {dst_.constant(Int(src_.value(v))), one}; break;
      case Op::Add: {
        const auto [n1, d1] = get(n.a);
        const auto [n2, d2] = get(n.b);
        r = {dst_.add(dst_.mul(n1, d2), dst_.mul(n2, d1)), dst_.mul(d1, d2)};
        break;
      }
      case Op::Mul: {
        const auto [n1, d1] = get(n.a);
        const auto [n2, d2] = get(n.b);
        r = {dst_.mul(n1, n2), dst_.mul(d1, d2)};
        break;
      }
      case Op::Inv: {
        const auto [n1, d1] = get(n.a);
        r = {d1, n1};
        break;
      }
    }
    memo_.emplace(v, r);
    return r;
  }
  NodeId top(NodeId v) {
    const auto [n, d] = get(v);
    return dst_.mul(n, dst_.inv(d));
  }

 private:
  const Graph& src_;
  Builder& dst_;
  std::unordered_map<NodeId, std::pair<NodeId, NodeId>> memo_;
};

class Normalization {
 public:
  Normalization(const ProofEngine& in, ProofEngine& out) : in_(in), out_(out), nd_(in.pool(), out.pool()) {}

  LineId line(LineId l) {
    auto it = memo_.find(l);
    if (it != memo_.end()) return it->second;
    const LineId r = build(l);
    memo_.emplace(l, r);
    return r;
  }

 private:
  // a * Inv(b) = c * Inv(d) from a*d = c*b.
  LineId cross(NodeId a, NodeId b, NodeId c, NodeId d, LineId adcb) {
    Builder& g = out_.pool();
    const NodeId ib = g.inv(b), id = g.inv(d), neg1 = g.constant(-1);
    const IdealTerm hyps[3] = {{adcb, g.mul(ib, id)},
                               {out_.d(d), g.mul(neg1, g.mul(a, ib))},
                               {out_.d(b), g.mul(c, id)}};
    const NodeId atoms[4] = {a, b, c, d};
    return prove_by_ideal(out_, g.mul(a, ib), g.mul(c, id), hyps, non_const(g, {atoms, atoms + 4}));
  }

  // Num(F1 op F2) * Inv(Den(F1 op F2)) = T(F1) op T(F2).
  LineId split(NodeId v) {
    Builder& g = out_.pool();
    const Builder& s = in_.pool();
    const bool add = s.op(v) == Op::Add;
    const auto [n1, d1] = nd_.get(s.left(v));
    const auto [n2, d2] = nd_.get(s.right(v));
    const NodeId i1 = g.inv(d1), i2 = g.inv(d2), i12 = g.inv(g.mul(d1, d2)), neg1 = g.constant(-1);
    const NodeId t1 = nd_.top(s.left(v)), t2 = nd_.top(s.right(v));
    const NodeId lhs = nd_.top(v);
    const NodeId rhs = add ? g.add(t1, t2) : g.mul(t1, t2);
    std::vector<IdealTerm> hyps;
    if (add) {
      hyps = {{out_.d(g.mul(d1, d2)), g.add(g.mul(n1, i1), g.mul(n2, i2))},
              {out_.d(d1), g.mul(neg1, g.mul(n1, g.mul(d2, i12)))},
              {out_.d(d2), g.mul(neg1, g.mul(n2, g.mul(d1, i12)))}};
    } else {
      const NodeId nn = g.mul(n1, n2);
      hyps = {{out_.d(g.mul(d1, d2)), g.mul(nn, g.mul(i1, i2))},
              {out_.d(d1), g.mul(neg1, g.mul(nn, g.mul(i12, g.mul(d2, i2))))},
              {out_.d(d2), g.mul(neg1, g.mul(nn, i12))}};
    }
    return prove_by_ideal(out_, lhs, rhs, hyps, non_const(g, {n1, d1, n2, d2}));
  }

  LineId build(LineId l) {
    const auto& L = in_.line(l);
    switch (L.law) {
      case Law::R1: return out_.r1(line(L.prem[0]));
      case Law::R2: return out_.r2(line(L.prem[0]), line(L.prem[1]));
      case Law::R3:
      case Law::R4: {
        const LineId p = line(L.prem[0]), q = line(L.prem[1]);
        const LineId mid = L.law == Law::R3 ? out_.r3(p, q) : out_.r4(p, q);
        return out_.chain({split(L.lhs), mid, out_.sym(split(L.rhs))});
      }
      default: break;
    }
    const NodeId tl = nd_.top(L.lhs), tr = nd_.top(L.rhs);
    if (tl == tr) return out_.a1(tl);
    Builder& g = out_.pool();
    const auto [a, b] = nd_.get(L.lhs);
    const auto [c, d] = nd_.get(L.rhs);
    std::vector<NodeId> atoms;
    for (NodeId s : L.slot) {
      if (s == kNoNode || L.law == Law::A10) continue;
      const auto [ns, ds] = nd_.get(s);
      atoms.push_back(ns);
      atoms.push_back(ds);
    }
    const LineId adcb = prove_equal_over(out_, g.mul(a, d), g.mul(c, b), non_const(g, atoms));
    return cross(a, b, c, d, adcb);
  }

  const ProofEngine& in_;
  ProofEngine& out_;
  NumDen nd_;
  std::unordered_map<LineId, LineId> memo_;
};

}  // namespace

Proof normalize_proof(const Proof& p) {
  require_checked(p, "normalize_proof");
  if (p.system == ProofSystem::PCk) throw ProofError("normalize_proof expects a PC or PIdiv proof");
  ProofEngine in(ProofSystem::PIdiv, p.var_count);
  const auto map = import_proof(in, p);
  ProofEngine out(ProofSystem::PIdiv, p.var_count);
  Normalization nm(in, out);
  std::vector<LineId> targets;
  for (LineId l : map) targets.push_back(nm.line(l));
  return out.materialize(targets);
}

// ---- division elimination ----------------------------------------------------

EliminationResult eliminate_division_proof(const Proof& p, const std::vector<Int>& rho, std::uint64_t k) {
  require_checked(p, "eliminate_division_proof");
  if (p.system == ProofSystem::PCk) throw ProofError("input is already division free");
  if (rho.size() < p.var_count) throw ProofError("rho must assign every variable");
  ProofEngine in(ProofSystem::PIdiv, p.var_count);
  const auto map = import_proof(in, p);
  const Builder& src = in.pool();
  ProofEngine out(ProofSystem::PCk, p.var_count, k);
  Builder& dst = out.pool();
  EliminationResult res;

  // Division gates must be provably good at rho.
  std::vector<NodeId> gates;
  for (NodeId v = 0; v < src.size(); ++v) {
    if (src.op(v) != Op::Inv) continue;
    if (!division_free(src, src.arg(v)))
      throw ProofError("division gate " + std::to_string(v) + " has a division below it; normalize first");
    gates.push_back(v);
  }
  for (NodeId g : gates) {
    const Int val = eval_int_node(src, src.arg(g), rho);
    if (val != 1)
      throw ProofError("division gate " + std::to_string(g) + " is not good at rho: its argument evaluates to " +
                       to_string(val));
    ProofEngine pe(ProofSystem::PC, p.var_count);
    std::vector<NodeId> memo(src.size(), kNoNode);
    // u|rho: variables replaced by constants.
    std::vector<NodeId> order = reachable_nodes(src, src.arg(g));
    for (NodeId v : order) {
      const Node& n = src.node(v);
      switch (n.op) {
        case Op::Var: memo[v] = pe.pool().constant(rho[n.a]); break;
        case Op::Const: memo[v] = pe.pool().constant(Int(src.value(v))); break;
        case Op::Add: memo[v] = pe.pool().add(memo[n.a], memo[n.b]); break;
        case Op::Mul: memo[v] = pe.pool().mul(memo[n.a], memo[n.b]); break;
        case Op::Inv: break;
      }
    }
    Normalizer nz(pe);
    const LineId t[1] = {nz.prove_equal(memo[src.arg(g)], pe.one())};
    res.good.push_back(pe.materialize(t));
  }

  // sigma: x_i -> rho_i + (-1) w_i, Inv(u) -> Inv_k(sigma u).
  std::vector<NodeId> sigma(src.size(), kNoNode);
  const NodeId neg1 = dst.constant(-1);
  for (NodeId v = 0; v < src.size(); ++v) {
    const Node& n = src.node(v);
    switch (n.op) {
      case Op::Var: sigma[v] = dst.add(dst.constant(rho[n.a]), dst.mul(neg1, dst.var(n.a))); break;
      case Op::Const: sigma[v] = dst.constant(Int(src.value(v))); break;
      case Op::Add: sigma[v] = dst.add(sigma[n.a], sigma[n.b]); break;
      case Op::Mul: sigma[v] = dst.mul(sigma[n.a], sigma[n.b]); break;
      case Op::Inv: sigma[v] = inv_k_node(dst, sigma[n.a], k); break;
    }
  }
  std::vector<LineId> lm(in.size(), kNoLine);
  for (LineId l = 0; l < in.size(); ++l) {
    const auto& L = in.line(l);
    const auto s = [&](int i) { return sigma[L.slot[i]]; };
    LineId r = kNoLine;
    switch (L.law) {
      case Law::A1: r = out.a1(s(0)); break;
      case Law::A2: r = out.a2(s(0), s(1)); break;
      case Law::A3: r = out.a3(s(0), s(1), s(2)); break;
      case Law::A4: r = out.a4(s(0), s(1)); break;
      case Law::A5: r = out.a5(s(0), s(1), s(2)); break;
      case Law::A6: r = out.a6(s(0), s(1), s(2)); break;
      case Law::A7: r = out.a7(s(0)); break;
      case Law::A8: r = out.a8(s(0)); break;
      case Law::A9: r = out.a9(s(0)); break;
      case Law::A10: {
        const NodeId x = sigma[src.left(L.rhs)], y = sigma[src.right(L.rhs)];
        r = src.op(L.rhs) == Op::Add ? out.a10_add(x, y) : out.a10_mul(x, y);
        break;
      }
      case Law::D: r = out.d(s(0)); break;
      case Law::R1: r = out.r1(lm[L.prem[0]]); break;
      case Law::R2: r = out.r2(lm[L.prem[0]], lm[L.prem[1]]); break;
      case Law::R3: r = out.r3(lm[L.prem[0]], lm[L.prem[1]]); break;
      case Law::R4: r = out.r4(lm[L.prem[0]], lm[L.prem[1]]); break;
      default: throw ProofError("unexpected justification in pool proof");
    }
    if (out.lhs(r) != sigma[L.lhs] || out.rhs(r) != sigma[L.rhs]) throw ProofError("substitution mismatch");
    lm[l] = r;
  }
  std::vector<LineId> targets;
  for (LineId l : map) targets.push_back(lm[l]);
  res.proof = out.materialize(targets);
  return res;
}

// ---- homogenization ----------------------------------------------------------------

std::vector<Proof> homogenize_proof(const Proof& p, std::uint32_t d) {
  require_checked(p, "homogenize_proof");
  if (p.system == ProofSystem::PIdiv) throw ProofError("homogenize_proof expects a PC or PCk proof");
  if (p.lines.empty()) throw ProofError("empty proof");
  ProofEngine in(p.system, p.var_count, p.k);
  const auto map = import_proof(in, p);
  ProofEngine out(ProofSystem::PC, p.var_count);
  Transport tr(in, out, std::nullopt);
  std::vector<LineId> finals;
  for (std::uint32_t i = 0; i <= d; ++i) finals.push_back(tr.line(map.back(), i));
  std::vector<Proof> res;
  for (LineId f : finals) {
    const LineId t[1] = {f};
    res.push_back(out.materialize(t));
  }
  return res;
}

// ---- balancing -----------------------------------------------------------------

namespace {

Circuit balanced_side(const Circuit& f, std::size_t& bound) {
  const DegreeAnnotation w = syntactic_degrees(f, true);
  const auto d = static_cast<std::uint32_t>(w[f.outputs()[0]]);
  HomogenizeOptions opt;
  opt.witness = &w;
  opt.constants_as_degree_one = true;
  opt.prune_zeros = true;
  const AnnotatedCircuit summed = sum_components(homogenize(f, d, opt));
  bound = balance_depth_bound(summed.circuit.size(), d);
  return balance(summed.circuit, summed.annotation);
}

}  // namespace

Proof balance_proof(const Proof& p, BalanceProofReport* report) {
  require_checked(p, "balance_proof");
  if (p.system != ProofSystem::PC) throw ProofError("balance_proof expects a PC proof");
  if (p.lines.empty()) throw ProofError("empty proof");
  const Circuit f = output_circuit(p.lines.back().eq, 0), g = output_circuit(p.lines.back().eq, 1);
  if (!division_free(f) || !division_free(g)) throw ProofError("balance_proof: endpoint has a division gate");
  BalanceProofReport rep;
  const Circuit bf = balanced_side(f, rep.bound_lhs), bg = balanced_side(g, rep.bound_rhs);
  rep.depth_lhs = depth(bf);
  rep.depth_rhs = depth(bg);

  ProofEngine e(ProofSystem::PC, p.var_count);
  const auto map = import_proof(e, p);
  const LineId fg = map.back();
  const NodeId nbf = e.pool().import(bf, bf.outputs()[0]), nbg = e.pool().import(bg, bg.outputs()[0]);
  const LineId t[1] = {e.chain({prove_equal_over(e, nbf, e.lhs(fg), {}), fg, prove_equal_over(e, e.rhs(fg), nbg, {})})};
  Proof out = e.materialize(t);
  for (const ProofLine& l : out.lines) rep.max_line_depth = std::max(rep.max_line_depth, depth(l.eq));
  if (report) *report = rep;
  return out;
}

PipelineResult pipeline_identity2(std::uint32_t n) {
  PipelineResult r;
  r.triangular = prove_triangular(n);
  r.normalized = normalize_proof(r.triangular);
  std::vector<Int> rho(n * n, Int(0));
  for (std::uint32_t i = 0; i < n; ++i) rho[i * n + i] = 1;
  r.eliminated = eliminate_division_proof(r.normalized, rho, 2 * n);
  r.components = homogenize_proof(r.eliminated.proof, n);
  return r;
}

}  // namespace detpi
