#include "detpi/rational_passes.hpp"

#include <sstream>

#include "detpi/det_builder.hpp"
#include "detpi/evaluator.hpp"

namespace detpi {

std::vector<NumDenPair> num_den_nodes(Builder& b, const Graph& g, NodeId root) {
  const NodeId roots[1] = {root};
  const std::vector<char> mask = reachable_mask(g, roots);
  std::vector<NumDenPair> nd(g.size());
  std::vector<NodeId> memo(g.size(), kNoNode);
  for (NodeId v = 0; v <= root; ++v) {
    if (!mask[v]) continue;
    const Node n = g.node(v);
    switch (n.op) {
      case Op::Var:
      case Op::Const:
        nd[v].num = b.import(g, v, memo);
        nd[v].den = b.constant(1);
        break;
      case Op::Inv:
        nd[v].num = nd[n.a].den;
        nd[v].den = nd[n.a].num;
        break;
      case Op::Mul:
        nd[v].num = b.mul(nd[n.a].num, nd[n.b].num);
        nd[v].den = b.mul(nd[n.a].den, nd[n.b].den);
        break;
      case Op::Add:
        nd[v].num = b.add(b.mul(nd[n.a].num, nd[n.b].den), b.mul(nd[n.b].num, nd[n.a].den));
        nd[v].den = b.mul(nd[n.a].den, nd[n.b].den);
        break;
    }
  }
  return nd;
}

Circuit num_den_joint(const Circuit& f) {
  Builder b;
  const auto nd = num_den_nodes(b, f, f.root());
  return b.extract({nd[f.root()].num, nd[f.root()].den}, f.var_count());
}

NumDenResult num_den(const Circuit& f) {
  Builder b;
  const auto nd = num_den_nodes(b, f, f.root());
  return {b.extract({nd[f.root()].num}, f.var_count()), b.extract({nd[f.root()].den}, f.var_count())};
}

Circuit normalize_division(const Circuit& f) {
  Builder b;
  const auto nd = num_den_nodes(b, f, f.root());
  const NodeId r = b.mul(nd[f.root()].num, b.inv(nd[f.root()].den));
  return b.extract({r}, f.var_count());
}

NodeId inv_k_node(Builder& b, NodeId f, std::uint64_t k) {
  const NodeId g = b.sub(b.constant(1), f);
  std::vector<NodeId> terms{b.constant(1)};
  for (std::uint64_t i = 1; i <= k; ++i) terms.push_back(power_node(b, g, i));
  return sum_tree(b, terms);
}

Circuit inv_k(const Circuit& f, std::uint64_t k) {
  Builder b;
  const NodeId r = b.import(f, f.root());
  return b.extract({inv_k_node(b, r, k)}, f.var_count());
}

bool z_under_division(const Graph& g, NodeId root, std::uint32_t z) {
  for (NodeId v : reachable_nodes(g, root))
    if (g.op(v) == Op::Inv && contains_var(g, g.arg(v), z)) return true;
  return false;
}

std::vector<NodeId> coef_table(Builder& b, const Graph& g, NodeId root, std::uint32_t k, std::uint32_t z,
                               std::vector<NodeId>& import_memo) {
  const std::vector<NodeId> order = reachable_nodes(g, root);
  std::vector<char> has_z(g.size(), 0);
  for (NodeId v : order) {
    const Node& n = g.node(v);
    switch (n.op) {
      case Op::Var: has_z[v] = n.a == z; break;
      case Op::Const: break;
      case Op::Inv:
        if (has_z[n.a]) throw CircuitError("variable z occurs under division gate " + std::to_string(v));
        break;
      case Op::Add:
      case Op::Mul: has_z[v] = has_z[n.a] || has_z[n.b]; break;
    }
  }
  if (import_memo.size() < g.size()) import_memo.resize(g.size(), kNoNode);
  const NodeId zero = b.constant(0);
  std::vector<std::vector<NodeId>> c(g.size());
  for (NodeId v : order) {
    std::vector<NodeId>& cv = c[v];
    cv.assign(k + 1, zero);
    const Node n = g.node(v);
    if (!has_z[v]) {
      cv[0] = b.import(g, v, import_memo);
      continue;
    }
    if (n.op == Op::Var) {
      if (k >= 1) cv[1] = b.constant(1);
      continue;
    }
    for (std::uint32_t i = 0; i <= k; ++i) {
      if (n.op == Op::Add) {
        cv[i] = b.add(c[n.a][i], c[n.b][i]);
      } else {
        std::vector<NodeId> terms;
        for (std::uint32_t j = 0; j <= i; ++j) terms.push_back(b.mul(c[n.a][j], c[n.b][i - j]));
        cv[i] = sum_tree(b, terms);
      }
    }
  }
  return c[root];
}

namespace {

// Builds the Case 2 form into b and returns its root.
NodeId coef_with_division(Builder& b, const Circuit& f, std::uint32_t k, std::uint32_t z) {
  Builder body;
  const auto nd = num_den_nodes(body, f, f.root());
  const NodeId num = nd[f.root()].num, den = nd[f.root()].den;
  // F0 = Den with z replaced by 0.
  std::vector<NodeId> memo(body.size(), kNoNode);
  const NodeId zero = body.constant(0);
  for (NodeId v = 0; v < body.size(); ++v)
    if (body.op(v) == Op::Var && body.var_index(v) == z) memo[v] = zero;
  const NodeId f0 = body.import(body, den, memo);
  const NodeId f0_inv = body.inv(f0);
  const NodeId root = body.mul(num, inv_k_node(body, body.mul(f0_inv, den), k));
  std::vector<NodeId> imp;
  const auto table = coef_table(b, body, root, k, z, imp);
  const NodeId outer = b.import(body, f0_inv, imp);
  return b.mul(outer, table[k]);
}

}  // namespace

Circuit coef(const Circuit& f, std::uint32_t k, std::uint32_t z) {
  Builder b;
  NodeId r;
  if (z_under_division(f, f.root(), z)) {
    r = coef_with_division(b, f, k, z);
  } else {
    std::vector<NodeId> memo;
    r = coef_table(b, f, f.root(), k, z, memo)[k];
  }
  return b.extract({r}, f.var_count());
}

Circuit build_taydet(std::uint32_t n) {
  const Circuit f = build_det_inv(MatrixLayout::identity_shift(n));
  Builder b;
  const NodeId r = coef_with_division(b, f, n, n * n);
  return b.extract({r}, n * n);
}

Circuit build_taydet_sharp(std::uint32_t n) {
  const Circuit f = build_det_inv(MatrixLayout::identity_shift(n));
  Builder body;
  const auto nd = num_den_nodes(body, f, f.root());
  const NodeId h = body.mul(body.constant(1), nd[f.root()].den);
  const NodeId root = body.mul(nd[f.root()].num, inv_k_node(body, h, n));
  Builder b;
  std::vector<NodeId> imp;
  const auto table = coef_table(b, body, root, n, n * n, imp);
  return b.extract({b.mul(b.constant(1), table[n])}, n * n);
}

const char* zero_rule_name(ZeroRule r) {
  switch (r) {
    case ZeroRule::MulZeroLeft: return "0*u";
    case ZeroRule::MulZeroRight: return "u*0";
    case ZeroRule::AddZeroLeft: return "0+u";
    case ZeroRule::AddZeroRight: return "u+0";
    case ZeroRule::MulOneLeft: return "1*u";
    case ZeroRule::MulOneRight: return "u*1";
  }
  return "?";
}

SimplifyResult simplify_zeros(const Circuit& f) {
  SimplifyResult res;
  const std::vector<char> mask = reachable_mask(f, f.outputs());
  std::vector<NodeId> rep(f.size(), kNoNode);  // id in b
  Builder b;
  auto is_c = [&](NodeId id, long v) { return b.is_const(id, v); };
  auto fire = [&](NodeId v, ZeroRule r) { res.trace.push_back({res.trace.size(), v, r}); };
  for (NodeId v = 0; v < f.size(); ++v) {
    if (!mask[v]) continue;
    const Node& n = f.node(v);
    switch (n.op) {
      case Op::Var: rep[v] = b.var(n.a); break;
      case Op::Const: rep[v] = b.constant(f.value(v)); break;
      case Op::Inv: rep[v] = b.inv(rep[n.a]); break;
      case Op::Add: {
        const NodeId l = rep[n.a], r = rep[n.b];
        if (is_c(l, 0)) {
          fire(v, ZeroRule::AddZeroLeft);
          rep[v] = r;
        } else if (is_c(r, 0)) {
          fire(v, ZeroRule::AddZeroRight);
          rep[v] = l;
        } else {
          rep[v] = b.add(l, r);
        }
        break;
      }
      case Op::Mul: {
        const NodeId l = rep[n.a], r = rep[n.b];
        if (is_c(l, 0)) {
          fire(v, ZeroRule::MulZeroLeft);
          rep[v] = l;
        } else if (is_c(r, 0)) {
          fire(v, ZeroRule::MulZeroRight);
          rep[v] = r;
        } else if (is_c(l, 1)) {
          fire(v, ZeroRule::MulOneLeft);
          rep[v] = r;
        } else if (is_c(r, 1)) {
          fire(v, ZeroRule::MulOneRight);
          rep[v] = l;
        } else {
          rep[v] = b.mul(l, r);
        }
        break;
      }
    }
  }
  std::vector<NodeId> outs;
  for (NodeId o : f.outputs()) outs.push_back(rep[o]);
  std::vector<NodeId> old_to_new;
  res.circuit = b.extract(outs, f.var_count(), &old_to_new);
  res.node_map.assign(f.size(), kNoNode);
  for (NodeId v = 0; v < f.size(); ++v)
    if (rep[v] != kNoNode && old_to_new[rep[v]] != kNoNode) res.node_map[v] = old_to_new[rep[v]];
  return res;
}

std::string encode_trace(const RewriteTrace& t) {
  std::ostringstream os;
  os << "trace " << t.size() << '\n';
  for (const auto& s : t) os << s.step << ' ' << s.node << ' ' << zero_rule_name(s.rule) << '\n';
  return os.str();
}

Circuit eliminate_division(const Circuit& f, const std::vector<Int>& rho, std::uint64_t k, bool back_substitute) {
  const NodeId root = f.root();
  const std::size_t invs = inv_count(f);
  if (invs == 0) return f;
  if (invs > 1) throw CircuitError("eliminate_division needs at most one division gate");
  if (f.op(root) != Op::Mul) throw CircuitError("division gate is not at the top");
  NodeId inv_node = kNoNode;
  if (f.op(f.left(root)) == Op::Inv) inv_node = f.left(root);
  if (f.op(f.right(root)) == Op::Inv) inv_node = f.right(root);
  if (inv_node == kNoNode) throw CircuitError("division gate is not a child of the root");
  if (rho.size() < f.var_count()) throw CircuitError("assignment does not cover every variable");
  {
    std::vector<Rat> at(rho.begin(), rho.end());
    if (eval_rat_node(f, f.arg(inv_node), at) != 1)
      throw CircuitError("division gate " + std::to_string(inv_node) + " does not evaluate to 1 at rho");
  }
  Builder b;
  std::vector<NodeId> memo(f.size(), kNoNode);
  // Shift: x_i -> rho_i + (-1) * w_i, with w_i reusing index i.
  for (NodeId v = 0; v < f.size(); ++v) {
    if (f.op(v) != Op::Var) continue;
    const std::uint32_t i = f.var_index(v);
    memo[v] = b.add(b.constant(rho[i]), b.neg(b.var(i)));
  }
  const NodeId den = b.import(f, f.arg(inv_node), memo);
  memo[inv_node] = inv_k_node(b, den, k);
  const NodeId r = b.import(f, root, memo);
  Circuit shifted = b.extract({r}, f.var_count());
  if (!back_substitute) return shifted;
  // w_i = rho_i - x_i.
  std::map<std::uint32_t, Circuit> sub;
  for (std::uint32_t i = 0; i < f.var_count(); ++i) {
    Builder s;
    sub.emplace(i, s.finish({s.add(s.constant(rho[i]), s.neg(s.var(i)))}, f.var_count()));
  }
  return substitute(shifted, sub).circuit;
}

}  // namespace detpi
