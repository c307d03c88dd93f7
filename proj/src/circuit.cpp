#include "detpi/circuit.hpp"

#include <algorithm>
#include <unordered_set>

namespace detpi {

const char* op_name(Op op) {
  switch (op) {
    case Op::Var: return "var";
    case Op::Const: return "const";
    case Op::Add: return "add";
    case Op::Mul: return "mul";
    case Op::Inv: return "inv";
  }
  return "?";
}

NodeId Circuit::root() const {
  if (outputs_.size() != 1) throw CircuitError("expected a single-output circuit");
  return outputs_[0];
}

bool Circuit::operator==(const Circuit& o) const {
  if (nodes_.size() != o.nodes_.size() || outputs_ != o.outputs_ || var_count_ != o.var_count_)
    return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& x = nodes_[i];
    const Node& y = o.nodes_[i];
    if (x.op != y.op) return false;
    switch (x.op) {
      case Op::Var:
        if (x.a != y.a) return false;
        break;
      case Op::Const:
        if (consts_[x.a] != o.consts_[y.a]) return false;
        break;
      case Op::Inv:
        if (x.a != y.a) return false;
        break;
      default:
        if (x.a != y.a || x.b != y.b) return false;
    }
  }
  return true;
}

void Circuit::validate() const {
  if (outputs_.empty()) throw CircuitError("circuit has no outputs");
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Var:
        if (n.a >= var_count_) throw CircuitError("node " + std::to_string(i) + ": var index out of range");
        break;
      case Op::Const:
        if (n.a >= consts_.size()) throw CircuitError("node " + std::to_string(i) + ": bad constant slot");
        break;
      case Op::Add:
      case Op::Mul:
        if (n.a >= i || n.b >= i)
          throw CircuitError("node " + std::to_string(i) + ": child id not smaller than node id");
        break;
      case Op::Inv:
        if (n.a >= i) throw CircuitError("node " + std::to_string(i) + ": child id not smaller than node id");
        break;
    }
  }
  for (NodeId o : outputs_)
    if (o >= nodes_.size()) throw CircuitError("output id out of range");
}

Circuit Circuit::from_parts(std::vector<Node> nodes, std::vector<Int> consts,
                            std::vector<NodeId> outputs, std::uint32_t var_count) {
  Circuit c;
  c.nodes_ = std::move(nodes);
  c.consts_ = std::move(consts);
  c.outputs_ = std::move(outputs);
  c.var_count_ = var_count;
  c.validate();
  return c;
}

// ---- Builder -----------------------------------------------------------

NodeId Builder::push(Node n) {
  nodes_.push_back(n);
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Builder::var(std::uint32_t index) {
  var_bound_ = std::max(var_bound_, index + 1);
  if (sharing_ == Sharing::HashCons) {
    const Key k{Op::Var, index, 0};
    auto it = table_.find(k);
    if (it != table_.end()) return it->second;
    const NodeId id = push({Op::Var, index, 0});
    table_.emplace(k, id);
    return id;
  }
  return push({Op::Var, index, 0});
}

NodeId Builder::constant(const Int& v) {
  if (sharing_ == Sharing::HashCons) {
    auto it = const_table_.find(v);
    if (it != const_table_.end()) return it->second;
  }
  consts_.push_back(v);
  const NodeId id = push({Op::Const, static_cast<std::uint32_t>(consts_.size() - 1), 0});
  if (sharing_ == Sharing::HashCons) const_table_.emplace(v, id);
  return id;
}

NodeId Builder::make(Op op, NodeId a, NodeId b) {
  switch (op) {
    case Op::Add:
    case Op::Mul:
      if (a >= nodes_.size() || b >= nodes_.size()) throw CircuitError("child id out of range");
      break;
    case Op::Inv:
      if (a >= nodes_.size()) throw CircuitError("child id out of range");
      b = 0;
      break;
    default:
      throw CircuitError("make() is for gates only");
  }
  if (sharing_ == Sharing::HashCons) {
    const Key k{op, a, b};
    auto it = table_.find(k);
    if (it != table_.end()) return it->second;
    const NodeId id = push({op, a, b});
    table_.emplace(k, id);
    return id;
  }
  return push({op, a, b});
}

NodeId Builder::add(NodeId a, NodeId b) { return make(Op::Add, a, b); }
NodeId Builder::mul(NodeId a, NodeId b) { return make(Op::Mul, a, b); }
NodeId Builder::inv(NodeId a) { return make(Op::Inv, a); }

NodeId Builder::import(const Graph& g, NodeId root, std::vector<NodeId>& memo) {
  if (memo.size() < g.size()) memo.resize(g.size(), kNoNode);
  if (memo[root] != kNoNode) return memo[root];
  // Ids are topological, so ascending order visits children first.
  std::vector<NodeId> todo;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    if (memo[x] != kNoNode) continue;
    memo[x] = kNoNode - 1;  // visiting marker
    todo.push_back(x);
    const int ar = g.arity(x);
    if (ar >= 1 && memo[g.node(x).a] == kNoNode) stack.push_back(g.node(x).a);
    if (ar == 2 && memo[g.node(x).b] == kNoNode) stack.push_back(g.node(x).b);
  }
  std::sort(todo.begin(), todo.end());
  // Copies, since g may be this builder.
  for (NodeId x : todo) {
    const Node n = g.node(x);
    switch (n.op) {
      case Op::Var: memo[x] = var(n.a); break;
      case Op::Const: memo[x] = constant(Int(g.value(x))); break;
      case Op::Inv: memo[x] = inv(memo[n.a]); break;
      default: memo[x] = make(n.op, memo[n.a], memo[n.b]);
    }
  }
  return memo[root];
}

NodeId Builder::import(const Circuit& c, NodeId root) {
  std::vector<NodeId> memo(c.size(), kNoNode);
  return import(c, root, memo);
}

std::vector<NodeId> Builder::import_all(const Graph& g) {
  std::vector<NodeId> memo(g.size(), kNoNode);
  for (NodeId x = 0; x < g.size(); ++x) {
    const Node& n = g.node(x);
    switch (n.op) {
      case Op::Var: memo[x] = var(n.a); break;
      case Op::Const: memo[x] = constant(g.value(x)); break;
      case Op::Inv: memo[x] = inv(memo[n.a]); break;
      default: memo[x] = make(n.op, memo[n.a], memo[n.b]);
    }
  }
  return memo;
}

Circuit Builder::finish(std::vector<NodeId> outputs, std::optional<std::uint32_t> var_count) const {
  Circuit c;
  c.nodes_ = nodes_;
  c.consts_ = consts_;
  c.outputs_ = std::move(outputs);
  c.var_count_ = var_count ? std::max(*var_count, var_bound_) : var_bound_;
  c.validate();
  return c;
}

Circuit Builder::extract(const std::vector<NodeId>& outputs, std::optional<std::uint32_t> var_count,
                         std::vector<NodeId>* old_to_new) const {
  const std::vector<char> mask = reachable_mask(*this, outputs);
  std::vector<NodeId> remap(nodes_.size(), kNoNode);
  Circuit c;
  std::uint32_t vb = 0;
  for (NodeId x = 0; x < nodes_.size(); ++x) {
    if (!mask[x]) continue;
    Node n = nodes_[x];
    switch (n.op) {
      case Op::Var: vb = std::max(vb, n.a + 1); break;
      case Op::Const:
        c.consts_.push_back(consts_[n.a]);
        n.a = static_cast<std::uint32_t>(c.consts_.size() - 1);
        break;
      case Op::Inv: n.a = remap[n.a]; break;
      default:
        n.a = remap[n.a];
        n.b = remap[n.b];
    }
    remap[x] = static_cast<NodeId>(c.nodes_.size());
    c.nodes_.push_back(n);
  }
  for (NodeId o : outputs) c.outputs_.push_back(remap[o]);
  c.var_count_ = var_count ? std::max(*var_count, vb) : vb;
  if (old_to_new) *old_to_new = std::move(remap);
  c.validate();
  return c;
}

// ---- structural operations -------------------------------------------

std::vector<char> reachable_mask(const Graph& g, std::span<const NodeId> roots) {
  std::vector<char> mask(g.size(), 0);
  std::vector<NodeId> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    if (mask[x]) continue;
    mask[x] = 1;
    const int ar = g.arity(x);
    if (ar >= 1) stack.push_back(g.node(x).a);
    if (ar == 2) stack.push_back(g.node(x).b);
  }
  return mask;
}

std::vector<NodeId> reachable_nodes(const Graph& g, NodeId root) {
  std::vector<NodeId> out;
  std::unordered_set<NodeId> seen;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    if (!seen.insert(x).second) continue;
    out.push_back(x);
    const int ar = g.arity(x);
    if (ar >= 1) stack.push_back(g.node(x).a);
    if (ar == 2) stack.push_back(g.node(x).b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> node_depths(const Graph& g) {
  std::vector<std::uint32_t> d(g.size(), 0);
  for (NodeId x = 0; x < g.size(); ++x) {
    const int ar = g.arity(x);
    if (ar >= 1) d[x] = d[g.node(x).a] + 1;
    if (ar == 2) d[x] = std::max(d[x], d[g.node(x).b] + 1);
  }
  return d;
}

std::size_t depth(const Circuit& c) {
  const auto d = node_depths(c);
  std::size_t best = 0;
  for (NodeId o : c.outputs()) best = std::max<std::size_t>(best, d[o]);
  return best;
}

std::size_t depth_of(const Graph& g, NodeId root) {
  const auto nodes = reachable_nodes(g, root);
  std::unordered_map<NodeId, std::size_t> d;
  for (NodeId x : nodes) {
    std::size_t v = 0;
    const int ar = g.arity(x);
    if (ar >= 1) v = d[g.node(x).a] + 1;
    if (ar == 2) v = std::max(v, d[g.node(x).b] + 1);
    d[x] = v;
  }
  return d[root];
}

std::size_t inv_count(const Circuit& c) {
  const auto mask = reachable_mask(c, c.outputs());
  std::size_t n = 0;
  for (NodeId x = 0; x < c.size(); ++x)
    if (mask[x] && c.op(x) == Op::Inv) ++n;
  return n;
}

bool division_free(const Circuit& c) { return inv_count(c) == 0; }

bool division_free(const Graph& g, NodeId root) {
  for (NodeId x : reachable_nodes(g, root))
    if (g.op(x) == Op::Inv) return false;
  return true;
}

bool contains_var(const Graph& g, NodeId root, std::uint32_t var) {
  for (NodeId x : reachable_nodes(g, root))
    if (g.op(x) == Op::Var && g.var_index(x) == var) return true;
  return false;
}

Circuit output_circuit(const Circuit& c, std::size_t i) {
  Builder b;
  const NodeId r = b.import(c, c.output(i));
  return b.extract({r}, c.var_count());
}

CombineResult disjoint_combine(const Circuit& f, const Circuit& g, Op op) {
  if (op != Op::Add && op != Op::Mul) throw CircuitError("disjoint_combine needs Add or Mul");
  Builder b;
  std::vector<NodeId> mf(f.size(), kNoNode), mg(g.size(), kNoNode);
  const NodeId rf = b.import(f, f.root(), mf);
  const NodeId rg = b.import(g, g.root(), mg);
  const NodeId top = b.make(op, rf, rg);
  CombineResult res;
  res.circuit = b.finish({top}, std::max(f.var_count(), g.var_count()));
  res.left_map = std::move(mf);
  res.right_map = std::move(mg);
  return res;
}

SubstituteResult substitute(const Circuit& c, const std::map<std::uint32_t, Circuit>& sub) {
  Builder b;
  std::vector<NodeId> map(c.size(), kNoNode);
  std::uint32_t vc = c.var_count();
  for (const auto& [v, img] : sub) vc = std::max(vc, img.var_count());
  for (NodeId x = 0; x < c.size(); ++x) {
    const Node& n = c.node(x);
    switch (n.op) {
      case Op::Var: {
        auto it = sub.find(n.a);
        if (it == sub.end()) {
          map[x] = b.var(n.a);
        } else {
          std::vector<NodeId> memo(it->second.size(), kNoNode);
          map[x] = b.import(it->second, it->second.root(), memo);
        }
        break;
      }
      case Op::Const: map[x] = b.constant(c.value(x)); break;
      case Op::Inv: map[x] = b.inv(map[n.a]); break;
      default: map[x] = b.make(n.op, map[n.a], map[n.b]);
    }
  }
  std::vector<NodeId> outs;
  for (NodeId o : c.outputs()) outs.push_back(map[o]);
  SubstituteResult res;
  res.circuit = b.finish(outs, vc);
  res.node_map = std::move(map);
  return res;
}

NodeId power_node(Builder& b, NodeId base, std::uint64_t k) {
  if (k == 0) return b.constant(1);
  std::map<std::uint64_t, NodeId> memo{{1, base}};
  auto rec = [&](auto&& self, std::uint64_t e) -> NodeId {
    auto it = memo.find(e);
    if (it != memo.end()) return it->second;
    const NodeId l = self(self, (e + 1) / 2);
    const NodeId r = self(self, e / 2);
    const NodeId p = b.mul(l, r);
    memo.emplace(e, p);
    return p;
  };
  return rec(rec, k);
}

Circuit power_chain(const Circuit& f, std::uint64_t k) {
  Builder b;
  if (k == 0) return b.finish({b.constant(1)}, f.var_count());
  const NodeId r = b.import(f, f.root());
  return b.finish({power_node(b, r, k)}, f.var_count());
}

namespace {
NodeId tree(Builder& b, std::span<const NodeId> xs, Op op) {
  if (xs.size() == 1) return xs[0];
  const std::size_t h = (xs.size() + 1) / 2;
  const NodeId l = tree(b, xs.subspan(0, h), op);
  const NodeId r = tree(b, xs.subspan(h), op);
  return b.make(op, l, r);
}
}  // namespace

NodeId sum_tree(Builder& b, std::span<const NodeId> terms) {
  if (terms.empty()) return b.constant(0);
  return tree(b, terms, Op::Add);
}

NodeId product_tree(Builder& b, std::span<const NodeId> factors) {
  if (factors.empty()) return b.constant(1);
  return tree(b, factors, Op::Mul);
}

std::vector<std::uint64_t> structural_hashes(const Graph& g) {
  std::vector<std::uint64_t> h(g.size());
  for (NodeId x = 0; x < g.size(); ++x) {
    const Node& n = g.node(x);
    switch (n.op) {
      case Op::Var: h[x] = hash_combine(1, n.a); break;
      case Op::Const: h[x] = hash_combine(2, hash_int(g.value(x))); break;
      case Op::Add: h[x] = hash_combine(hash_combine(3, h[n.a]), h[n.b]); break;
      case Op::Mul: h[x] = hash_combine(hash_combine(4, h[n.a]), h[n.b]); break;
      case Op::Inv: h[x] = hash_combine(5, h[n.a]); break;
    }
  }
  return h;
}

namespace {
bool same_label(const Graph& a, NodeId x, const Graph& b, NodeId y) {
  const Node& p = a.node(x);
  const Node& q = b.node(y);
  if (p.op != q.op) return false;
  if (p.op == Op::Var) return p.a == q.a;
  if (p.op == Op::Const) return a.value(x) == b.value(y);
  return true;
}
}  // namespace

bool unfold_equal(const Graph& a, NodeId ra, const Graph& b, NodeId rb) {
  std::unordered_set<std::uint64_t> done;
  std::vector<std::pair<NodeId, NodeId>> stack{{ra, rb}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    const std::uint64_t key = (static_cast<std::uint64_t>(x) << 32) | y;
    if (!done.insert(key).second) continue;
    if (!same_label(a, x, b, y)) return false;
    const int ar = a.arity(x);
    if (ar >= 1) stack.emplace_back(a.node(x).a, b.node(y).a);
    if (ar == 2) stack.emplace_back(a.node(x).b, b.node(y).b);
  }
  return true;
}

std::optional<std::vector<std::pair<NodeId, NodeId>>> match_subdag(
    const Graph& a, NodeId ra, const Graph& b, NodeId rb, bool injective) {
  std::unordered_map<NodeId, NodeId> fwd, back;
  std::vector<std::pair<NodeId, NodeId>> stack{{ra, rb}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    auto it = fwd.find(x);
    if (it != fwd.end()) {
      if (it->second != y) return std::nullopt;
      continue;
    }
    if (!same_label(a, x, b, y)) return std::nullopt;
    if (injective) {
      auto jt = back.find(y);
      if (jt != back.end() && jt->second != x) return std::nullopt;
      back.emplace(y, x);
    }
    fwd.emplace(x, y);
    const int ar = a.arity(x);
    if (ar >= 1) stack.emplace_back(a.node(x).a, b.node(y).a);
    if (ar == 2) stack.emplace_back(a.node(x).b, b.node(y).b);
  }
  std::vector<std::pair<NodeId, NodeId>> out(fwd.begin(), fwd.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detpi
