#include "detpi/balancer.hpp"

#include <algorithm>
#include <functional>

#include "detpi/homogenizer.hpp"
#include "detpi/rational_passes.hpp"

namespace detpi {

namespace {

using Mat = std::vector<std::vector<std::uint64_t>>;

std::uint64_t checked_mul_add(std::uint64_t acc, std::uint64_t a, std::uint64_t b) {
  unsigned __int128 r = static_cast<unsigned __int128>(a) * b + acc;
  if (r >> 64) throw CircuitError("path count exceeds 64 bits in matrix powering");
  return static_cast<std::uint64_t>(r);
}

Mat mat_mul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c(n, std::vector<std::uint64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (!a[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (b[k][j]) c[i][j] = checked_mul_add(c[i][j], a[i][k], b[k][j]);
    }
  return c;
}

// Repeated squaring until the exponent reaches at least n.
Mat power_to_size(Mat a) {
  std::size_t p = 1;
  while (p < a.size()) {
    a = mat_mul(a, a);
    p *= 2;
  }
  return a;
}

// Path counts from nodes[root_pos] to every leaf, where leaves carry a self
// loop; children(x) lists the children with multiplicity.
std::map<NodeId, Int> count_paths(const std::vector<NodeId>& nodes,
                                  const std::function<std::vector<NodeId>(NodeId)>& children,
                                  const std::function<bool(NodeId)>& is_leaf, NodeId root) {
  std::unordered_map<NodeId, std::size_t> pos;
  for (std::size_t i = 0; i < nodes.size(); ++i) pos[nodes[i]] = i;
  Mat a(nodes.size(), std::vector<std::uint64_t>(nodes.size(), 0));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (is_leaf(nodes[i])) {
      a[i][i] = 1;
      continue;
    }
    for (NodeId c : children(nodes[i])) ++a[i][pos.at(c)];
  }
  const Mat p = power_to_size(std::move(a));
  std::map<NodeId, Int> out;
  const std::size_t r = pos.at(root);
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (p[r][j] && is_leaf(nodes[j])) out[nodes[j]] = Int(std::to_string(p[r][j]));
  return out;
}

}  // namespace

std::vector<std::vector<bool>> reachability(const Circuit& f) {
  const std::size_t s = f.size();
  Mat a(s, std::vector<std::uint64_t>(s, 0));
  for (NodeId v = 0; v < s; ++v) {
    a[v][v] = 1;
    const int ar = f.arity(v);
    if (ar >= 1) a[f.node(v).a][v] = 1;
    if (ar == 2) a[f.node(v).b][v] = 1;
  }
  // Saturate to 0/1 after each squaring; only nonzero-ness matters.
  std::size_t p = 1;
  while (p < s) {
    Mat c(s, std::vector<std::uint64_t>(s, 0));
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t k = 0; k < s; ++k) {
        if (!a[i][k]) continue;
        for (std::size_t j = 0; j < s; ++j)
          if (a[k][j]) c[i][j] = 1;
      }
    a.swap(c);
    p *= 2;
  }
  std::vector<std::vector<bool>> r(s, std::vector<bool>(s, false));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) r[i][j] = a[i][j] != 0;
  return r;
}

std::map<NodeId, Int> linear_form_coefficients(const Graph& g, NodeId v) {
  std::vector<NodeId> nodes = reachable_nodes(g, v);
  for (NodeId x : nodes)
    if (g.op(x) == Op::Mul || g.op(x) == Op::Inv)
      throw CircuitError("linear form requested over node " + std::to_string(x) + " which is not a sum");
  return count_paths(
      nodes,
      [&](NodeId x) {
        return std::vector<NodeId>{g.left(x), g.right(x)};
      },
      [&](NodeId x) { return g.is_leaf(x); }, v);
}

// ---- context -------------------------------------------------------------

BalanceContext::BalanceContext(const Graph& g, Builder& out, std::vector<NodeId> out_leaf_map)
    : g_(g), out_(out), leaf_map_(std::move(out_leaf_map)) {
  const std::size_t s = g.size();
  kind_.assign(s, Kind::Zero);
  label_.assign(s, 0);
  eff_.assign(s, kNoNode);
  std::vector<char> invalid(s, 0);
  for (NodeId v = 0; v < s; ++v) {
    const Node n = g.node(v);
    switch (n.op) {
      case Op::Var:
        kind_[v] = Kind::Leaf;
        label_[v] = 1;
        eff_[v] = v;
        break;
      case Op::Const:
        if (g.value(v) != 0) {
          kind_[v] = Kind::Leaf;
          label_[v] = 1;
          eff_[v] = v;
        }
        break;
      case Op::Inv:
        invalid[v] = 1;
        eff_[v] = v;
        kind_[v] = Kind::Leaf;
        break;
      case Op::Mul: {
        const NodeId a = eff_[n.a], b = eff_[n.b];
        if (a == kNoNode || b == kNoNode) break;
        invalid[v] = invalid[a] || invalid[b] || kind_[a] == Kind::Spine || kind_[b] == Kind::Spine;
        kind_[v] = Kind::Mul;
        bool ovf = false;
        label_[v] = sat_add(label_[a], label_[b], ovf);
        if (ovf) invalid[v] = 1;
        eff_[v] = v;
        break;
      }
      case Op::Add: {
        const NodeId a = eff_[n.a], b = eff_[n.b];
        if (a == kNoNode && b == kNoNode) break;
        if (a == kNoNode || b == kNoNode) {
          kind_[v] = Kind::Alias;
          eff_[v] = a == kNoNode ? b : a;
          label_[v] = label_[eff_[v]];
          break;
        }
        invalid[v] = invalid[a] || invalid[b];
        eff_[v] = v;
        if (label_[a] == label_[b] && kind_[a] != Kind::Spine && kind_[b] != Kind::Spine) {
          kind_[v] = Kind::Add;
          label_[v] = label_[a];
        } else {
          kind_[v] = Kind::Spine;
          label_[v] = std::max(label_[a], label_[b]);
        }
        break;
      }
    }
  }
  invalid_ = std::move(invalid);
}

void BalanceContext::ensure_reach(NodeId v) {
  if (reach_.empty()) {
    reach_.resize(g_.size());
    reach_done_.assign(g_.size(), 0);
  }
  if (reach_done_[v]) return;
  std::vector<std::uint64_t> bits((g_.size() + 63) / 64, 0);
  std::vector<NodeId> stack{v};
  bits[v / 64] |= std::uint64_t{1} << (v % 64);
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    if (kind_[x] != Kind::Add && kind_[x] != Kind::Mul && kind_[x] != Kind::Spine) continue;
    for (NodeId c : {eff_left(x), eff_right(x)}) {
      if (c == kNoNode) continue;
      std::uint64_t& word = bits[c / 64];
      const std::uint64_t bit = std::uint64_t{1} << (c % 64);
      if (word & bit) continue;
      word |= bit;
      stack.push_back(c);
    }
  }
  reach_[v] = std::move(bits);
  reach_done_[v] = 1;
}

bool BalanceContext::reaches(NodeId w, NodeId v) {
  w = eff_[w];
  v = eff_[v];
  if (w == kNoNode || v == kNoNode) return false;
  ensure_reach(v);
  return (reach_[v][w / 64] >> (w % 64)) & 1;
}

std::vector<NodeId> BalanceContext::members(NodeId v) {
  v = eff_[v];
  std::vector<NodeId> out;
  if (v == kNoNode) return out;
  ensure_reach(v);
  const auto& bits = reach_[v];
  for (std::size_t i = 0; i < bits.size(); ++i)
    for (std::uint64_t word = bits[i]; word; word &= word - 1)
      out.push_back(static_cast<NodeId>(i * 64 + __builtin_ctzll(word)));
  return out;
}

std::vector<NodeId> BalanceContext::frontier(NodeId v, std::uint64_t m) {
  v = eff_[v];
  if (v == kNoNode) return {};
  const std::uint64_t key = (static_cast<std::uint64_t>(v) << 32) ^ m;
  auto it = frontier_memo_.find(key);
  if (it != frontier_memo_.end()) return it->second;
  std::vector<NodeId> out;
  for (NodeId t : members(v)) {
    if (kind_[t] != Kind::Mul || label_[t] <= m) continue;
    if (label_[eff_left(t)] <= m && label_[eff_right(t)] <= m) out.push_back(t);
  }
  frontier_memo_.emplace(key, out);
  return out;
}

std::pair<NodeId, NodeId> BalanceContext::split(NodeId t) const {
  const NodeId a = eff_left(t), b = eff_right(t);
  if (label_[a] >= label_[b]) return {a, b};
  return {b, a};
}

NodeId BalanceContext::zero_node() {
  if (zero_ == kNoNode) zero_ = out_.constant(0);
  return zero_;
}

NodeId BalanceContext::one_node() {
  if (one_ == kNoNode) one_ = out_.constant(1);
  return one_;
}

NodeId BalanceContext::leaf_copy(NodeId leaf) {
  if (!leaf_map_.empty() && leaf_map_[leaf] != kNoNode) return leaf_map_[leaf];
  if (g_.op(leaf) == Op::Var) return out_.var(g_.var_index(leaf));
  return out_.constant(Int(g_.value(leaf)));
}

NodeId BalanceContext::build_linear(const std::map<NodeId, Int>& coeffs, const Int& constant) {
  std::vector<NodeId> terms;
  for (const auto& [leaf, c] : coeffs) {
    if (c == 0) continue;
    if (g_.op(leaf) == Op::Const && c == 1)
      terms.push_back(leaf_copy(leaf));
    else
      terms.push_back(out_.mul(out_.constant(c), leaf_copy(leaf)));
  }
  if (constant != 0) terms.push_back(out_.constant(constant));
  if (terms.empty()) return zero_node();
  return sum_tree(out_, terms);
}

namespace {

std::map<NodeId, Int> effective_linear_form(BalanceContext& ctx, NodeId v) {
  const std::vector<NodeId> nodes = ctx.members(v);
  for (NodeId x : nodes)
    if (ctx.kind(x) == BalanceContext::Kind::Mul)
      throw CircuitError("linear form requested over node " + std::to_string(v) + " with label above one");
  const auto is_leaf = [&](NodeId x) { return ctx.kind(x) == BalanceContext::Kind::Leaf; };
  return count_paths(
      nodes, [&](NodeId x) { return std::vector<NodeId>{ctx.eff_left(x), ctx.eff_right(x)}; }, is_leaf,
      ctx.effective(v));
}

}  // namespace

NodeId BalanceContext::linear_node(NodeId v) { return build_linear(effective_linear_form(*this, v), Int(0)); }

LinearForm partial_linear_form(BalanceContext& ctx, NodeId w, NodeId v) {
  using Kind = BalanceContext::Kind;
  w = ctx.effective(w);
  v = ctx.effective(v);
  LinearForm res;
  if (w == kNoNode || v == kNoNode || !ctx.reaches(w, v)) return res;
  const std::vector<NodeId> nodes = ctx.members(v);
  std::unordered_map<NodeId, LinearForm> part;
  std::unordered_map<NodeId, bool> has_w;
  for (NodeId u : nodes) {
    if (u == w) {
      has_w[u] = true;
      part[u].constant = 1;
      continue;
    }
    const Kind k = ctx.kind(u);
    if (k == Kind::Leaf) {
      has_w[u] = false;
      continue;
    }
    const NodeId a = ctx.eff_left(u), b = ctx.eff_right(u);
    const bool ha = has_w[a], hb = has_w[b];
    has_w[u] = ha || hb;
    if (!has_w[u]) continue;
    LinearForm f;
    if (k == Kind::Add || k == Kind::Spine) {
      for (NodeId c : {a, b}) {
        if (!has_w[c]) continue;
        const LinearForm& pc = part[c];
        for (const auto& [leaf, coef] : pc.coeffs) f.coeffs[leaf] += coef;
        f.constant += pc.constant;
      }
    } else {
      const auto [sel, other] = ctx.split(u);
      if (has_w[sel]) {
        const LinearForm& ps = part[sel];
        if (!ps.coeffs.empty())
          throw CircuitError("partial derivative of node " + std::to_string(v) + " is not linear");
        if (ps.constant != 0)
          for (const auto& [leaf, coef] : effective_linear_form(ctx, other)) f.coeffs[leaf] += ps.constant * coef;
      }
    }
    part[u] = std::move(f);
  }
  res = part[v];
  for (auto it = res.coeffs.begin(); it != res.coeffs.end();) it = it->second == 0 ? res.coeffs.erase(it) : std::next(it);
  return res;
}

NodeId BalanceContext::partial_linear_node(NodeId w, NodeId v) {
  const LinearForm f = partial_linear_form(*this, w, v);
  return build_linear(f.coeffs, f.constant);
}

namespace {

std::uint64_t half_power(std::uint64_t x) {
  // largest 2^i with 2^i < x, for x >= 2
  std::uint64_t m = 1;
  while (m * 2 < x) m *= 2;
  return m;
}

}  // namespace

NodeId BalanceContext::fv(NodeId v) {
  v = eff_[v];
  if (v == kNoNode) return zero_node();
  if (invalid_[v]) throw CircuitError("node " + std::to_string(v) + " is outside the balancer's input class");
  auto it = fv_memo_.find(v);
  if (it != fv_memo_.end()) return it->second;
  NodeId r;
  if (kind_[v] == Kind::Spine) {
    const NodeId a = fv(eff_left(v));
    const NodeId b = fv(eff_right(v));
    r = out_.add(a, b);
  } else if (label_[v] <= 1) {
    r = linear_node(v);
  } else {
    const std::uint64_t m = half_power(label_[v]);
    std::vector<NodeId> terms;
    for (NodeId t : frontier(v, m)) {
      const NodeId d = dwfv(t, v);
      const NodeId f1 = fv(eff_left(t));
      const NodeId f2 = fv(eff_right(t));
      terms.push_back(out_.mul(out_.mul(d, f1), f2));
    }
    r = terms.empty() ? zero_node() : sum_tree(out_, terms);
  }
  fv_memo_.emplace(v, r);
  return r;
}

NodeId BalanceContext::dwfv(NodeId w, NodeId v) {
  w = eff_[w];
  v = eff_[v];
  if (w == kNoNode || v == kNoNode) return zero_node();
  if (w == v) return one_node();
  if (!reaches(w, v)) return zero_node();
  if (invalid_[v] || kind_[v] == Kind::Spine)
    throw CircuitError("derivative requested over node " + std::to_string(v) + " which is not homogeneous");
  const std::uint64_t key = (static_cast<std::uint64_t>(w) << 32) | v;
  auto it = dw_memo_.find(key);
  if (it != dw_memo_.end()) return it->second;
  const std::uint64_t lw = label_[w], lv = label_[v];
  if (lv < lw) throw CircuitError("derivative over a node of smaller label");
  NodeId r;
  if (lv - lw <= 1) {
    r = partial_linear_node(w, v);
  } else {
    const std::uint64_t m = half_power(lv - lw) + lw;
    std::vector<NodeId> terms;
    for (NodeId t : frontier(v, m)) {
      const auto [t1, t2] = split(t);
      if (!reaches(w, t1)) continue;
      const NodeId d = dwfv(t, v);
      const NodeId d1 = dwfv(w, t1);
      terms.push_back(out_.mul(out_.mul(d, d1), fv(t2)));
    }
    r = terms.empty() ? zero_node() : sum_tree(out_, terms);
  }
  dw_memo_.emplace(key, r);
  return r;
}

// ---- driver --------------------------------------------------------------

std::size_t ceil_log2(std::uint64_t x) {
  std::size_t r = 0;
  while (r < 64 && (std::uint64_t{1} << r) < x) ++r;
  return r;
}

std::size_t balance_depth_bound(std::size_t s, std::uint64_t d) {
  const std::size_t ls = ceil_log2(s), ld = ceil_log2(d);
  return kBalanceDepthC * (ls * ld + ld * ld + 1);
}

Circuit balance(const Circuit& f, const DegreeAnnotation& annotation, BalanceReport* report) {
  if (f.outputs().size() != 1) throw CircuitError("balance expects a single-output circuit");
  if (annotation.mode != DegreeMode::DegubPrime)
    throw CircuitError(std::string("balance needs a degubPrime annotation, got ") + degree_mode_name(annotation.mode));
  if (annotation.degree.size() != f.size()) throw CircuitError("annotation does not match the circuit");
  Builder out(Builder::Sharing::HashCons);
  BalanceContext ctx(f, out);
  const NodeId root = f.outputs()[0];
  for (NodeId v : reachable_nodes(f, root)) {
    if (ctx.effective(v) == kNoNode) continue;
    if (ctx.label(v) > annotation[v])
      throw CircuitError("label of node " + std::to_string(v) + " exceeds its degubPrime annotation");
  }
  const NodeId r = ctx.fv(root);
  Circuit res = out.extract({r});
  if (report) {
    report->size_in = f.size();
    report->size_out = res.size();
    report->degree = ctx.effective(root) == kNoNode ? 0 : ctx.label(root);
    report->depth_in = depth(f);
    report->depth_out = depth(res);
    report->fv_nodes = ctx.fv_count();
    report->dwfv_nodes = ctx.dwfv_count();
  }
  return res;
}

Circuit build_taydet_sharp_prime(std::uint32_t n) { return simplify_zeros(build_taydet_sharp(n)).circuit; }

DetBalancedParts build_det_balanced_parts(std::uint32_t n) {
  DetBalancedParts p;
  p.taydet_sharp_prime = build_taydet_sharp_prime(n);
  const Circuit& t = p.taydet_sharp_prime;
  const DegreeAnnotation w = syntactic_degrees(t, true);
  p.degree_bound = static_cast<std::uint32_t>(w[t.outputs()[0]]);
  HomogenizeOptions opt;
  opt.witness = &w;
  opt.constants_as_degree_one = true;
  opt.prune_zeros = true;
  const HomogeneousDecomposition h = homogenize(t, p.degree_bound, opt);
  AnnotatedCircuit summed = sum_components(h);
  p.homogenized = std::move(summed.circuit);
  p.annotation = std::move(summed.annotation);
  p.balanced = balance(p.homogenized, p.annotation, &p.report);
  return p;
}

Circuit build_det_balanced(std::uint32_t n) { return build_det_balanced_parts(n).balanced; }

}  // namespace detpi
