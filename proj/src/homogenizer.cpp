#include "detpi/homogenizer.hpp"

#include <algorithm>

namespace detpi {

NodeId HomogeneousDecomposition::component(std::uint32_t i) const {
  if (only_i) {
    if (i != *only_i) throw CircuitError("component not in this slice");
    return circuit.output(0);
  }
  return circuit.output(i);
}

namespace {

class AnnotatingBuilder {
 public:
  Builder b;
  std::vector<std::uint64_t> ann;

  NodeId tag(NodeId id, std::uint64_t bound) {
    if (ann.size() <= id) ann.resize(id + 1, 0);
    ann[id] = bound;
    return id;
  }
  NodeId zero(std::uint32_t i) {
    if (zeros_.size() <= i) zeros_.resize(i + 1, kNoNode);
    if (zeros_[i] == kNoNode) zeros_[i] = tag(b.constant(0), i);
    return zeros_[i];
  }
  bool is_zero(NodeId id) const { return b.is_const(id, 0); }
  NodeId sum(std::vector<NodeId>& terms, std::uint64_t bound) {
    // Balanced, like sum_tree, tagging every internal node.
    if (terms.empty()) return kNoNode;
    while (terms.size() > 1) {
      std::vector<NodeId> next;
      for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(tag(b.add(terms[i], terms[i + 1]), bound));
      if (terms.size() % 2) next.push_back(terms.back());
      terms.swap(next);
    }
    return terms[0];
  }

 private:
  std::vector<NodeId> zeros_;
};

}  // namespace

HomogeneousDecomposition homogenize(const Circuit& f, std::uint32_t d, const HomogenizeOptions& opt) {
  const NodeId root = f.root();
  if (!division_free(f, root)) throw CircuitError("homogenize needs a division-free circuit");
  if (opt.only_i && *opt.only_i > d) throw CircuitError("slice index exceeds the degree bound");
  const std::uint32_t w = d + 1;
  const NodeId roots[1] = {root};
  const std::vector<char> mask = reachable_mask(f, roots);
  HomogeneousDecomposition dec;
  dec.d = d;
  dec.only_i = opt.only_i;
  dec.dup.assign(static_cast<std::size_t>(f.size()) * w, kNoNode);
  AnnotatingBuilder ab;
  Builder& b = ab.b;
  auto slot = [&](NodeId v, std::uint32_t i) -> NodeId& { return dec.dup[static_cast<std::size_t>(v) * w + i]; };
  const std::uint64_t leaf_const = opt.constants_as_degree_one ? 1 : 0;
  std::vector<NodeId> terms;
  for (NodeId v = 0; v < f.size(); ++v) {
    if (!mask[v]) continue;
    const Node& n = f.node(v);
    const std::uint64_t cap = opt.witness ? opt.witness->degree.at(v) : d;
    for (std::uint32_t i = 0; i <= d; ++i) {
      NodeId out = kNoNode;
      if (i > cap) {
        out = ab.zero(i);
      } else {
        switch (n.op) {
          case Op::Var:
            out = i == 1 ? ab.tag(b.var(n.a), 1) : ab.zero(i);
            break;
          case Op::Const:
            out = i == leaf_const ? ab.tag(b.constant(f.value(v)), i) : ab.zero(i);
            break;
          case Op::Add: {
            const NodeId l = slot(n.a, i), r = slot(n.b, i);
            if (opt.prune_zeros && ab.is_zero(l)) {
              out = r;
            } else if (opt.prune_zeros && ab.is_zero(r)) {
              out = l;
            } else {
              out = ab.tag(b.add(l, r), i);
            }
            break;
          }
          case Op::Mul: {
            terms.clear();
            for (std::uint32_t j = 0; j <= i; ++j) {
              const NodeId l = slot(n.a, j), r = slot(n.b, i - j);
              if (opt.prune_zeros && (ab.is_zero(l) || ab.is_zero(r))) continue;
              terms.push_back(ab.tag(b.mul(l, r), i));
            }
            out = terms.empty() ? ab.zero(i) : ab.sum(terms, i);
            break;
          }
          case Op::Inv: break;
        }
      }
      slot(v, i) = out;
    }
  }
  // Zero nodes for every bound exist, so slices of zero components are valid.
  for (std::uint32_t i = 0; i <= d; ++i) ab.zero(i);
  ab.ann.resize(b.size(), 0);
  dec.annotation.mode = opt.constants_as_degree_one ? DegreeMode::DegubPrime : DegreeMode::Degub;
  if (opt.only_i) {
    std::vector<NodeId> old_to_new;
    dec.circuit = b.extract({slot(root, *opt.only_i)}, f.var_count(), &old_to_new);
    dec.annotation.degree.assign(dec.circuit.size(), 0);
    for (NodeId x = 0; x < b.size(); ++x)
      if (old_to_new[x] != kNoNode) dec.annotation.degree[old_to_new[x]] = ab.ann[x];
    for (NodeId& x : dec.dup)
      if (x != kNoNode) x = old_to_new[x];
  } else {
    std::vector<NodeId> outs;
    for (std::uint32_t i = 0; i <= d; ++i) outs.push_back(slot(root, i));
    dec.circuit = b.finish(outs, f.var_count());
    dec.annotation.degree = std::move(ab.ann);
  }
  return dec;
}

HomogeneousDecomposition pad_homogeneous(const Circuit& f, std::uint32_t j, std::uint32_t d) {
  if (j > d) throw CircuitError("declared degree exceeds the bound");
  AnnotatingBuilder ab;
  const std::vector<NodeId> ids = ab.b.import_all(f);
  const DegreeAnnotation base = syntactic_degrees(f, false);
  for (NodeId x = 0; x < f.size(); ++x) ab.tag(ids[x], base.degree[x]);
  HomogeneousDecomposition dec;
  dec.d = d;
  dec.dup.assign(static_cast<std::size_t>(f.size()) * (d + 1), kNoNode);
  for (NodeId x = 0; x < f.size(); ++x)
    for (std::uint32_t i = 0; i <= d; ++i)
      dec.dup[static_cast<std::size_t>(x) * (d + 1) + i] = i == j ? ids[x] : ab.zero(i);
  std::vector<NodeId> outs;
  for (std::uint32_t i = 0; i <= d; ++i) outs.push_back(i == j ? ids[f.root()] : ab.zero(i));
  ab.ann.resize(ab.b.size(), 0);
  dec.circuit = ab.b.finish(outs, f.var_count());
  dec.annotation.mode = DegreeMode::Degub;
  dec.annotation.degree = std::move(ab.ann);
  return dec;
}

DegreeAnnotation exact_degree_witness(const Circuit& f) {
  DegreeAnnotation a = syntactic_degrees(f, false);
  a.mode = DegreeMode::Exact;
  return a;
}

AnnotatedCircuit sum_components(const HomogeneousDecomposition& dec) {
  Builder b;
  std::vector<NodeId> memo;
  std::vector<std::uint64_t> ann;
  auto tag = [&](NodeId id, std::uint64_t v) {
    if (ann.size() <= id) ann.resize(id + 1, 0);
    ann[id] = v;
  };
  const std::vector<NodeId> ids = b.import_all(dec.circuit);
  for (NodeId x = 0; x < dec.circuit.size(); ++x) tag(ids[x], dec.annotation.degree.at(x));
  std::vector<std::pair<NodeId, std::uint64_t>> terms;
  for (NodeId o : dec.circuit.outputs()) terms.emplace_back(ids[o], dec.annotation.degree.at(o));
  while (terms.size() > 1) {
    std::vector<std::pair<NodeId, std::uint64_t>> next;
    for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
      const std::uint64_t bound = std::max(terms[i].second, terms[i + 1].second);
      const NodeId s = b.add(terms[i].first, terms[i + 1].first);
      tag(s, bound);
      next.emplace_back(s, bound);
    }
    if (terms.size() % 2) next.push_back(terms.back());
    terms.swap(next);
  }
  std::vector<NodeId> old_to_new;
  AnnotatedCircuit out;
  out.circuit = b.extract({terms[0].first}, dec.circuit.var_count(), &old_to_new);
  out.annotation.mode = dec.annotation.mode;
  out.annotation.degree.assign(out.circuit.size(), 0);
  ann.resize(b.size(), 0);
  for (NodeId x = 0; x < b.size(); ++x)
    if (old_to_new[x] != kNoNode) out.annotation.degree[old_to_new[x]] = ann[x];
  return out;
}

}  // namespace detpi
