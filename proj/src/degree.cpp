#include "detpi/degree.hpp"

#include <algorithm>

namespace detpi {

const char* degree_mode_name(DegreeMode m) {
  switch (m) {
    case DegreeMode::Degub: return "degub";
    case DegreeMode::DegubPrime: return "degubPrime";
    case DegreeMode::Exact: return "exact";
  }
  return "?";
}

DegreeAnnotation syntactic_degrees(const Graph& g, bool constants_as_one) {
  DegreeAnnotation ann;
  ann.mode = constants_as_one ? DegreeMode::DegubPrime : DegreeMode::Exact;
  ann.degree.assign(g.size(), 0);
  for (NodeId x = 0; x < g.size(); ++x) {
    const Node& n = g.node(x);
    switch (n.op) {
      case Op::Var: ann.degree[x] = 1; break;
      case Op::Const: ann.degree[x] = constants_as_one ? 1 : 0; break;
      case Op::Add: ann.degree[x] = std::max(ann.degree[n.a], ann.degree[n.b]); break;
      case Op::Mul: ann.degree[x] = sat_add(ann.degree[n.a], ann.degree[n.b], ann.overflow); break;
      case Op::Inv: throw CircuitError("syntactic degree is defined for division-free circuits only");
    }
  }
  return ann;
}

bool verify_exact_witness(const Graph& g, const DegreeAnnotation& w) {
  if (w.degree.size() != g.size()) return false;
  bool ovf = false;
  for (NodeId x = 0; x < g.size(); ++x) {
    const Node& n = g.node(x);
    std::uint64_t want = 0;
    switch (n.op) {
      case Op::Var: want = 1; break;
      case Op::Const: want = 0; break;
      case Op::Add: want = std::max(w.degree[n.a], w.degree[n.b]); break;
      case Op::Mul: want = sat_add(w.degree[n.a], w.degree[n.b], ovf); break;
      case Op::Inv: return false;
    }
    if (w.degree[x] != want) return false;
  }
  return true;
}

}  // namespace detpi
