#include "detpi/proof.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <unordered_map>

#include "detpi/evaluator.hpp"
#include "detpi/rational_passes.hpp"
#include "detpi/text_io.hpp"

namespace detpi {

namespace {
constexpr const char* kLawNames[] = {"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9",
                                     "A10", "C1", "C2", "D", "R1", "R2", "R3", "R4"};
}

const char* law_name(Law l) { return kLawNames[static_cast<int>(l)]; }

std::optional<Law> parse_law(std::string_view s) {
  for (int i = 0; i < 17; ++i)
    if (s == kLawNames[i]) return static_cast<Law>(i);
  return std::nullopt;
}

std::size_t premise_count(Law l) {
  switch (l) {
    case Law::R1: return 1;
    case Law::R2:
    case Law::R3:
    case Law::R4: return 2;
    default: return 0;
  }
}

const char* system_name(ProofSystem s) {
  switch (s) {
    case ProofSystem::PC: return "PC";
    case ProofSystem::PIdiv: return "PIdiv";
    case ProofSystem::PCk: return "PCk";
  }
  return "?";
}

// ---- text format ---------------------------------------------------------

std::string encode_proof(const Proof& p) {
  std::string out;
  std::ostringstream head;
  head << "proof 1\nsystem " << system_name(p.system);
  if (p.system == ProofSystem::PCk) head << ' ' << p.k;
  head << "\nvars " << p.var_count << "\nlines " << p.lines.size() << "\n";
  out += head.str();
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const ProofLine& l = p.lines[i];
    std::ostringstream os;
    os << "line " << i << "\n";
    out += os.str();
    encode_to(out, l.eq);
    os.str("");
    os << "just " << law_name(l.law);
    for (auto q : l.premises) os << ' ' << q;
    os << "\nslots " << l.witness.slots.size();
    for (auto s : l.witness.slots) os << ' ' << s;
    os << "\nmaps " << l.witness.maps.size() << "\n";
    for (const NodeMap& m : l.witness.maps) {
      os << "map " << m.size();
      for (auto [a, b] : m) os << ' ' << a << ' ' << b;
      os << "\n";
    }
    os << "endline\n";
    out += os.str();
  }
  out += "end\n";
  return out;
}

Proof decode_proof(std::string_view text) {
  TextReader in(text);
  in.expect("proof");
  if (in.read_u32() != 1) in.fail("unsupported proof format version");
  Proof p;
  in.expect("system");
  const std::string_view sys = in.token();
  if (sys == "PC") {
    p.system = ProofSystem::PC;
  } else if (sys == "PIdiv") {
    p.system = ProofSystem::PIdiv;
  } else if (sys == "PCk") {
    p.system = ProofSystem::PCk;
    p.k = in.read_u64();
  } else {
    in.fail("unknown proof system '" + std::string(sys) + "'");
  }
  in.expect("vars");
  p.var_count = in.read_u32();
  in.expect("lines");
  const std::uint32_t n = in.read_u32();
  p.lines.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    in.expect("line");
    if (in.read_u32() != i) in.fail("line indices must be consecutive from 0");
    ProofLine l;
    l.eq = read_circuit(in);
    if (l.eq.outputs().size() != 2) in.fail("a proof line circuit has exactly two outputs");
    if (l.eq.var_count() > p.var_count) in.fail("line uses more variables than the proof declares");
    in.expect("just");
    const std::string_view name = in.token();
    auto law = parse_law(name);
    if (!law) in.fail("unknown justification '" + std::string(name) + "'");
    l.law = *law;
    for (std::size_t q = 0; q < premise_count(l.law); ++q) l.premises.push_back(in.read_u32());
    in.expect("slots");
    const std::uint32_t ns = in.read_u32();
    for (std::uint32_t s = 0; s < ns; ++s) l.witness.slots.push_back(in.read_u32());
    in.expect("maps");
    const std::uint32_t nm = in.read_u32();
    for (std::uint32_t m = 0; m < nm; ++m) {
      in.expect("map");
      const std::uint32_t cnt = in.read_u32();
      NodeMap map;
      map.reserve(cnt);
      for (std::uint32_t e = 0; e < cnt; ++e) {
        const NodeId a = in.read_u32();
        const NodeId b = in.read_u32();
        map.emplace_back(a, b);
      }
      l.witness.maps.push_back(std::move(map));
    }
    in.expect("endline");
    p.lines.push_back(std::move(l));
  }
  in.expect("end");
  if (!in.at_end()) {
    in.token();
    in.fail("trailing data after proof");
  }
  return p;
}

// ---- syntactic checking --------------------------------------------------

namespace {

struct Fail {
  std::string reason;
};

[[noreturn]] void fail(const std::string& r) { throw Fail{r}; }

std::vector<char> reach(const Graph& g, std::initializer_list<NodeId> roots) {
  std::vector<NodeId> r(roots);
  return reachable_mask(g, r);
}

bool same_label(const Graph& a, NodeId x, const Graph& b, NodeId y) {
  const Node& p = a.node(x);
  const Node& q = b.node(y);
  if (p.op != q.op) return false;
  if (p.op == Op::Var) return p.a == q.a;
  if (p.op == Op::Const) return a.value(x) == b.value(y);
  return true;
}

// Verifies that map is a label and child preserving injection defined
// exactly on the nodes of src marked in cover, and that the required root
// pairs are present.
void check_map(const Graph& src, const std::vector<char>& cover, const Graph& dst, const NodeMap& map,
               std::initializer_list<std::pair<NodeId, NodeId>> roots, const char* what) {
  std::unordered_map<NodeId, NodeId> fwd;
  std::unordered_map<NodeId, NodeId> back;
  fwd.reserve(map.size());
  back.reserve(map.size());
  for (auto [a, b] : map) {
    if (a >= src.size() || b >= dst.size()) fail(std::string(what) + ": node id out of range");
    if (!cover[a]) fail(std::string(what) + ": node " + std::to_string(a) + " is outside the mapped sub-DAG");
    if (!fwd.emplace(a, b).second) fail(std::string(what) + ": node " + std::to_string(a) + " mapped twice");
    if (!back.emplace(b, a).second) fail(std::string(what) + ": map is not injective at " + std::to_string(b));
  }
  std::size_t covered = 0;
  for (char c : cover) covered += c != 0;
  if (covered != fwd.size()) fail(std::string(what) + ": map does not cover the sub-DAG");
  for (auto [a, b] : map) {
    if (!same_label(src, a, dst, b))
      fail(std::string(what) + ": label mismatch at " + std::to_string(a) + " -> " + std::to_string(b));
    const int ar = src.arity(a);
    if (ar >= 1 && fwd.at(src.node(a).a) != dst.node(b).a)
      fail(std::string(what) + ": child mismatch at " + std::to_string(a) + " -> " + std::to_string(b));
    if (ar == 2 && fwd.at(src.node(a).b) != dst.node(b).b)
      fail(std::string(what) + ": child mismatch at " + std::to_string(a) + " -> " + std::to_string(b));
  }
  for (auto [r, img] : roots) {
    auto it = fwd.find(r);
    if (it == fwd.end() || it->second != img) fail(std::string(what) + ": root correspondence broken");
  }
}

bool is_op(const Graph& g, NodeId v, Op op) { return g.op(v) == op; }

void need(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

void check_slots(const ProofLine& l, std::size_t n) {
  need(l.witness.slots.size() == n, std::string(law_name(l.law)) + " needs " + std::to_string(n) + " slots");
  for (NodeId s : l.witness.slots) need(s < l.eq.size(), "slot out of range");
  need(l.witness.maps.empty(), "axiom lines carry no maps");
}

void check_axiom(const Proof& p, const ProofLine& l) {
  const Circuit& c = l.eq;
  const NodeId L = l.lhs(), R = l.rhs();
  const auto& s = l.witness.slots;
  auto bin = [&](NodeId v, Op op, NodeId a, NodeId b) {
    return is_op(c, v, op) && c.left(v) == a && c.right(v) == b;
  };
  const std::string bad = std::string("line does not match schema ") + law_name(l.law);
  switch (l.law) {
    case Law::A1:
      check_slots(l, 1);
      need(L == s[0] && R == s[0], bad);
      break;
    case Law::A2:
    case Law::A4: {
      check_slots(l, 2);
      const Op op = l.law == Law::A2 ? Op::Add : Op::Mul;
      need(bin(L, op, s[0], s[1]) && bin(R, op, s[1], s[0]), bad);
      break;
    }
    case Law::A3:
    case Law::A5: {
      check_slots(l, 3);
      const Op op = l.law == Law::A3 ? Op::Add : Op::Mul;
      need(is_op(c, L, op) && c.left(L) == s[0] && bin(c.right(L), op, s[1], s[2]), bad);
      need(is_op(c, R, op) && bin(c.left(R), op, s[0], s[1]) && c.right(R) == s[2], bad);
      break;
    }
    case Law::A6:
      check_slots(l, 3);
      need(is_op(c, L, Op::Mul) && c.left(L) == s[0] && bin(c.right(L), Op::Add, s[1], s[2]), bad);
      need(is_op(c, R, Op::Add) && bin(c.left(R), Op::Mul, s[0], s[1]) && bin(c.right(R), Op::Mul, s[0], s[2]),
           bad);
      break;
    case Law::A7:
      check_slots(l, 1);
      need(is_op(c, L, Op::Add) && c.left(L) == s[0] && c.is_const(c.right(L), 0) && R == s[0], bad);
      break;
    case Law::A8:
      check_slots(l, 1);
      need(is_op(c, L, Op::Mul) && c.left(L) == s[0] && c.is_const(c.right(L), 0) && c.is_const(R, 0), bad);
      break;
    case Law::A9:
      check_slots(l, 1);
      need(is_op(c, L, Op::Mul) && c.left(L) == s[0] && c.is_const(c.right(L), 1) && R == s[0], bad);
      break;
    case Law::A10: {
      check_slots(l, 0);
      need(c.op(L) == Op::Const, bad);
      need((c.op(R) == Op::Add || c.op(R) == Op::Mul) && c.op(c.left(R)) == Op::Const &&
               c.op(c.right(R)) == Op::Const,
           bad);
      const Int want = c.op(R) == Op::Add ? Int(c.value(c.left(R)) + c.value(c.right(R)))
                                          : Int(c.value(c.left(R)) * c.value(c.right(R)));
      need(c.value(L) == want, "A10 arithmetic is wrong");
      break;
    }
    case Law::D: {
      check_slots(l, 1);
      need(p.system != ProofSystem::PC, "axiom D is not available in PC");
      need(is_op(c, L, Op::Mul) && c.left(L) == s[0] && c.is_const(R, 1), bad);
      const NodeId g = c.right(L);
      if (p.system == ProofSystem::PIdiv) {
        need(is_op(c, g, Op::Inv) && c.arg(g) == s[0], bad);
      } else {
        Builder b(Builder::Sharing::HashCons);
        std::vector<NodeId> memo(c.size(), kNoNode);
        const NodeId f = b.import(c, s[0], memo);
        const NodeId want = inv_k_node(b, f, p.k);
        need(unfold_equal(b, want, c, g), "D line factor is not Inv_k of its argument");
      }
      break;
    }
    case Law::C1:
    case Law::C2: {
      need(l.witness.slots.empty(), "C1/C2 carry no slots");
      need(l.witness.maps.size() == 2, "C1/C2 need two maps");
      const Op op = l.law == Law::C1 ? Op::Add : Op::Mul;
      need(is_op(c, L, op) && is_op(c, R, op), bad);
      const auto ra = reach(c, {c.left(L)});
      const auto rb = reach(c, {c.right(L)});
      for (NodeId v = 0; v < c.size(); ++v) need(!(ra[v] && rb[v]), "operands of the disjoint side share nodes");
      check_map(c, ra, c, l.witness.maps[0], {{c.left(L), c.left(R)}}, "map 0");
      check_map(c, rb, c, l.witness.maps[1], {{c.right(L), c.right(R)}}, "map 1");
      break;
    }
    default: fail("not an axiom");
  }
}

void check_rule(const Proof& p, std::size_t idx) {
  const ProofLine& l = p.lines[idx];
  need(l.premises.size() == premise_count(l.law), "wrong number of premises");
  for (auto q : l.premises) need(q < idx, "premise " + std::to_string(q) + " is not an earlier line");
  need(l.witness.slots.empty(), "rule lines carry no slots");
  const Circuit& c = l.eq;
  const NodeId L = l.lhs(), R = l.rhs();
  auto maps_needed = [&](std::size_t n) { need(l.witness.maps.size() == n, "wrong number of witness maps"); };
  switch (l.law) {
    case Law::R1: {
      maps_needed(1);
      const ProofLine& a = p.lines[l.premises[0]];
      check_map(a.eq, reach(a.eq, {a.lhs(), a.rhs()}), c, l.witness.maps[0], {{a.lhs(), R}, {a.rhs(), L}},
                "map 0");
      break;
    }
    case Law::R2: {
      maps_needed(3);
      const ProofLine& a = p.lines[l.premises[0]];
      const ProofLine& b = p.lines[l.premises[1]];
      check_map(a.eq, reach(a.eq, {a.lhs()}), c, l.witness.maps[0], {{a.lhs(), L}}, "map 0");
      check_map(b.eq, reach(b.eq, {b.rhs()}), c, l.witness.maps[1], {{b.rhs(), R}}, "map 1");
      check_map(a.eq, reach(a.eq, {a.rhs()}), b.eq, l.witness.maps[2], {{a.rhs(), b.lhs()}}, "map 2");
      break;
    }
    case Law::R3:
    case Law::R4: {
      maps_needed(2);
      const Op op = l.law == Law::R3 ? Op::Add : Op::Mul;
      need(is_op(c, L, op) && is_op(c, R, op), std::string(law_name(l.law)) + " conclusion has the wrong operator");
      const ProofLine& a = p.lines[l.premises[0]];
      const ProofLine& b = p.lines[l.premises[1]];
      check_map(a.eq, reach(a.eq, {a.lhs(), a.rhs()}), c, l.witness.maps[0],
                {{a.lhs(), c.left(L)}, {a.rhs(), c.left(R)}}, "map 0");
      check_map(b.eq, reach(b.eq, {b.lhs(), b.rhs()}), c, l.witness.maps[1],
                {{b.lhs(), c.right(L)}, {b.rhs(), c.right(R)}}, "map 1");
      break;
    }
    default: fail("not a rule");
  }
}

void check_line_syntax(const Proof& p, std::size_t idx) {
  const ProofLine& l = p.lines[idx];
  try {
    l.eq.validate();
  } catch (const CircuitError& e) {
    fail(std::string("malformed circuit: ") + e.what());
  }
  need(l.eq.outputs().size() == 2, "line circuit needs two outputs");
  need(l.eq.var_count() <= p.var_count, "line uses undeclared variables");
  if (p.system != ProofSystem::PIdiv)
    for (NodeId v = 0; v < l.eq.size(); ++v) need(l.eq.op(v) != Op::Inv, "division gate in a division-free system");
  if (is_rule(l.law)) {
    check_rule(p, idx);
  } else {
    need(l.premises.empty(), "axiom lines have no premises");
    check_axiom(p, l);
  }
}

// ---- semantic sampling ----------------------------------------------------

struct DivZero {};

Int random_point(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> d(-(std::int64_t{1} << 20), std::int64_t{1} << 20);
  return Int(static_cast<long>(d(rng)));
}

std::pair<Rat, Rat> eval_line_rat(const Circuit& c, const std::vector<Rat>& a) {
  std::vector<Rat> val(c.size());
  for (NodeId v = 0; v < c.size(); ++v) {
    const Node& n = c.node(v);
    switch (n.op) {
      case Op::Var: val[v] = a[n.a]; break;
      case Op::Const: val[v] = c.value(v); break;
      case Op::Add: val[v] = val[n.a] + val[n.b]; break;
      case Op::Mul: val[v] = val[n.a] * val[n.b]; break;
      case Op::Inv:
        if (val[n.a] == 0) throw DivZero{};
        val[v] = 1 / val[n.a];
        break;
    }
  }
  return {val[c.output(0)], val[c.output(1)]};
}

// Coefficients of t^0..t^k after x_i := a_i * t.
bool series_equal(const Circuit& c, const std::vector<Int>& a, std::size_t k) {
  std::vector<std::vector<Int>> val(c.size());
  for (NodeId v = 0; v < c.size(); ++v) {
    const Node& n = c.node(v);
    std::vector<Int> s(k + 1, Int(0));
    switch (n.op) {
      case Op::Var:
        if (k >= 1) s[1] = a[n.a];
        break;
      case Op::Const: s[0] = c.value(v); break;
      case Op::Add:
        for (std::size_t i = 0; i <= k; ++i) s[i] = val[n.a][i] + val[n.b][i];
        break;
      case Op::Mul:
        for (std::size_t i = 0; i <= k; ++i) {
          if (val[n.a][i] == 0) continue;
          for (std::size_t j = 0; i + j <= k; ++j) s[i + j] += val[n.a][i] * val[n.b][j];
        }
        break;
      case Op::Inv: return false;
    }
    val[v] = std::move(s);
  }
  return val[c.output(0)] == val[c.output(1)];
}

void check_line_semantic(const Proof& p, std::size_t idx, const CheckOptions& opt) {
  const ProofLine& l = p.lines[idx];
  std::mt19937_64 rng(hash_combine(opt.seed, idx));
  const std::uint32_t nv = std::max(p.var_count, l.eq.var_count());
  for (std::size_t t = 0; t < opt.trials; ++t) {
    if (p.system == ProofSystem::PCk) {
      std::vector<Int> a(nv);
      for (auto& x : a) x = random_point(rng);
      if (!series_equal(l.eq, a, p.k)) fail("sides differ below degree " + std::to_string(p.k + 1) + " at a sample");
      continue;
    }
    bool done = false;
    for (std::size_t r = 0; r <= opt.retries && !done; ++r) {
      std::vector<Rat> a(nv);
      for (auto& x : a) x = random_point(rng);
      try {
        auto [lv, rv] = eval_line_rat(l.eq, a);
        if (lv != rv) fail("sides evaluate differently at a sample point");
        done = true;
      } catch (const DivZero&) {
      }
    }
    if (!done) fail("every sample hit a division by zero");
  }
}

}  // namespace

Verdict check(const Proof& p, const CheckOptions& opt) {
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    try {
      check_line_syntax(p, i);
    } catch (const Fail& f) {
      return {false, i, std::string(law_name(p.lines[i].law)) + ": " + f.reason};
    }
  }
  if (opt.semantic) {
    for (std::size_t i = 0; i < p.lines.size(); ++i) {
      try {
        check_line_semantic(p, i, opt);
      } catch (const Fail& f) {
        return {false, i, "semantic: " + f.reason};
      }
    }
  }
  return {};
}

ProofStats proof_stats(const Proof& p) {
  ProofStats s;
  s.lines = p.lines.size();
  for (const ProofLine& l : p.lines) {
    s.total_nodes += l.eq.size();
    s.max_line_nodes = std::max(s.max_line_nodes, l.eq.size());
    s.max_depth = std::max(s.max_depth, depth(l.eq));
  }
  return s;
}

}  // namespace detpi
