#include "detpi/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "detpi/text_io.hpp"

namespace detpi {

namespace {

template <class T>
std::vector<T> eval_nodes(const Graph& g, std::span<const NodeId> roots, const std::vector<T>& a,
                          bool allow_inv) {
  const std::vector<char> mask = reachable_mask(g, roots);
  std::vector<T> val(g.size());
  for (NodeId x = 0; x < g.size(); ++x) {
    if (!mask[x]) continue;
    const Node& n = g.node(x);
    switch (n.op) {
      case Op::Var:
        if (n.a >= a.size()) throw EvalError(x, "assignment does not cover var " + std::to_string(n.a));
        val[x] = a[n.a];
        break;
      case Op::Const: val[x] = T(g.value(x)); break;
      case Op::Add: val[x] = val[n.a] + val[n.b]; break;
      case Op::Mul: val[x] = val[n.a] * val[n.b]; break;
      case Op::Inv:
        if constexpr (std::is_same_v<T, Rat>) {
          if (!allow_inv) throw EvalError(x, "division gate in integer evaluation");
          if (val[n.a] == 0) throw EvalError(x, "division by zero");
          val[x] = 1 / val[n.a];
        } else {
          throw EvalError(x, "division gate in integer evaluation");
        }
        break;
    }
  }
  return val;
}

}  // namespace

std::vector<Rat> eval_rat(const Circuit& f, const std::vector<Rat>& a) {
  const auto val = eval_nodes<Rat>(f, f.outputs(), a, true);
  std::vector<Rat> out;
  for (NodeId o : f.outputs()) out.push_back(val[o]);
  return out;
}

Rat eval_rat_node(const Graph& g, NodeId root, const std::vector<Rat>& a) {
  const NodeId roots[1] = {root};
  return eval_nodes<Rat>(g, roots, a, true)[root];
}

std::vector<Int> eval_int(const Circuit& f, const std::vector<Int>& a) {
  const auto val = eval_nodes<Int>(f, f.outputs(), a, false);
  std::vector<Int> out;
  for (NodeId o : f.outputs()) out.push_back(val[o]);
  return out;
}

Int eval_int_node(const Graph& g, NodeId root, const std::vector<Int>& a) {
  const NodeId roots[1] = {root};
  return eval_nodes<Int>(g, roots, a, false)[root];
}

// ---- SparsePoly --------------------------------------------------------

SparsePoly SparsePoly::constant(const Int& c) {
  SparsePoly p;
  if (c != 0) p.terms_.emplace(Monomial{}, c);
  return p;
}

SparsePoly SparsePoly::variable(std::uint32_t v) {
  SparsePoly p;
  p.terms_.emplace(Monomial{{v, 1}}, Int(1));
  return p;
}

void SparsePoly::add_term(const Monomial& m, const Int& c) {
  if (c == 0) return;
  auto [it, fresh] = terms_.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

SparsePoly SparsePoly::operator+(const SparsePoly& o) const {
  SparsePoly r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

SparsePoly SparsePoly::operator-(const SparsePoly& o) const {
  SparsePoly r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
  return r;
}

namespace {
SparsePoly::Monomial mono_mul(const SparsePoly::Monomial& a, const SparsePoly::Monomial& b) {
  SparsePoly::Monomial r;
  r.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      r.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      r.push_back(b[j++]);
    } else {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return r;
}
}  // namespace

SparsePoly SparsePoly::operator*(const SparsePoly& o) const {
  SparsePoly r;
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) r.add_term(mono_mul(ma, mb), ca * cb);
  return r;
}

SparsePoly SparsePoly::scaled(const Int& c) const {
  SparsePoly r;
  if (c == 0) return r;
  for (const auto& [m, v] : terms_) r.terms_.emplace(m, v * c);
  return r;
}

std::uint64_t SparsePoly::degree_of(const Monomial& m) {
  std::uint64_t d = 0;
  for (const auto& [v, e] : m) d += e;
  return d;
}

std::int64_t SparsePoly::total_degree() const {
  std::int64_t d = -1;
  for (const auto& [m, c] : terms_) d = std::max<std::int64_t>(d, static_cast<std::int64_t>(degree_of(m)));
  return d;
}

SparsePoly SparsePoly::homogeneous_part(std::uint64_t d) const {
  SparsePoly r;
  for (const auto& [m, c] : terms_)
    if (degree_of(m) == d) r.terms_.emplace(m, c);
  return r;
}

bool SparsePoly::is_homogeneous(std::uint64_t d) const {
  for (const auto& [m, c] : terms_)
    if (degree_of(m) != d) return false;
  return true;
}

SparsePoly SparsePoly::coefficient_of(std::uint32_t var, std::uint32_t k) const {
  SparsePoly r;
  for (const auto& [m, c] : terms_) {
    std::uint32_t e = 0;
    Monomial rest;
    for (const auto& p : m) {
      if (p.first == var) {
        e = p.second;
      } else {
        rest.push_back(p);
      }
    }
    if (e == k) r.add_term(rest, c);
  }
  return r;
}

SparsePoly SparsePoly::substitute(std::uint32_t var, const SparsePoly& p) const {
  SparsePoly r;
  std::map<std::uint32_t, SparsePoly> powers;
  for (const auto& [m, c] : terms_) {
    std::uint32_t e = 0;
    Monomial rest;
    for (const auto& q : m) {
      if (q.first == var) {
        e = q.second;
      } else {
        rest.push_back(q);
      }
    }
    SparsePoly term;
    term.terms_.emplace(rest, c);
    if (e > 0) {
      auto it = powers.find(e);
      if (it == powers.end()) {
        SparsePoly pw = SparsePoly::constant(1);
        for (std::uint32_t i = 0; i < e; ++i) pw = pw * p;
        it = powers.emplace(e, std::move(pw)).first;
      }
      term = term * it->second;
    }
    r = r + term;
  }
  return r;
}

Int SparsePoly::evaluate(const std::vector<Int>& a) const {
  Int sum = 0;
  for (const auto& [m, c] : terms_) {
    Int t = c;
    for (const auto& [v, e] : m) {
      Int p;
      mpz_pow_ui(p.get_mpz_t(), a.at(v).get_mpz_t(), e);
      t *= p;
    }
    sum += t;
  }
  return sum;
}

Rat SparsePoly::evaluate(const std::vector<Rat>& a) const {
  Rat sum = 0;
  for (const auto& [m, c] : terms_) {
    Rat t = c;
    for (const auto& [v, e] : m)
      for (std::uint32_t i = 0; i < e; ++i) t *= a.at(v);
    sum += t;
  }
  return sum;
}

std::string SparsePoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << '-';
    first = false;
    const Int a = abs(c);
    const bool unit = a == 1 && !m.empty();
    if (!unit) os << detpi::to_string(a);
    bool firstv = true;
    for (const auto& [v, e] : m) {
      if (!unit || !firstv) os << '*';
      firstv = false;
      os << 'x' << v;
      if (e > 1) os << '^' << e;
    }
  }
  return os.str();
}

SparsePoly expand_node(const Graph& g, NodeId root, std::size_t term_cap) {
  const NodeId roots[1] = {root};
  const std::vector<char> mask = reachable_mask(g, roots);
  std::vector<SparsePoly> val(g.size());
  for (NodeId x = 0; x <= root; ++x) {
    if (!mask[x]) continue;
    const Node& n = g.node(x);
    switch (n.op) {
      case Op::Var: val[x] = SparsePoly::variable(n.a); break;
      case Op::Const: val[x] = SparsePoly::constant(g.value(x)); break;
      case Op::Add: val[x] = val[n.a] + val[n.b]; break;
      case Op::Mul:
        if (val[n.a].term_count() * val[n.b].term_count() > term_cap * 4) throw TermCapExceeded(term_cap);
        val[x] = val[n.a] * val[n.b];
        break;
      case Op::Inv: throw EvalError(x, "cannot expand a division gate");
    }
    if (val[x].term_count() > term_cap) throw TermCapExceeded(term_cap);
  }
  return val[root];
}

std::vector<SparsePoly> expand(const Circuit& f, std::size_t term_cap) {
  std::vector<SparsePoly> out;
  for (NodeId o : f.outputs()) out.push_back(expand_node(f, o, term_cap));
  return out;
}

std::string encode_poly(const SparsePoly& p, std::uint32_t var_count) {
  std::ostringstream os;
  os << "poly " << var_count << ' ' << p.term_count() << '\n';
  for (const auto& [m, c] : p.terms()) {
    std::vector<std::uint32_t> e(var_count, 0);
    for (const auto& [v, k] : m) {
      if (v >= var_count) throw std::invalid_argument("monomial variable outside var_count");
      e[v] = k;
    }
    for (std::uint32_t k : e) os << k << ' ';
    os << detpi::to_string(c) << '\n';
  }
  return os.str();
}

SparsePoly decode_poly(std::string_view text) {
  TextReader in(text);
  in.expect("poly");
  const std::uint32_t vars = in.read_u32();
  const std::uint32_t n = in.read_u32();
  SparsePoly p;
  for (std::uint32_t t = 0; t < n; ++t) {
    SparsePoly::Monomial m;
    for (std::uint32_t v = 0; v < vars; ++v) {
      const std::uint32_t e = in.read_u32();
      if (e) m.emplace_back(v, e);
    }
    p.add_term(m, in.read_int());
  }
  if (!in.at_end()) {
    in.token();
    in.fail("trailing data after polynomial");
  }
  return p;
}

// ---- matrices -----------------------------------------------------------

Int bareiss_det(IntMatrix m) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) throw std::invalid_argument("bareiss_det needs a square matrix");
  if (n == 0) return 1;
  Int sign = 1;
  Int prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && m[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(m[k], m[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m[i][j] = m[i][j] * m[k][k] - m[i][k] * m[k][j];
        mpz_divexact(m[i][j].get_mpz_t(), m[i][j].get_mpz_t(), prev.get_mpz_t());
      }
    }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

IntMatrix matrix_pow(const IntMatrix& m, std::uint64_t k) {
  IntMatrix result = identity_matrix(m.size());
  IntMatrix base = m;
  while (k) {
    if (k & 1) result = matrix_mul(result, base);
    k >>= 1;
    if (k) base = matrix_mul(base, base);
  }
  return result;
}

std::vector<Int> char_poly_oracle(const IntMatrix& a) {
  const std::size_t n = a.size();
  std::vector<Int> c(n + 1, 0);
  c[n] = 1;
  IntMatrix mk(n, std::vector<Int>(n, 0));
  for (std::size_t k = 1; k <= n; ++k) {
    IntMatrix next = matrix_mul(a, mk);
    for (std::size_t i = 0; i < n; ++i) next[i][i] += c[n - k + 1];
    mk = std::move(next);
    const IntMatrix am = matrix_mul(a, mk);
    Int tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += am[i][i];
    Int q = -tr;
    mpz_divexact_ui(q.get_mpz_t(), q.get_mpz_t(), k);
    c[n - k] = q;
  }
  return c;
}

std::string encode_matrix(const IntMatrix& m) {
  std::ostringstream os;
  os << "matrix " << m.size() << '\n';
  for (const auto& row : m) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? " " : "") << detpi::to_string(row[j]);
    os << '\n';
  }
  return os.str();
}

IntMatrix decode_matrix(std::string_view text) {
  TextReader in(text);
  in.expect("matrix");
  const std::uint32_t n = in.read_u32();
  IntMatrix m(n, std::vector<Int>(n));
  for (auto& row : m)
    for (auto& e : row) e = in.read_int();
  if (!in.at_end()) {
    in.token();
    in.fail("trailing data after matrix");
  }
  return m;
}

IntMatrix parse_matrix_literal(std::string_view text) {
  IntMatrix m;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) { throw FormatError(i, msg); };
  auto skip = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n')) ++i;
  };
  skip();
  if (i >= text.size() || text[i] != '[') fail("expected '['");
  ++i;
  while (true) {
    skip();
    if (i >= text.size()) fail("unterminated matrix");
    if (text[i] == ']') {
      ++i;
      break;
    }
    if (text[i] == ',') {
      ++i;
      continue;
    }
    if (text[i] != '[') fail("expected '['");
    ++i;
    std::vector<Int> row;
    while (true) {
      skip();
      if (i >= text.size()) fail("unterminated row");
      if (text[i] == ']') {
        ++i;
        break;
      }
      if (text[i] == ',') {
        ++i;
        continue;
      }
      const std::size_t start = i;
      while (i < text.size() && (text[i] == '-' || text[i] == '+' || (text[i] >= '0' && text[i] <= '9'))) ++i;
      Int v;
      if (!parse_int(text.substr(start, i - start), v)) {
        i = start;
        fail("expected an integer entry");
      }
      row.push_back(v);
    }
    m.push_back(std::move(row));
  }
  skip();
  if (i != text.size()) fail("trailing data after matrix");
  for (const auto& row : m)
    if (row.size() != m.size()) throw FormatError(0, "matrix is not square");
  return m;
}

Int sample_int(std::mt19937_64& rng) {
  // 2^32 + 1 values: [-2^31, 2^31].
  std::uniform_int_distribution<std::int64_t> d(-(std::int64_t{1} << 31), std::int64_t{1} << 31);
  return Int(static_cast<long>(d(rng)));
}

SamplingVerdict sample_equal(const Graph& ga, NodeId ra, const Graph& gb, NodeId rb,
                             std::uint32_t var_count, std::uint64_t degree_bound,
                             std::size_t trials, std::mt19937_64& rng) {
  SamplingVerdict v;
  std::vector<Int> a(var_count);
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& x : a) x = sample_int(rng);
    ++v.trials;
    if (eval_int_node(ga, ra, a) != eval_int_node(gb, rb, a)) {
      v.equal = false;
      v.failure_bound = 0.0;
      return v;
    }
  }
  const double per = std::min(1.0, static_cast<double>(degree_bound) / 4294967297.0);
  v.failure_bound = std::pow(per, static_cast<double>(trials));
  return v;
}

}  // namespace detpi
