#include "detpi/text_io.hpp"

#include <sstream>

namespace detpi {

void TextReader::skip_space() {
  while (pos_ < text_.size()) {
    const char c = text_[pos_];
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      ++pos_;
    } else if (c == '#') {
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    } else {
      break;
    }
  }
}

bool TextReader::at_end() {
  skip_space();
  return pos_ >= text_.size();
}

std::string_view TextReader::token() {
  skip_space();
  tok_start_ = pos_;
  if (pos_ >= text_.size()) fail("unexpected end of input");
  const std::size_t start = pos_;
  while (pos_ < text_.size()) {
    const char c = text_[pos_];
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') break;
    ++pos_;
  }
  return text_.substr(start, pos_ - start);
}

std::string_view TextReader::peek() {
  const std::size_t save = pos_;
  const std::size_t save_tok = tok_start_;
  skip_space();
  if (pos_ >= text_.size()) {
    pos_ = save;
    return {};
  }
  const std::string_view t = token();
  pos_ = save;
  tok_start_ = save_tok;
  return t;
}

void TextReader::expect(std::string_view word) {
  const std::string_view t = token();
  if (t != word) fail("expected '" + std::string(word) + "', found '" + std::string(t) + "'");
}

std::uint64_t TextReader::read_u64() {
  const std::string_view t = token();
  if (t.empty() || t.size() > 19) fail("expected a natural number");
  std::uint64_t v = 0;
  for (char c : t) {
    if (c < '0' || c > '9') fail("expected a natural number, found '" + std::string(t) + "'");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

std::uint32_t TextReader::read_u32() {
  const std::uint64_t v = read_u64();
  if (v > 0xfffffffeULL) fail("number out of range");
  return static_cast<std::uint32_t>(v);
}

Int TextReader::read_int() {
  const std::string_view t = token();
  Int v;
  if (!parse_int(t, v)) fail("expected an integer, found '" + std::string(t) + "'");
  return v;
}

void encode_to(std::string& out, const Circuit& c) {
  std::ostringstream os;
  os << "circuit 1\n";
  os << "vars " << c.var_count() << "\n";
  os << "outputs " << c.outputs().size();
  for (NodeId o : c.outputs()) os << ' ' << o;
  os << "\nnodes " << c.size() << "\n";
  for (NodeId i = 0; i < c.size(); ++i) {
    const Node& n = c.node(i);
    os << i << ' ' << op_name(n.op);
    switch (n.op) {
      case Op::Var: os << ' ' << n.a; break;
      case Op::Const: os << ' ' << to_string(c.value(i)); break;
      case Op::Inv: os << ' ' << n.a; break;
      default: os << ' ' << n.a << ' ' << n.b;
    }
    os << '\n';
  }
  os << "end\n";
  out += os.str();
}

std::string encode(const Circuit& c) {
  std::string s;
  encode_to(s, c);
  return s;
}

Circuit read_circuit(TextReader& in) {
  in.expect("circuit");
  if (in.read_u32() != 1) in.fail("unsupported circuit format version");
  in.expect("vars");
  const std::uint32_t vars = in.read_u32();
  in.expect("outputs");
  const std::uint32_t nout = in.read_u32();
  if (nout == 0) in.fail("a circuit needs at least one output");
  std::vector<NodeId> outs(nout);
  for (auto& o : outs) o = in.read_u32();
  in.expect("nodes");
  const std::uint32_t n = in.read_u32();
  std::vector<Node> nodes;
  std::vector<Int> consts;
  nodes.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (in.read_u32() != i) in.fail("node ids must be consecutive from 0");
    const std::string_view tag = in.token();
    Node node;
    if (tag == "var") {
      node.op = Op::Var;
      node.a = in.read_u32();
      if (node.a >= vars) in.fail("var index exceeds declared var count");
    } else if (tag == "const") {
      node.op = Op::Const;
      consts.push_back(in.read_int());
      node.a = static_cast<std::uint32_t>(consts.size() - 1);
    } else if (tag == "add" || tag == "mul") {
      node.op = tag == "add" ? Op::Add : Op::Mul;
      node.a = in.read_u32();
      if (node.a >= i) in.fail("child id must be smaller than node id");
      node.b = in.read_u32();
      if (node.b >= i) in.fail("child id must be smaller than node id");
    } else if (tag == "inv") {
      node.op = Op::Inv;
      node.a = in.read_u32();
      if (node.a >= i) in.fail("child id must be smaller than node id");
    } else {
      in.fail("unknown node kind '" + std::string(tag) + "'");
    }
    nodes.push_back(node);
  }
  in.expect("end");
  for (NodeId o : outs)
    if (o >= n) in.fail("output id out of range");
  return Circuit::from_parts(std::move(nodes), std::move(consts), std::move(outs), vars);
}

Circuit decode(std::string_view text) {
  TextReader in(text);
  Circuit c = read_circuit(in);
  if (!in.at_end()) {
    in.token();
    in.fail("trailing data after circuit");
  }
  return c;
}

std::string to_dot(const Circuit& c, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n";
  for (NodeId i = 0; i < c.size(); ++i) {
    const Node& n = c.node(i);
    os << "  n" << i << " [label=\"";
    switch (n.op) {
      case Op::Var: os << 'x' << n.a; break;
      case Op::Const: os << to_string(c.value(i)); break;
      case Op::Add: os << '+'; break;
      case Op::Mul: os << '*'; break;
      case Op::Inv: os << "inv"; break;
    }
    os << "\"];\n";
    const int ar = c.arity(i);
    if (ar >= 1) os << "  n" << n.a << " -> n" << i << ";\n";
    if (ar == 2) os << "  n" << n.b << " -> n" << i << ";\n";
  }
  for (NodeId o : c.outputs()) os << "  n" << o << " [shape=doublecircle];\n";
  os << "}\n";
  return os.str();
}

}  // namespace detpi
