#include <chrono>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "detpi/balancer.hpp"
#include "detpi/det_builder.hpp"
#include "detpi/evaluator.hpp"
#include "detpi/homogenizer.hpp"
#include "detpi/proof.hpp"
#include "detpi/proof_gen.hpp"
#include "detpi/rational_passes.hpp"
#include "detpi/text_io.hpp"

using namespace detpi;
using json = nlohmann::ordered_json;

namespace {

// Input or usage problem: exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Valid input that fails a verdict: exit code 1.
struct VerdictFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Io {
  std::string in, out, manifest;
};

struct Run {
  json manifest = json::object();
  std::string output;
  int code = 0;
};

void add_io(CLI::App* sub, Io& io, bool reads) {
  if (reads) sub->add_option("--in", io.in, "input file (default stdin)");
  sub->add_option("--out", io.out, "output file (default stdout); the manifest goes beside it");
  sub->add_option("--manifest", io.manifest, "manifest path");
}

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), {}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

std::vector<Int> parse_ints(const std::string& text) {
  std::vector<Int> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Int x;
    if (!parse_int(item, x)) throw UsageError("bad integer '" + item + "'");
    v.push_back(x);
  }
  return v;
}

std::vector<Rat> parse_rats(const std::string& text) {
  std::vector<Rat> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Rat x;
    if (item.empty() || x.set_str(item, 10) != 0) throw UsageError("bad rational '" + item + "'");
    x.canonicalize();
    if (x.get_den() == 0) throw UsageError("zero denominator in '" + item + "'");
    v.push_back(x);
  }
  return v;
}

IntMatrix matrix_arg(const std::string& text) {
  try {
    return parse_matrix_literal(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad matrix: ") + e.what());
  }
}

json circuit_metrics(const Circuit& c) {
  return {{"size", c.size()}, {"depth", depth(c)}, {"vars", c.var_count()}, {"outputs", c.outputs().size()},
          {"inv_gates", inv_count(c)}};
}

json proof_metrics(const Proof& p) {
  const ProofStats s = proof_stats(p);
  return {{"system", system_name(p.system)}, {"k", p.k},           {"lines", s.lines},
          {"total_nodes", s.total_nodes},    {"max_line_nodes", s.max_line_nodes}, {"max_depth", s.max_depth}};
}

bool is_proof_text(const std::string& text) {
  std::istringstream ss(text);
  std::string w;
  ss >> w;
  return w == "proof";
}

// [F] for a division-free single-output circuit.
Circuit balance_circuit(const Circuit& f, json& metrics) {
  const DegreeAnnotation w = syntactic_degrees(f, true);
  const auto d = static_cast<std::uint32_t>(w[f.root()]);
  HomogenizeOptions opt;
  opt.witness = &w;
  opt.constants_as_degree_one = true;
  opt.prune_zeros = true;
  const AnnotatedCircuit summed = sum_components(homogenize(f, d, opt));
  BalanceReport rep;
  Circuit out = balance(summed.circuit, summed.annotation, &rep);
  metrics["degree"] = rep.degree;
  metrics["depth_bound"] = balance_depth_bound(summed.circuit.size(), d);
  return out;
}

Run cmd_build(const std::string& kind, std::uint32_t n) {
  Run r;
  Circuit c;
  if (kind == "det-inv") c = build_det_inv(MatrixLayout::full(n));
  else if (kind == "taydet") c = build_taydet(n);
  else if (kind == "taydet-sharp") c = build_taydet_sharp(n);
  else if (kind == "taydet-sharp-prime") c = build_taydet_sharp_prime(n);
  else c = build_det_balanced(n);
  r.output = encode(c);
  r.manifest["metrics"] = circuit_metrics(c);
  return r;
}

struct PassArgs {
  std::uint32_t k = 0, z = 0, d = 0;
  bool witness = false;
  std::string rho;
};

Run cmd_pass(const std::string& name, const PassArgs& a, const std::string& text, const CLI::App& sub) {
  Run r;
  const Circuit f = decode(text);
  auto need = [&](const char* opt) {
    if (sub.count(opt) == 0) throw UsageError(name + " needs " + opt);
  };
  Circuit out;
  json m;
  if (name == "num-den") {
    out = num_den_joint(f);
  } else if (name == "normalize-div") {
    out = normalize_division(f);
  } else if (name == "coef") {
    need("--k");
    need("--z");
    out = coef(f, a.k, a.z);
  } else if (name == "inv-k") {
    need("--k");
    out = inv_k(f, a.k);
  } else if (name == "homogenize") {
    need("--d");
    HomogenizeOptions opt;
    DegreeAnnotation w;
    if (a.witness) {
      w = exact_degree_witness(f);
      opt.witness = &w;
    }
    out = homogenize(f, a.d, opt).circuit;
  } else if (name == "simplify-zeros") {
    const SimplifyResult s = simplify_zeros(f);
    out = s.circuit;
    m["rewrites"] = s.trace.size();
  } else if (name == "eliminate-div") {
    need("--rho");
    need("--k");
    out = eliminate_division(f, parse_ints(a.rho), a.k);
  } else {
    out = balance_circuit(f, m);
  }
  r.output = encode(out);
  m.update(circuit_metrics(out));
  r.manifest["metrics"] = m;
  return r;
}

Run cmd_eval(const std::string& matrix, const std::string& assign, const std::string& text) {
  Run r;
  const Circuit f = decode(text);
  std::vector<Rat> a;
  if (!matrix.empty()) {
    for (const auto& row : matrix_arg(matrix))
      for (const Int& x : row) a.emplace_back(x);
  } else {
    a = parse_rats(assign);
  }
  if (a.size() > f.var_count()) throw UsageError("assignment has more values than the circuit has variables");
  // variables past the matrix entries (such as z) are set to 0
  a.resize(f.var_count(), Rat(0));
  std::vector<Rat> v;
  try {
    v = eval_rat(f, a);
  } catch (const EvalError& e) {
    throw VerdictFailure(e.what());
  }
  json vals = json::array();
  for (const Rat& x : v) {
    r.output += to_string(x) + "\n";
    vals.push_back(to_string(x));
  }
  r.manifest["metrics"] = {{"values", vals}};
  return r;
}

Run cmd_oracle(const std::string& kind, const std::string& matrix, std::size_t cap, const std::string& in_path) {
  Run r;
  if (kind == "det" || kind == "charpoly") {
    if (matrix.empty()) throw UsageError(kind + " needs --matrix");
    const IntMatrix m = matrix_arg(matrix);
    if (kind == "det") {
      r.output = to_string(bareiss_det(m)) + "\n";
    } else {
      for (const Int& c : char_poly_oracle(m)) r.output += to_string(c) + "\n";
    }
    return r;
  }
  const Circuit f = decode(read_input(in_path));
  try {
    for (const SparsePoly& p : expand(f, cap)) r.output += encode_poly(p, f.var_count());
  } catch (const TermCapExceeded& e) {
    throw VerdictFailure(e.what());
  }
  return r;
}

Proof pick(std::vector<Proof> ps, std::optional<std::uint32_t> component, std::uint32_t d, json& m) {
  json sizes = json::array();
  for (const Proof& p : ps) sizes.push_back(p.lines.size());
  m["component_lines"] = sizes;
  const std::uint32_t i = component.value_or(d);
  if (i >= ps.size()) throw UsageError("component out of range");
  m["component"] = i;
  return std::move(ps[i]);
}

Run cmd_prove(const std::string& kind, std::uint32_t n, std::optional<std::uint32_t> component) {
  Run r;
  if (n == 0) throw UsageError("--n must be at least 1");
  Proof p;
  json m;
  if (kind == "xxinv") {
    p = prove_xxinv(n);
  } else if (kind == "triangular") {
    p = prove_triangular(n);
  } else {
    PipelineResult res = pipeline_identity2(n);
    m["triangular_lines"] = res.triangular.lines.size();
    m["normalized_lines"] = res.normalized.lines.size();
    m["eliminated_lines"] = res.eliminated.proof.lines.size();
    m["good_gates"] = res.eliminated.good.size();
    p = pick(std::move(res.components), component, n, m);
  }
  r.output = encode_proof(p);
  m.update(proof_metrics(p));
  r.manifest["metrics"] = m;
  return r;
}

Run cmd_transform(const std::string& kind, const PassArgs& a, std::optional<std::uint32_t> component,
                  const std::string& text, const CLI::App& sub) {
  Run r;
  const Proof p = decode_proof(text);
  json m;
  Proof out;
  if (kind == "normalize") {
    out = normalize_proof(p);
  } else if (kind == "eliminate-div") {
    if (sub.count("--rho") == 0 || sub.count("--k") == 0) throw UsageError("eliminate-div needs --rho and --k");
    EliminationResult e = eliminate_division_proof(p, parse_ints(a.rho), a.k);
    m["good_gates"] = e.good.size();
    out = std::move(e.proof);
  } else if (kind == "homogenize") {
    if (sub.count("--d") == 0) throw UsageError("homogenize needs --d");
    out = pick(homogenize_proof(p, a.d), component, a.d, m);
  } else {
    BalanceProofReport rep;
    out = balance_proof(p, &rep);
    m["endpoint_depth"] = {rep.depth_lhs, rep.depth_rhs};
    m["endpoint_depth_bound"] = {rep.bound_lhs, rep.bound_rhs};
    m["max_line_depth"] = rep.max_line_depth;
  }
  r.output = encode_proof(out);
  m.update(proof_metrics(out));
  r.manifest["metrics"] = m;
  return r;
}

Run cmd_check(const std::string& mode, std::size_t trials, std::uint64_t seed, const std::string& text) {
  Run r;
  const Proof p = decode_proof(text);
  CheckOptions o;
  o.semantic = mode == "semantic";
  o.trials = trials;
  o.seed = seed;
  const Verdict v = check(p, o);
  r.output = v.ok ? "ok\n" : "fail line " + std::to_string(v.line) + ": " + v.reason + "\n";
  json verdict = {{"mode", mode}, {"ok", v.ok}};
  if (o.semantic) verdict["trials"] = trials;
  if (!v.ok) {
    verdict["line"] = v.line;
    verdict["reason"] = v.reason;
  }
  r.manifest["verdicts"] = json::array({verdict});
  r.manifest["metrics"] = proof_metrics(p);
  r.code = v.ok ? 0 : 1;
  return r;
}

Run cmd_stats(const std::string& text) {
  Run r;
  json m;
  if (is_proof_text(text)) {
    m = proof_metrics(decode_proof(text));
    m["kind"] = "proof";
  } else {
    m = circuit_metrics(decode(text));
    m["kind"] = "circuit";
  }
  r.output = m.dump(2) + "\n";
  r.manifest["metrics"] = m;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Determinant circuits, passes and PI proofs"};
  app.require_subcommand(1);

  Io io;
  std::string kind, matrix, assign, mode = "syntactic";
  std::uint32_t n = 0;
  std::size_t cap = 100000, trials = 100;
  std::uint64_t seed = 1;
  std::optional<std::uint32_t> component;
  PassArgs pa;

  auto* build = app.add_subcommand("build", "build a determinant circuit");
  build->add_option("kind", kind)->required()->check(
      CLI::IsMember({"det-inv", "taydet", "taydet-sharp", "taydet-sharp-prime", "det-balanced"}));
  build->add_option("--n", n)->required()->check(CLI::Range(1u, 64u));
  add_io(build, io, false);

  auto* pass = app.add_subcommand("pass", "apply a circuit pass");
  pass->add_option("name", kind)->required()->check(CLI::IsMember(
      {"num-den", "normalize-div", "coef", "inv-k", "homogenize", "simplify-zeros", "eliminate-div", "balance"}));
  pass->add_option("--k", pa.k);
  pass->add_option("--z", pa.z);
  pass->add_option("--d", pa.d);
  pass->add_flag("--witness", pa.witness, "use exact degrees as the witness");
  pass->add_option("--rho", pa.rho, "comma separated integers");
  add_io(pass, io, true);

  auto* eval = app.add_subcommand("eval", "exact evaluation");
  auto* mopt = eval->add_option("--matrix", matrix, "row-major entries, e.g. [[1,2],[3,4]]");
  eval->add_option("--assign", assign, "comma separated rationals")->excludes(mopt);
  add_io(eval, io, true);

  auto* oracle = app.add_subcommand("oracle", "reference computations");
  oracle->add_option("kind", kind)->required()->check(CLI::IsMember({"det", "charpoly", "expand"}));
  oracle->add_option("--matrix", matrix);
  oracle->add_option("--cap", cap, "term cap for expand");
  add_io(oracle, io, true);

  auto* prove = app.add_subcommand("prove", "generate a proof");
  prove->add_option("kind", kind)->required()->check(
      CLI::IsMember({"xxinv", "triangular", "pipeline-identity2"}));
  prove->add_option("--n", n)->required()->check(CLI::Range(1u, 16u));
  prove->add_option("--component", component, "pipeline component (default n)");
  add_io(prove, io, false);

  auto* transform = app.add_subcommand("transform-proof", "transform a proof");
  transform->add_option("kind", kind)->required()->check(
      CLI::IsMember({"normalize", "eliminate-div", "homogenize", "balance"}));
  transform->add_option("--rho", pa.rho, "comma separated integers");
  transform->add_option("--k", pa.k);
  transform->add_option("--d", pa.d);
  transform->add_option("--component", component, "homogeneous component (default d)");
  add_io(transform, io, true);

  auto* chk = app.add_subcommand("check", "check a proof");
  chk->add_option("--mode", mode)->check(CLI::IsMember({"syntactic", "semantic"}));
  chk->add_option("--trials", trials);
  chk->add_option("--seed", seed);
  add_io(chk, io, true);

  auto* stats = app.add_subcommand("stats", "circuit or proof statistics");
  add_io(stats, io, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  json params = json::object();
  for (const CLI::Option* o : sub->get_options()) {
    if (o->get_name() == "--help" || o->count() == 0 || o->get_name() == "--in" || o->get_name() == "--out" ||
        o->get_name() == "--manifest")
      continue;
    params[o->get_name()] = o->as<std::string>();
  }

  const auto t0 = std::chrono::steady_clock::now();
  Run r;
  try {
    const std::string name = sub->get_name();
    if (name == "build") r = cmd_build(kind, n);
    else if (name == "pass") r = cmd_pass(kind, pa, read_input(io.in), *sub);
    else if (name == "eval") {
      if (matrix.empty() && eval->count("--assign") == 0) throw UsageError("eval needs --matrix or --assign");
      r = cmd_eval(matrix, assign, read_input(io.in));
    } else if (name == "oracle") r = cmd_oracle(kind, matrix, cap, io.in);
    else if (name == "prove") r = cmd_prove(kind, n, component);
    else if (name == "transform-proof") r = cmd_transform(kind, pa, component, read_input(io.in), *sub);
    else if (name == "check") r = cmd_check(mode, trials, seed, read_input(io.in));
    else r = cmd_stats(read_input(io.in));
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const VerdictFailure& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 1;
  } catch (const ProofError& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  try {
    if (io.out.empty()) std::cout << r.output;
    else write_file(io.out, r.output);

    std::string manifest_path = io.manifest;
    if (manifest_path.empty() && !io.out.empty()) manifest_path = io.out + ".manifest.json";
    if (!manifest_path.empty()) {
      json m;
      m["command"] = sub->get_name();
      if (!kind.empty()) m["kind"] = kind;
      m["inputs"] = io.in.empty() ? json::array() : json::array({io.in});
      m["parameters"] = params;
      m["outputs"] = io.out.empty() ? json::array() : json::array({io.out});
      m["metrics"] = r.manifest.value("metrics", json::object());
      m["verdicts"] = r.manifest.value("verdicts", json::array());
      m["timing"] = {{"wall_ms", ms}};
      write_file(manifest_path, m.dump(2) + "\n");
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return r.code;
}
