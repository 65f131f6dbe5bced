// Command-line front end: parsing, checking, proving, compression,
// verification, encodings and the benchmark harness.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "mlnd/bench.hpp"
#include "mlnd/compressor.hpp"
#include "mlnd/dot.hpp"
#include "mlnd/encodings.hpp"
#include "mlnd/json_io.hpp"
#include "mlnd/lm_prover.hpp"
#include "mlnd/nd_dag.hpp"
#include "mlnd/nd_tree.hpp"
#include "mlnd/sequent.hpp"

namespace {

using namespace mlnd;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kInputError = 2;

struct Options {
  std::string input;
  std::string output;
  std::string format = "json";
  std::string goal;
  std::string formula;
  std::size_t bound_mult = 2;
  std::uint64_t seed = 7;
  std::size_t count = 100;
  std::size_t max_weight = 40;
  std::size_t max_n = 4;
  bool pure = false;
};

/// An input problem tied to a file (and line, when known).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  if (path.empty()) throw InputError("no --input given");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_of(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

Json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return detail::parse_json_text(text);
  } catch (const ParseError& e) {
    throw InputError(path + ":" + std::to_string(line_of(text, e.offset())) + ": " + e.what());
  }
}

void emit(const Options& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw InputError(o.output + ": cannot write");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void require_format(const Options& o, std::initializer_list<const char*> allowed) {
  for (const char* f : allowed)
    if (o.format == f) return;
  std::string list;
  for (const char* f : allowed) list += std::string(list.empty() ? "" : ", ") + f;
  throw InputError("--format must be one of: " + list);
}

template <typename T>
T load(const Options& o, FormulaTable& table, T (*from_json)(FormulaTable&, const Json&)) {
  const Json j = read_json(o.input);
  try {
    return from_json(table, j);
  } catch (const ParseError& e) {
    throw InputError(o.input + ": " + e.what());
  }
}

Sequent goal_sequent(FormulaTable& table, const std::string& text) {
  if (text.find("=>") == std::string::npos) return Sequent({}, table.parse(text));
  return parse_sequent(table, text);
}

std::string report_violations(const std::vector<Violation>& vs) {
  std::string out;
  for (const Violation& v : vs) out += "  node " + std::to_string(v.node) + ": " + v.reason + "\n";
  return out;
}

int cmd_parse(const Options& o) {
  require_format(o, {"json", "text"});
  FormulaTable table;
  std::string text = o.formula;
  if (text.empty()) text = read_file(o.input);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  if (text.find("=>") != std::string::npos) {
    const Sequent s = parse_sequent(table, text);
    if (o.format == "text") {
      emit(o, format_sequent(table, s) + "\nweight " + std::to_string(sequent_weight(table, s)));
    } else {
      emit(o, Json{{"sequent", format_sequent(table, s)}, {"weight", sequent_weight(table, s)}}.dump(2));
    }
    return kOk;
  }
  const Formula f = table.parse(text);
  if (o.format == "text") {
    emit(o, table.format(f) + "\nweight " + std::to_string(table.weight(f)) + "\nsubformulas " +
                std::to_string(table.subformulas(f).size()));
  } else {
    emit(o, Json{{"formula", table.format(f)},
                 {"weight", table.weight(f)},
                 {"subformulas", table.subformulas(f).size()}}
                .dump(2));
  }
  return kOk;
}

int cmd_check_tree(const Options& o) {
  require_format(o, {"json", "text"});
  FormulaTable table;
  const TreeDeduction d = load(o, table, tree_from_json);
  const TreeReport r = check_tree(table, d);
  Json j{{"locally_correct", r.locally_correct}};
  if (r.locally_correct) {
    const TreeMetrics m = tree_metrics(table, d);
    j["proves"] = proves_tree(d);
    j["conclusion"] = table.format(d.conclusion());
    j["h"] = m.h;
    j["phi"] = m.phi;
    j["w"] = m.w;
    j["normal"] = m.normal;
    j["weak_subformula"] = m.weak_subformula;
  }
  Json vs = Json::array();
  for (const Violation& v : r.violations) vs.push_back(Json{{"node", v.node}, {"reason", v.reason}});
  j["violations"] = vs;
  if (o.format == "text") {
    std::string out = r.locally_correct ? "locally correct\n" : "not locally correct\n";
    if (r.locally_correct) out += std::string(j["proves"].get<bool>() ? "proves " : "does not prove ") + table.format(d.conclusion()) + "\n";
    emit(o, out + report_violations(r.violations));
  } else {
    emit(o, j.dump(2));
  }
  return r.locally_correct ? kOk : kNegative;
}

int cmd_check_dag(const Options& o) {
  require_format(o, {"json", "text"});
  FormulaTable table;
  const DagDeduction d = load(o, table, dag_from_json);
  const DagReport r = check_dag(table, d);
  Json j{{"correct", r.correct}};
  bool af_ok = false;
  if (r.correct) {
    try {
      const AfTable t = compute_af(table, d);
      const AfCorrectness c = check_af_correctness_report(table, d, t);
      af_ok = c.ok;
      Json vs = Json::array();
      for (const Violation& v : c.violations) vs.push_back(Json{{"node", v.node}, {"reason", v.reason}});
      j["af_correct"] = c.ok;
      j["af_violations"] = vs;
    } catch (const IncompleteF& e) {
      j["af_correct"] = false;
      j["af_violations"] = Json::array({Json{{"reason", e.what()}}});
    }
  }
  Json vs = Json::array();
  for (const Violation& v : r.violations) vs.push_back(Json{{"node", v.node}, {"reason", v.reason}});
  j["violations"] = vs;
  if (o.format == "text") {
    std::string out = r.correct ? "well formed\n" : "malformed\n";
    if (r.correct) out += af_ok ? "A_f-correct\n" : "not A_f-correct\n";
    emit(o, out + report_violations(r.violations));
  } else {
    emit(o, j.dump(2));
  }
  return r.correct && af_ok ? kOk : kNegative;
}

int cmd_prove_lm(const Options& o) {
  require_format(o, {"json", "text"});
  if (o.goal.empty()) throw InputError("prove-lm needs --goal");
  FormulaTable table;
  const Sequent goal = goal_sequent(table, o.goal);
  ProveOptions opts;
  opts.bound_mult = o.bound_mult;
  const ProveResult r = prove_lm(table, goal, opts);
  if (r.status != ProveStatus::Proved) {
    std::string msg = r.status == ProveStatus::BudgetExceeded
                          ? "node budget exceeded after " + std::to_string(r.nodes_explored) + " sequents"
                          : "unproved at bound " + std::to_string(r.depth_bound);
    if (!r.caveat.empty()) msg += " (" + r.caveat + ")";
    std::cerr << msg << "\n";
    return kNegative;
  }
  if (o.format == "text") {
    std::string out;
    for (std::uint32_t i = 0; i < r.proof->nodes.size(); ++i) {
      const LmNode& n = r.proof->nodes[i];
      out += std::to_string(i) + " " + rule_name(n.rule) + "  " + format_sequent(table, n.conclusion);
      if (!n.premises.empty()) {
        out += "  from";
        for (auto p : n.premises) out += " " + std::to_string(p);
      }
      out += "\n";
    }
    emit(o, out);
  } else {
    emit(o, lm_to_json(table, *r.proof).dump(2));
  }
  return kOk;
}

TreeDeduction tree_input(const Options& o, FormulaTable& table) {
  if (!o.goal.empty()) {
    ProveOptions opts;
    opts.bound_mult = o.bound_mult;
    const ProveResult r = prove_lm(table, goal_sequent(table, o.goal), opts);
    if (r.status != ProveStatus::Proved) throw InputError("goal is not proved at the given bound");
    return translate_lm_to_nd(table, *r.proof);
  }
  return load(o, table, tree_from_json);
}

int cmd_translate(const Options& o) {
  require_format(o, {"json", "dot"});
  FormulaTable table;
  TreeDeduction t;
  if (!o.goal.empty()) {
    t = tree_input(o, table);
  } else {
    const LmProof p = load(o, table, lm_from_json);
    if (!check_lm(table, p)) throw InputError(o.input + ": proof does not check");
    t = translate_lm_to_nd(table, p);
  }
  emit(o, o.format == "dot" ? tree_to_dot(table, t) : tree_to_json(table, t).dump(2));
  return kOk;
}

int cmd_compress(const Options& o) {
  require_format(o, {"json", "dot"});
  FormulaTable table;
  const TreeDeduction t = tree_input(o, table);
  Certified c;
  try {
    c = compress_and_certify(table, t);
  } catch (const PipelineError& e) {
    if (e.stage() == "input" || e.stage() == "level" || e.stage() == "compress") throw InputError(e.what());
    throw;
  }
  if (o.format == "dot") {
    emit(o, dag_to_dot(table, c.dag));
  } else {
    emit(o, Json{{"dag", dag_to_json(table, c.dag)},
                 {"metrics", metrics_to_json(c.metrics)},
                 {"verified", c.verified}}
                .dump(2));
  }
  return c.verified ? kOk : kNegative;
}

int cmd_verify(const Options& o) {
  require_format(o, {"json", "text"});
  FormulaTable table;
  Json j = read_json(o.input);
  if (j.is_object() && j.contains("dag")) j = j.at("dag");
  DagDeduction d;
  try {
    d = dag_from_json(table, j);
  } catch (const ParseError& e) {
    throw InputError(o.input + ": " + e.what());
  }
  const DagReport r = check_dag(table, d);
  if (!r.correct) throw InputError(o.input + ": malformed dag\n" + report_violations(r.violations));
  DagVerdict v;
  try {
    v = verify_dag_report(table, d);
  } catch (const IncompleteF& e) {
    std::cerr << e.what() << "\n";
    return kNegative;
  }
  Json open = Json::array();
  for (Formula f : v.open_at_root) open.push_back(table.format(f));
  if (o.format == "text") {
    emit(o, std::string(v.proves ? "proves " : "does not prove ") + table.format(d.conclusion()));
  } else {
    emit(o, Json{{"proves", v.proves},
                 {"af_correct", v.af_correct},
                 {"conclusion", table.format(d.conclusion())},
                 {"open_at_root", open},
                 {"checker_steps", v.steps}}
                .dump(2));
  }
  return v.proves ? kOk : kNegative;
}

int cmd_unfold(const Options& o) {
  require_format(o, {"json", "dot"});
  FormulaTable table;
  Json j = read_json(o.input);
  if (j.is_object() && j.contains("dag")) j = j.at("dag");
  DagDeduction d;
  try {
    d = dag_from_json(table, j);
  } catch (const ParseError& e) {
    throw InputError(o.input + ": " + e.what());
  }
  if (!check_dag(table, d).correct) throw InputError(o.input + ": malformed dag");
  if (!verify_dag(table, d)) {
    std::cerr << "dag does not verify; nothing to unfold\n";
    return kNegative;
  }
  TreeDeduction t = unfold_dag(table, d);
  if (o.pure) t = eliminate_repetitions(t);
  emit(o, o.format == "dot" ? tree_to_dot(table, t) : tree_to_json(table, t).dump(2));
  return kOk;
}

int cmd_encode_ham(const Options& o) {
  require_format(o, {"json", "text"});
  const std::string text = read_file(o.input);
  DiGraph g;
  try {
    g = parse_graph(text);
  } catch (const ParseError& e) {
    throw InputError(o.input + ":" + std::to_string(e.line()) + ": " + e.what());
  }
  FullTable ft;
  const HamEncoding enc = encode_alpha(ft, g);
  FormulaTable table;
  const StatmanMap sm = statman_translate(ft, ft.imp(enc.alpha, ft.falsum()), table);
  Json manifest{{"graph", o.input},
                {"vertices", g.size()},
                {"edges", g.edges.size()},
                {"variables", enc.variable_count},
                {"alpha_size", ft.size(enc.alpha)},
                {"rho_weight", table.weight(sm.result)},
                {"rho_axioms", sm.axioms.size()}};
  if (g.size() <= 10) manifest["hamiltonian"] = hamiltonicity_oracle(g);
  if (enc.variable_count <= kMaxSatVariables) manifest["alpha_satisfiable"] = classical_sat(ft, enc.alpha);

  if (!o.output.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(o.output);
    std::ofstream(fs::path(o.output) / "alpha.txt") << ft.format(enc.alpha) << "\n";
    std::ofstream(fs::path(o.output) / "rho.txt") << table.format(sm.result) << "\n";
    manifest["alpha_file"] = "alpha.txt";
    manifest["rho_file"] = "rho.txt";
    std::ofstream(fs::path(o.output) / "manifest.json") << manifest.dump(2) << "\n";
    return kOk;
  }
  if (o.format == "text") {
    std::cout << "alpha " << ft.format(enc.alpha) << "\nrho " << table.format(sm.result) << "\n";
  } else {
    manifest["alpha"] = ft.format(enc.alpha);
    manifest["rho"] = table.format(sm.result);
    std::cout << manifest.dump(2) << "\n";
  }
  return kOk;
}

int cmd_bench(const Options& o) {
  BenchConfig cfg;
  cfg.seed = o.seed;
  cfg.count = o.count;
  cfg.max_weight = o.max_weight;
  cfg.max_n = o.max_n;
  cfg.bound_mult = o.bound_mult;
  const BenchReport rep = run_bench(cfg);
  const Json summary = summary_to_json(cfg, rep);
  if (o.output.empty()) {
    std::cout << summary.dump(2) << "\n";
  } else {
    namespace fs = std::filesystem;
    fs::create_directories(o.output);
    std::ofstream records(fs::path(o.output) / "records.jsonl");
    std::ofstream timing(fs::path(o.output) / "timing.jsonl");
    for (const BenchRecord& r : rep.records) {
      records << record_to_json(r).dump() << "\n";
      timing << Json{{"index", r.index}, {"wall_time", r.wall_time}}.dump() << "\n";
    }
    std::ofstream(fs::path(o.output) / "summary.json") << summary.dump(2) << "\n";
  }
  return rep.verify_fraction == 1.0 && rep.bound_fraction == 1.0 ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural deduction proofs for minimal implicational logic: trees, dags and compression"};
  app.require_subcommand(1);
  Options o;

  auto io = [&](CLI::App* sub, bool output = true) {
    sub->add_option("--input,-i", o.input, "Input file");
    if (output) sub->add_option("--output,-o", o.output, "Output file (default: stdout)");
    sub->add_option("--format,-f", o.format, "Output format: json, dot or text");
  };

  auto* parse = app.add_subcommand("parse", "Parse a formula or sequent and report its weight");
  io(parse);
  parse->add_option("--formula", o.formula, "Formula or sequent text (instead of --input)");

  auto* check_tree_cmd = app.add_subcommand("check-tree", "Check a tree deduction (JSON)");
  io(check_tree_cmd);
  auto* check_dag_cmd = app.add_subcommand("check-dag", "Check a dag deduction (JSON), including A_f-correctness");
  io(check_dag_cmd);

  auto* prove = app.add_subcommand("prove-lm", "Backward proof search in the sequent calculus");
  io(prove);
  prove->add_option("--goal", o.goal, "Goal sequent, e.g. \"=> p->p\"");
  prove->add_option("--bound-mult", o.bound_mult, "Depth bound as a multiple of the goal weight");

  auto* translate = app.add_subcommand("translate", "Translate a sequent proof (JSON) into a tree deduction");
  io(translate);
  translate->add_option("--goal", o.goal, "Prove this goal first instead of reading --input");
  translate->add_option("--bound-mult", o.bound_mult, "Depth bound multiplier for --goal");

  auto* compress_cmd = app.add_subcommand("compress", "Compress and certify a tree proof");
  io(compress_cmd);
  compress_cmd->add_option("--goal", o.goal, "Prove this goal first instead of reading --input");
  compress_cmd->add_option("--bound-mult", o.bound_mult, "Depth bound multiplier for --goal");

  auto* verify = app.add_subcommand("verify", "Decide whether a dag deduction proves its conclusion");
  io(verify);
  auto* unfold = app.add_subcommand("unfold", "Unfold a verified dag into a tree proof");
  io(unfold);
  unfold->add_flag("--pure", o.pure, "Eliminate repetitions afterwards");

  auto* ham = app.add_subcommand("encode-ham", "Encode a digraph's Hamiltonian-path problem");
  io(ham);

  auto* bench = app.add_subcommand("bench", "Run the certification pipeline on a seeded corpus");
  bench->add_option("--output,-o", o.output, "Output directory for records, timing and summary");
  bench->add_option("--seed", o.seed, "Random seed");
  bench->add_option("--count", o.count, "Number of random provable formulas");
  bench->add_option("--max-weight", o.max_weight, "Maximal formula weight");
  bench->add_option("--max-n", o.max_n, "Largest edgeless digraph for rho_G instances");
  bench->add_option("--bound-mult", o.bound_mult, "Depth bound multiplier");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*parse) return cmd_parse(o);
    if (*check_tree_cmd) return cmd_check_tree(o);
    if (*check_dag_cmd) return cmd_check_dag(o);
    if (*prove) return cmd_prove_lm(o);
    if (*translate) return cmd_translate(o);
    if (*compress_cmd) return cmd_compress(o);
    if (*verify) return cmd_verify(o);
    if (*unfold) return cmd_unfold(o);
    if (*ham) return cmd_encode_ham(o);
    if (*bench) return cmd_bench(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return kInputError;
}
