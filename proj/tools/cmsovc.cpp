// Command-line driver: one subcommand per experiment. Every artifact starts with
// the resolved configuration as JSON. Exit codes: 0 pass, 1 a verified property
// failed, 2 budget, parse or input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "cmsovc/compiler.hpp"
#include "cmsovc/compression.hpp"
#include "cmsovc/gridlab.hpp"
#include "cmsovc/logic.hpp"
#include "cmsovc/setsys.hpp"
#include "cmsovc/transduce.hpp"
#include "cmsovc/width.hpp"

using namespace cmsovc;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Budgets {
  std::uint64_t max_valuations = std::uint64_t{1} << 30;
  std::size_t max_states = 100000;
  std::size_t max_table_entries = 10000000;
  std::uint64_t max_subsets = std::uint64_t{1} << 26;
  std::uint64_t max_tuples = std::uint64_t{1} << 26;

  CheckOptions check() const { return {max_valuations}; }
  CompileOptions compile() const { return {{max_states, max_table_entries}}; }
  SetSystemBudget subsets() const { return {max_subsets}; }
  SetSystemOptions setsys(std::optional<std::vector<ElementId>> universe = std::nullopt) const {
    SetSystemOptions o;
    o.check = check();
    o.max_tuples = max_tuples;
    o.universe = std::move(universe);
    return o;
  }
};

// Exit code 1: the run completed and a checked property does not hold.
struct PropertyFailed {};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// "@path" reads the text from a file.
std::string text_arg(const std::string& v) { return !v.empty() && v[0] == '@' ? read_file(v.substr(1)) : v; }

Formula formula_arg(const std::string& v) { return parse_formula(text_arg(v)); }

KExpression expr_arg(const std::string& v) {
  const auto t = text_arg(v);
  const auto first = t.find_first_not_of(" \t\r\n");
  return parse_kexpression(first != std::string::npos && t[first] == '(' ? t : read_file(v));
}

json set_system_json(const TupleSetSystem& s) {
  json members = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) members.push_back(s.member_elements(i));
  return {{"universe", s.universe()}, {"arity", s.arity()}, {"size", s.size()}, {"members", members}};
}

// Resolved values of every option of the global app and the selected subcommand.
json config_json(const CLI::App& app, const CLI::App& sub, std::uint64_t seed) {
  json cfg;
  cfg["tool"] = "cmsovc";
  cfg["version"] = kVersion;
  cfg["command"] = sub.get_name();
  cfg["seed"] = seed;
  auto add = [](json& into, const CLI::App& a) {
    for (const auto* opt : a.get_options()) {
      if (opt->get_lnames().empty()) continue;
      const auto& name = opt->get_lnames().front();
      if (name == "help" || name == "config" || name == "seed") continue;
      if (opt->get_expected_min() == 0) {
        into[name] = opt->count() > 0;
      } else if (opt->count() > 0) {
        const auto& r = opt->results();
        into[name] = r.size() == 1 && opt->get_expected_max() <= 1 ? json(r[0]) : json(r);
      } else {
        into[name] = opt->get_default_str();
      }
    }
  };
  json options;
  add(options, app);
  add(options, sub);
  cfg["options"] = options;
  return cfg;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw ValidationError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// JSON artifacts embed the config; text and CSV artifacts carry it on a leading "# " line.
void emit_json(std::ostream& out, const json& cfg, json body) {
  json doc;
  doc["config"] = cfg;
  for (auto& [k, v] : body.items()) doc[k] = v;
  out << doc.dump(2) << "\n";
}

void emit_header(std::ostream& out, const json& cfg) { out << "# " << cfg.dump() << "\n"; }

// All subsets of {0..n-1} with at most k elements, by size then lexicographically.
std::vector<std::vector<int>> small_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  for (int size = 1; size <= std::min(n, k); ++size) {
    std::function<void(int)> rec = [&](int start) {
      if (static_cast<int>(cur.size()) == size) {
        out.push_back(cur);
        return;
      }
      for (int v = start; v < n; ++v) {
        cur.push_back(v);
        rec(v + 1);
        cur.pop_back();
      }
    };
    rec(0);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMSO formulas, tree automata and definable set systems"};
  app.set_config("--config", "", "TOML/INI config file; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();

  Budgets budgets;
  std::uint64_t seed = 0;
  std::string out_path = "-";
  app.add_option("--seed", seed, "Seed for randomized suites")->capture_default_str();
  app.add_option("--out", out_path, "Output file ('-' for stdout)")->capture_default_str();
  app.add_option("--max-valuations", budgets.max_valuations, "Checker quantifier iterations per query")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--max-states", budgets.max_states, "Automaton state cap")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--max-table-entries", budgets.max_table_entries, "Automaton table cap")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--max-subsets", budgets.max_subsets, "Subset search cap")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--max-tuples", budgets.max_tuples, "Cap on |universe|^(|x|+|y|)")
      ->capture_default_str()->check(CLI::PositiveNumber);

  // Shared argument holders.
  std::string formula, structure_path;
  std::vector<std::string> objects, params, universe;

  auto* compile_cmd = app.add_subcommand("compile", "Compile a formula over labeled binary trees");
  std::vector<std::string> alphabet, tracks;
  bool dump = false;
  compile_cmd->add_option("--formula", formula, "Formula text or @file")->required();
  compile_cmd->add_option("--alphabet", alphabet, "Tree alphabet")->required()->delimiter(',');
  compile_cmd->add_option("--tracks", tracks, "Track order (default: free variables)")->delimiter(',');
  compile_cmd->add_flag("--dump", dump, "Print the transition table");

  auto* check_cmd = app.add_subcommand("check", "Brute-force model check");
  std::vector<std::string> assigns, set_assigns;
  std::string expect;
  check_cmd->add_option("--structure", structure_path, "Structure file")->required();
  check_cmd->add_option("--formula", formula, "Formula text or @file")->required();
  check_cmd->add_option("--assign", assigns, "x=element");
  check_cmd->add_option("--set", set_assigns, "X=a,b,c");
  check_cmd->add_option("--expect", expect, "Exit 1 unless the verdict matches")->check(CLI::IsMember({"true", "false"}));

  auto add_setsys_args = [&](CLI::App* c) {
    c->add_option("--structure", structure_path, "Structure file")->required();
    c->add_option("--formula", formula, "Formula text or @file")->required();
    c->add_option("--objects", objects, "Object variables")->required()->delimiter(',');
    c->add_option("--params", params, "Parameter variables")->delimiter(',');
    c->add_option("--universe", universe, "Elements tuples range over")->delimiter(',');
  };
  auto* setsys_cmd = app.add_subcommand("setsystem", "Definable set system by brute force");
  add_setsys_args(setsys_cmd);
  auto* vcdim_cmd = app.add_subcommand("vcdim", "VC dimension of a definable set system");
  add_setsys_args(vcdim_cmd);
  auto* growth_cmd = app.add_subcommand("growth", "Growth function of a definable set system (CSV)");
  add_setsys_args(growth_cmd);
  int max_n = 0;
  std::string growth_mode = "exact";
  std::uint64_t samples = 64;
  growth_cmd->add_option("--max-n", max_n, "Largest n (default: universe size)");
  growth_cmd->add_option("--mode", growth_mode, "exact|sampled")->capture_default_str()->check(CLI::IsMember({"exact", "sampled"}));
  growth_cmd->add_option("--samples", samples, "Samples per n in sampled mode")->capture_default_str();

  auto* bound_cmd = app.add_subcommand("bound-verify", "Check |S(T)[A]| <= c |A|^|y| on trees (CSV)");
  std::string trees_dir;
  int random_trees = 0, nodes = 8, max_a = 3;
  bound_cmd->add_option("--formula", formula, "Formula text or @file")->required();
  bound_cmd->add_option("--objects", objects, "Object variables")->required()->delimiter(',');
  bound_cmd->add_option("--params", params, "Parameter variables")->delimiter(',');
  bound_cmd->add_option("--trees", trees_dir, "Directory of tree structure files");
  bound_cmd->add_option("--random", random_trees, "Number of random trees instead of --trees");
  bound_cmd->add_option("--nodes", nodes, "Random tree size")->capture_default_str()->check(CLI::PositiveNumber);
  bound_cmd->add_option("--alphabet", alphabet, "Random tree alphabet")->delimiter(',');
  bound_cmd->add_option("--max-A", max_a, "Largest |A|")->capture_default_str()->check(CLI::PositiveNumber);

  auto* transduce_cmd = app.add_subcommand("transduce", "Apply a transduction");
  std::string spec_path, valuation_path;
  bool enumerate = false;
  transduce_cmd->add_option("--spec", spec_path, "Transduction file")->required();
  transduce_cmd->add_option("--input", structure_path, "Input structure file")->required();
  transduce_cmd->add_flag("--enumerate", enumerate, "All images over every colouring");
  transduce_cmd->add_option("--valuation", valuation_path, "Colouring file {\"C\": [elements]}");

  auto* cw_eval_cmd = app.add_subcommand("cw-eval", "Evaluate a k-expression");
  std::string expr;
  int k = 0;
  cw_eval_cmd->add_option("--expr", expr, "k-expression text, file or @file")->required();
  cw_eval_cmd->add_option("--k", k, "Colour bound (default: colours used)");

  auto* cw_cmd = app.add_subcommand("cw-setsystem", "Set system on a graph given by a k-expression");
  bool verify = false;
  cw_cmd->add_option("--formula", formula, "Formula over E and vertex labels")->required();
  cw_cmd->add_option("--expr", expr, "k-expression text, file or @file")->required();
  cw_cmd->add_option("--k", k, "Colour bound (default: colours used)");
  cw_cmd->add_option("--objects", objects, "Object variables")->required()->delimiter(',');
  cw_cmd->add_option("--params", params, "Parameter variables")->delimiter(',');
  cw_cmd->add_flag("--verify", verify, "Compare with brute force; exit 1 on mismatch");

  auto* tw_cmd = app.add_subcommand("tw-setsystem", "Set system on a graph given an incidence-graph certificate");
  std::string graph_path, cert;
  bool forest = false;
  tw_cmd->add_option("--formula", formula, "Formula over inc, vert and labels")->required();
  tw_cmd->add_option("--graph", graph_path, "Graph structure file")->required();
  tw_cmd->add_option("--cert", cert, "k-expression of the incidence graph");
  tw_cmd->add_flag("--forest", forest, "Build the certificate (forests only)");
  tw_cmd->add_option("--k", k, "Colour bound (default: colours used)");
  tw_cmd->add_option("--objects", objects, "Object variables")->required()->delimiter(',');
  tw_cmd->add_option("--params", params, "Parameter variables")->delimiter(',');
  tw_cmd->add_flag("--verify", verify, "Compare with brute force; exit 1 on mismatch");

  auto* grid_cmd = app.add_subcommand("grid-demo", "Shatter floor(log2 n) grid cells (CSV)");
  int n = 4;
  std::string mode = "direct", csv_path;
  grid_cmd->add_option("--n", n, "Grid side")->capture_default_str()->check(CLI::PositiveNumber);
  grid_cmd->add_option("--mode", mode, "brute|direct")->capture_default_str()->check(CLI::IsMember({"brute", "direct"}));
  grid_cmd->add_option("--csv", csv_path, "CSV output file (overrides --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App& sub = *app.get_subcommands().front();
  const auto cfg = config_json(app, sub, seed);
  try {
    Output out_file(sub.get_name() == "grid-demo" && !csv_path.empty() ? csv_path : out_path);
    auto& out = out_file.stream();

    if (compile_cmd->parsed()) {
      const auto f = formula_arg(formula);
      const auto tr = tracks.empty() ? free_variables(f) : tracks;
      const auto a = compile(f, alphabet, tr, budgets.compile());
      emit_header(out, cfg);
      out << "states " << a.states() << "\n";
      out << "alphabet " << a.alphabet().size() << "\n";
      if (dump) out << dump_automaton(a);
    } else if (check_cmd->parsed()) {
      const auto s = parse_structure(read_file(structure_path));
      const auto f = formula_arg(formula);
      Valuation v;
      for (const auto& a : assigns) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ValidationError("--assign expects x=element");
        v.elements[a.substr(0, eq)] = a.substr(eq + 1);
      }
      for (const auto& a : set_assigns) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ValidationError("--set expects X=a,b,c");
        auto& members = v.sets[a.substr(0, eq)];
        std::stringstream list(a.substr(eq + 1));
        for (std::string e; std::getline(list, e, ',');)
          if (!e.empty()) members.insert(e);
      }
      const bool holds = check(s, f, v, budgets.check());
      emit_json(out, cfg, {{"holds", holds}});
      if (!expect.empty() && holds != (expect == "true")) throw PropertyFailed{};
    } else if (setsys_cmd->parsed() || vcdim_cmd->parsed() || growth_cmd->parsed()) {
      const auto s = parse_structure(read_file(structure_path));
      const PartitionedFormula pf(formula_arg(formula), objects, params);
      std::optional<std::vector<ElementId>> uni;
      if (!universe.empty()) uni = universe;
      const auto sys = define_set_system(s, pf, budgets.setsys(uni));
      if (setsys_cmd->parsed()) {
        emit_json(out, cfg, set_system_json(sys));
      } else if (vcdim_cmd->parsed()) {
        const auto w = vc_witness(sys, budgets.subsets());
        std::vector<ElementId> names;
        for (int p : w) names.push_back(sys.universe()[static_cast<std::size_t>(p)]);
        emit_json(out, cfg, {{"vc_dimension", w.size()}, {"witness", names}});
      } else {
        const int top = max_n > 0 ? max_n : static_cast<int>(sys.universe().size());
        std::vector<std::pair<int, GrowthValue>> rows;
        const auto m = growth_mode == "exact" ? GrowthMode::Exact : GrowthMode::Sampled;
        for (int i = 0; i <= top; ++i) rows.emplace_back(i, growth_function(sys, i, m, samples, seed, budgets.subsets()));
        emit_header(out, cfg);
        out << growth_csv(rows);
      }
    } else if (bound_cmd->parsed()) {
      const PartitionedFormula pf(formula_arg(formula), objects, params);
      std::vector<std::pair<std::string, Tree>> trees;
      if (!trees_dir.empty()) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(trees_dir))
          if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files)
          trees.emplace_back(p.filename().string(), Tree::from_structure(parse_structure(read_file(p.string()))));
      } else if (random_trees > 0) {
        if (alphabet.empty()) throw ValidationError("--random needs --alphabet");
        std::mt19937_64 rng(seed);
        for (int i = 0; i < random_trees; ++i) trees.emplace_back("random-" + std::to_string(i), random_tree(nodes, alphabet, rng));
      } else {
        throw ValidationError("give --trees DIR or --random COUNT");
      }
      emit_header(out, cfg);
      out << "tree_id,A_size,A,observed,bound,pass\n";
      bool all = true;
      std::map<std::vector<std::string>, Emulation> emulations;
      for (const auto& [id, t] : trees) {
        auto it = emulations.find(t.alphabet());
        if (it == emulations.end()) it = emulations.emplace(t.alphabet(), emulation_for(pf, t.alphabet(), budgets.compile())).first;
        BoundVerifier bv(it->second, t);
        for (const auto& a : small_subsets(static_cast<int>(t.size()), max_a)) {
          const auto r = bv.verify(a);
          std::string names;
          for (int v : a) names += (names.empty() ? "" : " ") + t.name(v);
          out << id << "," << a.size() << ",\"" << names << "\"," << r.observed << "," << r.bound << ","
              << (r.pass ? "true" : "false") << "\n";
          all = all && r.pass;
        }
      }
      if (!all) throw PropertyFailed{};
    } else if (transduce_cmd->parsed()) {
      const auto t = parse_transduction(read_file(spec_path));
      const auto s = parse_structure(read_file(structure_path));
      json images = json::array();
      if (enumerate) {
        for (const auto& img : apply_all(t, s, budgets.check())) images.push_back(json::parse(print_structure(img)));
      } else if (!valuation_path.empty()) {
        const auto j = json::parse(read_file(valuation_path));
        Coloring c;
        for (auto& [name, elems] : j.items()) c[name] = elems.get<std::set<ElementId>>();
        images.push_back(json::parse(print_structure(apply(t, s, c, budgets.check()))));
      } else {
        if (!t.colors.empty()) throw ValidationError("transduction guesses colours; give --enumerate or --valuation");
        images.push_back(json::parse(print_structure(apply(t.base, s, budgets.check()))));
      }
      emit_json(out, cfg, {{"images", images}});
    } else if (cw_eval_cmd->parsed()) {
      const auto e = expr_arg(expr);
      const int kk = k > 0 ? k : max_color(e);
      const auto g = eval_kexpression(e, kk);
      emit_json(out, cfg,
                {{"k", kk}, {"parse_tree_nodes", to_parse_tree(e, kk).tree.size()},
                 {"graph", json::parse(print_structure(g.to_structure()))}});
    } else if (cw_cmd->parsed() || tw_cmd->parsed()) {
      const PartitionedFormula pf(formula_arg(formula), objects, params);
      WidthOptions wo;
      wo.compile = budgets.compile();
      wo.max_tuples = budgets.max_tuples;
      TupleSetSystem sys;
      std::optional<TupleSetSystem> brute;
      int kk = k;
      if (cw_cmd->parsed()) {
        const auto e = expr_arg(expr);
        if (kk == 0) kk = max_color(e);
        sys = check_on_cliquewidth(pf, e, kk, wo);
        if (verify) brute = define_set_system(eval_kexpression(e, kk).to_structure(), pf, budgets.setsys());
      } else {
        const auto g = Graph::from_structure(parse_structure(read_file(graph_path)));
        if (forest == !cert.empty()) throw ValidationError("give exactly one of --cert and --forest");
        const auto c = forest ? forest_incidence_expression(g) : expr_arg(cert);
        if (kk == 0) kk = max_color(c);
        sys = check_on_treewidth(pf, g, c, kk, wo);
        if (verify)
          brute = define_set_system(g.with_encoding(GraphEncoding::Incidence).to_structure(), pf, budgets.setsys());
      }
      auto body = set_system_json(sys);
      body["k"] = kk;
      if (brute) body["verified"] = *brute == sys;
      emit_json(out, cfg, body);
      if (brute && !(*brute == sys)) throw PropertyFailed{};
    } else if (grid_cmd->parsed()) {
      const auto r = verify_shattering(n, shatter_mode_from_string(mode), budgets.check());
      emit_header(out, cfg);
      out << shatter_csv(r);
      out << "# verdict=" << (r.verdict ? "true" : "false") << " shattered=" << r.candidate.size()
          << " vc_dimension=" << r.vc_dimension << "\n";
      if (!r.verdict) throw PropertyFailed{};
    }
  } catch (const PropertyFailed&) {
    return 1;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
