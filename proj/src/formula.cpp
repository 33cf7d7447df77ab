#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "cmsovc/logic.hpp"

namespace cmsovc {

std::string_view to_string(Dialect d) {
  switch (d) {
    case Dialect::MSO: return "MSO";
    case Dialect::C2MSO: return "C2MSO";
    case Dialect::CMSO: return "CMSO";
  }
  return "?";
}

Dialect dialect_from_string(std::string_view text) {
  if (text == "MSO" || text == "mso") return Dialect::MSO;
  if (text == "C2MSO" || text == "c2mso") return Dialect::C2MSO;
  if (text == "CMSO" || text == "cmso") return Dialect::CMSO;
  throw ValidationError("unknown dialect '" + std::string(text) + "'");
}

bool is_set_variable(std::string_view name) {
  return !name.empty() && std::isupper(static_cast<unsigned char>(name[0]));
}

Formula::Formula() : node_(std::make_shared<const Node>()) {}
Formula::Formula(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

bool Formula::is_quantifier() const noexcept {
  const auto k = kind();
  return k == FormulaKind::Exists || k == FormulaKind::Forall || k == FormulaKind::ExistsSet ||
         k == FormulaKind::ForallSet;
}

bool Formula::is_set_quantifier() const noexcept {
  return kind() == FormulaKind::ExistsSet || kind() == FormulaKind::ForallSet;
}

bool Formula::operator==(const Formula& other) const {
  if (node_ == other.node_) return true;
  const auto& a = *node_;
  const auto& b = *other.node_;
  return a.kind == b.kind && a.name == b.name && a.args == b.args && a.residue == b.residue &&
         a.modulus == b.modulus && a.children == b.children;
}

namespace {

void require_element_var(const std::string& v) {
  if (v.empty() || is_set_variable(v)) throw ValidationError("'" + v + "' is not a first-order variable");
}

void require_set_var(const std::string& v) {
  if (!is_set_variable(v)) throw ValidationError("'" + v + "' is not a monadic variable");
}

Formula make(FormulaKind kind, std::string name = {}, std::vector<std::string> args = {},
             std::vector<Formula> children = {}) {
  Formula::Node n;
  n.kind = kind;
  n.name = std::move(name);
  n.args = std::move(args);
  n.children = std::move(children);
  return Formula(std::move(n));
}

}  // namespace

namespace mk {

Formula truth() { return make(FormulaKind::True); }
Formula falsity() { return make(FormulaKind::False); }

Formula atom(std::string relation, std::vector<std::string> args) {
  if (args.empty()) throw ValidationError("relation atom '" + relation + "' needs arguments");
  for (const auto& a : args) require_element_var(a);
  return make(FormulaKind::Atom, std::move(relation), std::move(args));
}

Formula eq(std::string x, std::string y) {
  require_element_var(x);
  require_element_var(y);
  return make(FormulaKind::Equal, {}, {std::move(x), std::move(y)});
}

Formula in(std::string x, std::string set) {
  require_element_var(x);
  require_set_var(set);
  return make(FormulaKind::In, {}, {std::move(x), std::move(set)});
}

Formula mod(std::string set, int residue, int modulus) {
  require_set_var(set);
  if (modulus < 2) throw ValidationError("modulus must be at least 2");
  if (residue < 0 || residue >= modulus) throw ValidationError("residue must lie in [0, p)");
  Formula::Node n;
  n.kind = FormulaKind::Mod;
  n.args = {std::move(set)};
  n.residue = residue;
  n.modulus = modulus;
  return Formula(std::move(n));
}

Formula neg(Formula f) { return make(FormulaKind::Not, {}, {}, {std::move(f)}); }

Formula conj(std::vector<Formula> fs) {
  if (fs.empty()) return truth();
  if (fs.size() == 1) return fs[0];
  return make(FormulaKind::And, {}, {}, std::move(fs));
}

Formula disj(std::vector<Formula> fs) {
  if (fs.empty()) return falsity();
  if (fs.size() == 1) return fs[0];
  return make(FormulaKind::Or, {}, {}, std::move(fs));
}

Formula implies(Formula a, Formula b) { return make(FormulaKind::Implies, {}, {}, {std::move(a), std::move(b)}); }
Formula iff(Formula a, Formula b) { return make(FormulaKind::Iff, {}, {}, {std::move(a), std::move(b)}); }

Formula exists(std::string x, Formula f) {
  require_element_var(x);
  return make(FormulaKind::Exists, std::move(x), {}, {std::move(f)});
}

Formula forall(std::string x, Formula f) {
  require_element_var(x);
  return make(FormulaKind::Forall, std::move(x), {}, {std::move(f)});
}

Formula exists_set(std::string x, Formula f) {
  require_set_var(x);
  return make(FormulaKind::ExistsSet, std::move(x), {}, {std::move(f)});
}

Formula forall_set(std::string x, Formula f) {
  require_set_var(x);
  return make(FormulaKind::ForallSet, std::move(x), {}, {std::move(f)});
}

Formula exists_any(std::string x, Formula f) {
  return is_set_variable(x) ? exists_set(std::move(x), std::move(f)) : exists(std::move(x), std::move(f));
}

Formula forall_any(std::string x, Formula f) {
  return is_set_variable(x) ? forall_set(std::move(x), std::move(f)) : forall(std::move(x), std::move(f));
}

Formula subset(const std::string& x, const std::string& y) {
  std::string z = fresh_variable("z", {x, y});
  return forall(z, implies(in(z, x), in(z, y)));
}

}  // namespace mk

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum Kind { Open, Close, Word, End } kind;
  std::string text;
  std::size_t pos;
};

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : text_(text), options_(options) {
    if (options_.free)
      for (const auto& v : *options_.free) declared_.insert(v);
  }

  Formula parse() {
    auto f = form();
    auto t = next();
    if (t.kind != Token::End) fail("unexpected trailing input", t.pos);
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t pos) {
    throw ParseError("formula: " + msg, pos);
  }

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) return {Token::End, "", pos_};
    const char c = text_[pos_];
    if (c == '(') return {Token::Open, "(", pos_++};
    if (c == ')') return {Token::Close, ")", pos_++};
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')')
      ++pos_;
    return {Token::Word, std::string(text_.substr(start, pos_ - start)), start};
  }

  Token peek() {
    const auto save = pos_;
    auto t = next();
    pos_ = save;
    return t;
  }

  void expect_close() {
    auto t = next();
    if (t.kind != Token::Close) fail("expected ')'", t.pos);
  }

  std::string word(const char* what) {
    auto t = next();
    if (t.kind != Token::Word) fail(std::string("expected ") + what, t.pos);
    return t.text;
  }

  std::string use_var(bool set, std::size_t at) {
    auto t = next();
    if (t.kind != Token::Word) fail(set ? "expected a monadic variable" : "expected a first-order variable", t.pos);
    if (is_set_variable(t.text) != set)
      fail("'" + t.text + "' is not a " + (set ? "monadic" : "first-order") + " variable", t.pos);
    if (options_.free && !bound(t.text) && declared_.count(t.text) == 0)
      fail("unbound variable '" + t.text + "'", t.pos);
    (void)at;
    return t.text;
  }

  bool bound(const std::string& v) const { return std::find(scope_.begin(), scope_.end(), v) != scope_.end(); }

  int integer() {
    auto t = next();
    int value = 0;
    if (t.kind != Token::Word) fail("expected an integer", t.pos);
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc() || p != t.text.data() + t.text.size()) fail("expected an integer", t.pos);
    return value;
  }

  Formula form() {
    auto open = next();
    if (open.kind != Token::Open) fail("expected '('", open.pos);
    const auto head_tok = next();
    if (head_tok.kind != Token::Word) fail("expected an operator or relation name", head_tok.pos);
    const auto& head = head_tok.text;
    Formula out;
    if (head == "true" || head == "false") {
      out = head == "true" ? mk::truth() : mk::falsity();
    } else if (head == "not") {
      out = mk::neg(form());
    } else if (head == "and" || head == "or") {
      std::vector<Formula> parts;
      while (peek().kind == Token::Open) parts.push_back(form());
      if (parts.size() < 2) fail("'" + head + "' needs at least two operands", head_tok.pos);
      Formula::Node n;
      n.kind = head == "and" ? FormulaKind::And : FormulaKind::Or;
      n.children = std::move(parts);
      out = Formula(std::move(n));
    } else if (head == "implies" || head == "iff") {
      auto a = form();
      auto b = form();
      out = head == "implies" ? mk::implies(std::move(a), std::move(b)) : mk::iff(std::move(a), std::move(b));
    } else if (head == "exists" || head == "forall" || head == "existsS" || head == "forallS") {
      const bool set = head.back() == 'S';
      auto t = next();
      if (t.kind != Token::Word) fail("expected a variable", t.pos);
      if (is_set_variable(t.text) != set)
        fail("'" + head + "' expects a " + (set ? "monadic" : "first-order") + " variable", t.pos);
      scope_.push_back(t.text);
      auto body = form();
      scope_.pop_back();
      if (head == "exists") out = mk::exists(t.text, std::move(body));
      else if (head == "forall") out = mk::forall(t.text, std::move(body));
      else if (head == "existsS") out = mk::exists_set(t.text, std::move(body));
      else out = mk::forall_set(t.text, std::move(body));
    } else if (head == "mod") {
      auto x = use_var(true, head_tok.pos);
      const auto at = peek().pos;
      const int a = integer();
      const int p = integer();
      if (p < 2) fail("modulus must be at least 2", at);
      if (a < 0 || a >= p) fail("residue must lie in [0, p)", at);
      if (options_.dialect == Dialect::MSO) fail("modular atoms are not allowed in MSO", head_tok.pos);
      if (options_.dialect == Dialect::C2MSO && p != 2) fail("C2MSO only allows modulus 2", at);
      out = mk::mod(x, a, p);
    } else if (head == "=") {
      auto x = use_var(false, head_tok.pos);
      auto y = use_var(false, head_tok.pos);
      out = mk::eq(x, y);
    } else if (head == "in") {
      auto x = use_var(false, head_tok.pos);
      auto y = use_var(true, head_tok.pos);
      out = mk::in(x, y);
    } else {
      std::vector<std::string> args;
      while (peek().kind == Token::Word) args.push_back(use_var(false, head_tok.pos));
      if (args.empty()) fail("relation '" + head + "' needs arguments", head_tok.pos);
      out = mk::atom(head, std::move(args));
    }
    expect_close();
    return out;
  }

  std::string_view text_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
  std::set<std::string> declared_;
};

void print_into(const Formula& f, std::string& out) {
  auto children = [&](const char* op) {
    out += '(';
    out += op;
    for (const auto& c : f.children()) {
      out += ' ';
      print_into(c, out);
    }
    out += ')';
  };
  auto quant = [&](const char* op) {
    out += '(';
    out += op;
    out += ' ';
    out += f.variable();
    out += ' ';
    print_into(f.child(), out);
    out += ')';
  };
  switch (f.kind()) {
    case FormulaKind::True: out += "(true)"; return;
    case FormulaKind::False: out += "(false)"; return;
    case FormulaKind::Atom:
      out += '(' + f.relation();
      for (const auto& a : f.args()) out += ' ' + a;
      out += ')';
      return;
    case FormulaKind::Equal: out += "(= " + f.args()[0] + ' ' + f.args()[1] + ')'; return;
    case FormulaKind::In: out += "(in " + f.args()[0] + ' ' + f.args()[1] + ')'; return;
    case FormulaKind::Mod:
      out += "(mod " + f.args()[0] + ' ' + std::to_string(f.residue()) + ' ' + std::to_string(f.modulus()) + ')';
      return;
    case FormulaKind::Not: children("not"); return;
    case FormulaKind::And: children("and"); return;
    case FormulaKind::Or: children("or"); return;
    case FormulaKind::Implies: children("implies"); return;
    case FormulaKind::Iff: children("iff"); return;
    case FormulaKind::Exists: quant("exists"); return;
    case FormulaKind::Forall: quant("forall"); return;
    case FormulaKind::ExistsSet: quant("existsS"); return;
    case FormulaKind::ForallSet: quant("forallS"); return;
  }
}

void collect_free(const Formula& f, std::vector<std::string>& bound, std::vector<std::string>& out) {
  auto note = [&](const std::string& v) {
    if (std::find(bound.begin(), bound.end(), v) == bound.end() && std::find(out.begin(), out.end(), v) == out.end())
      out.push_back(v);
  };
  switch (f.kind()) {
    case FormulaKind::Atom:
    case FormulaKind::Equal:
    case FormulaKind::In:
    case FormulaKind::Mod:
      for (const auto& a : f.args()) note(a);
      return;
    default: break;
  }
  if (f.is_quantifier()) {
    bound.push_back(f.variable());
    collect_free(f.child(), bound, out);
    bound.pop_back();
    return;
  }
  for (const auto& c : f.children()) collect_free(c, bound, out);
}

void collect_all(const Formula& f, std::set<std::string>& out) {
  for (const auto& a : f.args()) out.insert(a);
  if (f.is_quantifier()) out.insert(f.variable());
  for (const auto& c : f.children()) collect_all(c, out);
}

Formula with_children(const Formula& f, std::vector<Formula> children) {
  Formula::Node n;
  n.kind = f.kind();
  n.name = f.relation();
  n.args = f.args();
  n.residue = f.residue();
  n.modulus = f.modulus();
  n.children = std::move(children);
  return Formula(std::move(n));
}

Formula with_args(const Formula& f, std::vector<std::string> args) {
  Formula::Node n;
  n.kind = f.kind();
  n.name = f.relation();
  n.args = std::move(args);
  n.residue = f.residue();
  n.modulus = f.modulus();
  return Formula(std::move(n));
}

Formula requantify(const Formula& f, std::string var, Formula body) {
  Formula::Node n;
  n.kind = f.kind();
  n.name = std::move(var);
  n.children = {std::move(body)};
  return Formula(std::move(n));
}

}  // namespace

Formula parse_formula(std::string_view text, const ParseOptions& options) {
  return Parser(text, options).parse();
}

std::string print_formula(const Formula& f) {
  std::string out;
  print_into(f, out);
  return out;
}

Dialect required_dialect(const Formula& f) {
  if (f.kind() == FormulaKind::Mod) return f.modulus() == 2 ? Dialect::C2MSO : Dialect::CMSO;
  Dialect d = Dialect::MSO;
  for (const auto& c : f.children()) d = std::max(d, required_dialect(c));
  return d;
}

void check_dialect(const Formula& f, Dialect dialect) {
  const auto need = required_dialect(f);
  if (need > dialect)
    throw ValidationError("formula needs " + std::string(to_string(need)) + " but the dialect is " +
                          std::string(to_string(dialect)));
}

std::vector<std::string> free_variables(const Formula& f) {
  std::vector<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

std::vector<std::string> free_element_variables(const Formula& f) {
  auto all = free_variables(f);
  std::erase_if(all, [](const std::string& v) { return is_set_variable(v); });
  return all;
}

std::vector<std::string> free_set_variables(const Formula& f) {
  auto all = free_variables(f);
  std::erase_if(all, [](const std::string& v) { return !is_set_variable(v); });
  return all;
}

std::set<std::string> all_variables(const Formula& f) {
  std::set<std::string> out;
  collect_all(f, out);
  return out;
}

std::map<std::string, int> relations_used(const Formula& f) {
  std::map<std::string, int> out;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (g.kind() == FormulaKind::Atom) {
      auto [it, fresh] = out.emplace(g.relation(), static_cast<int>(g.args().size()));
      if (!fresh && it->second != static_cast<int>(g.args().size()))
        throw ValidationError("relation '" + g.relation() + "' used with two arities");
    }
    for (const auto& c : g.children()) walk(c);
  };
  walk(f);
  return out;
}

std::string fresh_variable(const std::string& base, const std::set<std::string>& avoid) {
  std::string stem = base.substr(0, base.find('#'));
  if (stem.empty()) stem = "v";
  for (int k = 1;; ++k) {
    auto name = stem + "#" + std::to_string(k);
    if (avoid.count(name) == 0) return name;
  }
}

namespace {

Formula rename_rec(const Formula& f, std::map<std::string, std::string> ren, std::set<std::string>& avoid) {
  switch (f.kind()) {
    case FormulaKind::Atom:
    case FormulaKind::Equal:
    case FormulaKind::In:
    case FormulaKind::Mod: {
      auto args = f.args();
      for (auto& a : args)
        if (auto it = ren.find(a); it != ren.end()) a = it->second;
      return with_args(f, std::move(args));
    }
    default: break;
  }
  if (f.is_quantifier()) {
    std::string var = f.variable();
    ren.erase(var);
    if (ren.empty()) return f;
    bool clash = false;
    for (const auto& [from, to] : ren) clash = clash || to == var;
    if (clash) {
      auto fresh = fresh_variable(var, avoid);
      avoid.insert(fresh);
      ren[var] = fresh;
      var = fresh;
    }
    return requantify(f, var, rename_rec(f.child(), ren, avoid));
  }
  std::vector<Formula> kids;
  for (const auto& c : f.children()) kids.push_back(rename_rec(c, ren, avoid));
  return with_children(f, std::move(kids));
}

}  // namespace

Formula rename_free(const Formula& f, const std::map<std::string, std::string>& renaming) {
  for (const auto& [from, to] : renaming)
    if (is_set_variable(from) != is_set_variable(to))
      throw ValidationError("renaming '" + from + "' to '" + to + "' changes the variable sort");
  auto avoid = all_variables(f);
  for (const auto& [from, to] : renaming) avoid.insert(from), avoid.insert(to);
  return rename_rec(f, renaming, avoid);
}

namespace {

using AtomRewrite = std::function<std::optional<Formula>(const std::string&, const std::vector<std::string>&)>;

Formula map_rec(const Formula& f, std::map<std::string, std::string> ren, const std::set<std::string>& extra,
                std::set<std::string>& avoid, const AtomRewrite& rewrite) {
  switch (f.kind()) {
    case FormulaKind::Atom: {
      auto args = f.args();
      for (auto& a : args)
        if (auto it = ren.find(a); it != ren.end()) a = it->second;
      if (auto r = rewrite(f.relation(), args)) return *r;
      return with_args(f, std::move(args));
    }
    case FormulaKind::Equal:
    case FormulaKind::In:
    case FormulaKind::Mod: {
      auto args = f.args();
      for (auto& a : args)
        if (auto it = ren.find(a); it != ren.end()) a = it->second;
      return with_args(f, std::move(args));
    }
    default: break;
  }
  if (f.is_quantifier()) {
    std::string var = f.variable();
    ren.erase(var);
    if (extra.count(var)) {
      auto fresh = fresh_variable(var, avoid);
      avoid.insert(fresh);
      ren[var] = fresh;
      var = fresh;
    }
    return requantify(f, var, map_rec(f.child(), ren, extra, avoid, rewrite));
  }
  std::vector<Formula> kids;
  for (const auto& c : f.children()) kids.push_back(map_rec(c, ren, extra, avoid, rewrite));
  return with_children(f, std::move(kids));
}

}  // namespace

Formula map_atoms(const Formula& f, const AtomRewrite& rewrite) {
  // Free variables that rewrites introduce beyond their arguments; binders with
  // these names must be renamed apart.
  std::set<std::string> extra;
  auto avoid = all_variables(f);
  std::function<void(const Formula&)> scan = [&](const Formula& g) {
    if (g.kind() == FormulaKind::Atom) {
      if (auto r = rewrite(g.relation(), g.args())) {
        for (const auto& v : free_variables(*r))
          if (std::find(g.args().begin(), g.args().end(), v) == g.args().end()) extra.insert(v);
        auto vars = all_variables(*r);
        avoid.insert(vars.begin(), vars.end());
      }
    }
    for (const auto& c : g.children()) scan(c);
  };
  scan(f);
  return map_rec(f, {}, extra, avoid, rewrite);
}

PartitionedFormula::PartitionedFormula(Formula f, std::vector<std::string> objs, std::vector<std::string> params)
    : formula(std::move(f)), objects(std::move(objs)), parameters(std::move(params)) {
  if (objects.empty()) throw ValidationError("a partitioned formula needs at least one object variable");
  std::set<std::string> seen;
  for (const auto& v : objects) {
    require_element_var(v);
    if (!seen.insert(v).second) throw ValidationError("variable '" + v + "' listed twice in the partition");
  }
  for (const auto& v : parameters) {
    require_element_var(v);
    if (!seen.insert(v).second) throw ValidationError("variable '" + v + "' listed twice in the partition");
  }
  for (const auto& v : free_variables(formula)) {
    if (is_set_variable(v)) throw ValidationError("partitioned formula has free monadic variable '" + v + "'");
    if (seen.count(v) == 0) throw ValidationError("free variable '" + v + "' is not in the partition");
  }
}

}  // namespace cmsovc
