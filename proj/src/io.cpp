#include "qjudge/io.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>

namespace qjudge {

namespace {

using PK = ParseError::Kind;

struct Line {
  int number = 0;
  std::string text;
};

std::vector<Line> meaningful_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    size_t end = line.find_last_not_of(" \t\r");
    std::string t = line.substr(begin, end - begin + 1);
    if (t.empty() || t[0] == '#') continue;
    out.push_back({number, std::move(t)});
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return true;
}

// ---------------------------------------------------------------- formulas

struct SexprParser {
  const std::string& text;
  int line;
  size_t pos = 0;
  bool qcbf;

  [[noreturn]] void fail(const std::string& msg, PK kind = PK::Lexical) {
    throw ParseError(kind, line, static_cast<int>(pos) + 1, msg);
  }

  void skip_ws() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  char peek() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of formula");
    return text[pos];
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }

  std::string symbol() {
    skip_ws();
    size_t begin = pos;
    while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
           !std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (pos == begin) fail("expected a symbol");
    return text.substr(begin, pos - begin);
  }

  bool at_close() { return peek() == ')'; }

  FormulaNode parse() {
    expect('(');
    std::string op = symbol();
    FormulaNode out;
    if (op == "atom") {
      if (qcbf) fail("atoms are not allowed in a QCBF document", PK::Structural);
      std::string rel = symbol();
      std::vector<std::string> args;
      while (!at_close()) args.push_back(symbol());
      out = FormulaNode::atom(std::move(rel), std::move(args));
    } else if (op == "clause") {
      if (!qcbf) fail("clauses are not allowed in a QCSP document",
                      PK::Structural);
      std::vector<std::string> lits;
      while (!at_close()) lits.push_back(symbol());
      out = FormulaNode::clause(std::move(lits));
    } else if (op == "and") {
      std::vector<FormulaNode> kids;
      while (!at_close()) kids.push_back(parse());
      if (kids.empty()) fail("empty conjunction", PK::Structural);
      out = FormulaNode::conj(std::move(kids));
    } else if (op == "exists" || op == "forall") {
      std::string binder = symbol();
      std::string var, sort;
      auto colon = binder.find(':');
      if (qcbf) {
        if (colon != std::string::npos)
          fail("QCBF variables carry no sort", PK::Structural);
        var = binder;
      } else {
        if (colon == std::string::npos)
          fail("expected var:sort binder", PK::Structural);
        var = binder.substr(0, colon);
        sort = binder.substr(colon + 1);
      }
      FormulaNode child = parse();
      out = op == "exists"
                ? FormulaNode::exists(std::move(var), std::move(sort),
                                      std::move(child))
                : FormulaNode::forall(std::move(var), std::move(sort),
                                      std::move(child));
    } else if (op == "true") {
      if (qcbf) fail("'true' is not allowed in a QCBF document",
                     PK::Structural);
      out = FormulaNode::top();
    } else {
      fail("unknown operator '" + op + "'", PK::Structural);
    }
    expect(')');
    return out;
  }
};

std::string print_formula(const QcFormula& f, const Signature& sig, int i) {
  const auto& n = f.node(i);
  switch (n.kind) {
    case NodeKind::Atom: {
      std::string out = "(atom " + sig.relations.at(n.relation).name;
      for (Var v : n.args) out += " " + f.var(v).name;
      return out + ")";
    }
    case NodeKind::And: {
      std::string out = "(and";
      for (int c : n.children) out += " " + print_formula(f, sig, c);
      return out + ")";
    }
    case NodeKind::Exists:
    case NodeKind::Forall: {
      const auto& vi = f.var(n.bound);
      std::string op = n.kind == NodeKind::Exists ? "exists" : "forall";
      return "(" + op + " " + vi.name + ":" + sig.sorts.at(vi.sort) + " " +
             print_formula(f, sig, n.children[0]) + ")";
    }
    case NodeKind::True:
      return "(true)";
    default:
      throw std::logic_error("print_formula: bad node kind");
  }
}

std::string print_formula(const QcbfFormula& f, int i) {
  const auto& n = f.node(i);
  switch (n.kind) {
    case NodeKind::ClauseLeaf: {
      std::string out = "(clause";
      std::vector<std::string> lits;
      for (const Literal& l : n.clause.literals())
        lits.push_back((l.positive ? "" : "-") + f.var_name(l.var));
      std::sort(lits.begin(), lits.end(), [](const auto& a, const auto& b) {
        auto strip = [](const std::string& s) {
          return s[0] == '-' ? s.substr(1) : s;
        };
        return strip(a) < strip(b);
      });
      for (const auto& l : lits) out += " " + l;
      return out + ")";
    }
    case NodeKind::And: {
      std::string out = "(and";
      for (int c : n.children) out += " " + print_formula(f, c);
      return out + ")";
    }
    case NodeKind::Exists:
    case NodeKind::Forall: {
      std::string op = n.kind == NodeKind::Exists ? "exists" : "forall";
      return "(" + op + " " + f.var_name(n.bound) + " " +
             print_formula(f, n.children[0]) + ")";
    }
    default:
      throw std::logic_error("print_formula: bad node kind");
  }
}

// ------------------------------------------------------------- assignments

std::string tuple_of(const QcInstance& inst, const std::vector<Var>& order,
                     const Assignment& row) {
  std::string out = "(";
  bool first = true;
  for (Var v : order) {
    if (!first) out += ",";
    first = false;
    out += inst.structure.element_name(inst.formula.var(v).sort, row.at(v));
  }
  return out + ")";
}

/// Variables sorted by name give the printed order of vars=[...] and of the
/// row tuples.
std::vector<Var> name_order(const QcFormula& f, const VarSet& vars) {
  std::vector<Var> order(vars.begin(), vars.end());
  std::sort(order.begin(), order.end(), [&](Var a, Var b) {
    return f.var(a).name < f.var(b).name;
  });
  return order;
}

std::string print_rows(const QcInstance& inst, const Constraint& c) {
  std::vector<Var> order = name_order(inst.formula, c.vars);
  std::vector<std::string> tuples;
  for (const auto& row : c.rows) tuples.push_back(tuple_of(inst, order, row));
  std::sort(tuples.begin(), tuples.end());
  std::string out = "{";
  for (size_t j = 0; j < tuples.size(); ++j) {
    if (j) out += ",";
    out += tuples[j];
  }
  return out + "}";
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// "(a,b)" tokens inside "{...}"
std::vector<std::vector<std::string>> parse_tuple_set(const std::string& s,
                                                      int line) {
  if (s.size() < 2 || s.front() != '{' || s.back() != '}')
    throw ParseError(PK::Lexical, line, 1, "expected {...} row set");
  std::string body = s.substr(1, s.size() - 2);
  std::vector<std::vector<std::string>> out;
  size_t pos = 0;
  while (pos < body.size()) {
    if (body[pos] == ',') {
      ++pos;
      continue;
    }
    if (body[pos] != '(')
      throw ParseError(PK::Lexical, line, static_cast<int>(pos) + 1,
                       "expected (...) tuple");
    size_t close = body.find(')', pos);
    if (close == std::string::npos)
      throw ParseError(PK::Lexical, line, static_cast<int>(pos) + 1,
                       "unterminated tuple");
    std::string inner = body.substr(pos + 1, close - pos - 1);
    if (inner.empty())
      out.push_back({});
    else
      out.push_back(split_on(inner, ','));
    pos = close + 1;
  }
  return out;
}

std::vector<std::string> parse_bracket_list(const std::string& s, int line) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw ParseError(PK::Lexical, line, 1, "expected [...] variable list");
  std::string body = s.substr(1, s.size() - 2);
  if (body.empty()) return {};
  return split_on(body, ',');
}

}  // namespace

// ------------------------------------------------------------ instance io

ParsedInstance parse_instance(const std::string& text) {
  auto lines = meaningful_lines(text);
  if (lines.empty())
    throw ParseError(PK::Structural, 1, 1, "empty document");
  size_t at = 0;
  auto cur = [&]() -> const Line& {
    if (at >= lines.size())
      throw ParseError(PK::Structural, lines.back().number, 1,
                       "unexpected end of document");
    return lines[at];
  };

  auto starts_with = [](const std::string& s, const std::string& w) {
    return s.rfind(w, 0) == 0 &&
           (s.size() == w.size() || s[w.size()] == ' ' ||
            s[w.size()] == '\t');
  };

  if (starts_with(cur().text, "FORMULA")) {
    // QCBF document
    int header = cur().number;
    ++at;
    std::string body;
    while (at < lines.size()) {
      body += lines[at].text + "\n";
      ++at;
    }
    if (body.empty())
      throw ParseError(PK::Structural, header, 1, "empty FORMULA section");
    SexprParser p{body, header + 1, 0, true};
    FormulaNode tree = p.parse();
    ParsedInstance out;
    out.kind = ParsedInstance::Kind::Qcbf;
    try {
      out.qcbf = QcbfFormula::build(tree);
    } catch (const BuildError& e) {
      throw ParseError(PK::Validation, header, 1, e.what());
    }
    auto bad = validate_instance(*out.qcbf);
    if (!bad.empty())
      throw ParseError(PK::Validation, header, 1, bad.front());
    return out;
  }

  // QCSP document
  if (!starts_with(cur().text, "SORTS"))
    throw ParseError(PK::Structural, cur().number, 1,
                     "expected SORTS or FORMULA section");
  Signature sig;
  {
    auto toks = split_ws(cur().text);
    for (size_t j = 1; j < toks.size(); ++j) {
      if (!valid_name(toks[j]))
        throw ParseError(PK::Lexical, cur().number, 1,
                         "bad sort name '" + toks[j] + "'");
      sig.sorts.push_back(toks[j]);
    }
    if (sig.sorts.empty())
      throw ParseError(PK::Structural, cur().number, 1, "no sorts declared");
    ++at;
  }

  if (cur().text != "RELATIONS")
    throw ParseError(PK::Structural, cur().number, 1,
                     "expected RELATIONS section");
  ++at;
  std::vector<std::string> duplicate_relations;
  while (cur().text != "UNIVERSE") {
    auto parts = split_ws(cur().text);
    if (parts.size() < 2 || parts[1] != ":")
      throw ParseError(PK::Structural, cur().number, 1,
                       "expected 'name : sort-word'");
    Signature::Relation r;
    r.name = parts[0];
    if (!valid_name(r.name))
      throw ParseError(PK::Lexical, cur().number, 1,
                       "bad relation name '" + r.name + "'");
    for (size_t j = 2; j < parts.size(); ++j) {
      int s = sig.sort_id(parts[j]);
      if (s < 0)
        throw ParseError(PK::Validation, cur().number, 1,
                         "unknown sort '" + parts[j] + "'");
      r.arity.push_back(s);
    }
    if (sig.relation_id(r.name) >= 0) duplicate_relations.push_back(r.name);
    sig.relations.push_back(std::move(r));
    ++at;
  }
  if (!duplicate_relations.empty())
    throw ParseError(PK::Validation, cur().number, 1,
                     "duplicate relation name '" + duplicate_relations[0] +
                         "'");
  ++at;  // UNIVERSE

  std::vector<std::vector<std::string>> universes(sig.sorts.size());
  std::vector<bool> seen_universe(sig.sorts.size(), false);
  while (cur().text != "TUPLES") {
    auto parts = split_ws(cur().text);
    if (parts.size() < 2 || parts[1] != "=")
      throw ParseError(PK::Structural, cur().number, 1,
                       "expected 'sort = element list'");
    int s = sig.sort_id(parts[0]);
    if (s < 0)
      throw ParseError(PK::Validation, cur().number, 1,
                       "unknown sort '" + parts[0] + "'");
    seen_universe[s] = true;
    for (size_t j = 2; j < parts.size(); ++j) {
      if (!valid_name(parts[j]))
        throw ParseError(PK::Lexical, cur().number, 1,
                         "bad element name '" + parts[j] + "'");
      universes[s].push_back(parts[j]);
    }
    ++at;
  }
  for (size_t s = 0; s < sig.sorts.size(); ++s)
    if (!seen_universe[s])
      throw ParseError(PK::Structural, cur().number, 1,
                       "no universe given for sort '" + sig.sorts[s] + "'");
  ++at;  // TUPLES

  std::vector<std::vector<Structure::NamedTuple>> tuples(sig.relations.size());
  while (cur().text != "FORMULA") {
    const std::string& line = cur().text;
    auto colon = line.find(" : ");
    std::string relname =
        colon == std::string::npos ? "" : line.substr(0, colon);
    // allow a bare "R :" line with no tuples
    if (colon == std::string::npos && line.size() > 2 &&
        line.substr(line.size() - 2) == " :")
      relname = line.substr(0, line.size() - 2);
    if (relname.empty())
      throw ParseError(PK::Structural, cur().number, 1,
                       "expected 'relation : tuple list'");
    int r = sig.relation_id(relname);
    if (r < 0)
      throw ParseError(PK::Validation, cur().number, 1,
                       "unknown relation '" + relname + "'");
    if (colon != std::string::npos) {
      std::string rest = line.substr(colon + 3);
      for (const std::string& tok : split_ws(rest)) {
        if (tok.size() < 2 || tok.front() != '(' || tok.back() != ')')
          throw ParseError(PK::Lexical, cur().number, 1,
                           "expected (...) tuple, got '" + tok + "'");
        std::string inner = tok.substr(1, tok.size() - 2);
        if (inner.empty())
          tuples[r].push_back({});
        else
          tuples[r].push_back(split_on(inner, ','));
      }
    }
    ++at;
  }
  int formula_line = cur().number;
  ++at;  // FORMULA
  std::string body;
  while (at < lines.size()) {
    body += lines[at].text + "\n";
    ++at;
  }
  if (body.empty())
    throw ParseError(PK::Structural, formula_line, 1,
                     "empty FORMULA section");

  SexprParser p{body, formula_line + 1, 0, false};
  FormulaNode tree = p.parse();
  ParsedInstance out;
  out.kind = ParsedInstance::Kind::Qcsp;
  try {
    Structure b(sig, std::move(universes), std::move(tuples));
    QcFormula f = QcFormula::build(sig, tree);
    out.qcsp = QcInstance{std::move(f), std::move(b)};
  } catch (const BuildError& e) {
    throw ParseError(PK::Validation, formula_line, 1, e.what());
  }
  auto bad = validate_instance(*out.qcsp);
  if (!bad.empty())
    throw ParseError(PK::Validation, formula_line, 1, bad.front());
  return out;
}

std::string print_instance(const QcInstance& inst) {
  const Signature& sig = inst.structure.signature();
  std::string out = "SORTS";
  for (const auto& s : sig.sorts) out += " " + s;
  out += "\nRELATIONS\n";
  for (const auto& r : sig.relations) {
    out += r.name + " :";
    for (int s : r.arity) out += " " + sig.sorts.at(s);
    out += "\n";
  }
  out += "UNIVERSE\n";
  for (size_t s = 0; s < sig.sorts.size(); ++s) {
    out += sig.sorts[s] + " =";
    for (const auto& e : inst.structure.universe(static_cast<int>(s)))
      out += " " + e;
    out += "\n";
  }
  out += "TUPLES\n";
  for (size_t r = 0; r < sig.relations.size(); ++r) {
    out += sig.relations[r].name + " :";
    std::vector<std::string> printed;
    for (const auto& t :
         inst.structure.interpretation(static_cast<int>(r))) {
      std::string tup = "(";
      for (size_t j = 0; j < t.size(); ++j) {
        if (j) tup += ",";
        tup += inst.structure.element_name(sig.relations[r].arity[j], t[j]);
      }
      printed.push_back(tup + ")");
    }
    std::sort(printed.begin(), printed.end());
    for (const auto& t : printed) out += " " + t;
    out += "\n";
  }
  out += "FORMULA\n";
  out += print_formula(inst.formula, sig, inst.formula.root()) + "\n";
  return out;
}

std::string print_instance(const QcbfFormula& f) {
  return "FORMULA\n" + print_formula(f, f.root()) + "\n";
}

std::string instance_hash(const std::string& canonical_text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical_text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string instance_hash(const QcInstance& inst) {
  return instance_hash(print_instance(inst));
}

std::string instance_hash(const QcbfFormula& f) {
  return instance_hash(print_instance(f));
}

// --------------------------------------------------------------- proof io

namespace {

const char* jrule_name(JudgementRule r) {
  switch (r) {
    case JudgementRule::Atom: return "atom";
    case JudgementRule::Projection: return "proj";
    case JudgementRule::Join: return "join";
    case JudgementRule::UpwardFlow: return "upflow";
    case JudgementRule::ForallElimination: return "forallelim";
    case JudgementRule::DownwardFlow: return "downflow";
  }
  return "?";
}

std::optional<JudgementRule> jrule_of(const std::string& s) {
  if (s == "atom") return JudgementRule::Atom;
  if (s == "proj") return JudgementRule::Projection;
  if (s == "join") return JudgementRule::Join;
  if (s == "upflow") return JudgementRule::UpwardFlow;
  if (s == "forallelim") return JudgementRule::ForallElimination;
  if (s == "downflow") return JudgementRule::DownwardFlow;
  return std::nullopt;
}

const char* crule_name(ClauseRule r) {
  switch (r) {
    case ClauseRule::Clause: return "clause";
    case ClauseRule::Resolve: return "resolve";
    case ClauseRule::UpwardFlow: return "upflow";
    case ClauseRule::ForallRemoval: return "forallrm";
    case ClauseRule::DownwardFlow: return "downflow";
  }
  return "?";
}

std::optional<ClauseRule> crule_of(const std::string& s) {
  if (s == "clause") return ClauseRule::Clause;
  if (s == "resolve") return ClauseRule::Resolve;
  if (s == "upflow") return ClauseRule::UpwardFlow;
  if (s == "forallrm") return ClauseRule::ForallRemoval;
  if (s == "downflow") return ClauseRule::DownwardFlow;
  return std::nullopt;
}

std::string premise_field(const std::vector<int>& premises) {
  if (premises.empty()) return "-";
  std::string out;
  for (size_t j = 0; j < premises.size(); ++j) {
    if (j) out += ",";
    out += std::to_string(premises[j] + 1);
  }
  return out;
}

std::vector<int> parse_premises(const std::string& s, int line, int step_no) {
  if (s == "-") return {};
  std::vector<int> out;
  for (const std::string& part : split_on(s, ',')) {
    try {
      int n = std::stoi(part);
      if (n < 1 || n >= step_no)
        throw ParseError(PK::Validation, line, 1,
                         "premise number out of range: " + part);
      out.push_back(n - 1);
    } catch (const std::invalid_argument&) {
      throw ParseError(PK::Lexical, line, 1, "bad premise list '" + s + "'");
    }
  }
  return out;
}

std::string header_line(const std::string& system, const std::string& hash) {
  return "proof " + system + " " + hash;
}

struct HeaderInfo {
  std::string system;
  std::string hash;
};

HeaderInfo parse_header(const Line& l) {
  auto toks = split_ws(l.text);
  if (toks.size() != 3 || toks[0] != "proof")
    throw ParseError(PK::Structural, l.number, 1,
                     "expected 'proof <system> <hash>' header");
  return {toks[1], toks[2]};
}

std::string clause_field(const QcbfFormula& f, const Clause& c) {
  std::vector<std::string> lits;
  for (const Literal& l : c.literals())
    lits.push_back((l.positive ? "" : "-") + f.var_name(l.var));
  std::sort(lits.begin(), lits.end(), [](const auto& a, const auto& b) {
    auto strip = [](const std::string& s) {
      return s[0] == '-' ? s.substr(1) : s;
    };
    return strip(a) < strip(b);
  });
  std::string out = "(";
  for (size_t j = 0; j < lits.size(); ++j) {
    if (j) out += " ";
    out += lits[j];
  }
  return out + ")";
}

Clause parse_clause_field(const QcbfFormula& f, const std::string& s,
                          int line) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    throw ParseError(PK::Lexical, line, 1, "expected clause=(...)");
  std::string inner = s.substr(1, s.size() - 2);
  std::vector<Literal> lits;
  for (const std::string& tok : split_ws(inner)) {
    bool pos = tok[0] != '-';
    std::string name = pos ? tok : tok.substr(1);
    Var v = f.find_var(name);
    if (v < 0)
      throw ParseError(PK::Validation, line, 1,
                       "unknown variable '" + name + "'");
    lits.push_back({v, pos});
  }
  auto c = Clause::make(std::move(lits));
  if (!c)
    throw ParseError(PK::Validation, line, 1,
                     "clause mentions some variable twice");
  return *c;
}

}  // namespace

std::string print_judgement_proof(const QcInstance& inst,
                                  const JudgementProof& proof) {
  std::string out = header_line("qcsp", instance_hash(inst)) + "\n";
  for (int k = 0; k < proof.length(); ++k) {
    const auto& s = proof.steps[k];
    out += std::to_string(k + 1) + ": " + jrule_name(s.rule) + " " +
           premise_field(s.premises) + " ";
    if (s.rule == JudgementRule::Projection) {
      std::vector<Var> order = name_order(inst.formula, s.projection_to);
      std::string lst = "[";
      for (size_t j = 0; j < order.size(); ++j) {
        if (j) lst += ",";
        lst += inst.formula.var(order[j]).name;
      }
      out += lst + "]";
    } else if (s.rule == JudgementRule::ForallElimination) {
      out += inst.formula.var(s.eliminated).name;
    } else {
      out += "-";
    }
    out += " @" + std::to_string(s.result.location);
    std::vector<Var> order = name_order(inst.formula, s.result.constraint.vars);
    out += " vars=[";
    for (size_t j = 0; j < order.size(); ++j) {
      if (j) out += ",";
      out += inst.formula.var(order[j]).name;
    }
    out += "] rows=" + print_rows(inst, s.result.constraint) + "\n";
  }
  return out;
}

JudgementProof parse_judgement_proof(const QcInstance& inst,
                                     const std::string& text,
                                     bool check_hash) {
  auto lines = meaningful_lines(text);
  if (lines.empty())
    throw ParseError(PK::Structural, 1, 1, "empty proof document");
  HeaderInfo h = parse_header(lines[0]);
  if (h.system != "qcsp")
    throw ParseError(PK::Structural, lines[0].number, 1,
                     "expected a qcsp proof");
  if (check_hash && h.hash != instance_hash(inst))
    throw HashMismatchError("proof bound to a different instance");

  JudgementProof proof;
  for (size_t j = 1; j < lines.size(); ++j) {
    const Line& l = lines[j];
    auto toks = split_ws(l.text);
    if (toks.size() < 6)
      throw ParseError(PK::Structural, l.number, 1, "malformed step line");
    std::string no = toks[0];
    if (no.empty() || no.back() != ':')
      throw ParseError(PK::Structural, l.number, 1,
                       "expected a step number like '3:'");
    int expect = static_cast<int>(j);
    if (std::to_string(expect) + ":" != no)
      throw ParseError(PK::Structural, l.number, 1,
                       "step numbers must be dense from 1");
    JudgementStep step;
    auto rule = jrule_of(toks[1]);
    if (!rule)
      throw ParseError(PK::Structural, l.number, 1,
                       "unknown rule '" + toks[1] + "'");
    step.rule = *rule;
    step.premises = parse_premises(toks[2], l.number, expect);
    const std::string& param = toks[3];
    if (step.rule == JudgementRule::Projection) {
      for (const std::string& name : parse_bracket_list(param, l.number)) {
        Var v = inst.formula.find_var(name);
        if (v < 0)
          throw ParseError(PK::Validation, l.number, 1,
                           "unknown variable '" + name + "'");
        step.projection_to = vs_insert(step.projection_to, v);
      }
    } else if (step.rule == JudgementRule::ForallElimination) {
      Var v = inst.formula.find_var(param);
      if (v < 0)
        throw ParseError(PK::Validation, l.number, 1,
                         "unknown variable '" + param + "'");
      step.eliminated = v;
    }
    if (toks[4].size() < 2 || toks[4][0] != '@')
      throw ParseError(PK::Structural, l.number, 1, "expected @index");
    step.result.location = std::stoi(toks[4].substr(1));
    std::string varsfield = toks[5];
    if (varsfield.rfind("vars=", 0) != 0)
      throw ParseError(PK::Structural, l.number, 1, "expected vars=[...]");
    std::vector<Var> order;
    for (const std::string& name :
         parse_bracket_list(varsfield.substr(5), l.number)) {
      Var v = inst.formula.find_var(name);
      if (v < 0)
        throw ParseError(PK::Validation, l.number, 1,
                         "unknown variable '" + name + "'");
      order.push_back(v);
    }
    step.result.constraint.vars = vs_make(order);
    if (toks.size() < 7 || toks[6].rfind("rows=", 0) != 0)
      throw ParseError(PK::Structural, l.number, 1, "expected rows={...}");
    for (const auto& tuple : parse_tuple_set(toks[6].substr(5), l.number)) {
      if (tuple.size() != order.size())
        throw ParseError(PK::Validation, l.number, 1,
                         "tuple length differs from the vars list");
      Assignment row;
      for (size_t t = 0; t < tuple.size(); ++t) {
        int sort = inst.formula.var(order[t]).sort;
        int e = inst.structure.element_id(sort, tuple[t]);
        if (e < 0)
          throw ParseError(PK::Validation, l.number, 1,
                           "unknown element '" + tuple[t] + "'");
        row = row.extended(order[t], e);
      }
      step.result.constraint.rows.insert(std::move(row));
    }
    proof.steps.push_back(std::move(step));
  }
  return proof;
}

std::string print_clause_proof(const QcbfFormula& f,
                               const ClauseProof& proof) {
  std::string out = header_line("qcbf", instance_hash(f)) + "\n";
  for (int k = 0; k < proof.length(); ++k) {
    const auto& s = proof.steps[k];
    out += std::to_string(k + 1) + ": " + crule_name(s.rule) + " " +
           premise_field(s.premises) + " ";
    if (s.rule == ClauseRule::Resolve)
      out += f.var_name(s.pivot);
    else
      out += "-";
    out += " @" + std::to_string(s.result.location);
    out += " clause=" + clause_field(f, s.result.clause) + "\n";
  }
  return out;
}

ClauseProof parse_clause_proof(const QcbfFormula& f, const std::string& text,
                               bool check_hash) {
  auto lines = meaningful_lines(text);
  if (lines.empty())
    throw ParseError(PK::Structural, 1, 1, "empty proof document");
  HeaderInfo h = parse_header(lines[0]);
  if (h.system != "qcbf")
    throw ParseError(PK::Structural, lines[0].number, 1,
                     "expected a qcbf proof");
  if (check_hash && h.hash != instance_hash(f))
    throw HashMismatchError("proof bound to a different instance");

  ClauseProof proof;
  for (size_t j = 1; j < lines.size(); ++j) {
    const Line& l = lines[j];
    auto toks = split_ws(l.text);
    if (toks.size() < 5)
      throw ParseError(PK::Structural, l.number, 1, "malformed step line");
    int expect = static_cast<int>(j);
    if (std::to_string(expect) + ":" != toks[0])
      throw ParseError(PK::Structural, l.number, 1,
                       "step numbers must be dense from 1");
    ClauseStep step;
    auto rule = crule_of(toks[1]);
    if (!rule)
      throw ParseError(PK::Structural, l.number, 1,
                       "unknown rule '" + toks[1] + "'");
    step.rule = *rule;
    step.premises = parse_premises(toks[2], l.number, expect);
    if (step.rule == ClauseRule::Resolve) {
      Var v = f.find_var(toks[3]);
      if (v < 0)
        throw ParseError(PK::Validation, l.number, 1,
                         "unknown variable '" + toks[3] + "'");
      step.pivot = v;
    }
    if (toks[4].size() < 2 || toks[4][0] != '@')
      throw ParseError(PK::Structural, l.number, 1, "expected @index");
    step.result.location = std::stoi(toks[4].substr(1));
    // the clause field may contain spaces; rejoin the tail
    std::string rest;
    for (size_t t = 5; t < toks.size(); ++t) {
      if (t > 5) rest += " ";
      rest += toks[t];
    }
    if (rest.rfind("clause=", 0) != 0)
      throw ParseError(PK::Structural, l.number, 1, "expected clause=(...)");
    step.result.clause = parse_clause_field(f, rest.substr(7), l.number);
    proof.steps.push_back(std::move(step));
  }
  return proof;
}

// --------------------------------------------------------------- trace io

std::string print_trace(const QcbfFormula& f, const Trace& t) {
  std::string out;
  std::function<void(int, int)> rec = [&](int id, int depth) {
    const TraceNode& n = t.nodes[id];
    out += std::string(2 * depth, ' ');
    std::vector<LocatedVariable> located = n.located;
    std::sort(located.begin(), located.end(),
              [&](const LocatedVariable& a, const LocatedVariable& b) {
                if (a.location != b.location) return a.location < b.location;
                return f.var_name(a.var) < f.var_name(b.var);
              });
    out += "S=[";
    for (size_t j = 0; j < located.size(); ++j) {
      if (j) out += ",";
      out += "(" + std::to_string(located[j].location) + "," +
             f.var_name(located[j].var) + "," +
             (located[j].universal ? "A" : "E") + ")";
    }
    out += "] a={";
    std::vector<Var> order;
    for (const auto& [v, b] : n.assignment.items()) order.push_back(v);
    std::sort(order.begin(), order.end(),
              [&](Var a, Var b) { return f.var_name(a) < f.var_name(b); });
    for (size_t j = 0; j < order.size(); ++j) {
      if (j) out += ",";
      out += f.var_name(order[j]) + "=" +
             std::to_string(n.assignment.at(order[j]));
    }
    out += "}";
    if (n.children.empty() && n.falsifies >= 0)
      out += " falsifies @" + std::to_string(n.falsifies);
    out += "\n";
    for (int c : n.children) rec(c, depth + 1);
  };
  if (t.root >= 0) rec(t.root, 0);
  return out;
}

Trace parse_trace(const QcbfFormula& f, const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  Trace t;
  std::vector<int> stack;  // node ids by depth
  while (std::getline(in, raw)) {
    ++number;
    std::string no_cr = raw;
    if (!no_cr.empty() && no_cr.back() == '\r') no_cr.pop_back();
    size_t begin = no_cr.find_first_not_of(' ');
    if (begin == std::string::npos) continue;
    if (no_cr[begin] == '#') continue;
    if (begin % 2 != 0)
      throw ParseError(PK::Structural, number, static_cast<int>(begin) + 1,
                       "indentation must be two spaces per depth");
    int depth = static_cast<int>(begin) / 2;
    if (depth > static_cast<int>(stack.size()))
      throw ParseError(PK::Structural, number, static_cast<int>(begin) + 1,
                       "node skips a depth level");
    std::string body = no_cr.substr(begin);

    TraceNode node;
    if (body.rfind("S=[", 0) != 0)
      throw ParseError(PK::Structural, number, 1, "expected S=[...]");
    size_t close = body.find(']');
    if (close == std::string::npos)
      throw ParseError(PK::Lexical, number, 1, "unterminated located set");
    std::string sbody = body.substr(3, close - 3);
    size_t pos = 0;
    while (pos < sbody.size()) {
      if (sbody[pos] == ',') {
        ++pos;
        continue;
      }
      if (sbody[pos] != '(')
        throw ParseError(PK::Lexical, number, 1, "expected (i,u,A|E)");
      size_t end = sbody.find(')', pos);
      if (end == std::string::npos)
        throw ParseError(PK::Lexical, number, 1, "unterminated located var");
      auto parts = split_on(sbody.substr(pos + 1, end - pos - 1), ',');
      if (parts.size() != 3)
        throw ParseError(PK::Lexical, number, 1, "expected (i,u,A|E)");
      LocatedVariable lv;
      lv.location = std::stoi(parts[0]);
      lv.var = f.find_var(parts[1]);
      if (lv.var < 0)
        throw ParseError(PK::Validation, number, 1,
                         "unknown variable '" + parts[1] + "'");
      if (parts[2] != "A" && parts[2] != "E")
        throw ParseError(PK::Lexical, number, 1,
                         "universal flag must be A or E");
      lv.universal = parts[2] == "A";
      node.located.push_back(lv);
      pos = end + 1;
    }
    std::sort(node.located.begin(), node.located.end());

    size_t apos = body.find("a={", close);
    if (apos == std::string::npos)
      throw ParseError(PK::Structural, number, 1, "expected a={...}");
    size_t aclose = body.find('}', apos);
    if (aclose == std::string::npos)
      throw ParseError(PK::Lexical, number, 1, "unterminated assignment");
    std::string abody = body.substr(apos + 3, aclose - apos - 3);
    if (!abody.empty()) {
      for (const std::string& item : split_on(abody, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
          throw ParseError(PK::Lexical, number, 1, "expected v=b");
        Var v = f.find_var(item.substr(0, eq));
        if (v < 0)
          throw ParseError(PK::Validation, number, 1,
                           "unknown variable '" + item.substr(0, eq) + "'");
        node.assignment =
            node.assignment.extended(v, std::stoi(item.substr(eq + 1)));
      }
    }
    size_t fpos = body.find("falsifies @", aclose);
    if (fpos != std::string::npos)
      node.falsifies = std::stoi(body.substr(fpos + 11));

    t.nodes.push_back(std::move(node));
    int id = t.node_count() - 1;
    if (depth == 0) {
      if (t.root >= 0)
        throw ParseError(PK::Structural, number, 1, "two roots in the trace");
      t.root = id;
      stack = {id};
    } else {
      stack.resize(depth);
      t.nodes[stack.back()].children.push_back(id);
      stack.push_back(id);
    }
  }
  if (t.root < 0)
    throw ParseError(PK::Structural, number ? number : 1, 1, "empty trace");
  return t;
}

std::string print_table(const QcInstance& inst,
                        const ConstraintSystemTable& table) {
  // entries are keyed by (i, V), so map order is already lexicographic
  std::string out;
  for (const auto& [key, rows] : table.entries) {
    const auto& [i, vars] = key;
    std::vector<Var> order = name_order(inst.formula, vars);
    std::string line = std::to_string(i) + " [";
    for (size_t j = 0; j < order.size(); ++j) {
      if (j) line += ",";
      line += inst.formula.var(order[j]).name;
    }
    line += "] : ";
    Constraint c{vars, rows};
    line += print_rows(inst, c);
    out += line + "\n";
  }
  return out;
}

}  // namespace qjudge
