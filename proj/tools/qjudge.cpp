// qjudge: checking, generation and conversion of judgement proofs, clause
// judgement proofs and search traces, plus k-judge-consistency propagation.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qjudge/io.hpp"
#include "qjudge/translation.hpp"

using nlohmann::json;
using namespace qjudge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 1;
constexpr int kExitPropertyViolated = 2;
constexpr int kExitResourceLimit = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

ParsedInstance load_instance(const std::string& path) {
  return parse_instance(read_file(path));
}

const QcInstance& require_qcsp(const ParsedInstance& p) {
  if (p.kind != ParsedInstance::Kind::Qcsp)
    throw std::runtime_error("a QCSP instance is required here");
  return *p.qcsp;
}

const QcbfFormula& require_qcbf(const ParsedInstance& p) {
  if (p.kind != ParsedInstance::Kind::Qcbf)
    throw std::runtime_error("a QCBF instance is required here");
  return *p.qcbf;
}

SearchPolicy parse_policy(const std::string& text, long max_steps) {
  SearchPolicy p;
  p.max_steps = max_steps;
  if (text.empty() || text == "default") return p;
  if (text.rfind("random:", 0) == 0) {
    p.kind = SearchPolicy::Kind::Random;
    p.seed = std::stoull(text.substr(7));
    return p;
  }
  throw std::runtime_error("unknown policy '" + text + "'");
}

Clause parse_target(const QcbfFormula& f, const std::string& text) {
  std::vector<Literal> lits;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    for (const std::string& part : {tok}) {
      bool pos = part[0] != '-';
      std::string name = pos ? part : part.substr(1);
      Var v = f.find_var(name);
      if (v < 0) throw std::runtime_error("unknown variable '" + name + "'");
      lits.push_back({v, pos});
    }
  }
  auto c = Clause::make(std::move(lits));
  if (!c) throw std::runtime_error("target mentions some variable twice");
  return *c;
}

struct Options {
  bool json = false;
  std::string out;
};

void emit(const Options& opt, const json& j, const std::string& plain) {
  if (opt.json)
    write_output(opt.out, j.dump(2) + "\n");
  else
    write_output(opt.out, plain);
}

int cmd_eval(const std::string& file, const Options& opt) {
  ParsedInstance p = load_instance(file);
  bool truth = p.kind == ParsedInstance::Kind::Qcsp ? evaluate(*p.qcsp)
                                                    : evaluate(*p.qcbf);
  emit(opt, json{{"verdict", truth}}, std::string(truth ? "true" : "false") +
                                          "\n");
  return kExitOk;
}

int cmd_check(const std::string& file, const std::string& proof_path,
              const Options& opt) {
  ParsedInstance p = load_instance(file);
  std::string text = read_file(proof_path);
  auto first = text.substr(0, text.find('\n'));
  bool qcsp_proof = first.rfind("proof qcsp", 0) == 0;
  json j;
  std::string plain;
  bool valid = false;
  if (qcsp_proof) {
    const QcInstance& inst = require_qcsp(p);
    JudgementProof proof = parse_judgement_proof(inst, text);
    auto rep = check_proof(inst, proof);
    valid = rep.valid;
    j = json{{"valid", rep.valid},
             {"width", rep.width},
             {"length", rep.length},
             {"refutes", rep.refutes}};
    plain = std::string(rep.valid ? "valid" : "invalid") +
            ", width=" + std::to_string(rep.width) +
            ", length=" + std::to_string(rep.length) +
            ", refutes=" + (rep.refutes ? "yes" : "no") + "\n";
    for (const auto& v : rep.violations) {
      j["violations"].push_back(
          {{"step", v.step + 1}, {"message", v.message}});
      plain += "step " + std::to_string(v.step + 1) + ": " + v.message + "\n";
    }
  } else {
    const QcbfFormula& f = require_qcbf(p);
    ClauseProof proof = parse_clause_proof(f, text);
    auto rep = check_clause_proof(f, proof);
    valid = rep.valid;
    j = json{{"valid", rep.valid},
             {"width", rep.width},
             {"length", rep.length},
             {"refutes", rep.refutes},
             {"tree_like", rep.tree_like},
             {"non_flow_count", rep.non_flow_count}};
    plain = std::string(rep.valid ? "valid" : "invalid") +
            ", width=" + std::to_string(rep.width) +
            ", length=" + std::to_string(rep.length) +
            ", refutes=" + (rep.refutes ? "yes" : "no") + "\n";
    for (const auto& [step, message] : rep.violations) {
      j["violations"].push_back({{"step", step + 1}, {"message", message}});
      plain += "step " + std::to_string(step + 1) + ": " + message + "\n";
    }
  }
  emit(opt, j, plain);
  return valid ? kExitOk : kExitPropertyViolated;
}

int cmd_prove(const std::string& file, const Options& opt) {
  const QcInstance inst = require_qcsp(load_instance(file));
  auto proof = generate_refutation(inst);
  if (!proof) {
    emit(opt, json{{"verdict", true}}, "true\n");
    return kExitOk;
  }
  auto rep = check_proof(inst, *proof);
  json j{{"verdict", false},
         {"width", rep.width},
         {"length", rep.length},
         {"proof", print_judgement_proof(inst, *proof)}};
  emit(opt, j, print_judgement_proof(inst, *proof));
  return kExitOk;
}

int cmd_refute(const std::string& file, const std::string& policy,
               long max_steps, const Options& opt) {
  const QcbfFormula f = require_qcbf(load_instance(file));
  DetectResult r = detect_falsity(f, parse_policy(policy, max_steps));
  switch (r.status) {
    case DetectResult::Status::Found:
      emit(opt,
           json{{"found", true},
                {"nodes", r.trace.node_count()},
                {"trace", print_trace(f, r.trace)}},
           print_trace(f, r.trace));
      return kExitOk;
    case DetectResult::Status::NotFound:
      emit(opt, json{{"found", false}}, "no refuting trace found\n");
      return kExitOk;
    case DetectResult::Status::ResourceLimit:
      emit(opt, json{{"error", "resource limit"}},
           "resource limit exceeded\n");
      return kExitResourceLimit;
  }
  return kExitOk;
}

int cmd_trace(const std::string& file, const std::string& trace_path,
              const Options& opt) {
  const QcbfFormula f = require_qcbf(load_instance(file));
  Trace t = parse_trace(f, read_file(trace_path));
  auto bad = validate_trace(f, t);
  json j{{"valid", bad.empty()}, {"nodes", t.node_count()}};
  std::string plain = bad.empty() ? "valid trace\n" : "invalid trace\n";
  for (const auto& v : bad) {
    j["violations"].push_back({{"node", v.node}, {"message", v.message}});
    plain += "node " + std::to_string(v.node) + ": " + v.message + "\n";
  }
  emit(opt, j, plain);
  return bad.empty() ? kExitOk : kExitPropertyViolated;
}

int cmd_consistency(const std::string& file, int k, bool dump,
                    const Options& opt) {
  const QcInstance inst = require_qcsp(load_instance(file));
  PropagateResult r = propagate(inst, k);
  json j{{"k", k},
         {"consistent", r.consistent},
         {"iterations", r.iterations}};
  std::string plain = std::string(r.consistent ? "CONSISTENT" : "INCONSISTENT") +
                      " (k=" + std::to_string(k) + ")\n";
  if (dump) {
    std::string table = print_table(inst, r.table);
    j["table"] = table;
    plain += table;
  }
  emit(opt, j, plain);
  return kExitOk;
}

int cmd_translate(const std::string& file, const Options& opt) {
  const QcbfFormula f = require_qcbf(load_instance(file));
  TranslationMap tr = qcsp_translation(f);
  std::string doc = print_instance(tr.instance);
  json j{{"instance", doc}};
  for (const auto& [leaf, rel] : tr.clause_relation)
    j["clause_relations"][std::to_string(leaf)] = rel;
  emit(opt, j, doc);
  return kExitOk;
}

int cmd_simqres(const std::string& file, const std::string& target,
                bool existential_only, const Options& opt) {
  const QcbfFormula f = require_qcbf(load_instance(file));
  QResOptions qopts;
  qopts.existential_pivots_only = existential_only;
  Clause goal = parse_target(f, target);
  auto proof = qres_closure_derive(f, goal, qopts);
  if (!proof) {
    emit(opt, json{{"derivable", false}}, "not in C\n");
    return kExitOk;
  }
  emit(opt,
       json{{"derivable", true}, {"proof", print_clause_proof(f, *proof)}},
       print_clause_proof(f, *proof));
  return kExitOk;
}

int cmd_convert(const std::string& file, const std::string& mode,
                const std::string& proof_path, const std::string& trace_path,
                const Options& opt) {
  ParsedInstance p = load_instance(file);
  if (mode == "proof-to-trace") {
    const QcbfFormula& f = require_qcbf(p);
    ClauseProof proof = parse_clause_proof(f, read_file(proof_path));
    Trace t = proof_to_trace(f, proof);
    emit(opt, json{{"trace", print_trace(f, t)}}, print_trace(f, t));
    return kExitOk;
  }
  if (mode == "trace-to-proof") {
    const QcbfFormula& f = require_qcbf(p);
    Trace t = parse_trace(f, read_file(trace_path));
    ClauseProof proof = trace_to_proof(f, t);
    emit(opt, json{{"proof", print_clause_proof(f, proof)}},
         print_clause_proof(f, proof));
    return kExitOk;
  }
  if (mode == "clause-to-constraint") {
    const QcbfFormula& f = require_qcbf(p);
    ClauseProof proof = parse_clause_proof(f, read_file(proof_path));
    TranslationMap tr = qcsp_translation(f);
    JudgementProof out = clause_to_constraint_proof(f, tr, proof);
    std::string doc = print_judgement_proof(tr.instance, out);
    emit(opt, json{{"proof", doc}, {"instance", print_instance(tr.instance)}},
         doc);
    return kExitOk;
  }
  if (mode == "constraint-to-clause") {
    const QcbfFormula& f = require_qcbf(p);
    TranslationMap tr = qcsp_translation(f);
    JudgementProof proof =
        parse_judgement_proof(tr.instance, read_file(proof_path));
    ClauseProof out = constraint_to_clause_proof(f, tr, proof);
    emit(opt, json{{"proof", print_clause_proof(f, out)}},
         print_clause_proof(f, out));
    return kExitOk;
  }
  throw std::runtime_error("unknown conversion mode '" + mode + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proof checking and generation for quantified constraint "
               "satisfaction on non-prenex formulas"};
  app.require_subcommand(1);

  Options opt;
  std::string file, proof_path, trace_path, policy = "default";
  std::string target, mode;
  int k = 1;
  long max_steps = 1 << 20;
  bool dump = false, existential_only = false;

  auto add_common = [&](CLI::App* c, bool with_out = true) {
    c->add_flag("--json", opt.json, "machine-readable output");
    if (with_out) c->add_option("-o,--out", opt.out, "output file");
  };

  auto* eval = app.add_subcommand("eval", "evaluate an instance (oracle)");
  eval->add_option("file", file)->required();
  add_common(eval);

  auto* check = app.add_subcommand("check", "check a proof document");
  check->add_option("file", file)->required();
  check->add_option("--proof", proof_path)->required();
  add_common(check);

  auto* prove =
      app.add_subcommand("prove", "generate a judgement refutation");
  prove->add_option("file", file)->required();
  add_common(prove);

  auto* refute = app.add_subcommand("refute", "search for a refuting trace");
  refute->add_option("file", file)->required();
  refute->add_option("--policy", policy, "default or random:<seed>");
  refute->add_option("--max-steps", max_steps);
  add_common(refute);

  auto* trace = app.add_subcommand("trace", "validate a trace document");
  trace->add_option("file", file)->required();
  trace->add_option("--trace", trace_path)->required();
  add_common(trace);

  auto* consistency =
      app.add_subcommand("consistency", "k-judge-consistency propagation");
  consistency->add_option("file", file)->required();
  consistency->add_option("-k", k)->required();
  consistency->add_flag("--dump", dump, "dump the fixpoint table");
  add_common(consistency);

  auto* translate =
      app.add_subcommand("translate", "QCBF to QCSP translation");
  translate->add_option("file", file)->required();
  add_common(translate);

  auto* simqres =
      app.add_subcommand("simqres", "derive a clause via the closure set");
  simqres->add_option("file", file)->required();
  simqres->add_option("--target", target,
                      "space-separated literals; empty for the empty clause");
  simqres->add_flag("--existential-pivots", existential_only,
                    "restrict resolution pivots to existential variables");
  add_common(simqres);

  auto* convert = app.add_subcommand("convert", "proof/trace conversions");
  convert->add_option("file", file)->required();
  convert
      ->add_option("--mode", mode,
                   "proof-to-trace | trace-to-proof | clause-to-constraint | "
                   "constraint-to-clause")
      ->required();
  convert->add_option("--proof", proof_path);
  convert->add_option("--trace", trace_path);
  add_common(convert);

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval->parsed()) return cmd_eval(file, opt);
    if (check->parsed()) return cmd_check(file, proof_path, opt);
    if (prove->parsed()) return cmd_prove(file, opt);
    if (refute->parsed()) return cmd_refute(file, policy, max_steps, opt);
    if (trace->parsed()) return cmd_trace(file, trace_path, opt);
    if (consistency->parsed()) return cmd_consistency(file, k, dump, opt);
    if (translate->parsed()) return cmd_translate(file, opt);
    if (simqres->parsed())
      return cmd_simqres(file, target, existential_only, opt);
    if (convert->parsed())
      return cmd_convert(file, mode, proof_path, trace_path, opt);
  } catch (const HashMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPropertyViolated;
  } catch (const ResourceLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResourceLimit;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitOk;
}
