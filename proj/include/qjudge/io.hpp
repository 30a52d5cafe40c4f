#ifndef QJUDGE_IO_HPP
#define QJUDGE_IO_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include "qjudge/clause.hpp"
#include "qjudge/consistency.hpp"
#include "qjudge/judgement.hpp"
#include "qjudge/model.hpp"
#include "qjudge/trace.hpp"

namespace qjudge {

struct ParseError : std::runtime_error {
  enum class Kind { Lexical, Structural, Validation };

  ParseError(Kind k, int line, int col, const std::string& message)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) +
                           ": " + message),
        kind(k),
        line(line),
        col(col) {}

  Kind kind;
  int line;
  int col;
};

/// A proof or trace bound to a different instance than the one supplied.
/// This is a check failure, not a parse failure.
struct HashMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParsedInstance {
  enum class Kind { Qcsp, Qcbf } kind = Kind::Qcsp;
  std::optional<QcInstance> qcsp;
  std::optional<QcbfFormula> qcbf;
};

/// Sections SORTS / RELATIONS / UNIVERSE / TUPLES / FORMULA for QCSP
/// documents; a bare FORMULA section with (clause ...) leaves for QCBF.
ParsedInstance parse_instance(const std::string& text);

std::string print_instance(const QcInstance& inst);
std::string print_instance(const QcbfFormula& f);

/// FNV-1a over the canonical document; binds proofs to their instance.
std::string instance_hash(const std::string& canonical_text);
std::string instance_hash(const QcInstance& inst);
std::string instance_hash(const QcbfFormula& f);

std::string print_judgement_proof(const QcInstance& inst,
                                  const JudgementProof& proof);
JudgementProof parse_judgement_proof(const QcInstance& inst,
                                     const std::string& text,
                                     bool check_hash = true);

std::string print_clause_proof(const QcbfFormula& f, const ClauseProof& proof);
ClauseProof parse_clause_proof(const QcbfFormula& f, const std::string& text,
                               bool check_hash = true);

/// Indented tree text, one node per line:
///   S=[(i,u,A|E),...] a={v=b,...}
/// with leaves suffixed " falsifies @index".
std::string print_trace(const QcbfFormula& f, const Trace& t);
Trace parse_trace(const QcbfFormula& f, const std::string& text);

/// One line per (i, V): "i [v1,v2] : {rows}", sorted lexicographically.
std::string print_table(const QcInstance& inst,
                        const ConstraintSystemTable& table);

}  // namespace qjudge

#endif  // QJUDGE_IO_HPP
