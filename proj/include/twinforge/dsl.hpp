#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "twinforge/model.hpp"

namespace twinforge::dsl {

// Integer expression over literals and in-scope loop variables, e.g. `j+1`.
// Kept as a flat signed-term sum; that is all name interpolation needs.
struct IntExpr {
  struct Term {
    int sign = 1;
    bool is_var = false;
    long long value = 0;
    std::string var;
  };
  std::vector<Term> terms;
  SourceSpan span;
};

// Name or reference text with optional `{expr}` interpolations: "M_{i}_{j+1}".
struct Template {
  struct Piece {
    bool is_expr = false;
    std::string literal;
    IntExpr expr;
  };
  std::vector<Piece> pieces;
  bool quoted = false;  // written as a string literal in source
  SourceSpan span;

  bool is_literal() const;
  std::string literal_text() const;  // valid only when is_literal()
};

// Right-hand side of a param assignment or a subsystem argument.
struct ValueExpr {
  enum class Kind { Number, Text, Dist, Ref };
  struct DistArg {
    bool is_ref = false;
    double number = 0.0;
    std::string ref;
  };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string text;  // Text payload, or referenced name for Ref
  DistFamily family = DistFamily::Deterministic;
  std::vector<DistArg> dist_args;
  SourceSpan span;
};

struct ParamSet {
  std::vector<std::pair<std::string, ValueExpr>> entries;
};

struct Stmt;

struct NodeDecl {
  NodeKind kind = NodeKind::Machine;
  Template name;
  ParamSet params;
};

// Declares an edge for a later `connect ... via <name>` to bind.
struct EdgeDecl {
  EdgeKind kind = EdgeKind::Buffer;
  Template name;
  ParamSet params;
};

struct ConnectStmt {
  enum class Via { None, Ref, Inline };

  Template from;
  Template to;
  Via via = Via::None;
  Template via_ref;                      // Via::Ref
  EdgeKind inline_kind = EdgeKind::Buffer;  // Via::Inline
  std::optional<Template> inline_name;
  ParamSet inline_params;
};

// Half-open range: `for i in 0..100` runs i = 0 .. 99.
struct ForStmt {
  std::string var;
  IntExpr lo;
  IntExpr hi;
  std::vector<Stmt> body;
};

struct ExposeStmt {
  bool is_in = true;
  Template ref;
};

struct SubsystemDecl {
  std::string name;
  std::vector<std::string> formals;
  std::vector<Stmt> body;  // includes ExposeStmt entries
};

struct InstStmt {
  Template name;
  std::string subsystem;
  std::vector<ValueExpr> args;
};

struct Stmt {
  std::variant<NodeDecl, EdgeDecl, ConnectStmt, ForStmt, SubsystemDecl, InstStmt, ExposeStmt> node;
  SourceSpan span;
};

struct Program {
  std::vector<Stmt> statements;
};

// Throws Error(Errc::Syntax) with line:column on malformed text.
Program parse(const std::string& text);

// Total statement nodes, counting through for/subsystem bodies.
std::size_t statement_count(const Program& program);

// Canonical pretty-print. format(parse(format(parse(t)))) == format(parse(t)).
std::string format(const Program& program);

} // namespace twinforge::dsl

namespace twinforge {

// Expand a parsed program to a flat graph: loops unrolled, names
// interpolated, subsystem instances cloned with ids prefixed "Inst/Name".
// Throws UndefinedName / ElaborationError / DuplicateId / EdgeReuse.
ModelGraph elaborate(const dsl::Program& program);

// parse + elaborate in one step.
ModelGraph elaborate_dsl(const std::string& text);

// parse + statement_count; the density metric for DSL text.
std::size_t count_statements(const std::string& text);

} // namespace twinforge
