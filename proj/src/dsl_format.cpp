#include <cctype>
#include <sstream>
#include <string>

#include "text_util.hpp"
#include "twinforge/dsl.hpp"

namespace twinforge::dsl {

namespace {

bool is_keyword(const std::string& text) {
  static const char* const kWords[] = {
      "source", "sink", "machine", "split", "merge", "buffer", "conveyor",
      "connect", "via", "for", "in", "subsystem", "inst", "expose", "out",
  };
  for (const char* word : kWords)
    if (text == word) return true;
  return false;
}

// Names that need no quotes: ident-shaped and not mistakable for a keyword.
bool plain_ident(const std::string& text) {
  if (text.empty() || is_keyword(text)) return false;
  if (!std::isalpha(static_cast<unsigned char>(text[0])) && text[0] != '_') return false;
  for (char c : text)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_int_expr(const IntExpr& expr) {
  std::string out;
  bool first = true;
  for (const auto& term : expr.terms) {
    if (term.sign < 0) out += first ? "-" : " - ";
    else if (!first) out += " + ";
    out += term.is_var ? term.var : std::to_string(term.value);
    first = false;
  }
  return out;
}

std::string render_template(const Template& tmpl) {
  if (tmpl.is_literal() && plain_ident(tmpl.literal_text()))
    return tmpl.literal_text();
  std::string out = "\"";
  for (const auto& piece : tmpl.pieces) {
    if (piece.is_expr)
      out += "{" + render_int_expr(piece.expr) + "}";
    else
      out += escape(piece.literal);
  }
  out += "\"";
  return out;
}

std::string render_value(const ValueExpr& value) {
  switch (value.kind) {
    case ValueExpr::Kind::Number:
      return format_double(value.number);
    case ValueExpr::Kind::Text:
      return "\"" + escape(value.text) + "\"";
    case ValueExpr::Kind::Ref:
      return value.text;
    case ValueExpr::Kind::Dist: {
      std::string out = dist_family_name(value.family);
      out += "(";
      bool first = true;
      for (const auto& arg : value.dist_args) {
        if (!first) out += ", ";
        out += arg.is_ref ? arg.ref : format_double(arg.number);
        first = false;
      }
      out += ")";
      return out;
    }
  }
  return {};
}

std::string render_params(const ParamSet& params) {
  if (params.entries.empty()) return {};
  std::string out = " { ";
  bool first = true;
  for (const auto& [key, value] : params.entries) {
    if (!first) out += ", ";
    out += key + " = " + render_value(value);
    first = false;
  }
  out += " }";
  return out;
}

const char* node_keyword(NodeKind kind) {
  switch (kind) {
    case NodeKind::Source: return "source";
    case NodeKind::Sink: return "sink";
    case NodeKind::Machine: return "machine";
    case NodeKind::Splitter: return "split";
    case NodeKind::Merger: return "merge";
  }
  return "?";
}

void render_block(std::ostringstream& out, const std::vector<Stmt>& stmts, int indent);

struct Renderer {
  std::ostringstream& out;
  int indent;

  void pad() const {
    for (int i = 0; i < indent; ++i) out << "  ";
  }

  void operator()(const NodeDecl& decl) const {
    pad();
    out << node_keyword(decl.kind) << " " << render_template(decl.name)
        << render_params(decl.params) << "\n";
  }

  void operator()(const EdgeDecl& decl) const {
    pad();
    out << edge_kind_name(decl.kind) << " " << render_template(decl.name)
        << render_params(decl.params) << "\n";
  }

  void operator()(const ConnectStmt& stmt) const {
    pad();
    out << "connect " << render_template(stmt.from) << " -> " << render_template(stmt.to);
    switch (stmt.via) {
      case ConnectStmt::Via::None:
        break;
      case ConnectStmt::Via::Ref:
        out << " via " << render_template(stmt.via_ref);
        break;
      case ConnectStmt::Via::Inline:
        out << " via " << edge_kind_name(stmt.inline_kind);
        if (stmt.inline_name) out << " " << render_template(*stmt.inline_name);
        out << render_params(stmt.inline_params);
        break;
    }
    out << "\n";
  }

  void operator()(const ForStmt& stmt) const {
    pad();
    out << "for " << stmt.var << " in " << render_int_expr(stmt.lo) << ".."
        << render_int_expr(stmt.hi) << " {\n";
    render_block(out, stmt.body, indent + 1);
    pad();
    out << "}\n";
  }

  void operator()(const SubsystemDecl& decl) const {
    pad();
    out << "subsystem " << decl.name << "(";
    bool first = true;
    for (const auto& formal : decl.formals) {
      if (!first) out << ", ";
      out << formal;
      first = false;
    }
    out << ") {\n";
    render_block(out, decl.body, indent + 1);
    pad();
    out << "}\n";
  }

  void operator()(const InstStmt& stmt) const {
    pad();
    out << "inst " << render_template(stmt.name) << " = " << stmt.subsystem << "(";
    bool first = true;
    for (const auto& arg : stmt.args) {
      if (!first) out << ", ";
      out << render_value(arg);
      first = false;
    }
    out << ")\n";
  }

  void operator()(const ExposeStmt& stmt) const {
    pad();
    out << "expose " << (stmt.is_in ? "in" : "out") << " " << render_template(stmt.ref) << "\n";
  }
};

void render_block(std::ostringstream& out, const std::vector<Stmt>& stmts, int indent) {
  for (const auto& stmt : stmts) std::visit(Renderer{out, indent}, stmt.node);
}

} // namespace

std::string format(const Program& program) {
  std::ostringstream out;
  render_block(out, program.statements, 0);
  return out.str();
}

} // namespace twinforge::dsl
