#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "twinforge/dsl.hpp"

namespace twinforge {

namespace {

using namespace dsl;

struct Env {
  std::map<std::string, long long> loop_vars;
  std::map<std::string, ParamValue> formals;
};

struct InstPorts {
  std::string in_port;   // flat id receiving external input
  std::string out_port;  // flat id providing external output
};

struct PendingEdge {
  Edge edge;
  SourceSpan span;
  bool bound = false;
};

// One naming frame: the root program or one subsystem instantiation.
// Loops do not open frames; their bodies share the enclosing one.
struct Frame {
  ScopePath scope;
  std::map<std::string, std::string> node_names;  // local name -> flat id
  std::map<std::string, InstPorts> instances;
  std::map<std::string, PendingEdge> declared_edges;
  // Port refs are evaluated where the expose statement runs (its loop vars
  // are live there) but resolved at frame close, so they may name nodes
  // declared later in the body.
  std::optional<std::string> expose_in;
  std::optional<std::string> expose_out;
  SourceSpan expose_in_span, expose_out_span;
};

class Elaborator {
public:
  explicit Elaborator(const Program& program) : program_(program) {}

  ModelGraph run() {
    for (const auto& stmt : program_.statements) {
      if (const auto* def = std::get_if<SubsystemDecl>(&stmt.node)) {
        if (!defs_.emplace(def->name, def).second)
          throw Error(Errc::DuplicateId, "subsystem '" + def->name + "' defined twice",
                      def->name, stmt.span);
      }
    }
    Frame root;
    Env env;
    exec_block(program_.statements, root, env);
    close_frame(root);
    return std::move(graph_);
  }

private:
  const Program& program_;
  std::map<std::string, const SubsystemDecl*> defs_;
  std::vector<std::string> active_defs_;
  ModelGraph graph_;
  std::unordered_map<std::string, std::size_t> node_index_;  // id -> nodes slot
  std::unordered_map<std::string, std::size_t> edge_index_;  // id -> edges slot

  static std::string flat_id(const Frame& frame, const std::string& local) {
    if (frame.scope.empty()) return local;
    return scope_to_string(frame.scope) + "/" + local;
  }

  long long eval_int(const IntExpr& expr, const Env& env) {
    long long sum = 0;
    for (const auto& term : expr.terms) {
      long long v;
      if (!term.is_var) {
        v = term.value;
      } else if (auto it = env.loop_vars.find(term.var); it != env.loop_vars.end()) {
        v = it->second;
      } else if (auto fit = env.formals.find(term.var); fit != env.formals.end()) {
        const ParamValue& p = fit->second;
        if (p.type != ParamValue::Type::Number || p.number != std::floor(p.number))
          throw Error(Errc::Elaboration,
                      "'" + term.var + "' is not an integer here", term.var, expr.span);
        v = static_cast<long long>(p.number);
      } else {
        throw Error(Errc::UndefinedName, "'" + term.var + "' is not in scope",
                    term.var, expr.span);
      }
      sum += term.sign * v;
    }
    return sum;
  }

  std::string eval_template(const Template& tmpl, const Env& env) {
    std::string out;
    for (const auto& piece : tmpl.pieces) {
      if (!piece.is_expr) {
        out += piece.literal;
        continue;
      }
      const long long v = eval_int(piece.expr, env);
      if (v < 0)
        throw Error(Errc::Elaboration,
                    "name interpolation produced a negative value", out, tmpl.span);
      out += std::to_string(v);
    }
    if (out.empty())
      throw Error(Errc::Elaboration, "name expands to an empty string", {}, tmpl.span);
    return out;
  }

  ParamValue eval_value(const ValueExpr& value, const Env& env) {
    switch (value.kind) {
      case ValueExpr::Kind::Number:
        return ParamValue::of(value.number);
      case ValueExpr::Kind::Text:
        return ParamValue::of(value.text);
      case ValueExpr::Kind::Ref: {
        if (auto it = env.loop_vars.find(value.text); it != env.loop_vars.end())
          return ParamValue::of(static_cast<double>(it->second));
        if (auto fit = env.formals.find(value.text); fit != env.formals.end())
          return fit->second;
        throw Error(Errc::UndefinedName, "'" + value.text + "' is not in scope",
                    value.text, value.span);
      }
      case ValueExpr::Kind::Dist: {
        double args[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < value.dist_args.size() && i < 2; ++i) {
          const auto& arg = value.dist_args[i];
          if (!arg.is_ref) {
            args[i] = arg.number;
            continue;
          }
          const ParamValue resolved = eval_value(
              ValueExpr{ValueExpr::Kind::Ref, 0.0, arg.ref, {}, {}, value.span}, env);
          if (resolved.type != ParamValue::Type::Number)
            throw Error(Errc::Elaboration,
                        "'" + arg.ref + "' does not name a number", arg.ref, value.span);
          args[i] = resolved.number;
        }
        return ParamValue::of(DistSpec{value.family, args[0], args[1]});
      }
    }
    return ParamValue::unset();
  }

  ParamMap eval_params(const ParamSet& params, const Env& env) {
    ParamMap out;
    for (const auto& [key, value] : params.entries) out[key] = eval_value(value, env);
    return out;
  }

  void check_local_name_free(const Frame& frame, const std::string& local, SourceSpan span) {
    if (frame.node_names.count(local) || frame.instances.count(local))
      throw Error(Errc::DuplicateId, "name '" + local + "' already declared here",
                  local, span);
  }

  // Endpoint resolution: a local node name, or an instance name standing for
  // its exposed port (out port on the from side, in port on the to side).
  std::string resolve_endpoint(const std::string& local, const Frame& frame,
                               bool from_side, SourceSpan span) {
    if (auto it = frame.node_names.find(local); it != frame.node_names.end())
      return it->second;
    if (auto it = frame.instances.find(local); it != frame.instances.end())
      return from_side ? it->second.out_port : it->second.in_port;
    throw Error(Errc::UndefinedName, "'" + local + "' names no node or instance here",
                local, span);
  }

  std::string fresh_edge_id(const Frame& frame, const std::string& base_local) {
    std::string id = flat_id(frame, base_local);
    for (int suffix = 2; edge_index_.count(id); ++suffix)
      id = flat_id(frame, base_local + "_" + std::to_string(suffix));
    return id;
  }

  void exec_block(const std::vector<Stmt>& stmts, Frame& frame, Env& env) {
    for (const auto& stmt : stmts) exec_stmt(stmt, frame, env);
  }

  void exec_stmt(const Stmt& stmt, Frame& frame, Env& env) {
    std::visit([&](const auto& node) { exec(node, stmt.span, frame, env); }, stmt.node);
  }

  void exec(const SubsystemDecl&, SourceSpan, Frame&, Env&) {
    // Definitions were collected up front; nothing to expand at their site.
  }

  void exec(const NodeDecl& decl, SourceSpan span, Frame& frame, Env& env) {
    const std::string local = eval_template(decl.name, env);
    check_local_name_free(frame, local, span);
    Node node;
    node.id = flat_id(frame, local);
    node.kind = decl.kind;
    node.params = eval_params(decl.params, env);
    node.scope = frame.scope;
    // Direct insertion with a hash index: add_node's linear duplicate scan
    // would make large regular structures quadratic to elaborate.
    if (!node_index_.emplace(node.id, graph_.nodes.size()).second)
      throw Error(Errc::DuplicateId, "node id already present", node.id, span);
    if (!node.scope.empty()) graph_.scopes.insert(node.scope);
    frame.node_names.emplace(local, node.id);
    graph_.nodes.push_back(std::move(node));
  }

  void exec(const EdgeDecl& decl, SourceSpan span, Frame& frame, Env& env) {
    const std::string local = eval_template(decl.name, env);
    if (frame.declared_edges.count(local))
      throw Error(Errc::DuplicateId, "edge '" + local + "' already declared here",
                  local, span);
    PendingEdge pending;
    pending.edge.id = flat_id(frame, local);
    pending.edge.kind = decl.kind;
    pending.edge.params = eval_params(decl.params, env);
    pending.span = span;
    frame.declared_edges.emplace(local, std::move(pending));
  }

  void exec(const ConnectStmt& stmt, SourceSpan span, Frame& frame, Env& env) {
    const std::string from_local = eval_template(stmt.from, env);
    const std::string to_local = eval_template(stmt.to, env);
    const std::string from = resolve_endpoint(from_local, frame, true, stmt.from.span);
    const std::string to = resolve_endpoint(to_local, frame, false, stmt.to.span);

    Edge edge;
    switch (stmt.via) {
      case ConnectStmt::Via::None:
        edge.kind = EdgeKind::Buffer;
        edge.id = fresh_edge_id(frame, from_local + "__" + to_local);
        edge.params["capacity"] = ParamValue::of(1.0);
        break;
      case ConnectStmt::Via::Ref: {
        const std::string name = eval_template(stmt.via_ref, env);
        auto it = frame.declared_edges.find(name);
        if (it == frame.declared_edges.end())
          throw Error(Errc::UndefinedName, "'" + name + "' names no declared edge here",
                      name, stmt.via_ref.span);
        if (it->second.bound)
          throw Error(Errc::EdgeReuse, "edge '" + name + "' is already connected",
                      it->second.edge.id, span);
        it->second.bound = true;
        edge = it->second.edge;
        break;
      }
      case ConnectStmt::Via::Inline: {
        edge.kind = stmt.inline_kind;
        edge.params = eval_params(stmt.inline_params, env);
        if (stmt.inline_name) {
          const std::string local = eval_template(*stmt.inline_name, env);
          edge.id = flat_id(frame, local);
        } else {
          edge.id = fresh_edge_id(frame, from_local + "__" + to_local);
        }
        if (edge.kind == EdgeKind::Buffer && !edge.params.count("capacity"))
          edge.params["capacity"] = ParamValue::of(1.0);
        break;
      }
    }

    if (auto it = edge_index_.find(edge.id); it != edge_index_.end()) {
      const Edge& existing = graph_.edges[it->second];
      if (existing.from == from && existing.to == to)
        throw Error(Errc::DuplicateEdgeId, "edge id already present", edge.id, span);
      throw Error(Errc::EdgeReuse,
                  "edge already bound " + existing.from + " -> " + existing.to,
                  edge.id, span);
    }
    // Endpoints were resolved against the frame's name tables, so connect's
    // node-existence scans are redundant; push directly, as with nodes.
    edge.from = from;
    edge.to = to;
    edge_index_.emplace(edge.id, graph_.edges.size());
    graph_.edges.push_back(std::move(edge));
  }

  void exec(const ForStmt& stmt, SourceSpan span, Frame& frame, Env& env) {
    if (env.loop_vars.count(stmt.var))
      throw Error(Errc::Elaboration, "loop variable '" + stmt.var + "' shadows another",
                  stmt.var, span);
    const long long lo = eval_int(stmt.lo, env);
    const long long hi = eval_int(stmt.hi, env);
    if (lo > hi)
      throw Error(Errc::Elaboration,
                  "range " + std::to_string(lo) + ".." + std::to_string(hi) + " is reversed",
                  stmt.var, span);
    for (long long v = lo; v < hi; ++v) {
      env.loop_vars[stmt.var] = v;
      exec_block(stmt.body, frame, env);
    }
    env.loop_vars.erase(stmt.var);
  }

  void exec(const ExposeStmt& stmt, SourceSpan span, Frame& frame, Env& env) {
    auto& slot = stmt.is_in ? frame.expose_in : frame.expose_out;
    if (slot)
      throw Error(Errc::Elaboration,
                  std::string("'expose ") + (stmt.is_in ? "in" : "out") + "' given twice",
                  {}, span);
    slot = eval_template(stmt.ref, env);
    (stmt.is_in ? frame.expose_in_span : frame.expose_out_span) = span;
  }

  void exec(const InstStmt& stmt, SourceSpan span, Frame& frame, Env& env) {
    auto def_it = defs_.find(stmt.subsystem);
    if (def_it == defs_.end())
      throw Error(Errc::UndefinedName, "no subsystem named '" + stmt.subsystem + "'",
                  stmt.subsystem, span);
    const SubsystemDecl& def = *def_it->second;
    for (const auto& active : active_defs_)
      if (active == def.name)
        throw Error(Errc::Elaboration,
                    "subsystem '" + def.name + "' instantiates itself", def.name, span);
    if (stmt.args.size() != def.formals.size())
      throw Error(Errc::Elaboration,
                  "'" + def.name + "' takes " + std::to_string(def.formals.size()) +
                      " argument(s), got " + std::to_string(stmt.args.size()),
                  def.name, span);

    const std::string local = eval_template(stmt.name, env);
    check_local_name_free(frame, local, span);

    Env inner;
    for (std::size_t i = 0; i < def.formals.size(); ++i)
      inner.formals[def.formals[i]] = eval_value(stmt.args[i], env);

    Frame sub;
    sub.scope = frame.scope;
    sub.scope.push_back(local);
    graph_.scopes.insert(sub.scope);

    active_defs_.push_back(def.name);
    exec_block(def.body, sub, inner);
    active_defs_.pop_back();

    InstPorts ports = close_subsystem_frame(sub, def.name, span);
    frame.instances.emplace(local, std::move(ports));
  }

  // Shared close-out: edges declared in this frame must all have been bound.
  void close_frame(const Frame& frame) {
    for (const auto& [local, pending] : frame.declared_edges)
      if (!pending.bound)
        throw Error(Errc::Elaboration, "edge '" + local + "' declared but never connected",
                    pending.edge.id, pending.span);
  }

  InstPorts close_subsystem_frame(const Frame& frame, const std::string& def_name,
                                  SourceSpan span) {
    close_frame(frame);
    if (!frame.expose_in)
      throw Error(Errc::Elaboration, "subsystem '" + def_name + "' exposes no in port",
                  def_name, span);
    if (!frame.expose_out)
      throw Error(Errc::Elaboration, "subsystem '" + def_name + "' exposes no out port",
                  def_name, span);
    InstPorts ports;
    // The in port receives external flow (to side); the out port feeds it.
    ports.in_port = resolve_endpoint(*frame.expose_in, frame, false, frame.expose_in_span);
    ports.out_port = resolve_endpoint(*frame.expose_out, frame, true, frame.expose_out_span);
    return ports;
  }
};

} // namespace

ModelGraph elaborate(const dsl::Program& program) {
  return Elaborator(program).run();
}

ModelGraph elaborate_dsl(const std::string& text) {
  return elaborate(dsl::parse(text));
}

} // namespace twinforge
