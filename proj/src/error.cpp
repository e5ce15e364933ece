#include "twinforge/error.hpp"

namespace twinforge {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::DuplicateEdgeId: return "DuplicateEdgeId";
    case Errc::EdgeReuse: return "EdgeReuse";
    case Errc::UnknownEndpoint: return "UnknownEndpoint";
    case Errc::PreconditionFailed: return "PreconditionFailed";
    case Errc::Syntax: return "SyntaxError";
    case Errc::UndefinedName: return "UndefinedName";
    case Errc::Elaboration: return "ElaborationError";
    case Errc::Parse: return "ParseError";
    case Errc::Schema: return "SchemaError";
    case Errc::Config: return "ConfigError";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::UnsupportedData: return "UnsupportedData";
    case Errc::NoViableFit: return "NoViableFit";
    case Errc::UnknownFamily: return "UnknownFamily";
    case Errc::BindConflict: return "BindConflict";
    case Errc::Spec: return "SpecError";
    case Errc::Infeasible: return "InfeasibleInjection";
    case Errc::Transport: return "TransportError";
    case Errc::Protocol: return "ProtocolError";
    case Errc::Replay: return "ReplayMiss";
    case Errc::Io: return "IoError";
  }
  return "Error";
}

namespace {

std::string format_message(Errc code, const std::string& message,
                           const std::string& entity,
                           const std::optional<SourceSpan>& span) {
  std::string out = errc_name(code);
  if (span && span->line > 0) {
    out += " at " + std::to_string(span->line) + ":" + std::to_string(span->column);
  }
  if (!entity.empty()) {
    out += " [" + entity + "]";
  }
  out += ": " + message;
  return out;
}

} // namespace

Error::Error(Errc code, std::string message, std::string entity,
             std::optional<SourceSpan> span)
    : std::runtime_error(format_message(code, message, entity, span)),
      code_(code), entity_(std::move(entity)), span_(span) {}

} // namespace twinforge
