#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

#include "twinforge/dsl.hpp"

namespace twinforge::dsl {

bool Template::is_literal() const {
  for (const auto& piece : pieces)
    if (piece.is_expr) return false;
  return true;
}

std::string Template::literal_text() const {
  std::string out;
  for (const auto& piece : pieces) out += piece.literal;
  return out;
}

namespace {

struct Token {
  enum class Kind {
    Ident, Number, String,
    LBrace, RBrace, LParen, RParen,
    Comma, Eq, Arrow, DotDot, Plus, Minus, Semi,
    End,
  };

  Kind kind = Kind::End;
  std::string text;        // Ident name or String content (escapes resolved)
  double number = 0.0;
  bool is_int = false;
  long long int_value = 0;
  SourceSpan span;
};

[[noreturn]] void fail(const std::string& message, SourceSpan span) {
  throw Error(Errc::Syntax, message, {}, span);
}

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    for (;;) {
      skip_blank();
      Token t = next();
      const bool end = t.kind == Token::Kind::End;
      tokens.push_back(std::move(t));
      if (end) return tokens;
    }
  }

private:
  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  SourceSpan here() const { return {line_, col_, line_, col_}; }

  void skip_blank() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  Token next() {
    Token t;
    t.span = here();
    if (eof()) return t;

    const char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident(t);
    if (std::isdigit(static_cast<unsigned char>(c))) return number(t);
    if (c == '"') return string_literal(t);

    advance();
    switch (c) {
      case '{': t.kind = Token::Kind::LBrace; return t;
      case '}': t.kind = Token::Kind::RBrace; return t;
      case '(': t.kind = Token::Kind::LParen; return t;
      case ')': t.kind = Token::Kind::RParen; return t;
      case ',': t.kind = Token::Kind::Comma; return t;
      case '=': t.kind = Token::Kind::Eq; return t;
      case '+': t.kind = Token::Kind::Plus; return t;
      case ';': t.kind = Token::Kind::Semi; return t;
      case '-':
        if (!eof() && peek() == '>') {
          advance();
          t.kind = Token::Kind::Arrow;
        } else {
          t.kind = Token::Kind::Minus;
        }
        return t;
      case '.':
        if (!eof() && peek() == '.') {
          advance();
          t.kind = Token::Kind::DotDot;
          return t;
        }
        fail("stray '.'", t.span);
      default:
        fail(std::string("unexpected character '") + c + "'", t.span);
    }
  }

  Token ident(Token t) {
    t.kind = Token::Kind::Ident;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
      t.text += advance();
    return t;
  }

  Token number(Token t) {
    t.kind = Token::Kind::Number;
    std::string digits;
    bool is_float = false;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) digits += advance();
    // '..' after an integer is a range, not a fraction.
    if (!eof() && peek() == '.' && pos_ + 1 < text_.size() &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      is_float = true;
      digits += advance();
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) digits += advance();
    }
    if (!eof() && (peek() == 'e' || peek() == 'E')) {
      is_float = true;
      digits += advance();
      if (!eof() && (peek() == '+' || peek() == '-')) digits += advance();
      if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
        fail("malformed exponent", t.span);
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) digits += advance();
    }
    t.number = std::strtod(digits.c_str(), nullptr);
    t.is_int = !is_float;
    if (t.is_int) t.int_value = std::strtoll(digits.c_str(), nullptr, 10);
    return t;
  }

  Token string_literal(Token t) {
    t.kind = Token::Kind::String;
    advance();  // opening quote
    for (;;) {
      if (eof()) fail("unterminated string", t.span);
      char c = advance();
      if (c == '"') return t;
      if (c == '\n') fail("newline in string", t.span);
      if (c == '\\') {
        if (eof()) fail("unterminated escape", t.span);
        char esc = advance();
        switch (esc) {
          case '"': t.text += '"'; break;
          case '\\': t.text += '\\'; break;
          case 'n': t.text += '\n'; break;
          case 't': t.text += '\t'; break;
          default: fail(std::string("unknown escape '\\") + esc + "'", t.span);
        }
      } else {
        t.text += c;
      }
    }
  }
};

// Parses the inside of one `{...}` interpolation: signed idents and integers
// joined by + and -.
IntExpr parse_interpolation(const std::string& text, SourceSpan span) {
  IntExpr expr;
  expr.span = span;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  bool expect_term = true;
  int sign = 1;
  for (skip(); i < text.size(); skip()) {
    char c = text[i];
    if (expect_term) {
      if (c == '-') { sign = -sign; ++i; continue; }
      if (c == '+') { ++i; continue; }
      IntExpr::Term term;
      term.sign = sign;
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string digits;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
          digits += text[i++];
        term.value = std::strtoll(digits.c_str(), nullptr, 10);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        term.is_var = true;
        while (i < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
          term.var += text[i++];
      } else {
        fail(std::string("bad interpolation character '") + c + "'", span);
      }
      expr.terms.push_back(std::move(term));
      expect_term = false;
      sign = 1;
    } else {
      if (c == '+') { ++i; expect_term = true; }
      else if (c == '-') { ++i; expect_term = true; sign = -1; }
      else fail("expected '+' or '-' in interpolation", span);
    }
  }
  if (expr.terms.empty() || expect_term) fail("empty interpolation", span);
  return expr;
}

Template template_from_string(const std::string& content, SourceSpan span) {
  Template tmpl;
  tmpl.quoted = true;
  tmpl.span = span;
  std::string literal;
  std::size_t i = 0;
  while (i < content.size()) {
    char c = content[i];
    if (c == '{') {
      std::size_t close = content.find('}', i + 1);
      if (close == std::string::npos) fail("unclosed '{' in name", span);
      if (!literal.empty()) {
        tmpl.pieces.push_back({false, literal, {}});
        literal.clear();
      }
      Template::Piece piece;
      piece.is_expr = true;
      piece.expr = parse_interpolation(content.substr(i + 1, close - i - 1), span);
      tmpl.pieces.push_back(std::move(piece));
      i = close + 1;
    } else if (c == '}') {
      fail("stray '}' in name", span);
    } else {
      literal += c;
      ++i;
    }
  }
  if (!literal.empty() || tmpl.pieces.empty())
    tmpl.pieces.push_back({false, literal, {}});
  return tmpl;
}

const char* token_name(Token::Kind k) {
  switch (k) {
    case Token::Kind::Ident: return "identifier";
    case Token::Kind::Number: return "number";
    case Token::Kind::String: return "string";
    case Token::Kind::LBrace: return "'{'";
    case Token::Kind::RBrace: return "'}'";
    case Token::Kind::LParen: return "'('";
    case Token::Kind::RParen: return "')'";
    case Token::Kind::Comma: return "','";
    case Token::Kind::Eq: return "'='";
    case Token::Kind::Arrow: return "'->'";
    case Token::Kind::DotDot: return "'..'";
    case Token::Kind::Plus: return "'+'";
    case Token::Kind::Minus: return "'-'";
    case Token::Kind::Semi: return "';'";
    case Token::Kind::End: return "end of input";
  }
  return "?";
}

std::size_t dist_arity(DistFamily family) {
  return DistSpec{family, 0, 0}.param_count();
}

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Program run() {
    Program program;
    skip_semis();
    while (!at(Token::Kind::End)) {
      program.statements.push_back(statement(/*top_level=*/true, /*in_subsystem=*/false));
      skip_semis();
    }
    return program;
  }

private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  const Token& peek() const { return tokens_[pos_]; }
  bool at(Token::Kind k) const { return peek().kind == k; }

  bool at_ident(const char* word) const {
    return peek().kind == Token::Kind::Ident && peek().text == word;
  }

  Token advance() { return tokens_[pos_++]; }

  Token expect(Token::Kind k, const char* what) {
    if (!at(k))
      fail(std::string("expected ") + what + ", found " + token_name(peek().kind), peek().span);
    return advance();
  }

  void skip_semis() {
    while (at(Token::Kind::Semi)) advance();
  }

  Stmt statement(bool top_level, bool in_subsystem) {
    const Token& head = peek();
    if (head.kind != Token::Kind::Ident)
      fail(std::string("expected a statement, found ") + token_name(head.kind), head.span);

    Stmt stmt;
    stmt.span = head.span;
    const std::string& word = head.text;
    if (word == "source") stmt.node = node_decl(NodeKind::Source);
    else if (word == "sink") stmt.node = node_decl(NodeKind::Sink);
    else if (word == "machine") stmt.node = node_decl(NodeKind::Machine);
    else if (word == "split") stmt.node = node_decl(NodeKind::Splitter);
    else if (word == "merge") stmt.node = node_decl(NodeKind::Merger);
    else if (word == "buffer") stmt.node = edge_decl(EdgeKind::Buffer);
    else if (word == "conveyor") stmt.node = edge_decl(EdgeKind::Conveyor);
    else if (word == "connect") stmt.node = connect_stmt();
    else if (word == "for") stmt.node = for_stmt(in_subsystem);
    else if (word == "inst") stmt.node = inst_stmt();
    else if (word == "subsystem") {
      if (!top_level) fail("subsystem definitions must be top-level", head.span);
      stmt.node = subsystem_decl();
    } else if (word == "expose") {
      if (!in_subsystem) fail("'expose' is only valid inside a subsystem", head.span);
      stmt.node = expose_stmt();
    } else {
      fail("unknown statement '" + word + "'", head.span);
    }
    return stmt;
  }

  Template name_template() {
    if (at(Token::Kind::Ident)) {
      Token t = advance();
      Template tmpl;
      tmpl.span = t.span;
      tmpl.pieces.push_back({false, t.text, {}});
      return tmpl;
    }
    if (at(Token::Kind::String)) {
      Token t = advance();
      return template_from_string(t.text, t.span);
    }
    fail(std::string("expected a name, found ") + token_name(peek().kind), peek().span);
  }

  NodeDecl node_decl(NodeKind kind) {
    advance();  // kind keyword
    NodeDecl decl;
    decl.kind = kind;
    decl.name = name_template();
    if (at(Token::Kind::LBrace)) decl.params = param_set();
    return decl;
  }

  EdgeDecl edge_decl(EdgeKind kind) {
    advance();
    EdgeDecl decl;
    decl.kind = kind;
    decl.name = name_template();
    if (at(Token::Kind::LBrace)) decl.params = param_set();
    return decl;
  }

  ConnectStmt connect_stmt() {
    advance();  // 'connect'
    ConnectStmt stmt;
    stmt.from = name_template();
    expect(Token::Kind::Arrow, "'->'");
    stmt.to = name_template();
    if (!at_ident("via")) return stmt;
    advance();
    if (at_ident("buffer") || at_ident("conveyor")) {
      stmt.via = ConnectStmt::Via::Inline;
      stmt.inline_kind = advance().text == "buffer" ? EdgeKind::Buffer : EdgeKind::Conveyor;
      if (at(Token::Kind::Ident) || at(Token::Kind::String))
        stmt.inline_name = name_template();
      if (at(Token::Kind::LBrace)) stmt.inline_params = param_set();
    } else {
      stmt.via = ConnectStmt::Via::Ref;
      stmt.via_ref = name_template();
    }
    return stmt;
  }

  ForStmt for_stmt(bool in_subsystem) {
    advance();  // 'for'
    ForStmt stmt;
    stmt.var = expect(Token::Kind::Ident, "loop variable").text;
    if (!at_ident("in"))
      fail("expected 'in'", peek().span);
    advance();
    stmt.lo = int_expr();
    expect(Token::Kind::DotDot, "'..'");
    stmt.hi = int_expr();
    expect(Token::Kind::LBrace, "'{'");
    skip_semis();
    while (!at(Token::Kind::RBrace)) {
      stmt.body.push_back(statement(/*top_level=*/false, in_subsystem));
      skip_semis();
    }
    advance();  // '}'
    return stmt;
  }

  SubsystemDecl subsystem_decl() {
    advance();  // 'subsystem'
    SubsystemDecl decl;
    decl.name = expect(Token::Kind::Ident, "subsystem name").text;
    expect(Token::Kind::LParen, "'('");
    if (!at(Token::Kind::RParen)) {
      for (;;) {
        decl.formals.push_back(expect(Token::Kind::Ident, "formal parameter").text);
        if (!at(Token::Kind::Comma)) break;
        advance();
      }
    }
    expect(Token::Kind::RParen, "')'");
    expect(Token::Kind::LBrace, "'{'");
    skip_semis();
    while (!at(Token::Kind::RBrace)) {
      decl.body.push_back(statement(/*top_level=*/false, /*in_subsystem=*/true));
      skip_semis();
    }
    advance();
    return decl;
  }

  InstStmt inst_stmt() {
    advance();  // 'inst'
    InstStmt stmt;
    stmt.name = name_template();
    expect(Token::Kind::Eq, "'='");
    stmt.subsystem = expect(Token::Kind::Ident, "subsystem name").text;
    expect(Token::Kind::LParen, "'('");
    if (!at(Token::Kind::RParen)) {
      for (;;) {
        stmt.args.push_back(value_expr());
        if (!at(Token::Kind::Comma)) break;
        advance();
      }
    }
    expect(Token::Kind::RParen, "')'");
    return stmt;
  }

  ExposeStmt expose_stmt() {
    advance();  // 'expose'
    ExposeStmt stmt;
    if (at_ident("in")) stmt.is_in = true;
    else if (at_ident("out")) stmt.is_in = false;
    else fail("expected 'in' or 'out' after 'expose'", peek().span);
    advance();
    stmt.ref = name_template();
    return stmt;
  }

  ParamSet param_set() {
    expect(Token::Kind::LBrace, "'{'");
    ParamSet params;
    if (at(Token::Kind::RBrace)) {
      advance();
      return params;
    }
    for (;;) {
      std::string key = expect(Token::Kind::Ident, "parameter name").text;
      expect(Token::Kind::Eq, "'='");
      params.entries.emplace_back(std::move(key), value_expr());
      if (at(Token::Kind::Comma)) {
        advance();
        if (at(Token::Kind::RBrace)) break;  // trailing comma
        continue;
      }
      break;
    }
    expect(Token::Kind::RBrace, "'}'");
    return params;
  }

  ValueExpr value_expr() {
    ValueExpr value;
    value.span = peek().span;
    if (at(Token::Kind::Minus) || at(Token::Kind::Number)) {
      double sign = 1.0;
      if (at(Token::Kind::Minus)) {
        advance();
        sign = -1.0;
      }
      Token t = expect(Token::Kind::Number, "number");
      value.kind = ValueExpr::Kind::Number;
      value.number = sign * t.number;
      return value;
    }
    if (at(Token::Kind::String)) {
      value.kind = ValueExpr::Kind::Text;
      value.text = advance().text;
      return value;
    }
    Token t = expect(Token::Kind::Ident, "value");
    const auto family = parse_dist_family(t.text);
    if (family && at(Token::Kind::LParen)) {
      advance();
      value.kind = ValueExpr::Kind::Dist;
      value.family = *family;
      if (!at(Token::Kind::RParen)) {
        for (;;) {
          value.dist_args.push_back(dist_arg());
          if (!at(Token::Kind::Comma)) break;
          advance();
        }
      }
      expect(Token::Kind::RParen, "')'");
      if (value.dist_args.size() != dist_arity(*family))
        fail(std::string(dist_family_name(*family)) + " takes " +
                 std::to_string(dist_arity(*family)) + " argument(s), got " +
                 std::to_string(value.dist_args.size()),
             t.span);
      return value;
    }
    value.kind = ValueExpr::Kind::Ref;
    value.text = t.text;
    return value;
  }

  ValueExpr::DistArg dist_arg() {
    ValueExpr::DistArg arg;
    if (at(Token::Kind::Minus) || at(Token::Kind::Number)) {
      double sign = 1.0;
      if (at(Token::Kind::Minus)) {
        advance();
        sign = -1.0;
      }
      arg.number = sign * expect(Token::Kind::Number, "number").number;
      return arg;
    }
    arg.is_ref = true;
    arg.ref = expect(Token::Kind::Ident, "number or name").text;
    return arg;
  }

  IntExpr int_expr() {
    IntExpr expr;
    expr.span = peek().span;
    bool expect_term = true;
    int sign = 1;
    for (;;) {
      if (expect_term) {
        if (at(Token::Kind::Minus)) { advance(); sign = -sign; continue; }
        if (at(Token::Kind::Plus)) { advance(); continue; }
        IntExpr::Term term;
        term.sign = sign;
        if (at(Token::Kind::Number)) {
          Token t = advance();
          if (!t.is_int) fail("range bounds must be integers", t.span);
          term.value = t.int_value;
        } else if (at(Token::Kind::Ident)) {
          term.is_var = true;
          term.var = advance().text;
        } else {
          fail(std::string("expected integer or name, found ") + token_name(peek().kind),
               peek().span);
        }
        expr.terms.push_back(std::move(term));
        expect_term = false;
        sign = 1;
      } else {
        if (at(Token::Kind::Plus)) { advance(); expect_term = true; }
        else if (at(Token::Kind::Minus)) { advance(); expect_term = true; sign = -1; }
        else return expr;
      }
    }
  }
};

std::size_t count_block(const std::vector<Stmt>& stmts);

struct CountVisitor {
  std::size_t operator()(const NodeDecl&) const { return 0; }
  std::size_t operator()(const EdgeDecl&) const { return 0; }
  std::size_t operator()(const ConnectStmt&) const { return 0; }
  std::size_t operator()(const ExposeStmt&) const { return 0; }
  std::size_t operator()(const InstStmt&) const { return 0; }
  std::size_t operator()(const ForStmt& s) const { return count_block(s.body); }
  std::size_t operator()(const SubsystemDecl& s) const { return count_block(s.body); }
};

std::size_t count_block(const std::vector<Stmt>& stmts) {
  std::size_t n = stmts.size();
  for (const auto& s : stmts) n += std::visit(CountVisitor{}, s.node);
  return n;
}

} // namespace

Program parse(const std::string& text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.run();
}

std::size_t statement_count(const Program& program) {
  return count_block(program.statements);
}

} // namespace twinforge::dsl

namespace twinforge {

std::size_t count_statements(const std::string& text) {
  return dsl::statement_count(dsl::parse(text));
}

} // namespace twinforge
