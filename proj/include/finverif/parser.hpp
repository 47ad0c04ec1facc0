#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "finverif/ast.hpp"
#include "finverif/diagnostics.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok {
  End, Ident, Number,
  LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Semi, Comma, Dot, Arrow,  // Arrow is the => of mapping types
  Assign, PlusAssign, MinusAssign, StarAssign, SlashAssign,
  Plus, Minus, Star, Slash, Percent, StarStar,
  Eq, Ne, Lt, Le, Gt, Ge, AndAnd, OrOr, Not,
  PlusPlus, MinusMinus,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  U256 number;
  SourceLoc loc;
};

class Lexer {
public:
  explicit Lexer(std::string source) : src_(std::move(source)) {}

  Result<std::vector<Token>> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= src_.size()) break;
      SourceLoc loc{line_, col_};
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string word;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          word.push_back(take());
        out.push_back(Token{Tok::Ident, word, U256(), loc});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string word;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_]))))
          word.push_back(take());
        auto value = U256::parse(word);
        if (!value)
          return make_diag(DiagKind::SyntaxError, loc, "malformed number literal '" + word + "'");
        out.push_back(Token{Tok::Number, word, *value, loc});
        continue;
      }
      Tok kind;
      std::string text;
      if (!punct(kind, text))
        return make_diag(DiagKind::SyntaxError, loc,
                         std::string("unexpected character '") + c + "'");
      out.push_back(Token{kind, text, U256(), loc});
    }
    out.push_back(Token{Tok::End, "", U256(), SourceLoc{line_, col_}});
    return out;
  }

private:
  char take() {
    char c = src_[pos_++];
    if (c == '\n') { ++line_; col_ = 1; } else ++col_;
    return c;
  }
  bool match(const char* s) {
    std::size_t n = std::string_view(s).size();
    if (src_.compare(pos_, n, s) != 0) return false;
    for (std::size_t i = 0; i < n; ++i) take();
    return true;
  }
  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { take(); continue; }
      if (src_.compare(pos_, 2, "//") == 0) {
        while (pos_ < src_.size() && src_[pos_] != '\n') take();
        continue;
      }
      if (src_.compare(pos_, 2, "/*") == 0) {
        take(); take();
        while (pos_ < src_.size() && src_.compare(pos_, 2, "*/") != 0) take();
        if (pos_ < src_.size()) { take(); take(); }
        continue;
      }
      break;
    }
  }
  bool punct(Tok& kind, std::string& text) {
    struct Entry { const char* s; Tok t; };
    static const Entry table[] = {
        {"=>", Tok::Arrow}, {"**", Tok::StarStar}, {"==", Tok::Eq}, {"!=", Tok::Ne},
        {"<=", Tok::Le}, {">=", Tok::Ge}, {"&&", Tok::AndAnd}, {"||", Tok::OrOr},
        {"+=", Tok::PlusAssign}, {"-=", Tok::MinusAssign}, {"*=", Tok::StarAssign},
        {"/=", Tok::SlashAssign}, {"++", Tok::PlusPlus}, {"--", Tok::MinusMinus},
        {"{", Tok::LBrace}, {"}", Tok::RBrace}, {"(", Tok::LParen}, {")", Tok::RParen},
        {"[", Tok::LBracket}, {"]", Tok::RBracket}, {";", Tok::Semi}, {",", Tok::Comma},
        {".", Tok::Dot}, {"=", Tok::Assign}, {"+", Tok::Plus}, {"-", Tok::Minus},
        {"*", Tok::Star}, {"/", Tok::Slash}, {"%", Tok::Percent}, {"<", Tok::Lt},
        {">", Tok::Gt}, {"!", Tok::Not},
    };
    for (const auto& e : table) {
      if (match(e.s)) { kind = e.t; text = e.s; return true; }
    }
    return false;
  }

  std::string src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser for the supported contract fragment.
// ---------------------------------------------------------------------------

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Result<std::vector<ContractAst>> parse_file() {
    std::vector<ContractAst> out;
    skip_pragmas();
    if (at_end())
      return make_diag(DiagKind::SyntaxError, cur().loc, "empty input, expected 'contract'");
    while (!at_end()) {
      skip_pragmas();
      if (at_end()) break;
      auto c = parse_contract_decl();
      if (!c) return c.error();
      out.push_back(std::move(c.value()));
    }
    if (out.empty())
      return make_diag(DiagKind::SyntaxError, cur().loc, "no contract declaration found");
    return out;
  }

private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  bool at_end() const { return cur().kind == Tok::End; }
  Token advance() { return toks_[pos_++]; }
  bool check(Tok k) const { return cur().kind == k; }
  bool check_word(const char* w) const { return cur().kind == Tok::Ident && cur().text == w; }
  bool accept(Tok k) {
    if (check(k)) { ++pos_; return true; }
    return false;
  }
  bool accept_word(const char* w) {
    if (check_word(w)) { ++pos_; return true; }
    return false;
  }
  Diagnostic err(const std::string& m) const {
    return make_diag(DiagKind::SyntaxError, cur().loc, m);
  }
  Diagnostic unsupported(const std::string& m, SourceLoc loc) const {
    return make_diag(DiagKind::UnsupportedFeature, loc, m);
  }

  void skip_pragmas() {
    while (check_word("pragma")) {
      while (!at_end() && !accept(Tok::Semi)) ++pos_;
    }
  }

  static bool is_type_keyword(const std::string& w) {
    return w == "uint" || w == "uint256" || w == "uint8" || w == "address" || w == "bool" ||
           w == "mapping";
  }

  Result<SolType> parse_type() {
    if (!check(Tok::Ident)) return err("expected a type");
    std::string w = cur().text;
    SourceLoc loc = cur().loc;
    if (w == "uint" || w == "uint256" || w == "uint8") { advance(); return SolType::uint_type(); }
    if (w == "address") {
      advance();
      accept_word("payable");
      return SolType::address_type();
    }
    if (w == "bool") { advance(); return SolType::bool_type(); }
    if (w == "mapping") {
      advance();
      if (!accept(Tok::LParen)) return err("expected '(' after mapping");
      auto key = parse_type();
      if (!key) return key.error();
      if (!accept(Tok::Arrow)) return err("expected '=>' in mapping type");
      auto val = parse_type();
      if (!val) return val.error();
      if (!accept(Tok::RParen)) return err("expected ')' after mapping type");
      if (key.value().kind != SolTypeKind::Address || val.value().kind != SolTypeKind::UInt)
        return unsupported("only mapping(address=>uint) is supported", loc);
      return SolType::mapping(key.value(), val.value());
    }
    // Any other identifier in type position names a contract.
    advance();
    return SolType::contract_ref(w);
  }

  Result<ContractAst> parse_contract_decl() {
    if (!accept_word("contract")) return err("expected 'contract'");
    ContractAst ast;
    ast.loc = cur().loc;
    if (!check(Tok::Ident)) return err("expected contract name");
    ast.name = advance().text;
    if (accept_word("is"))
      return unsupported("contract inheritance is not supported", cur().loc);
    if (!accept(Tok::LBrace)) return err("expected '{' after contract name");

    std::set<std::string> global_names, function_names;
    while (!check(Tok::RBrace)) {
      if (at_end()) return err("unterminated contract body");
      if (check_word("function") || check_word("constructor")) {
        auto fn = parse_function(ast);
        if (!fn) return fn.error();
        FunctionDef def = std::move(fn.value());
        if (def.is_constructor) {
          if (ast.has_constructor)
            return make_diag(DiagKind::SyntaxError, def.loc, "duplicate constructor");
          ast.constructor = std::move(def);
          ast.has_constructor = true;
        } else {
          if (!function_names.insert(def.name).second)
            return make_diag(DiagKind::SyntaxError, def.loc,
                             "duplicate function '" + def.name + "'");
          ast.functions.push_back(std::move(def));
        }
        continue;
      }
      if (check_word("event") || check_word("modifier") || check_word("struct") ||
          check_word("enum") || check_word("using"))
        return unsupported("'" + cur().text + "' declarations are not supported", cur().loc);
      // Global variable declaration.
      auto ty = parse_type();
      if (!ty) return ty.error();
      // visibility markers on state variables
      while (check_word("public") || check_word("private") || check_word("internal") ||
             check_word("constant"))
        advance();
      if (!check(Tok::Ident)) return err("expected global variable name");
      VarDecl g;
      g.loc = cur().loc;
      g.name = advance().text;
      g.type = ty.value();
      if (!global_names.insert(g.name).second)
        return make_diag(DiagKind::SyntaxError, g.loc, "duplicate global '" + g.name + "'");
      if (accept(Tok::Assign)) {
        auto init = parse_expr();
        if (!init) return init.error();
        g.init = init.value();
      }
      if (!accept(Tok::Semi)) return err("expected ';' after global declaration");
      if (g.type.kind == SolTypeKind::ContractRef)
        contract_ref_globals_[g.name] = g.type.contract;
      ast.globals.push_back(std::move(g));
    }
    advance();  // consume '}'

    if (ast.has_constructor) {
      for (const auto& s : ast.constructor.body)
        if (s->kind == StmtKind::CreateContract) ast.created_contracts.push_back(s->contract_name);
    }
    return ast;
  }

  Result<FunctionDef> parse_function(const ContractAst& enclosing) {
    FunctionDef fn;
    fn.loc = cur().loc;
    if (accept_word("constructor")) {
      fn.is_constructor = true;
      fn.name = "constructor";
    } else {
      advance();  // 'function'
      if (!check(Tok::Ident)) return err("expected function name");
      fn.name = advance().text;
      if (fn.name == enclosing.name)
        return unsupported("old-style constructors are not supported; use 'constructor'", fn.loc);
    }
    if (!accept(Tok::LParen)) return err("expected '(' after function name");
    while (!check(Tok::RParen)) {
      auto ty = parse_type();
      if (!ty) return ty.error();
      if (!check(Tok::Ident)) return err("expected parameter name");
      std::string pname = advance().text;
      fn.params.emplace_back(pname, ty.value());
      if (!accept(Tok::Comma)) break;
    }
    if (!accept(Tok::RParen)) return err("expected ')' after parameters");
    while (check(Tok::Ident)) {
      std::string w = cur().text;
      if (w == "public" || w == "private" || w == "internal" || w == "external") {
        fn.visibility = w;
        advance();
      } else if (w == "payable") {
        fn.payable = true;
        advance();
      } else if (w == "view" || w == "pure") {
        advance();
      } else if (w == "returns") {
        return unsupported("functions with return values are not supported", cur().loc);
      } else {
        break;
      }
    }
    if (!accept(Tok::LBrace)) return err("expected '{' to start function body");
    auto body = parse_block_contents();
    if (!body) return body.error();
    fn.body = std::move(body.value());
    return fn;
  }

  Result<StmtSeq> parse_block_contents() {
    StmtSeq out;
    while (!check(Tok::RBrace)) {
      if (at_end()) return err("unterminated block");
      auto s = parse_stmt();
      if (!s) return s.error();
      out.push_back(std::move(s.value()));
    }
    advance();  // '}'
    return out;
  }

  Result<StmtSeq> parse_block_or_single() {
    if (accept(Tok::LBrace)) return parse_block_contents();
    auto s = parse_stmt();
    if (!s) return s.error();
    StmtSeq seq;
    seq.push_back(std::move(s.value()));
    return seq;
  }

  Result<StmtPtr> parse_stmt() {
    SourceLoc loc = cur().loc;
    if (check_word("if")) return parse_if();
    if (check_word("while") || check_word("for")) return parse_loop();
    if (accept_word("require")) {
      if (!accept(Tok::LParen)) return err("expected '(' after require");
      auto cond = parse_expr();
      if (!cond) return cond.error();
      if (!accept(Tok::RParen)) return err("expected ')' after require condition");
      if (!accept(Tok::Semi)) return err("expected ';' after require");
      auto s = std::make_shared<Stmt>();
      s->kind = StmtKind::Require;
      s->loc = loc;
      s->cond = cond.value();
      return StmtPtr(s);
    }
    if (accept_word("return")) {
      if (!check(Tok::Semi))
        return unsupported("returning a value is not supported", loc);
      advance();
      return make_stmt(StmtKind::Return, loc);
    }
    if (check(Tok::Ident) && is_type_keyword(cur().text)) return parse_declare();
    return parse_assign_or_call();
  }

  Result<StmtPtr> parse_if() {
    SourceLoc loc = cur().loc;
    advance();  // 'if'
    if (!accept(Tok::LParen)) return err("expected '(' after if");
    auto cond = parse_expr();
    if (!cond) return cond.error();
    if (!accept(Tok::RParen)) return err("expected ')' after if condition");
    auto then_body = parse_block_or_single();
    if (!then_body) return then_body.error();
    StmtSeq else_body;
    if (accept_word("else")) {
      auto eb = parse_block_or_single();
      if (!eb) return eb.error();
      else_body = std::move(eb.value());
    }
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::If;
    s->loc = loc;
    s->cond = cond.value();
    s->then_body = std::move(then_body.value());
    s->else_body = std::move(else_body);
    return StmtPtr(s);
  }

  Result<StmtPtr> parse_loop() {
    SourceLoc loc = cur().loc;
    bool is_for = cur().text == "for";
    advance();
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Loop;
    s->loc = loc;
    if (!accept(Tok::LParen)) return err("expected '(' after loop keyword");
    if (is_for) {
      if (!check(Tok::Semi)) {
        Result<StmtPtr> init = check(Tok::Ident) && is_type_keyword(cur().text)
                                   ? parse_declare()
                                   : parse_assign_or_call();
        if (!init) return init.error();
        s->loop_init = init.value();  // parse_declare consumed the ';'
      } else {
        advance();
      }
      auto cond = parse_expr();
      if (!cond) return cond.error();
      s->cond = cond.value();
      if (!accept(Tok::Semi)) return err("expected ';' after loop condition");
      if (!check(Tok::RParen)) {
        auto post = parse_loop_post();
        if (!post) return post.error();
        s->loop_post = post.value();
      }
      if (!accept(Tok::RParen)) return err("expected ')' after loop header");
    } else {
      auto cond = parse_expr();
      if (!cond) return cond.error();
      s->cond = cond.value();
      if (!accept(Tok::RParen)) return err("expected ')' after while condition");
    }
    auto body = parse_block_or_single();
    if (!body) return body.error();
    s->then_body = std::move(body.value());
    return StmtPtr(s);
  }

  // i++ / i-- / i += k / i = i + k, without the trailing ';'
  Result<StmtPtr> parse_loop_post() {
    if (!check(Tok::Ident)) return err("expected loop update");
    SourceLoc loc = cur().loc;
    std::string name = advance().text;
    auto lhs = Expr::ident(name, loc);
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Assign;
    s->loc = loc;
    s->lhs = lhs;
    if (accept(Tok::PlusPlus)) {
      s->rhs = Expr::binary(BinOp::Add, lhs, Expr::number_lit(U256(1)), loc);
      return StmtPtr(s);
    }
    if (accept(Tok::MinusMinus)) {
      s->rhs = Expr::binary(BinOp::Sub, lhs, Expr::number_lit(U256(1)), loc);
      return StmtPtr(s);
    }
    Tok op = cur().kind;
    if (op == Tok::PlusAssign || op == Tok::MinusAssign || op == Tok::Assign) {
      advance();
      auto rhs = parse_expr();
      if (!rhs) return rhs.error();
      if (op == Tok::PlusAssign)
        s->rhs = Expr::binary(BinOp::Add, lhs, rhs.value(), loc);
      else if (op == Tok::MinusAssign)
        s->rhs = Expr::binary(BinOp::Sub, lhs, rhs.value(), loc);
      else
        s->rhs = rhs.value();
      return StmtPtr(s);
    }
    return err("unsupported loop update");
  }

  Result<StmtPtr> parse_declare() {
    SourceLoc loc = cur().loc;
    auto ty = parse_type();
    if (!ty) return ty.error();
    if (!check(Tok::Ident)) return err("expected variable name in declaration");
    std::string name = advance().text;
    if (!accept(Tok::Assign))
      return unsupported("local declarations must have an initializer", loc);
    auto rhs = parse_expr();
    if (!rhs) return rhs.error();
    if (!accept(Tok::Semi)) return err("expected ';' after declaration");
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Declare;
    s->loc = loc;
    s->decl_type = ty.value();
    s->name = name;
    s->rhs = rhs.value();
    return StmtPtr(s);
  }

  Result<StmtPtr> parse_assign_or_call() {
    SourceLoc loc = cur().loc;
    // new T(); as a bare statement (constructors only; checked later)
    if (check_word("new")) {
      advance();
      if (!check(Tok::Ident)) return err("expected contract name after new");
      std::string cname = advance().text;
      if (!accept(Tok::LParen) || !accept(Tok::RParen))
        return err("expected '()' after contract creation");
      if (!accept(Tok::Semi)) return err("expected ';'");
      auto s = std::make_shared<Stmt>();
      s->kind = StmtKind::CreateContract;
      s->loc = loc;
      s->contract_name = cname;
      return StmtPtr(s);
    }

    // Lookahead for `X(....).f(...)` internal call syntax.
    if (check(Tok::Ident) && peek().kind == Tok::LParen) {
      std::size_t save = pos_;
      std::string cname = advance().text;
      advance();  // '('
      auto addr = parse_expr();
      if (addr && accept(Tok::RParen) && accept(Tok::Dot)) {
        return parse_internal_call_tail(cname, addr.value(), loc);
      }
      pos_ = save;
    }

    // Plain lvalue assignment, create-assignment, or member-call statement.
    if (!check(Tok::Ident) && !check_word("msg") && !check_word("this"))
      return err("expected a statement");

    // lvalue forms first: ident ('[' expr ']')? (op)= expr ;
    if (check(Tok::Ident) && !check_word("msg") && !check_word("this")) {
      std::size_t save = pos_;
      std::string name = advance().text;
      ExprPtr lhs;
      if (accept(Tok::LBracket)) {
        auto idx = parse_expr();
        if (!idx) return idx.error();
        if (!accept(Tok::RBracket)) return err("expected ']'");
        lhs = Expr::index(name, idx.value(), loc);
      } else {
        lhs = Expr::ident(name, loc);
      }
      Tok k = cur().kind;
      if (k == Tok::Assign || k == Tok::PlusAssign || k == Tok::MinusAssign ||
          k == Tok::StarAssign || k == Tok::SlashAssign) {
        advance();
        if (k == Tok::Assign && check_word("new")) {
          advance();
          if (!check(Tok::Ident)) return err("expected contract name after new");
          std::string cname = advance().text;
          if (!accept(Tok::LParen) || !accept(Tok::RParen))
            return err("expected '()' after contract creation");
          if (!accept(Tok::Semi)) return err("expected ';'");
          auto s = std::make_shared<Stmt>();
          s->kind = StmtKind::CreateContract;
          s->loc = loc;
          s->name = name;
          s->contract_name = cname;
          return StmtPtr(s);
        }
        auto rhs = parse_expr();
        if (!rhs) return rhs.error();
        if (!accept(Tok::Semi)) return err("expected ';' after assignment");
        ExprPtr value = rhs.value();
        switch (k) {
          case Tok::PlusAssign: value = Expr::binary(BinOp::Add, lhs, value, loc); break;
          case Tok::MinusAssign: value = Expr::binary(BinOp::Sub, lhs, value, loc); break;
          case Tok::StarAssign: value = Expr::binary(BinOp::Mul, lhs, value, loc); break;
          case Tok::SlashAssign: value = Expr::binary(BinOp::Div, lhs, value, loc); break;
          default: break;
        }
        auto s = std::make_shared<Stmt>();
        s->kind = StmtKind::Assign;
        s->loc = loc;
        s->lhs = lhs;
        s->rhs = value;
        return StmtPtr(s);
      }
      pos_ = save;
    }

    // Member-call statement: recipient.transfer(v); recipient.send(v);
    // recipient.call.value(v)(); recipient.call().value(v); or tok.f(args);
    auto base = parse_primary();
    if (!base) return base.error();
    if (!accept(Tok::Dot)) return err("expected '.' in call statement");
    if (!check(Tok::Ident)) return err("expected member name");
    std::string member = advance().text;
    if (member == "transfer" || member == "send") {
      bool contract_target = base.value()->kind == ExprKind::Ident &&
                             contract_ref_globals_.count(base.value()->name) > 0;
      if (!contract_target) {
        if (!accept(Tok::LParen)) return err("expected '(' after " + member);
        auto amount = parse_expr();
        if (!amount) return amount.error();
        if (!accept(Tok::RParen)) return err("expected ')'");
        if (!accept(Tok::Semi)) return err("expected ';'");
        auto s = std::make_shared<Stmt>();
        s->kind = member == "transfer" ? StmtKind::Transfer : StmtKind::Send;
        s->loc = loc;
        s->recipient = base.value();
        s->amount = amount.value();
        return StmtPtr(s);
      }
      // falls through to internal call on a contract-typed global
    }
    if (member == "call") {
      // accept call.value(v)() and call().value(v)()
      if (accept(Tok::LParen)) {
        if (!accept(Tok::RParen)) return err("expected ')' after call(");
      }
      if (!accept(Tok::Dot) || !accept_word("value"))
        return unsupported("bare call() without .value is not supported", loc);
      if (!accept(Tok::LParen)) return err("expected '(' after value");
      auto amount = parse_expr();
      if (!amount) return amount.error();
      if (!accept(Tok::RParen)) return err("expected ')'");
      if (accept(Tok::LParen)) {
        if (!accept(Tok::RParen)) return err("expected ')'");
      }
      if (!accept(Tok::Semi)) return err("expected ';'");
      auto s = std::make_shared<Stmt>();
      s->kind = StmtKind::CallValue;
      s->loc = loc;
      s->recipient = base.value();
      s->amount = amount.value();
      return StmtPtr(s);
    }
    // tok.f(args); internal call through a contract-typed global
    if (base.value()->kind == ExprKind::Ident &&
        contract_ref_globals_.count(base.value()->name) > 0) {
      return parse_internal_call_tail_named(contract_ref_globals_.at(base.value()->name),
                                            base.value(), member, loc);
    }
    return unsupported("unsupported call '" + member + "'", loc);
  }

  Result<StmtPtr> parse_internal_call_tail(const std::string& contract_name, ExprPtr addr,
                                           SourceLoc loc) {
    if (!check(Tok::Ident)) return err("expected function name in internal call");
    std::string fn = advance().text;
    return parse_internal_call_tail_named(contract_name, addr, fn, loc);
  }

  Result<StmtPtr> parse_internal_call_tail_named(const std::string& contract_name, ExprPtr addr,
                                                 const std::string& fn, SourceLoc loc) {
    if (!accept(Tok::LParen)) return err("expected '(' in internal call");
    std::vector<ExprPtr> args;
    while (!check(Tok::RParen)) {
      auto a = parse_expr();
      if (!a) return a.error();
      args.push_back(a.value());
      if (!accept(Tok::Comma)) break;
    }
    if (!accept(Tok::RParen)) return err("expected ')' after arguments");
    if (!accept(Tok::Semi)) return err("expected ';' after internal call");
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::InternalCall;
    s->loc = loc;
    s->contract_name = contract_name;
    s->fn_name = fn;
    s->callee_address = addr;
    s->args = std::move(args);
    return StmtPtr(s);
  }

  // ---- expressions --------------------------------------------------------

  Result<ExprPtr> parse_expr() { return parse_or(); }

  Result<ExprPtr> parse_or() {
    auto l = parse_and();
    if (!l) return l;
    while (check(Tok::OrOr)) {
      SourceLoc loc = advance().loc;
      auto r = parse_and();
      if (!r) return r;
      l = Result<ExprPtr>(Expr::logical(ExprKind::LogicalOr, l.value(), r.value(), loc));
    }
    return l;
  }

  Result<ExprPtr> parse_and() {
    auto l = parse_cmp();
    if (!l) return l;
    while (check(Tok::AndAnd)) {
      SourceLoc loc = advance().loc;
      auto r = parse_cmp();
      if (!r) return r;
      l = Result<ExprPtr>(Expr::logical(ExprKind::LogicalAnd, l.value(), r.value(), loc));
    }
    return l;
  }

  Result<ExprPtr> parse_cmp() {
    auto l = parse_add();
    if (!l) return l;
    CmpOp op;
    bool has = true;
    switch (cur().kind) {
      case Tok::Eq: op = CmpOp::Eq; break;
      case Tok::Ne: op = CmpOp::Ne; break;
      case Tok::Lt: op = CmpOp::Lt; break;
      case Tok::Le: op = CmpOp::Le; break;
      case Tok::Gt: op = CmpOp::Gt; break;
      case Tok::Ge: op = CmpOp::Ge; break;
      default: has = false; op = CmpOp::Eq; break;
    }
    if (!has) return l;
    SourceLoc loc = advance().loc;
    auto r = parse_add();
    if (!r) return r;
    return Result<ExprPtr>(Expr::compare(op, l.value(), r.value(), loc));
  }

  Result<ExprPtr> parse_add() {
    auto l = parse_mul();
    if (!l) return l;
    while (check(Tok::Plus) || check(Tok::Minus)) {
      BinOp op = cur().kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      SourceLoc loc = advance().loc;
      auto r = parse_mul();
      if (!r) return r;
      l = Result<ExprPtr>(Expr::binary(op, l.value(), r.value(), loc));
    }
    return l;
  }

  Result<ExprPtr> parse_mul() {
    auto l = parse_pow();
    if (!l) return l;
    while (check(Tok::Star) || check(Tok::Slash) || check(Tok::Percent)) {
      BinOp op = cur().kind == Tok::Star ? BinOp::Mul
                 : cur().kind == Tok::Slash ? BinOp::Div
                                            : BinOp::Mod;
      SourceLoc loc = advance().loc;
      auto r = parse_pow();
      if (!r) return r;
      l = Result<ExprPtr>(Expr::binary(op, l.value(), r.value(), loc));
    }
    return l;
  }

  Result<ExprPtr> parse_pow() {
    auto l = parse_unary();
    if (!l) return l;
    if (check(Tok::StarStar)) {
      SourceLoc loc = advance().loc;
      auto r = parse_pow();  // right associative
      if (!r) return r;
      return Result<ExprPtr>(Expr::binary(BinOp::Pow, l.value(), r.value(), loc));
    }
    return l;
  }

  Result<ExprPtr> parse_unary() {
    if (check(Tok::Not)) {
      SourceLoc loc = advance().loc;
      auto e = parse_unary();
      if (!e) return e;
      return Result<ExprPtr>(Expr::logical(ExprKind::LogicalNot, e.value(), nullptr, loc));
    }
    return parse_postfix();
  }

  Result<ExprPtr> parse_postfix() {
    auto base = parse_primary();
    if (!base) return base;
    while (accept(Tok::Dot)) {
      if (!check(Tok::Ident)) return err("expected member after '.'");
      SourceLoc loc = cur().loc;
      std::string member = advance().text;
      if (member == "balance") {
        base = Result<ExprPtr>(Expr::balance_of(base.value(), loc));
        continue;
      }
      return unsupported("member '" + member + "' is not supported in expressions", loc);
    }
    return base;
  }

  Result<ExprPtr> parse_primary() {
    SourceLoc loc = cur().loc;
    if (check(Tok::Number)) {
      Token t = advance();
      return Result<ExprPtr>(Expr::number_lit(t.number, loc));
    }
    if (accept_word("true")) return Result<ExprPtr>(Expr::bool_lit(true, loc));
    if (accept_word("false")) return Result<ExprPtr>(Expr::bool_lit(false, loc));
    if (accept(Tok::LParen)) {
      auto e = parse_expr();
      if (!e) return e;
      if (!accept(Tok::RParen)) return err("expected ')'");
      return e;
    }
    if (check_word("msg")) {
      advance();
      if (!accept(Tok::Dot)) return err("expected '.' after msg");
      if (accept_word("sender")) return Result<ExprPtr>(Expr::msg_sender(loc));
      if (check_word("value"))
        return unsupported("msg.value is not supported", loc);
      return err("unknown msg member");
    }
    if (check_word("block")) {
      advance();
      if (!accept(Tok::Dot)) return err("expected '.' after block");
      if (accept_word("timestamp")) return Result<ExprPtr>(Expr::block_timestamp(loc));
      return unsupported("only block.timestamp is supported", loc);
    }
    if (accept_word("this")) return Result<ExprPtr>(Expr::this_address(loc));
    if (check_word("address")) {
      // address(this)
      advance();
      if (accept(Tok::LParen)) {
        if (accept_word("this")) {
          if (!accept(Tok::RParen)) return err("expected ')'");
          return Result<ExprPtr>(Expr::this_address(loc));
        }
        auto e = parse_expr();
        if (!e) return e;
        if (!accept(Tok::RParen)) return err("expected ')'");
        return e;  // address cast is a no-op here
      }
      return err("expected '(' after address");
    }
    if (check(Tok::Ident)) {
      std::string name = advance().text;
      if (accept(Tok::LBracket)) {
        auto idx = parse_expr();
        if (!idx) return idx;
        if (!accept(Tok::RBracket)) return err("expected ']'");
        return Result<ExprPtr>(Expr::index(name, idx.value(), loc));
      }
      return Result<ExprPtr>(Expr::ident(name, loc));
    }
    return err("expected an expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, std::string> contract_ref_globals_;  // global -> contract type
};

// Parse one source file (possibly several contracts).
inline Result<std::vector<ContractAst>> parse_source(const std::string& text,
                                                     const std::string& file = "") {
  Lexer lexer(text);
  auto toks = lexer.run();
  if (!toks) {
    Diagnostic d = toks.error();
    d.file = file;
    return d;
  }
  Parser parser(std::move(toks.value()));
  auto result = parser.parse_file();
  if (!result) {
    Diagnostic d = result.error();
    d.file = file;
    return d;
  }
  for (auto& c : result.value()) c.source_file = file;
  return result;
}

// Parse a source expected to hold exactly one contract.
inline Result<ContractAst> parse_contract(const std::string& text, const std::string& file = "") {
  auto r = parse_source(text, file);
  if (!r) return r.error();
  if (r.value().size() != 1)
    return make_diag(DiagKind::SyntaxError, SourceLoc{1, 1},
                     "expected exactly one contract in input");
  return r.value().front();
}

}  // namespace finverif
