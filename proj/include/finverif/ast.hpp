#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "finverif/diagnostics.hpp"
#include "finverif/numeric.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Types of the supported Solidity fragment.
// ---------------------------------------------------------------------------

enum class SolTypeKind { UInt, Address, Bool, Mapping, ContractRef };

struct SolType {
  SolTypeKind kind = SolTypeKind::UInt;
  std::shared_ptr<SolType> key;  // mapping key
  std::shared_ptr<SolType> val;  // mapping value
  std::string contract;          // contract reference name

  static SolType uint_type() { return SolType{SolTypeKind::UInt, nullptr, nullptr, ""}; }
  static SolType address_type() { return SolType{SolTypeKind::Address, nullptr, nullptr, ""}; }
  static SolType bool_type() { return SolType{SolTypeKind::Bool, nullptr, nullptr, ""}; }
  static SolType mapping(SolType k, SolType v) {
    SolType t;
    t.kind = SolTypeKind::Mapping;
    t.key = std::make_shared<SolType>(std::move(k));
    t.val = std::make_shared<SolType>(std::move(v));
    return t;
  }
  static SolType contract_ref(std::string name) {
    SolType t;
    t.kind = SolTypeKind::ContractRef;
    t.contract = std::move(name);
    return t;
  }

  bool is_address_to_uint_mapping() const {
    return kind == SolTypeKind::Mapping && key && key->kind == SolTypeKind::Address && val &&
           val->kind == SolTypeKind::UInt;
  }

  std::string to_string() const {
    switch (kind) {
      case SolTypeKind::UInt: return "uint";
      case SolTypeKind::Address: return "address";
      case SolTypeKind::Bool: return "bool";
      case SolTypeKind::Mapping: return "mapping(" + key->to_string() + "=>" + val->to_string() + ")";
      case SolTypeKind::ContractRef: return contract;
    }
    return "?";
  }
};

// ---------------------------------------------------------------------------
// Expressions.
// ---------------------------------------------------------------------------

enum class ExprKind {
  Number,
  BoolLit,
  Ident,
  Index,           // m[e]
  MsgSender,
  BlockTimestamp,
  BalanceOf,       // e.balance
  This,            // address of the enclosing contract
  Binary,          // + - * / % **
  Compare,         // == != < <= > >=
  LogicalAnd,
  LogicalOr,
  LogicalNot,
};

enum class BinOp { Add, Sub, Mul, Div, Mod, Pow };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Number;
  SourceLoc loc;
  U256 number;
  bool bool_value = false;
  std::string name;  // Ident and Index base name
  ExprPtr lhs, rhs;  // Binary/Compare/Logical; Index uses rhs for the index; BalanceOf uses lhs
  BinOp bin_op = BinOp::Add;
  CmpOp cmp_op = CmpOp::Eq;

  static ExprPtr number_lit(U256 v, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Number;
    e->number = v;
    e->loc = loc;
    return e;
  }
  static ExprPtr bool_lit(bool v, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BoolLit;
    e->bool_value = v;
    e->loc = loc;
    return e;
  }
  static ExprPtr ident(std::string n, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ident;
    e->name = std::move(n);
    e->loc = loc;
    return e;
  }
  static ExprPtr index(std::string base, ExprPtr idx, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Index;
    e->name = std::move(base);
    e->rhs = std::move(idx);
    e->loc = loc;
    return e;
  }
  static ExprPtr msg_sender(SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::MsgSender;
    e->loc = loc;
    return e;
  }
  static ExprPtr block_timestamp(SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BlockTimestamp;
    e->loc = loc;
    return e;
  }
  static ExprPtr this_address(SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::This;
    e->loc = loc;
    return e;
  }
  static ExprPtr balance_of(ExprPtr account, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BalanceOf;
    e->lhs = std::move(account);
    e->loc = loc;
    return e;
  }
  static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->bin_op = op;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    e->loc = loc;
    return e;
  }
  static ExprPtr compare(CmpOp op, ExprPtr l, ExprPtr r, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Compare;
    e->cmp_op = op;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    e->loc = loc;
    return e;
  }
  static ExprPtr logical(ExprKind k, ExprPtr l, ExprPtr r, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    e->loc = loc;
    return e;
  }
};

// ---------------------------------------------------------------------------
// Statements.
// ---------------------------------------------------------------------------

enum class StmtKind {
  Assign,
  Declare,
  If,
  Require,
  Return,
  InternalCall,
  Transfer,
  Send,
  CallValue,
  Loop,
  CreateContract,
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;
using StmtSeq = std::vector<StmtPtr>;

struct Stmt {
  StmtKind kind = StmtKind::Return;
  SourceLoc loc;

  ExprPtr lhs;                 // Assign target (Ident or Index)
  ExprPtr rhs;                 // Assign/Declare initializer
  SolType decl_type;           // Declare
  std::string name;            // Declare variable, CreateContract target variable
  ExprPtr cond;                // If/Require/Loop condition
  StmtSeq then_body, else_body;
  std::string contract_name;   // InternalCall/CreateContract callee contract
  std::string fn_name;         // InternalCall function
  ExprPtr callee_address;      // InternalCall address expression (informational)
  std::vector<ExprPtr> args;   // InternalCall arguments
  ExprPtr recipient, amount;   // Transfer/Send/CallValue
  StmtPtr loop_init;           // Loop header pieces
  StmtPtr loop_post;
};

inline StmtPtr make_stmt(StmtKind k, SourceLoc loc = {}) {
  auto s = std::make_shared<Stmt>();
  const_cast<Stmt&>(*s).kind = k;
  const_cast<Stmt&>(*s).loc = loc;
  return s;
}

// ---------------------------------------------------------------------------
// Declarations.
// ---------------------------------------------------------------------------

struct VarDecl {
  std::string name;
  SolType type;
  ExprPtr init;  // may be null
  SourceLoc loc;
};

struct FunctionDef {
  std::string name;
  std::vector<std::pair<std::string, SolType>> params;
  StmtSeq body;
  bool payable = false;
  bool is_constructor = false;
  std::string visibility = "public";
  SourceLoc loc;

  bool has_param(const std::string& n) const {
    for (const auto& [p, t] : params)
      if (p == n) return true;
    return false;
  }
};

struct ContractAst {
  std::string name;
  std::vector<VarDecl> globals;
  std::vector<FunctionDef> functions;  // constructor excluded
  std::vector<std::string> created_contracts;
  FunctionDef constructor;  // valid iff has_constructor
  bool has_constructor = false;
  std::string source_file;
  SourceLoc loc;

  const VarDecl* find_global(const std::string& n) const {
    for (const auto& g : globals)
      if (g.name == n) return &g;
    return nullptr;
  }
  const FunctionDef* find_function(const std::string& n) const {
    for (const auto& f : functions)
      if (f.name == n) return &f;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Pretty printer (used for round-trip checks and canonical index-expression
// keys).
// ---------------------------------------------------------------------------

namespace detail {
inline int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::LogicalOr: return 1;
    case ExprKind::LogicalAnd: return 2;
    case ExprKind::Compare: return 3;
    case ExprKind::Binary:
      switch (e.bin_op) {
        case BinOp::Add:
        case BinOp::Sub: return 4;
        case BinOp::Mul:
        case BinOp::Div:
        case BinOp::Mod: return 5;
        case BinOp::Pow: return 6;
      }
      return 4;
    case ExprKind::LogicalNot: return 7;
    default: return 8;
  }
}
}  // namespace detail

inline std::string print_expr(const ExprPtr& e);

inline std::string print_expr_prec(const ExprPtr& e, int parent_prec) {
  std::string inner = print_expr(e);
  if (detail::precedence(*e) < parent_prec) return "(" + inner + ")";
  return inner;
}

inline std::string print_expr(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Number: return e->number.to_string();
    case ExprKind::BoolLit: return e->bool_value ? "true" : "false";
    case ExprKind::Ident: return e->name;
    case ExprKind::Index: return e->name + "[" + print_expr(e->rhs) + "]";
    case ExprKind::MsgSender: return "msg.sender";
    case ExprKind::BlockTimestamp: return "block.timestamp";
    case ExprKind::This: return "this";
    case ExprKind::BalanceOf: return print_expr_prec(e->lhs, 8) + ".balance";
    case ExprKind::Binary: {
      const char* op = "+";
      switch (e->bin_op) {
        case BinOp::Add: op = "+"; break;
        case BinOp::Sub: op = "-"; break;
        case BinOp::Mul: op = "*"; break;
        case BinOp::Div: op = "/"; break;
        case BinOp::Mod: op = "%"; break;
        case BinOp::Pow: op = "**"; break;
      }
      int p = detail::precedence(*e);
      return print_expr_prec(e->lhs, p) + " " + op + " " + print_expr_prec(e->rhs, p + 1);
    }
    case ExprKind::Compare: {
      const char* op = "==";
      switch (e->cmp_op) {
        case CmpOp::Eq: op = "=="; break;
        case CmpOp::Ne: op = "!="; break;
        case CmpOp::Lt: op = "<"; break;
        case CmpOp::Le: op = "<="; break;
        case CmpOp::Gt: op = ">"; break;
        case CmpOp::Ge: op = ">="; break;
      }
      int p = detail::precedence(*e);
      return print_expr_prec(e->lhs, p + 1) + " " + op + " " + print_expr_prec(e->rhs, p + 1);
    }
    case ExprKind::LogicalAnd: {
      int p = detail::precedence(*e);
      return print_expr_prec(e->lhs, p) + " && " + print_expr_prec(e->rhs, p + 1);
    }
    case ExprKind::LogicalOr: {
      int p = detail::precedence(*e);
      return print_expr_prec(e->lhs, p) + " || " + print_expr_prec(e->rhs, p + 1);
    }
    case ExprKind::LogicalNot:
      return "!" + print_expr_prec(e->lhs, detail::precedence(*e));
  }
  return "?";
}

inline void print_stmts(const StmtSeq& body, std::string& out, int indent);

inline void print_stmt(const Stmt& s, std::string& out, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case StmtKind::Assign:
      out += pad + print_expr(s.lhs) + " = " + print_expr(s.rhs) + ";\n";
      break;
    case StmtKind::Declare:
      out += pad + s.decl_type.to_string() + " " + s.name + " = " + print_expr(s.rhs) + ";\n";
      break;
    case StmtKind::If:
      out += pad + "if (" + print_expr(s.cond) + ") {\n";
      print_stmts(s.then_body, out, indent + 1);
      if (!s.else_body.empty()) {
        out += pad + "} else {\n";
        print_stmts(s.else_body, out, indent + 1);
      }
      out += pad + "}\n";
      break;
    case StmtKind::Require:
      out += pad + "require(" + print_expr(s.cond) + ");\n";
      break;
    case StmtKind::Return:
      out += pad + "return;\n";
      break;
    case StmtKind::InternalCall: {
      out += pad + s.contract_name + "(" + print_expr(s.callee_address) + ")." + s.fn_name + "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i) out += ", ";
        out += print_expr(s.args[i]);
      }
      out += ");\n";
      break;
    }
    case StmtKind::Transfer:
      out += pad + print_expr(s.recipient) + ".transfer(" + print_expr(s.amount) + ");\n";
      break;
    case StmtKind::Send:
      out += pad + print_expr(s.recipient) + ".send(" + print_expr(s.amount) + ");\n";
      break;
    case StmtKind::CallValue:
      out += pad + print_expr(s.recipient) + ".call.value(" + print_expr(s.amount) + ")();\n";
      break;
    case StmtKind::Loop:
      out += pad + "while (" + print_expr(s.cond) + ") {\n";
      if (s.loop_init) print_stmt(*s.loop_init, out, indent + 1);
      print_stmts(s.then_body, out, indent + 1);
      if (s.loop_post) print_stmt(*s.loop_post, out, indent + 1);
      out += pad + "}\n";
      break;
    case StmtKind::CreateContract:
      if (!s.name.empty())
        out += pad + s.name + " = new " + s.contract_name + "();\n";
      else
        out += pad + "new " + s.contract_name + "();\n";
      break;
  }
}

inline void print_stmts(const StmtSeq& body, std::string& out, int indent) {
  for (const auto& st : body) print_stmt(*st, out, indent);
}

inline std::string print_function(const FunctionDef& f) {
  std::string out;
  if (f.is_constructor)
    out += "  constructor(";
  else
    out += "  function " + f.name + "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) out += ", ";
    out += f.params[i].second.to_string() + " " + f.params[i].first;
  }
  out += ") " + f.visibility;
  if (f.payable) out += " payable";
  out += " {\n";
  print_stmts(f.body, out, 2);
  out += "  }\n";
  return out;
}

inline std::string print_contract(const ContractAst& c) {
  std::string out = "contract " + c.name + " {\n";
  for (const auto& g : c.globals) {
    out += "  " + g.type.to_string() + " " + g.name;
    if (g.init) out += " = " + print_expr(g.init);
    out += ";\n";
  }
  if (c.has_constructor) out += print_function(c.constructor);
  for (const auto& f : c.functions) out += print_function(f);
  out += "}\n";
  return out;
}

}  // namespace finverif
