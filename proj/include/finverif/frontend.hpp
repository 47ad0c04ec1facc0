#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "finverif/ast.hpp"
#include "finverif/diagnostics.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Loop unrolling. Loops whose trip count is a static constant within the
// bound are replaced by straight-line copies of the body with the induction
// variable substituted per iteration.
// ---------------------------------------------------------------------------

namespace detail {

inline ExprPtr substitute_ident(const ExprPtr& e, const std::string& name, const ExprPtr& value) {
  if (!e) return e;
  switch (e->kind) {
    case ExprKind::Ident:
      return e->name == name ? value : e;
    case ExprKind::Index: {
      auto idx = substitute_ident(e->rhs, name, value);
      if (idx == e->rhs) return e;
      return Expr::index(e->name, idx, e->loc);
    }
    case ExprKind::BalanceOf: {
      auto a = substitute_ident(e->lhs, name, value);
      if (a == e->lhs) return e;
      return Expr::balance_of(a, e->loc);
    }
    case ExprKind::Binary: {
      auto l = substitute_ident(e->lhs, name, value);
      auto r = substitute_ident(e->rhs, name, value);
      if (l == e->lhs && r == e->rhs) return e;
      return Expr::binary(e->bin_op, l, r, e->loc);
    }
    case ExprKind::Compare: {
      auto l = substitute_ident(e->lhs, name, value);
      auto r = substitute_ident(e->rhs, name, value);
      if (l == e->lhs && r == e->rhs) return e;
      return Expr::compare(e->cmp_op, l, r, e->loc);
    }
    case ExprKind::LogicalAnd:
    case ExprKind::LogicalOr: {
      auto l = substitute_ident(e->lhs, name, value);
      auto r = substitute_ident(e->rhs, name, value);
      if (l == e->lhs && r == e->rhs) return e;
      return Expr::logical(e->kind, l, r, e->loc);
    }
    case ExprKind::LogicalNot: {
      auto l = substitute_ident(e->lhs, name, value);
      if (l == e->lhs) return e;
      return Expr::logical(ExprKind::LogicalNot, l, nullptr, e->loc);
    }
    default:
      return e;
  }
}

inline StmtPtr substitute_stmt(const StmtPtr& s, const std::string& name, const ExprPtr& value);

inline StmtSeq substitute_seq(const StmtSeq& body, const std::string& name, const ExprPtr& value) {
  StmtSeq out;
  out.reserve(body.size());
  for (const auto& s : body) out.push_back(substitute_stmt(s, name, value));
  return out;
}

inline StmtPtr substitute_stmt(const StmtPtr& s, const std::string& name, const ExprPtr& value) {
  auto n = std::make_shared<Stmt>(*s);
  n->lhs = substitute_ident(s->lhs, name, value);
  n->rhs = substitute_ident(s->rhs, name, value);
  n->cond = substitute_ident(s->cond, name, value);
  n->recipient = substitute_ident(s->recipient, name, value);
  n->amount = substitute_ident(s->amount, name, value);
  n->callee_address = substitute_ident(s->callee_address, name, value);
  for (auto& a : n->args) a = substitute_ident(a, name, value);
  n->then_body = substitute_seq(s->then_body, name, value);
  n->else_body = substitute_seq(s->else_body, name, value);
  if (s->loop_init) n->loop_init = substitute_stmt(s->loop_init, name, value);
  if (s->loop_post) n->loop_post = substitute_stmt(s->loop_post, name, value);
  return n;
}

inline bool eval_const(const ExprPtr& e, U256& out) {
  if (!e) return false;
  switch (e->kind) {
    case ExprKind::Number: out = e->number; return true;
    case ExprKind::Binary: {
      U256 l, r;
      if (!eval_const(e->lhs, l) || !eval_const(e->rhs, r)) return false;
      switch (e->bin_op) {
        case BinOp::Add: out = l + r; return true;
        case BinOp::Sub: out = l - r; return true;
        case BinOp::Mul: out = l * r; return true;
        case BinOp::Div: out = l / r; return true;
        case BinOp::Mod: out = l % r; return true;
        case BinOp::Pow: out = l.pow(r); return true;
      }
      return false;
    }
    default: return false;
  }
}

inline bool eval_const_cmp(const ExprPtr& e, const std::string& var, const U256& var_value,
                           bool& out) {
  if (!e || e->kind != ExprKind::Compare) return false;
  auto resolve = [&](const ExprPtr& side, U256& v) {
    if (side->kind == ExprKind::Ident && side->name == var) { v = var_value; return true; }
    return eval_const(substitute_ident(side, var, Expr::number_lit(var_value)), v);
  };
  U256 l, r;
  if (!resolve(e->lhs, l) || !resolve(e->rhs, r)) return false;
  switch (e->cmp_op) {
    case CmpOp::Eq: out = l == r; break;
    case CmpOp::Ne: out = !(l == r); break;
    case CmpOp::Lt: out = l < r; break;
    case CmpOp::Le: out = l <= r; break;
    case CmpOp::Gt: out = l > r; break;
    case CmpOp::Ge: out = l >= r; break;
  }
  return true;
}

inline bool assigns_to(const StmtSeq& body, const std::string& var) {
  for (const auto& s : body) {
    if (s->kind == StmtKind::Assign && s->lhs->kind == ExprKind::Ident && s->lhs->name == var)
      return true;
    if (assigns_to(s->then_body, var) || assigns_to(s->else_body, var)) return true;
  }
  return false;
}

inline bool contains_return(const StmtSeq& body) {
  for (const auto& s : body) {
    if (s->kind == StmtKind::Return) return true;
    if (contains_return(s->then_body) || contains_return(s->else_body)) return true;
  }
  return false;
}

}  // namespace detail

inline Result<StmtSeq> unroll_seq(const StmtSeq& body, int bound);

inline Result<StmtSeq> unroll_loop_stmt(const Stmt& loop, int bound) {
  using namespace detail;
  if (contains_return(loop.then_body))
    return make_diag(DiagKind::UnsupportedFeature, loop.loc, "return inside a loop body");

  std::string var;
  U256 value;
  bool have_var = false;
  bool init_was_declare = false;
  if (loop.loop_init) {
    const Stmt& init = *loop.loop_init;
    if (init.kind == StmtKind::Declare) {
      if (!eval_const(init.rhs, value))
        return make_diag(DiagKind::UnboundedLoop, loop.loc,
                         "loop start value is not a static constant");
      var = init.name;
      have_var = true;
      init_was_declare = true;
    } else if (init.kind == StmtKind::Assign && init.lhs->kind == ExprKind::Ident) {
      if (!eval_const(init.rhs, value))
        return make_diag(DiagKind::UnboundedLoop, loop.loc,
                         "loop start value is not a static constant");
      var = init.lhs->name;
      have_var = true;
    } else {
      return make_diag(DiagKind::UnboundedLoop, loop.loc, "unsupported loop initializer");
    }
  }

  if (have_var && assigns_to(loop.then_body, var))
    return make_diag(DiagKind::UnboundedLoop, loop.loc,
                     "loop variable is modified inside the body");

  StmtSeq out;
  int trips = 0;
  while (true) {
    bool cond_value = false;
    if (have_var) {
      if (!eval_const_cmp(loop.cond, var, value, cond_value))
        return make_diag(DiagKind::UnboundedLoop, loop.loc,
                         "loop condition cannot be evaluated statically");
    } else {
      U256 c;
      if (detail::eval_const(loop.cond, c)) cond_value = !c.is_zero();
      else if (loop.cond->kind == ExprKind::BoolLit) cond_value = loop.cond->bool_value;
      else
        return make_diag(DiagKind::UnboundedLoop, loop.loc,
                         "loop condition cannot be evaluated statically");
    }
    if (!cond_value) break;
    if (++trips > bound)
      return make_diag(DiagKind::BoundExceeded, loop.loc,
                       "loop exceeds the unroll bound of " + std::to_string(bound));
    StmtSeq iteration = have_var
                            ? substitute_seq(loop.then_body, var, Expr::number_lit(value))
                            : loop.then_body;
    auto unrolled = unroll_seq(iteration, bound);
    if (!unrolled) return unrolled.error();
    for (auto& s : unrolled.value()) out.push_back(std::move(s));
    if (loop.loop_post) {
      StmtPtr post = substitute_stmt(loop.loop_post, var, Expr::number_lit(value));
      U256 next;
      if (!eval_const(post->rhs, next))
        return make_diag(DiagKind::UnboundedLoop, loop.loc,
                         "loop update is not statically evaluable");
      value = next;
    } else if (have_var) {
      return make_diag(DiagKind::UnboundedLoop, loop.loc, "loop variable is never updated");
    }
  }

  // Keep the final value visible when the variable outlives the loop.
  if (have_var && !init_was_declare) {
    auto fin = std::make_shared<Stmt>();
    fin->kind = StmtKind::Assign;
    fin->loc = loop.loc;
    fin->lhs = Expr::ident(var, loop.loc);
    fin->rhs = Expr::number_lit(value, loop.loc);
    out.push_back(fin);
  }
  return out;
}

inline Result<StmtSeq> unroll_seq(const StmtSeq& body, int bound) {
  StmtSeq out;
  for (const auto& s : body) {
    if (s->kind == StmtKind::Loop) {
      auto flat = unroll_loop_stmt(*s, bound);
      if (!flat) return flat.error();
      for (auto& f : flat.value()) out.push_back(std::move(f));
      continue;
    }
    if (!s->then_body.empty() || !s->else_body.empty()) {
      auto n = std::make_shared<Stmt>(*s);
      auto tb = unroll_seq(s->then_body, bound);
      if (!tb) return tb.error();
      auto eb = unroll_seq(s->else_body, bound);
      if (!eb) return eb.error();
      n->then_body = std::move(tb.value());
      n->else_body = std::move(eb.value());
      out.push_back(n);
      continue;
    }
    out.push_back(s);
  }
  return out;
}

inline Result<ContractAst> unroll_loops(const ContractAst& ast, int bound) {
  ContractAst out = ast;
  for (auto& f : out.functions) {
    auto body = unroll_seq(f.body, bound);
    if (!body) {
      Diagnostic d = body.error();
      d.file = ast.source_file;
      return d;
    }
    f.body = std::move(body.value());
  }
  if (out.has_constructor) {
    auto body = unroll_seq(out.constructor.body, bound);
    if (!body) {
      Diagnostic d = body.error();
      d.file = ast.source_file;
      return d;
    }
    out.constructor.body = std::move(body.value());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Support checks: every internal call must target a known contract and
// contract creation may only appear inside constructors.
// ---------------------------------------------------------------------------

namespace detail {
inline void check_seq_support(const StmtSeq& body, const std::set<std::string>& known,
                              bool in_constructor, const std::string& file,
                              std::vector<Diagnostic>& out) {
  for (const auto& s : body) {
    if (s->kind == StmtKind::InternalCall && known.count(s->contract_name) == 0) {
      Diagnostic d = make_diag(DiagKind::UnsupportedFeature, s->loc,
                               "call into unknown contract '" + s->contract_name + "'");
      d.file = file;
      out.push_back(d);
    }
    if (s->kind == StmtKind::CreateContract && !in_constructor) {
      Diagnostic d = make_diag(DiagKind::UnsupportedFeature, s->loc,
                               "dynamic contract creation outside a constructor");
      d.file = file;
      out.push_back(d);
    }
    check_seq_support(s->then_body, known, in_constructor, file, out);
    check_seq_support(s->else_body, known, in_constructor, file, out);
  }
}
}  // namespace detail

inline std::vector<Diagnostic> check_support(const ContractAst& ast,
                                             const std::set<std::string>& known_contracts) {
  std::vector<Diagnostic> out;
  for (const auto& f : ast.functions)
    detail::check_seq_support(f.body, known_contracts, false, ast.source_file, out);
  if (ast.has_constructor)
    detail::check_seq_support(ast.constructor.body, known_contracts, true, ast.source_file, out);
  return out;
}

// ---------------------------------------------------------------------------
// Return synthesis and unreachable-code detection. Every function body must
// end in a return so the translated transaction always completes.
// ---------------------------------------------------------------------------

namespace detail {
inline bool check_no_dead_code(const StmtSeq& body, Diagnostic& diag, const std::string& file) {
  for (std::size_t i = 0; i < body.size(); ++i) {
    const Stmt& s = *body[i];
    if (s.kind == StmtKind::Return && i + 1 < body.size()) {
      diag = make_diag(DiagKind::UnsupportedFeature, body[i + 1]->loc,
                       "unreachable statement after return");
      diag.file = file;
      return false;
    }
    if (!check_no_dead_code(s.then_body, diag, file) ||
        !check_no_dead_code(s.else_body, diag, file))
      return false;
  }
  return true;
}
}  // namespace detail

inline Result<ContractAst> synthesize_returns(const ContractAst& ast) {
  ContractAst out = ast;
  for (auto& f : out.functions) {
    Diagnostic diag;
    if (!detail::check_no_dead_code(f.body, diag, ast.source_file)) return diag;
    if (f.body.empty() || f.body.back()->kind != StmtKind::Return)
      f.body.push_back(make_stmt(StmtKind::Return, f.loc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boolean lowering: compile &&, || and ! away so that every branch condition
// is a single relational expression. Works on statements, duplicating the
// else-branch the way short-circuit evaluation requires.
// ---------------------------------------------------------------------------

namespace detail {

inline ExprPtr negate_expr(const ExprPtr& e);

inline ExprPtr normalize_not(const ExprPtr& e) {
  if (e->kind == ExprKind::LogicalNot) return negate_expr(normalize_not(e->lhs));
  if (e->kind == ExprKind::LogicalAnd || e->kind == ExprKind::LogicalOr)
    return Expr::logical(e->kind, normalize_not(e->lhs), normalize_not(e->rhs), e->loc);
  return e;
}

inline ExprPtr negate_expr(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Compare: {
      CmpOp op;
      switch (e->cmp_op) {
        case CmpOp::Eq: op = CmpOp::Ne; break;
        case CmpOp::Ne: op = CmpOp::Eq; break;
        case CmpOp::Lt: op = CmpOp::Ge; break;
        case CmpOp::Le: op = CmpOp::Gt; break;
        case CmpOp::Gt: op = CmpOp::Le; break;
        case CmpOp::Ge: op = CmpOp::Lt; break;
      }
      return Expr::compare(op, e->lhs, e->rhs, e->loc);
    }
    case ExprKind::LogicalAnd:
      return Expr::logical(ExprKind::LogicalOr, negate_expr(e->lhs), negate_expr(e->rhs), e->loc);
    case ExprKind::LogicalOr:
      return Expr::logical(ExprKind::LogicalAnd, negate_expr(e->lhs), negate_expr(e->rhs), e->loc);
    case ExprKind::LogicalNot:
      return normalize_not(e->lhs);
    case ExprKind::BoolLit:
      return Expr::bool_lit(!e->bool_value, e->loc);
    default:
      // numeric truthiness: !e  <=>  e == 0
      return Expr::compare(CmpOp::Eq, e, Expr::number_lit(U256(0)), e->loc);
  }
}

inline StmtSeq lower_seq(const StmtSeq& body);

inline StmtPtr make_if(ExprPtr cond, StmtSeq then_body, StmtSeq else_body, SourceLoc loc) {
  auto s = std::make_shared<Stmt>();
  s->kind = StmtKind::If;
  s->loc = loc;
  s->cond = std::move(cond);
  s->then_body = std::move(then_body);
  s->else_body = std::move(else_body);
  return s;
}

// Expand an if over a compound condition into nested ifs with leaf conditions.
inline StmtPtr lower_if(ExprPtr cond, StmtSeq then_body, StmtSeq else_body, SourceLoc loc) {
  cond = normalize_not(cond);
  if (cond->kind == ExprKind::LogicalAnd) {
    StmtSeq inner;
    inner.push_back(lower_if(cond->rhs, then_body, else_body, loc));
    return lower_if(cond->lhs, std::move(inner), else_body, loc);
  }
  if (cond->kind == ExprKind::LogicalOr) {
    StmtSeq inner;
    inner.push_back(lower_if(cond->rhs, then_body, else_body, loc));
    return lower_if(cond->lhs, std::move(then_body), std::move(inner), loc);
  }
  return make_if(cond, std::move(then_body), std::move(else_body), loc);
}

inline void lower_stmt(const StmtPtr& s, StmtSeq& out) {
  switch (s->kind) {
    case StmtKind::If: {
      StmtSeq tb = lower_seq(s->then_body);
      StmtSeq eb = lower_seq(s->else_body);
      out.push_back(lower_if(s->cond, std::move(tb), std::move(eb), s->loc));
      return;
    }
    case StmtKind::Require: {
      ExprPtr cond = normalize_not(s->cond);
      if (cond->kind == ExprKind::LogicalAnd) {
        auto a = std::make_shared<Stmt>(*s);
        a->cond = cond->lhs;
        lower_stmt(a, out);
        auto b = std::make_shared<Stmt>(*s);
        b->cond = cond->rhs;
        lower_stmt(b, out);
        return;
      }
      if (cond->kind == ExprKind::LogicalOr) {
        // require(a || b)  =>  if (a) {} else { require(b); }
        auto b = std::make_shared<Stmt>(*s);
        b->cond = cond->rhs;
        StmtSeq else_body;
        lower_stmt(b, else_body);
        out.push_back(lower_if(cond->lhs, {}, std::move(else_body), s->loc));
        return;
      }
      auto n = std::make_shared<Stmt>(*s);
      n->cond = cond;
      out.push_back(n);
      return;
    }
    default: {
      if (!s->then_body.empty() || !s->else_body.empty()) {
        auto n = std::make_shared<Stmt>(*s);
        n->then_body = lower_seq(s->then_body);
        n->else_body = lower_seq(s->else_body);
        out.push_back(n);
        return;
      }
      out.push_back(s);
      return;
    }
  }
}

inline StmtSeq lower_seq(const StmtSeq& body) {
  StmtSeq out;
  for (const auto& s : body) lower_stmt(s, out);
  return out;
}

}  // namespace detail

inline ContractAst lower_booleans(const ContractAst& ast) {
  ContractAst out = ast;
  for (auto& f : out.functions) f.body = detail::lower_seq(f.body);
  if (out.has_constructor) out.constructor.body = detail::lower_seq(out.constructor.body);
  return out;
}

// Full frontend pipeline for one contract.
inline Result<ContractAst> prepare_contract(const ContractAst& parsed, int unroll_bound) {
  auto unrolled = unroll_loops(parsed, unroll_bound);
  if (!unrolled) return unrolled.error();
  ContractAst lowered = lower_booleans(unrolled.value());
  return synthesize_returns(lowered);
}

}  // namespace finverif
