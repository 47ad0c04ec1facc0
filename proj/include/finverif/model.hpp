#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "finverif/ast.hpp"
#include "finverif/diagnostics.hpp"
#include "finverif/layout.hpp"
#include "finverif/rules.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Canonical address-expression keys. Mapping indices, transfer recipients and
// balance reads are identified by these keys; a partition over them decides
// which denote the same account.
// ---------------------------------------------------------------------------

inline std::string address_key(const ExprPtr& e, const std::string& contract_name) {
  if (e->kind == ExprKind::This) return contract_name;
  return print_expr(e);
}

struct IndexUniverse {
  std::vector<std::string> keys;       // deterministic order; params first, then msg.sender, ...
  std::set<std::string> constants;     // contract names and the adversary

  void add(const std::string& key, bool is_constant) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    if (is_constant) constants.insert(key);
  }
};

namespace detail {

inline void scan_expr_keys(const ExprPtr& e, const ContractAst& c,
                           std::vector<std::pair<std::string, bool>>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Index) {
    const VarDecl* g = c.find_global(e->name);
    if (g && g->type.kind == SolTypeKind::Mapping)
      out.emplace_back(address_key(e->rhs, c.name), e->rhs->kind == ExprKind::This);
    scan_expr_keys(e->rhs, c, out);
    return;
  }
  if (e->kind == ExprKind::BalanceOf) {
    out.emplace_back(address_key(e->lhs, c.name), e->lhs->kind == ExprKind::This);
    scan_expr_keys(e->lhs, c, out);
    return;
  }
  scan_expr_keys(e->lhs, c, out);
  scan_expr_keys(e->rhs, c, out);
}

inline void scan_stmt_keys(const StmtSeq& body, const ContractAst& c,
                           std::vector<std::pair<std::string, bool>>& out) {
  for (const auto& s : body) {
    scan_expr_keys(s->lhs, c, out);
    scan_expr_keys(s->rhs, c, out);
    scan_expr_keys(s->cond, c, out);
    scan_expr_keys(s->amount, c, out);
    for (const auto& a : s->args) scan_expr_keys(a, c, out);
    if (s->kind == StmtKind::Transfer || s->kind == StmtKind::Send ||
        s->kind == StmtKind::CallValue) {
      out.emplace_back(address_key(s->recipient, c.name), s->recipient->kind == ExprKind::This);
      scan_expr_keys(s->recipient, c, out);
    }
    scan_stmt_keys(s->then_body, c, out);
    scan_stmt_keys(s->else_body, c, out);
  }
}

inline bool stmt_uses_ether(const StmtSeq& body) {
  for (const auto& s : body) {
    if (s->kind == StmtKind::Transfer || s->kind == StmtKind::Send ||
        s->kind == StmtKind::CallValue)
      return true;
    if (stmt_uses_ether(s->then_body) || stmt_uses_ether(s->else_body)) return true;
  }
  return false;
}

inline bool expr_uses_timestamp(const ExprPtr& e) {
  if (!e) return false;
  if (e->kind == ExprKind::BlockTimestamp) return true;
  return expr_uses_timestamp(e->lhs) || expr_uses_timestamp(e->rhs);
}

inline bool stmt_uses_timestamp(const StmtSeq& body) {
  for (const auto& s : body) {
    if (expr_uses_timestamp(s->lhs) || expr_uses_timestamp(s->rhs) ||
        expr_uses_timestamp(s->cond) || expr_uses_timestamp(s->amount) ||
        expr_uses_timestamp(s->recipient))
      return true;
    for (const auto& a : s->args)
      if (expr_uses_timestamp(a)) return true;
    if (stmt_uses_timestamp(s->then_body) || stmt_uses_timestamp(s->else_body)) return true;
  }
  return false;
}

inline bool expr_uses_balance(const ExprPtr& e) {
  if (!e) return false;
  if (e->kind == ExprKind::BalanceOf) return true;
  return expr_uses_balance(e->lhs) || expr_uses_balance(e->rhs);
}

inline bool stmt_uses_balance(const StmtSeq& body) {
  for (const auto& s : body) {
    if (expr_uses_balance(s->lhs) || expr_uses_balance(s->rhs) || expr_uses_balance(s->cond) ||
        expr_uses_balance(s->amount) || expr_uses_balance(s->recipient))
      return true;
    for (const auto& a : s->args)
      if (expr_uses_balance(a)) return true;
    if (stmt_uses_balance(s->then_body) || stmt_uses_balance(s->else_body)) return true;
  }
  return false;
}

inline void collect_internal_calls(const StmtSeq& body,
                                   std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& s : body) {
    if (s->kind == StmtKind::InternalCall) out.emplace_back(s->contract_name, s->fn_name);
    collect_internal_calls(s->then_body, out);
    collect_internal_calls(s->else_body, out);
  }
}

}  // namespace detail

inline bool contract_is_ether_related(const ContractAst& c) {
  for (const auto& f : c.functions) {
    if (f.payable) return true;
    if (detail::stmt_uses_ether(f.body) || detail::stmt_uses_balance(f.body)) return true;
  }
  return false;
}

inline const char* adversary_key() { return "c_adv"; }

// Universe of address expressions over a set of contracts. The adversary is
// added whenever the twin-execution model will compare its balances.
inline IndexUniverse collect_index_universe(const std::vector<ContractAst>& contracts,
                                            bool include_adversary) {
  IndexUniverse u;
  std::vector<std::pair<std::string, bool>> raw;
  for (const auto& c : contracts)
    for (const auto& f : c.functions) detail::scan_stmt_keys(f.body, c, raw);
  // parameters and locals first, then msg.sender, then constants
  for (const auto& [key, is_const] : raw)
    if (!is_const && key != "msg.sender") u.add(key, false);
  for (const auto& [key, is_const] : raw)
    if (key == "msg.sender") u.add(key, false);
  for (const auto& c : contracts)
    if (contract_is_ether_related(c)) u.add(c.name, true);
  for (const auto& [key, is_const] : raw)
    if (is_const) u.add(key, true);
  if (include_adversary) u.add(adversary_key(), true);
  return u;
}

// ---------------------------------------------------------------------------
// Independent model
// ---------------------------------------------------------------------------

struct ContractModelInfo {
  std::string name;
  TermPtr address;
  TupleSeq omega0;  // [address] · plain globals · shared ether slots
  bool ether_related = false;
  std::map<std::string, bool> fn_uses_timestamp;
  std::vector<std::string> mapping_slots;  // slot variable names, model order
};

struct IndependentModel {
  std::vector<ContractAst> contracts;
  std::vector<ContractModelInfo> infos;
  std::vector<Rule> rules;
  std::vector<Restriction> restrictions;
  TupleSeq ether_tuples;  // shared across contracts
  Partition partition;
  IndexUniverse universe;
  std::vector<TermPtr> address_universe;
  std::vector<std::pair<std::string, std::string>> entry_functions;
  TermPtr adversary;
  bool ether_related = false;
  bool any_timestamp = false;
  std::map<std::string, std::string> slot_base;  // slot var -> mapping name or "balance"
  std::map<std::string, std::string> slot_class; // slot var -> class representative

  const ContractModelInfo* info_for(const std::string& contract) const {
    for (const auto& i : infos)
      if (i.name == contract) return &i;
    return nullptr;
  }
  const ContractAst* ast_for(const std::string& contract) const {
    for (const auto& c : contracts)
      if (c.name == contract) return &c;
    return nullptr;
  }

  // Slot naming; contract-qualified only when several contracts share a model.
  bool qualify() const { return contracts.size() > 1; }
  std::string scalar_slot(const std::string& contract, const std::string& name) const {
    return qualify() ? contract + "." + name : name;
  }
  std::string mapping_slot(const std::string& contract, const std::string& mapping,
                           const std::string& rep) const {
    return scalar_slot(contract, mapping) + "[" + rep + "]";
  }
};

namespace detail {

inline std::string balance_slot_name(const std::string& class_rep) {
  return class_rep + ".balance";
}

// Expression translation into terms, resolving storage slots through the
// partition and recording slot accesses for the verifier.
class ExprTranslator {
public:
  ExprTranslator(const IndependentModel& model, const ContractAst& contract,
                 const FunctionDef* fn, const std::set<std::string>* locals)
      : model_(model), contract_(contract), fn_(fn), locals_(locals) {}

  std::vector<SlotAccess>& accesses() { return accesses_; }

  Result<TermPtr> translate(const ExprPtr& e) {
    switch (e->kind) {
      case ExprKind::Number:
        return TermPtr(num_const(e->number));
      case ExprKind::BoolLit:
        return TermPtr(num_const(U256(e->bool_value ? 1 : 0)));
      case ExprKind::MsgSender:
        return TermPtr(var_term("c_b", Sort::Addr));
      case ExprKind::BlockTimestamp:
        return TermPtr(var_term("bt", Sort::Num));
      case ExprKind::This: {
        const auto* info = model_.info_for(contract_.name);
        return TermPtr(info->address);
      }
      case ExprKind::Ident: {
        if (locals_ && locals_->count(e->name))
          return TermPtr(var_term(e->name, Sort::Num));
        if (fn_) {
          for (const auto& [p, t] : fn_->params)
            if (p == e->name)
              return TermPtr(var_term(p, t.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num));
        }
        if (const VarDecl* g = contract_.find_global(e->name)) {
          if (g->type.kind == SolTypeKind::Mapping)
            return make_diag(DiagKind::UnsupportedFeature, e->loc,
                             "mapping '" + e->name + "' used without an index");
          if (g->type.kind == SolTypeKind::ContractRef) {
            const auto* info = model_.info_for(g->type.contract);
            if (!info)
              return make_diag(DiagKind::UnsupportedFeature, e->loc,
                               "unknown contract reference '" + g->type.contract + "'");
            return TermPtr(info->address);
          }
          Sort s = g->type.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num;
          return TermPtr(var_term(model_.scalar_slot(contract_.name, e->name), s));
        }
        return make_diag(DiagKind::UnsupportedFeature, e->loc,
                         "unknown identifier '" + e->name + "'");
      }
      case ExprKind::Index: {
        const VarDecl* g = contract_.find_global(e->name);
        if (!g || g->type.kind != SolTypeKind::Mapping)
          return make_diag(DiagKind::UnsupportedFeature, e->loc,
                           "index into a non-mapping '" + e->name + "'");
        std::string key = address_key(e->rhs, contract_.name);
        std::string slot = model_.mapping_slot(contract_.name, e->name, model_.partition.rep(key));
        auto idx = translate(e->rhs);
        if (!idx) return idx;
        accesses_.push_back(SlotAccess{slot, key, idx.value()});
        return TermPtr(var_term(slot, Sort::Num));
      }
      case ExprKind::BalanceOf: {
        std::string key = address_key(e->lhs, contract_.name);
        std::string slot = balance_slot_name(model_.partition.rep(key));
        auto idx = translate(e->lhs);
        if (!idx) return idx;
        accesses_.push_back(SlotAccess{slot, key, idx.value()});
        return TermPtr(var_term(slot, Sort::Num));
      }
      case ExprKind::Binary: {
        auto l = translate(e->lhs);
        if (!l) return l;
        auto r = translate(e->rhs);
        if (!r) return r;
        return TermPtr(op_term(e->bin_op, l.value(), r.value()));
      }
      default:
        return make_diag(DiagKind::UnsupportedFeature, e->loc,
                         "expression not supported in this position");
    }
  }

  // Boolean condition into a numeric fact; `positive` false yields the
  // relational complement.
  Result<Action> theta(const ExprPtr& e, bool positive) {
    if (e->kind == ExprKind::Compare) {
      auto l = translate(e->lhs);
      if (!l) return l.error();
      auto r = translate(e->rhs);
      if (!r) return r.error();
      CmpOp op = e->cmp_op;
      TermPtr a = l.value(), b = r.value();
      if (!positive) {
        switch (op) {
          case CmpOp::Eq: op = CmpOp::Ne; break;
          case CmpOp::Ne: op = CmpOp::Eq; break;
          case CmpOp::Lt: op = CmpOp::Ge; break;
          case CmpOp::Ge: op = CmpOp::Lt; break;
          case CmpOp::Le: op = CmpOp::Gt; break;
          case CmpOp::Gt: op = CmpOp::Le; break;
        }
      }
      NumConstraint c;
      switch (op) {
        case CmpOp::Eq: c = {Rel::Eq, a, b}; break;
        case CmpOp::Ne: c = {Rel::Neq, a, b}; break;
        case CmpOp::Lt: c = {Rel::Less, a, b}; break;
        case CmpOp::Le: c = {Rel::Leq, a, b}; break;
        case CmpOp::Gt: c = {Rel::Less, b, a}; break;
        case CmpOp::Ge: c = {Rel::Leq, b, a}; break;
      }
      return Action::make_num(c);
    }
    if (e->kind == ExprKind::BoolLit) {
      bool truth = positive == e->bool_value;
      TermPtr z = num_const(U256(0));
      return Action::make_num(NumConstraint{truth ? Rel::Eq : Rel::Neq, z, z});
    }
    if (e->kind == ExprKind::Ident || e->kind == ExprKind::Index ||
        e->kind == ExprKind::Binary || e->kind == ExprKind::BalanceOf ||
        e->kind == ExprKind::BlockTimestamp) {
      auto t = translate(e);
      if (!t) return t.error();
      return Action::make_num(
          NumConstraint{positive ? Rel::Neq : Rel::Eq, t.value(), num_const(U256(0))});
    }
    return make_diag(DiagKind::UnsupportedFeature, e->loc,
                     "condition outside the supported boolean fragment");
  }

private:
  const IndependentModel& model_;
  const ContractAst& contract_;
  const FunctionDef* fn_;
  const std::set<std::string>* locals_;
  std::vector<SlotAccess> accesses_;
};

}  // namespace detail

// Standalone boolean-condition translation, usable outside a full model.
inline Result<Action> theta(const IndependentModel& model, const ContractAst& contract,
                            const FunctionDef* fn, const ExprPtr& e, bool positive) {
  detail::ExprTranslator tr(model, contract, fn, nullptr);
  return tr.theta(e, positive);
}

// ---------------------------------------------------------------------------
// Function translation: recursive descent emitting the per-statement rules.
// ---------------------------------------------------------------------------

namespace detail {

class FunctionTranslator {
public:
  FunctionTranslator(IndependentModel& model, const ContractAst& contract,
                     const ContractModelInfo& info, const FunctionDef& fn)
      : model_(model), contract_(contract), info_(info), fn_(fn) {}

  Result<std::vector<Rule>> run() {
    // ω = header · ω0 · parameters (· bt when the function reads timestamps)
    TupleSeq omega;
    omega.tuples.push_back(tuple_const(sym_const(fn_.name, Sort::Fn)));
    omega.tuples.push_back(tuple_local(var_term("c_b", Sort::Addr)));
    omega.tuples.push_back(tuple_local(var_term("calltype", Sort::Tag)));
    omega.tuples.push_back(tuple_local(var_term("depth", Sort::Num)));
    omega = omega.concat(info_.omega0);
    for (const auto& [p, t] : fn_.params)
      omega.tuples.push_back(
          tuple_local(var_term(p, t.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num)));
    uses_bt_ = info_.fn_uses_timestamp.at(fn_.name);
    if (uses_bt_) omega.tuples.push_back(tuple_local(var_term("bt", Sort::Num)));

    emit_entry_rules(omega);
    auto r = translate_seq(fn_.body, 0, "1", omega, {});
    if (!r) return r.error();
    return std::move(rules_);
  }

private:
  std::vector<TermPtr> call_payload(const TupleSeq& /*omega*/) const {
    // ⟦c, f, c_b⟧ · params (· bt)
    std::vector<TermPtr> args{info_.address, sym_const(fn_.name, Sort::Fn),
                              var_term("c_b", Sort::Addr)};
    for (const auto& [p, t] : fn_.params)
      args.push_back(var_term(p, t.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num));
    if (uses_bt_) args.push_back(var_term("bt", Sort::Num));
    return args;
  }

  void add_state_facts(std::vector<Fact>& facts) const {
    if (!model_.ether_tuples.tuples.empty())
      facts.push_back(make_fact(FactSym::Evar, model_.ether_tuples.sigma()));
    std::vector<TermPtr> gargs{info_.address};
    for (const auto& t : info_.omega0.globals_minus_ether()) gargs.push_back(t);
    facts.push_back(make_fact(FactSym::Gvar, std::move(gargs)));
  }

  void emit_entry_rules(const TupleSeq& omega) {
    // ext_call
    Rule ext;
    ext.kind = "ext_call";
    ext.tag = contract_.name + "." + fn_.name;
    ext.source_line = fn_.loc.line;
    ext.premises.push_back(make_fact(FactSym::Fr, {var_term("c_b", Sort::Addr)}));
    for (const auto& [p, t] : fn_.params)
      ext.premises.push_back(make_fact(
          FactSym::Fr, {var_term(p, t.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num)}));
    if (uses_bt_) ext.premises.push_back(make_fact(FactSym::Fr, {var_term("bt", Sort::Num)}));
    ext.conclusions.push_back(make_fact(FactSym::CallE, call_payload(omega)));
    rules_.push_back(std::move(ext));

    // recv_ext
    Rule recv;
    recv.kind = "recv_ext";
    recv.tag = contract_.name + "." + fn_.name;
    recv.source_line = fn_.loc.line;
    recv.premises.push_back(make_fact(FactSym::CallE, call_payload(omega)));
    add_state_facts(recv.premises);
    {
      std::vector<TermPtr> var_args{sym_const(fn_.name, Sort::Fn), var_term("c_b", Sort::Addr),
                                    sym_const("EXT", Sort::Tag), num_const(U256(0))};
      for (const auto& t : info_.omega0.sigma()) var_args.push_back(t);
      for (const auto& [p, t] : fn_.params)
        var_args.push_back(var_term(p, t.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num));
      if (uses_bt_) var_args.push_back(var_term("bt", Sort::Num));
      recv.conclusions.push_back(make_fact(FactSym::Var, std::move(var_args), Side::None, "1"));
    }
    rules_.push_back(std::move(recv));

    // recv_in
    Rule rin;
    rin.kind = "recv_in";
    rin.tag = contract_.name + "." + fn_.name;
    rin.source_line = fn_.loc.line;
    {
      std::vector<TermPtr> cargs{info_.address, sym_const(fn_.name, Sort::Fn),
                                 var_term("c_b", Sort::Addr), var_term("depth", Sort::Num)};
      for (const auto& [p, t] : fn_.params)
        cargs.push_back(var_term(p, t.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num));
      if (uses_bt_) cargs.push_back(var_term("bt", Sort::Num));
      rin.premises.push_back(make_fact(FactSym::CallIn, std::move(cargs)));
    }
    add_state_facts(rin.premises);
    {
      std::vector<TermPtr> var_args{sym_const(fn_.name, Sort::Fn), var_term("c_b", Sort::Addr),
                                    sym_const("IN", Sort::Tag), var_term("depth", Sort::Num)};
      for (const auto& t : info_.omega0.sigma()) var_args.push_back(t);
      for (const auto& [p, t] : fn_.params)
        var_args.push_back(var_term(p, t.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num));
      if (uses_bt_) var_args.push_back(var_term("bt", Sort::Num));
      rin.conclusions.push_back(make_fact(FactSym::Var, std::move(var_args), Side::None, "1"));
    }
    rules_.push_back(std::move(rin));
  }

  Fact var_fact(const std::string& pos, std::vector<TermPtr> args) const {
    return make_fact(FactSym::Var, std::move(args), Side::None, pos);
  }

  Rule stmt_rule(const char* kind, const std::string& pos, int line) const {
    Rule r;
    r.kind = kind;
    r.tag = contract_.name + "." + fn_.name + "@" + pos;
    r.source_line = line;
    return r;
  }

  ExprTranslator make_expr_translator() {
    return ExprTranslator(model_, contract_, &fn_, &locals_);
  }

  Result<bool> translate_seq(const StmtSeq& stmts, std::size_t idx, const std::string& pos,
                             const TupleSeq& omega, std::vector<StmtPtr> tail) {
    if (idx >= stmts.size()) {
      // every path ends in an explicit return, so an exhausted sequence must
      // have pending tail statements
      if (tail.empty())
        return make_diag(DiagKind::InternalError, fn_.loc,
                         "fell off the end of a statement sequence");
      StmtSeq rest = {tail.back()};
      std::vector<StmtPtr> outer(tail.begin(), tail.end() - 1);
      // tail entries are sequence suffixes packed as single synthetic blocks
      const Stmt& blk = *rest.front();
      return translate_seq(blk.then_body, 0, pos, omega, outer);
    }
    const Stmt& s = *stmts[idx];
    switch (s.kind) {
      case StmtKind::Declare: {
        ExprTranslator tr = make_expr_translator();
        auto rhs = tr.translate(s.rhs);
        if (!rhs) return rhs.error();
        Rule r = stmt_rule("var_declare", pos, s.loc.line);
        r.premises.push_back(var_fact(pos, omega.sigma()));
        std::vector<TermPtr> next_args = omega.sigma();
        next_args.push_back(rhs.value());
        r.conclusions.push_back(var_fact(pos + "1", std::move(next_args)));
        r.slot_accesses = tr.accesses();
        rules_.push_back(std::move(r));
        locals_.insert(s.name);
        TupleSeq next = omega.append(tuple_local(var_term(s.name, Sort::Num)));
        return translate_seq(stmts, idx + 1, pos + "1", next, std::move(tail));
      }
      case StmtKind::Assign: {
        ExprTranslator tr = make_expr_translator();
        auto target = tr.translate(s.lhs);
        if (!target) return target.error();
        auto rhs = tr.translate(s.rhs);
        if (!rhs) return rhs.error();
        if (target.value()->kind != TermKind::Var)
          return make_diag(DiagKind::UnsupportedFeature, s.loc, "assignment target is read-only");
        Rule r = stmt_rule("var_assign", pos, s.loc.line);
        r.premises.push_back(var_fact(pos, omega.sigma()));
        r.conclusions.push_back(
            var_fact(pos + "1", replace_slot(omega.sigma(), target.value()->name, rhs.value())));
        r.slot_accesses = tr.accesses();
        rules_.push_back(std::move(r));
        return translate_seq(stmts, idx + 1, pos + "1", omega, std::move(tail));
      }
      case StmtKind::If: {
        ExprTranslator tr = make_expr_translator();
        auto pos_action = tr.theta(s.cond, true);
        if (!pos_action) return pos_action.error();
        auto neg_action = tr.theta(s.cond, false);
        if (!neg_action) return neg_action.error();
        Rule rt = stmt_rule("if_true", pos, s.loc.line);
        rt.premises.push_back(var_fact(pos, omega.sigma()));
        rt.actions.push_back(pos_action.value());
        rt.conclusions.push_back(var_fact(pos + "1", omega.sigma()));
        rt.slot_accesses = tr.accesses();
        rules_.push_back(std::move(rt));
        Rule rf = stmt_rule("if_false", pos, s.loc.line);
        rf.premises.push_back(var_fact(pos, omega.sigma()));
        rf.actions.push_back(neg_action.value());
        rf.conclusions.push_back(var_fact(pos + "2", omega.sigma()));
        rf.slot_accesses = tr.accesses();
        rules_.push_back(std::move(rf));

        std::vector<StmtPtr> tail_with_rest = tail;
        if (idx + 1 < stmts.size()) {
          auto rest = std::make_shared<Stmt>();
          rest->kind = StmtKind::If;  // synthetic block wrapper
          rest->then_body = StmtSeq(stmts.begin() + static_cast<std::ptrdiff_t>(idx) + 1,
                                    stmts.end());
          tail_with_rest.push_back(rest);
        }
        auto locals_before = locals_;
        auto t1 = translate_seq(s.then_body, 0, pos + "1", omega, tail_with_rest);
        if (!t1) return t1.error();
        locals_ = locals_before;
        auto t2 = translate_seq(s.else_body, 0, pos + "2", omega, tail_with_rest);
        if (!t2) return t2.error();
        locals_ = locals_before;
        return true;
      }
      case StmtKind::Require: {
        ExprTranslator tr = make_expr_translator();
        auto pos_action = tr.theta(s.cond, true);
        if (!pos_action) return pos_action.error();
        auto neg_action = tr.theta(s.cond, false);
        if (!neg_action) return neg_action.error();
        Rule rt = stmt_rule("require_true", pos, s.loc.line);
        rt.premises.push_back(var_fact(pos, omega.sigma()));
        rt.actions.push_back(pos_action.value());
        rt.conclusions.push_back(var_fact(pos + "1", omega.sigma()));
        rt.slot_accesses = tr.accesses();
        rules_.push_back(std::move(rt));
        Rule rf = stmt_rule("require_false", pos, s.loc.line);
        rf.premises.push_back(var_fact(pos, omega.sigma()));
        rf.actions.push_back(neg_action.value());
        rf.slot_accesses = tr.accesses();
        rules_.push_back(std::move(rf));
        return translate_seq(stmts, idx + 1, pos + "1", omega, std::move(tail));
      }
      case StmtKind::Return: {
        Rule re = stmt_rule("ret_ext", pos, s.loc.line);
        re.premises.push_back(var_fact(pos, omega.sigma()));
        re.actions.push_back(Action::make_pred(true, var_term("calltype", Sort::Tag),
                                               sym_const("EXT", Sort::Tag)));
        {
          std::vector<TermPtr> gargs{omega.at(5)};
          for (const auto& t : omega.globals_minus_ether()) gargs.push_back(t);
          re.conclusions.push_back(make_fact(FactSym::Gvar, std::move(gargs)));
          if (!omega.ether().empty())
            re.conclusions.push_back(make_fact(FactSym::Evar, omega.ether()));
        }
        rules_.push_back(std::move(re));

        Rule ri = stmt_rule("ret_in", pos, s.loc.line);
        ri.premises.push_back(var_fact(pos, omega.sigma()));
        ri.actions.push_back(Action::make_pred(true, var_term("calltype", Sort::Tag),
                                               sym_const("IN", Sort::Tag)));
        ri.conclusions.push_back(make_fact(
            FactSym::Return, {omega.at(5), omega.at(1), omega.at(2), omega.at(4)}));
        {
          std::vector<TermPtr> gargs{omega.at(5)};
          for (const auto& t : omega.globals_minus_ether()) gargs.push_back(t);
          ri.conclusions.push_back(make_fact(FactSym::Gvar, std::move(gargs)));
          if (!omega.ether().empty())
            ri.conclusions.push_back(make_fact(FactSym::Evar, omega.ether()));
        }
        rules_.push_back(std::move(ri));
        return true;  // no continuation past return
      }
      case StmtKind::InternalCall: {
        const ContractModelInfo* callee_info = model_.info_for(s.contract_name);
        const ContractAst* callee_ast = model_.ast_for(s.contract_name);
        if (!callee_info || !callee_ast)
          return make_diag(DiagKind::UnsupportedFeature, s.loc,
                           "call into unknown contract '" + s.contract_name + "'");
        const FunctionDef* callee_fn = callee_ast->find_function(s.fn_name);
        if (!callee_fn)
          return make_diag(DiagKind::UnsupportedFeature, s.loc,
                           "unknown function '" + s.contract_name + "." + s.fn_name + "'");
        if (callee_fn->params.size() != s.args.size())
          return make_diag(DiagKind::UnsupportedFeature, s.loc, "argument count mismatch");

        ExprTranslator tr = make_expr_translator();
        std::vector<TermPtr> arg_terms;
        for (const auto& a : s.args) {
          auto t = tr.translate(a);
          if (!t) return t.error();
          arg_terms.push_back(t.value());
        }
        TermPtr depth_next = op_term(BinOp::Add, omega.at(4), num_const(U256(1)));
        TermPtr callee_fn_sym = sym_const(s.fn_name, Sort::Fn);

        Rule rc = stmt_rule("in_call", pos, s.loc.line);
        rc.premises.push_back(var_fact(pos, omega.sigma()));
        {
          std::vector<TermPtr> cargs{callee_info->address, callee_fn_sym, omega.at(5), depth_next};
          for (const auto& t : arg_terms) cargs.push_back(t);
          if (callee_info->fn_uses_timestamp.at(s.fn_name)) {
            if (!uses_bt_)
              return make_diag(DiagKind::InternalError, s.loc,
                               "timestamp closure missed a caller");
            cargs.push_back(var_term("bt", Sort::Num));
          }
          rc.conclusions.push_back(make_fact(FactSym::CallIn, std::move(cargs)));
        }
        rc.conclusions.push_back(var_fact(pos + "1", omega.sigma_minus_globals()));
        {
          std::vector<TermPtr> gargs{omega.at(5)};
          for (const auto& t : omega.globals_minus_ether()) gargs.push_back(t);
          rc.conclusions.push_back(make_fact(FactSym::Gvar, std::move(gargs)));
          if (!omega.ether().empty())
            rc.conclusions.push_back(make_fact(FactSym::Evar, omega.ether()));
        }
        rc.slot_accesses = tr.accesses();
        rules_.push_back(std::move(rc));

        Rule rr = stmt_rule("recv_ret", pos, s.loc.line);
        rr.premises.push_back(make_fact(
            FactSym::Return,
            {callee_info->address, callee_fn_sym, omega.at(5), var_term("r_depth", Sort::Num)}));
        rr.premises.push_back(var_fact(pos + "1", omega.sigma_minus_globals()));
        {
          std::vector<TermPtr> gargs{omega.at(5)};
          for (const auto& t : omega.globals_minus_ether()) gargs.push_back(t);
          rr.premises.push_back(make_fact(FactSym::Gvar, std::move(gargs)));
          if (!omega.ether().empty())
            rr.premises.push_back(make_fact(FactSym::Evar, omega.ether()));
        }
        rr.actions.push_back(
            Action::make_pred(true, var_term("r_depth", Sort::Num), depth_next));
        rr.conclusions.push_back(var_fact(pos + "11", omega.sigma()));
        rules_.push_back(std::move(rr));
        return translate_seq(stmts, idx + 1, pos + "11", omega, std::move(tail));
      }
      case StmtKind::Transfer:
      case StmtKind::Send:
      case StmtKind::CallValue:
        return translate_ether_stmt(s, stmts, idx, pos, omega, std::move(tail));
      default:
        return make_diag(DiagKind::InternalError, s.loc, "untranslated statement kind");
    }
  }

  Result<bool> translate_ether_stmt(const Stmt& s, const StmtSeq& stmts, std::size_t idx,
                                    const std::string& pos, const TupleSeq& omega,
                                    std::vector<StmtPtr> tail) {
    ExprTranslator tr = make_expr_translator();
    auto amount = tr.translate(s.amount);
    if (!amount) return amount.error();
    std::string recipient_key = address_key(s.recipient, contract_.name);
    std::string recipient_slot = detail::balance_slot_name(model_.partition.rep(recipient_key));
    std::string own_slot = detail::balance_slot_name(model_.partition.rep(contract_.name));
    auto recipient_idx = tr.translate(s.recipient);
    if (!recipient_idx) return recipient_idx.error();
    tr.accesses().push_back(SlotAccess{recipient_slot, recipient_key, recipient_idx.value()});
    tr.accesses().push_back(SlotAccess{own_slot, contract_.name, info_.address});

    auto updated = [&](std::vector<TermPtr> seq) {
      seq = replace_slot(std::move(seq), recipient_slot,
                         op_term(BinOp::Add, var_term(recipient_slot, Sort::Num), amount.value()));
      seq = replace_slot(std::move(seq), own_slot,
                         op_term(BinOp::Sub, var_term(own_slot, Sort::Num), amount.value()));
      return seq;
    };

    const char* succ_kind = s.kind == StmtKind::Transfer ? "transfer_succ"
                            : s.kind == StmtKind::Send  ? "send_succ"
                                                        : "ether_succ";
    const char* fail_kind = s.kind == StmtKind::Transfer ? "transfer_fail"
                            : s.kind == StmtKind::Send  ? "send_fail"
                                                        : "ether_fail";

    Rule rs = stmt_rule(succ_kind, pos, s.loc.line);
    rs.premises.push_back(var_fact(pos, omega.sigma()));
    rs.conclusions.push_back(var_fact(pos + "1", updated(omega.sigma())));
    rs.slot_accesses = tr.accesses();
    rules_.push_back(std::move(rs));

    Rule rf = stmt_rule(fail_kind, pos, s.loc.line);
    rf.premises.push_back(var_fact(pos, omega.sigma()));
    if (s.kind != StmtKind::Transfer)
      rf.conclusions.push_back(var_fact(pos + "2", omega.sigma()));
    rules_.push_back(std::move(rf));

    if (s.kind == StmtKind::CallValue) {
      Rule fb = stmt_rule("fb_call", pos, s.loc.line);
      fb.premises.push_back(var_fact(pos, omega.sigma()));
      fb.conclusions.push_back(var_fact(pos + "3", omega.locals()));
      fb.conclusions.push_back(
          make_fact(FactSym::Fallback, {omega.at(5), omega.at(1), omega.at(4)}));
      {
        std::vector<TermPtr> gargs{omega.at(5)};
        for (const auto& t : omega.globals_minus_ether()) gargs.push_back(t);
        fb.conclusions.push_back(make_fact(FactSym::Gvar, std::move(gargs)));
        fb.conclusions.push_back(make_fact(FactSym::Evar, updated(omega.ether())));
      }
      fb.slot_accesses = tr.accesses();
      rules_.push_back(std::move(fb));

      Rule rfb = stmt_rule("recv_fb_ret", pos, s.loc.line);
      rfb.premises.push_back(make_fact(FactSym::ReturnFallback, {omega.at(5), omega.at(1)}));
      {
        std::vector<TermPtr> gargs{omega.at(5)};
        for (const auto& t : omega.globals_minus_ether()) gargs.push_back(t);
        rfb.premises.push_back(make_fact(FactSym::Gvar, std::move(gargs)));
        rfb.premises.push_back(make_fact(FactSym::Evar, omega.ether()));
      }
      rfb.premises.push_back(var_fact(pos + "3", omega.locals()));
      rfb.conclusions.push_back(var_fact(pos + "31", omega.sigma()));
      rules_.push_back(std::move(rfb));
    }

    auto locals_before = locals_;
    auto t1 = translate_seq(stmts, idx + 1, pos + "1", omega, tail);
    if (!t1) return t1.error();
    locals_ = locals_before;
    if (s.kind == StmtKind::Send || s.kind == StmtKind::CallValue) {
      auto t2 = translate_seq(stmts, idx + 1, pos + "2", omega, tail);
      if (!t2) return t2.error();
      locals_ = locals_before;
    }
    if (s.kind == StmtKind::CallValue) {
      auto t3 = translate_seq(stmts, idx + 1, pos + "31", omega, tail);
      if (!t3) return t3.error();
      locals_ = locals_before;
    }
    return true;
  }

  IndependentModel& model_;
  const ContractAst& contract_;
  const ContractModelInfo& info_;
  const FunctionDef& fn_;
  std::vector<Rule> rules_;
  std::set<std::string> locals_;
  bool uses_bt_ = false;
};

}  // namespace detail

// Adversary capability C2: a triggered fallback may send one internal
// transaction invoking any function of any known contract.
inline std::vector<Rule> build_adversary_rules(const IndependentModel& model) {
  std::vector<Rule> out;
  bool any_fallback = false;
  std::set<std::pair<std::string, std::string>> fallback_sites;  // (contract, fn) with fb_call
  for (const auto& r : model.rules)
    if (r.kind == "fb_call") {
      any_fallback = true;
      auto at = r.tag.find('@');
      std::string cf = at == std::string::npos ? r.tag : r.tag.substr(0, at);
      auto dot = cf.find('.');
      fallback_sites.insert({cf.substr(0, dot), cf.substr(dot + 1)});
    }
  if (!any_fallback) return out;

  for (const auto& [cname, fname] : fallback_sites) {
    const ContractModelInfo* caller = model.info_for(cname);
    for (std::size_t ci = 0; ci < model.contracts.size(); ++ci) {
      const ContractAst& callee = model.contracts[ci];
      const ContractModelInfo& callee_info = model.infos[ci];
      for (const auto& fn : callee.functions) {
        Rule r;
        r.kind = "fb_in_call";
        r.tag = cname + "." + fname + "->" + callee.name + "." + fn.name;
        r.premises.push_back(make_fact(
            FactSym::Fallback,
            {caller->address, sym_const(fname, Sort::Fn), var_term("fb_depth", Sort::Num)}));
        std::vector<TermPtr> cargs{callee_info.address, sym_const(fn.name, Sort::Fn),
                                   model.adversary,
                                   op_term(BinOp::Add, var_term("fb_depth", Sort::Num),
                                           num_const(U256(1)))};
        for (const auto& [p, t] : fn.params) {
          TermPtr v = var_term("adv_" + p, t.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num);
          r.premises.push_back(make_fact(FactSym::Fr, {v}));
          cargs.push_back(v);
        }
        if (callee_info.fn_uses_timestamp.at(fn.name)) {
          TermPtr v = var_term("adv_bt", Sort::Num);
          r.premises.push_back(make_fact(FactSym::Fr, {v}));
          cargs.push_back(v);
        }
        r.conclusions.push_back(make_fact(FactSym::CallIn, std::move(cargs)));
        out.push_back(std::move(r));

        Rule rb;
        rb.kind = "ret_fb";
        rb.tag = cname + "." + fname + "<-" + callee.name + "." + fn.name;
        rb.premises.push_back(make_fact(FactSym::Return,
                                        {callee_info.address, sym_const(fn.name, Sort::Fn),
                                         model.adversary, var_term("r_depth", Sort::Num)}));
        rb.conclusions.push_back(
            make_fact(FactSym::ReturnFallback, {caller->address, sym_const(fname, Sort::Fn)}));
        out.push_back(std::move(rb));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model assembly
// ---------------------------------------------------------------------------

inline Result<IndependentModel> build_independent_model(std::vector<ContractAst> contracts,
                                                        const Partition& partition,
                                                        bool equivalence_mode) {
  IndependentModel model;
  model.partition = partition;
  model.universe = collect_index_universe(contracts, equivalence_mode);
  model.contracts = std::move(contracts);
  model.adversary = sym_const(adversary_key(), Sort::Addr, U256(0xadad));

  // Per-function timestamp usage, closed over internal calls.
  std::map<std::pair<std::string, std::string>, bool> uses_bt;
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<std::string, std::string>>>
      calls;
  for (const auto& c : model.contracts)
    for (const auto& f : c.functions) {
      uses_bt[{c.name, f.name}] = detail::stmt_uses_timestamp(f.body);
      detail::collect_internal_calls(f.body, calls[{c.name, f.name}]);
    }
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [key, used] : uses_bt) {
      if (used) continue;
      for (const auto& callee : calls[key]) {
        auto it = uses_bt.find(callee);
        if (it != uses_bt.end() && it->second) {
          used = true;
          changed = true;
        }
      }
    }
  }
  for (const auto& [key, used] : uses_bt)
    if (used) model.any_timestamp = true;

  // Address constants.
  std::uint64_t next_addr = 0x1000;
  for (std::size_t i = 0; i < model.contracts.size(); ++i) {
    ContractModelInfo info;
    info.name = model.contracts[i].name;
    info.address = sym_const(info.name, Sort::Addr, U256(next_addr));
    next_addr += 0x100;
    info.ether_related = contract_is_ether_related(model.contracts[i]);
    if (info.ether_related) model.ether_related = true;
    for (const auto& f : model.contracts[i].functions)
      info.fn_uses_timestamp[f.name] = uses_bt[{info.name, f.name}];
    model.infos.push_back(std::move(info));
  }
  model.address_universe.push_back(model.adversary);
  for (const auto& info : model.infos) model.address_universe.push_back(info.address);

  // Shared ether slots: one per partition class that exchanges ether.
  if (model.ether_related) {
    std::vector<std::pair<std::string, bool>> raw;
    for (const auto& c : model.contracts)
      for (const auto& f : c.functions) {
        std::vector<std::pair<std::string, bool>> keys;
        detail::scan_stmt_keys(f.body, c, keys);
        for (auto& k : keys) raw.push_back(k);
      }
    std::set<std::string> participating;  // class representatives
    std::vector<std::string> order;
    auto participate = [&](const std::string& key) {
      std::string rep = partition.rep(key);
      if (participating.insert(rep).second) order.push_back(rep);
    };
    for (const auto& info : model.infos)
      if (info.ether_related) participate(info.name);
    // recipients and balance reads
    for (const auto& c : model.contracts) {
      auto scan_recipients = [&](auto&& self, const StmtSeq& body) -> void {
        for (const auto& s : body) {
          if (s->kind == StmtKind::Transfer || s->kind == StmtKind::Send ||
              s->kind == StmtKind::CallValue)
            participate(address_key(s->recipient, c.name));
          auto scan_balance = [&](auto&& bscan, const ExprPtr& e) -> void {
            if (!e) return;
            if (e->kind == ExprKind::BalanceOf) participate(address_key(e->lhs, c.name));
            bscan(bscan, e->lhs);
            bscan(bscan, e->rhs);
          };
          scan_balance(scan_balance, s->lhs);
          scan_balance(scan_balance, s->rhs);
          scan_balance(scan_balance, s->cond);
          scan_balance(scan_balance, s->amount);
          scan_balance(scan_balance, s->recipient);
          self(self, s->then_body);
          self(self, s->else_body);
        }
      };
      for (const auto& f : c.functions) scan_recipients(scan_recipients, f.body);
    }
    for (const auto& rep : order) {
      std::string slot = detail::balance_slot_name(rep);
      model.ether_tuples.tuples.push_back(tuple_ether(var_term(slot, Sort::Num)));
      model.slot_base[slot] = "balance";
      model.slot_class[slot] = rep;
    }
  }

  // Per-contract ω0: [address] · plain globals · mapping slots · ether slots.
  for (std::size_t i = 0; i < model.contracts.size(); ++i) {
    const ContractAst& c = model.contracts[i];
    ContractModelInfo& info = model.infos[i];
    info.omega0.tuples.push_back(tuple_const(info.address));
    for (const auto& g : c.globals) {
      if (g.type.kind == SolTypeKind::ContractRef) continue;  // static reference, not data
      if (g.type.kind == SolTypeKind::Mapping) continue;      // handled below
      Sort s = g.type.kind == SolTypeKind::Address ? Sort::Addr : Sort::Num;
      info.omega0.tuples.push_back(tuple_global(var_term(model.scalar_slot(c.name, g.name), s)));
    }
    for (const auto& g : c.globals) {
      if (g.type.kind != SolTypeKind::Mapping) continue;
      // classes whose members index this mapping, in universe order
      std::vector<std::pair<std::string, bool>> raw;
      for (const auto& f : c.functions) detail::scan_stmt_keys(f.body, c, raw);
      std::set<std::string> reps_done;
      std::vector<std::string> reps;
      auto note = [&](const std::string& key) {
        std::string rep = partition.rep(key);
        if (reps_done.insert(rep).second) reps.push_back(rep);
      };
      // scan actual indices of this specific mapping
      auto scan_map = [&](auto&& self, const ExprPtr& e) -> void {
        if (!e) return;
        if (e->kind == ExprKind::Index && e->name == g.name) note(address_key(e->rhs, c.name));
        self(self, e->lhs);
        self(self, e->rhs);
      };
      auto scan_body = [&](auto&& self, const StmtSeq& body) -> void {
        for (const auto& s : body) {
          scan_map(scan_map, s->lhs);
          scan_map(scan_map, s->rhs);
          scan_map(scan_map, s->cond);
          scan_map(scan_map, s->amount);
          scan_map(scan_map, s->recipient);
          for (const auto& a : s->args) scan_map(scan_map, a);
          self(self, s->then_body);
          self(self, s->else_body);
        }
      };
      for (const auto& f : c.functions) scan_body(scan_body, f.body);
      for (const auto& rep : reps) {
        std::string slot = model.mapping_slot(c.name, g.name, rep);
        info.omega0.tuples.push_back(tuple_global(var_term(slot, Sort::Num)));
        info.mapping_slots.push_back(slot);
        model.slot_base[slot] = g.name;
        model.slot_class[slot] = rep;
      }
    }
    if (info.ether_related || !model.ether_tuples.tuples.empty())
      info.omega0 = info.omega0.concat(model.ether_tuples);
  }

  // init rules
  for (const auto& info : model.infos) {
    Rule init_g;
    init_g.kind = "init_gvars";
    init_g.tag = info.name;
    for (const auto& t : info.omega0.globals_minus_ether())
      init_g.premises.push_back(make_fact(FactSym::Fr, {t}));
    init_g.actions.push_back(Action::make_label("Init_G", {info.address}));
    {
      std::vector<TermPtr> gargs{info.address};
      for (const auto& t : info.omega0.globals_minus_ether()) gargs.push_back(t);
      init_g.conclusions.push_back(make_fact(FactSym::Gvar, std::move(gargs)));
    }
    model.rules.push_back(std::move(init_g));
  }
  if (!model.ether_tuples.tuples.empty()) {
    Rule init_e;
    init_e.kind = "init_evars";
    for (const auto& t : model.ether_tuples.sigma())
      init_e.premises.push_back(make_fact(FactSym::Fr, {t}));
    init_e.actions.push_back(Action::make_label("Init_E"));
    init_e.conclusions.push_back(make_fact(FactSym::Evar, model.ether_tuples.sigma()));
    model.rules.push_back(std::move(init_e));
  }
  model.restrictions.push_back(Restriction::once("Init_G"));
  model.restrictions.push_back(Restriction::once("Init_E"));

  // function rules
  for (std::size_t i = 0; i < model.contracts.size(); ++i) {
    for (const auto& fn : model.contracts[i].functions) {
      detail::FunctionTranslator ft(model, model.contracts[i], model.infos[i], fn);
      auto rules = ft.run();
      if (!rules) return rules.error();
      for (auto& r : rules.value()) model.rules.push_back(std::move(r));
      model.entry_functions.emplace_back(model.contracts[i].name, fn.name);
    }
  }

  // adversary rules
  for (auto& r : build_adversary_rules(model)) model.rules.push_back(std::move(r));
  return model;
}

// Public entry: translate one function against an already-built model.
// Returns the rules in emission order (entry rules first).
inline Result<std::vector<Rule>> translate_function(const IndependentModel& model,
                                                    const std::string& contract,
                                                    const std::string& function) {
  for (std::size_t i = 0; i < model.contracts.size(); ++i) {
    if (model.contracts[i].name != contract) continue;
    const FunctionDef* fn = model.contracts[i].find_function(function);
    if (!fn)
      return make_diag(DiagKind::InternalError, SourceLoc{}, "no such function " + function);
    detail::FunctionTranslator ft(const_cast<IndependentModel&>(model), model.contracts[i],
                                  model.infos[i], *fn);
    return ft.run();
  }
  return make_diag(DiagKind::InternalError, SourceLoc{}, "no such contract " + contract);
}

// ω0 of one contract within a freshly built identity-partition model.
inline Result<TupleSeq> build_omega0(const ContractAst& contract) {
  auto model = build_independent_model({contract}, Partition{}, false);
  if (!model) return model.error();
  return model.value().infos.front().omega0;
}

// Debug dump: one rule per block.
inline std::string dump_rules(const std::vector<Rule>& rules) {
  std::string out;
  for (const auto& r : rules) {
    out += print_rule(r);
    out += "\n\n";
  }
  return out;
}

}  // namespace finverif
