#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finverif/ast.hpp"
#include "finverif/numeric.hpp"

namespace finverif {

// Sorts of symbolic terms. Tag covers the EXT/IN call-type markers.
enum class Sort { Num, Addr, Fn, Tag };

enum class TermKind { Const, Var, Fresh, Op };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// A symbolic term: a constant, a rule variable, a runtime-created fresh
// name, or an arithmetic node over numeric terms.
struct Term {
  TermKind kind = TermKind::Const;
  Sort sort = Sort::Num;
  std::string name;            // const symbol / variable name / fresh name
  std::optional<U256> value;   // concrete value of numeric or address constants
  BinOp op = BinOp::Add;       // Op nodes
  bool wrapped = true;         // Op nodes: EVM mod-2^256 semantics vs plain integers
  TermPtr lhs, rhs;
  std::string origin;          // fresh terms: what created this atom (param/sender/init slot/...)
};

inline TermPtr num_const(const U256& v) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Const;
  t->sort = Sort::Num;
  t->value = v;
  t->name = v.to_string();
  return t;
}

inline TermPtr sym_const(std::string name, Sort sort, std::optional<U256> value = std::nullopt) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Const;
  t->sort = sort;
  t->name = std::move(name);
  t->value = value;
  return t;
}

inline TermPtr var_term(std::string name, Sort sort) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Var;
  t->sort = sort;
  t->name = std::move(name);
  return t;
}

inline TermPtr fresh_term(std::string name, Sort sort, std::string origin) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Fresh;
  t->sort = sort;
  t->name = std::move(name);
  t->origin = std::move(origin);
  return t;
}

inline TermPtr op_term(BinOp op, TermPtr l, TermPtr r) {
  // Fold constant arithmetic so call depths stay concrete integers.
  if (l->kind == TermKind::Const && l->value && r->kind == TermKind::Const && r->value) {
    switch (op) {
      case BinOp::Add: return num_const(*l->value + *r->value);
      case BinOp::Sub: return num_const(*l->value - *r->value);
      case BinOp::Mul: return num_const(*l->value * *r->value);
      case BinOp::Div: return num_const(*l->value / *r->value);
      case BinOp::Mod: return num_const(*l->value % *r->value);
      case BinOp::Pow: return num_const(l->value->pow(*r->value));
    }
  }
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Op;
  t->sort = Sort::Num;
  t->op = op;
  t->lhs = std::move(l);
  t->rhs = std::move(r);
  return t;
}

// Plain-integer arithmetic node; property sums must see real magnitudes, not
// the wrapped cell arithmetic.
inline TermPtr op_term_raw(BinOp op, TermPtr l, TermPtr r) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Op;
  t->sort = Sort::Num;
  t->op = op;
  t->wrapped = false;
  t->lhs = std::move(l);
  t->rhs = std::move(r);
  return t;
}

inline const char* op_glyph(BinOp op, bool wrapped = true) {
  if (wrapped) {
    switch (op) {
      case BinOp::Add: return "⊕";  // circled plus
      case BinOp::Sub: return "⊖";
      case BinOp::Mul: return "⊗";
      case BinOp::Div: return "⊘";
      case BinOp::Mod: return "mod";
      case BinOp::Pow: return "pow";
    }
  }
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "mod";
    case BinOp::Pow: return "pow";
  }
  return "?";
}

// Canonical printing; used for display, hashing and structural keys.
inline std::string print_term(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Const:
      if (t->sort == Sort::Num && t->value) return t->value->to_string();
      if (t->sort == Sort::Tag) return t->name;
      return "σa(" + t->name + ")";  // σa(x)
    case TermKind::Var:
      return "σv(" + t->name + ")";  // σv(x)
    case TermKind::Fresh:
      return "~" + t->name;
    case TermKind::Op:
      return "(" + print_term(t->lhs) + " " + op_glyph(t->op, t->wrapped) + " " +
             print_term(t->rhs) + ")";
  }
  return "?";
}

inline bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind || a->sort != b->sort) return false;
  switch (a->kind) {
    case TermKind::Const:
      if (a->value && b->value) return *a->value == *b->value;
      if (a->value.has_value() != b->value.has_value()) return false;
      return a->name == b->name;
    case TermKind::Var:
    case TermKind::Fresh:
      return a->name == b->name;
    case TermKind::Op:
      return a->op == b->op && a->wrapped == b->wrapped && term_equal(a->lhs, b->lhs) &&
             term_equal(a->rhs, b->rhs);
  }
  return false;
}

inline bool term_is_ground(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Var: return false;
    case TermKind::Op: return term_is_ground(t->lhs) && term_is_ground(t->rhs);
    default: return true;
  }
}

// Substitutions map rule-variable names to terms.
using Subst = std::map<std::string, TermPtr>;

struct SortMismatch {
  std::string variable;
};

inline TermPtr apply_subst(const TermPtr& t, const Subst& s) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = s.find(t->name);
      return it == s.end() ? t : it->second;
    }
    case TermKind::Op: {
      TermPtr l = apply_subst(t->lhs, s);
      TermPtr r = apply_subst(t->rhs, s);
      if (t->wrapped) return op_term(t->op, std::move(l), std::move(r));
      return op_term_raw(t->op, std::move(l), std::move(r));
    }
    default:
      return t;
  }
}

// First-order syntactic matching: extends `s` so that pattern σ = value.
inline bool match_term(const TermPtr& pattern, const TermPtr& value, Subst& s) {
  switch (pattern->kind) {
    case TermKind::Var: {
      auto it = s.find(pattern->name);
      if (it != s.end()) return term_equal(it->second, value);
      if (pattern->sort != Sort::Num) {
        // non-numeric variables bind only like-sorted atoms
        if (value->kind == TermKind::Op) return false;
        if (value->sort != pattern->sort) return false;
      }
      s[pattern->name] = value;
      return true;
    }
    case TermKind::Const:
      return term_equal(pattern, value);
    case TermKind::Fresh:
      return term_equal(pattern, value);
    case TermKind::Op:
      return value->kind == TermKind::Op && value->op == pattern->op &&
             value->wrapped == pattern->wrapped && match_term(pattern->lhs, value->lhs, s) &&
             match_term(pattern->rhs, value->rhs, s);
  }
  return false;
}

// Collect the distinct atoms (vars/fresh names) of a term.
inline void collect_atoms(const TermPtr& t, std::vector<TermPtr>& out) {
  switch (t->kind) {
    case TermKind::Op:
      collect_atoms(t->lhs, out);
      collect_atoms(t->rhs, out);
      return;
    default:
      for (const auto& existing : out)
        if (term_equal(existing, t)) return;
      out.push_back(t);
      return;
  }
}

// Deterministic source of fresh atoms.
class FreshGen {
public:
  TermPtr make(const std::string& base, Sort sort, const std::string& origin) {
    int n = ++counters_[base];
    return fresh_term(base + "#" + std::to_string(n), sort, origin);
  }
  int firing_count(const std::string& base) const {
    auto it = counters_.find(base);
    return it == counters_.end() ? 0 : it->second;
  }

private:
  std::map<std::string, int> counters_;
};

}  // namespace finverif
