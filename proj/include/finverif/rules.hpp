#pragma once

#include <string>
#include <vector>

#include "finverif/term.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Facts
// ---------------------------------------------------------------------------

enum class FactSym {
  Gvar,
  Evar,
  Var,       // program counter fact, carries a position string
  CallE,
  CallIn,
  Return,
  Fallback,
  ReturnFallback,
  Fr,
  Bvar,
};

// Twin-execution subscript used by the equivalence model.
enum class Side { None, A, B };

struct Fact {
  FactSym sym = FactSym::Var;
  Side side = Side::None;
  std::string pos;  // Var facts: position string over {1,2,3}
  std::vector<TermPtr> args;
};

inline std::string side_suffix(Side s) {
  switch (s) {
    case Side::None: return "";
    case Side::A: return "A";
    case Side::B: return "B";
  }
  return "";
}

inline std::string fact_symbol_name(const Fact& f) {
  switch (f.sym) {
    case FactSym::Gvar: return "Gvar" + (f.side == Side::None ? "" : "_" + side_suffix(f.side));
    case FactSym::Evar: return "Evar" + (f.side == Side::None ? "" : "_" + side_suffix(f.side));
    case FactSym::Var: {
      std::string s = "Var_";
      if (f.side != Side::None) s += side_suffix(f.side);
      return s + f.pos;
    }
    case FactSym::CallE: return "Call_" + (f.side == Side::None ? std::string() : side_suffix(f.side)) + "e";
    case FactSym::CallIn: return "Call_" + (f.side == Side::None ? std::string() : side_suffix(f.side)) + "in";
    case FactSym::Return: return "Return" + (f.side == Side::None ? "" : "_" + side_suffix(f.side));
    case FactSym::Fallback: return "Fallback" + (f.side == Side::None ? "" : "_" + side_suffix(f.side));
    case FactSym::ReturnFallback:
      return "ReturnFallback" + (f.side == Side::None ? "" : "_" + side_suffix(f.side));
    case FactSym::Fr: return "Fr";
    case FactSym::Bvar: return "Bvar" + (f.side == Side::None ? "" : "_" + side_suffix(f.side));
  }
  return "?";
}

inline std::string print_fact(const Fact& f) {
  std::string out = fact_symbol_name(f) + "(";
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    if (i) out += ", ";
    out += print_term(f.args[i]);
  }
  return out + ")";
}

inline bool fact_shape_equal(const Fact& a, const Fact& b) {
  return a.sym == b.sym && a.side == b.side && a.pos == b.pos && a.args.size() == b.args.size();
}

inline bool fact_equal(const Fact& a, const Fact& b) {
  if (!fact_shape_equal(a, b)) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!term_equal(a.args[i], b.args[i])) return false;
  return true;
}

inline Fact make_fact(FactSym sym, std::vector<TermPtr> args, Side side = Side::None,
                      std::string pos = "") {
  Fact f;
  f.sym = sym;
  f.side = side;
  f.pos = std::move(pos);
  f.args = std::move(args);
  return f;
}

inline Fact apply_subst(const Fact& f, const Subst& s) {
  Fact out = f;
  for (auto& a : out.args) a = apply_subst(a, s);
  return out;
}

// ---------------------------------------------------------------------------
// Numeric constraints and rule actions
// ---------------------------------------------------------------------------

enum class Rel { Eq, Neq, Less, Leq };

struct NumConstraint {
  Rel rel = Rel::Eq;
  TermPtr lhs, rhs;
};

inline std::string rel_name(Rel r) {
  switch (r) {
    case Rel::Eq: return "EqNum";
    case Rel::Neq: return "NeqNum";
    case Rel::Less: return "LessNum";
    case Rel::Leq: return "LeqNum";
  }
  return "?";
}

inline std::string print_constraint(const NumConstraint& c) {
  return rel_name(c.rel) + "(" + print_term(c.lhs) + ", " + print_term(c.rhs) + ")";
}

inline NumConstraint apply_subst(const NumConstraint& c, const Subst& s) {
  return NumConstraint{c.rel, apply_subst(c.lhs, s), apply_subst(c.rhs, s)};
}

struct Action {
  enum class Kind { Label, NumFact, NumAlt, PredEq, PredNeq };
  Kind kind = Kind::Label;
  std::string label;                  // Label: Start, End, Init_E, Init_G, Exc
  std::vector<TermPtr> args;          // Label arguments or the two Pred operands
  NumConstraint constraint;           // NumFact payload
  std::vector<NumConstraint> alts;    // NumAlt: satisfy at least one

  static Action make_label(std::string name, std::vector<TermPtr> args = {}) {
    Action a;
    a.kind = Kind::Label;
    a.label = std::move(name);
    a.args = std::move(args);
    return a;
  }
  static Action make_num(NumConstraint c) {
    Action a;
    a.kind = Kind::NumFact;
    a.constraint = std::move(c);
    return a;
  }
  static Action make_alt(std::vector<NumConstraint> alts) {
    Action a;
    a.kind = Kind::NumAlt;
    a.alts = std::move(alts);
    return a;
  }
  static Action make_pred(bool eq, TermPtr l, TermPtr r) {
    Action a;
    a.kind = eq ? Kind::PredEq : Kind::PredNeq;
    a.args = {std::move(l), std::move(r)};
    return a;
  }
};

inline std::string print_action(const Action& a) {
  switch (a.kind) {
    case Action::Kind::Label: {
      std::string out = a.label + "(";
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ", ";
        out += print_term(a.args[i]);
      }
      return out + ")";
    }
    case Action::Kind::NumFact:
      return print_constraint(a.constraint);
    case Action::Kind::NumAlt: {
      std::string out = "OrNum(";
      for (std::size_t i = 0; i < a.alts.size(); ++i) {
        if (i) out += " | ";
        out += print_constraint(a.alts[i]);
      }
      return out + ")";
    }
    case Action::Kind::PredEq:
      return "Pred_eq(" + print_term(a.args[0]) + ", " + print_term(a.args[1]) + ")";
    case Action::Kind::PredNeq:
      return "Pred_neq(" + print_term(a.args[0]) + ", " + print_term(a.args[1]) + ")";
  }
  return "?";
}

inline Action apply_subst(const Action& a, const Subst& s) {
  Action out = a;
  for (auto& t : out.args) t = apply_subst(t, s);
  if (a.kind == Action::Kind::NumFact) out.constraint = apply_subst(a.constraint, s);
  if (a.kind == Action::Kind::NumAlt)
    for (auto& c : out.alts) c = apply_subst(c, s);
  return out;
}

// ---------------------------------------------------------------------------
// Rules and restrictions
// ---------------------------------------------------------------------------

// Read or write of a storage slot by the statement a rule came from; the
// index term records which address selects the slot, so the verifier can
// enforce that every access to one slot uses one address.
struct SlotAccess {
  std::string slot;  // slot variable name, e.g. balances[to]
  std::string key;   // static address key selecting the slot
  TermPtr index;     // rule term for the accessing address
};

struct Rule {
  std::string kind;  // translation-schema name: ext_call, var_assign, ret_ext, ...
  std::string tag;   // disambiguator, usually function@position
  Side side = Side::None;
  std::vector<Fact> premises;
  std::vector<Action> actions;
  std::vector<Fact> conclusions;
  int source_line = 0;
  std::vector<SlotAccess> slot_accesses;

  std::string display_name() const {
    std::string n = kind;
    if (side != Side::None) n += "_" + side_suffix(side);
    if (!tag.empty()) n += "[" + tag + "]";
    return n;
  }
};

inline std::string print_rule(const Rule& r) {
  std::string out = r.display_name() + ": [";
  for (std::size_t i = 0; i < r.premises.size(); ++i) {
    if (i) out += ", ";
    out += print_fact(r.premises[i]);
  }
  out += "] --[";
  for (std::size_t i = 0; i < r.actions.size(); ++i) {
    if (i) out += ", ";
    out += print_action(r.actions[i]);
  }
  out += "]-> [";
  for (std::size_t i = 0; i < r.conclusions.size(); ++i) {
    if (i) out += ", ";
    out += print_fact(r.conclusions[i]);
  }
  return out + "]";
}

struct Restriction {
  enum class Kind {
    OnceLabel,     // each ground instance of the label occurs at most once
    PairedLabels,  // the two labels' instance multisets must be equal
  };
  Kind kind = Kind::OnceLabel;
  std::string label;    // OnceLabel
  std::string label_a;  // PairedLabels
  std::string label_b;

  static Restriction once(std::string label) {
    Restriction r;
    r.kind = Kind::OnceLabel;
    r.label = std::move(label);
    return r;
  }
  static Restriction paired(std::string a, std::string b) {
    Restriction r;
    r.kind = Kind::PairedLabels;
    r.label_a = std::move(a);
    r.label_b = std::move(b);
    return r;
  }
};

}  // namespace finverif
