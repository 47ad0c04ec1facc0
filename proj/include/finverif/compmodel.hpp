#pragma once

#include <string>
#include <vector>

#include "finverif/execution.hpp"
#include "finverif/model.hpp"
#include "finverif/properties.hpp"

namespace finverif {

// A complementary model: the independent model with rules replaced or added
// so that reaching End() is exactly a property violation.
struct ComplementaryModel {
  Property property;
  IndependentModel base;
  std::vector<Rule> rules;
  std::vector<Restriction> restrictions;
  bool equivalence = false;
  bool uses_timestamp = false;
  NumConstraint phi;                        // invariant formula (positive form)
  std::vector<NumConstraint> phi_equ_neg;   // equivalence: negated-conjunct alternatives
};

using InvariantModel = ComplementaryModel;
using EquivalenceModel = ComplementaryModel;

namespace detail {

inline TermPtr sum_terms(const std::vector<TermPtr>& terms) {
  TermPtr acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = op_term_raw(BinOp::Add, acc, terms[i]);
  return acc;
}

// Σ balances(a) over A_1, as slot variables under the model's partition.
inline NumConstraint invariant_formula(const IndependentModel& base, const InvariantProperty& p) {
  std::vector<TermPtr> terms;
  for (const auto& key : p.index_keys) {
    std::string slot = base.mapping_slot(p.contract, p.mapping, base.partition.rep(key));
    terms.push_back(var_term(slot, Sort::Num));
  }
  TermPtr rhs = p.rhs_total_supply
                    ? var_term(base.scalar_slot(p.contract, p.total_supply), Sort::Num)
                    : sym_const("C1", Sort::Num);
  return NumConstraint{Rel::Eq, sum_terms(terms), rhs};
}

inline std::string rule_contract(const Rule& r) {
  auto at = r.tag.find('@');
  std::string cf = at == std::string::npos ? r.tag : r.tag.substr(0, at);
  auto dot = cf.find('.');
  return dot == std::string::npos ? cf : cf.substr(0, dot);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Invariant model: ext_call -> ext_call_inv (Start, once), init_gvars ->
// init_gvars_inv (invariant assumed), ret_ext -> ret_ext_inv (negated
// invariant + End). Everything else carries over unchanged.
// ---------------------------------------------------------------------------

inline ComplementaryModel build_invariant_model(const IndependentModel& indep,
                                                const Property& prop) {
  ComplementaryModel m;
  m.property = prop;
  m.base = indep;
  m.equivalence = false;
  m.uses_timestamp = indep.any_timestamp;
  m.phi = detail::invariant_formula(indep, prop.invariant);

  const ContractModelInfo* owner = indep.info_for(prop.invariant.contract);
  for (const auto& r : indep.rules) {
    Rule out = r;
    if (r.kind == "ext_call") {
      out.kind = "ext_call_inv";
      out.actions.push_back(Action::make_label("Start"));
    } else if (r.kind == "init_gvars" && r.tag == prop.invariant.contract) {
      out.kind = "init_gvars_inv";
      out.actions.push_back(Action::make_num(m.phi));
    } else if (r.kind == "ret_ext") {
      out.kind = "ret_ext_inv";
      out.actions.push_back(Action::make_num(NumConstraint{Rel::Neq, m.phi.lhs, m.phi.rhs}));
      out.actions.push_back(Action::make_label("End"));
      // A return in another contract still checks the token contract's
      // invariant: read its Gvar back, untouched.
      if (owner && detail::rule_contract(r) != prop.invariant.contract) {
        std::vector<TermPtr> gargs{owner->address};
        for (const auto& t : owner->omega0.globals_minus_ether()) gargs.push_back(t);
        out.premises.push_back(make_fact(FactSym::Gvar, gargs));
        out.conclusions.push_back(make_fact(FactSym::Gvar, gargs));
      }
    }
    m.rules.push_back(std::move(out));
  }
  m.restrictions = indep.restrictions;
  m.restrictions.push_back(Restriction::once("Start"));
  return m;
}

// ---------------------------------------------------------------------------
// Equivalence model: duplicate the transition rules into A and B copies,
// share one external-call producer emitting twin Call facts, pair received
// transactions through Exc labels, and compare the adversary's balances.
// ---------------------------------------------------------------------------

namespace detail {

inline Fact with_side(Fact f, Side side) {
  if (f.sym != FactSym::Fr) f.side = side;
  return f;
}

inline Rule duplicate_rule(const Rule& r, Side side) {
  Rule out = r;
  out.side = side;
  for (auto& f : out.premises) f = with_side(std::move(f), side);
  for (auto& f : out.conclusions) f = with_side(std::move(f), side);
  return out;
}

}  // namespace detail

inline ComplementaryModel build_equivalence_model(const IndependentModel& indep,
                                                  const Property& prop) {
  ComplementaryModel m;
  m.property = prop;
  m.base = indep;
  m.equivalence = true;
  m.uses_timestamp = indep.any_timestamp;

  for (const auto& r : indep.rules) {
    if (r.kind == "init_evars") {
      Rule out = r;
      out.kind = "init_evars_AB";
      out.conclusions.clear();
      out.conclusions.push_back(
          detail::with_side(make_fact(FactSym::Evar, indep.ether_tuples.sigma()), Side::A));
      out.conclusions.push_back(
          detail::with_side(make_fact(FactSym::Evar, indep.ether_tuples.sigma()), Side::B));
      m.rules.push_back(std::move(out));
      continue;
    }
    if (r.kind == "init_gvars") {
      Rule out = r;
      out.kind = "init_gvars_AB";
      std::vector<Fact> twins;
      for (const auto& f : out.conclusions) {
        twins.push_back(detail::with_side(f, Side::A));
        twins.push_back(detail::with_side(f, Side::B));
      }
      out.conclusions = std::move(twins);
      m.rules.push_back(std::move(out));
      continue;
    }
    if (r.kind == "ext_call") {
      Rule out = r;
      bool has_bt = false;
      for (const auto& p : r.premises)
        if (p.sym == FactSym::Fr && p.args.at(0)->kind == TermKind::Var &&
            p.args.at(0)->name == "bt")
          has_bt = true;
      if (!has_bt) {
        out.kind = "ext_call_AB";
        std::vector<Fact> twins;
        for (const auto& f : out.conclusions) {
          twins.push_back(detail::with_side(f, Side::A));
          twins.push_back(detail::with_side(f, Side::B));
        }
        out.conclusions = std::move(twins);
      } else {
        // the adversary may schedule the twins into different blocks
        out.kind = "ext_call_bvar_AB";
        std::vector<Fact> prem;
        for (const auto& p : out.premises) {
          if (p.sym == FactSym::Fr && p.args.at(0)->kind == TermKind::Var &&
              p.args.at(0)->name == "bt") {
            prem.push_back(make_fact(FactSym::Fr, {var_term("bt_A", Sort::Num)}));
            prem.push_back(make_fact(FactSym::Fr, {var_term("bt_B", Sort::Num)}));
          } else {
            prem.push_back(p);
          }
        }
        out.premises = std::move(prem);
        std::vector<Fact> concl;
        concl.push_back(make_fact(FactSym::Bvar, {var_term("bt_A", Sort::Num)}, Side::A));
        concl.push_back(make_fact(FactSym::Bvar, {var_term("bt_B", Sort::Num)}, Side::B));
        Subst to_a{{"bt", var_term("bt_A", Sort::Num)}};
        Subst to_b{{"bt", var_term("bt_B", Sort::Num)}};
        for (const auto& f : out.conclusions) {
          concl.push_back(detail::with_side(apply_subst(f, to_a), Side::A));
          concl.push_back(detail::with_side(apply_subst(f, to_b), Side::B));
        }
        out.conclusions = std::move(concl);
      }
      m.rules.push_back(std::move(out));
      continue;
    }
    // everything else: one copy per side
    Rule ra = detail::duplicate_rule(r, Side::A);
    Rule rb = detail::duplicate_rule(r, Side::B);
    if (r.kind == "recv_ext") {
      // Call_e payload is [c, f, c_b, ...]
      TermPtr fn_sym = r.premises.front().args.at(1);
      ra.actions.push_back(Action::make_label("Exc_A", {var_term("c_b", Sort::Addr), fn_sym}));
      rb.actions.push_back(Action::make_label("Exc_B", {var_term("c_b", Sort::Addr), fn_sym}));
    }
    m.rules.push_back(std::move(ra));
    m.rules.push_back(std::move(rb));
  }

  // compare_AB: state-preserving read of both final snapshots, asserting the
  // adversary's balances differ.
  Rule cmp;
  cmp.kind = "compare_AB";
  std::vector<SlotAccess> accesses;
  auto side_var = [](Side s, const std::string& name) {
    return var_term((s == Side::A ? "A::" : "B::") + name, Sort::Num);
  };
  for (const auto& info : indep.infos) {
    for (Side s : {Side::A, Side::B}) {
      std::vector<TermPtr> gargs{info.address};
      for (const auto& t : info.omega0.globals_minus_ether())
        gargs.push_back(side_var(s, t->name));
      Fact f = make_fact(FactSym::Gvar, std::move(gargs), s);
      cmp.premises.push_back(f);
      cmp.conclusions.push_back(f);
    }
  }
  if (!indep.ether_tuples.tuples.empty()) {
    for (Side s : {Side::A, Side::B}) {
      std::vector<TermPtr> eargs;
      for (const auto& t : indep.ether_tuples.sigma()) eargs.push_back(side_var(s, t->name));
      Fact f = make_fact(FactSym::Evar, std::move(eargs), s);
      cmp.premises.push_back(f);
      cmp.conclusions.push_back(f);
    }
  }

  // φ_equ conjuncts: the adversary's token balance per key-variable mapping
  // and its ether balance, wherever a slot for the adversary's account exists.
  std::string adv_rep = indep.partition.rep(adversary_key());
  for (std::size_t i = 0; i < indep.contracts.size(); ++i) {
    const ContractAst& c = indep.contracts[i];
    KeyVariables kv = find_key_variables(c);
    for (const auto& mname : kv.balances_vars) {
      std::string slot = indep.mapping_slot(c.name, mname, adv_rep);
      if (!indep.slot_base.count(slot)) continue;
      m.phi_equ_neg.push_back(
          NumConstraint{Rel::Neq, side_var(Side::A, slot), side_var(Side::B, slot)});
    }
  }
  {
    std::string eslot = detail::balance_slot_name(adv_rep);
    if (indep.slot_base.count(eslot))
      m.phi_equ_neg.push_back(
          NumConstraint{Rel::Neq, side_var(Side::A, eslot), side_var(Side::B, eslot)});
  }
  if (!m.phi_equ_neg.empty()) {
    cmp.actions.push_back(Action::make_alt(m.phi_equ_neg));
    cmp.actions.push_back(Action::make_label("End"));
    m.rules.push_back(std::move(cmp));
  }

  m.restrictions = indep.restrictions;
  m.restrictions.push_back(Restriction::paired("Exc_A", "Exc_B"));
  return m;
}

// ---------------------------------------------------------------------------
// Block-timestamp constraints: index the Bvar productions per side in trace
// order; timestamps increase per side, and the adversary may stretch the B
// timestamp at most 15 seconds past the paired A timestamp.
// ---------------------------------------------------------------------------

struct TimestampConstraintSet {
  std::vector<TermPtr> bt_a, bt_b;  // indexed symbols in appearance order
  std::vector<NumConstraint> constraints;
};

inline TimestampConstraintSet index_timestamps(const Execution& exec) {
  TimestampConstraintSet out;
  for (const auto& step : exec.steps) {
    for (const auto& f : step.produced) {
      if (f.sym != FactSym::Bvar) continue;
      if (f.side == Side::A) out.bt_a.push_back(f.args.at(0));
      if (f.side == Side::B) out.bt_b.push_back(f.args.at(0));
    }
  }
  for (std::size_t i = 1; i < out.bt_a.size(); ++i)
    out.constraints.push_back(NumConstraint{Rel::Less, out.bt_a[i - 1], out.bt_a[i]});
  for (std::size_t i = 1; i < out.bt_b.size(); ++i)
    out.constraints.push_back(NumConstraint{Rel::Less, out.bt_b[i - 1], out.bt_b[i]});
  for (std::size_t i = 0; i < out.bt_a.size() && i < out.bt_b.size(); ++i)
    out.constraints.push_back(NumConstraint{
        Rel::Leq, out.bt_b[i], op_term_raw(BinOp::Add, out.bt_a[i], num_const(U256(15)))});
  return out;
}

}  // namespace finverif
