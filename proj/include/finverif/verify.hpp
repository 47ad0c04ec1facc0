#pragma once

#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "finverif/search.hpp"
#include "finverif/smtlib.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Solve dispatch: built-in linear procedure or an external SMT-LIB2 process.
// ---------------------------------------------------------------------------

inline std::set<std::string> trace_address_atoms(const Execution& exec) {
  std::set<std::string> out;
  for (const auto& step : exec.steps)
    for (const auto& [var, term] : step.subst)
      if (term->kind == TermKind::Fresh && term->sort == Sort::Addr) out.insert(term->name);
  return out;
}

inline SolveResult solve(const ConstraintSet& cs, const SearchConfig& cfg) {
  bool any_unknown = false;
  std::string reason;
  for (std::size_t combo = 0; combo < cs.disjunction_combinations(); ++combo) {
    std::vector<NumConstraint> flat = cs.flattened(combo);
    SolveResult r;
    if (cfg.solver.rfind("smtlib:", 0) == 0) {
      r = solve_with_process(cfg.solver.substr(7), flat, cs.value_max, cs.address_vars);
    } else {
      r = solve_linear(flat, cs.value_max, cs.address_vars, cs.wide_vars);
    }
    if (std::holds_alternative<Sat>(r)) return r;
    if (std::holds_alternative<SolverUnknown>(r)) {
      any_unknown = true;
      reason = std::get<SolverUnknown>(r).reason;
    }
  }
  if (any_unknown) return SolverUnknown{reason};
  return Unsat{};
}

// ---------------------------------------------------------------------------
// Witness re-validation: replay the trace concretely under the witness and
// confirm every constraint, every fact consumption, and the final violation.
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<std::string> concrete_arg(const TermPtr& t, const Assignment& w) {
  if (t->kind == TermKind::Const && !t->value && t->sort != Sort::Num) return t->name;
  if (t->sort == Sort::Tag || t->sort == Sort::Fn) return print_term(t);
  auto v = eval_term_exact(t, w);
  if (!v) return std::nullopt;
  return v->to_string();
}

inline std::optional<std::string> concrete_fact(const Fact& f, const Assignment& w) {
  std::string out = fact_symbol_name(f) + "(";
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    auto a = concrete_arg(f.args[i], w);
    if (!a) return std::nullopt;
    if (i) out += ",";
    out += *a;
  }
  return out + ")";
}

}  // namespace detail

inline bool check_witness(const Execution& exec, const Assignment& witness) {
  std::map<std::string, int> facts;
  bool saw_violation = false;
  for (const auto& step : exec.steps) {
    for (const auto& f : step.consumed) {
      auto key = detail::concrete_fact(f, witness);
      if (!key) return false;
      auto it = facts.find(*key);
      if (it == facts.end() || it->second == 0) return false;
      --it->second;
    }
    for (const auto& a : step.actions) {
      switch (a.kind) {
        case Action::Kind::NumFact: {
          auto ok = eval_constraint(a.constraint, witness);
          if (!ok.has_value() || !*ok) return false;
          break;
        }
        case Action::Kind::NumAlt: {
          bool one = false;
          for (const auto& c : a.alts) {
            auto ok = eval_constraint(c, witness);
            if (ok.has_value() && *ok) one = true;
          }
          if (!one) return false;
          saw_violation = true;
          break;
        }
        case Action::Kind::PredEq:
        case Action::Kind::PredNeq: {
          auto l = detail::concrete_arg(a.args[0], witness);
          auto r = detail::concrete_arg(a.args[1], witness);
          if (!l || !r) return false;
          bool equal = *l == *r;
          if (a.kind == Action::Kind::PredEq && !equal) return false;
          if (a.kind == Action::Kind::PredNeq && equal) return false;
          break;
        }
        case Action::Kind::Label:
          if (a.label == "End") saw_violation = true;
          break;
      }
    }
    for (const auto& f : step.produced) {
      auto key = detail::concrete_fact(f, witness);
      if (!key) return false;
      facts[*key]++;
    }
  }
  return saw_violation;
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

struct VerdictInfo {
  enum class Kind { Valid, Violated, Unknown };
  Kind kind = Kind::Unknown;
  std::string unknown_reason;
  Execution trace;
  Assignment witness;
  Partition partition;
  std::vector<std::string> constraint_dump;
  int refinements = 0;  // blocked traces before the verdict
  SearchConfig bounds;
  std::chrono::milliseconds elapsed{0};
};

namespace detail {

// Canonical form of a constraint set with atoms renamed by first occurrence;
// traces that differ only in interleaving order produce identical forms, so
// their Unsat results can be shared.
inline std::string canonical_constraints(const ConstraintSet& cs) {
  std::map<std::string, std::string> rename;
  auto canon_term = [&](auto&& self, const TermPtr& t) -> std::string {
    switch (t->kind) {
      case TermKind::Const:
        if (t->value) return t->value->to_string();
        return "K:" + t->name;
      case TermKind::Var:
      case TermKind::Fresh: {
        auto it = rename.find(t->name);
        if (it == rename.end())
          it = rename.emplace(t->name, "x" + std::to_string(rename.size())).first;
        return it->second;
      }
      case TermKind::Op:
        return "(" + self(self, t->lhs) + op_glyph(t->op, t->wrapped) + self(self, t->rhs) + ")";
    }
    return "?";
  };
  auto canon_c = [&](const NumConstraint& c) {
    return rel_name(c.rel) + "(" + canon_term(canon_term, c.lhs) + "," +
           canon_term(canon_term, c.rhs) + ")";
  };
  std::vector<std::string> parts;
  for (const auto& c : cs.path) parts.push_back(canon_c(c));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) out += p + ";";
  for (const auto& c : cs.timestamps) out += canon_c(c) + ";";
  for (const auto& d : cs.disjunctions) {
    out += "|";
    for (const auto& c : d) out += canon_c(c) + ",";
  }
  if (cs.value_max) out += "max=" + cs.value_max->to_string();
  return out;
}

inline void extend_witness(const Execution& exec, Assignment& w) {
  std::uint64_t next_addr = 0xe000;
  std::set<std::string> used_values;
  for (const auto& [k, v] : w) used_values.insert(v.to_string());
  auto place = [&](const TermPtr& t) {
    if (t->kind != TermKind::Fresh || w.count(t->name)) return;
    if (t->sort == Sort::Addr) {
      BigInt v(static_cast<long long>(next_addr));
      while (used_values.count(v.to_string())) {
        next_addr += 1;
        v = BigInt(static_cast<long long>(next_addr));
      }
      used_values.insert(v.to_string());
      next_addr += 1;
      w[t->name] = v;
    } else {
      w[t->name] = BigInt(0);
    }
  };
  for (const auto& step : exec.steps) {
    for (const auto& [var, term] : step.subst)
      if (term->kind == TermKind::Fresh) place(term);
    for (const auto& f : step.produced)
      for (const auto& a : f.args) {
        std::vector<TermPtr> atoms;
        collect_atoms(a, atoms);
        for (const auto& t : atoms) place(t);
      }
  }
  // symbolic constants left free by the solver (e.g. the invariant constant)
  for (const auto& step : exec.steps)
    for (const auto& act : step.actions) {
      if (act.kind != Action::Kind::NumFact && act.kind != Action::Kind::NumAlt) continue;
      auto scan = [&](const NumConstraint& c) {
        std::vector<TermPtr> atoms;
        collect_atoms(c.lhs, atoms);
        collect_atoms(c.rhs, atoms);
        for (const auto& t : atoms)
          if (t->kind == TermKind::Const && !t->value && t->sort == Sort::Num &&
              !w.count(t->name))
            w[t->name] = BigInt(0);
      };
      if (act.kind == Action::Kind::NumFact) scan(act.constraint);
      for (const auto& c : act.alts) scan(c);
    }
}

inline std::vector<std::string> dump_constraints(const ConstraintSet& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs.path) out.push_back(print_constraint(c));
  for (const auto& d : cs.disjunctions) {
    std::string line = "one-of:";
    for (const auto& c : d) line += " " + print_constraint(c);
    out.push_back(line);
  }
  for (const auto& c : cs.timestamps) out.push_back(print_constraint(c));
  if (cs.value_max) out.push_back("range: 0 <= x <= " + cs.value_max->to_string());
  else out.push_back("range: 0 <= x < 2^256");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The verification loop: search for End(), collect constraints, solve,
// refine with blocking clauses, and re-validate every witness.
// ---------------------------------------------------------------------------

inline VerdictInfo verify(const std::vector<ContractAst>& prepared, const Property& prop,
                          const SearchConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  auto deadline = start + cfg.timeout;
  VerdictInfo out;
  out.bounds = cfg;

  auto finish = [&](VerdictInfo::Kind kind, const std::string& reason = "") {
    out.kind = kind;
    out.unknown_reason = reason;
    out.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    return out;
  };

  bool equivalence = prop.kind == Property::Kind::Equivalence;
  IndexUniverse universe = collect_index_universe(prepared, equivalence);
  if (static_cast<int>(universe.keys.size()) > cfg.max_partition_universe)
    return finish(VerdictInfo::Kind::Unknown, "address universe exceeds the case-split bound");
  std::vector<Partition> partitions = enumerate_partitions(universe.keys, universe.constants);
  if (partitions.empty()) partitions.push_back(Partition{});

  std::set<BlockingClause> blocked;
  std::set<std::string> unsat_forms;  // alpha-renamed constraint sets proven Unsat
  bool solver_gap = false;
  std::string gap_reason;

  for (const auto& partition : partitions) {
    auto base = build_independent_model(prepared, partition, equivalence);
    if (!base)
      return finish(VerdictInfo::Kind::Unknown, "model build failed: " + base.error().message);
    ComplementaryModel model = equivalence ? build_equivalence_model(base.value(), prop)
                                           : build_invariant_model(base.value(), prop);
    bool has_end_rule = false;
    for (const auto& r : model.rules)
      for (const auto& a : r.actions)
        if (a.kind == Action::Kind::Label && a.label == "End") has_end_rule = true;
    if (!has_end_rule) continue;  // nothing to compare under this aliasing case
    detail::TraceSearch engine(model, cfg);
    bool exhausted = false;
    while (!exhausted) {
      if (std::chrono::steady_clock::now() > deadline)
        return finish(VerdictInfo::Kind::Unknown, "timeout");
      bool clean = true;
      auto hits = search_end_batch(engine, model, blocked, deadline, clean);
      if (hits.empty()) {
        if (!clean) return finish(VerdictInfo::Kind::Unknown, "timeout");
        break;  // this partition's bounded space is exhausted
      }
      for (auto& hit : hits) {
        if (std::chrono::steady_clock::now() > deadline)
          return finish(VerdictInfo::Kind::Unknown, "timeout");
        ConstraintSet cs = collect_constraints(model, hit.exec, cfg);
        cs.address_vars = trace_address_atoms(hit.exec);
        std::string form = detail::canonical_constraints(cs);
        if (unsat_forms.count(form)) {
          blocked.insert(BlockingClause{hit.signature});
          ++out.refinements;
          continue;
        }
        SolveResult solved = solve(cs, cfg);
        if (std::holds_alternative<Sat>(solved)) {
          Assignment witness = std::get<Sat>(solved).witness;
          detail::extend_witness(hit.exec, witness);
          if (check_witness(hit.exec, witness)) {
            out.trace = hit.exec;
            out.witness = std::move(witness);
            out.partition = partition;
            out.constraint_dump = detail::dump_constraints(cs);
            return finish(VerdictInfo::Kind::Violated);
          }
          // A witness the replay rejects marks a solver/model disagreement;
          // exclude the trace but refuse to claim Valid later.
          solver_gap = true;
          gap_reason = "witness failed re-execution";
          blocked.insert(BlockingClause{hit.signature});
          ++out.refinements;
          continue;
        }
        if (std::holds_alternative<SolverUnknown>(solved)) {
          solver_gap = true;
          gap_reason = std::get<SolverUnknown>(solved).reason;
          blocked.insert(BlockingClause{hit.signature});
          ++out.refinements;
          continue;
        }
        unsat_forms.insert(form);
        blocked.insert(BlockingClause{hit.signature});
        ++out.refinements;
      }
    }
  }
  if (solver_gap) return finish(VerdictInfo::Kind::Unknown, "solver: " + gap_reason);
  return finish(VerdictInfo::Kind::Valid);
}

}  // namespace finverif
