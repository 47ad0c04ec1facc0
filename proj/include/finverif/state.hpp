#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "finverif/rules.hpp"

namespace finverif {

// A ground state: a multiset of facts, kept sorted by canonical print so
// hashing for deduplication is a concatenation.
struct State {
  std::vector<Fact> facts;
  std::vector<std::string> prints;  // parallel, sorted

  void add(Fact f) {
    std::string key = print_fact(f);
    auto it = std::lower_bound(prints.begin(), prints.end(), key);
    std::size_t idx = static_cast<std::size_t>(it - prints.begin());
    prints.insert(it, std::move(key));
    facts.insert(facts.begin() + static_cast<std::ptrdiff_t>(idx), std::move(f));
  }

  bool remove_one(const Fact& f) {
    std::string key = print_fact(f);
    auto it = std::lower_bound(prints.begin(), prints.end(), key);
    if (it == prints.end() || *it != key) return false;
    std::size_t idx = static_cast<std::size_t>(it - prints.begin());
    prints.erase(it);
    facts.erase(facts.begin() + static_cast<std::ptrdiff_t>(idx));
    return true;
  }

  int count(const Fact& f) const {
    std::string key = print_fact(f);
    auto range = std::equal_range(prints.begin(), prints.end(), key);
    return static_cast<int>(range.second - range.first);
  }

  std::size_t size() const { return facts.size(); }

  std::string canonical_key() const {
    std::string out;
    for (const auto& p : prints) {
      out += p;
      out += '\n';
    }
    return out;
  }
};

struct NotApplicable {
  std::string reason;
};

using ApplyOutcome = std::variant<State, NotApplicable, SortMismatch>;

// Sort discipline: every variable binding must respect the variable's sort.
inline std::optional<SortMismatch> check_subst_sorts(const Rule& rule, const Subst& subst) {
  auto check_term = [&](const TermPtr& t, auto&& self) -> std::optional<SortMismatch> {
    if (t->kind == TermKind::Var) {
      auto it = subst.find(t->name);
      if (it != subst.end()) {
        const TermPtr& v = it->second;
        Sort value_sort = v->kind == TermKind::Op ? Sort::Num : v->sort;
        if (value_sort != t->sort) return SortMismatch{t->name};
      }
      return std::nullopt;
    }
    if (t->kind == TermKind::Op) {
      if (auto r = self(t->lhs, self)) return r;
      return self(t->rhs, self);
    }
    return std::nullopt;
  };
  for (const auto& f : rule.premises)
    for (const auto& a : f.args)
      if (auto r = check_term(a, check_term)) return r;
  for (const auto& f : rule.conclusions)
    for (const auto& a : f.args)
      if (auto r = check_term(a, check_term)) return r;
  return std::nullopt;
}

// One rewriting step: state' = (state \ premises σ) ∪ conclusions σ,
// applicable iff premises σ is a sub-multiset of state.
inline ApplyOutcome apply_rule(const State& state, const Rule& rule, const Subst& subst) {
  if (auto mismatch = check_subst_sorts(rule, subst)) return *mismatch;
  State next = state;
  for (const auto& p : rule.premises) {
    Fact ground = apply_subst(p, subst);
    for (const auto& a : ground.args)
      if (!term_is_ground(a)) return NotApplicable{"substitution does not ground " + print_fact(ground)};
    if (!next.remove_one(ground)) return NotApplicable{"missing premise " + print_fact(ground)};
  }
  for (const auto& c : rule.conclusions) next.add(apply_subst(c, subst));
  return next;
}

struct Applicable {
  const Rule* rule = nullptr;
  Subst subst;
  std::vector<Fact> fresh_facts;  // Fr facts the Fresh rule must provide first
};

// Enumerate every (rule, substitution) pair whose non-Fr premises match the
// state. Fr premises are satisfied by newly generated names; numeric
// variables bind whatever symbolic expression sits in the matched slot.
// Fresh names carry `step_index` so they depend only on the path taken, not
// on global search order.
inline std::vector<Applicable> enumerate_applicable(const State& state,
                                                    const std::vector<Rule>& rules,
                                                    int step_index) {
  std::vector<Applicable> out;
  for (const auto& rule : rules) {
    std::vector<const Fact*> linear;
    std::vector<const Fact*> fresh_premises;
    for (const auto& p : rule.premises) {
      if (p.sym == FactSym::Fr) fresh_premises.push_back(&p);
      else linear.push_back(&p);
    }

    std::vector<std::size_t> used;
    Subst subst;

    auto emit = [&]() {
      Applicable app;
      app.rule = &rule;
      app.subst = subst;
      // Bind the Fr-premise variables to fresh atoms.
      for (const Fact* fp : fresh_premises) {
        const TermPtr& v = fp->args.at(0);
        if (v->kind != TermKind::Var) continue;
        if (app.subst.count(v->name)) continue;
        TermPtr atom = fresh_term(v->name + "#" + std::to_string(step_index), v->sort,
                                  rule.kind + ":" + v->name);
        app.subst[v->name] = atom;
      }
      for (const Fact* fp : fresh_premises)
        app.fresh_facts.push_back(apply_subst(*fp, app.subst));
      // Duplicates from identical facts at different positions collapse by
      // construction: the state is print-sorted, so equal facts are adjacent
      // and matching binds the first unused one.
      out.push_back(std::move(app));
    };

    auto backtrack = [&](auto&& self, std::size_t premise_idx) -> void {
      if (premise_idx == linear.size()) {
        emit();
        return;
      }
      const Fact& pat = *linear[premise_idx];
      for (std::size_t i = 0; i < state.facts.size(); ++i) {
        if (std::find(used.begin(), used.end(), i) != used.end()) continue;
        // identical adjacent fact: same match as its predecessor
        if (i > 0 && state.prints[i] == state.prints[i - 1] &&
            std::find(used.begin(), used.end(), i - 1) == used.end())
          continue;
        const Fact& candidate = state.facts[i];
        if (!fact_shape_equal(pat, candidate)) continue;
        Subst saved = subst;
        bool ok = true;
        for (std::size_t k = 0; k < pat.args.size() && ok; ++k)
          ok = match_term(pat.args[k], candidate.args[k], subst);
        if (ok) {
          used.push_back(i);
          self(self, premise_idx + 1);
          used.pop_back();
        }
        subst = std::move(saved);
      }
    };
    backtrack(backtrack, 0);
  }
  return out;
}

}  // namespace finverif
