#pragma once

#include <map>
#include <string>
#include <vector>

#include "finverif/state.hpp"

namespace finverif {

// One transition of an execution. The distinguished Fresh rule appears as a
// step with kind "Fresh" producing a single Fr fact.
struct Step {
  std::string rule_kind;
  std::string rule_tag;
  Side side = Side::None;
  int source_line = 0;
  const Rule* rule = nullptr;  // null for Fresh steps
  Subst subst;
  std::vector<Fact> consumed;
  std::vector<Fact> produced;
  std::vector<Action> actions;  // instantiated action labels/constraints
  State after;
};

// An execution starts from the empty state; Fr(a) is produced at most once
// per name a.
struct Execution {
  std::vector<Step> steps;

  const State& final_state() const {
    static const State empty;
    return steps.empty() ? empty : steps.back().after;
  }

  std::vector<std::string> rule_names() const {
    std::vector<std::string> out;
    for (const auto& s : steps)
      if (s.rule_kind != "Fresh") out.push_back(s.rule_kind + (s.rule_tag.empty() ? "" : "[" + s.rule_tag + "]"));
    return out;
  }
};

inline Step make_fresh_step(const State& before, const Fact& fr_fact) {
  Step st;
  st.rule_kind = "Fresh";
  st.produced = {fr_fact};
  st.after = before;
  st.after.add(fr_fact);
  return st;
}

// Apply one rule, materializing Fr premises through Fresh steps first.
// Returns false (leaving exec untouched) when the rule does not apply.
inline bool apply_step(Execution& exec, State& state, const Applicable& app) {
  State working = state;
  std::vector<Step> pending;
  for (const auto& fr : app.fresh_facts) {
    pending.push_back(make_fresh_step(working, fr));
    working = pending.back().after;
  }
  ApplyOutcome outcome = apply_rule(working, *app.rule, app.subst);
  if (!std::holds_alternative<State>(outcome)) return false;

  Step st;
  st.rule_kind = app.rule->kind;
  st.rule_tag = app.rule->tag;
  st.side = app.rule->side;
  st.source_line = app.rule->source_line;
  st.rule = app.rule;
  st.subst = app.subst;
  for (const auto& p : app.rule->premises) st.consumed.push_back(apply_subst(p, app.subst));
  for (const auto& c : app.rule->conclusions) st.produced.push_back(apply_subst(c, app.subst));
  for (const auto& a : app.rule->actions) st.actions.push_back(apply_subst(a, app.subst));
  st.after = std::get<State>(outcome);

  for (auto& ps : pending) exec.steps.push_back(std::move(ps));
  state = st.after;
  exec.steps.push_back(std::move(st));
  return true;
}

// ---------------------------------------------------------------------------
// Restriction checking over the action trace.
// ---------------------------------------------------------------------------

inline std::string label_instance_key(const Action& a) {
  std::string key = a.label;
  for (const auto& t : a.args) key += "|" + print_term(t);
  return key;
}

inline bool check_restrictions(const Execution& exec, const std::vector<Restriction>& rs) {
  std::map<std::string, int> label_counts;           // per ground instance
  std::map<std::string, std::map<std::string, int>> by_label;  // label -> arg-tuple -> count
  for (const auto& step : exec.steps) {
    for (const auto& a : step.actions) {
      if (a.kind != Action::Kind::Label) continue;
      label_counts[label_instance_key(a)]++;
      std::string args;
      for (const auto& t : a.args) args += print_term(t) + "|";
      by_label[a.label][args]++;
    }
  }
  for (const auto& r : rs) {
    switch (r.kind) {
      case Restriction::Kind::OnceLabel: {
        for (const auto& [key, count] : label_counts) {
          if (count > 1 && key.compare(0, r.label.size(), r.label) == 0 &&
              (key.size() == r.label.size() || key[r.label.size()] == '|'))
            return false;
        }
        break;
      }
      case Restriction::Kind::PairedLabels: {
        auto a = by_label.find(r.label_a);
        auto b = by_label.find(r.label_b);
        const std::map<std::string, int> empty;
        const auto& ma = a == by_label.end() ? empty : a->second;
        const auto& mb = b == by_label.end() ? empty : b->second;
        if (ma != mb) return false;
        break;
      }
    }
  }
  return true;
}

// Fresh-name uniqueness over a whole execution.
inline bool fresh_names_unique(const Execution& exec) {
  std::map<std::string, int> seen;
  for (const auto& step : exec.steps) {
    if (step.rule_kind != "Fresh") continue;
    for (const auto& f : step.produced)
      if (f.sym == FactSym::Fr && ++seen[print_term(f.args.at(0))] > 1) return false;
  }
  return true;
}

}  // namespace finverif
