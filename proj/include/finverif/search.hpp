#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "finverif/compmodel.hpp"
#include "finverif/execution.hpp"
#include "finverif/solver.hpp"

namespace finverif {

struct SearchConfig {
  int max_depth = 60;
  int tx_bound = 2;
  int call_depth_cap = 2;
  std::chrono::milliseconds timeout{300000};
  std::optional<U256> value_max;
  std::string solver = "builtin";  // or "smtlib:<path>"
  int max_partition_universe = 6;
};

// Whole-trace signature excluding an Unsat candidate from future search.
struct BlockingClause {
  std::string signature;
  bool operator<(const BlockingClause& o) const { return signature < o.signature; }
};

inline std::string trace_signature(const Partition& partition, const Execution& exec) {
  std::string sig = partition.describe();
  for (const auto& step : exec.steps) {
    if (step.rule_kind == "Fresh") continue;
    sig += "|" + step.rule_kind + (step.rule_tag.empty() ? "" : "[" + step.rule_tag + "]");
    std::vector<std::string> consumed;
    for (const auto& f : step.consumed) consumed.push_back(print_fact(f));
    std::sort(consumed.begin(), consumed.end());
    for (const auto& c : consumed) sig += ";" + c;
  }
  return sig;
}

// ---------------------------------------------------------------------------
// Bounded reachability search for End(), iterative deepening, restriction
// pruning, canonical-state cycle detection, and an interleaving normal form
// for the twin-execution model (producers, then A steps, then B steps).
// ---------------------------------------------------------------------------

namespace detail {

inline int rule_phase(const Rule& r) {
  if (r.kind.rfind("init", 0) == 0 || r.kind.rfind("ext_call", 0) == 0) return 0;
  if (r.kind == "compare_AB") return 3;
  if (r.side == Side::A) return 1;
  if (r.side == Side::B) return 2;
  return 1;
}

struct SearchOutcome {
  std::vector<Execution> found;   // cohort of distinct yields at one length
  bool exhausted_cleanly = true;  // false on timeout
};

class TraceSearch {
public:
  TraceSearch(const ComplementaryModel& model, const SearchConfig& cfg)
      : model_(model), cfg_(cfg) {}

  // Re-entrant: the exhaustion memo persists across refinement iterations,
  // which is sound because a grown blocked set only removes yields. One call
  // returns the cohort of distinct yields at the shortest productive length.
  SearchOutcome run(const std::set<BlockingClause>& blocked,
                    std::chrono::steady_clock::time_point deadline) {
    blocked_ = &blocked;
    deadline_ = deadline;
    SearchOutcome out;
    for (int limit = 1; limit <= cfg_.max_depth; ++limit) {
      State initial;
      Execution exec;
      Counters counters;
      bool timed_out = false;
      frontier_touched_ = false;
      yield_length_ = limit;
      batch_.clear();
      dfs(initial, exec, counters, limit, timed_out);
      if (timed_out) {
        out.exhausted_cleanly = false;
        return out;
      }
      if (!batch_.empty()) {
        out.found = std::move(batch_);
        batch_.clear();
        if (batch_cap_ < 64) batch_cap_ *= 8;  // refinement runs batch harder
        return out;
      }
      if (!frontier_touched_) break;  // no state was left unexpanded
    }
    return out;
  }

private:
  struct Counters {
    int ext_calls = 0;
    int non_fresh_steps = 0;
    int last_phase = 0;
    std::set<std::string> once_seen;
    std::map<std::string, int> exc_a, exc_b;
  };

  std::string state_key(const State& s, const Counters& c) const {
    std::string key = s.canonical_key();
    key += "#" + std::to_string(c.ext_calls) + "#" + std::to_string(c.last_phase);
    for (const auto& o : c.once_seen) key += "!" + o;
    for (const auto& [k, n] : c.exc_a) key += "a" + k + std::to_string(n);
    for (const auto& [k, n] : c.exc_b) key += "b" + k + std::to_string(n);
    return key;
  }

  bool timeout_hit() const { return std::chrono::steady_clock::now() > deadline_; }

  // Ground Pred_eq/Pred_neq checks; non-ground ones flow to the solver.
  static bool pred_actions_hold(const std::vector<Action>& actions) {
    for (const auto& a : actions) {
      if (a.kind != Action::Kind::PredEq && a.kind != Action::Kind::PredNeq) continue;
      const TermPtr& l = a.args[0];
      const TermPtr& r = a.args[1];
      bool both_ground_syms =
          l->kind == TermKind::Const && r->kind == TermKind::Const;
      if (both_ground_syms) {
        bool equal = term_equal(l, r);
        if (a.kind == Action::Kind::PredEq && !equal) return false;
        if (a.kind == Action::Kind::PredNeq && equal) return false;
      } else if (l->sort != Sort::Num || r->sort != Sort::Num) {
        // tag/function predicates must be decidable in place
        bool equal = term_equal(l, r);
        if (a.kind == Action::Kind::PredEq && !equal) return false;
        if (a.kind == Action::Kind::PredNeq && equal) return false;
      }
    }
    return true;
  }

  std::optional<Execution> dfs(const State& state, const Execution& exec, const Counters& counters,
                               int remaining, bool& timed_out) {
    if (timeout_hit()) {
      timed_out = true;
      return std::nullopt;
    }
    if (remaining == 0) {
      frontier_touched_ = true;
      return std::nullopt;
    }
    // Transposition memo: skip subtrees already exhausted with at least this
    // much remaining budget (kept across deepening passes and refinements).
    // Entries remember whether the exhausted subtree still had unexpanded
    // frontier, so deepening knows to keep going.
    std::string memo_key = state_key(state, counters);
    auto memo_it = memo_.find(memo_key);
    if (memo_it != memo_.end() && memo_it->second.first >= remaining) {
      if (memo_it->second.second) frontier_touched_ = true;
      return std::nullopt;
    }
    bool saved_frontier = frontier_touched_;
    frontier_touched_ = false;
    std::size_t batch_at_entry = batch_.size();
    auto apps = enumerate_applicable(state, model_.rules, counters.non_fresh_steps);
    for (const auto& app : apps) {
      int phase = rule_phase(*app.rule);
      if (model_.equivalence && phase < counters.last_phase) continue;
      if (app.rule->kind.rfind("ext_call", 0) == 0 && counters.ext_calls >= cfg_.tx_bound)
        continue;
      // call-depth cap on internal calls
      bool too_deep = false;
      for (const auto& c : app.rule->conclusions) {
        if (c.sym != FactSym::CallIn) continue;
        TermPtr depth = apply_subst(c.args.at(3), app.subst);
        if (depth->kind == TermKind::Const && depth->value &&
            *depth->value > U256(static_cast<std::uint64_t>(cfg_.call_depth_cap)))
          too_deep = true;
      }
      if (too_deep) continue;

      std::vector<Action> actions;
      for (const auto& a : app.rule->actions) actions.push_back(apply_subst(a, app.subst));
      if (!pred_actions_hold(actions)) continue;

      Counters next_counters = counters;
      next_counters.last_phase = phase;
      next_counters.non_fresh_steps++;
      if (app.rule->kind.rfind("ext_call", 0) == 0) next_counters.ext_calls++;
      bool once_violated = false;
      bool has_end = false;
      for (const auto& a : actions) {
        if (a.kind != Action::Kind::Label) continue;
        if (a.label == "End") has_end = true;
        for (const auto& r : model_.restrictions) {
          if (r.kind == Restriction::Kind::OnceLabel && r.label == a.label) {
            if (!next_counters.once_seen.insert(label_instance_key(a)).second)
              once_violated = true;
          }
        }
        if (a.label == "Exc_A" || a.label == "Exc_B") {
          std::string args;
          for (const auto& t : a.args) args += print_term(t) + "|";
          (a.label == "Exc_A" ? next_counters.exc_a : next_counters.exc_b)[args]++;
        }
      }
      if (once_violated) continue;

      Execution next_exec = exec;
      State next_state = state;
      if (!apply_step(next_exec, next_state, app)) continue;

      if (has_end) {
        // exact-length yield keeps iterative deepening shortest-first
        if (next_counters.non_fresh_steps != yield_length_) continue;
        if (next_counters.exc_a != next_counters.exc_b) continue;  // paired transactions
        if (!quiescent(next_state)) continue;  // compare only between transactions
        if (!check_restrictions(next_exec, model_.restrictions)) continue;
        std::string sig = trace_signature(model_.base.partition, next_exec);
        if (blocked_->count(BlockingClause{sig})) continue;
        batch_.push_back(next_exec);
        if (static_cast<int>(batch_.size()) >= batch_cap_) return next_exec;  // cap the cohort
        continue;
      }

      auto found = dfs(next_state, next_exec, next_counters, remaining - 1, timed_out);
      if (timed_out) return std::nullopt;
      if (found) return found;
      if (static_cast<int>(batch_.size()) >= batch_cap_) return std::nullopt;
    }
    bool subtree_touched = frontier_touched_;
    frontier_touched_ = saved_frontier || subtree_touched;
    // yields below this node are filtered by the caller's blocked set, so an
    // exhaustion entry must not mask them on a later visit
    bool yielded_below = batch_.size() > batch_at_entry;
    memo_it = memo_.find(memo_key);
    if (!yielded_below && (memo_it == memo_.end() || memo_it->second.first < remaining))
      memo_[memo_key] = {remaining, subtree_touched};
    return std::nullopt;
  }

  // A comparison point must not observe a transaction in flight, and yields
  // with unconsumed call messages are redundant variants of shorter traces.
  static bool quiescent(const State& s) {
    for (const auto& f : s.facts) {
      switch (f.sym) {
        case FactSym::Gvar:
        case FactSym::Evar:
        case FactSym::Bvar:
          break;
        default:
          return false;
      }
    }
    return true;
  }

  const ComplementaryModel& model_;
  const SearchConfig& cfg_;
  const std::set<BlockingClause>* blocked_ = nullptr;
  std::chrono::steady_clock::time_point deadline_;
  std::map<std::string, std::pair<int, bool>> memo_;  // key -> (budget, frontier left)
  std::vector<Execution> batch_;
  int batch_cap_ = 1;
  bool frontier_touched_ = false;
  int yield_length_ = 0;
};

}  // namespace detail

struct SearchHit {
  Execution exec;
  std::string signature;
};

// First restriction-respecting, non-blocked trace reaching End(), or nothing
// if the bounded space is exhausted. `clean` reports exhaustion vs timeout.
// A fresh engine per call; the refinement loop keeps one engine alive.
inline std::optional<SearchHit> search_end(const ComplementaryModel& model,
                                           const SearchConfig& cfg,
                                           const std::set<BlockingClause>& blocked,
                                           std::chrono::steady_clock::time_point deadline,
                                           bool& clean) {
  detail::TraceSearch search(model, cfg);
  auto outcome = search.run(blocked, deadline);
  clean = outcome.exhausted_cleanly;
  if (outcome.found.empty()) return std::nullopt;
  SearchHit hit;
  hit.signature = trace_signature(model.base.partition, outcome.found.front());
  hit.exec = std::move(outcome.found.front());
  return hit;
}

// Batch variant used by the verification loop: all distinct yields at the
// shortest productive trace length.
inline std::vector<SearchHit> search_end_batch(detail::TraceSearch& engine,
                                               const ComplementaryModel& model,
                                               const std::set<BlockingClause>& blocked,
                                               std::chrono::steady_clock::time_point deadline,
                                               bool& clean) {
  auto outcome = engine.run(blocked, deadline);
  clean = outcome.exhausted_cleanly;
  std::vector<SearchHit> hits;
  for (auto& exec : outcome.found) {
    SearchHit hit;
    hit.signature = trace_signature(model.base.partition, exec);
    hit.exec = std::move(exec);
    hits.push_back(std::move(hit));
  }
  return hits;
}

// ---------------------------------------------------------------------------
// Constraint collection from a trace: θ facts, address case splits, slot
// consistency, timestamps.
// ---------------------------------------------------------------------------

inline ConstraintSet collect_constraints(const ComplementaryModel& model, const Execution& exec,
                                         const SearchConfig& cfg) {
  ConstraintSet cs;
  cs.value_max = cfg.value_max;

  for (const auto& step : exec.steps) {
    for (const auto& a : step.actions) {
      switch (a.kind) {
        case Action::Kind::NumFact:
          cs.path.push_back(a.constraint);
          break;
        case Action::Kind::NumAlt:
          cs.disjunctions.push_back(a.alts);
          break;
        case Action::Kind::PredEq:
        case Action::Kind::PredNeq: {
          const TermPtr& l = a.args[0];
          const TermPtr& r = a.args[1];
          bool ground = l->kind == TermKind::Const && l->value && r->kind == TermKind::Const &&
                        r->value;
          if (!ground && (l->sort == Sort::Num || l->sort == Sort::Addr))
            cs.path.push_back(
                NumConstraint{a.kind == Action::Kind::PredEq ? Rel::Eq : Rel::Neq, l, r});
          break;
        }
        default:
          break;
      }
    }
  }

  // Address-aliasing case split: every runtime instance of a key agrees with
  // its class; distinct classes name distinct accounts.
  const Partition& partition = model.base.partition;
  std::map<std::string, std::vector<TermPtr>> class_instances;  // rep -> instance terms
  auto add_instance = [&](const std::string& rep, const TermPtr& t) {
    auto& v = class_instances[rep];
    for (const auto& existing : v)
      if (term_equal(existing, t)) return;
    v.push_back(t);
  };
  for (const auto& cls : partition.classes) {
    const std::string rep = partition.rep(cls.front());
    for (const auto& key : cls)
      if (model.base.universe.constants.count(key)) {
        if (key == adversary_key()) add_instance(rep, model.base.adversary);
        else if (const auto* info = model.base.info_for(key)) add_instance(rep, info->address);
      }
  }
  for (const auto& step : exec.steps) {
    if (!step.rule) continue;
    for (const auto& acc : step.rule->slot_accesses)
      add_instance(partition.rep(acc.key), apply_subst(acc.index, step.subst));
    if (step.rule_kind.rfind("recv", 0) == 0 && step.subst.count("c_b")) {
      // the caller binding instantiates every key this function's parameters
      // and msg.sender stand for
      std::string contract_fn = step.rule_tag;
      auto dot = contract_fn.find('.');
      const ContractAst* ast =
          dot == std::string::npos ? nullptr : model.base.ast_for(contract_fn.substr(0, dot));
      const FunctionDef* fn = ast ? ast->find_function(contract_fn.substr(dot + 1)) : nullptr;
      for (const auto& cls : partition.classes) {
        for (const auto& key : cls) {
          if (key == "msg.sender")
            add_instance(partition.rep(key), step.subst.at("c_b"));
          else if (fn && fn->has_param(key) && step.subst.count(key))
            add_instance(partition.rep(key), step.subst.at(key));
        }
      }
    }
  }
  std::vector<std::pair<std::string, TermPtr>> class_reps;  // one witness instance per class
  for (const auto& cls : partition.classes) {
    const std::string rep = partition.rep(cls.front());
    auto it = class_instances.find(rep);
    if (it == class_instances.end() || it->second.empty()) continue;
    const auto& insts = it->second;
    for (std::size_t i = 1; i < insts.size(); ++i)
      cs.path.push_back(NumConstraint{Rel::Eq, insts[0], insts[i]});
    class_reps.emplace_back(rep, insts[0]);
  }
  for (std::size_t i = 0; i < class_reps.size(); ++i)
    for (std::size_t j = i + 1; j < class_reps.size(); ++j)
      cs.path.push_back(NumConstraint{Rel::Neq, class_reps[i].second, class_reps[j].second});

  if (model.uses_timestamp && model.equivalence)
    for (const auto& c : index_timestamps(exec).constraints) cs.timestamps.push_back(c);

  // free symbolic constants (the invariant's right-hand side) may denote
  // sums beyond one cell's range
  auto scan_wide = [&](const NumConstraint& c) {
    std::vector<TermPtr> atoms;
    collect_atoms(c.lhs, atoms);
    collect_atoms(c.rhs, atoms);
    for (const auto& t : atoms)
      if (t->kind == TermKind::Const && !t->value && t->sort == Sort::Num)
        cs.wide_vars.insert(t->name);
  };
  for (const auto& c : cs.path) scan_wide(c);
  for (const auto& d : cs.disjunctions)
    for (const auto& c : d) scan_wide(c);
  return cs;
}

}  // namespace finverif
