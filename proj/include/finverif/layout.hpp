#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "finverif/ast.hpp"
#include "finverif/term.hpp"

namespace finverif {

// Per-name metadata tuple <name, type, range, ether> controlling parameter
// order in generated facts.
enum class TupleTy { Tv, Tc };
enum class TupleRange { Rg, Rl, Ro };
enum class TupleEther { Ey, En };

struct VarTuple {
  TermPtr name;
  TupleTy ty = TupleTy::Tv;
  TupleRange range = TupleRange::Rl;
  TupleEther ether = TupleEther::En;
};

inline VarTuple tuple_const(TermPtr t) { return VarTuple{std::move(t), TupleTy::Tc, TupleRange::Ro, TupleEther::En}; }
inline VarTuple tuple_local(TermPtr t) { return VarTuple{std::move(t), TupleTy::Tv, TupleRange::Rl, TupleEther::En}; }
inline VarTuple tuple_global(TermPtr t) { return VarTuple{std::move(t), TupleTy::Tv, TupleRange::Rg, TupleEther::En}; }
inline VarTuple tuple_ether(TermPtr t) { return VarTuple{std::move(t), TupleTy::Tv, TupleRange::Rg, TupleEther::Ey}; }

// Ordered tuple sequence with the projections used by the translation.
struct TupleSeq {
  std::vector<VarTuple> tuples;

  // 1-based name access.
  TermPtr at(int j) const { return tuples.at(static_cast<std::size_t>(j - 1)).name; }

  std::vector<TermPtr> sigma() const {
    std::vector<TermPtr> out;
    out.reserve(tuples.size());
    for (const auto& t : tuples) out.push_back(t.name);
    return out;
  }
  std::vector<TermPtr> globals() const {  // g(ω)
    std::vector<TermPtr> out;
    for (const auto& t : tuples)
      if (t.range == TupleRange::Rg) out.push_back(t.name);
    return out;
  }
  std::vector<TermPtr> ether() const {  // e(ω)
    std::vector<TermPtr> out;
    for (const auto& t : tuples)
      if (t.ether == TupleEther::Ey) out.push_back(t.name);
    return out;
  }
  std::vector<TermPtr> globals_minus_ether() const {  // g(ω)\e(ω)
    std::vector<TermPtr> out;
    for (const auto& t : tuples)
      if (t.range == TupleRange::Rg && t.ether == TupleEther::En) out.push_back(t.name);
    return out;
  }
  std::vector<TermPtr> locals() const {  // l(ω)
    std::vector<TermPtr> out;
    for (const auto& t : tuples)
      if (t.range == TupleRange::Rl) out.push_back(t.name);
    return out;
  }
  std::vector<TermPtr> sigma_minus_globals() const {  // σ(ω)\g(ω)
    std::vector<TermPtr> out;
    for (const auto& t : tuples)
      if (t.range != TupleRange::Rg) out.push_back(t.name);
    return out;
  }

  TupleSeq concat(const TupleSeq& other) const {
    TupleSeq out = *this;
    out.tuples.insert(out.tuples.end(), other.tuples.begin(), other.tuples.end());
    return out;
  }
  TupleSeq append(VarTuple t) const {
    TupleSeq out = *this;
    out.tuples.push_back(std::move(t));
    return out;
  }

  bool well_formed() const {
    for (const auto& t : tuples) {
      if (t.ty == TupleTy::Tc && t.name->kind != TermKind::Const) return false;
      if (t.ether == TupleEther::Ey && t.range != TupleRange::Rg) return false;
    }
    return true;
  }
};

// Replace the slot named `var` in a term sequence with `value`.
inline std::vector<TermPtr> replace_slot(std::vector<TermPtr> seq, const std::string& var,
                                         const TermPtr& value) {
  for (auto& t : seq) {
    if (t->kind == TermKind::Var && t->name == var) t = value;
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Address aliasing partitions. The universe is the set of canonical address
// expressions that select storage slots (mapping indices, transfer
// recipients, contract addresses, the adversary). A partition fixes which of
// them denote the same account; slots are built per equivalence class.
// ---------------------------------------------------------------------------

struct Partition {
  std::vector<std::vector<std::string>> classes;  // each class lists member keys
  std::map<std::string, std::string> representative;

  const std::string& rep(const std::string& key) const {
    auto it = representative.find(key);
    return it == representative.end() ? key : it->second;
  }
  bool same_class(const std::string& a, const std::string& b) const {
    return rep(a) == rep(b);
  }
  std::string describe() const {
    std::string out;
    for (const auto& cls : classes) {
      out += "{";
      for (std::size_t i = 0; i < cls.size(); ++i) {
        if (i) out += ",";
        out += cls[i];
      }
      out += "}";
    }
    return out.empty() ? "{}" : out;
  }
};

// All set partitions of the universe, coarsest (fewest classes) first.
// Classes holding two distinct constants are dropped: named accounts are
// pairwise distinct. The representative prefers the constant member, else
// the earliest member in universe order.
inline std::vector<Partition> enumerate_partitions(const std::vector<std::string>& universe,
                                                   const std::set<std::string>& constants) {
  std::vector<std::vector<std::vector<std::string>>> raw;
  std::vector<std::vector<std::string>> current;
  auto recurse = [&](auto&& self, std::size_t i) -> void {
    if (i == universe.size()) {
      raw.push_back(current);
      return;
    }
    for (std::size_t k = 0; k < current.size(); ++k) {
      current[k].push_back(universe[i]);
      self(self, i + 1);
      current[k].pop_back();
    }
    current.push_back({universe[i]});
    self(self, i + 1);
    current.pop_back();
  };
  recurse(recurse, 0);

  std::stable_sort(raw.begin(), raw.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });

  std::vector<Partition> out;
  for (auto& classes : raw) {
    bool valid = true;
    Partition p;
    for (auto& cls : classes) {
      int const_count = 0;
      std::string rep;
      for (const auto& key : cls)
        if (constants.count(key)) {
          ++const_count;
          rep = key;
        }
      if (const_count > 1) { valid = false; break; }
      if (rep.empty()) rep = cls.front();
      for (const auto& key : cls) p.representative[key] = rep;
      p.classes.push_back(cls);
    }
    if (valid) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace finverif
