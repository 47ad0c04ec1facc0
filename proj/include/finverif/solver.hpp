#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "finverif/numeric.hpp"
#include "finverif/rules.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Witness assignments and concrete evaluation (EVM wrapping semantics).
// ---------------------------------------------------------------------------

// Witness values as exact integers; sums handed to the property layer can
// exceed 256 bits even though every storage cell stays within it.
using Assignment = std::map<std::string, BigInt>;

// Exact evaluation: wrapped nodes reduce mod 2^256, plain nodes compute in Z,
// so property sums over several cells keep their full magnitude.
inline std::optional<BigInt> eval_term_exact(const TermPtr& t, const Assignment& a) {
  switch (t->kind) {
    case TermKind::Const:
      if (t->value) return BigInt(*t->value);
      {
        auto it = a.find(t->name);
        if (it != a.end()) return it->second;
      }
      return std::nullopt;
    case TermKind::Fresh:
    case TermKind::Var: {
      auto it = a.find(t->name);
      if (it != a.end()) return it->second;
      return std::nullopt;
    }
    case TermKind::Op: {
      auto l = eval_term_exact(t->lhs, a);
      auto r = eval_term_exact(t->rhs, a);
      if (!l || !r) return std::nullopt;
      BigInt v;
      switch (t->op) {
        case BinOp::Add: v = *l + *r; break;
        case BinOp::Sub: v = *l - *r; break;
        case BinOp::Mul: v = *l * *r; break;
        case BinOp::Div:
          if (r->is_zero()) v = BigInt(0);
          else v = BigInt::fdiv(*l, *r);
          break;
        case BinOp::Mod:
          if (r->is_zero()) v = BigInt(0);
          else v = *l - BigInt::fdiv(*l, *r) * *r;
          break;
        case BinOp::Pow: {
          if (!r->fits_u256() || !l->fits_u256()) return std::nullopt;
          v = BigInt(l->as_u256().pow(r->as_u256()));
          break;
        }
      }
      if (t->wrapped) {
        BigInt m = pow2_256();
        v = v - BigInt::fdiv(v, m) * m;  // floor-mod: always in [0, m)
      }
      return v;
    }
  }
  return std::nullopt;
}

inline std::optional<bool> eval_constraint(const NumConstraint& c, const Assignment& a) {
  auto l = eval_term_exact(c.lhs, a);
  auto r = eval_term_exact(c.rhs, a);
  if (!l || !r) return std::nullopt;
  switch (c.rel) {
    case Rel::Eq: return *l == *r;
    case Rel::Neq: return !(*l == *r);
    case Rel::Less: return *l < *r;
    case Rel::Leq: return *l <= *r;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Everything collected from one candidate trace.
// ---------------------------------------------------------------------------

struct ConstraintSet {
  std::vector<NumConstraint> path;                       // θ facts and address case splits
  std::vector<std::vector<NumConstraint>> disjunctions;  // satisfy one alternative per group
  std::vector<NumConstraint> timestamps;
  std::optional<U256> value_max;  // domain restriction for small-domain comparisons
  std::set<std::string> address_vars;  // exempt from value_max (addresses)
  std::set<std::string> wide_vars;     // free constants that may exceed 2^256 (sum targets)

  std::size_t disjunction_combinations() const {
    std::size_t n = 1;
    for (const auto& d : disjunctions) n *= d.size();
    return n;
  }
  std::vector<NumConstraint> flattened(std::size_t combo) const {
    std::vector<NumConstraint> out = path;
    for (const auto& c : timestamps) out.push_back(c);
    for (const auto& d : disjunctions) {
      out.push_back(d.at(combo % d.size()));
      combo /= d.size();
    }
    return out;
  }
  std::vector<NumConstraint> all_constraints() const {
    // with every disjunction resolved to its first alternative; used for
    // symbol discovery only
    return flattened(0);
  }
};

struct Sat {
  Assignment witness;
};
struct Unsat {};
struct SolverUnknown {
  std::string reason;
};
using SolveResult = std::variant<Sat, Unsat, SolverUnknown>;

// ---------------------------------------------------------------------------
// Linear forms over exact rationals.
// ---------------------------------------------------------------------------

namespace lin {

struct LinForm {
  std::map<std::string, Rational> coeff;
  Rational constant;

  static LinForm of_const(Rational c) {
    LinForm f;
    f.constant = std::move(c);
    return f;
  }
  static LinForm of_var(const std::string& v) {
    LinForm f;
    f.coeff[v] = Rational(BigInt(1));
    return f;
  }
  LinForm& operator+=(const LinForm& o) {
    for (const auto& [v, c] : o.coeff) add_coeff(v, c);
    constant = constant + o.constant;
    return *this;
  }
  LinForm& operator-=(const LinForm& o) {
    for (const auto& [v, c] : o.coeff) add_coeff(v, Rational(BigInt(0)) - c);
    constant = constant - o.constant;
    return *this;
  }
  LinForm scaled(const Rational& k) const {
    LinForm f;
    for (const auto& [v, c] : coeff) {
      Rational s = c * k;
      if (!s.is_zero()) f.coeff[v] = s;
    }
    f.constant = constant * k;
    return f;
  }
  void add_coeff(const std::string& v, const Rational& c) {
    auto it = coeff.find(v);
    if (it == coeff.end()) {
      if (!c.is_zero()) coeff[v] = c;
      return;
    }
    it->second = it->second + c;
    if (it->second.is_zero()) coeff.erase(it);
  }
  bool is_const() const { return coeff.empty(); }
  Rational eval(const std::map<std::string, Rational>& a) const {
    Rational r = constant;
    for (const auto& [v, c] : coeff) r = r + c * a.at(v);
    return r;
  }
};

struct Interval {
  Rational lo, hi;
};

}  // namespace lin

// ---------------------------------------------------------------------------
// Decision procedure for the linear fragment with wrapping arithmetic.
// Non-linear constructs (variable products, variable divisors, pow) fall out
// of the fragment and yield Unknown. Every Sat answer is re-validated by
// concrete evaluation before being reported.
// ---------------------------------------------------------------------------

class LinearSolver {
public:
  LinearSolver(std::vector<NumConstraint> constraints, std::optional<U256> value_max,
               std::set<std::string> unbounded_vars = {}, std::set<std::string> wide_vars = {})
      : constraints_(std::move(constraints)),
        unbounded_(std::move(unbounded_vars)),
        wide_(std::move(wide_vars)) {
    bound_ = value_max ? BigInt(*value_max) : BigInt(U256::max_value());
    modulus_ = pow2_256();
  }

  SolveResult solve() {
    // Discovery pass: fixes the choice-slot layout (wrap quotients and
    // disequality directions) in deterministic traversal order.
    discovering_ = true;
    if (!lower_all(nullptr)) return SolverUnknown{fragment_error_};
    discovering_ = false;

    std::size_t total = 1;
    for (std::size_t r : slot_ranges_) {
      total *= r;
      if (total > 50000) return SolverUnknown{"too many wraparound branches"};
    }

    bool integer_gap = false;
    std::vector<std::size_t> combo(slot_ranges_.size(), 0);
    while (true) {
      auto attempt = try_combo(combo);
      if (std::holds_alternative<Sat>(attempt)) return attempt;
      if (std::holds_alternative<SolverUnknown>(attempt)) integer_gap = true;
      std::size_t i = 0;
      for (; i < slot_ranges_.size(); ++i) {
        if (++combo[i] < slot_ranges_[i]) break;
        combo[i] = 0;
      }
      if (i == slot_ranges_.size()) break;
    }
    if (integer_gap) return SolverUnknown{"feasible region contains no integral point"};
    return Unsat{};
  }

private:
  struct Ctx {
    const std::vector<std::size_t>* combo = nullptr;  // null during discovery
    std::vector<lin::LinForm> equalities;  // form == 0
    std::vector<lin::LinForm> ineqs;       // form <= 0
    // per-pass cache: one reification per distinct subterm
    std::map<std::string, std::pair<lin::LinForm, lin::Interval>> node_cache;
  };

  // Choice slots are owned by stable keys (subterm shape, or constraint
  // index for disequalities): the same wrapped node always reuses one
  // quotient slot, keeping the enumeration space small.
  std::size_t slot_for_key(Ctx& ctx, const std::string& key, std::size_t range) {
    auto it = node_slots_.find(key);
    if (it != node_slots_.end()) {
      if (discovering_) return 0;
      return ctx.combo->at(it->second);
    }
    if (!discovering_) return 0;  // unseen key outside discovery: defensive
    std::size_t slot = slot_ranges_.size();
    slot_ranges_.push_back(range);
    node_slots_[key] = slot;
    return 0;
  }

  lin::Interval var_interval(const std::string& v) const {
    auto it = aux_bounds_.find(v);
    if (it != aux_bounds_.end()) return it->second;
    if (wide_.count(v))
      return {Rational(BigInt(0)), Rational(modulus_ * BigInt(64))};
    if (unbounded_.count(v))
      return {Rational(BigInt(0)), Rational(modulus_ - BigInt(1))};
    return {Rational(BigInt(0)), Rational(bound_)};
  }

  lin::Interval form_interval(const lin::LinForm& f) const {
    Rational lo = f.constant, hi = f.constant;
    for (const auto& [v, c] : f.coeff) {
      lin::Interval iv = var_interval(v);
      if (c.sign() >= 0) {
        lo = lo + c * iv.lo;
        hi = hi + c * iv.hi;
      } else {
        lo = lo + c * iv.hi;
        hi = hi + c * iv.lo;
      }
    }
    return {lo, hi};
  }

  bool fragment_fail(const std::string& why) {
    fragment_error_ = why;
    return false;
  }

  // value = raw - k*M clamped into [0, M); k is a choice slot when the raw
  // interval spans a modulus boundary.
  bool wrap_value(Ctx& ctx, const std::string& node_key, const lin::LinForm& raw,
                  const lin::Interval& raw_iv, lin::LinForm& out, lin::Interval& out_iv) {
    Rational m(modulus_);
    BigInt k_lo = (raw_iv.lo / m).floor();
    BigInt k_hi = (raw_iv.hi / m).floor();
    if (k_lo == k_hi && k_lo.is_zero()) {
      out = raw;
      out_iv = raw_iv;
      return true;
    }
    BigInt options = k_hi - k_lo + BigInt(1);
    if (BigInt(9) < options) return fragment_fail("wraparound quotient range too large");
    std::size_t pick =
        slot_for_key(ctx, node_key, static_cast<std::size_t>(options.as_u256().as_u64()));
    BigInt k = k_lo + BigInt(static_cast<long long>(pick));
    out = raw;
    out -= lin::LinForm::of_const(Rational(k) * m);
    // 0 <= value <= M-1
    ctx.ineqs.push_back(out.scaled(Rational(BigInt(-1))));
    lin::LinForm upper = out;
    upper -= lin::LinForm::of_const(m - Rational(BigInt(1)));
    ctx.ineqs.push_back(upper);
    out_iv = {Rational(BigInt(0)), m - Rational(BigInt(1))};
    return true;
  }

  bool lower_term(Ctx& ctx, const TermPtr& t, lin::LinForm& out, lin::Interval& out_iv) {
    switch (t->kind) {
      case TermKind::Const:
        if (t->value) {
          out = lin::LinForm::of_const(Rational(BigInt(*t->value)));
          out_iv = {out.constant, out.constant};
          return true;
        }
        out = lin::LinForm::of_var(t->name);
        out_iv = var_interval(t->name);
        return true;
      case TermKind::Var:
      case TermKind::Fresh:
        out = lin::LinForm::of_var(t->name);
        out_iv = var_interval(t->name);
        return true;
      case TermKind::Op: {
        std::string node_key = print_term(t);
        auto cached = ctx.node_cache.find(node_key);
        if (cached != ctx.node_cache.end()) {
          out = cached->second.first;
          out_iv = cached->second.second;
          return true;
        }
        lin::LinForm l, r;
        lin::Interval liv, riv;
        if (!lower_term(ctx, t->lhs, l, liv)) return false;
        if (!lower_term(ctx, t->rhs, r, riv)) return false;
        bool ok = lower_op(ctx, t, node_key, l, liv, r, riv, out, out_iv);
        if (ok) ctx.node_cache[node_key] = {out, out_iv};
        return ok;
      }
    }
    return false;
  }

  bool lower_op(Ctx& ctx, const TermPtr& t, const std::string& node_key, lin::LinForm& l,
                lin::Interval& liv, lin::LinForm& r, lin::Interval& riv, lin::LinForm& out,
                lin::Interval& out_iv) {
    {
      {
        switch (t->op) {
          case BinOp::Add: {
            lin::LinForm raw = l;
            raw += r;
            lin::Interval raw_iv{liv.lo + riv.lo, liv.hi + riv.hi};
            if (!t->wrapped) {
              out = raw;
              out_iv = raw_iv;
              return true;
            }
            return wrap_value(ctx, node_key, raw, raw_iv, out, out_iv);
          }
          case BinOp::Sub: {
            lin::LinForm raw = l;
            raw -= r;
            lin::Interval raw_iv{liv.lo - riv.hi, liv.hi - riv.lo};
            if (!t->wrapped) {
              out = raw;
              out_iv = raw_iv;
              return true;
            }
            return wrap_value(ctx, node_key, raw, raw_iv, out, out_iv);
          }
          case BinOp::Mul: {
            if (!l.is_const() && !r.is_const())
              return fragment_fail("product of two variable quantities");
            const lin::LinForm& k = l.is_const() ? l : r;
            const lin::LinForm& x = l.is_const() ? r : l;
            const lin::Interval& xiv = l.is_const() ? riv : liv;
            lin::LinForm raw = x.scaled(k.constant);
            lin::Interval raw_iv = k.constant.sign() >= 0
                                       ? lin::Interval{xiv.lo * k.constant, xiv.hi * k.constant}
                                       : lin::Interval{xiv.hi * k.constant, xiv.lo * k.constant};
            if (!t->wrapped) {
              out = raw;
              out_iv = raw_iv;
              return true;
            }
            return wrap_value(ctx, node_key, raw, raw_iv, out, out_iv);
          }
          case BinOp::Mod: {
            if (!r.is_const() || r.constant.sign() <= 0 || !r.constant.is_integer())
              return fragment_fail("mod by a non-constant");
            std::string q = aux_for_node(node_key, liv, r.constant);
            out = l;
            out -= lin::LinForm::of_var(q).scaled(r.constant);
            ctx.ineqs.push_back(out.scaled(Rational(BigInt(-1))));  // value >= 0
            lin::LinForm upper = out;
            upper -= lin::LinForm::of_const(r.constant - Rational(BigInt(1)));
            ctx.ineqs.push_back(upper);  // value <= c-1
            out_iv = {Rational(BigInt(0)), r.constant - Rational(BigInt(1))};
            return true;
          }
          case BinOp::Div: {
            if (!r.is_const() || r.constant.sign() <= 0 || !r.constant.is_integer())
              return fragment_fail("division by a non-constant");
            std::string q = aux_for_node(node_key, liv, r.constant);
            lin::LinForm rem = l;
            rem -= lin::LinForm::of_var(q).scaled(r.constant);
            ctx.ineqs.push_back(rem.scaled(Rational(BigInt(-1))));  // rem >= 0
            lin::LinForm upper = rem;
            upper -= lin::LinForm::of_const(r.constant - Rational(BigInt(1)));
            ctx.ineqs.push_back(upper);  // rem <= c-1
            out = lin::LinForm::of_var(q);
            out_iv = var_interval(q);
            return true;
          }
          case BinOp::Pow:
            return fragment_fail("pow outside the linear fragment");
        }
        return false;
      }
    }
  }

  bool lower_all(const std::vector<std::size_t>* combo) {
    ctx_ = Ctx{};
    ctx_.combo = combo;
    std::size_t constraint_idx = 0;
    for (const auto& c : constraints_) {
      ++constraint_idx;
      lin::LinForm l, r;
      lin::Interval liv, riv;
      if (!lower_term(ctx_, c.lhs, l, liv)) return false;
      if (!lower_term(ctx_, c.rhs, r, riv)) return false;
      lin::LinForm diff = l;
      diff -= r;
      switch (c.rel) {
        case Rel::Eq:
          ctx_.equalities.push_back(diff);
          break;
        case Rel::Neq: {
          std::size_t dir = slot_for_key(ctx_, "!neq" + std::to_string(constraint_idx), 2);
          lin::LinForm f;
          if (dir == 0) {
            f = diff;  // lhs <= rhs - 1
          } else {
            f = r;
            f -= l;  // rhs <= lhs - 1
          }
          f += lin::LinForm::of_const(Rational(BigInt(1)));
          ctx_.ineqs.push_back(f);
          break;
        }
        case Rel::Leq:
          ctx_.ineqs.push_back(diff);
          break;
        case Rel::Less: {
          lin::LinForm f = diff;
          f += lin::LinForm::of_const(Rational(BigInt(1)));
          ctx_.ineqs.push_back(f);
          break;
        }
      }
    }
    return true;
  }

  std::string aux_for_node(const std::string& node_key, const lin::Interval& numerator,
                           const Rational& divisor) {
    auto it = node_aux_.find(node_key);
    if (it != node_aux_.end()) return it->second;
    std::string q = "!q" + std::to_string(aux_counter_++);
    Rational hi = numerator.hi / divisor;
    if (hi < Rational(BigInt(0))) hi = Rational(BigInt(0));
    aux_bounds_[q] = {Rational(BigInt(0)), hi};
    node_aux_[node_key] = q;
    return q;
  }

  // Cheap refutation: a few rounds of interval tightening over the rows.
  // Returns false when some row is provably infeasible.
  bool propagate_bounds(const std::vector<lin::LinForm>& eqs,
                        const std::vector<lin::LinForm>& ineqs,
                        std::map<std::string, lin::Interval>& box) {
    auto row_bounds = [&](const lin::LinForm& f, bool equality) {
      // f <= 0 (or f == 0): tighten every variable of f
      for (const auto& [v, c] : f.coeff) {
        // f = c*v + rest; v <= (-rest_min)/c if c>0 etc.
        Rational rest_lo = f.constant, rest_hi = f.constant;
        for (const auto& [u, d] : f.coeff) {
          if (u == v) continue;
          const lin::Interval& iv = box.at(u);
          if (d.sign() >= 0) {
            rest_lo = rest_lo + d * iv.lo;
            rest_hi = rest_hi + d * iv.hi;
          } else {
            rest_lo = rest_lo + d * iv.hi;
            rest_hi = rest_hi + d * iv.lo;
          }
        }
        lin::Interval& iv = box.at(v);
        if (c.sign() > 0) {
          Rational cap = (Rational(BigInt(0)) - rest_lo) / c;
          if (cap < iv.hi) iv.hi = cap;
          if (equality) {
            Rational floor_v = (Rational(BigInt(0)) - rest_hi) / c;
            if (iv.lo < floor_v) iv.lo = floor_v;
          }
        } else {
          Rational floor_v = (Rational(BigInt(0)) - rest_lo) / c;
          if (iv.lo < floor_v) iv.lo = floor_v;
          if (equality) {
            Rational cap = (Rational(BigInt(0)) - rest_hi) / c;
            if (cap < iv.hi) iv.hi = cap;
          }
        }
        if (iv.hi < iv.lo) return false;
      }
      return true;
    };
    for (int round = 0; round < 3; ++round) {
      for (const auto& f : eqs)
        if (!row_bounds(f, true)) return false;
      for (const auto& f : ineqs)
        if (!row_bounds(f, false)) return false;
    }
    return true;
  }

  SolveResult try_combo(const std::vector<std::size_t>& combo) {
    if (!lower_all(&combo)) return SolverUnknown{fragment_error_};

    // collect variables and add range bounds
    std::set<std::string> vars;
    auto note = [&](const lin::LinForm& f) {
      for (const auto& [v, c] : f.coeff) vars.insert(v);
    };
    for (const auto& e : ctx_.equalities) note(e);
    for (const auto& f : ctx_.ineqs) note(f);
    std::vector<lin::LinForm> ineqs = ctx_.ineqs;
    for (const auto& v : vars) {
      lin::Interval iv = var_interval(v);
      lin::LinForm lo = lin::LinForm::of_var(v).scaled(Rational(BigInt(-1)));
      lo += lin::LinForm::of_const(iv.lo);
      ineqs.push_back(lo);  // lo - v <= 0
      lin::LinForm hi = lin::LinForm::of_var(v);
      hi -= lin::LinForm::of_const(iv.hi);
      ineqs.push_back(hi);  // v - hi <= 0
    }

    {
      std::map<std::string, lin::Interval> box;
      for (const auto& v : vars) box.emplace(v, var_interval(v));
      if (!propagate_bounds(ctx_.equalities, ctx_.ineqs, box)) return Unsat{};
    }

    // Gaussian elimination on equalities
    std::vector<std::pair<std::string, lin::LinForm>> defs;
    std::vector<lin::LinForm> eqs = ctx_.equalities;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
      lin::LinForm e = eqs[i];
      for (const auto& [dv, dform] : defs) substitute(e, dv, dform);
      if (e.is_const()) {
        if (!e.constant.is_zero()) return Unsat{};
        continue;
      }
      auto [v, c] = *e.coeff.begin();
      lin::LinForm rhs = e.scaled(Rational(BigInt(-1)) / c);
      rhs.coeff.erase(v);
      defs.emplace_back(v, rhs);
      vars.erase(v);
    }
    for (auto& f : ineqs)
      for (const auto& [dv, dform] : defs) substitute(f, dv, dform);

    // drop duplicate rows to keep elimination small
    {
      std::set<std::string> seen_rows;
      std::vector<lin::LinForm> unique_rows;
      for (const auto& f : ineqs) {
        std::string key = f.constant.to_string();
        for (const auto& [v, c] : f.coeff) key += "|" + v + "*" + c.to_string();
        if (seen_rows.insert(key).second) unique_rows.push_back(f);
      }
      ineqs = std::move(unique_rows);
    }

    // Fourier–Motzkin elimination with a min-product variable order,
    // recording stages for back-substitution
    std::vector<std::pair<std::string, std::vector<lin::LinForm>>> stages;
    std::vector<lin::LinForm> current = std::move(ineqs);
    std::set<std::string> pending = vars;
    while (!pending.empty()) {
      // pick the variable whose elimination generates the fewest rows
      std::string best;
      long best_cost = -1;
      for (const auto& v : pending) {
        long lowers = 0, uppers = 0;
        for (const auto& f : current) {
          auto it = f.coeff.find(v);
          if (it == f.coeff.end()) continue;
          (it->second.sign() > 0 ? uppers : lowers)++;
        }
        long cost = lowers * uppers;
        if (best_cost < 0 || cost < best_cost) {
          best_cost = cost;
          best = v;
        }
      }
      const std::string v = best;
      pending.erase(v);
      std::vector<lin::LinForm> with_v, without;
      for (const auto& f : current)
        (f.coeff.count(v) ? with_v : without).push_back(f);
      stages.emplace_back(v, with_v);
      std::vector<lin::LinForm> lowers, uppers;  // lower: v >= expr ; upper: v <= expr
      for (const auto& f : with_v) {
        Rational c = f.coeff.at(v);
        lin::LinForm rest = f;
        rest.coeff.erase(v);
        if (c.sign() > 0) {
          uppers.push_back(rest.scaled(Rational(BigInt(-1)) / c));
        } else {
          lowers.push_back(rest.scaled(Rational(BigInt(-1)) / c));
        }
      }
      for (const auto& lo : lowers)
        for (const auto& up : uppers) {
          lin::LinForm combined = lo;  // lo <= v <= up  =>  lo - up <= 0
          combined -= up;
          if (combined.is_const()) {
            if (combined.constant.sign() > 0) return Unsat{};
          } else {
            without.push_back(combined);
          }
        }
      current = std::move(without);
    }
    for (const auto& f : current) {
      if (!f.is_const()) return SolverUnknown{"elimination left a non-constant"};
      if (f.constant.sign() > 0) return Unsat{};
    }

    // integral sample extraction, tightest-last
    std::map<std::string, Rational> sample;
    for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
      const auto& [v, forms] = *it;
      Rational lo(BigInt(0) - bound_), hi(bound_ * BigInt(2));
      bool has_lo = false, has_hi = false;
      for (const auto& f : forms) {
        Rational c = f.coeff.at(v);
        lin::LinForm rest = f;
        rest.coeff.erase(v);
        Rational bound_val = rest.eval(sample) * (Rational(BigInt(-1)) / c);
        if (c.sign() > 0) {
          if (!has_hi || bound_val < hi) { hi = bound_val; has_hi = true; }
        } else {
          if (!has_lo || lo < bound_val) { lo = bound_val; has_lo = true; }
        }
      }
      BigInt candidate;
      Rational zero(BigInt(0));
      Rational floor_hi(hi.floor());
      Rational ceil_lo(lo.ceil());
      if (!has_lo && !has_hi) candidate = BigInt(0);
      else if (!has_lo) candidate = (zero <= floor_hi) ? BigInt(0) : hi.floor();
      else if (!has_hi) candidate = (lo <= zero) ? BigInt(0) : lo.ceil();
      else {
        if (Rational(lo.ceil()) > hi) return SolverUnknown{"integer gap"};
        if (lo <= zero && zero <= hi) candidate = BigInt(0);
        else candidate = lo.ceil();
      }
      sample[v] = Rational(candidate);
    }
    // defs in reverse creation order
    for (auto it = defs.rbegin(); it != defs.rend(); ++it) {
      Rational value = it->second.eval(sample);
      if (!value.is_integer()) return SolverUnknown{"non-integral solution for " + it->first};
      sample[it->first] = value;
    }

    // convert and verify against the original constraints
    Assignment witness;
    for (const auto& [v, val] : sample) {
      if (v.rfind("!q", 0) == 0) continue;  // auxiliary quotients
      if (val.sign() < 0 || !val.is_integer()) return SolverUnknown{"sample out of domain"};
      witness[v] = val.num();
    }
    for (const auto& c : constraints_) {
      auto ok = eval_constraint(c, witness);
      if (!ok.has_value()) {
        // constraint mentions a symbol that no inequality touched: default 0
        fill_missing(c, witness);
        ok = eval_constraint(c, witness);
      }
      if (!ok.has_value() || !*ok) return SolverUnknown{"candidate failed re-evaluation"};
    }
    return Sat{witness};
  }

  void fill_missing(const NumConstraint& c, Assignment& w) {
    auto walk = [&](auto&& self, const TermPtr& t) -> void {
      if (t->kind == TermKind::Op) {
        self(self, t->lhs);
        self(self, t->rhs);
        return;
      }
      if (t->kind == TermKind::Const && t->value) return;
      if (!w.count(t->name)) w[t->name] = BigInt(0);
    };
    walk(walk, c.lhs);
    walk(walk, c.rhs);
  }

  static void substitute(lin::LinForm& f, const std::string& v, const lin::LinForm& def) {
    auto it = f.coeff.find(v);
    if (it == f.coeff.end()) return;
    Rational c = it->second;
    f.coeff.erase(it);
    f += def.scaled(c);
  }

  std::vector<NumConstraint> constraints_;
  std::set<std::string> unbounded_;
  std::set<std::string> wide_;
  std::map<std::string, lin::Interval> aux_bounds_;
  std::map<std::string, std::size_t> node_slots_;  // subterm -> quotient slot
  std::map<std::string, std::string> node_aux_;    // subterm -> div/mod aux var
  std::vector<std::size_t> slot_ranges_;
  Ctx ctx_;
  BigInt bound_;
  BigInt modulus_;
  bool discovering_ = false;
  std::string fragment_error_;
  int aux_counter_ = 0;
};

// Solve a flat constraint list with the built-in procedure. Constraints are
// first split into connected components over shared symbols; pure
// address-distinctness components separate from the arithmetic core, which
// keeps the branch enumeration small.
inline SolveResult solve_linear(const std::vector<NumConstraint>& cs,
                                std::optional<U256> value_max,
                                std::set<std::string> unbounded_vars = {},
                                std::set<std::string> wide_vars = {}) {
  // union-find over constraint indices via shared symbols
  std::map<std::string, std::size_t> owner;
  std::vector<std::size_t> parent(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };
  for (std::size_t i = 0; i < cs.size(); ++i) {
    std::vector<TermPtr> atoms;
    collect_atoms(cs[i].lhs, atoms);
    collect_atoms(cs[i].rhs, atoms);
    for (const auto& t : atoms) {
      if (t->kind == TermKind::Const && t->value) continue;
      auto [it, fresh] = owner.emplace(t->name, i);
      if (!fresh) unite(i, it->second);
    }
  }
  std::map<std::size_t, std::vector<NumConstraint>> components;
  for (std::size_t i = 0; i < cs.size(); ++i) components[find(i)].push_back(cs[i]);

  Assignment combined;
  for (auto& [root, group] : components) {
    LinearSolver solver(group, value_max, unbounded_vars, wide_vars);
    SolveResult r = solver.solve();
    if (std::holds_alternative<Unsat>(r)) return r;
    if (std::holds_alternative<SolverUnknown>(r)) return r;
    for (auto& [k, v] : std::get<Sat>(r).witness) combined[k] = v;
  }
  return Sat{std::move(combined)};
}

}  // namespace finverif
