#pragma once

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "finverif/solver.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Deterministic SMT-LIB2 emission (QF_NIA, explicit mod-2^256 terms) and a
// get-model parser for the standard output shape.
// ---------------------------------------------------------------------------

struct SmtEncoding {
  std::string text;
  std::map<std::string, std::string> names;  // smt name -> original symbol
};

namespace detail {

inline std::string smt_modulus() {
  static const std::string m = pow2_256().to_string();
  return m;
}

inline void collect_symbols(const TermPtr& t, std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Const:
      if (!t->value) out.insert(t->name);
      return;
    case TermKind::Var:
    case TermKind::Fresh:
      out.insert(t->name);
      return;
    case TermKind::Op:
      collect_symbols(t->lhs, out);
      collect_symbols(t->rhs, out);
      return;
  }
}

inline std::string sanitize_symbol(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
    else out.push_back('_');
  }
  return out;
}

inline std::string smt_term(const TermPtr& t, const std::map<std::string, std::string>& rename) {
  switch (t->kind) {
    case TermKind::Const:
      if (t->value) return t->value->to_string();
      return rename.at(t->name);
    case TermKind::Var:
    case TermKind::Fresh:
      return rename.at(t->name);
    case TermKind::Op: {
      std::string l = smt_term(t->lhs, rename);
      std::string r = smt_term(t->rhs, rename);
      const std::string m = smt_modulus();
      if (!t->wrapped) {
        switch (t->op) {
          case BinOp::Add: return "(+ " + l + " " + r + ")";
          case BinOp::Sub: return "(- " + l + " " + r + ")";
          case BinOp::Mul: return "(* " + l + " " + r + ")";
          default: break;
        }
      }
      switch (t->op) {
        case BinOp::Add: return "(mod (+ " + l + " " + r + ") " + m + ")";
        case BinOp::Sub: return "(mod (- " + l + " " + r + ") " + m + ")";
        case BinOp::Mul: return "(mod (* " + l + " " + r + ") " + m + ")";
        case BinOp::Div: return "(ite (= " + r + " 0) 0 (div " + l + " " + r + "))";
        case BinOp::Mod: return "(ite (= " + r + " 0) 0 (mod " + l + " " + r + "))";
        case BinOp::Pow: return "(pow_unsupported " + l + " " + r + ")";
      }
      return "0";
    }
  }
  return "0";
}

}  // namespace detail

inline SmtEncoding emit_smtlib(const std::vector<NumConstraint>& constraints,
                               std::optional<U256> value_max,
                               const std::set<std::string>& address_vars) {
  std::set<std::string> symbols;
  for (const auto& c : constraints) {
    detail::collect_symbols(c.lhs, symbols);
    detail::collect_symbols(c.rhs, symbols);
  }
  std::map<std::string, std::string> rename;  // original -> smt
  SmtEncoding enc;
  int idx = 0;
  for (const auto& s : symbols) {  // std::set: sorted, deterministic
    std::string smt = "v" + std::to_string(idx++) + "_" + detail::sanitize_symbol(s);
    rename[s] = smt;
    enc.names[smt] = s;
  }

  std::string& out = enc.text;
  out += "(set-logic QF_NIA)\n";
  const std::string m = detail::smt_modulus();
  for (const auto& s : symbols) {
    const std::string& v = rename[s];
    out += "(declare-fun " + v + " () Int)\n";
    out += "(assert (>= " + v + " 0))\n";
    if (!address_vars.count(s) && value_max)
      out += "(assert (<= " + v + " " + value_max->to_string() + "))\n";
    else
      out += "(assert (< " + v + " " + m + "))\n";
  }
  for (const auto& c : constraints) {
    std::string l = detail::smt_term(c.lhs, rename);
    std::string r = detail::smt_term(c.rhs, rename);
    switch (c.rel) {
      case Rel::Eq: out += "(assert (= " + l + " " + r + "))\n"; break;
      case Rel::Neq: out += "(assert (not (= " + l + " " + r + ")))\n"; break;
      case Rel::Less: out += "(assert (< " + l + " " + r + "))\n"; break;
      case Rel::Leq: out += "(assert (<= " + l + " " + r + "))\n"; break;
    }
  }
  out += "(check-sat)\n(get-model)\n";
  return enc;
}

// Parse `sat`/`unsat` plus the standard (define-fun name () Int value) model
// shape, including negative literals written as (- N).
inline SolveResult parse_smt_output(const std::string& output, const SmtEncoding& enc) {
  if (output.find("unsat") != std::string::npos) return Unsat{};
  if (output.find("sat") == std::string::npos) return SolverUnknown{"solver produced no verdict"};
  Assignment witness;
  std::size_t pos = 0;
  while ((pos = output.find("define-fun", pos)) != std::string::npos) {
    pos += 10;
    while (pos < output.size() && std::isspace(static_cast<unsigned char>(output[pos]))) ++pos;
    std::size_t name_end = pos;
    while (name_end < output.size() &&
           !std::isspace(static_cast<unsigned char>(output[name_end])) &&
           output[name_end] != '(')
      ++name_end;
    std::string name = output.substr(pos, name_end - pos);
    std::size_t int_pos = output.find("Int", name_end);
    if (int_pos == std::string::npos) break;
    std::size_t vpos = int_pos + 3;
    while (vpos < output.size() &&
           (std::isspace(static_cast<unsigned char>(output[vpos])) || output[vpos] == '('))
      ++vpos;
    bool negative = false;
    if (vpos < output.size() && output[vpos] == '-') {
      negative = true;
      ++vpos;
      while (vpos < output.size() && std::isspace(static_cast<unsigned char>(output[vpos]))) ++vpos;
    }
    std::string digits;
    while (vpos < output.size() && std::isdigit(static_cast<unsigned char>(output[vpos])))
      digits.push_back(output[vpos++]);
    auto it = enc.names.find(name);
    if (it != enc.names.end() && !digits.empty() && !negative) {
      auto value = BigInt::parse(digits);
      if (value) witness[it->second] = *value;
    }
    pos = vpos;
  }
  return Sat{witness};
}

// Run an external SMT-LIB2 process on the encoded problem.
inline SolveResult solve_with_process(const std::string& solver_path,
                                      const std::vector<NumConstraint>& constraints,
                                      std::optional<U256> value_max,
                                      const std::set<std::string>& address_vars) {
  SmtEncoding enc = emit_smtlib(constraints, value_max, address_vars);
  std::string problem_file = "/tmp/finverif_smt_" + std::to_string(::getpid()) + ".smt2";
  {
    std::FILE* f = std::fopen(problem_file.c_str(), "w");
    if (!f) return SolverUnknown{"cannot write solver input"};
    std::fwrite(enc.text.data(), 1, enc.text.size(), f);
    std::fclose(f);
  }
  std::string cmd = solver_path + " " + problem_file + " 2>/dev/null";
  std::FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return SolverUnknown{"cannot launch solver process"};
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  int rc = ::pclose(pipe);
  std::remove(problem_file.c_str());
  if (rc != 0 && output.find("sat") == std::string::npos)
    return SolverUnknown{"solver process failed"};
  auto result = parse_smt_output(output, enc);
  // external models are re-validated the same way built-in samples are
  if (std::holds_alternative<Sat>(result)) {
    const Assignment& w = std::get<Sat>(result).witness;
    for (const auto& c : constraints) {
      auto ok = eval_constraint(c, w);
      if (!ok.has_value() || !*ok) return SolverUnknown{"external model failed re-evaluation"};
    }
  }
  return result;
}

}  // namespace finverif
