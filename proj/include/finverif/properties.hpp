#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "finverif/ast.hpp"
#include "finverif/diagnostics.hpp"
#include "finverif/model.hpp"
#include "finverif/parser.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Contract categories
// ---------------------------------------------------------------------------

enum class ContractCategory { EtherRelated, TokenContract, TokenManaging, IndirectRelated, Other };

inline const char* category_name(ContractCategory c) {
  switch (c) {
    case ContractCategory::EtherRelated: return "ether";
    case ContractCategory::TokenContract: return "token";
    case ContractCategory::TokenManaging: return "token-managing";
    case ContractCategory::IndirectRelated: return "indirect";
    case ContractCategory::Other: return "other";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Identifier similarity: normalized edit-distance ratio, also applied after
// camelCase/underscore token splitting with sorted tokens. Scores in [0,100].
// ---------------------------------------------------------------------------

namespace detail {

inline std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline int ratio(const std::string& a, const std::string& b) {
  if (a.empty() && b.empty()) return 100;
  int total = static_cast<int>(a.size() + b.size());
  if (total == 0) return 100;
  int d = levenshtein(a, b);
  return static_cast<int>(std::lround(100.0 * (total - d) / total));
}

inline std::string token_normal_form(const std::string& s) {
  std::vector<std::string> tokens;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '_') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c)) && !cur.empty() &&
        std::islower(static_cast<unsigned char>(cur.back()))) {
      tokens.push_back(cur);
      cur.clear();
    }
    cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (!cur.empty()) tokens.push_back(cur);
  std::sort(tokens.begin(), tokens.end());
  std::string out;
  for (const auto& t : tokens) out += t;
  return out;
}

}  // namespace detail

inline int name_similarity(const std::string& a, const std::string& b) {
  std::string la = detail::lowercase(a), lb = detail::lowercase(b);
  int simple = detail::ratio(la, lb);
  int tokenized = detail::ratio(detail::token_normal_form(a), detail::token_normal_form(b));
  return std::max(simple, tokenized);
}

// ---------------------------------------------------------------------------
// Key variables
// ---------------------------------------------------------------------------

struct KeyVariables {
  std::vector<std::string> balances_vars;
  std::optional<std::string> total_supply;
  std::vector<std::string> user_overrides;
};

inline KeyVariables find_key_variables(const ContractAst& ast, int threshold = 85,
                                       const std::vector<std::string>& overrides = {}) {
  KeyVariables kv;
  kv.user_overrides = overrides;
  if (!overrides.empty()) {
    for (const auto& name : overrides)
      if (ast.find_global(name)) kv.balances_vars.push_back(name);
  } else {
    for (const auto& g : ast.globals) {
      if (!g.type.is_address_to_uint_mapping()) continue;
      if (name_similarity(g.name, "balances") > threshold ||
          name_similarity(g.name, "ownedTokenCount") > threshold)
        kv.balances_vars.push_back(g.name);
    }
  }
  for (const auto& g : ast.globals) {
    if (g.type.kind != SolTypeKind::UInt) continue;
    if (name_similarity(g.name, "totalSupply") > threshold) {
      kv.total_supply = g.name;
      break;
    }
  }
  return kv;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

inline std::set<ContractCategory> classify(const ContractAst& ast,
                                           const std::vector<ContractAst>* registry = nullptr,
                                           int threshold = 85,
                                           const std::vector<std::string>& overrides = {}) {
  std::set<ContractCategory> out;
  if (contract_is_ether_related(ast)) out.insert(ContractCategory::EtherRelated);
  KeyVariables kv = find_key_variables(ast, threshold, overrides);
  if (!kv.balances_vars.empty()) out.insert(ContractCategory::TokenContract);
  if (registry) {
    for (const auto& created : ast.created_contracts) {
      for (const auto& other : *registry) {
        if (other.name != created) continue;
        KeyVariables okv = find_key_variables(other, threshold);
        if (!okv.balances_vars.empty()) out.insert(ContractCategory::TokenManaging);
      }
    }
    if (out.empty()) {
      // called by a finance-related contract => indirect
      for (const auto& other : *registry) {
        if (other.name == ast.name) continue;
        std::vector<std::pair<std::string, std::string>> cs;
        for (const auto& f : other.functions) detail::collect_internal_calls(f.body, cs);
        bool calls_us = false;
        for (const auto& [cn, fn] : cs)
          if (cn == ast.name) calls_us = true;
        if (!calls_us) continue;
        if (contract_is_ether_related(other) ||
            !find_key_variables(other, threshold).balances_vars.empty())
          out.insert(ContractCategory::IndirectRelated);
      }
    }
  }
  if (out.empty()) out.insert(ContractCategory::Other);
  return out;
}

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

struct InvariantProperty {
  std::string contract;                 // contract owning the mapping
  std::string mapping;                  // token-balance mapping name
  std::vector<std::string> index_keys;  // accounts whose balances a transaction may modify
  bool rhs_total_supply = false;
  std::string total_supply;
};

struct Property {
  enum class Kind { Invariant, Equivalence };
  Kind kind = Kind::Equivalence;
  InvariantProperty invariant;

  std::string label() const {
    if (kind == Kind::Equivalence) return "equivalence";
    return "token_inv(" + invariant.mapping + ")";
  }
};

namespace detail {

inline void collect_written_keys(const StmtSeq& body, const ContractAst& c,
                                 const std::string& mapping, std::vector<std::string>& out) {
  for (const auto& s : body) {
    if ((s->kind == StmtKind::Assign) && s->lhs && s->lhs->kind == ExprKind::Index &&
        s->lhs->name == mapping) {
      std::string key = address_key(s->lhs->rhs, c.name);
      if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
    }
    collect_written_keys(s->then_body, c, mapping, out);
    collect_written_keys(s->else_body, c, mapping, out);
  }
}

}  // namespace detail

// A_1: the set of accounts whose token balances a transaction may modify,
// read off syntactically as the written index expressions of the mapping.
inline std::vector<std::string> written_index_keys(const ContractAst& ast,
                                                   const std::string& mapping) {
  std::vector<std::string> out;
  for (const auto& f : ast.functions) detail::collect_written_keys(f.body, ast, mapping, out);
  return out;
}

inline Result<std::vector<Property>> generate_properties(
    const ContractAst& ast, const KeyVariables& kv, const std::set<ContractCategory>& categories,
    const std::vector<ContractAst>* registry = nullptr, int threshold = 85) {
  std::vector<Property> out;
  bool only_other = categories.size() == 1 && categories.count(ContractCategory::Other) == 1;
  if (only_other && kv.user_overrides.empty())
    return make_diag(DiagKind::NoPropertyApplicable, ast.loc,
                     "contract '" + ast.name + "' is not finance-related; no property applies");

  auto add_invariants_for = [&](const ContractAst& token, const KeyVariables& token_kv) {
    for (const auto& m : token_kv.balances_vars) {
      InvariantProperty p;
      p.contract = token.name;
      p.mapping = m;
      p.index_keys = written_index_keys(token, m);
      if (p.index_keys.empty()) continue;  // never written; nothing a transaction can break
      if (token_kv.total_supply) {
        p.rhs_total_supply = true;
        p.total_supply = *token_kv.total_supply;
      }
      Property prop;
      prop.kind = Property::Kind::Invariant;
      prop.invariant = std::move(p);
      out.push_back(std::move(prop));
    }
  };

  if (categories.count(ContractCategory::TokenContract)) add_invariants_for(ast, kv);
  if (categories.count(ContractCategory::TokenManaging) && registry) {
    for (const auto& created : ast.created_contracts) {
      for (const auto& other : *registry) {
        if (other.name != created) continue;
        KeyVariables okv = find_key_variables(other, threshold);
        if (!okv.balances_vars.empty()) add_invariants_for(other, okv);
      }
    }
  }
  if (categories.count(ContractCategory::EtherRelated) ||
      categories.count(ContractCategory::TokenContract) ||
      categories.count(ContractCategory::TokenManaging)) {
    Property prop;
    prop.kind = Property::Kind::Equivalence;
    out.push_back(std::move(prop));
  }
  if (out.empty())
    return make_diag(DiagKind::NoPropertyApplicable, ast.loc,
                     "no property applies to contract '" + ast.name + "'");
  return out;
}

// Custom invariant form: sum(var[idx1],var[idx2],...) == const|totalSupply
inline Result<Property> parse_custom_invariant(const std::string& text, const ContractAst& ast) {
  auto fail = [&](const std::string& m) {
    return make_diag(DiagKind::SyntaxError, SourceLoc{}, "custom invariant: " + m);
  };
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t') s.push_back(c);
  if (s.rfind("sum(", 0) != 0) return fail("expected sum(...)");
  std::size_t close = s.find(')');
  if (close == std::string::npos) return fail("missing ')'");
  std::string inner = s.substr(4, close - 4);
  std::string rest = s.substr(close + 1);
  if (rest.rfind("==", 0) != 0) return fail("expected '==' after sum(...)");
  std::string rhs = rest.substr(2);

  InvariantProperty p;
  p.contract = ast.name;
  std::size_t start = 0;
  while (start < inner.size()) {
    std::size_t comma = inner.find(',', start);
    std::string item = inner.substr(start, comma == std::string::npos ? std::string::npos
                                                                      : comma - start);
    std::size_t lb = item.find('[');
    if (lb == std::string::npos || item.back() != ']') return fail("expected var[idx]");
    std::string var = item.substr(0, lb);
    std::string idx = item.substr(lb + 1, item.size() - lb - 2);
    if (p.mapping.empty()) p.mapping = var;
    else if (p.mapping != var) return fail("all summands must use one mapping");
    auto parsed = parse_source("contract X { function f() public { uint q = m[" + idx +
                               "]; return; } }");
    if (!parsed) return fail("bad index expression '" + idx + "'");
    const ExprPtr& idx_expr = parsed.value().front().functions.front().body.front()->rhs->rhs;
    p.index_keys.push_back(address_key(idx_expr, ast.name));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (p.mapping.empty() || p.index_keys.empty()) return fail("empty sum");
  if (!ast.find_global(p.mapping)) return fail("unknown mapping '" + p.mapping + "'");
  if (rhs == "const") {
    p.rhs_total_supply = false;
  } else {
    if (!ast.find_global(rhs)) return fail("unknown variable '" + rhs + "'");
    p.rhs_total_supply = true;
    p.total_supply = rhs;
  }
  Property prop;
  prop.kind = Property::Kind::Invariant;
  prop.invariant = std::move(p);
  return prop;
}

}  // namespace finverif
