#pragma once

#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "finverif/frontend.hpp"
#include "finverif/parser.hpp"
#include "finverif/properties.hpp"
#include "finverif/report.hpp"

namespace finverif {

struct RunOptions {
  SearchConfig search;
  int unroll_bound = 8;
  int threshold = 85;
  std::vector<std::string> key_var_overrides;
  std::vector<std::string> custom_invariants;
  std::string property_filter = "all";  // invariant | equivalence | all
  int jobs = 1;
  bool dump_rules = false;
  std::string dump_model;  // "", "invariant", "equivalence"
};

struct AnalysisInput {
  std::string file;
  std::string text;
};

inline Result<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return make_diag(DiagKind::SyntaxError, SourceLoc{}, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

// Contracts reachable from `root` through internal calls, contract-typed
// globals and constructor creations.
inline std::vector<ContractAst> model_closure(const ContractAst& root,
                                              const std::vector<ContractAst>& registry) {
  std::vector<ContractAst> out{root};
  std::set<std::string> seen{root.name};
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::vector<std::string> refs;
    std::vector<std::pair<std::string, std::string>> calls;
    for (const auto& f : out[i].functions) collect_internal_calls(f.body, calls);
    for (const auto& [cn, fn] : calls) refs.push_back(cn);
    for (const auto& g : out[i].globals)
      if (g.type.kind == SolTypeKind::ContractRef) refs.push_back(g.type.contract);
    for (const auto& cn : out[i].created_contracts) refs.push_back(cn);
    for (const auto& cn : refs) {
      if (seen.count(cn)) continue;
      for (const auto& c : registry)
        if (c.name == cn) {
          out.push_back(c);
          seen.insert(cn);
        }
    }
  }
  return out;
}

}  // namespace detail

struct ContractAnalysis {
  ContractReport report;
  bool frontend_error = false;
  std::string rules_dump;  // --dump-rules / --dump-model payloads
};

inline ContractAnalysis analyze_contract(const ContractAst& parsed,
                                         const std::vector<ContractAst>& registry,
                                         const RunOptions& opt) {
  ContractAnalysis out;
  out.report.file = parsed.source_file;
  out.report.name = parsed.name;

  std::set<std::string> known;
  for (const auto& c : registry) known.insert(c.name);
  for (const auto& d : check_support(parsed, known)) {
    out.report.diagnostics.push_back(d.render());
    out.frontend_error = true;
  }
  if (out.frontend_error) return out;

  // frontend passes over the whole model closure
  std::vector<ContractAst> closure = detail::model_closure(parsed, registry);
  std::vector<ContractAst> prepared;
  for (const auto& c : closure) {
    auto p = prepare_contract(c, opt.unroll_bound);
    if (!p) {
      out.report.diagnostics.push_back(p.error().render());
      out.frontend_error = true;
      return out;
    }
    prepared.push_back(std::move(p.value()));
  }

  KeyVariables kv = find_key_variables(parsed, opt.threshold, opt.key_var_overrides);
  std::set<ContractCategory> categories =
      classify(parsed, &registry, opt.threshold, opt.key_var_overrides);
  for (const auto& c : categories) out.report.categories.push_back(category_name(c));
  for (const auto& k : kv.balances_vars) out.report.key_variables.push_back(k);
  if (kv.total_supply) out.report.key_variables.push_back(*kv.total_supply);
  out.report.analyzed = true;

  std::vector<Property> properties;
  auto generated = generate_properties(parsed, kv, categories, &registry, opt.threshold);
  if (generated) properties = std::move(generated.value());
  for (const auto& text : opt.custom_invariants) {
    auto p = parse_custom_invariant(text, parsed);
    if (!p) {
      out.report.diagnostics.push_back(p.error().render());
      out.frontend_error = true;
      return out;
    }
    properties.push_back(std::move(p.value()));
  }
  auto filtered_out = [&](const Property& p) {
    if (opt.property_filter == "invariant") return p.kind != Property::Kind::Invariant;
    if (opt.property_filter == "equivalence") return p.kind != Property::Kind::Equivalence;
    return false;
  };

  if (opt.dump_rules || !opt.dump_model.empty()) {
    auto base = build_independent_model(prepared, Partition{}, false);
    if (base) {
      if (opt.dump_rules) out.rules_dump += dump_rules(base.value().rules);
      if (opt.dump_model == "invariant") {
        for (const auto& p : properties)
          if (p.kind == Property::Kind::Invariant) {
            out.rules_dump += dump_rules(build_invariant_model(base.value(), p).rules);
            break;
          }
      } else if (opt.dump_model == "equivalence") {
        auto eq_base = build_independent_model(prepared, Partition{}, true);
        for (const auto& p : properties)
          if (p.kind == Property::Kind::Equivalence && eq_base) {
            out.rules_dump += dump_rules(build_equivalence_model(eq_base.value(), p).rules);
            break;
          }
      }
    }
  }

  for (const auto& prop : properties) {
    if (filtered_out(prop)) continue;
    VerdictInfo verdict = verify(prepared, prop, opt.search);
    out.report.properties.push_back(make_property_report(prop, verdict));
  }
  return out;
}

struct RunResult {
  Report report;
  int exit_code = 0;
  std::string dumps;
};

// Parse, classify, generate properties, verify, and report; the exit code is
// 0 all valid, 1 any violated, 2 any unknown, 3 any frontend error.
inline RunResult run_analysis(const std::vector<AnalysisInput>& inputs, const RunOptions& opt) {
  RunResult result;
  std::vector<ContractAst> registry;
  bool parse_error = false;

  struct Pending {
    ContractAst ast;
  };
  std::vector<Pending> pending;
  for (const auto& input : inputs) {
    auto parsed = parse_source(input.text, input.file);
    if (!parsed) {
      ContractReport cr;
      cr.file = input.file;
      cr.name = "(parse error)";
      cr.diagnostics.push_back(parsed.error().render());
      result.report.contracts.push_back(std::move(cr));
      parse_error = true;
      continue;
    }
    for (auto& c : parsed.value()) {
      registry.push_back(c);
      pending.push_back(Pending{std::move(c)});
    }
  }

  std::vector<ContractAnalysis> analyses(pending.size());
  if (opt.jobs > 1) {
    std::vector<std::future<ContractAnalysis>> futures;
    futures.reserve(pending.size());
    for (const auto& p : pending)
      futures.push_back(std::async(std::launch::async, [&p, &registry, &opt] {
        return analyze_contract(p.ast, registry, opt);
      }));
    for (std::size_t i = 0; i < futures.size(); ++i) analyses[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < pending.size(); ++i)
      analyses[i] = analyze_contract(pending[i].ast, registry, opt);
  }

  bool any_violated = false, any_unknown = false, any_frontend = parse_error;
  for (auto& a : analyses) {
    any_frontend = any_frontend || a.frontend_error;
    for (const auto& p : a.report.properties) {
      if (p.verdict == "violated") any_violated = true;
      if (p.verdict == "unknown") any_unknown = true;
    }
    result.dumps += a.rules_dump;
    result.report.contracts.push_back(std::move(a.report));
  }
  if (any_frontend) result.exit_code = 3;
  else if (any_violated) result.exit_code = 1;
  else if (any_unknown) result.exit_code = 2;
  else result.exit_code = 0;
  return result;
}

}  // namespace finverif
