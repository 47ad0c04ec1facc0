// finverif: batch analyzer for financial security of Solidity contracts.
//
// Pipeline: parse -> classify -> generate properties -> build rewriting
// models -> bounded verification with numeric constraint solving -> report.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finverif/corpus.hpp"
#include "finverif/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"finverif: financial-security analyzer for Solidity contracts"};

  std::vector<std::string> files;
  std::string property = "all";
  int tx_bound = 2;
  int max_depth = 60;
  int unroll_bound = 8;
  int call_depth_cap = 2;
  double timeout_s = 300.0;
  int threshold = 85;
  std::string key_vars;
  std::vector<std::string> custom_invariants;
  std::string solver = "builtin";
  bool dump_rules = false;
  std::string dump_model;
  std::string json_path;
  std::string corpus_manifest;
  std::string corpus_dir;
  std::string value_max;
  int jobs = 1;

  app.add_option("files", files, "Solidity source files (.sol)");
  app.add_option("--property", property, "Which properties to verify")
      ->check(CLI::IsMember({"invariant", "equivalence", "all"}));
  app.add_option("--tx-bound", tx_bound, "External transactions per execution (default 2)");
  app.add_option("--max-depth", max_depth, "Rule applications per trace (default 60)");
  app.add_option("--unroll-bound", unroll_bound, "Loop unrolling bound (default 8)");
  app.add_option("--call-depth", call_depth_cap, "Internal call depth cap (default 2)");
  app.add_option("--timeout", timeout_s, "Per-property timeout in seconds (default 300)");
  app.add_option("--threshold", threshold, "Name-similarity threshold (default 85)");
  app.add_option("--key-vars", key_vars, "Comma-separated token-balance variable names");
  app.add_option("--invariant", custom_invariants,
                 "Custom invariant: sum(m[i],m[j],...) == const|totalSupply");
  app.add_option("--solver", solver, "builtin or smtlib:<path-to-solver>");
  app.add_flag("--dump-rules", dump_rules, "Print the translated rule set and exit");
  app.add_option("--dump-model", dump_model, "Print a complementary model: invariant|equivalence")
      ->check(CLI::IsMember({"invariant", "equivalence"}));
  app.add_option("--json", json_path, "Write the report as JSON to this file");
  app.add_option("--corpus", corpus_manifest, "Run the corpus harness over a manifest file");
  app.add_option("--corpus-dir", corpus_dir, "Base directory for manifest paths");
  app.add_option("--value-max", value_max, "Restrict numeric domains to [0, N] (testing aid)");
  app.add_option("--jobs", jobs, "Contract-level parallelism (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  finverif::RunOptions opt;
  opt.search.tx_bound = tx_bound;
  opt.search.max_depth = max_depth;
  opt.search.call_depth_cap = call_depth_cap;
  opt.search.timeout =
      std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
  opt.search.solver = solver;
  if (!value_max.empty()) {
    auto v = finverif::U256::parse(value_max);
    if (!v) {
      std::cerr << "finverif: bad --value-max\n";
      return 3;
    }
    opt.search.value_max = *v;
  }
  opt.unroll_bound = unroll_bound;
  opt.threshold = threshold;
  opt.property_filter = property;
  opt.custom_invariants = custom_invariants;
  opt.jobs = jobs;
  opt.dump_rules = dump_rules;
  opt.dump_model = dump_model;
  if (!key_vars.empty()) {
    std::size_t start = 0;
    while (start <= key_vars.size()) {
      std::size_t p = key_vars.find(',', start);
      std::string item =
          key_vars.substr(start, p == std::string::npos ? std::string::npos : p - start);
      if (!item.empty()) opt.key_var_overrides.push_back(item);
      if (p == std::string::npos) break;
      start = p + 1;
    }
  }

  if (!corpus_manifest.empty()) {
    auto text = finverif::read_file(corpus_manifest);
    if (!text) {
      std::cerr << "finverif: " << text.error().message << "\n";
      return 3;
    }
    auto manifest = finverif::parse_manifest(text.value());
    if (!manifest) {
      std::cerr << "finverif: " << manifest.error().message << "\n";
      return 3;
    }
    auto summary = finverif::run_corpus(manifest.value(), corpus_dir, opt);
    std::cout << finverif::corpus_table(summary);
    return summary.all_perfect() ? 0 : 1;
  }

  if (files.empty()) {
    std::cerr << "finverif: no input files\n";
    return 3;
  }
  std::vector<finverif::AnalysisInput> inputs;
  for (const auto& f : files) {
    auto text = finverif::read_file(f);
    if (!text) {
      std::cerr << "finverif: " << text.error().message << "\n";
      return 3;
    }
    inputs.push_back(finverif::AnalysisInput{f, text.value()});
  }

  auto result = finverif::run_analysis(inputs, opt);
  if (dump_rules || !dump_model.empty()) {
    std::cout << result.dumps;
    return 0;
  }
  std::cout << finverif::report_to_text(result.report);
  if (!json_path.empty()) {
    std::ofstream out(json_path, std::ios::binary);
    if (!out) {
      std::cerr << "finverif: cannot write '" << json_path << "'\n";
      return 3;
    }
    out << finverif::report_to_json(result.report);
  }
  return result.exit_code;
}
