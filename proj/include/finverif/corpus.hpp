#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "finverif/pipeline.hpp"

namespace finverif {

// ---------------------------------------------------------------------------
// Corpus manifest: one line per contract, semicolon-separated fields.
//   path; class=<kind>; vulnerable=yes|no; categories=a,b; keyvars=x,y;
//   invariant=violated|valid|none; equivalence=...; contract=Name
// ---------------------------------------------------------------------------

inline const std::set<std::string>& known_vulnerability_classes() {
  static const std::set<std::string> classes = {
      "TOD-eth", "TOD-token", "TD", "reentrancy", "gasless send", "overflow/underflow",
      "transferMint"};
  return classes;
}

struct CorpusEntry {
  std::string path;
  std::string vuln_class;
  bool vulnerable = false;
  std::string contract;  // optional: which contract in the file to analyze
  std::vector<std::string> categories;
  std::vector<std::string> key_vars;
  std::map<std::string, std::string> expected_verdicts;  // property kind -> verdict
};

struct CorpusManifest {
  std::vector<CorpusEntry> entries;
};

namespace detail {
inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  std::size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}
inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string::npos ? std::string::npos : p - start)));
    if (p == std::string::npos) break;
    start = p + 1;
  }
  return out;
}
}  // namespace detail

inline Result<CorpusManifest> parse_manifest(const std::string& text) {
  CorpusManifest m;
  int lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string line =
        detail::trim(text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
    start = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::split(line, ';');
    CorpusEntry e;
    e.path = fields.at(0);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto eq = fields[i].find('=');
      if (eq == std::string::npos) continue;
      std::string key = detail::trim(fields[i].substr(0, eq));
      std::string value = detail::trim(fields[i].substr(eq + 1));
      if (key == "class") e.vuln_class = value;
      else if (key == "vulnerable") e.vulnerable = value == "yes";
      else if (key == "contract") e.contract = value;
      else if (key == "categories") e.categories = detail::split(value, ',');
      else if (key == "keyvars" && !value.empty()) e.key_vars = detail::split(value, ',');
      else if (key == "invariant" || key == "equivalence") e.expected_verdicts[key] = value;
    }
    if (!known_vulnerability_classes().count(e.vuln_class))
      return make_diag(DiagKind::SyntaxError, SourceLoc{lineno, 1},
                       "manifest: unknown vulnerability class '" + e.vuln_class + "'");
    m.entries.push_back(std::move(e));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Per-class confusion counts and the summary table.
// ---------------------------------------------------------------------------

struct ClassStats {
  int tp = 0, fn = 0, fp = 0, tn = 0;
  double accuracy() const {
    int total = tp + tn + fp + fn;
    return total == 0 ? 1.0 : static_cast<double>(tp + tn) / total;
  }
  double f1() const {
    int denom = 2 * tp + fp + fn;
    return denom == 0 ? 1.0 : static_cast<double>(2 * tp) / denom;
  }
};

struct CorpusSummary {
  std::map<std::string, ClassStats> per_class;
  std::vector<std::string> mismatches;  // expectation mismatches beyond detection
  int analyzed = 0;
  double seconds = 0.0;

  bool all_perfect() const {
    if (!mismatches.empty()) return false;
    for (const auto& [cls, s] : per_class)
      if (s.fp != 0 || s.fn != 0) return false;
    return true;
  }
};

inline std::string corpus_table(const CorpusSummary& s) {
  std::string out = "class                 TP  FN  FP  TN   Acc    F1\n";
  for (const auto& [cls, st] : s.per_class) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-20s %3d %3d %3d %3d  %.2f  %.2f\n", cls.c_str(), st.tp,
                  st.fn, st.fp, st.tn, st.accuracy(), st.f1());
    out += buf;
  }
  for (const auto& m : s.mismatches) out += "mismatch: " + m + "\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d contracts analyzed in %.1fs\n", s.analyzed, s.seconds);
  out += buf;
  return out;
}

inline CorpusSummary run_corpus(const CorpusManifest& manifest, const std::string& base_dir,
                                const RunOptions& opt) {
  CorpusSummary summary;
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& entry : manifest.entries) {
    std::string path = base_dir.empty() ? entry.path : base_dir + "/" + entry.path;
    auto text = read_file(path);
    if (!text) {
      summary.mismatches.push_back(entry.path + ": " + text.error().message);
      continue;
    }
    RunResult result = run_analysis({AnalysisInput{entry.path, text.value()}}, opt);
    ++summary.analyzed;

    const ContractReport* target = nullptr;
    for (const auto& c : result.report.contracts)
      if (entry.contract.empty() ? target == nullptr : c.name == entry.contract) target = &c;
    if (!target) {
      summary.mismatches.push_back(entry.path + ": target contract not found");
      continue;
    }

    bool detected = false;
    for (const auto& p : target->properties)
      if (p.verdict == "violated") detected = true;
    ClassStats& st = summary.per_class[entry.vuln_class];
    if (entry.vulnerable) (detected ? st.tp : st.fn)++;
    else (detected ? st.fp : st.tn)++;

    // classification and per-property expectations
    if (!entry.categories.empty()) {
      std::set<std::string> got(target->categories.begin(), target->categories.end());
      std::set<std::string> want(entry.categories.begin(), entry.categories.end());
      if (got != want) summary.mismatches.push_back(entry.path + ": categories differ");
    }
    if (!entry.key_vars.empty()) {
      std::set<std::string> got(target->key_variables.begin(), target->key_variables.end());
      for (const auto& k : entry.key_vars)
        if (!got.count(k))
          summary.mismatches.push_back(entry.path + ": key variable '" + k + "' not recognized");
    }
    for (const auto& [prop_kind, expected] : entry.expected_verdicts) {
      std::string got = "none";
      for (const auto& p : target->properties) {
        bool is_inv = p.property.rfind("token_inv", 0) == 0;
        if ((prop_kind == "invariant") == is_inv) got = p.verdict;
      }
      if (got != expected)
        summary.mismatches.push_back(entry.path + ": " + prop_kind + " expected " + expected +
                                     ", got " + got);
    }
  }
  summary.seconds = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count() /
                    1000.0;
  return summary;
}

}  // namespace finverif
