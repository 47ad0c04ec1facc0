#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "finverif/verify.hpp"

namespace finverif {

struct BoundsRecord {
  int max_depth = 0;
  int tx_bound = 0;
  int call_depth_cap = 0;
};

struct PropertyReport {
  std::string property;
  std::string verdict;  // valid | violated | unknown
  std::string unknown_reason;
  std::vector<std::string> trace;  // rule name + source line per step
  std::map<std::string, std::string> witness;
  std::vector<std::string> constraints;
  std::string case_split;
  int refinements = 0;
  BoundsRecord bounds;
  double seconds = 0.0;
};

struct ContractReport {
  std::string file;
  std::string name;
  std::vector<std::string> categories;
  std::vector<std::string> key_variables;
  std::vector<std::string> diagnostics;
  std::vector<PropertyReport> properties;
  bool analyzed = false;
};

struct Report {
  std::vector<ContractReport> contracts;
};

inline PropertyReport make_property_report(const Property& prop, const VerdictInfo& v) {
  PropertyReport r;
  r.property = prop.label();
  switch (v.kind) {
    case VerdictInfo::Kind::Valid: r.verdict = "valid"; break;
    case VerdictInfo::Kind::Violated: r.verdict = "violated"; break;
    case VerdictInfo::Kind::Unknown: r.verdict = "unknown"; break;
  }
  r.unknown_reason = v.unknown_reason;
  for (const auto& step : v.trace.steps) {
    if (step.rule_kind == "Fresh") continue;
    std::string line = step.rule_kind;
    if (!step.rule_tag.empty()) line += "[" + step.rule_tag + "]";
    if (step.source_line > 0) line += " (line " + std::to_string(step.source_line) + ")";
    r.trace.push_back(line);
  }
  for (const auto& [sym, value] : v.witness) r.witness[sym] = value.to_string();
  r.constraints = v.constraint_dump;
  r.case_split = v.partition.describe();
  r.refinements = v.refinements;
  r.bounds = BoundsRecord{v.bounds.max_depth, v.bounds.tx_bound, v.bounds.call_depth_cap};
  r.seconds = static_cast<double>(v.elapsed.count()) / 1000.0;
  return r;
}

// ---------------------------------------------------------------------------
// JSON rendering (round-trips bit-exactly through from/to).
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const BoundsRecord& b) {
  j = nlohmann::json{
      {"max_depth", b.max_depth}, {"tx_bound", b.tx_bound}, {"call_depth_cap", b.call_depth_cap}};
}
inline void from_json(const nlohmann::json& j, BoundsRecord& b) {
  j.at("max_depth").get_to(b.max_depth);
  j.at("tx_bound").get_to(b.tx_bound);
  j.at("call_depth_cap").get_to(b.call_depth_cap);
}

inline void to_json(nlohmann::json& j, const PropertyReport& p) {
  j = nlohmann::json{{"property", p.property},
                     {"verdict", p.verdict},
                     {"unknown_reason", p.unknown_reason},
                     {"trace", p.trace},
                     {"witness", p.witness},
                     {"constraints", p.constraints},
                     {"case_split", p.case_split},
                     {"refinements", p.refinements},
                     {"bounds", p.bounds},
                     {"seconds", p.seconds}};
}
inline void from_json(const nlohmann::json& j, PropertyReport& p) {
  j.at("property").get_to(p.property);
  j.at("verdict").get_to(p.verdict);
  j.at("unknown_reason").get_to(p.unknown_reason);
  j.at("trace").get_to(p.trace);
  j.at("witness").get_to(p.witness);
  j.at("constraints").get_to(p.constraints);
  j.at("case_split").get_to(p.case_split);
  j.at("refinements").get_to(p.refinements);
  j.at("bounds").get_to(p.bounds);
  j.at("seconds").get_to(p.seconds);
}

inline void to_json(nlohmann::json& j, const ContractReport& c) {
  j = nlohmann::json{{"file", c.file},
                     {"contract", c.name},
                     {"categories", c.categories},
                     {"key_variables", c.key_variables},
                     {"diagnostics", c.diagnostics},
                     {"properties", c.properties},
                     {"analyzed", c.analyzed}};
}
inline void from_json(const nlohmann::json& j, ContractReport& c) {
  j.at("file").get_to(c.file);
  j.at("contract").get_to(c.name);
  j.at("categories").get_to(c.categories);
  j.at("key_variables").get_to(c.key_variables);
  j.at("diagnostics").get_to(c.diagnostics);
  j.at("properties").get_to(c.properties);
  j.at("analyzed").get_to(c.analyzed);
}

inline void to_json(nlohmann::json& j, const Report& r) {
  j = nlohmann::json{{"contracts", r.contracts}};
}
inline void from_json(const nlohmann::json& j, Report& r) {
  j.at("contracts").get_to(r.contracts);
}

inline std::string report_to_json(const Report& r) {
  nlohmann::json j = r;
  return j.dump(2) + "\n";
}

inline Report report_from_json(const std::string& text) {
  return nlohmann::json::parse(text).get<Report>();
}

// ---------------------------------------------------------------------------
// Text rendering
// ---------------------------------------------------------------------------

inline std::string report_to_text(const Report& r) {
  std::string out;
  for (const auto& c : r.contracts) {
    out += c.file + ": contract " + c.name + "\n";
    if (!c.diagnostics.empty()) {
      for (const auto& d : c.diagnostics) out += "  " + d + "\n";
      continue;
    }
    out += "  categories:";
    for (const auto& cat : c.categories) out += " " + cat;
    out += "\n  key variables:";
    if (c.key_variables.empty()) out += " (none)";
    for (const auto& k : c.key_variables) out += " " + k;
    out += "\n";
    if (c.properties.empty()) out += "  no applicable properties\n";
    for (const auto& p : c.properties) {
      out += "  " + p.property + ": " + p.verdict;
      if (p.verdict == "valid")
        out += " (within bounds: depth " + std::to_string(p.bounds.max_depth) + ", tx " +
               std::to_string(p.bounds.tx_bound) + ", call depth " +
               std::to_string(p.bounds.call_depth_cap) + ")";
      if (p.verdict == "unknown" && !p.unknown_reason.empty())
        out += " (" + p.unknown_reason + ")";
      char buf[48];
      std::snprintf(buf, sizeof buf, " [%.2fs]", p.seconds);
      out += buf;
      out += "\n";
      if (p.verdict == "violated") {
        if (!p.case_split.empty()) out += "    case split: " + p.case_split + "\n";
        out += "    trace:\n";
        for (const auto& t : p.trace) out += "      " + t + "\n";
        out += "    constraints:\n";
        for (const auto& cst : p.constraints) out += "      " + cst + "\n";
        out += "    witness:\n";
        for (const auto& [k, v] : p.witness) out += "      " + k + " = " + v + "\n";
      }
    }
  }
  return out;
}

}  // namespace finverif
