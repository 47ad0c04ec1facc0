#include <doctest.h>

#include <fstream>
#include <random>

#include "finverif/corpus.hpp"
#include "finverif/pipeline.hpp"
#include "finverif/smtlib.hpp"
#include "finverif/verify.hpp"

using namespace finverif;

namespace {

TermPtr atom(const char* name) { return fresh_term(name, Sort::Num, "test"); }

std::string corpus_file(const std::string& name) {
  return std::string(CORPUS_DIR) + "/" + name;
}

RunResult run_file(const std::string& path, RunOptions opt = {}) {
  auto text = read_file(path);
  REQUIRE(text.ok());
  return run_analysis({AnalysisInput{path, text.value()}}, opt);
}

}  // namespace

// ---------------------------------------------------------------------------
// Built-in solver
// ---------------------------------------------------------------------------

TEST_CASE("contradictory equalities are unsat") {
  auto x = atom("x");
  std::vector<NumConstraint> cs{{Rel::Eq, x, num_const(U256(1))},
                                {Rel::Eq, x, num_const(U256(2))}};
  CHECK(std::holds_alternative<Unsat>(solve_linear(cs, std::nullopt)));
}

TEST_CASE("x+y=10 with x<3 and y<3 is unsat, matching brute force") {
  auto x = atom("x");
  auto y = atom("y");
  std::vector<NumConstraint> cs{
      {Rel::Eq, op_term(BinOp::Add, x, y), num_const(U256(10))},
      {Rel::Less, x, num_const(U256(3))},
      {Rel::Less, y, num_const(U256(3))},
  };
  CHECK(std::holds_alternative<Unsat>(solve_linear(cs, U256(10))));
  bool brute_sat = false;
  for (std::uint64_t xv = 0; xv <= 10; ++xv)
    for (std::uint64_t yv = 0; yv <= 10; ++yv)
      if (xv + yv == 10 && xv < 3 && yv < 3) brute_sat = true;
  CHECK_FALSE(brute_sat);
}

TEST_CASE("token-minting constraint set is satisfiable with a nonzero value") {
  // balances0+balances0 = C1, (balances0+v)+(balances0+v) != C1, v <= balances0
  auto b0 = atom("b0");
  auto v = atom("v");
  auto c1 = sym_const("C1", Sort::Num);
  auto after = op_term(BinOp::Add, b0, v);
  std::vector<NumConstraint> cs{
      {Rel::Eq, op_term_raw(BinOp::Add, b0, b0), c1},
      {Rel::Leq, v, b0},
      {Rel::Neq, op_term_raw(BinOp::Add, after, after), c1},
  };
  auto r = solve_linear(cs, std::nullopt, {}, {"C1"});
  REQUIRE(std::holds_alternative<Sat>(r));
  const Assignment& w = std::get<Sat>(r).witness;
  CHECK_FALSE(w.at("v") == BigInt(0));
  for (const auto& c : cs) CHECK(eval_constraint(c, w).value());
}

TEST_CASE("wraparound is reachable without a guard and blocked with one") {
  auto bs = atom("bs");
  auto bt = atom("bt");
  auto v = atom("v");
  auto c1 = sym_const("C1", Sort::Num);
  auto sender_after = op_term(BinOp::Sub, bs, v);
  auto to_after = op_term(BinOp::Add, bt, v);
  std::vector<NumConstraint> unguarded{
      {Rel::Eq, op_term_raw(BinOp::Add, bs, bt), c1},
      {Rel::Leq, v, bs},
      {Rel::Neq, op_term_raw(BinOp::Add, sender_after, to_after), c1},
  };
  auto r = solve_linear(unguarded, std::nullopt, {}, {"C1"});
  REQUIRE(std::holds_alternative<Sat>(r));
  const Assignment& w = std::get<Sat>(r).witness;
  // the found witness must exercise the 2^256 wraparound
  BigInt raw = w.at("bt") + w.at("v");
  CHECK(pow2_256() <= raw);

  std::vector<NumConstraint> guarded = unguarded;
  guarded.push_back({Rel::Leq, bt, to_after});  // require(bt + v >= bt)
  CHECK(std::holds_alternative<Unsat>(solve_linear(guarded, std::nullopt, {}, {"C1"})));
}

TEST_CASE("parity via mod plus the 15-second stretch") {
  auto a = atom("btA");
  auto b = atom("btB");
  std::vector<NumConstraint> cs{
      {Rel::Eq, op_term(BinOp::Mod, a, num_const(U256(2))), num_const(U256(1))},
      {Rel::Neq, op_term(BinOp::Mod, b, num_const(U256(2))), num_const(U256(1))},
      {Rel::Leq, b, op_term_raw(BinOp::Add, a, num_const(U256(15)))},
  };
  auto r = solve_linear(cs, std::nullopt);
  REQUIRE(std::holds_alternative<Sat>(r));
  const Assignment& w = std::get<Sat>(r).witness;
  CHECK(w.at("btA") % BigInt(2) == BigInt(1));
  CHECK(w.at("btB") % BigInt(2) == BigInt(0));
}

TEST_CASE("division and value-domain restrictions") {
  auto x = atom("x");
  std::vector<NumConstraint> cs{
      {Rel::Eq, op_term(BinOp::Div, x, num_const(U256(3))), num_const(U256(2))}};
  auto r = solve_linear(cs, U256(10));
  REQUIRE(std::holds_alternative<Sat>(r));
  BigInt xv = std::get<Sat>(r).witness.at("x");
  CHECK(BigInt(6) <= xv);
  CHECK(xv <= BigInt(8));

  // nonlinear constructs fall out of the fragment
  auto y = atom("y");
  std::vector<NumConstraint> nl{{Rel::Eq, op_term(BinOp::Mul, x, y), num_const(U256(4))}};
  CHECK(std::holds_alternative<SolverUnknown>(solve_linear(nl, U256(10))));
}

TEST_CASE("every sat answer re-evaluates on randomized linear systems") {
  std::mt19937 rng(41);
  int sats = 0;
  for (int round = 0; round < 60; ++round) {
    std::vector<TermPtr> vars{atom("p"), atom("q"), atom("r")};
    std::vector<NumConstraint> cs;
    int n = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      TermPtr lhs = vars[rng() % vars.size()];
      if (rng() % 2)
        lhs = op_term(rng() % 2 ? BinOp::Add : BinOp::Sub, lhs, vars[rng() % vars.size()]);
      TermPtr rhs = num_const(U256(rng() % 12));
      Rel rel = static_cast<Rel>(rng() % 4);
      cs.push_back({rel, lhs, rhs});
    }
    auto result = solve_linear(cs, U256(20));
    if (std::holds_alternative<Sat>(result)) {
      ++sats;
      for (const auto& c : cs)
        CHECK(eval_constraint(c, std::get<Sat>(result).witness).value());
    }
  }
  CHECK(sats > 10);
}

// ---------------------------------------------------------------------------
// SMT-LIB2 emission and model parsing
// ---------------------------------------------------------------------------

TEST_CASE("smtlib emission is deterministic and snapshot-stable") {
  auto b0 = atom("balances[to]");
  auto v = atom("value");
  auto c1 = sym_const("C1", Sort::Num);
  std::vector<NumConstraint> cs{
      {Rel::Eq, op_term_raw(BinOp::Add, b0, b0), c1},
      {Rel::Neq, op_term_raw(BinOp::Add, op_term(BinOp::Add, b0, v),
                             op_term(BinOp::Add, b0, v)),
       c1},
      {Rel::Less, num_const(U256(0)), v},
  };
  SmtEncoding first = emit_smtlib(cs, std::nullopt, {});
  SmtEncoding second = emit_smtlib(cs, std::nullopt, {});
  CHECK(first.text == second.text);

  std::ifstream in(std::string(GOLDEN_DIR) + "/smt_emission.golden", std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream want;
  want << in.rdbuf();
  CHECK(first.text == want.str());
}

TEST_CASE("standard get-model output parses into a witness") {
  auto x = atom("x");
  std::vector<NumConstraint> cs{{Rel::Eq, x, num_const(U256(5))}};
  SmtEncoding enc = emit_smtlib(cs, std::nullopt, {});
  std::string smt_name;
  for (const auto& [smt, orig] : enc.names)
    if (orig == "x") smt_name = smt;
  REQUIRE_FALSE(smt_name.empty());
  std::string canned = "sat\n(\n  (define-fun " + smt_name + " () Int 5)\n)\n";
  auto parsed = parse_smt_output(canned, enc);
  REQUIRE(std::holds_alternative<Sat>(parsed));
  CHECK(std::get<Sat>(parsed).witness.at("x") == BigInt(5));
  CHECK(std::holds_alternative<Unsat>(parse_smt_output("unsat\n", enc)));
}

// ---------------------------------------------------------------------------
// Verifier end to end (fast cases; the corpus sweep lives in acceptance)
// ---------------------------------------------------------------------------

namespace {

VerdictInfo verify_file(const std::string& path, Property::Kind kind,
                        SearchConfig cfg = {}) {
  auto text = read_file(path);
  REQUIRE(text.ok());
  auto parsed = parse_contract(text.value(), path);
  REQUIRE(parsed.ok());
  auto prep = prepare_contract(parsed.value(), 8);
  REQUIRE(prep.ok());
  auto props = generate_properties(parsed.value(), find_key_variables(parsed.value()),
                                   classify(parsed.value()));
  REQUIRE(props.ok());
  for (const auto& p : props.value())
    if (p.kind == kind) return verify({prep.value()}, p, cfg);
  REQUIRE(false);
  return VerdictInfo{};
}

}  // namespace

TEST_CASE("token example: invariant violated by a self-transfer mint") {
  VerdictInfo v = verify_file(corpus_file("ex1.sol"), Property::Kind::Invariant);
  REQUIRE(v.kind == VerdictInfo::Kind::Violated);
  // the case split identifies recipient and sender
  CHECK(v.partition.same_class("to", "msg.sender"));
  // witness re-executes, and zeroing the transferred value breaks it
  CHECK(check_witness(v.trace, v.witness));
  Assignment zeroed = v.witness;
  for (auto& [name, value] : zeroed)
    if (name.rfind("value", 0) == 0) {
      CHECK_FALSE(value == BigInt(0));
      value = BigInt(0);
    }
  CHECK_FALSE(check_witness(v.trace, zeroed));
}

TEST_CASE("timestamp dice: equivalence violated with opposite parities") {
  VerdictInfo v = verify_file(corpus_file("ex3.sol"), Property::Kind::Equivalence);
  REQUIRE(v.kind == VerdictInfo::Kind::Violated);
  BigInt bt_a, bt_b;
  for (const auto& [name, value] : v.witness) {
    if (name.rfind("bt_A", 0) == 0) bt_a = value;
    if (name.rfind("bt_B", 0) == 0) bt_b = value;
  }
  CHECK(bt_b <= bt_a + BigInt(15));
  CHECK_FALSE(bt_a % BigInt(2) == bt_b % BigInt(2));
  CHECK(check_witness(v.trace, v.witness));
}

TEST_CASE("valid verdicts record their bounds") {
  SearchConfig cfg;
  cfg.tx_bound = 1;
  VerdictInfo v = verify_file(corpus_file("td_patched.sol"), Property::Kind::Invariant, cfg);
  CHECK(v.kind == VerdictInfo::Kind::Valid);
  CHECK(v.bounds.tx_bound == 1);
  CHECK(v.bounds.max_depth == cfg.max_depth);
}

// ---------------------------------------------------------------------------
// Reports, exit codes, corpus manifest
// ---------------------------------------------------------------------------

TEST_CASE("json report round-trips to a fixed point") {
  RunOptions opt;
  opt.property_filter = "invariant";
  RunResult result = run_file(corpus_file("ex1.sol"), opt);
  std::string once = report_to_json(result.report);
  Report parsed = report_from_json(once);
  std::string twice = report_to_json(parsed);
  CHECK(once == twice);
  CHECK_FALSE(result.report.contracts.empty());
  CHECK(result.report.contracts[0].properties[0].verdict == "violated");
}

TEST_CASE("nonlinear arithmetic yields an honest unknown and exit code 2") {
  const char* source = R"(
contract Squarer {
    mapping(address=>uint) balances;
    function boost(uint value) public {
        balances[msg.sender] = balances[msg.sender] + value * value;
        return;
    }
})";
  RunOptions opt;
  opt.property_filter = "invariant";
  RunResult r = run_analysis({AnalysisInput{"squarer.sol", source}}, opt);
  CHECK(r.exit_code == 2);
  REQUIRE_FALSE(r.report.contracts.empty());
  REQUIRE_FALSE(r.report.contracts[0].properties.empty());
  CHECK(r.report.contracts[0].properties[0].verdict == "unknown");
  CHECK_FALSE(r.report.contracts[0].properties[0].unknown_reason.empty());
}

TEST_CASE("exit codes: violated, valid, parse error") {
  RunOptions inv_only;
  inv_only.property_filter = "invariant";
  CHECK(run_file(corpus_file("ex1.sol"), inv_only).exit_code == 1);
  CHECK(run_file(corpus_file("td_patched.sol"), inv_only).exit_code == 0);

  RunResult bad = run_analysis({AnalysisInput{"broken.sol", "contract {"}}, RunOptions{});
  CHECK(bad.exit_code == 3);
  REQUIRE_FALSE(bad.report.contracts.empty());
  CHECK_FALSE(bad.report.contracts[0].diagnostics.empty());
}

TEST_CASE("diagnostics render as file:line:col: severity: message") {
  auto parsed = parse_source("contract C {\n  uint x\n}", "bad.sol");
  REQUIRE_FALSE(parsed.ok());
  std::string rendered = parsed.error().render();
  CHECK(rendered.rfind("bad.sol:", 0) == 0);
  CHECK(rendered.find("error:") != std::string::npos);
}

TEST_CASE("manifest parsing rejects unknown vulnerability classes") {
  auto good = parse_manifest("ex1.sol; class=transferMint; vulnerable=yes\n");
  REQUIRE(good.ok());
  CHECK(good.value().entries.size() == 1);
  CHECK(good.value().entries[0].vulnerable);

  auto bad = parse_manifest("x.sol; class=nonsense; vulnerable=yes\n");
  CHECK_FALSE(bad.ok());
}

TEST_CASE("corpus summary formulas") {
  ClassStats s;
  s.tp = 3;
  s.tn = 2;
  s.fp = 1;
  s.fn = 0;
  CHECK(s.accuracy() == doctest::Approx(5.0 / 6.0));
  CHECK(s.f1() == doctest::Approx(6.0 / 7.0));
}

TEST_CASE("key variable overrides flow through the pipeline") {
  RunOptions opt;
  opt.key_var_overrides = {"credit"};
  opt.property_filter = "invariant";
  RunResult r = run_file(corpus_file("gasless.sol"), opt);
  REQUIRE_FALSE(r.report.contracts.empty());
  const ContractReport& c = r.report.contracts[0];
  REQUIRE_FALSE(c.key_variables.empty());
  CHECK(c.key_variables[0] == "credit");
  bool has_credit_inv = false;
  for (const auto& p : c.properties)
    if (p.property == "token_inv(credit)") has_credit_inv = true;
  CHECK(has_credit_inv);
}
