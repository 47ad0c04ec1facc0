#include <doctest.h>

#include <random>

#include "finverif/frontend.hpp"
#include "finverif/numeric.hpp"
#include "finverif/parser.hpp"
#include "finverif/pipeline.hpp"
#include "finverif/properties.hpp"
#include "support/oracle.hpp"

using namespace finverif;

// ---------------------------------------------------------------------------
// 256-bit arithmetic
// ---------------------------------------------------------------------------

TEST_CASE("u256 wrapping arithmetic") {
  U256 max = U256::max_value();
  CHECK(max + U256(1) == U256(0));
  CHECK(U256(0) - U256(1) == max);
  CHECK((max * U256(2)) == max - U256(1));
  CHECK(U256(10).pow(U256(3)) == U256(1000));
  CHECK(U256(7) / U256(2) == U256(3));
  CHECK(U256(7) % U256(2) == U256(1));
  CHECK(U256(7) / U256(0) == U256(0));  // EVM convention
  CHECK(U256::parse("0xff").value() == U256(255));
  CHECK(U256::parse("115792089237316195423570985008687907853269984665640564039457584007913129639935")
            .value() == max);
  CHECK(max.to_string() ==
        "115792089237316195423570985008687907853269984665640564039457584007913129639935");
}

TEST_CASE("u256 divmod identity on random values") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    U256 a(rng());
    a = a * U256(rng()) + U256(rng());
    U256 b(rng() % 1000 + 1);
    auto [q, r] = U256::divmod(a, b);
    CHECK(q * b + r == a);
    CHECK(r < b);
  }
}

TEST_CASE("bigint signed arithmetic and parsing") {
  BigInt m = pow2_256();
  CHECK(m.to_string() ==
        "115792089237316195423570985008687907853269984665640564039457584007913129639936");
  CHECK((m - m) == BigInt(0));
  CHECK((BigInt(-5) + BigInt(3)) == BigInt(-2));
  CHECK(BigInt::fdiv(BigInt(-7), BigInt(2)) == BigInt(-4));
  CHECK(BigInt::parse("-123").value() == BigInt(-123));
  CHECK(BigInt::gcd(BigInt(12), BigInt(18)) == BigInt(6));
  Rational r(BigInt(6), BigInt(4));
  CHECK(r.num() == BigInt(3));
  CHECK(r.den() == BigInt(2));
  CHECK(r.floor() == BigInt(1));
  CHECK(r.ceil() == BigInt(2));
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

static ContractAst parse_ok(const std::string& text) {
  auto r = parse_contract(text);
  REQUIRE(r.ok());
  return r.value();
}

TEST_CASE("parses the token example") {
  auto ast = parse_ok(R"(
contract Ex1 {
    mapping(address=>uint) balances;
    function transfer(address to, uint value) public {
        uint fromBalance = balances[msg.sender];
        balances[to] = fromBalance + value;
        return;
    }
})");
  CHECK(ast.name == "Ex1");
  REQUIRE(ast.globals.size() == 1);
  CHECK(ast.globals[0].name == "balances");
  CHECK(ast.globals[0].type.is_address_to_uint_mapping());
  REQUIRE(ast.functions.size() == 1);
  CHECK(ast.functions[0].name == "transfer");
  CHECK(ast.functions[0].params.size() == 2);
  CHECK(ast.functions[0].params[0].second.kind == SolTypeKind::Address);
}

TEST_CASE("empty input is a syntax error at 1:1") {
  auto r = parse_contract("");
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().kind == DiagKind::SyntaxError);
  CHECK(r.error().loc.line == 1);
  CHECK(r.error().loc.column == 1);
}

TEST_CASE("rejects unsupported features with a reason") {
  auto returns = parse_contract(
      "contract C { function f() public returns (uint) { return; } }");
  REQUIRE_FALSE(returns.ok());
  CHECK(returns.error().kind == DiagKind::UnsupportedFeature);

  auto inherit = parse_contract("contract C is D { }");
  REQUIRE_FALSE(inherit.ok());
  CHECK(inherit.error().kind == DiagKind::UnsupportedFeature);

  auto msg_value = parse_contract(
      "contract C { function f() public { uint x = msg.value; return; } }");
  REQUIRE_FALSE(msg_value.ok());
  CHECK(msg_value.error().kind == DiagKind::UnsupportedFeature);
}

TEST_CASE("duplicate names are rejected") {
  CHECK_FALSE(parse_contract("contract C { uint x; uint x; }").ok());
  CHECK_FALSE(parse_contract(
                  "contract C { function f() public { return; } function f() public { return; } }")
                  .ok());
}

TEST_CASE("parse then prettyprint then parse is stable") {
  const char* sources[] = {
      "ex1.sol",      "ex3.sol",       "reentrancy.sol", "tod_eth.sol",
      "tod_token.sol", "gasless.sol",  "overflow.sol",   "td_patched.sol",
  };
  for (const char* path : sources) {
    auto text = read_file(std::string(CORPUS_DIR) + "/" + path);
    REQUIRE(text.ok());
    auto first = parse_contract(text.value());
    REQUIRE(first.ok());
    std::string printed = print_contract(first.value());
    auto second = parse_contract(printed);
    REQUIRE(second.ok());
    CHECK(print_contract(second.value()) == printed);
  }
}

// ---------------------------------------------------------------------------
// Loop unrolling
// ---------------------------------------------------------------------------

TEST_CASE("constant loop unrolls to the equivalent straight line") {
  auto ast = parse_ok(R"(
contract C {
    uint acc;
    function f() public {
        for (uint i = 0; i < 2; i++) {
            acc = acc + i;
        }
        return;
    }
})");
  auto unrolled = unroll_loops(ast, 8);
  REQUIRE(unrolled.ok());
  const auto& body = unrolled.value().functions[0].body;
  REQUIRE(body.size() == 3);  // two iterations plus return
  CHECK(body[0]->kind == StmtKind::Assign);
  CHECK(print_expr(body[0]->rhs) == "acc + 0");
  CHECK(print_expr(body[1]->rhs) == "acc + 1");

  // interpreter agreement between original and unrolled bodies
  std::vector<ContractAst> reg_orig{ast}, reg_unrolled{unrolled.value()};
  for (std::uint64_t start = 0; start < 4; ++start) {
    oracle::Interpreter io(reg_orig, 2), iu(reg_unrolled, 2);
    oracle::World w1, w2;
    w1.scalars["C"]["acc"] = U256(start);
    w2 = w1;
    oracle::TxRequest tx{"C", "f", oracle::kAccountOne, {}};
    oracle::Script s1, s2;
    bool hf1 = false, hf2 = false;
    CHECK(io.run_tx(w1, tx, U256(0), s1, hf1));
    CHECK(iu.run_tx(w2, tx, U256(0), s2, hf2));
    CHECK(w1.scalars["C"]["acc"] == w2.scalars["C"]["acc"]);
  }
}

TEST_CASE("parameter-bounded loop is rejected as unbounded") {
  auto ast = parse_ok(R"(
contract C {
    uint acc;
    function f(uint n) public {
        uint i = 0;
        while (i < n) {
            acc = acc + 1;
        }
        return;
    }
})");
  auto r = unroll_loops(ast, 8);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().kind == DiagKind::UnboundedLoop);
}

TEST_CASE("trip count above the bound is BoundExceeded") {
  auto ast = parse_ok(R"(
contract C {
    uint acc;
    function f() public {
        for (uint i = 0; i < 10; i++) {
            acc = acc + 1;
        }
        return;
    }
})");
  auto r = unroll_loops(ast, 4);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().kind == DiagKind::BoundExceeded);
  CHECK(unroll_loops(ast, 10).ok());
}

TEST_CASE("unrolled output has no loops anywhere") {
  auto ast = parse_ok(R"(
contract C {
    uint acc;
    function f() public {
        for (uint i = 0; i < 3; i++) {
            for (uint j = 0; j < 2; j++) {
                acc = acc + i * j;
            }
        }
        return;
    }
})");
  auto r = unroll_loops(ast, 8);
  REQUIRE(r.ok());
  auto scan = [](auto&& self, const StmtSeq& body) -> bool {
    for (const auto& s : body) {
      if (s->kind == StmtKind::Loop) return false;
      if (!self(self, s->then_body) || !self(self, s->else_body)) return false;
    }
    return true;
  };
  CHECK(scan(scan, r.value().functions[0].body));
}

// ---------------------------------------------------------------------------
// Support checks and return synthesis
// ---------------------------------------------------------------------------

TEST_CASE("check_support flags unknown callees and is monotone") {
  auto ast = parse_ok(R"(
contract C {
    function f(address a) public {
        Unknown(a).g();
        return;
    }
})");
  auto diags_empty = check_support(ast, {"C"});
  CHECK(diags_empty.size() == 1);
  auto diags_known = check_support(ast, {"C", "Unknown"});
  CHECK(diags_known.empty());
  // enlarging the set never adds diagnostics
  CHECK(diags_known.size() <= diags_empty.size());
}

TEST_CASE("creation outside a constructor is flagged; inside is fine") {
  auto bad = parse_ok(R"(
contract C {
    function f() public {
        new Token();
        return;
    }
})");
  CHECK(check_support(bad, {"C", "Token"}).size() == 1);

  auto good = parse_ok(R"(
contract C {
    constructor() public {
        new Token();
    }
})");
  CHECK(check_support(good, {"C", "Token"}).empty());
  REQUIRE(good.created_contracts.size() == 1);
  CHECK(good.created_contracts[0] == "Token");
}

TEST_CASE("missing return is synthesized, dead code is flagged") {
  auto ast = parse_ok("contract C { uint x; function f() public { x = 1; } }");
  auto r = synthesize_returns(ast);
  REQUIRE(r.ok());
  CHECK(r.value().functions[0].body.back()->kind == StmtKind::Return);

  auto dead = parse_ok("contract C { uint x; function f() public { return; x = 1; } }");
  CHECK_FALSE(synthesize_returns(dead).ok());
}

TEST_CASE("boolean lowering leaves only relational conditions") {
  auto ast = parse_ok(R"(
contract C {
    uint x;
    function f(uint a, uint b) public {
        if (a > 1 && b > 2) {
            x = 1;
        } else {
            x = 2;
        }
        require(a == 0 || b == 0);
        require(!(a > b));
        return;
    }
})");
  ContractAst lowered = lower_booleans(ast);
  auto scan = [](auto&& self, const StmtSeq& body) -> bool {
    for (const auto& s : body) {
      if (s->cond) {
        if (s->cond->kind != ExprKind::Compare && s->cond->kind != ExprKind::BoolLit)
          return false;
      }
      if (!self(self, s->then_body) || !self(self, s->else_body)) return false;
    }
    return true;
  };
  CHECK(scan(scan, lowered.functions[0].body));
}

// ---------------------------------------------------------------------------
// Name similarity and key variables
// ---------------------------------------------------------------------------

TEST_CASE("similarity scores pinned by the reference ratio") {
  CHECK(name_similarity("balances", "balances") == 100);
  CHECK(name_similarity("balances", "_balances") == 100);  // token split strips underscores
  CHECK(name_similarity("balances", "ownerAddr") == 53);
  CHECK(name_similarity("balanceOf", "balances") == 88);
  CHECK(name_similarity("ownedTokenCount", "tokenCountOwned") == 100);
  CHECK(name_similarity("credit", "balances") == 43);
}

TEST_CASE("similarity is symmetric and bounded") {
  std::mt19937 rng(11);
  auto random_ident = [&]() {
    std::string s;
    int n = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + rng() % 26));
    return s;
  };
  for (int i = 0; i < 300; ++i) {
    std::string a = random_ident(), b = random_ident();
    int ab = name_similarity(a, b);
    CHECK(ab == name_similarity(b, a));
    CHECK(ab >= 0);
    CHECK(ab <= 100);
    CHECK(name_similarity(a, a) == 100);
  }
}

TEST_CASE("key variable recognition and threshold monotonicity") {
  auto ast = parse_ok(R"(
contract T {
    mapping(address=>uint) balanceOf;
    uint totalSupply;
    mapping(address=>uint) allowed;
    function mint(address to, uint v) public {
        balanceOf[to] = balanceOf[to] + v;
        totalSupply = totalSupply + v;
        return;
    }
})");
  KeyVariables kv = find_key_variables(ast);
  REQUIRE(kv.balances_vars.size() == 1);
  CHECK(kv.balances_vars[0] == "balanceOf");
  REQUIRE(kv.total_supply.has_value());
  CHECK(*kv.total_supply == "totalSupply");

  // lowering the threshold never removes a match
  for (int hi = 20; hi <= 95; hi += 15) {
    auto at_hi = find_key_variables(ast, hi).balances_vars;
    auto at_lo = find_key_variables(ast, hi - 10).balances_vars;
    for (const auto& v : at_hi)
      CHECK(std::find(at_lo.begin(), at_lo.end(), v) != at_lo.end());
  }

  // user overrides bypass matching entirely
  KeyVariables forced = find_key_variables(ast, 85, {"allowed"});
  REQUIRE(forced.balances_vars.size() == 1);
  CHECK(forced.balances_vars[0] == "allowed");
}

// ---------------------------------------------------------------------------
// Classification and property generation
// ---------------------------------------------------------------------------

TEST_CASE("classification of representative contracts") {
  auto token = parse_ok(R"(
contract T {
    mapping(address=>uint) balances;
    function transfer(address to, uint v) public {
        balances[to] = balances[to] + v;
        return;
    }
})");
  auto cats = classify(token);
  CHECK(cats.count(ContractCategory::TokenContract) == 1);
  CHECK(cats.count(ContractCategory::EtherRelated) == 0);

  auto pure_math = parse_ok(R"(
contract M {
    uint acc;
    function f(uint x) public {
        acc = acc + x * x;
        return;
    }
})");
  auto mcats = classify(pure_math);
  CHECK(mcats.size() == 1);
  CHECK(mcats.count(ContractCategory::Other) == 1);
}

TEST_CASE("ICO contract creating a token is token-managing") {
  auto text = R"(
contract Token {
    mapping(address=>uint) balances;
    function transfer(address to, uint v) public {
        require(balances[msg.sender] >= v);
        balances[msg.sender] = balances[msg.sender] - v;
        balances[to] = balances[to] + v;
        return;
    }
}
contract Ico {
    Token tok;
    constructor() public {
        tok = new Token();
    }
    function distribute(address to, uint v) public {
        tok.transfer(to, v);
        return;
    }
})";
  auto parsed = parse_source(text);
  REQUIRE(parsed.ok());
  const std::vector<ContractAst>& registry = parsed.value();
  auto cats = classify(registry[1], &registry);
  CHECK(cats.count(ContractCategory::TokenManaging) == 1);

  // the managed token's invariant is generated for the managing contract
  KeyVariables kv = find_key_variables(registry[1]);
  auto props = generate_properties(registry[1], kv, cats, &registry);
  REQUIRE(props.ok());
  bool has_inv = false;
  for (const auto& p : props.value())
    if (p.kind == Property::Kind::Invariant) {
      has_inv = true;
      CHECK(p.invariant.contract == "Token");
      CHECK(p.invariant.mapping == "balances");
    }
  CHECK(has_inv);
}

TEST_CASE("property generation on the token example") {
  auto ast = parse_ok(R"(
contract Ex1 {
    mapping(address=>uint) balances;
    function transfer(address to, uint value) public {
        uint fromBalance = balances[msg.sender];
        uint toBalance = balances[to];
        require(fromBalance >= value);
        balances[msg.sender] = fromBalance - value;
        balances[to] = toBalance + value;
        return;
    }
})");
  KeyVariables kv = find_key_variables(ast);
  auto props = generate_properties(ast, kv, classify(ast));
  REQUIRE(props.ok());
  REQUIRE(props.value().size() == 2);
  const Property& inv = props.value()[0];
  CHECK(inv.kind == Property::Kind::Invariant);
  CHECK(inv.invariant.mapping == "balances");
  // accounts written: msg.sender then to
  REQUIRE(inv.invariant.index_keys.size() == 2);
  CHECK(inv.invariant.index_keys[0] == "msg.sender");
  CHECK(inv.invariant.index_keys[1] == "to");
  CHECK_FALSE(inv.invariant.rhs_total_supply);
  CHECK(props.value()[1].kind == Property::Kind::Equivalence);
}

TEST_CASE("totalSupply becomes the invariant's right-hand side") {
  auto ast = parse_ok(R"(
contract T {
    mapping(address=>uint) balances;
    uint totalSupply;
    function mint(address to, uint v) public {
        balances[to] = balances[to] + v;
        totalSupply = totalSupply + v;
        return;
    }
})");
  auto props = generate_properties(ast, find_key_variables(ast), classify(ast));
  REQUIRE(props.ok());
  CHECK(props.value()[0].invariant.rhs_total_supply);
  CHECK(props.value()[0].invariant.total_supply == "totalSupply");
}

TEST_CASE("no property applies to an unrelated contract") {
  auto ast = parse_ok(R"(
contract M {
    uint acc;
    function f(uint x) public {
        acc = x;
        return;
    }
})");
  auto props = generate_properties(ast, find_key_variables(ast), classify(ast));
  REQUIRE_FALSE(props.ok());
  CHECK(props.error().kind == DiagKind::NoPropertyApplicable);
}

TEST_CASE("invariants never come with an empty account set") {
  // read-only key variable: no written index keys, so no invariant
  auto ast = parse_ok(R"(
contract T {
    mapping(address=>uint) balances;
    uint last;
    function peek(address a) public {
        last = balances[a];
        return;
    }
})");
  auto props = generate_properties(ast, find_key_variables(ast), classify(ast));
  REQUIRE(props.ok());
  for (const auto& p : props.value()) {
    if (p.kind != Property::Kind::Invariant) continue;
    CHECK_FALSE(p.invariant.index_keys.empty());
  }
}

TEST_CASE("custom invariant parsing") {
  auto ast = parse_ok(R"(
contract T {
    mapping(address=>uint) credits;
    uint totalSupply;
    function f(address a) public {
        credits[a] = credits[a] + 1;
        totalSupply = totalSupply + 1;
        return;
    }
})");
  auto p = parse_custom_invariant("sum(credits[a], credits[msg.sender]) == totalSupply", ast);
  REQUIRE(p.ok());
  CHECK(p.value().invariant.mapping == "credits");
  REQUIRE(p.value().invariant.index_keys.size() == 2);
  CHECK(p.value().invariant.index_keys[0] == "a");
  CHECK(p.value().invariant.index_keys[1] == "msg.sender");
  CHECK(p.value().invariant.rhs_total_supply);

  CHECK_FALSE(parse_custom_invariant("sum() == const", ast).ok());
  CHECK_FALSE(parse_custom_invariant("sum(unknown[a]) == const", ast).ok());
}
