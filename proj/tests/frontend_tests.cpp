// Licensed to the Apache Software Foundation (ASF) under one
// or more contributor license agreements.  See the NOTICE file
// distributed with this work for additional information
// regarding copyright ownership.  The ASF licenses this file
// to you under the Apache License, Version 2.0 (the
// "License"); you may not use this file except in compliance
// with the License.  You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing,
// software distributed under the License is distributed on an
// "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, either express or implied.  See the License for the
// specific language governing permissions and limitations
// under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>

#include "xq/error.hpp"
#include "xq/frontend.hpp"

using namespace xq;

namespace {

std::string load_query(const std::string& name) {
    std::ifstream in(std::string(XQ_QUERY_DIR) + "/" + name);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("tokenize keywords, names and literals") {
    auto tokens = tokenize("for $r in");
    REQUIRE(tokens.size() == 4); // includes End
    CHECK(tokens[0].kind == TokenKind::For);
    CHECK(tokens[1].kind == TokenKind::Var);
    CHECK(tokens[1].text == "r");
    CHECK(tokens[2].kind == TokenKind::In);

    tokens = tokenize("doc(\"book.xml\")");
    CHECK(tokens[0].kind == TokenKind::Name);
    CHECK(tokens[0].text == "doc");
    CHECK(tokens[1].kind == TokenKind::LParen);
    CHECK(tokens[2].kind == TokenKind::String);
    CHECK(tokens[2].text == "book.xml");
    CHECK(tokens[3].kind == TokenKind::RParen);

    tokens = tokenize("1 div 10");
    CHECK(tokens[0].kind == TokenKind::IntegerLit);
    CHECK(tokens[1].kind == TokenKind::Name);
    CHECK(tokens[1].text == "div");
    CHECK(tokens[2].kind == TokenKind::IntegerLit);

    // Offsets point at the source.
    tokens = tokenize("  $x");
    CHECK(tokens[0].offset == 2);

    CHECK_THROWS_AS(tokenize("a # b"), Error);
    CHECK_THROWS_AS(tokenize("\"unterminated"), Error);

    // Comments are skipped, including nested ones.
    tokens = tokenize("1 (: c (: inner :) :) 2");
    CHECK(tokens.size() == 3);
}

TEST_CASE("all seven query analogues parse") {
    for (const char* name : {"q1.xq", "q2.xq", "q3.xq", "q4.xq", "q5.xq", "q6.xq", "q7.xq"}) {
        INFO(name);
        CHECK_NOTHROW(parse_query(load_query(name)));
    }
}

TEST_CASE("query 1 shape: one for, one let, conjunctive where, return") {
    AstPtr ast = parse_query(load_query("q1.xq"));
    REQUIRE(ast->kind == AstKind::Flwor);
    REQUIRE(ast->clauses.size() == 2);
    CHECK_FALSE(ast->clauses[0].is_let);
    CHECK(ast->clauses[0].var == "r");
    CHECK(ast->clauses[1].is_let);
    CHECK(ast->clauses[1].var == "datetime");
    REQUIRE(ast->where);
    CHECK(ast->where->kind == AstKind::And);
    CHECK(ast->where->args.size() == 4);
    CHECK(ast->ret->kind == AstKind::VarRef);
}

TEST_CASE("path over doc call") {
    AstPtr ast = parse_query("doc(\"book.xml\")/bookstore/book");
    REQUIRE(ast->kind == AstKind::Path);
    CHECK(ast->name == "book");
    REQUIRE(ast->args[0]->kind == AstKind::Path);
    CHECK(ast->args[0]->name == "bookstore");
    CHECK(ast->args[0]->args[0]->kind == AstKind::FnCall);
    CHECK(ast->args[0]->args[0]->name == "doc");
}

TEST_CASE("syntax errors carry offsets") {
    try {
        parse_query("(");
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Syntax);
        CHECK(std::string(e.what()).find("offset 1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_query("for $x in"), Error);
    CHECK_THROWS_AS(parse_query("1 +"), Error);
    CHECK_THROWS_AS(parse_query("doc(\"a\" \"b\")"), Error);
}

TEST_CASE("normalization expands steps into the explicit core form") {
    AstPtr core = normalize(parse_query("doc(\"book.xml\")/bookstore"));
    // sort-distinct over a per-item child application with a treat guard.
    REQUIRE(core->kind == AstKind::FnCall);
    CHECK(core->name == "sort-distinct-nodes-asc-or-atomics");
    REQUIRE(core->args[0]->kind == AstKind::ForEach);
    const AstPtr& body = core->args[0]->args[1];
    REQUIRE(body->kind == AstKind::FnCall);
    CHECK(body->name == "child");
    CHECK(body->args[0]->kind == AstKind::FnCall);
    CHECK(body->args[0]->name == "treat");
    CHECK(body->args[0]->args[1]->name == "element_node");
    CHECK(body->args[1]->literal.as_string() == "bookstore");

    // The doc argument gains promote/data coercions.
    const AstPtr& source = core->args[0]->args[0];
    REQUIRE(source->name == "doc");
    CHECK(source->args[0]->name == "promote");
    CHECK(source->args[0]->args[0]->name == "data");
}

TEST_CASE("a bare variable reference stays wrapper free") {
    AstPtr core = normalize(parse_query("for $x in collection(\"/c\")/a/b return $x"));
    CHECK(core->ret->kind == AstKind::VarRef);
}

TEST_CASE("where conditions split into boolean-wrapped conjuncts") {
    AstPtr core = normalize(parse_query(load_query("q4.xq")));
    REQUIRE(core->kind == AstKind::Flwor);
    CHECK(core->where == nullptr);
    REQUIRE(core->where_conjuncts.size() == 3);
    for (const AstPtr& conjunct : core->where_conjuncts) {
        REQUIRE(conjunct->kind == AstKind::FnCall);
        CHECK(conjunct->name == "boolean");
    }
    // The quantified conjunct keeps its bound variable and wraps its
    // satisfies clause in an effective boolean value.
    const AstPtr& some = core->where_conjuncts[1]->args[0];
    REQUIRE(some->kind == AstKind::Quantified);
    CHECK(some->name == "x");
    CHECK(some->args[1]->name == "boolean");
}

TEST_CASE("comparison operands atomize explicitly") {
    AstPtr core = normalize(parse_query("for $r in collection(\"/c\")/a/b "
                                        "where $r/station eq \"X\" return $r"));
    const AstPtr& conjunct = core->where_conjuncts[0]->args[0];
    REQUIRE(conjunct->name == "value-eq");
    REQUIRE(conjunct->args[0]->name == "data");
    // Steps in atomizing context collapse to scalar child chains.
    CHECK(conjunct->args[0]->args[0]->name == "child");
    CHECK(conjunct->args[1]->kind == AstKind::Literal);
}

TEST_CASE("unbound variables are bind errors") {
    CHECK_THROWS_WITH_AS(normalize(parse_query("$nope")), doctest::Contains("nope"), Error);
    CHECK_THROWS_AS(normalize(parse_query("for $x in $y return $x")), Error);
    // Quantifier variables scope to the satisfies clause only.
    CHECK_THROWS_AS(
        normalize(parse_query("(some $q in collection(\"/c\")/a satisfies $q) and $q")), Error);
}

namespace {

// Random surface trees for the round-trip property.
struct AstGen {
    std::mt19937 rng;
    std::vector<std::string> scope;

    explicit AstGen(uint32_t seed) : rng(seed) {}

    std::string fresh_var() {
        std::string name = "v" + std::to_string(scope.size());
        scope.push_back(name);
        return name;
    }

    AstPtr literal() {
        switch (rng() % 3) {
            case 0: return ast_literal(AtomicValue::integer(static_cast<int64_t>(rng() % 1000)));
            case 1: {
                std::string text = "s" + std::to_string(rng() % 50);
                return ast_literal(AtomicValue::string_value(text));
            }
            default:
                return ast_literal(AtomicValue::decimal(*Decimal::parse(
                    std::to_string(rng() % 100) + "." + std::to_string(1 + rng() % 9))));
        }
    }

    AstPtr expr(int depth) {
        if (depth <= 0 || rng() % 4 == 0) {
            if (!scope.empty() && rng() % 2) return ast_var(scope[rng() % scope.size()]);
            return literal();
        }
        switch (rng() % 8) {
            case 0: { // path step
                AstPtr base = expr(depth - 1);
                auto step = std::make_shared<AstNode>();
                step->kind = AstKind::Path;
                step->name = "n" + std::to_string(rng() % 5);
                step->attribute_step = rng() % 5 == 0;
                step->args = {std::move(base)};
                return step;
            }
            case 1: { // comparison
                auto node = std::make_shared<AstNode>();
                node->kind = AstKind::Compare;
                node->cmp = static_cast<CompareOp>(rng() % 6);
                node->general_comparison = rng() % 3 == 0;
                node->args = {expr(depth - 1), expr(depth - 1)};
                return node;
            }
            case 2: { // arithmetic
                auto node = std::make_shared<AstNode>();
                node->kind = AstKind::Arith;
                node->arith = static_cast<ArithOp>(rng() % 4);
                node->args = {expr(depth - 1), expr(depth - 1)};
                return node;
            }
            case 3: { // and/or
                auto node = std::make_shared<AstNode>();
                node->kind = rng() % 2 ? AstKind::And : AstKind::Or;
                node->args = {expr(depth - 1), expr(depth - 1)};
                return node;
            }
            case 4: { // function call
                static const char* fns[] = {"count", "data", "boolean", "upper-case", "decimal"};
                return ast_call(fns[rng() % 5], {expr(depth - 1)});
            }
            case 5: { // flwor
                auto node = std::make_shared<AstNode>();
                node->kind = AstKind::Flwor;
                size_t saved = scope.size();
                FlworClause clause;
                clause.is_let = rng() % 2;
                clause.source = expr(depth - 1);
                clause.var = fresh_var();
                node->clauses.push_back(clause);
                if (rng() % 2) node->where = expr(depth - 1);
                node->ret = expr(depth - 1);
                scope.resize(saved);
                return node;
            }
            case 6: { // quantified
                size_t saved = scope.size();
                AstPtr source = expr(depth - 1);
                std::string var = fresh_var();
                AstPtr cond = expr(depth - 1);
                scope.resize(saved);
                return ast_quantified(var, std::move(source), std::move(cond));
            }
            default: { // sequence constructor
                auto node = std::make_shared<AstNode>();
                node->kind = AstKind::SequenceCtor;
                int items = 2 + rng() % 3;
                for (int i = 0; i < items; ++i) node->args.push_back(expr(depth - 1));
                return node;
            }
        }
    }
};

} // namespace

TEST_CASE("parse of printed random trees round-trips structurally") {
    for (uint32_t seed = 0; seed < 150; ++seed) {
        AstGen gen(seed);
        AstPtr ast = gen.expr(4);
        std::string text = ast_to_query(ast);
        INFO(text);
        AstPtr reparsed;
        REQUIRE_NOTHROW(reparsed = parse_query(text));
        CHECK(ast_equal(ast, reparsed));
    }
}

TEST_CASE("normalize is idempotent") {
    std::vector<std::string> corpus = {"q1.xq", "q2.xq", "q3.xq", "q4.xq",
                                       "q5.xq", "q6.xq", "q7.xq", "rainfall.xq"};
    for (const std::string& name : corpus) {
        AstPtr once = normalize(parse_query(load_query(name)));
        AstPtr twice = normalize(once);
        INFO(name);
        CHECK(ast_equal(once, twice));
    }
    CHECK_NOTHROW(normalize(normalize(parse_query("doc(\"b.xml\")/a/b"))));
    AstPtr once = normalize(parse_query("doc(\"b.xml\")/a/b"));
    CHECK(ast_equal(once, normalize(once)));
}
