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

#include <unordered_set>

#include "xq/error.hpp"
#include "xq/frontend.hpp"

namespace xq {

namespace {

const std::unordered_set<std::string>& type_names() {
    static const std::unordered_set<std::string> names = {
        "element_node", "document_node", "node", "any_type", "string",  "integer",
        "decimal",      "double",        "boolean", "dateTime", "date", "untypedAtomic",
    };
    return names;
}

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    AstPtr parse() {
        AstPtr expr = parse_expr_single();
        expect(TokenKind::End, "end of query");
        return expr;
    }

  private:
    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }

    const Token& advance() { return tokens_[pos_++]; }

    bool accept(TokenKind kind) {
        if (peek().kind == kind) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& expected) const {
        const Token& tok = peek();
        raise(ErrorKind::Syntax, "expected " + expected + " at offset " + std::to_string(tok.offset) +
                                     (tok.text.empty() ? "" : " (found \"" + tok.text + "\")"));
    }

    const Token& expect(TokenKind kind, const std::string& what) {
        if (peek().kind != kind) fail(what);
        return advance();
    }

    bool name_is(std::string_view word) const {
        return peek().kind == TokenKind::Name && peek().text == word;
    }

    AstPtr parse_expr_single() {
        switch (peek().kind) {
            case TokenKind::For:
            case TokenKind::Let: return parse_flwor();
            case TokenKind::Some: return parse_quantified();
            default: return parse_or();
        }
    }

    AstPtr parse_flwor() {
        auto node = std::make_shared<AstNode>();
        node->kind = AstKind::Flwor;
        node->offset = peek().offset;
        while (peek().kind == TokenKind::For || peek().kind == TokenKind::Let) {
            bool is_let = advance().kind == TokenKind::Let;
            while (true) {
                FlworClause clause;
                clause.is_let = is_let;
                clause.var = expect(TokenKind::Var, "variable binding").text;
                if (is_let) expect(TokenKind::Assign, "\":=\"");
                else expect(TokenKind::In, "\"in\"");
                clause.source = parse_expr_single();
                node->clauses.push_back(std::move(clause));
                if (!accept(TokenKind::Comma)) break;
            }
        }
        if (node->clauses.empty()) fail("for or let clause");
        if (accept(TokenKind::Where)) node->where = parse_expr_single();
        expect(TokenKind::Return, "\"return\"");
        node->ret = parse_expr_single();
        return node;
    }

    AstPtr parse_quantified() {
        uint32_t offset = peek().offset;
        expect(TokenKind::Some, "\"some\"");
        std::string var = expect(TokenKind::Var, "variable binding").text;
        expect(TokenKind::In, "\"in\"");
        AstPtr source = parse_expr_single();
        expect(TokenKind::Satisfies, "\"satisfies\"");
        AstPtr cond = parse_expr_single();
        return ast_quantified(std::move(var), std::move(source), std::move(cond), offset);
    }

    AstPtr parse_or() {
        AstPtr lhs = parse_and();
        if (peek().kind != TokenKind::Or) return lhs;
        auto node = std::make_shared<AstNode>();
        node->kind = AstKind::Or;
        node->offset = lhs->offset;
        node->args.push_back(std::move(lhs));
        while (accept(TokenKind::Or)) node->args.push_back(parse_and());
        return node;
    }

    AstPtr parse_and() {
        AstPtr lhs = parse_comparison();
        if (peek().kind != TokenKind::And) return lhs;
        auto node = std::make_shared<AstNode>();
        node->kind = AstKind::And;
        node->offset = lhs->offset;
        node->args.push_back(std::move(lhs));
        while (accept(TokenKind::And)) node->args.push_back(parse_comparison());
        return node;
    }

    bool comparison_op(CompareOp* op, bool* general) {
        switch (peek().kind) {
            case TokenKind::EqGeneral: *op = CompareOp::Eq; *general = true; return true;
            case TokenKind::NeGeneral: *op = CompareOp::Ne; *general = true; return true;
            case TokenKind::LtGeneral: *op = CompareOp::Lt; *general = true; return true;
            case TokenKind::LeGeneral: *op = CompareOp::Le; *general = true; return true;
            case TokenKind::GtGeneral: *op = CompareOp::Gt; *general = true; return true;
            case TokenKind::GeGeneral: *op = CompareOp::Ge; *general = true; return true;
            case TokenKind::Name: {
                const std::string& w = peek().text;
                *general = false;
                if (w == "eq") *op = CompareOp::Eq;
                else if (w == "ne") *op = CompareOp::Ne;
                else if (w == "lt") *op = CompareOp::Lt;
                else if (w == "le") *op = CompareOp::Le;
                else if (w == "gt") *op = CompareOp::Gt;
                else if (w == "ge") *op = CompareOp::Ge;
                else return false;
                // A comparison word must be followed by an operand, not by
                // '(' (which would make it a function call position) here.
                return true;
            }
            default: return false;
        }
    }

    AstPtr parse_comparison() {
        AstPtr lhs = parse_additive();
        CompareOp op;
        bool general;
        if (!comparison_op(&op, &general)) return lhs;
        advance();
        AstPtr rhs = parse_additive();
        auto node = std::make_shared<AstNode>();
        node->kind = AstKind::Compare;
        node->offset = lhs->offset;
        node->cmp = op;
        node->general_comparison = general;
        node->args = {std::move(lhs), std::move(rhs)};
        return node;
    }

    AstPtr parse_additive() {
        AstPtr lhs = parse_multiplicative();
        while (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus) {
            ArithOp op = advance().kind == TokenKind::Plus ? ArithOp::Add : ArithOp::Subtract;
            AstPtr rhs = parse_multiplicative();
            auto node = std::make_shared<AstNode>();
            node->kind = AstKind::Arith;
            node->offset = lhs->offset;
            node->arith = op;
            node->args = {std::move(lhs), std::move(rhs)};
            lhs = node;
        }
        return lhs;
    }

    AstPtr parse_multiplicative() {
        AstPtr lhs = parse_path();
        while (peek().kind == TokenKind::Star || name_is("div")) {
            ArithOp op = advance().kind == TokenKind::Star ? ArithOp::Multiply : ArithOp::Divide;
            AstPtr rhs = parse_path();
            auto node = std::make_shared<AstNode>();
            node->kind = AstKind::Arith;
            node->offset = lhs->offset;
            node->arith = op;
            node->args = {std::move(lhs), std::move(rhs)};
            lhs = node;
        }
        return lhs;
    }

    AstPtr parse_path() {
        AstPtr base = parse_primary();
        while (accept(TokenKind::Slash)) {
            auto step = std::make_shared<AstNode>();
            step->kind = AstKind::Path;
            step->offset = base->offset;
            step->attribute_step = accept(TokenKind::At);
            if (peek().kind != TokenKind::Name && peek().kind != TokenKind::And &&
                peek().kind != TokenKind::Or && peek().kind != TokenKind::In)
                fail("step name");
            step->name = advance().text;
            step->args = {std::move(base)};
            base = step;
        }
        return base;
    }

    AstPtr parse_primary() {
        const Token& tok = peek();
        switch (tok.kind) {
            case TokenKind::Var: {
                advance();
                return ast_var(tok.text, tok.offset);
            }
            case TokenKind::String: {
                advance();
                return ast_literal(AtomicValue::string_value(tok.text), tok.offset);
            }
            case TokenKind::IntegerLit: {
                advance();
                return ast_literal(AtomicValue::integer(std::stoll(tok.text)), tok.offset);
            }
            case TokenKind::DecimalLit: {
                advance();
                auto d = Decimal::parse(tok.text);
                if (!d) raise(ErrorKind::Syntax, "decimal literal out of range at offset " +
                                                     std::to_string(tok.offset));
                return ast_literal(AtomicValue::decimal(*d), tok.offset);
            }
            case TokenKind::DoubleLit: {
                advance();
                return ast_literal(AtomicValue::double_value(std::stod(tok.text)), tok.offset);
            }
            case TokenKind::LParen: {
                advance();
                if (accept(TokenKind::RParen)) {
                    auto node = std::make_shared<AstNode>();
                    node->kind = AstKind::SequenceCtor;
                    node->offset = tok.offset;
                    return node;
                }
                AstPtr first = parse_expr_single();
                if (peek().kind != TokenKind::Comma) {
                    expect(TokenKind::RParen, "\")\"");
                    return first;
                }
                auto node = std::make_shared<AstNode>();
                node->kind = AstKind::SequenceCtor;
                node->offset = tok.offset;
                node->args.push_back(std::move(first));
                while (accept(TokenKind::Comma)) node->args.push_back(parse_expr_single());
                expect(TokenKind::RParen, "\")\"");
                return node;
            }
            case TokenKind::Name: {
                if (peek(1).kind == TokenKind::LParen) return parse_function_call();
                fail("expression");
            }
            default: fail("expression");
        }
    }

    AstPtr parse_function_call() {
        const Token& name_tok = advance();
        expect(TokenKind::LParen, "\"(\"");
        std::vector<AstPtr> args;
        if (peek().kind != TokenKind::RParen) {
            while (true) {
                // treat/promote take a bare type name as their second argument.
                if (peek().kind == TokenKind::Name && peek(1).kind != TokenKind::LParen &&
                    type_names().count(peek().text) &&
                    (name_tok.text == "treat" || name_tok.text == "promote") && !args.empty()) {
                    const Token& t = advance();
                    args.push_back(ast_type_name(t.text, t.offset));
                } else {
                    args.push_back(parse_expr_single());
                }
                if (!accept(TokenKind::Comma)) break;
            }
        }
        expect(TokenKind::RParen, "\")\"");
        return ast_call(name_tok.text, std::move(args), name_tok.offset);
    }

    std::vector<Token> tokens_;
    size_t pos_ = 0;
};

} // namespace

AstPtr parse_query(std::string_view text) {
    return Parser(tokenize(text)).parse();
}

} // namespace xq
