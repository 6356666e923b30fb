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

#include "xq/ast.hpp"

#include "xq/error.hpp"

namespace xq {

AstPtr ast_literal(AtomicValue value, uint32_t offset) {
    auto node = std::make_shared<AstNode>();
    node->kind = AstKind::Literal;
    node->literal = std::move(value);
    node->offset = offset;
    return node;
}

AstPtr ast_var(std::string name, uint32_t offset) {
    auto node = std::make_shared<AstNode>();
    node->kind = AstKind::VarRef;
    node->name = std::move(name);
    node->offset = offset;
    return node;
}

AstPtr ast_call(std::string fn, std::vector<AstPtr> args, uint32_t offset) {
    auto node = std::make_shared<AstNode>();
    node->kind = AstKind::FnCall;
    node->name = std::move(fn);
    node->args = std::move(args);
    node->offset = offset;
    return node;
}

AstPtr ast_type_name(std::string name, uint32_t offset) {
    auto node = std::make_shared<AstNode>();
    node->kind = AstKind::TypeName;
    node->name = std::move(name);
    node->offset = offset;
    return node;
}

AstPtr ast_foreach(std::string var, AstPtr source, AstPtr body) {
    auto node = std::make_shared<AstNode>();
    node->kind = AstKind::ForEach;
    node->name = std::move(var);
    node->args = {std::move(source), std::move(body)};
    return node;
}

AstPtr ast_quantified(std::string var, AstPtr source, AstPtr cond, uint32_t offset) {
    auto node = std::make_shared<AstNode>();
    node->kind = AstKind::Quantified;
    node->name = std::move(var);
    node->args = {std::move(source), std::move(cond)};
    node->offset = offset;
    return node;
}

namespace {

const char* compare_word(CompareOp op, bool general) {
    switch (op) {
        case CompareOp::Eq: return general ? "=" : "eq";
        case CompareOp::Ne: return general ? "!=" : "ne";
        case CompareOp::Lt: return general ? "<" : "lt";
        case CompareOp::Le: return general ? "<=" : "le";
        case CompareOp::Gt: return general ? ">" : "gt";
        case CompareOp::Ge: return general ? ">=" : "ge";
    }
    return "eq";
}

const char* arith_word(ArithOp op) {
    switch (op) {
        case ArithOp::Add: return "+";
        case ArithOp::Subtract: return "-";
        case ArithOp::Multiply: return "*";
        case ArithOp::Divide: return "div";
    }
    return "+";
}

void print_string_literal(std::string_view text, std::string& out) {
    out.push_back('"');
    for (char c : text) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
}

void print_node(const AstPtr& node, std::string& out);

// FLWOR and quantified expressions bind to the end of the expression, so as
// operands of binary operators or path bases they need parentheses to
// round-trip.
void print_operand(const AstPtr& node, std::string& out) {
    bool wrap = node->kind == AstKind::Flwor || node->kind == AstKind::Quantified;
    if (wrap) out.push_back('(');
    print_node(node, out);
    if (wrap) out.push_back(')');
}

void print_node(const AstPtr& node, std::string& out) {
    switch (node->kind) {
        case AstKind::Literal: {
            const AtomicValue& v = node->literal;
            if (v.is_string_family()) print_string_literal(v.as_string(), out);
            else out += v.lexical();
            break;
        }
        case AstKind::VarRef:
            out.push_back('$');
            out += node->name;
            break;
        case AstKind::TypeName:
            out += node->name;
            break;
        case AstKind::FnCall: {
            out += node->name;
            out.push_back('(');
            for (size_t i = 0; i < node->args.size(); ++i) {
                if (i) out += ", ";
                print_node(node->args[i], out);
            }
            out.push_back(')');
            break;
        }
        case AstKind::Compare: {
            out.push_back('(');
            print_operand(node->args[0], out);
            out.push_back(' ');
            out += compare_word(node->cmp, node->general_comparison);
            out.push_back(' ');
            print_operand(node->args[1], out);
            out.push_back(')');
            break;
        }
        case AstKind::Arith: {
            out.push_back('(');
            print_operand(node->args[0], out);
            out.push_back(' ');
            out += arith_word(node->arith);
            out.push_back(' ');
            print_operand(node->args[1], out);
            out.push_back(')');
            break;
        }
        case AstKind::And:
        case AstKind::Or: {
            out.push_back('(');
            for (size_t i = 0; i < node->args.size(); ++i) {
                if (i) out += node->kind == AstKind::And ? " and " : " or ";
                print_operand(node->args[i], out);
            }
            out.push_back(')');
            break;
        }
        case AstKind::Path:
            print_operand(node->args[0], out);
            out.push_back('/');
            if (node->attribute_step) out.push_back('@');
            out += node->name;
            break;
        case AstKind::SequenceCtor: {
            out.push_back('(');
            for (size_t i = 0; i < node->args.size(); ++i) {
                if (i) out += ", ";
                print_node(node->args[i], out);
            }
            out.push_back(')');
            break;
        }
        case AstKind::Flwor: {
            for (const FlworClause& clause : node->clauses) {
                out += clause.is_let ? "let $" : "for $";
                out += clause.var;
                out += clause.is_let ? " := " : " in ";
                print_operand(clause.source, out);
                out.push_back(' ');
            }
            if (node->where) {
                out += "where ";
                print_operand(node->where, out);
                out.push_back(' ');
            }
            out += "return ";
            print_node(node->ret, out);
            break;
        }
        case AstKind::Quantified: {
            out += "some $";
            out += node->name;
            out += " in ";
            print_node(node->args[0], out);
            out += " satisfies ";
            print_node(node->args[1], out);
            break;
        }
        case AstKind::ForEach:
            // Core-only form; no surface syntax. Printed for diagnostics.
            out += "for-each($";
            out += node->name;
            out += ", ";
            print_node(node->args[0], out);
            out += ", ";
            print_node(node->args[1], out);
            out.push_back(')');
            break;
    }
}

} // namespace

std::string ast_to_query(const AstPtr& node) {
    std::string out;
    print_node(node, out);
    return out;
}

bool ast_equal(const AstPtr& a, const AstPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->name != b->name || a->attribute_step != b->attribute_step) return false;
    if (a->kind == AstKind::Literal &&
        (a->literal.kind() != b->literal.kind() || !a->literal.equals(b->literal)))
        return false;
    if (a->kind == AstKind::Compare &&
        (a->cmp != b->cmp || a->general_comparison != b->general_comparison))
        return false;
    if (a->kind == AstKind::Arith && a->arith != b->arith) return false;
    if (a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!ast_equal(a->args[i], b->args[i])) return false;
    if (a->clauses.size() != b->clauses.size()) return false;
    for (size_t i = 0; i < a->clauses.size(); ++i) {
        if (a->clauses[i].is_let != b->clauses[i].is_let || a->clauses[i].var != b->clauses[i].var)
            return false;
        if (!ast_equal(a->clauses[i].source, b->clauses[i].source)) return false;
    }
    if ((a->where != nullptr) != (b->where != nullptr)) return false;
    if (a->where && !ast_equal(a->where, b->where)) return false;
    if (a->where_conjuncts.size() != b->where_conjuncts.size()) return false;
    for (size_t i = 0; i < a->where_conjuncts.size(); ++i)
        if (!ast_equal(a->where_conjuncts[i], b->where_conjuncts[i])) return false;
    if ((a->ret != nullptr) != (b->ret != nullptr)) return false;
    if (a->ret && !ast_equal(a->ret, b->ret)) return false;
    return true;
}

} // namespace xq
