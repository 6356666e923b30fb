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

const char* value_compare_symbol(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "value-eq";
        case CompareOp::Ne: return "value-ne";
        case CompareOp::Lt: return "value-lt";
        case CompareOp::Le: return "value-le";
        case CompareOp::Gt: return "value-gt";
        case CompareOp::Ge: return "value-ge";
    }
    return "value-eq";
}

const char* general_compare_symbol(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "general-eq";
        case CompareOp::Ne: return "general-ne";
        case CompareOp::Lt: return "general-lt";
        case CompareOp::Le: return "general-le";
        case CompareOp::Gt: return "general-gt";
        case CompareOp::Ge: return "general-ge";
    }
    return "general-eq";
}

const char* arith_symbol(ArithOp op) {
    switch (op) {
        case ArithOp::Add: return "add";
        case ArithOp::Subtract: return "subtract";
        case ArithOp::Multiply: return "multiply";
        case ArithOp::Divide: return "divide";
    }
    return "add";
}

bool is_call(const AstPtr& node, std::string_view fn) {
    return node->kind == AstKind::FnCall && node->name == fn;
}

bool is_aggregate_fn(std::string_view fn) {
    return fn == "count" || fn == "sum" || fn == "min" || fn == "max" || fn == "avg";
}

class Normalizer {
  public:
    AstPtr run(const AstPtr& ast) { return normalize_expr(ast, false); }

  private:
    std::string fresh_step_var() { return "#s" + std::to_string(next_step_++); }

    AstPtr wrap_data(AstPtr node) {
        if (is_call(node, "data") || node->kind == AstKind::Literal) return node;
        return ast_call("data", {std::move(node)});
    }

    void check_bound(const AstNode& node) {
        if (!scope_.count(node.name))
            raise(ErrorKind::Bind, "unbound variable $" + node.name);
    }

    // atomizing: the value is about to be atomized (comparison operand or
    // data() argument), so path steps stay scalar child chains.
    AstPtr normalize_expr(const AstPtr& node, bool atomizing) {
        switch (node->kind) {
            case AstKind::Literal:
            case AstKind::TypeName: return node;
            case AstKind::VarRef:
                check_bound(*node);
                return node;
            case AstKind::Path: return normalize_step(node, atomizing);
            case AstKind::Compare: {
                AstPtr lhs = wrap_data(normalize_expr(node->args[0], true));
                AstPtr rhs = wrap_data(normalize_expr(node->args[1], true));
                const char* symbol = node->general_comparison ? general_compare_symbol(node->cmp)
                                                              : value_compare_symbol(node->cmp);
                return ast_call(symbol, {std::move(lhs), std::move(rhs)}, node->offset);
            }
            case AstKind::Arith: {
                AstPtr lhs = wrap_data(normalize_expr(node->args[0], true));
                AstPtr rhs = wrap_data(normalize_expr(node->args[1], true));
                return ast_call(arith_symbol(node->arith), {std::move(lhs), std::move(rhs)}, node->offset);
            }
            case AstKind::And:
            case AstKind::Or: {
                std::vector<AstPtr> args;
                args.reserve(node->args.size());
                for (const AstPtr& arg : node->args) args.push_back(normalize_expr(arg, false));
                return ast_call(node->kind == AstKind::And ? "and" : "or", std::move(args), node->offset);
            }
            case AstKind::SequenceCtor: {
                std::vector<AstPtr> args;
                args.reserve(node->args.size());
                for (const AstPtr& arg : node->args) args.push_back(normalize_expr(arg, false));
                return ast_call("sequence", std::move(args), node->offset);
            }
            case AstKind::Flwor: return normalize_flwor(node);
            case AstKind::Quantified: {
                AstPtr source = normalize_expr(node->args[0], false);
                scope_.insert(node->name);
                AstPtr cond = ensure_boolean(normalize_expr(node->args[1], false));
                scope_.erase(node->name);
                return ast_quantified(node->name, std::move(source), std::move(cond), node->offset);
            }
            case AstKind::ForEach: {
                AstPtr source = normalize_expr(node->args[0], false);
                scope_.insert(node->name);
                AstPtr body = normalize_expr(node->args[1], false);
                scope_.erase(node->name);
                return ast_foreach(node->name, std::move(source), std::move(body));
            }
            case AstKind::FnCall: return normalize_call(node, atomizing);
        }
        raise(ErrorKind::Internal, "unhandled node kind in normalize");
    }

    AstPtr ensure_boolean(AstPtr node) {
        if (is_call(node, "boolean")) return node;
        return ast_call("boolean", {std::move(node)});
    }

    AstPtr normalize_step(const AstPtr& node, bool atomizing) {
        const char* axis_fn = node->attribute_step ? "attribute" : "child";
        if (atomizing) {
            AstPtr base = normalize_expr(node->args[0], true);
            return ast_call(axis_fn, {std::move(base), ast_literal(AtomicValue::string_value(node->name))},
                            node->offset);
        }
        AstPtr base = normalize_expr(node->args[0], false);
        std::string item_var = fresh_step_var();
        AstPtr treat = ast_call("treat", {ast_var(item_var), ast_type_name("element_node")});
        AstPtr step = ast_call(axis_fn,
                               {std::move(treat), ast_literal(AtomicValue::string_value(node->name))},
                               node->offset);
        AstPtr each = ast_foreach(item_var, std::move(base), std::move(step));
        return ast_call("sort-distinct-nodes-asc-or-atomics", {std::move(each)}, node->offset);
    }

    AstPtr normalize_flwor(const AstPtr& node) {
        auto out = std::make_shared<AstNode>();
        out->kind = AstKind::Flwor;
        out->offset = node->offset;
        std::vector<std::string> bound_here;
        for (const FlworClause& clause : node->clauses) {
            FlworClause normalized;
            normalized.is_let = clause.is_let;
            normalized.var = clause.var;
            normalized.source = normalize_expr(clause.source, false);
            if (scope_.insert(clause.var).second) bound_here.push_back(clause.var);
            out->clauses.push_back(std::move(normalized));
        }
        if (node->where) {
            collect_conjuncts(node->where, &out->where_conjuncts);
        } else {
            for (const AstPtr& conjunct : node->where_conjuncts)
                out->where_conjuncts.push_back(ensure_boolean(normalize_expr(conjunct, false)));
        }
        out->ret = normalize_expr(node->ret, false);
        for (const std::string& var : bound_here) scope_.erase(var);
        return out;
    }

    // Top-level conjunctions split into one condition per SELECT site.
    void collect_conjuncts(const AstPtr& cond, std::vector<AstPtr>* out) {
        if (cond->kind == AstKind::And) {
            for (const AstPtr& arg : cond->args) collect_conjuncts(arg, out);
            return;
        }
        out->push_back(ensure_boolean(normalize_expr(cond, false)));
    }

    AstPtr normalize_call(const AstPtr& node, bool atomizing) {
        const std::string& fn = node->name;
        if (fn == "data") {
            if (node->args.size() != 1)
                raise(ErrorKind::Translation, "data expects one argument");
            return ast_call("data", {normalize_expr(node->args[0], true)}, node->offset);
        }
        if (fn == "doc" || fn == "collection") {
            if (node->args.size() != 1)
                raise(ErrorKind::Translation, fn + " expects one argument");
            AstPtr arg = node->args[0];
            if (is_call(arg, "promote")) {
                // Already coerced.
                return ast_call(fn, {normalize_expr(arg, false)}, node->offset);
            }
            AstPtr inner = normalize_expr(arg, true);
            if (!is_call(inner, "data")) inner = ast_call("data", {std::move(inner)});
            AstPtr coerced = ast_call("promote", {std::move(inner), ast_type_name("string")});
            return ast_call(fn, {std::move(coerced)}, node->offset);
        }
        if (is_aggregate_fn(fn)) {
            if (node->args.size() != 1)
                raise(ErrorKind::Translation, fn + " expects one argument");
            AstPtr arg = node->args[0];
            if (is_call(arg, "treat")) return ast_call(fn, {normalize_expr(arg, false)}, node->offset);
            AstPtr wrapped =
                ast_call("treat", {normalize_expr(arg, false), ast_type_name("any_type")});
            return ast_call(fn, {std::move(wrapped)}, node->offset);
        }
        if (fn == "boolean") {
            if (node->args.size() != 1)
                raise(ErrorKind::Translation, "boolean expects one argument");
            return ast_call("boolean", {normalize_expr(node->args[0], false)}, node->offset);
        }
        std::vector<AstPtr> args;
        args.reserve(node->args.size());
        for (const AstPtr& arg : node->args) args.push_back(normalize_expr(arg, false));
        return ast_call(fn, std::move(args), node->offset);
    }

    std::unordered_set<std::string> scope_;
    uint32_t next_step_ = 0;
};

} // namespace

AstPtr normalize(const AstPtr& ast) {
    return Normalizer().run(ast);
}

} // namespace xq
