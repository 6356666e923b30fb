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

#include "xq/algebra.hpp"

#include <map>
#include <unordered_map>
#include <unordered_set>

#include "xq/error.hpp"

namespace xq {

PlanExprPtr pe_var(VarId var) {
    auto e = std::make_shared<PlanExpr>();
    e->kind = PlanExprKind::Variable;
    e->var = var;
    return e;
}

PlanExprPtr pe_literal(AtomicValue value) {
    auto e = std::make_shared<PlanExpr>();
    e->kind = PlanExprKind::Literal;
    e->literal = std::move(value);
    return e;
}

PlanExprPtr pe_type(std::string name) {
    auto e = std::make_shared<PlanExpr>();
    e->kind = PlanExprKind::TypeName;
    e->symbol = std::move(name);
    return e;
}

PlanExprPtr pe_call(std::string symbol, std::vector<PlanExprPtr> args) {
    auto e = std::make_shared<PlanExpr>();
    e->kind = PlanExprKind::Call;
    e->symbol = std::move(symbol);
    e->args = std::move(args);
    return e;
}

PlanExprPtr pe_quantified(VarId var, PlanExprPtr source, PlanExprPtr cond) {
    auto e = std::make_shared<PlanExpr>();
    e->kind = PlanExprKind::Quantified;
    e->var = var;
    e->args = {std::move(source), std::move(cond)};
    return e;
}

PlanExprPtr pe_foreach(VarId var, PlanExprPtr source, PlanExprPtr body) {
    auto e = std::make_shared<PlanExpr>();
    e->kind = PlanExprKind::ForEach;
    e->var = var;
    e->args = {std::move(source), std::move(body)};
    return e;
}

bool expr_is_call(const PlanExprPtr& expr, std::string_view symbol) {
    return expr && expr->kind == PlanExprKind::Call && expr->symbol == symbol;
}

const char* logical_op_name(LogicalOpKind kind) {
    switch (kind) {
        case LogicalOpKind::DataScan: return "DATASCAN";
        case LogicalOpKind::Assign: return "ASSIGN";
        case LogicalOpKind::DistributeResult: return "DISTRIBUTE-RESULT";
        case LogicalOpKind::EmptyTupleSource: return "EMPTY-TUPLE-SOURCE";
        case LogicalOpKind::Join: return "JOIN";
        case LogicalOpKind::Aggregate: return "AGGREGATE";
        case LogicalOpKind::Unnest: return "UNNEST";
        case LogicalOpKind::Select: return "SELECT";
        case LogicalOpKind::Subplan: return "SUBPLAN";
        case LogicalOpKind::NestedTupleSource: return "NESTED-TUPLE-SOURCE";
    }
    return "?";
}

const char* agg_fn_name(AggFn fn) {
    switch (fn) {
        case AggFn::Count: return "count";
        case AggFn::Sum: return "sum";
        case AggFn::Min: return "min";
        case AggFn::Max: return "max";
        case AggFn::Avg: return "avg";
    }
    return "count";
}

LogicalOpPtr make_op(LogicalOpKind kind) {
    auto op = std::make_shared<LogicalOp>();
    op->kind = kind;
    return op;
}

namespace {

LogicalOpPtr clone_op(const LogicalOpPtr& op) {
    auto out = std::make_shared<LogicalOp>(*op);
    for (LogicalOpPtr& input : out->inputs) input = clone_op(input);
    for (LogicalOpPtr& nested : out->nested) nested = clone_op(nested);
    return out;
}

} // namespace

LogicalPlan clone_plan(const LogicalPlan& plan) {
    LogicalPlan out = plan;
    out.root = clone_op(plan.root);
    return out;
}

namespace {

void expr_variables_into(const PlanExprPtr& expr, std::set<VarId>* out,
                         std::set<VarId>* bound) {
    if (!expr) return;
    switch (expr->kind) {
        case PlanExprKind::Variable:
            if (!bound->count(expr->var)) out->insert(expr->var);
            return;
        case PlanExprKind::Literal:
        case PlanExprKind::TypeName: return;
        case PlanExprKind::Call:
            for (const PlanExprPtr& arg : expr->args) expr_variables_into(arg, out, bound);
            return;
        case PlanExprKind::Quantified:
        case PlanExprKind::ForEach: {
            expr_variables_into(expr->args[0], out, bound);
            bool inserted = bound->insert(expr->var).second;
            expr_variables_into(expr->args[1], out, bound);
            if (inserted) bound->erase(expr->var);
            return;
        }
    }
}

void collect_reads_and_produced(const LogicalOp& op, std::set<VarId>* reads,
                                std::set<VarId>* produced) {
    std::set<VarId> bound;
    for (const PlanExprPtr& expr : op.exprs) expr_variables_into(expr, reads, &bound);
    for (VarId v : op.produced) produced->insert(v);
    for (const LogicalOpPtr& nested : op.nested) {
        // Walk the nested plan too; its leaf sees the outer tuple.
        const LogicalOp* cur = nested.get();
        std::vector<const LogicalOp*> stack{cur};
        while (!stack.empty()) {
            const LogicalOp* o = stack.back();
            stack.pop_back();
            std::set<VarId> b;
            for (const PlanExprPtr& expr : o->exprs) expr_variables_into(expr, reads, &b);
            for (VarId v : o->produced) produced->insert(v);
            for (const LogicalOpPtr& in : o->inputs) stack.push_back(in.get());
            for (const LogicalOpPtr& n : o->nested) stack.push_back(n.get());
        }
    }
}

} // namespace

std::set<VarId> expr_variables(const PlanExprPtr& expr) {
    std::set<VarId> out, bound;
    expr_variables_into(expr, &out, &bound);
    return out;
}

std::set<VarId> free_variables(const LogicalOp& op) {
    std::set<VarId> reads, produced;
    collect_reads_and_produced(op, &reads, &produced);
    std::set<VarId> out;
    for (VarId v : reads)
        if (!produced.count(v)) out.insert(v);
    return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

struct Validator {
    std::vector<std::string> problems;
    std::unordered_set<VarId> all_produced;

    void note(const std::string& p) {
        if (problems.size() < 20) problems.push_back(p);
    }

    size_t expected_inputs(LogicalOpKind kind) {
        switch (kind) {
            case LogicalOpKind::EmptyTupleSource:
            case LogicalOpKind::NestedTupleSource: return 0;
            case LogicalOpKind::Join: return 2;
            default: return 1;
        }
    }

    // Returns the set of live variables flowing out of this operator.
    std::set<VarId> walk(const LogicalOp& op, bool in_nested, const std::set<VarId>& outer_live) {
        if (op.inputs.size() != expected_inputs(op.kind))
            note(std::string(logical_op_name(op.kind)) + " has " + std::to_string(op.inputs.size()) +
                 " inputs");
        std::set<VarId> live;
        if (op.kind == LogicalOpKind::NestedTupleSource) {
            if (!in_nested) note("NESTED-TUPLE-SOURCE outside a nested plan");
            live = outer_live;
        } else if (op.kind == LogicalOpKind::EmptyTupleSource) {
            // Fine anywhere: independent join branches inside nested plans
            // start from their own empty tuple.
        } else {
            for (const LogicalOpPtr& input : op.inputs) {
                std::set<VarId> in_live = walk(*input, in_nested, outer_live);
                live.insert(in_live.begin(), in_live.end());
            }
        }
        for (const LogicalOpPtr& nested : op.nested) {
            if (op.kind != LogicalOpKind::Subplan) note("nested plan outside SUBPLAN");
            std::set<VarId> nested_out = walk(*nested, true, live);
            live.insert(nested_out.begin(), nested_out.end());
        }
        std::set<VarId> bound;
        for (const PlanExprPtr& expr : op.exprs) {
            std::set<VarId> reads;
            expr_variables_into(expr, &reads, &bound);
            for (VarId v : reads)
                if (!live.count(v))
                    note(std::string(logical_op_name(op.kind)) + " reads $$" + std::to_string(v) +
                         " which is not live");
        }
        for (VarId v : op.produced) {
            if (!all_produced.insert(v).second)
                note("$$" + std::to_string(v) + " produced more than once");
            live.insert(v);
        }
        if (op.kind == LogicalOpKind::Aggregate) {
            for (const PlanExprPtr& expr : op.exprs)
                if (!expr || expr->kind != PlanExprKind::Call ||
                    (expr->symbol != "create_sequence" && expr->symbol != "count" &&
                     expr->symbol != "sum" && expr->symbol != "min" && expr->symbol != "max" &&
                     expr->symbol != "avg"))
                    note("AGGREGATE with non-aggregate expression");
        } else {
            for (const PlanExprPtr& expr : op.exprs)
                if (expr_is_call(expr, "create_sequence")) note("create_sequence outside AGGREGATE");
        }
        if (op.kind == LogicalOpKind::Unnest) {
            for (const PlanExprPtr& expr : op.exprs)
                if (!expr || expr->kind != PlanExprKind::Call ||
                    (expr->symbol != "iterate" && expr->symbol != "child" && expr->symbol != "attribute"))
                    note("UNNEST with non-unnesting expression");
        }
        return live;
    }
};

} // namespace

std::vector<std::string> plan_problems(const LogicalPlan& plan) {
    Validator v;
    if (!plan.root) return {"plan has no root"};
    if (plan.root->kind != LogicalOpKind::DistributeResult) v.note("root is not DISTRIBUTE-RESULT");
    std::set<VarId> live = v.walk(*plan.root, false, {});
    (void)live;
    return std::move(v.problems);
}

void validate_plan(const LogicalPlan& plan, ErrorKind kind, const std::string& context) {
    std::vector<std::string> problems = plan_problems(plan);
    if (problems.empty()) return;
    std::string message = context + ": " + problems.front();
    if (problems.size() > 1) message += " (+" + std::to_string(problems.size() - 1) + " more)";
    raise(kind, message);
}

// ---------------------------------------------------------------------------
// Alpha equivalence
// ---------------------------------------------------------------------------

namespace {

struct AlphaMap {
    std::unordered_map<VarId, VarId> forward;
    std::unordered_map<VarId, VarId> backward;

    bool bind(VarId a, VarId b) {
        auto f = forward.find(a);
        auto r = backward.find(b);
        if (f == forward.end() && r == backward.end()) {
            forward.emplace(a, b);
            backward.emplace(b, a);
            return true;
        }
        return f != forward.end() && r != backward.end() && f->second == b && r->second == a;
    }
};

bool expr_alpha_equal(const PlanExprPtr& a, const PlanExprPtr& b, AlphaMap* map) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case PlanExprKind::Variable: return map->bind(a->var, b->var);
        case PlanExprKind::Literal:
            return a->literal.kind() == b->literal.kind() && a->literal.equals(b->literal);
        case PlanExprKind::TypeName: return a->symbol == b->symbol;
        case PlanExprKind::Quantified:
        case PlanExprKind::ForEach:
            if (!map->bind(a->var, b->var)) return false;
            [[fallthrough]];
        case PlanExprKind::Call: {
            if (a->kind == PlanExprKind::Call && a->symbol != b->symbol) return false;
            if (a->args.size() != b->args.size()) return false;
            for (size_t i = 0; i < a->args.size(); ++i)
                if (!expr_alpha_equal(a->args[i], b->args[i], map)) return false;
            return true;
        }
    }
    return false;
}

bool op_alpha_equal(const LogicalOp& a, const LogicalOp& b, AlphaMap* map) {
    if (a.kind != b.kind) return false;
    if (a.scan_source != b.scan_source || a.scan_steps != b.scan_steps) return false;
    if (a.two_step != b.two_step) return false;
    if (a.two_step && (a.local_fn != b.local_fn || a.global_fn != b.global_fn)) return false;
    if (a.produced.size() != b.produced.size() || a.exprs.size() != b.exprs.size() ||
        a.inputs.size() != b.inputs.size() || a.nested.size() != b.nested.size())
        return false;
    for (size_t i = 0; i < a.produced.size(); ++i)
        if (!map->bind(a.produced[i], b.produced[i])) return false;
    for (size_t i = 0; i < a.exprs.size(); ++i)
        if (!expr_alpha_equal(a.exprs[i], b.exprs[i], map)) return false;
    for (size_t i = 0; i < a.nested.size(); ++i)
        if (!op_alpha_equal(*a.nested[i], *b.nested[i], map)) return false;
    for (size_t i = 0; i < a.inputs.size(); ++i)
        if (!op_alpha_equal(*a.inputs[i], *b.inputs[i], map)) return false;
    return true;
}

} // namespace

bool plan_alpha_equal(const LogicalPlan& a, const LogicalPlan& b) {
    AlphaMap map;
    return op_alpha_equal(*a.root, *b.root, &map);
}

} // namespace xq
