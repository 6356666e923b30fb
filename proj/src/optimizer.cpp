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

#include "xq/optimizer.hpp"

#include <functional>
#include <map>

#include "xq/error.hpp"

namespace xq {

namespace {

// Pre-order walk over operator slots (root first), including nested plans.
// The visitor may rewrite the slot; returning true stops the walk.
bool for_each_slot(LogicalOpPtr& slot, const std::function<bool(LogicalOpPtr&)>& visit) {
    if (visit(slot)) return true;
    for (LogicalOpPtr& nested : slot->nested)
        if (for_each_slot(nested, visit)) return true;
    for (LogicalOpPtr& input : slot->inputs)
        if (for_each_slot(input, visit)) return true;
    return false;
}

PlanExprPtr substitute_var(const PlanExprPtr& expr, VarId from, const PlanExprPtr& replacement) {
    if (!expr) return expr;
    switch (expr->kind) {
        case PlanExprKind::Variable: return expr->var == from ? replacement : expr;
        case PlanExprKind::Literal:
        case PlanExprKind::TypeName: return expr;
        default: break;
    }
    auto out = std::make_shared<PlanExpr>(*expr);
    for (PlanExprPtr& arg : out->args) arg = substitute_var(arg, from, replacement);
    return out;
}

void substitute_var_everywhere(LogicalOpPtr& root, VarId from, const PlanExprPtr& replacement) {
    for_each_slot(root, [&](LogicalOpPtr& slot) {
        for (PlanExprPtr& expr : slot->exprs) expr = substitute_var(expr, from, replacement);
        return false;
    });
}

size_t count_var_uses(const LogicalOpPtr& root, VarId var) {
    size_t count = 0;
    std::function<void(const PlanExprPtr&)> count_in_expr = [&](const PlanExprPtr& expr) {
        if (!expr) return;
        if (expr->kind == PlanExprKind::Variable && expr->var == var) ++count;
        for (const PlanExprPtr& arg : expr->args) count_in_expr(arg);
    };
    LogicalOpPtr mutable_root = root;
    for_each_slot(mutable_root, [&](LogicalOpPtr& slot) {
        for (const PlanExprPtr& expr : slot->exprs) count_in_expr(expr);
        return false;
    });
    return count;
}

std::set<VarId> produced_in_subtree(const LogicalOpPtr& root) {
    std::set<VarId> out;
    LogicalOpPtr mutable_root = root;
    for_each_slot(mutable_root, [&](LogicalOpPtr& slot) {
        for (VarId v : slot->produced) out.insert(v);
        return false;
    });
    return out;
}

bool contains_datascan(const LogicalOpPtr& root) {
    bool found = false;
    LogicalOpPtr mutable_root = root;
    for_each_slot(mutable_root, [&](LogicalOpPtr& slot) {
        if (slot->kind == LogicalOpKind::DataScan) {
            found = true;
            return true;
        }
        return false;
    });
    return found;
}

// Innermost input variable of a child/attribute chain (looking through treat).
std::optional<VarId> chain_base_var(const PlanExprPtr& expr) {
    if (expr_is_call(expr, "child") || expr_is_call(expr, "attribute")) {
        PlanExprPtr inner = expr->args[0];
        if (expr_is_call(inner, "treat")) inner = inner->args[0];
        if (inner->kind == PlanExprKind::Variable) return inner->var;
        return chain_base_var(inner);
    }
    if (expr_is_call(expr, "treat")) return chain_base_var(expr->args[0]);
    return std::nullopt;
}

// Decomposes child(treat(child(treat($v, t), "a"), t), "b") into ($v, [a, b]).
bool decompose_child_chain(const PlanExprPtr& expr, VarId* base, std::vector<std::string>* steps) {
    if (!expr_is_call(expr, "child")) return false;
    if (expr->args.size() != 2 || expr->args[1]->kind != PlanExprKind::Literal) return false;
    PlanExprPtr inner = expr->args[0];
    if (expr_is_call(inner, "treat")) inner = inner->args[0];
    if (inner->kind == PlanExprKind::Variable) {
        *base = inner->var;
        steps->push_back(expr->args[1]->literal.as_string());
        return true;
    }
    if (!decompose_child_chain(inner, base, steps)) return false;
    steps->push_back(expr->args[1]->literal.as_string());
    return true;
}

OrderingProperty meet(OrderingProperty a, OrderingProperty b) {
    return {a.document_ordered && b.document_ordered, a.duplicate_free && b.duplicate_free};
}

// Two mutually recursive analyses reconstruct the property tracking:
//  - content_of(var): is the sequence held in this field doc-ordered and
//    duplicate free (per tuple)? Decided at the variable's defining operator.
//  - stream_of(op): does the tuple stream below this edge enumerate its focus
//    in document order without duplicates? Needed where create_sequence
//    collects a field across a nested stream.
// Only the child axis exists, so every node set in a plan is depth-uniform and
// child steps preserve both properties over ordered distinct inputs. Unknown
// expressions destroy both.
struct PropertyAnalysis {
    // Definitions are looked up across the whole plan: a variable can reach a
    // nested plan from the outer chain through NESTED-TUPLE-SOURCE.
    explicit PropertyAnalysis(const LogicalOp* def_scope) : def_scope_(def_scope) {}

    OrderingProperty content_of(VarId var) {
        auto cached = cache_.find(var);
        if (cached != cache_.end()) return cached->second;
        cache_[var] = {false, false}; // cycle guard
        const LogicalOp* def = find_def(var, *def_scope_);
        OrderingProperty out{false, false};
        if (def) {
            switch (def->kind) {
                case LogicalOpKind::DataScan: out = {true, true}; break;
                case LogicalOpKind::Unnest: out = {true, true}; break; // singleton per tuple
                case LogicalOpKind::Assign: out = content_of_expr(expr_for(var, *def)); break;
                case LogicalOpKind::Aggregate: {
                    const PlanExprPtr& expr = expr_for(var, *def);
                    if (expr_is_call(expr, "create_sequence")) {
                        OrderingProperty stream = stream_of(*def->inputs[0]);
                        OrderingProperty block = content_of_expr(expr->args[0]);
                        out = meet(stream, block);
                    }
                    break;
                }
                default: break;
            }
        }
        cache_[var] = out;
        return out;
    }

    OrderingProperty content_of_expr(const PlanExprPtr& expr) {
        if (!expr) return {false, false};
        if (expr->kind == PlanExprKind::Variable) return content_of(expr->var);
        if (expr->kind == PlanExprKind::Literal) return {true, true};
        if (expr->kind != PlanExprKind::Call) return {false, false};
        const std::string& fn = expr->symbol;
        if (fn == "doc" || fn == "collection") return {true, true};
        if (fn == "sort-distinct-nodes-asc-or-atomics") return {true, true};
        if (fn == "sort-nodes-asc-or-atomics") {
            OrderingProperty in = content_of_expr(expr->args[0]);
            return {true, in.duplicate_free};
        }
        if (fn == "distinct-nodes-or-atomics") {
            OrderingProperty in = content_of_expr(expr->args[0]);
            return {in.document_ordered, true};
        }
        if (fn == "child" || fn == "attribute" || fn == "treat" || fn == "iterate" ||
            fn == "create_sequence")
            return content_of_expr(expr->args[0]);
        return {false, false};
    }

    OrderingProperty stream_of(const LogicalOp& op) {
        switch (op.kind) {
            case LogicalOpKind::EmptyTupleSource:
            case LogicalOpKind::NestedTupleSource: return {true, true};
            case LogicalOpKind::DataScan: {
                LogicalOpKind in = op.inputs[0]->kind;
                bool single_tuple_input = in == LogicalOpKind::EmptyTupleSource ||
                                          in == LogicalOpKind::NestedTupleSource;
                return single_tuple_input ? OrderingProperty{true, true}
                                          : OrderingProperty{false, false};
            }
            case LogicalOpKind::Aggregate: return {true, true};
            case LogicalOpKind::Join: return {false, false};
            case LogicalOpKind::Assign:
            case LogicalOpKind::Select:
            case LogicalOpKind::DistributeResult: return stream_of(*op.inputs[0]);
            case LogicalOpKind::Subplan:
                // Aggregate-rooted nested plans add fields one to one.
                if (op.nested[0]->kind == LogicalOpKind::Aggregate) return stream_of(*op.inputs[0]);
                return {false, false};
            case LogicalOpKind::Unnest: {
                OrderingProperty in = stream_of(*op.inputs[0]);
                const PlanExprPtr& expr = op.exprs[0];
                if (expr_is_call(expr, "iterate") && expr->args[0]->kind == PlanExprKind::Variable)
                    return meet(in, content_of(expr->args[0]->var));
                if (expr_is_call(expr, "child") || expr_is_call(expr, "attribute")) {
                    auto base = chain_base_var(expr);
                    if (base) return meet(in, content_of(*base));
                }
                return {false, false};
            }
        }
        return {false, false};
    }

  private:
    const LogicalOp* find_def(VarId var, const LogicalOp& scope) {
        for (VarId produced : scope.produced)
            if (produced == var) return &scope;
        for (const LogicalOpPtr& nested : scope.nested)
            if (const LogicalOp* def = find_def(var, *nested)) return def;
        for (const LogicalOpPtr& input : scope.inputs)
            if (const LogicalOp* def = find_def(var, *input)) return def;
        return nullptr;
    }

    static const PlanExprPtr& expr_for(VarId var, const LogicalOp& op) {
        for (size_t i = 0; i < op.produced.size(); ++i)
            if (op.produced[i] == var) return op.exprs[i];
        raise(ErrorKind::Internal, "variable not produced here");
    }

    const LogicalOp* def_scope_;
    std::map<VarId, OrderingProperty> cache_;
};

} // namespace

OrderingProperty analyze_ordering(const LogicalOp& op, OrderingProperty nts_property) {
    (void)nts_property;
    PropertyAnalysis analysis(&op);
    return analysis.stream_of(op);
}

// ---------------------------------------------------------------------------
// Path expression rules
// ---------------------------------------------------------------------------

bool rule_remove_sort(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Assign || slot->exprs.size() != 1) return false;
        const PlanExprPtr& expr = slot->exprs[0];
        if (!expr_is_call(expr, "sort-distinct-nodes-asc-or-atomics")) return false;
        PropertyAnalysis analysis(plan.root.get());
        OrderingProperty props = analysis.content_of_expr(expr->args[0]);
        if (!props.document_ordered && !props.duplicate_free) return false;
        if (props.document_ordered && props.duplicate_free) {
            // Both intact: drop the operator, forwarding its argument.
            VarId produced = slot->produced[0];
            PlanExprPtr arg = expr->args[0];
            LogicalOpPtr input = slot->inputs[0];
            slot = input;
            substitute_var_everywhere(plan.root, produced, arg);
            if (plan.result_var == produced && arg->kind == PlanExprKind::Variable)
                plan.result_var = arg->var;
            return true;
        }
        const char* weaker = props.document_ordered ? "distinct-nodes-or-atomics"
                                                    : "sort-nodes-asc-or-atomics";
        auto replaced = std::make_shared<LogicalOp>(*slot);
        replaced->exprs[0] = pe_call(weaker, {expr->args[0]});
        slot = replaced;
        return true;
    });
}

bool rule_remove_subplan(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Unnest) return false;
        const PlanExprPtr& iterate = slot->exprs[0];
        if (!expr_is_call(iterate, "iterate") || iterate->args[0]->kind != PlanExprKind::Variable)
            return false;
        VarId seq_var = iterate->args[0]->var;
        LogicalOpPtr subplan = slot->inputs[0];
        if (subplan->kind != LogicalOpKind::Subplan) return false;
        LogicalOpPtr aggregate = subplan->nested[0];
        if (aggregate->kind != LogicalOpKind::Aggregate || aggregate->produced.size() != 1 ||
            aggregate->produced[0] != seq_var)
            return false;
        if (!expr_is_call(aggregate->exprs[0], "create_sequence")) return false;
        if (count_var_uses(plan.root, seq_var) != 1) return false;

        // Splice the nested chain into the outer plan: the nested leaf
        // (NESTED-TUPLE-SOURCE) becomes the SUBPLAN's input.
        LogicalOpPtr nested_chain = aggregate->inputs[0];
        LogicalOpPtr* leaf_slot = nullptr;
        LogicalOpPtr* cursor = &nested_chain;
        while (true) {
            if ((*cursor)->kind == LogicalOpKind::NestedTupleSource) {
                leaf_slot = cursor;
                break;
            }
            if ((*cursor)->inputs.empty()) break;
            cursor = &(*cursor)->inputs[0];
        }
        if (!leaf_slot) return false;
        *leaf_slot = subplan->inputs[0];

        VarId assigned = plan.next_var++;
        LogicalOpPtr assign = make_op(LogicalOpKind::Assign);
        assign->produced.push_back(assigned);
        assign->exprs.push_back(aggregate->exprs[0]->args[0]);
        assign->inputs.push_back(nested_chain);

        auto unnest = std::make_shared<LogicalOp>(*slot);
        unnest->exprs[0] = pe_call("iterate", {pe_var(assigned)});
        unnest->inputs = {assign};
        slot = unnest;
        return true;
    });
}

bool rule_scalar_to_unnest(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Unnest) return false;
        const PlanExprPtr& iterate = slot->exprs[0];
        if (!expr_is_call(iterate, "iterate") || iterate->args[0]->kind != PlanExprKind::Variable)
            return false;
        VarId scalar_var = iterate->args[0]->var;
        LogicalOpPtr assign = slot->inputs[0];
        if (assign->kind != LogicalOpKind::Assign || assign->produced.size() != 1 ||
            assign->produced[0] != scalar_var)
            return false;
        const PlanExprPtr& scalar = assign->exprs[0];
        // Scalar expressions with an unnesting twin.
        if (!expr_is_call(scalar, "child") && !expr_is_call(scalar, "attribute")) return false;
        if (count_var_uses(plan.root, scalar_var) != 1) return false;

        auto unnest = std::make_shared<LogicalOp>(*slot);
        unnest->exprs[0] = scalar;
        unnest->inputs = {assign->inputs[0]};
        slot = unnest;
        return true;
    });
}

bool rule_combine_unnest(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Unnest) return false;
        const PlanExprPtr& outer_expr = slot->exprs[0];
        if (!expr_is_call(outer_expr, "child") && !expr_is_call(outer_expr, "attribute")) return false;
        auto base = chain_base_var(outer_expr);
        if (!base) return false;
        LogicalOpPtr lower = slot->inputs[0];
        if (lower->kind != LogicalOpKind::Unnest || lower->produced.size() != 1 ||
            lower->produced[0] != *base)
            return false;
        if (!expr_is_call(lower->exprs[0], "child") && !expr_is_call(lower->exprs[0], "attribute"))
            return false;
        if (count_var_uses(plan.root, *base) != 1) return false;

        auto merged = std::make_shared<LogicalOp>(*slot);
        merged->exprs[0] = substitute_var(outer_expr, *base, lower->exprs[0]);
        merged->inputs = {lower->inputs[0]};
        slot = merged;
        return true;
    });
}

// ---------------------------------------------------------------------------
// Parallel rules
// ---------------------------------------------------------------------------

namespace {

std::optional<std::string> constant_collection_path(const PlanExprPtr& expr) {
    if (expr->kind == PlanExprKind::Literal && expr->literal.is_string_family())
        return expr->literal.as_string();
    if ((expr_is_call(expr, "promote") || expr_is_call(expr, "data")) && !expr->args.empty())
        return constant_collection_path(expr->args[0]);
    return std::nullopt;
}

} // namespace

// A nested plan that iterates a singleton field and collects one expression
// application is a per-tuple scalar computation; inline it as an ASSIGN. The
// field is singleton by construction when an UNNEST or DATASCAN produced it.
bool rule_inline_singleton_subplan(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Subplan) return false;
        LogicalOpPtr aggregate = slot->nested[0];
        if (aggregate->kind != LogicalOpKind::Aggregate || aggregate->produced.size() != 1)
            return false;
        if (!expr_is_call(aggregate->exprs[0], "create_sequence")) return false;
        LogicalOpPtr unnest = aggregate->inputs[0];
        if (unnest->kind != LogicalOpKind::Unnest) return false;
        if (unnest->inputs[0]->kind != LogicalOpKind::NestedTupleSource) return false;
        const PlanExprPtr& iterate = unnest->exprs[0];
        if (!expr_is_call(iterate, "iterate") || iterate->args[0]->kind != PlanExprKind::Variable)
            return false;
        VarId source = iterate->args[0]->var;
        VarId item = unnest->produced[0];
        // The source field must hold one item per tuple (UNNEST and DATASCAN
        // outputs do); the item variable cannot escape the nested plan.
        std::function<const LogicalOp*(const LogicalOp&)> find =
            [&](const LogicalOp& op) -> const LogicalOp* {
            for (VarId v : op.produced)
                if (v == source) return &op;
            for (const LogicalOpPtr& nested : op.nested)
                if (const LogicalOp* d = find(*nested)) return d;
            for (const LogicalOpPtr& input : op.inputs)
                if (const LogicalOp* d = find(*input)) return d;
            return nullptr;
        };
        const LogicalOp* def = find(*plan.root);
        if (!def ||
            (def->kind != LogicalOpKind::Unnest && def->kind != LogicalOpKind::DataScan))
            return false;

        LogicalOpPtr assign = make_op(LogicalOpKind::Assign);
        assign->produced = aggregate->produced;
        assign->exprs = {substitute_var(aggregate->exprs[0]->args[0], item, pe_var(source))};
        assign->inputs = {slot->inputs[0]};
        slot = assign;
        return true;
    });
}

bool rule_introduce_datascan(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Unnest) return false;
        const PlanExprPtr& iterate = slot->exprs[0];
        if (!expr_is_call(iterate, "iterate") || iterate->args[0]->kind != PlanExprKind::Variable)
            return false;
        VarId collection_var = iterate->args[0]->var;
        LogicalOpPtr assign = slot->inputs[0];
        if (assign->kind != LogicalOpKind::Assign || assign->produced.size() != 1 ||
            assign->produced[0] != collection_var)
            return false;
        if (!expr_is_call(assign->exprs[0], "collection")) return false;
        auto path = constant_collection_path(assign->exprs[0]->args[0]);
        if (!path) return false;
        if (count_var_uses(plan.root, collection_var) != 1) return false;

        LogicalOpPtr scan = make_op(LogicalOpKind::DataScan);
        scan->scan_source = *path;
        scan->produced = slot->produced;
        scan->inputs = {assign->inputs[0]};
        slot = scan;
        return true;
    });
}

bool rule_push_child_into_datascan(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Unnest) return false;
        VarId base = 0;
        std::vector<std::string> steps;
        if (!decompose_child_chain(slot->exprs[0], &base, &steps)) return false;
        LogicalOpPtr scan = slot->inputs[0];
        if (scan->kind != LogicalOpKind::DataScan || scan->produced[0] != base) return false;
        if (count_var_uses(plan.root, base) != 1) return false;

        auto merged = std::make_shared<LogicalOp>(*scan);
        merged->produced = slot->produced;
        merged->scan_steps.insert(merged->scan_steps.end(), steps.begin(), steps.end());
        slot = merged;
        return true;
    });
}

bool rule_scalar_to_aggregate(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Assign || slot->produced.size() != 1) return false;
        const PlanExprPtr& expr = slot->exprs[0];
        if (!expr || expr->kind != PlanExprKind::Call) return false;
        const std::string& fn = expr->symbol;
        if (fn != "count" && fn != "sum" && fn != "min" && fn != "max" && fn != "avg") return false;
        LogicalOpPtr subplan = slot->inputs[0];
        if (subplan->kind != LogicalOpKind::Subplan) return false;
        LogicalOpPtr aggregate = subplan->nested[0];
        if (aggregate->kind != LogicalOpKind::Aggregate || aggregate->produced.size() != 1) return false;
        if (!expr_is_call(aggregate->exprs[0], "create_sequence")) return false;
        VarId seq_var = aggregate->produced[0];
        // The scalar aggregate must consume exactly the materialized sequence.
        if (expr_variables(expr) != std::set<VarId>{seq_var}) return false;
        if (count_var_uses(plan.root, seq_var) != 1) return false;

        PlanExprPtr element = aggregate->exprs[0]->args[0];
        auto rewritten = std::make_shared<LogicalOp>(*subplan);
        auto new_aggregate = std::make_shared<LogicalOp>(*aggregate);
        new_aggregate->produced = slot->produced;
        new_aggregate->exprs = {substitute_var(expr, seq_var, element)};
        rewritten->nested = {new_aggregate};
        slot = rewritten;
        return true;
    });
}

bool rule_introduce_join(LogicalPlan& plan) {
    // (a) independent nested DATASCAN becomes a cross product JOIN(true).
    bool changed = for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::DataScan) return false;
        if (slot->inputs[0]->kind == LogicalOpKind::EmptyTupleSource ||
            slot->inputs[0]->kind == LogicalOpKind::NestedTupleSource)
            return false;
        LogicalOpPtr lower = slot->inputs[0];
        auto scan = std::make_shared<LogicalOp>(*slot);
        scan->inputs = {make_op(LogicalOpKind::EmptyTupleSource)};
        LogicalOpPtr join = make_op(LogicalOpKind::Join);
        join->exprs.push_back(pe_literal(AtomicValue::boolean(true)));
        join->inputs = {scan, lower};
        slot = join;
        return true;
    });
    if (changed) return true;

    // (b) push operators that only touch one branch below the JOIN.
    changed = for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Assign && slot->kind != LogicalOpKind::Select) return false;
        if (slot->inputs[0]->kind != LogicalOpKind::Join) return false;
        LogicalOpPtr join = slot->inputs[0];
        std::set<VarId> reads = free_variables(*slot);
        if (reads.empty()) return false;
        for (int branch = 0; branch < 2; ++branch) {
            std::set<VarId> vars = produced_in_subtree(join->inputs[branch]);
            bool contained = true;
            for (VarId v : reads)
                if (!vars.count(v)) {
                    contained = false;
                    break;
                }
            if (!contained) continue;
            auto pushed = std::make_shared<LogicalOp>(*slot);
            pushed->inputs = {join->inputs[branch]};
            auto new_join = std::make_shared<LogicalOp>(*join);
            new_join->inputs[branch] = pushed;
            slot = new_join;
            return true;
        }
        return false;
    });
    if (changed) return true;

    // (c) merge a remaining SELECT into the JOIN condition.
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Select) return false;
        if (slot->inputs[0]->kind != LogicalOpKind::Join) return false;
        LogicalOpPtr join = slot->inputs[0];
        PlanExprPtr cond = slot->exprs[0];
        const PlanExprPtr& existing = join->exprs[0];
        PlanExprPtr merged;
        if (existing->kind == PlanExprKind::Literal && existing->literal.kind() == AtomicKind::Boolean &&
            existing->literal.as_bool()) {
            merged = cond;
        } else if (expr_is_call(existing, "and")) {
            auto call = std::make_shared<PlanExpr>(*existing);
            call->args.push_back(cond);
            merged = call;
        } else {
            merged = pe_call("and", {existing, cond});
        }
        auto new_join = std::make_shared<LogicalOp>(*join);
        new_join->exprs = {merged};
        slot = new_join;
        return true;
    });
}

bool rule_two_step_aggregate(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Aggregate || slot->two_step) return false;
        if (slot->exprs.size() != 1 || slot->exprs[0]->kind != PlanExprKind::Call) return false;
        const std::string& fn = slot->exprs[0]->symbol;
        AggFn local, global;
        if (fn == "count") {
            local = AggFn::Count;
            global = AggFn::Sum;
        } else if (fn == "sum") {
            local = global = AggFn::Sum;
        } else if (fn == "min") {
            local = global = AggFn::Min;
        } else if (fn == "max") {
            local = global = AggFn::Max;
        } else if (fn == "avg") {
            local = global = AggFn::Avg; // local keeps a (sum, count) pair
        } else {
            return false;
        }
        if (!contains_datascan(slot->inputs[0])) return false;
        auto annotated = std::make_shared<LogicalOp>(*slot);
        annotated->two_step = true;
        annotated->local_fn = local;
        annotated->global_fn = global;
        slot = annotated;
        return true;
    });
}

namespace {

// The nested-tuple-source leaf of this nested plan (not of inner subplans).
LogicalOpPtr* find_nts_slot(LogicalOpPtr& slot) {
    if (slot->kind == LogicalOpKind::NestedTupleSource) return &slot;
    for (LogicalOpPtr& input : slot->inputs)
        if (LogicalOpPtr* found = find_nts_slot(input)) return found;
    return nullptr;
}

} // namespace

bool rule_flatten_trivial_subplan(LogicalPlan& plan) {
    return for_each_slot(plan.root, [&](LogicalOpPtr& slot) {
        if (slot->kind != LogicalOpKind::Subplan) return false;
        if (slot->inputs[0]->kind != LogicalOpKind::EmptyTupleSource) return false;
        LogicalOpPtr nested = slot->nested[0];
        LogicalOpPtr* leaf = find_nts_slot(nested);
        if (!leaf) return false;
        *leaf = slot->inputs[0];
        slot = nested;
        return true;
    });
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

const std::vector<NamedRule>& optimizer_rules() {
    static const std::vector<NamedRule> rules = {
        {"remove-sort", rule_remove_sort, true},
        {"remove-subplan", rule_remove_subplan, true},
        {"inline-singleton-subplan", rule_inline_singleton_subplan, true},
        {"scalar-to-unnest", rule_scalar_to_unnest, true},
        {"combine-unnest", rule_combine_unnest, true},
        {"introduce-datascan", rule_introduce_datascan, true},
        {"push-child-into-datascan", rule_push_child_into_datascan, true},
        {"scalar-to-aggregate", rule_scalar_to_aggregate, true},
        {"introduce-join", rule_introduce_join, true},
        {"flatten-trivial-subplan", rule_flatten_trivial_subplan, false},
        {"two-step-aggregate", rule_two_step_aggregate, false},
    };
    return rules;
}

OptimizeResult run_optimizer(const LogicalPlan& input, const OptimizerOptions& options) {
    OptimizeResult result;
    result.plan = clone_plan(input);
    validate_plan(result.plan, ErrorKind::Rule, "input plan");

    const std::vector<NamedRule>& rules = optimizer_rules();
    size_t rule_count = rules.size();
    if (options.rule_prefix >= 0)
        rule_count = std::min<size_t>(rule_count, static_cast<size_t>(options.rule_prefix));

    bool plan_changed = true;
    while (plan_changed) {
        plan_changed = false;
        for (size_t i = 0; i < rule_count; ++i) {
            const NamedRule& rule = rules[i];
            if (!options.pushdown_enabled &&
                std::string_view(rule.name) == "push-child-into-datascan")
                continue;
            int application = 0;
            while (rule.apply(result.plan)) {
                ++application;
                ++result.steps;
                if (result.steps > options.step_ceiling)
                    raise(ErrorKind::Rule, std::string("step ceiling exceeded applying ") + rule.name);
                validate_plan(result.plan, ErrorKind::Rule, rule.name);
                if (options.trace)
                    result.trace.push_back(TracePoint{rule.name, application, clone_plan(result.plan)});
                plan_changed = true;
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Boolean bridging
// ---------------------------------------------------------------------------

PlanExprPtr bridge_join_condition(const PlanExprPtr& cond) {
    if (!cond) return cond;
    if (expr_is_call(cond, "boolean") && cond->args.size() == 1 &&
        expr_is_call(cond->args[0], "value-eq"))
        return pe_call("equal", cond->args[0]->args);
    if (expr_is_call(cond, "and")) {
        auto out = std::make_shared<PlanExpr>(*cond);
        for (PlanExprPtr& arg : out->args) arg = bridge_join_condition(arg);
        return out;
    }
    return cond;
}

PlanExprPtr restore_join_condition(const PlanExprPtr& cond) {
    if (!cond) return cond;
    if (expr_is_call(cond, "equal"))
        return pe_call("boolean", {pe_call("value-eq", cond->args)});
    if (expr_is_call(cond, "and")) {
        auto out = std::make_shared<PlanExpr>(*cond);
        for (PlanExprPtr& arg : out->args) arg = restore_join_condition(arg);
        return out;
    }
    return cond;
}

} // namespace xq
