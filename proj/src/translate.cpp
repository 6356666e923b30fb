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

#include <unordered_map>

#include "xq/algebra.hpp"
#include "xq/error.hpp"

namespace xq {

namespace {

bool is_full_step(const AstPtr& node) {
    return node->kind == AstKind::FnCall && node->name == "sort-distinct-nodes-asc-or-atomics" &&
           node->args.size() == 1 && node->args[0]->kind == AstKind::ForEach;
}

bool is_value_comparison(const AstPtr& node) {
    if (node->kind != AstKind::FnCall || node->args.size() != 2) return false;
    return node->name.rfind("value-", 0) == 0 || node->name.rfind("general-", 0) == 0;
}

bool is_aggregate_call(const AstPtr& node) {
    if (node->kind != AstKind::FnCall) return false;
    return node->name == "count" || node->name == "sum" || node->name == "min" ||
           node->name == "max" || node->name == "avg";
}

class Translator {
  public:
    LogicalPlan run(const AstPtr& core) {
        chain_ = make_op(LogicalOpKind::EmptyTupleSource);
        VarId result;
        if (core->kind == AstKind::Literal) {
            result = fresh();
            append_op(LogicalOpKind::Assign, result, pe_literal(core->literal));
        } else if (core->kind == AstKind::Flwor) {
            VarId ret = translate_flwor_body(core);
            result = fresh();
            append_op(LogicalOpKind::Unnest, result, pe_call("iterate", {pe_var(ret)}));
        } else {
            VarId field = field_expr(core);
            result = fresh();
            append_op(LogicalOpKind::Unnest, result, pe_call("iterate", {pe_var(field)}));
        }
        LogicalOpPtr root = make_op(LogicalOpKind::DistributeResult);
        root->exprs.push_back(pe_var(result));
        root->inputs.push_back(chain_);
        LogicalPlan plan;
        plan.root = std::move(root);
        plan.result_var = result;
        plan.next_var = next_var_;
        return plan;
    }

  private:
    VarId fresh() { return next_var_++; }

    LogicalOpPtr append_op(LogicalOpKind kind, VarId produced, PlanExprPtr expr) {
        LogicalOpPtr op = make_op(kind);
        if (produced != 0) op->produced.push_back(produced);
        if (expr) op->exprs.push_back(std::move(expr));
        op->inputs.push_back(chain_);
        chain_ = op;
        return op;
    }

    VarId lookup(const std::string& name, uint32_t offset) {
        auto it = scope_.find(name);
        if (it == scope_.end())
            raise(ErrorKind::Bind, "unbound variable $" + name + " at offset " + std::to_string(offset));
        return it->second;
    }

    struct ScopedBinding {
        Translator& t;
        std::string name;
        bool had_old;
        VarId old_value;

        ScopedBinding(Translator& translator, const std::string& var, VarId value)
            : t(translator), name(var) {
            auto it = t.scope_.find(var);
            had_old = it != t.scope_.end();
            old_value = had_old ? it->second : 0;
            t.scope_[var] = value;
        }
        ~ScopedBinding() {
            if (had_old) t.scope_[name] = old_value;
            else t.scope_.erase(name);
        }
    };

    /// Translate a sequence-valued expression into a tuple field on the
    /// current chain, returning the field.
    VarId field_expr(const AstPtr& core) {
        if (core->kind == AstKind::VarRef) return lookup(core->name, core->offset);
        if (is_full_step(core)) return translate_step(core);
        if (core->kind == AstKind::Flwor) return translate_nested_flwor(core);
        PlanExprPtr expr = scalar_expr(core);
        if (expr->kind == PlanExprKind::Variable) return expr->var;
        VarId v = fresh();
        append_op(LogicalOpKind::Assign, v, std::move(expr));
        return v;
    }

    // The three-stage path step: a SUBPLAN provides the inner focus (iterate,
    // then collect the child matches into a sequence), and an ASSIGN restores
    // document order.
    VarId translate_step(const AstPtr& core) {
        const AstPtr& each = core->args[0];
        VarId source = field_expr(each->args[0]);

        LogicalOpPtr outer = chain_;
        chain_ = make_op(LogicalOpKind::NestedTupleSource);
        VarId item = fresh();
        append_op(LogicalOpKind::Unnest, item, pe_call("iterate", {pe_var(source)}));
        PlanExprPtr body;
        {
            ScopedBinding bind(*this, each->name, item);
            body = scalar_expr(each->args[1]);
        }
        VarId seq = fresh();
        append_op(LogicalOpKind::Aggregate, seq, pe_call("create_sequence", {std::move(body)}));
        LogicalOpPtr nested_root = chain_;

        chain_ = outer;
        LogicalOpPtr subplan = make_op(LogicalOpKind::Subplan);
        subplan->nested.push_back(nested_root);
        subplan->inputs.push_back(chain_);
        chain_ = subplan;

        VarId sorted = fresh();
        append_op(LogicalOpKind::Assign, sorted,
                  pe_call("sort-distinct-nodes-asc-or-atomics", {pe_var(seq)}));
        return sorted;
    }

    VarId translate_nested_flwor(const AstPtr& flwor) {
        LogicalOpPtr outer = chain_;
        chain_ = make_op(LogicalOpKind::NestedTupleSource);
        VarId ret = translate_flwor_body(flwor);
        VarId seq = fresh();
        append_op(LogicalOpKind::Aggregate, seq, pe_call("create_sequence", {pe_var(ret)}));
        LogicalOpPtr nested_root = chain_;

        chain_ = outer;
        LogicalOpPtr subplan = make_op(LogicalOpKind::Subplan);
        subplan->nested.push_back(nested_root);
        subplan->inputs.push_back(chain_);
        chain_ = subplan;
        return seq;
    }

    /// Appends the clauses, selections, and return computation of a FLWOR to
    /// the current chain; returns the field holding the return value per tuple.
    VarId translate_flwor_body(const AstPtr& flwor) {
        std::vector<std::unique_ptr<ScopedBinding>> bindings;
        for (const FlworClause& clause : flwor->clauses) {
            if (clause.is_let) {
                PlanExprPtr e = scalar_expr(clause.source);
                VarId v;
                if (e->kind == PlanExprKind::Variable) {
                    v = e->var;
                } else {
                    v = fresh();
                    append_op(LogicalOpKind::Assign, v, std::move(e));
                }
                bindings.push_back(std::make_unique<ScopedBinding>(*this, clause.var, v));
            } else {
                VarId source = field_expr(clause.source);
                VarId item = fresh();
                append_op(LogicalOpKind::Unnest, item, pe_call("iterate", {pe_var(source)}));
                bindings.push_back(std::make_unique<ScopedBinding>(*this, clause.var, item));
            }
        }
        for (const AstPtr& conjunct : flwor->where_conjuncts) translate_selection(conjunct);
        VarId ret;
        if (flwor->ret->kind == AstKind::VarRef) {
            ret = lookup(flwor->ret->name, flwor->ret->offset);
        } else {
            PlanExprPtr e = scalar_expr(flwor->ret);
            if (e->kind == PlanExprKind::Variable) {
                ret = e->var;
            } else {
                ret = fresh();
                append_op(LogicalOpKind::Assign, ret, std::move(e));
            }
        }
        return ret;
    }

    // One SELECT per conjunct, with non-trivial comparison operands hoisted
    // into ASSIGNs so the generic join rules can split them across branches.
    void translate_selection(const AstPtr& conjunct) {
        const AstPtr& inner = conjunct->args[0]; // conjunct is boolean(inner)
        if (is_value_comparison(inner)) {
            PlanExprPtr lhs = hoist_operand(inner->args[0]);
            PlanExprPtr rhs = hoist_operand(inner->args[1]);
            PlanExprPtr cmp = pe_call(inner->name, {std::move(lhs), std::move(rhs)});
            LogicalOpPtr select = make_op(LogicalOpKind::Select);
            select->exprs.push_back(pe_call("boolean", {std::move(cmp)}));
            select->inputs.push_back(chain_);
            chain_ = select;
            return;
        }
        PlanExprPtr cond = scalar_expr(conjunct);
        LogicalOpPtr select = make_op(LogicalOpKind::Select);
        select->exprs.push_back(std::move(cond));
        select->inputs.push_back(chain_);
        chain_ = select;
    }

    PlanExprPtr hoist_operand(const AstPtr& operand) {
        if (operand->kind == AstKind::Literal) return pe_literal(operand->literal);
        PlanExprPtr e = scalar_expr(operand);
        if (e->kind == PlanExprKind::Variable) return e;
        VarId v = fresh();
        append_op(LogicalOpKind::Assign, v, std::move(e));
        return pe_var(v);
    }

    /// Scalar expression over the current tuple; sequence-valued sub-trees
    /// (full steps, FLWORs) are hoisted into fields first.
    PlanExprPtr scalar_expr(const AstPtr& core) {
        switch (core->kind) {
            case AstKind::Literal: return pe_literal(core->literal);
            case AstKind::TypeName: return pe_type(core->name);
            case AstKind::VarRef: return pe_var(lookup(core->name, core->offset));
            case AstKind::Flwor: return pe_var(translate_nested_flwor(core));
            case AstKind::FnCall: {
                if (is_full_step(core)) return pe_var(translate_step(core));
                std::vector<PlanExprPtr> args;
                args.reserve(core->args.size());
                for (const AstPtr& arg : core->args) {
                    // A nested aggregate gets its own ASSIGN so the
                    // aggregation rules can recognize and split it.
                    if (is_aggregate_call(arg)) {
                        PlanExprPtr agg = scalar_expr(arg);
                        VarId v = fresh();
                        append_op(LogicalOpKind::Assign, v, std::move(agg));
                        args.push_back(pe_var(v));
                        continue;
                    }
                    args.push_back(scalar_expr(arg));
                }
                return pe_call(core->name, std::move(args));
            }
            case AstKind::Quantified: {
                VarId bound = fresh();
                ScopedBinding bind(*this, core->name, bound);
                PlanExprPtr source = inline_expr(core->args[0]);
                PlanExprPtr cond = inline_expr(core->args[1]);
                return pe_quantified(bound, std::move(source), std::move(cond));
            }
            case AstKind::ForEach: {
                VarId bound = fresh();
                PlanExprPtr source = inline_expr(core->args[0]);
                ScopedBinding bind(*this, core->name, bound);
                PlanExprPtr body = inline_expr(core->args[1]);
                return pe_foreach(bound, std::move(source), std::move(body));
            }
            default:
                raise(ErrorKind::Translation,
                      "construct outside the supported subset in scalar position");
        }
    }

    // Inside quantifier bodies nothing can be hoisted into operators (the
    // expressions depend on the bound variable), so steps and iterations stay
    // expression-level.
    PlanExprPtr inline_expr(const AstPtr& core) {
        switch (core->kind) {
            case AstKind::Literal: return pe_literal(core->literal);
            case AstKind::TypeName: return pe_type(core->name);
            case AstKind::VarRef: return pe_var(lookup(core->name, core->offset));
            case AstKind::FnCall: {
                std::vector<PlanExprPtr> args;
                args.reserve(core->args.size());
                for (const AstPtr& arg : core->args) args.push_back(inline_expr(arg));
                return pe_call(core->name, std::move(args));
            }
            case AstKind::Quantified:
            case AstKind::ForEach: {
                VarId bound = fresh();
                PlanExprPtr source = inline_expr(core->args[0]);
                ScopedBinding bind(*this, core->name, bound);
                PlanExprPtr body = inline_expr(core->args[1]);
                return core->kind == AstKind::Quantified
                           ? pe_quantified(bound, std::move(source), std::move(body))
                           : pe_foreach(bound, std::move(source), std::move(body));
            }
            default:
                raise(ErrorKind::Translation, "FLWOR inside a quantifier is not supported");
        }
    }

    VarId next_var_ = 1;
    std::unordered_map<std::string, VarId> scope_;
    LogicalOpPtr chain_;
};

} // namespace

LogicalPlan translate(const AstPtr& core) {
    return Translator().run(core);
}

} // namespace xq
