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

#include "xq/plan_interp.hpp"

#include "xq/error.hpp"

namespace xq {

namespace {

struct InterpTuple {
    std::vector<std::pair<VarId, XDMSequence>> fields;

    void set(VarId var, XDMSequence value) { fields.emplace_back(var, std::move(value)); }

    void bind_into(BindingSet* env) const {
        env->clear();
        for (const auto& [var, seq] : fields) env->bind(var, &seq);
    }
};

class Interpreter {
  public:
    explicit Interpreter(EvalContext& ctx) : ctx_(ctx) {}

    std::vector<InterpTuple> eval_op(const LogicalOp& op) {
        switch (op.kind) {
            case LogicalOpKind::EmptyTupleSource: return {InterpTuple{}};
            case LogicalOpKind::NestedTupleSource:
                if (!nested_input_) raise(ErrorKind::Internal, "nested-tuple-source without input");
                return {*nested_input_};
            case LogicalOpKind::Assign: {
                std::vector<InterpTuple> tuples = eval_op(*op.inputs[0]);
                for (InterpTuple& tuple : tuples) {
                    for (size_t i = 0; i < op.exprs.size(); ++i) {
                        tuple.bind_into(&env_);
                        XDMSequence value = eval_expr(op.exprs[i], env_, ctx_);
                        tuple.set(op.produced[i], std::move(value));
                    }
                }
                return tuples;
            }
            case LogicalOpKind::Select: {
                std::vector<InterpTuple> tuples = eval_op(*op.inputs[0]);
                std::vector<InterpTuple> out;
                for (InterpTuple& tuple : tuples) {
                    tuple.bind_into(&env_);
                    if (eval_expr_boolean(op.exprs[0], env_, ctx_)) out.push_back(std::move(tuple));
                }
                return out;
            }
            case LogicalOpKind::Unnest: {
                std::vector<InterpTuple> tuples = eval_op(*op.inputs[0]);
                std::vector<InterpTuple> out;
                for (InterpTuple& tuple : tuples) {
                    tuple.bind_into(&env_);
                    XDMSequence seq = eval_expr(op.exprs[0], env_, ctx_);
                    for (XDMItem& item : seq) {
                        InterpTuple next = tuple;
                        next.set(op.produced[0], XDMSequence{item});
                        out.push_back(std::move(next));
                    }
                }
                return out;
            }
            case LogicalOpKind::DataScan: {
                std::vector<InterpTuple> tuples = eval_op(*op.inputs[0]);
                std::vector<InterpTuple> out;
                for (const InterpTuple& tuple : tuples) {
                    for (uint32_t p = 0; p < ctx_.spec.partition_count; ++p) {
                        CollectionScan scan(ctx_.spec, p,
                                            resolve_collection_dir(ctx_.spec.data_root, op.scan_source),
                                            op.scan_steps);
                        while (DocumentPtr fragment = scan.next()) {
                            InterpTuple next = tuple;
                            next.set(op.produced[0], XDMSequence{XDMItem(NodeHandle{fragment, 0})});
                            out.push_back(std::move(next));
                        }
                    }
                }
                return out;
            }
            case LogicalOpKind::Aggregate: {
                std::vector<InterpTuple> tuples = eval_op(*op.inputs[0]);
                std::vector<AggAccumulator> accs;
                for (const PlanExprPtr& expr : op.exprs) accs.emplace_back(expr, &ctx_);
                for (InterpTuple& tuple : tuples) {
                    tuple.bind_into(&env_);
                    for (AggAccumulator& acc : accs) acc.accumulate(env_);
                }
                InterpTuple result;
                for (size_t i = 0; i < accs.size(); ++i) result.set(op.produced[i], accs[i].finish());
                return {std::move(result)};
            }
            case LogicalOpKind::Subplan: {
                std::vector<InterpTuple> tuples = eval_op(*op.inputs[0]);
                std::vector<InterpTuple> out;
                for (InterpTuple& tuple : tuples) {
                    const InterpTuple* saved = nested_input_;
                    nested_input_ = &tuple;
                    std::vector<InterpTuple> nested = eval_op(*op.nested[0]);
                    nested_input_ = saved;
                    for (InterpTuple& n : nested) {
                        InterpTuple merged = tuple;
                        for (auto& [var, seq] : n.fields) merged.set(var, std::move(seq));
                        out.push_back(std::move(merged));
                    }
                }
                return out;
            }
            case LogicalOpKind::Join: {
                // inputs[1] is the original outer dataflow, inputs[0] the
                // inner branch; looping outer-major preserves the
                // pre-rewrite tuple order.
                std::vector<InterpTuple> outer = eval_op(*op.inputs[1]);
                std::vector<InterpTuple> inner = eval_op(*op.inputs[0]);
                std::vector<InterpTuple> out;
                for (const InterpTuple& o : outer) {
                    for (const InterpTuple& i : inner) {
                        InterpTuple merged = o;
                        for (const auto& [var, seq] : i.fields) merged.set(var, seq);
                        merged.bind_into(&env_);
                        if (eval_expr_boolean(op.exprs[0], env_, ctx_)) out.push_back(std::move(merged));
                    }
                }
                return out;
            }
            case LogicalOpKind::DistributeResult:
                raise(ErrorKind::Internal, "nested DISTRIBUTE-RESULT");
        }
        raise(ErrorKind::Internal, "unhandled operator in interpreter");
    }

    XDMSequence run(const LogicalPlan& plan) {
        std::vector<InterpTuple> tuples = eval_op(*plan.root->inputs[0]);
        XDMSequence result;
        for (InterpTuple& tuple : tuples) {
            tuple.bind_into(&env_);
            XDMSequence part = eval_expr(plan.root->exprs[0], env_, ctx_);
            result.insert(result.end(), part.begin(), part.end());
        }
        return result;
    }

    std::vector<InterpTuple> eval_subplan(const LogicalOp& subplan, const InterpTuple& outer) {
        nested_input_ = &outer;
        std::vector<InterpTuple> nested = eval_op(*subplan.nested[0]);
        nested_input_ = nullptr;
        std::vector<InterpTuple> out;
        for (InterpTuple& n : nested) {
            InterpTuple merged = outer;
            for (auto& [var, seq] : n.fields) merged.set(var, std::move(seq));
            out.push_back(std::move(merged));
        }
        return out;
    }

  private:
    EvalContext& ctx_;
    BindingSet env_;
    const InterpTuple* nested_input_ = nullptr;
};

} // namespace

XDMSequence interpret_plan(const LogicalPlan& plan, EvalContext& ctx) {
    return Interpreter(ctx).run(plan);
}

std::vector<std::vector<std::pair<VarId, XDMSequence>>> interpret_nested_plan(
    const LogicalOpPtr& nested_root, const std::vector<std::pair<VarId, XDMSequence>>& input,
    EvalContext& ctx) {
    LogicalOp subplan;
    subplan.kind = LogicalOpKind::Subplan;
    subplan.nested = {nested_root};
    LogicalOpPtr source = make_op(LogicalOpKind::EmptyTupleSource);
    subplan.inputs = {source};

    Interpreter interp(ctx);
    InterpTuple outer;
    outer.fields = input;
    std::vector<std::vector<std::pair<VarId, XDMSequence>>> out;
    for (InterpTuple& tuple : interp.eval_subplan(subplan, outer))
        out.push_back(std::move(tuple.fields));
    return out;
}

} // namespace xq
