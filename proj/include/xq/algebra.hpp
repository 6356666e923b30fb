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

#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "xq/ast.hpp"
#include "xq/error.hpp"
#include "xq/xdm.hpp"

namespace xq {

/// Tuple field name, rendered $$N.
using VarId = uint32_t;

enum class PlanExprKind { Variable, Literal, TypeName, Call, Quantified, ForEach };

struct PlanExpr;
using PlanExprPtr = std::shared_ptr<const PlanExpr>;

struct PlanExpr {
    PlanExprKind kind = PlanExprKind::Literal;
    VarId var = 0;        // Variable; Quantified/ForEach: the bound variable
    AtomicValue literal;  // Literal
    std::string symbol;   // Call: function name; TypeName: the type
    std::vector<PlanExprPtr> args; // Quantified/ForEach: [source, body]
};

PlanExprPtr pe_var(VarId var);
PlanExprPtr pe_literal(AtomicValue value);
PlanExprPtr pe_type(std::string name);
PlanExprPtr pe_call(std::string symbol, std::vector<PlanExprPtr> args);
PlanExprPtr pe_quantified(VarId var, PlanExprPtr source, PlanExprPtr cond);
PlanExprPtr pe_foreach(VarId var, PlanExprPtr source, PlanExprPtr body);

bool expr_is_call(const PlanExprPtr& expr, std::string_view symbol);

enum class LogicalOpKind {
    DataScan,
    Assign,
    DistributeResult,
    EmptyTupleSource,
    Join,
    Aggregate,
    Unnest,
    Select,
    Subplan,
    NestedTupleSource,
};

const char* logical_op_name(LogicalOpKind kind);

enum class AggFn { Count, Sum, Min, Max, Avg };
const char* agg_fn_name(AggFn fn);

struct LogicalOp;
using LogicalOpPtr = std::shared_ptr<LogicalOp>;

/// One logical operator. Plans are single-consumer trees: every operator has
/// one parent, EMPTY-TUPLE-SOURCE / NESTED-TUPLE-SOURCE are leaves, JOIN has
/// two inputs, everything else one.
struct LogicalOp {
    LogicalOpKind kind = LogicalOpKind::EmptyTupleSource;
    std::vector<VarId> produced;       // fields this operator defines
    std::vector<PlanExprPtr> exprs;    // Assign/Unnest/Aggregate: parallel to produced;
                                       // Select/Join: [condition]; DistributeResult: [result var]
    std::vector<LogicalOpPtr> inputs;
    std::vector<LogicalOpPtr> nested;  // Subplan: nested plan root

    // DataScan
    std::string scan_source;              // collection path string
    std::vector<std::string> scan_steps;  // pushed-down child steps

    // Two-step aggregation annotation (Aggregate only).
    bool two_step = false;
    AggFn local_fn = AggFn::Count;
    AggFn global_fn = AggFn::Sum;
};

LogicalOpPtr make_op(LogicalOpKind kind);

struct LogicalPlan {
    LogicalOpPtr root; // DistributeResult
    VarId result_var = 0;
    VarId next_var = 1; // allocation watermark for rewrites
};

LogicalPlan clone_plan(const LogicalPlan& plan);

/// Structural invariant check; returns human-readable problems (empty = valid).
std::vector<std::string> plan_problems(const LogicalPlan& plan);

/// Throws Translation/Rule errors via the caller-supplied kind when invalid.
void validate_plan(const LogicalPlan& plan, ErrorKind kind, const std::string& context);

/// True iff the plans are isomorphic under a bijective renaming of $$N fields.
bool plan_alpha_equal(const LogicalPlan& a, const LogicalPlan& b);

/// Variables read by this operator's expressions (including its nested plan)
/// minus the ones it produces.
std::set<VarId> free_variables(const LogicalOp& op);

std::set<VarId> expr_variables(const PlanExprPtr& expr);

/// Textual plan form: one operator per line in reverse dataflow order, nested
/// plans and join branches in braces. Byte-stable for identical plans.
std::string print_plan(const LogicalPlan& plan);
std::string print_expr(const PlanExprPtr& expr);

/// Inverse of print_plan; whitespace-lenient. Throws PlanSyntaxError.
LogicalPlan parse_plan(const std::string& text);

uint64_t plan_text_hash(const LogicalPlan& plan);

/// Build the initial logical plan from a normalized core tree.
LogicalPlan translate(const AstPtr& core);

} // namespace xq
