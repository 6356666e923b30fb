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

#include <string>
#include <vector>

#include "xq/algebra.hpp"

namespace xq {

/// Document-order / duplicate-freedom flags tracked per plan edge.
struct OrderingProperty {
    bool document_ordered = true;
    bool duplicate_free = true;
};

/// Property of the stream flowing out of an operator, computed bottom-up from
/// a fixed per-operator table. nts_property seeds NESTED-TUPLE-SOURCE leaves.
OrderingProperty analyze_ordering(const LogicalOp& op, OrderingProperty nts_property = {});

// Individual rewite rules. Each applies the first matching locus (pre-order
// from the root) and reports whether the plan changed.
bool rule_remove_sort(LogicalPlan& plan);
bool rule_remove_subplan(LogicalPlan& plan);
/// Inlines a nested plan that maps a single expression over a singleton field
/// (an artifact of path steps in return position) into a plain ASSIGN.
bool rule_inline_singleton_subplan(LogicalPlan& plan);
bool rule_scalar_to_unnest(LogicalPlan& plan);
bool rule_combine_unnest(LogicalPlan& plan);
bool rule_introduce_datascan(LogicalPlan& plan);
bool rule_push_child_into_datascan(LogicalPlan& plan);
bool rule_scalar_to_aggregate(LogicalPlan& plan);
bool rule_introduce_join(LogicalPlan& plan);
bool rule_two_step_aggregate(LogicalPlan& plan);
/// Splices a SUBPLAN whose outer input is the bare empty tuple (top-level
/// aggregates) so the nested pipeline can run partitioned.
bool rule_flatten_trivial_subplan(LogicalPlan& plan);

/// The spec'd rule order. Indexes are stable; prefix runs use them.
struct NamedRule {
    const char* name;
    bool (*apply)(LogicalPlan&);
    bool logical_stage; // false: logical-to-physical
};
const std::vector<NamedRule>& optimizer_rules();

struct OptimizerOptions {
    bool pushdown_enabled = true;
    bool trace = false;
    int rule_prefix = -1;      // apply only the first N rules of the sequence (-1: all)
    int step_ceiling = 10000;  // hard bound on total rule applications
};

struct TracePoint {
    std::string rule;
    int application; // 1-based within this rule's fixpoint
    LogicalPlan plan;
};

struct OptimizeResult {
    LogicalPlan plan;
    std::vector<TracePoint> trace;
    int steps = 0;
};

/// Applies the rule sequence to fixpoint, validating after every application.
OptimizeResult run_optimizer(const LogicalPlan& plan, const OptimizerOptions& options = {});

/// Rewrites boolean(value-eq(x, y)) conjuncts to generic equal(x, y) so join
/// conditions expose their equality structure to physical selection; restore
/// maps them back for runtime execution.
PlanExprPtr bridge_join_condition(const PlanExprPtr& cond);
PlanExprPtr restore_join_condition(const PlanExprPtr& cond);

} // namespace xq
