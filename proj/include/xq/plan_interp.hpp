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

#include "xq/algebra.hpp"
#include "xq/expr_eval.hpp"

namespace xq {

/// Single-threaded direct interpreter of logical plans; executes any valid
/// plan shape, optimized or not. This is the reference executor used to check
/// that every rewrite prefix preserves semantics.
XDMSequence interpret_plan(const LogicalPlan& plan, EvalContext& ctx);

/// Runs a residual SUBPLAN's nested plan for one outer tuple; each returned
/// entry is the field list of one output tuple (outer fields plus the nested
/// plan's produced fields).
std::vector<std::vector<std::pair<VarId, XDMSequence>>> interpret_nested_plan(
    const LogicalOpPtr& nested_root, const std::vector<std::pair<VarId, XDMSequence>>& input,
    EvalContext& ctx);

} // namespace xq
