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

#include "xq/algebra.hpp"
#include "xq/xml_ingest.hpp"

namespace xq {

/// Variable bindings for one expression evaluation: a flat list of
/// (field, sequence) pairs; quantifier bindings push and pop at the tail.
class BindingSet {
  public:
    void bind(VarId var, const XDMSequence* value) { entries_.push_back({var, value}); }
    void pop() { entries_.pop_back(); }
    void clear() { entries_.clear(); }

    const XDMSequence* lookup(VarId var) const {
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
            if (it->first == var) return it->second;
        return nullptr;
    }

  private:
    std::vector<std::pair<VarId, const XDMSequence*>> entries_;
};

struct EvalContext {
    PartitionSpec spec;
    std::shared_ptr<DocumentCache> docs;
};

/// Evaluates plan expressions over tuple bindings. Used by the executing
/// runtime and the logical-plan interpreter (not by the naive oracle).
XDMSequence eval_expr(const PlanExprPtr& expr, BindingSet& env, EvalContext& ctx);

bool eval_expr_boolean(const PlanExprPtr& expr, BindingSet& env, EvalContext& ctx);

/// Incremental state for one aggregate expression (count/sum/min/max/avg or
/// create_sequence). The expression's argument is evaluated per input tuple.
class AggAccumulator {
  public:
    AggAccumulator(PlanExprPtr expr, EvalContext* ctx);

    void accumulate(BindingSet& env);
    XDMSequence finish() const;

    /// Partial state for the two-step split: count/sum/min/max carry one
    /// field, avg carries (sum, count).
    std::vector<XDMSequence> partial() const;
    static XDMSequence combine_partials(AggFn global_fn,
                                        const std::vector<std::vector<XDMSequence>>& partials);

    const std::string& fn_name() const { return fn_; }

  private:
    std::string fn_;
    PlanExprPtr arg_;
    EvalContext* ctx_;
    XDMSequence items_;      // create_sequence
    int64_t count_ = 0;
    bool any_ = false;
    AtomicValue fold_;       // sum / min / max running value
    AtomicValue avg_sum_;
};

} // namespace xq
