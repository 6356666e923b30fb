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

#include "xq/engine.hpp"

#include "xq/error.hpp"
#include "xq/frontend.hpp"
#include "xq/oracle.hpp"

namespace xq {

uint64_t fnv1a(const std::string& text) {
    uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

RunResult run_query(const RunConfig& config) {
    if (config.partitions < 1) raise(ErrorKind::Internal, "partitions must be at least 1");
    if (config.frame_size < 4096) raise(ErrorKind::Internal, "frame size must be at least 4096");

    RunResult out;
    AstPtr core = normalize(parse_query(config.query_text));

    if (config.engine == EngineKind::Naive) {
        Oracle oracle(config.data_root);
        out.result = oracle.eval_core(core);
        out.serialized = serialize_result(out.result);
        return out;
    }

    LogicalPlan initial = translate(core);
    validate_plan(initial, ErrorKind::Translation, "translated plan");
    out.initial_plan_text = print_plan(initial);

    OptimizerOptions options;
    options.pushdown_enabled = config.pushdown;
    options.trace = config.want_trace;
    OptimizeResult optimized = run_optimizer(initial, options);
    out.logical_plan_text = print_plan(optimized.plan);
    out.logical_plan_hash = plan_text_hash(optimized.plan);

    PhysicalConfig physical_config;
    physical_config.partitions = config.partitions;
    physical_config.data_root = config.data_root;
    PhysicalPlan physical = select_physical(optimized.plan, physical_config);
    out.physical_plan_text = print_physical(physical);
    if (config.want_trace) out.optimize = std::move(optimized);

    RuntimeConfig runtime;
    runtime.data_root = config.data_root;
    runtime.partitions = config.partitions;
    runtime.frame_size = config.frame_size;
    runtime.join_memory_budget = config.join_memory_budget;
    runtime.scratch_dir = config.scratch;
    out.result = execute(physical, runtime, &out.stats);
    out.serialized = serialize_result(out.result);
    return out;
}

} // namespace xq
