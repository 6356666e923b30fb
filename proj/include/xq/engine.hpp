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

#include <optional>

#include "xq/optimizer.hpp"
#include "xq/physical.hpp"
#include "xq/runtime.hpp"

namespace xq {

enum class EngineKind { Parallel, Naive };

struct RunConfig {
    std::string query_text;
    std::filesystem::path data_root = ".";
    uint32_t partitions = 1;
    size_t frame_size = 65536;
    EngineKind engine = EngineKind::Parallel;
    bool pushdown = true;
    size_t join_memory_budget = 64ull << 20;
    std::filesystem::path scratch;
    bool want_trace = false; // keep per-rule plan snapshots
};

struct RunResult {
    XDMSequence result;
    std::string serialized;
    ExecStats stats;
    std::string initial_plan_text;
    std::string logical_plan_text;
    std::string physical_plan_text;
    uint64_t logical_plan_hash = 0;
    std::optional<OptimizeResult> optimize; // when want_trace
};

/// Full pipeline: parse, normalize, translate, optimize, select physical,
/// execute (or hand the core tree to the naive interpreter).
RunResult run_query(const RunConfig& config);

uint64_t fnv1a(const std::string& text);

} // namespace xq
