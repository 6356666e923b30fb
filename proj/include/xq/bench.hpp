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

#include "xq/engine.hpp"

namespace xq {

struct BenchQuery {
    std::string name;
    std::string text;
};

struct BenchSpec {
    std::vector<BenchQuery> queries;
    std::vector<uint32_t> partition_counts;
    int repetitions = 3; // measured runs; two extra warm-up runs are discarded
    RunConfig base;      // data root, frame size, engine settings
};

struct BenchRow {
    std::string query;
    uint32_t partitions = 0;
    double mean_ms = 0;
    uint64_t result_hash = 0;
    uint64_t plan_hash = 0;
    std::string error; // nonempty when the cell failed
};

/// Runs each query repetitions+2 times per partition count, discards the two
/// warm-up runs, and reports the mean of the rest. Errors are recorded per
/// cell and the matrix continues.
std::vector<BenchRow> run_bench(const BenchSpec& spec);

/// Tab-separated: query, partitions, mean_ms, result_hash, plan_hash.
std::string format_report(const std::vector<BenchRow>& rows);

} // namespace xq
