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

#include "xq/bench.hpp"

#include <chrono>
#include <cstdio>

namespace xq {

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
    std::vector<BenchRow> rows;
    for (const BenchQuery& query : spec.queries) {
        for (uint32_t partitions : spec.partition_counts) {
            BenchRow row;
            row.query = query.name;
            row.partitions = partitions;
            try {
                RunConfig config = spec.base;
                config.query_text = query.text;
                config.partitions = partitions;
                double total_ms = 0;
                int runs = spec.repetitions + 2;
                for (int i = 0; i < runs; ++i) {
                    auto start = std::chrono::steady_clock::now();
                    RunResult result = run_query(config);
                    auto stop = std::chrono::steady_clock::now();
                    double ms = std::chrono::duration<double, std::milli>(stop - start).count();
                    if (i >= 2) total_ms += ms; // first two runs warm the cache
                    if (i == runs - 1) {
                        row.result_hash = fnv1a(result.serialized);
                        row.plan_hash = fnv1a(result.logical_plan_text + result.physical_plan_text);
                    }
                }
                row.mean_ms = total_ms / spec.repetitions;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string format_report(const std::vector<BenchRow>& rows) {
    std::string out = "query\tpartitions\tmean_ms\tresult_hash\tplan_hash\n";
    char line[256];
    for (const BenchRow& row : rows) {
        if (!row.error.empty()) {
            out += row.query + "\t" + std::to_string(row.partitions) + "\tERROR\t" + row.error + "\n";
            continue;
        }
        std::snprintf(line, sizeof(line), "%s\t%u\t%.3f\t%016llx\t%016llx\n", row.query.c_str(),
                      row.partitions, row.mean_ms, static_cast<unsigned long long>(row.result_hash),
                      static_cast<unsigned long long>(row.plan_hash));
        out += line;
    }
    return out;
}

} // namespace xq
