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

#include <filesystem>

#include "xq/algebra.hpp"
#include "xq/xml_ingest.hpp"

namespace xq {

enum class ExchangeKind { OneToOne, HashPartition, MergeToOne, Broadcast };

const char* exchange_kind_name(ExchangeKind kind);

enum class PhysOpKind { Assign, Select, Unnest, Subplan, LocalAggregate, GlobalAggregate,
                        SingleAggregate };

struct AggSpec {
    AggFn local_fn = AggFn::Count;
    AggFn global_fn = AggFn::Sum;
    PlanExprPtr expr; // the aggregate call (argument evaluated per tuple)
    VarId out = 0;
};

struct PhysOp {
    PhysOpKind kind = PhysOpKind::Assign;
    VarId var = 0;                       // Assign/Unnest
    PlanExprPtr expr;                    // Assign/Unnest/Select
    LogicalOpPtr nested;                 // Subplan: nested plan, run per tuple
    std::vector<VarId> nested_produced;  // fields the nested plan adds
    std::vector<AggSpec> aggs;           // aggregate steps
    std::vector<VarId> in_schema;
    std::vector<VarId> out_schema;       // projection applied
};

struct ScanDesc {
    std::string source;
    std::vector<std::string> steps;
    VarId var = 0;
};

enum class StageSource { EmptyTuple, Scan, Channel, Join };

struct JoinDesc {
    bool hash = false;
    std::vector<PlanExprPtr> build_keys; // over the build schema
    std::vector<PlanExprPtr> probe_keys; // over the probe schema
    PlanExprPtr condition;               // runtime (restored) form, over the combined tuple
    std::vector<VarId> build_schema;
    std::vector<VarId> probe_schema;
};

struct Stage {
    int id = 0;
    uint32_t partitions = 1;
    StageSource source = StageSource::EmptyTuple;
    ScanDesc scan;
    int in_channel = -1;
    int build_channel = -1;
    int probe_channel = -1;
    JoinDesc join;
    std::vector<VarId> source_schema; // tuples entering the op chain
    std::vector<PhysOp> ops;
    // Output side.
    int out_channel = -1;             // -1: this is the result stage
    ExchangeKind out_exchange = ExchangeKind::MergeToOne;
    std::vector<PlanExprPtr> out_keys;
    std::vector<VarId> out_schema;
    bool is_result = false;
    VarId result_var = 0;
};

struct ChannelDesc {
    int id = 0;
    int producer_stage = 0;
    int consumer_stage = 0;
    ExchangeKind kind = ExchangeKind::MergeToOne;
    uint32_t producers = 1;
    uint32_t consumers = 1;
};

struct PhysicalPlan {
    std::vector<Stage> stages; // topological: producers precede consumers
    std::vector<ChannelDesc> channels;
    VarId result_var = 0;
};

struct PhysicalConfig {
    uint32_t partitions = 1;
    std::filesystem::path data_root;
};

/// Maps a fully optimized logical plan onto stages of physical operators with
/// exchanges: DATASCAN becomes a partitioned scan, annotated AGGREGATEs split
/// into per-partition local and coordinator global steps, JOINs with a
/// recognized cross-branch equal conjunct become hybrid hash joins (hash
/// exchanges on the keys), everything else nested-loop joins with the smaller
/// side broadcast. Throws PhysicalPlanError for shapes with no mapping.
PhysicalPlan select_physical(const LogicalPlan& plan, const PhysicalConfig& config);

std::string print_physical(const PhysicalPlan& plan);

} // namespace xq
