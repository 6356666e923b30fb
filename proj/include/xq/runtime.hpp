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

#include <atomic>
#include <filesystem>

#include "xq/physical.hpp"
#include "xq/xml_ingest.hpp"

namespace xq {

/// Runtime tuple: sequences parallel to the owning operator's schema.
struct Tuple {
    std::vector<XDMSequence> fields;
};

/// Fixed-capacity byte block of serialized tuples.
struct Frame {
    std::vector<uint8_t> bytes;
    uint32_t tuple_count = 0;
};

/// Serialized form: nodes are encoded as their whole subtree (size grows with
/// the tree), so frame capacity genuinely bounds materialized tuple size.
void encode_tuple(const Tuple& tuple, std::vector<uint8_t>* out);
Tuple decode_tuple(const uint8_t* data, size_t size);
size_t encoded_tuple_size(const Tuple& tuple);

struct RuntimeConfig {
    std::filesystem::path data_root;
    uint32_t partitions = 1;
    size_t frame_size = 65536;
    size_t join_memory_budget = 64ull << 20;
    std::filesystem::path scratch_dir; // empty: system temp
};

struct ExecStats {
    uint64_t frames_sent = 0;
    uint64_t merge_exchange_bytes = 0; // bytes crossing merge-to-one exchanges
    uint64_t hash_exchange_bytes = 0;
    uint64_t broadcast_bytes = 0;
    uint64_t max_buffered_tuples = 0;  // largest tuple count resident in one frame buffer
    uint64_t join_spill_partitions = 0;
    uint64_t peak_parser_live_nodes = 0;
};

/// Push-based execution of a physical plan: one worker thread per stage
/// partition, frames between operators, bounded queues across exchanges.
/// Deterministic for a fixed config and data set.
XDMSequence execute(const PhysicalPlan& plan, const RuntimeConfig& config, ExecStats* stats = nullptr);

/// Nodes render as XML, atomics as lexical forms, one item per line.
std::string serialize_result(const XDMSequence& seq);

} // namespace xq
