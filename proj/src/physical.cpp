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

#include "xq/physical.hpp"

#include <algorithm>
#include <map>

#include "xq/error.hpp"
#include "xq/optimizer.hpp"

namespace xq {

const char* exchange_kind_name(ExchangeKind kind) {
    switch (kind) {
        case ExchangeKind::OneToOne: return "one-to-one";
        case ExchangeKind::HashPartition: return "hash-partition";
        case ExchangeKind::MergeToOne: return "merge-to-one";
        case ExchangeKind::Broadcast: return "broadcast";
    }
    return "?";
}

namespace {

uint64_t estimate_branch_bytes(const LogicalOpPtr& op, const std::filesystem::path& data_root) {
    uint64_t total = 0;
    if (op->kind == LogicalOpKind::DataScan) {
        std::error_code ec;
        std::filesystem::path dir = resolve_collection_dir(data_root, op->scan_source);
        if (std::filesystem::is_directory(dir, ec)) {
            for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
                if (entry.is_regular_file(ec)) total += entry.file_size(ec);
            }
        }
    }
    for (const LogicalOpPtr& input : op->inputs) total += estimate_branch_bytes(input, data_root);
    for (const LogicalOpPtr& nested : op->nested) total += estimate_branch_bytes(nested, data_root);
    return total;
}

std::vector<VarId> collect_produced(const LogicalOpPtr& root) {
    std::vector<VarId> out;
    std::vector<const LogicalOp*> stack{root.get()};
    while (!stack.empty()) {
        const LogicalOp* op = stack.back();
        stack.pop_back();
        for (VarId v : op->produced) out.push_back(v);
        for (const LogicalOpPtr& input : op->inputs) stack.push_back(input.get());
        for (const LogicalOpPtr& nested : op->nested) stack.push_back(nested.get());
    }
    return out;
}

struct OpenStage {
    Stage stage;
    std::vector<VarId> schema;
};

class Compiler {
  public:
    Compiler(const LogicalPlan& plan, const PhysicalConfig& config)
        : logical_(plan), config_(config) {}

    PhysicalPlan run() {
        OpenStage open = compile(logical_.root->inputs[0]);
        // Result collection: merge every partition into the sink.
        int channel = close_stage(std::move(open), ExchangeKind::MergeToOne, {});
        Stage sink;
        sink.partitions = 1;
        sink.source = StageSource::Channel;
        sink.in_channel = channel;
        sink.is_result = true;
        sink.result_var = logical_.result_var;
        finish_stage(std::move(sink), {logical_.result_var});
        plan_.result_var = logical_.result_var;
        project();
        return std::move(plan_);
    }

  private:
    [[noreturn]] void unsupported(const LogicalOp& op) {
        raise(ErrorKind::PhysicalPlan,
              std::string("no physical mapping for ") + logical_op_name(op.kind) + " in this position");
    }

    int new_channel(int producer_stage, ExchangeKind kind, uint32_t producers) {
        ChannelDesc channel;
        channel.id = static_cast<int>(plan_.channels.size());
        channel.producer_stage = producer_stage;
        channel.kind = kind;
        channel.producers = producers;
        plan_.channels.push_back(channel);
        return channel.id;
    }

    // Seals an open stage behind an exchange and returns the channel id.
    int close_stage(OpenStage&& open, ExchangeKind kind, std::vector<PlanExprPtr> keys) {
        open.stage.id = static_cast<int>(plan_.stages.size());
        open.stage.out_exchange = kind;
        open.stage.out_keys = std::move(keys);
        open.stage.out_schema = open.schema;
        int channel = new_channel(open.stage.id, kind, open.stage.partitions);
        open.stage.out_channel = channel;
        plan_.stages.push_back(std::move(open.stage));
        return channel;
    }

    void finish_stage(Stage&& stage, std::vector<VarId> schema) {
        stage.id = static_cast<int>(plan_.stages.size());
        stage.out_schema = std::move(schema);
        if (stage.in_channel >= 0) {
            plan_.channels[stage.in_channel].consumer_stage = stage.id;
            plan_.channels[stage.in_channel].consumers = stage.partitions;
        }
        plan_.stages.push_back(std::move(stage));
    }

    OpenStage stage_from_channel(int channel, uint32_t partitions, std::vector<VarId> schema) {
        OpenStage open;
        open.stage.partitions = partitions;
        open.stage.source = StageSource::Channel;
        open.stage.in_channel = channel;
        open.stage.source_schema = schema;
        open.schema = std::move(schema);
        plan_.channels[channel].consumer_stage = -2; // fixed up in finish
        return open;
    }

    void append_op(OpenStage& open, PhysOp op, const std::vector<VarId>& adds) {
        op.in_schema = open.schema;
        for (VarId v : adds) open.schema.push_back(v);
        op.out_schema = open.schema;
        open.stage.ops.push_back(std::move(op));
    }

    OpenStage compile(const LogicalOpPtr& op) {
        switch (op->kind) {
            case LogicalOpKind::EmptyTupleSource: {
                OpenStage open;
                open.stage.partitions = 1;
                open.stage.source = StageSource::EmptyTuple;
                return open;
            }
            case LogicalOpKind::DataScan: {
                if (op->inputs[0]->kind != LogicalOpKind::EmptyTupleSource) unsupported(*op);
                OpenStage open;
                open.stage.partitions = config_.partitions;
                open.stage.source = StageSource::Scan;
                open.stage.scan.source = op->scan_source;
                open.stage.scan.steps = op->scan_steps;
                open.stage.scan.var = op->produced[0];
                open.stage.source_schema = {op->produced[0]};
                open.schema = {op->produced[0]};
                return open;
            }
            case LogicalOpKind::Assign: {
                OpenStage open = compile(op->inputs[0]);
                for (size_t i = 0; i < op->exprs.size(); ++i) {
                    PhysOp step;
                    step.kind = PhysOpKind::Assign;
                    step.var = op->produced[i];
                    step.expr = op->exprs[i];
                    append_op(open, std::move(step), {op->produced[i]});
                }
                return open;
            }
            case LogicalOpKind::Select: {
                OpenStage open = compile(op->inputs[0]);
                PhysOp step;
                step.kind = PhysOpKind::Select;
                step.expr = op->exprs[0];
                append_op(open, std::move(step), {});
                return open;
            }
            case LogicalOpKind::Unnest: {
                OpenStage open = compile(op->inputs[0]);
                PhysOp step;
                step.kind = PhysOpKind::Unnest;
                step.var = op->produced[0];
                step.expr = op->exprs[0];
                append_op(open, std::move(step), {op->produced[0]});
                return open;
            }
            case LogicalOpKind::Subplan: {
                OpenStage open = compile(op->inputs[0]);
                PhysOp step;
                step.kind = PhysOpKind::Subplan;
                step.nested = op->nested[0];
                step.nested_produced = op->nested[0]->produced;
                append_op(open, std::move(step), op->nested[0]->produced);
                return open;
            }
            case LogicalOpKind::Aggregate: return compile_aggregate(op);
            case LogicalOpKind::Join: return compile_join(op);
            default: unsupported(*op);
        }
    }

    OpenStage compile_aggregate(const LogicalOpPtr& op) {
        OpenStage open = compile(op->inputs[0]);
        if (op->two_step) {
            AggSpec spec;
            spec.local_fn = op->local_fn;
            spec.global_fn = op->global_fn;
            spec.expr = op->exprs[0];
            spec.out = op->produced[0];
            // Partial layout: (sum, count) for avg, one field otherwise.
            std::vector<VarId> partial;
            partial.push_back(next_var_++);
            if (op->local_fn == AggFn::Avg) partial.push_back(next_var_++);

            PhysOp local;
            local.kind = PhysOpKind::LocalAggregate;
            local.aggs = {spec};
            local.in_schema = open.schema;
            local.out_schema = partial;
            open.stage.ops.push_back(std::move(local));
            open.schema = partial;

            int channel = close_stage(std::move(open), ExchangeKind::MergeToOne, {});
            OpenStage global = stage_from_channel(channel, 1, partial);
            PhysOp combine;
            combine.kind = PhysOpKind::GlobalAggregate;
            combine.aggs = {spec};
            combine.in_schema = partial;
            combine.out_schema = {spec.out};
            global.stage.ops.push_back(std::move(combine));
            global.schema = {spec.out};
            return global;
        }
        // Un-annotated aggregate: merge all tuples to one worker and fold.
        std::vector<VarId> in_schema = open.schema;
        int channel = close_stage(std::move(open), ExchangeKind::MergeToOne, {});
        OpenStage merged = stage_from_channel(channel, 1, in_schema);
        PhysOp fold;
        fold.kind = PhysOpKind::SingleAggregate;
        for (size_t i = 0; i < op->exprs.size(); ++i) {
            AggSpec spec;
            spec.expr = op->exprs[i];
            spec.out = op->produced[i];
            fold.aggs.push_back(std::move(spec));
        }
        fold.in_schema = in_schema;
        fold.out_schema = op->produced;
        merged.stage.ops.push_back(std::move(fold));
        merged.schema = op->produced;
        return merged;
    }

    OpenStage compile_join(const LogicalOpPtr& op) {
        uint64_t left_bytes = estimate_branch_bytes(op->inputs[0], config_.data_root);
        uint64_t right_bytes = estimate_branch_bytes(op->inputs[1], config_.data_root);
        // Build on the smaller side.
        int build_index = left_bytes <= right_bytes ? 0 : 1;
        int probe_index = 1 - build_index;

        OpenStage build = compile(op->inputs[build_index]);
        OpenStage probe = compile(op->inputs[probe_index]);

        std::set<VarId> build_vars(build.schema.begin(), build.schema.end());
        std::set<VarId> probe_vars(probe.schema.begin(), probe.schema.end());
        for (VarId v : collect_produced(op->inputs[build_index])) build_vars.insert(v);
        for (VarId v : collect_produced(op->inputs[probe_index])) probe_vars.insert(v);

        // Recognize hashable keys in the bridged condition.
        PlanExprPtr bridged = bridge_join_condition(op->exprs[0]);
        std::vector<PlanExprPtr> build_keys, probe_keys;
        std::vector<PlanExprPtr> conjuncts;
        if (expr_is_call(bridged, "and")) conjuncts = bridged->args;
        else conjuncts = {bridged};
        for (const PlanExprPtr& conjunct : conjuncts) {
            if (!expr_is_call(conjunct, "equal")) continue;
            const PlanExprPtr& a = conjunct->args[0];
            const PlanExprPtr& b = conjunct->args[1];
            if (a->kind != PlanExprKind::Variable || b->kind != PlanExprKind::Variable) continue;
            if (build_vars.count(a->var) && probe_vars.count(b->var)) {
                build_keys.push_back(a);
                probe_keys.push_back(b);
            } else if (build_vars.count(b->var) && probe_vars.count(a->var)) {
                build_keys.push_back(b);
                probe_keys.push_back(a);
            }
        }

        JoinDesc join;
        join.hash = !build_keys.empty();
        join.build_keys = build_keys;
        join.probe_keys = probe_keys;
        join.condition = op->exprs[0];

        Stage joined;
        joined.source = StageSource::Join;
        std::vector<VarId> build_schema = build.schema;
        std::vector<VarId> probe_schema = probe.schema;
        if (join.hash) {
            joined.partitions = config_.partitions;
            joined.build_channel = close_stage(std::move(build), ExchangeKind::HashPartition, build_keys);
            joined.probe_channel = close_stage(std::move(probe), ExchangeKind::HashPartition, probe_keys);
        } else {
            joined.partitions = probe.stage.partitions;
            joined.build_channel = close_stage(std::move(build), ExchangeKind::Broadcast, {});
            joined.probe_channel = close_stage(std::move(probe), ExchangeKind::OneToOne, {});
        }
        plan_.channels[joined.build_channel].consumer_stage = -2;
        plan_.channels[joined.probe_channel].consumer_stage = -2;
        join.build_schema = build_schema;
        join.probe_schema = probe_schema;
        joined.join = join;

        OpenStage open;
        open.stage = std::move(joined);
        open.schema = probe_schema;
        open.schema.insert(open.schema.end(), build_schema.begin(), build_schema.end());
        open.stage.source_schema = open.schema;
        return open;
    }

    // ------------------------------------------------------------------
    // Dead field elimination: walk stages consumer-first, keeping only the
    // fields each channel's consumer actually reads.
    // ------------------------------------------------------------------

    static std::vector<VarId> filter_schema(const std::vector<VarId>& schema,
                                            const std::set<VarId>& needed) {
        std::vector<VarId> out;
        for (VarId v : schema)
            if (needed.count(v)) out.push_back(v);
        return out;
    }

    void add_expr_reads(const PlanExprPtr& expr, std::set<VarId>* needed) {
        if (!expr) return;
        for (VarId v : expr_variables(expr)) needed->insert(v);
    }

    void project() {
        std::map<int, std::set<VarId>> channel_needed;
        for (auto it = plan_.stages.rbegin(); it != plan_.stages.rend(); ++it) {
            Stage& stage = *it;
            std::set<VarId> needed;
            if (stage.is_result) {
                needed.insert(stage.result_var);
            } else {
                needed = channel_needed[stage.out_channel];
                for (const PlanExprPtr& key : stage.out_keys) add_expr_reads(key, &needed);
            }
            stage.out_schema = filter_schema(stage.out_schema, needed);
            for (auto op = stage.ops.rbegin(); op != stage.ops.rend(); ++op) {
                op->out_schema = filter_schema(op->out_schema, needed);
                switch (op->kind) {
                    case PhysOpKind::Assign:
                    case PhysOpKind::Unnest:
                        needed.erase(op->var);
                        add_expr_reads(op->expr, &needed);
                        break;
                    case PhysOpKind::Select: add_expr_reads(op->expr, &needed); break;
                    case PhysOpKind::Subplan: {
                        for (VarId v : op->nested_produced) needed.erase(v);
                        // The nested plan reads the outer tuple through its leaf.
                        LogicalOp wrapper;
                        wrapper.kind = LogicalOpKind::Subplan;
                        wrapper.nested = {op->nested};
                        for (VarId v : free_variables(wrapper)) needed.insert(v);
                        break;
                    }
                    case PhysOpKind::LocalAggregate:
                    case PhysOpKind::SingleAggregate: {
                        std::set<VarId> fresh;
                        for (const AggSpec& spec : op->aggs) add_expr_reads(spec.expr, &fresh);
                        needed = fresh;
                        break;
                    }
                    case PhysOpKind::GlobalAggregate: {
                        // Consumes the whole partial tuple.
                        std::set<VarId> fresh(op->in_schema.begin(), op->in_schema.end());
                        needed = fresh;
                        break;
                    }
                }
                op->in_schema = filter_schema(op->in_schema, needed);
            }
            stage.source_schema = filter_schema(stage.source_schema, needed);
            switch (stage.source) {
                case StageSource::Channel: channel_needed[stage.in_channel] = needed; break;
                case StageSource::Join: {
                    std::set<VarId> build_needed, probe_needed;
                    std::set<VarId> build_vars(stage.join.build_schema.begin(),
                                               stage.join.build_schema.end());
                    std::set<VarId> probe_vars(stage.join.probe_schema.begin(),
                                               stage.join.probe_schema.end());
                    std::set<VarId> wanted = needed;
                    add_expr_reads(stage.join.condition, &wanted);
                    for (const PlanExprPtr& key : stage.join.build_keys) add_expr_reads(key, &wanted);
                    for (const PlanExprPtr& key : stage.join.probe_keys) add_expr_reads(key, &wanted);
                    for (VarId v : wanted) {
                        if (build_vars.count(v)) build_needed.insert(v);
                        if (probe_vars.count(v)) probe_needed.insert(v);
                    }
                    channel_needed[stage.build_channel] = build_needed;
                    channel_needed[stage.probe_channel] = probe_needed;
                    stage.join.build_schema = filter_schema(stage.join.build_schema, build_needed);
                    stage.join.probe_schema = filter_schema(stage.join.probe_schema, probe_needed);
                    stage.source_schema = stage.join.probe_schema;
                    stage.source_schema.insert(stage.source_schema.end(),
                                               stage.join.build_schema.begin(),
                                               stage.join.build_schema.end());
                    break;
                }
                default: break;
            }
        }
        // Channel consumer bookkeeping.
        for (Stage& stage : plan_.stages) {
            if (stage.in_channel >= 0) {
                plan_.channels[stage.in_channel].consumer_stage = stage.id;
                plan_.channels[stage.in_channel].consumers = stage.partitions;
            }
            if (stage.build_channel >= 0) {
                plan_.channels[stage.build_channel].consumer_stage = stage.id;
                plan_.channels[stage.build_channel].consumers = stage.partitions;
                plan_.channels[stage.probe_channel].consumer_stage = stage.id;
                plan_.channels[stage.probe_channel].consumers = stage.partitions;
            }
        }
    }

    const LogicalPlan& logical_;
    const PhysicalConfig& config_;
    PhysicalPlan plan_;
    VarId next_var_ = 1u << 20; // synthetic partial-aggregate fields
};

} // namespace

PhysicalPlan select_physical(const LogicalPlan& plan, const PhysicalConfig& config) {
    return Compiler(plan, config).run();
}

std::string print_physical(const PhysicalPlan& plan) {
    std::string out;
    auto var_list = [](const std::vector<VarId>& vars) {
        std::string s = "[";
        for (size_t i = 0; i < vars.size(); ++i) {
            if (i) s += ", ";
            s += "$$" + std::to_string(vars[i]);
        }
        return s + "]";
    };
    for (const Stage& stage : plan.stages) {
        out += "STAGE " + std::to_string(stage.id) + " [partitions=" +
               std::to_string(stage.partitions) + "]";
        switch (stage.source) {
            case StageSource::EmptyTuple: out += " EMPTY-TUPLE"; break;
            case StageSource::Scan: {
                out += " PARTITIONED-SCAN collection(\"" + stage.scan.source + "\")";
                if (!stage.scan.steps.empty()) {
                    out += " path=\"";
                    for (const std::string& step : stage.scan.steps) out += "/" + step;
                    out += "\"";
                }
                out += " -> $$" + std::to_string(stage.scan.var);
                break;
            }
            case StageSource::Channel:
                out += " FROM channel " + std::to_string(stage.in_channel);
                break;
            case StageSource::Join: {
                out += stage.join.hash ? " HYBRID-HASH-JOIN" : " NESTED-LOOP-JOIN";
                out += " build=channel " + std::to_string(stage.build_channel);
                out += " probe=channel " + std::to_string(stage.probe_channel);
                if (stage.join.hash) {
                    out += " keys=";
                    for (size_t i = 0; i < stage.join.build_keys.size(); ++i) {
                        if (i) out += ",";
                        out += print_expr(stage.join.probe_keys[i]) + "=" +
                               print_expr(stage.join.build_keys[i]);
                    }
                }
                out += " condition=" + print_expr(stage.join.condition);
                break;
            }
        }
        out += "\n";
        for (const PhysOp& op : stage.ops) {
            out += "  ";
            switch (op.kind) {
                case PhysOpKind::Assign:
                    out += "ASSIGN $$" + std::to_string(op.var) + " := " + print_expr(op.expr);
                    break;
                case PhysOpKind::Select: out += "SELECT " + print_expr(op.expr); break;
                case PhysOpKind::Unnest:
                    out += "UNNEST $$" + std::to_string(op.var) + " := " + print_expr(op.expr);
                    break;
                case PhysOpKind::Subplan: out += "SUBPLAN " + var_list(op.nested_produced); break;
                case PhysOpKind::LocalAggregate:
                    out += "LOCAL-AGGREGATE " + std::string(agg_fn_name(op.aggs[0].local_fn)) + " " +
                           print_expr(op.aggs[0].expr);
                    break;
                case PhysOpKind::GlobalAggregate:
                    out += "GLOBAL-AGGREGATE " + std::string(agg_fn_name(op.aggs[0].global_fn)) +
                           " -> $$" + std::to_string(op.aggs[0].out);
                    break;
                case PhysOpKind::SingleAggregate:
                    out += "AGGREGATE";
                    for (const AggSpec& spec : op.aggs)
                        out += " $$" + std::to_string(spec.out) + " := " + print_expr(spec.expr);
                    break;
            }
            out += "\n";
        }
        if (stage.is_result) {
            out += "  => RESULT $$" + std::to_string(stage.result_var) + "\n";
        } else {
            out += "  => EXCHANGE " + std::string(exchange_kind_name(stage.out_exchange));
            if (!stage.out_keys.empty()) {
                out += " keys=";
                for (size_t i = 0; i < stage.out_keys.size(); ++i) {
                    if (i) out += ",";
                    out += print_expr(stage.out_keys[i]);
                }
            }
            out += " carrying " + var_list(stage.out_schema) + " via channel " +
                   std::to_string(stage.out_channel) + "\n";
        }
    }
    return out;
}

} // namespace xq
