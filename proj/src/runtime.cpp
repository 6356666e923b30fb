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

#include "xq/runtime.hpp"

#include <array>
#include <condition_variable>
#include <functional>
#include <cstring>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "xq/error.hpp"
#include "xq/expr_eval.hpp"
#include "xq/plan_interp.hpp"

namespace xq {

// ---------------------------------------------------------------------------
// Tuple codec
// ---------------------------------------------------------------------------

namespace {

void put_u8(std::vector<uint8_t>* out, uint8_t v) { out->push_back(v); }

void put_u16(std::vector<uint8_t>* out, uint16_t v) {
    out->push_back(static_cast<uint8_t>(v));
    out->push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>* out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out->push_back(static_cast<uint8_t>(v >> (i * 8)));
}

void put_u64(std::vector<uint8_t>* out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out->push_back(static_cast<uint8_t>(v >> (i * 8)));
}

void put_bytes(std::vector<uint8_t>* out, const void* data, size_t size) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    out->insert(out->end(), p, p + size);
}

void put_string(std::vector<uint8_t>* out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    put_bytes(out, s.data(), s.size());
}

struct Reader {
    const uint8_t* data;
    size_t size;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > size) raise(ErrorKind::Internal, "truncated tuple");
    }
    uint8_t u8() {
        need(1);
        return data[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(data[pos] | (data[pos + 1] << 8));
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data[pos + i]) << (i * 8);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data[pos + i]) << (i * 8);
        pos += 8;
        return v;
    }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(data + pos), n);
        pos += n;
        return s;
    }
};

constexpr uint8_t kNodeTag = 0xff;

void encode_atomic(const AtomicValue& v, std::vector<uint8_t>* out) {
    put_u8(out, static_cast<uint8_t>(v.kind()));
    switch (v.kind()) {
        case AtomicKind::Boolean: put_u8(out, v.as_bool() ? 1 : 0); break;
        case AtomicKind::Byte:
        case AtomicKind::Short:
        case AtomicKind::Integer:
        case AtomicKind::Long: put_u64(out, static_cast<uint64_t>(v.as_int())); break;
        case AtomicKind::Double: {
            double d = v.as_double_payload();
            uint64_t bits;
            std::memcpy(&bits, &d, 8);
            put_u64(out, bits);
            break;
        }
        case AtomicKind::Float: {
            float f = v.as_float_payload();
            uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put_u32(out, bits);
            break;
        }
        case AtomicKind::Decimal: {
            __int128 units = v.as_decimal().units();
            put_u64(out, static_cast<uint64_t>(static_cast<unsigned __int128>(units)));
            put_u64(out, static_cast<uint64_t>(static_cast<unsigned __int128>(units) >> 64));
            break;
        }
        case AtomicKind::Date:
        case AtomicKind::DateTime:
        case AtomicKind::Time:
        case AtomicKind::Duration: put_u64(out, static_cast<uint64_t>(v.as_millis())); break;
        default: put_string(out, v.as_string()); break;
    }
}

AtomicValue decode_atomic(Reader* in) {
    AtomicKind kind = static_cast<AtomicKind>(in->u8());
    switch (kind) {
        case AtomicKind::Boolean: return AtomicValue::boolean(in->u8() != 0);
        case AtomicKind::Byte:
        case AtomicKind::Short:
        case AtomicKind::Integer:
        case AtomicKind::Long: return AtomicValue::of_int(kind, static_cast<int64_t>(in->u64()));
        case AtomicKind::Double: {
            uint64_t bits = in->u64();
            double d;
            std::memcpy(&d, &bits, 8);
            return AtomicValue::double_value(d);
        }
        case AtomicKind::Float: {
            uint32_t bits = in->u32();
            float f;
            std::memcpy(&f, &bits, 4);
            return AtomicValue::float_value(f);
        }
        case AtomicKind::Decimal: {
            uint64_t lo = in->u64();
            uint64_t hi = in->u64();
            unsigned __int128 units = (static_cast<unsigned __int128>(hi) << 64) | lo;
            return AtomicValue::decimal(Decimal::from_units(static_cast<__int128>(units)));
        }
        case AtomicKind::Date:
        case AtomicKind::DateTime:
        case AtomicKind::Time:
        case AtomicKind::Duration:
            return AtomicValue::of_millis(kind, static_cast<int64_t>(in->u64()));
        default: return AtomicValue::of_string(kind, in->str());
    }
}

// A node is shipped as its whole subtree: record block re-based to zero plus
// the referenced names.
void encode_node(const NodeHandle& node, std::vector<uint8_t>* out) {
    const Document& doc = *node.doc;
    uint32_t begin = node.index;
    uint32_t end = doc.nodes[begin].subtree_end;
    if (end <= begin) end = begin + 1;
    put_u32(out, doc.partition);
    put_u32(out, doc.doc_seq);
    put_u32(out, end - begin);

    std::vector<uint32_t> names;
    auto local_name = [&](uint32_t name) -> uint32_t {
        for (uint32_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        names.push_back(name);
        return static_cast<uint32_t>(names.size() - 1);
    };
    for (uint32_t i = begin; i < end; ++i) {
        uint32_t name = doc.nodes[i].name;
        if (name != kNoName) local_name(name);
    }
    put_u32(out, static_cast<uint32_t>(names.size()));
    for (uint32_t name : names) put_string(out, doc.name_at(name));

    auto rebase = [&](uint32_t idx) -> uint32_t {
        if (idx == kNoNode || idx < begin || idx >= end) return kNoNode;
        return idx - begin;
    };
    for (uint32_t i = begin; i < end; ++i) {
        const NodeRecord& rec = doc.nodes[i];
        put_u8(out, static_cast<uint8_t>(rec.kind));
        put_u16(out, rec.attr_count);
        put_u32(out, rec.name == kNoName ? kNoName : local_name(rec.name));
        put_u32(out, rebase(rec.parent));
        put_u32(out, rebase(rec.first_child));
        put_u32(out, rebase(rec.next_sibling));
        put_u32(out, rec.pre_order);
        put_u32(out, rec.subtree_end - begin > end - begin ? end - begin : rec.subtree_end - begin);
        put_string(out, rec.text);
    }
}

NodeHandle decode_node(Reader* in) {
    auto doc = std::make_shared<Document>();
    doc->partition = in->u32();
    doc->doc_seq = in->u32();
    uint32_t count = in->u32();
    uint32_t name_count = in->u32();
    auto table = std::make_shared<NameTable>();
    table->reserve(name_count);
    for (uint32_t i = 0; i < name_count; ++i) table->push_back(in->str());
    doc->names = std::move(table);
    doc->nodes.resize(count);
    for (uint32_t i = 0; i < count; ++i) {
        NodeRecord& rec = doc->nodes[i];
        rec.kind = static_cast<NodeKind>(in->u8());
        rec.attr_count = in->u16();
        rec.name = in->u32();
        rec.parent = in->u32();
        rec.first_child = in->u32();
        rec.next_sibling = in->u32();
        rec.pre_order = in->u32();
        rec.subtree_end = in->u32();
        rec.text = in->str();
    }
    return NodeHandle{std::move(doc), 0};
}

} // namespace

void encode_tuple(const Tuple& tuple, std::vector<uint8_t>* out) {
    put_u16(out, static_cast<uint16_t>(tuple.fields.size()));
    for (const XDMSequence& field : tuple.fields) {
        put_u32(out, static_cast<uint32_t>(field.size()));
        for (const XDMItem& item : field) {
            if (item.is_node()) {
                put_u8(out, kNodeTag);
                encode_node(item.node(), out);
            } else {
                encode_atomic(item.atomic(), out);
            }
        }
    }
}

Tuple decode_tuple(const uint8_t* data, size_t size) {
    Reader in{data, size};
    Tuple tuple;
    uint16_t nfields = in.u16();
    tuple.fields.resize(nfields);
    for (uint16_t f = 0; f < nfields; ++f) {
        uint32_t count = in.u32();
        XDMSequence& seq = tuple.fields[f];
        seq.reserve(count);
        for (uint32_t i = 0; i < count; ++i) {
            in.need(1);
            if (in.data[in.pos] == kNodeTag) {
                in.pos++;
                seq.emplace_back(decode_node(&in));
            } else {
                seq.emplace_back(decode_atomic(&in));
            }
        }
    }
    return tuple;
}

// Size of the encoded form without building it. Node name tables are counted
// without de-duplication, a small conservative overestimate.
size_t encoded_tuple_size(const Tuple& tuple) {
    size_t total = 2;
    for (const XDMSequence& field : tuple.fields) {
        total += 4;
        for (const XDMItem& item : field) {
            if (!item.is_node()) {
                const AtomicValue& v = item.atomic();
                total += 1;
                switch (v.kind()) {
                    case AtomicKind::Boolean: total += 1; break;
                    case AtomicKind::Float: total += 4; break;
                    case AtomicKind::Decimal: total += 16; break;
                    case AtomicKind::String:
                    case AtomicKind::Binary:
                    case AtomicKind::QName:
                    case AtomicKind::UntypedAtomic: total += 4 + v.as_string().size(); break;
                    default: total += 8; break;
                }
                continue;
            }
            const NodeHandle& node = item.node();
            const Document& doc = *node.doc;
            uint32_t begin = node.index;
            uint32_t end = doc.nodes[begin].subtree_end;
            if (end <= begin) end = begin + 1;
            total += 1 + 16;
            for (uint32_t i = begin; i < end; ++i) {
                const NodeRecord& rec = doc.nodes[i];
                total += 27 + 4 + rec.text.size();
                if (rec.name != kNoName) total += 4 + doc.name_at(rec.name).size();
            }
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Frame queues
// ---------------------------------------------------------------------------

namespace {

class AbortFlag {
  public:
    void trip(std::exception_ptr error) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!error_) error_ = std::move(error);
        tripped_.store(true, std::memory_order_release);
    }
    bool tripped() const { return tripped_.load(std::memory_order_acquire); }
    void rethrow_if_any() {
        std::lock_guard<std::mutex> lock(mutex_);
        if (error_) std::rethrow_exception(error_);
    }

  private:
    std::mutex mutex_;
    std::exception_ptr error_;
    std::atomic<bool> tripped_{false};
};

struct Aborted {};

// Bounded single-producer single-consumer frame queue with backpressure.
class FrameQueue {
  public:
    explicit FrameQueue(AbortFlag* abort, size_t capacity = 16) : abort_(abort), capacity_(capacity) {}

    void push(Frame&& frame) {
        std::unique_lock<std::mutex> lock(mutex_);
        not_full_.wait(lock, [&] { return frames_.size() < capacity_ || abort_->tripped(); });
        if (abort_->tripped()) throw Aborted{};
        frames_.push_back(std::move(frame));
        not_empty_.notify_one();
    }

    void close() {
        std::lock_guard<std::mutex> lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
    }

    // nullopt once closed and drained.
    std::optional<Frame> pop() {
        std::unique_lock<std::mutex> lock(mutex_);
        not_empty_.wait(lock, [&] { return !frames_.empty() || closed_ || abort_->tripped(); });
        if (abort_->tripped()) throw Aborted{};
        if (frames_.empty()) return std::nullopt;
        Frame frame = std::move(frames_.front());
        frames_.pop_front();
        not_full_.notify_one();
        return frame;
    }

    void wake_all() {
        std::lock_guard<std::mutex> lock(mutex_);
        not_empty_.notify_all();
        not_full_.notify_all();
    }

  private:
    AbortFlag* abort_;
    size_t capacity_;
    std::mutex mutex_;
    std::condition_variable not_full_, not_empty_;
    std::deque<Frame> frames_;
    bool closed_ = false;
};

// queues[consumer][producer]
using ChannelQueues = std::vector<std::vector<std::unique_ptr<FrameQueue>>>;

// ---------------------------------------------------------------------------
// Tuple pipeline steps
// ---------------------------------------------------------------------------

struct TupleSink {
    virtual ~TupleSink() = default;
    virtual void push(Tuple&& tuple) = 0;
    virtual void finish() = 0;
};

struct SharedState {
    const PhysicalPlan* plan;
    RuntimeConfig config;
    PartitionSpec spec;
    std::shared_ptr<DocumentCache> docs;
    std::vector<ChannelQueues> channels;
    AbortFlag abort;
    std::filesystem::path scratch;
    // stats
    std::atomic<uint64_t> frames_sent{0};
    std::atomic<uint64_t> merge_bytes{0};
    std::atomic<uint64_t> hash_bytes{0};
    std::atomic<uint64_t> broadcast_bytes{0};
    std::atomic<uint64_t> max_buffered{0};
    std::atomic<uint64_t> spills{0};
    std::atomic<uint64_t> parser_peak{0};
    // result
    std::mutex result_mutex;
    XDMSequence result;

    void note_buffered(uint64_t tuples) {
        uint64_t prev = max_buffered.load(std::memory_order_relaxed);
        while (tuples > prev &&
               !max_buffered.compare_exchange_weak(prev, tuples, std::memory_order_relaxed)) {
        }
    }
};

// Serializes tuples into a frame; forwards the frame's tuples downstream when
// it fills. Pipeline granularity is therefore one frame, and a single tuple
// larger than the frame capacity is a hard error.
class FrameLink : public TupleSink {
  public:
    FrameLink(SharedState* state, TupleSink* next) : state_(state), next_(next) {}

    void push(Tuple&& tuple) override {
        size_t bytes = encoded_tuple_size(tuple);
        if (bytes + 8 > state_->config.frame_size)
            raise(ErrorKind::FrameOverflow,
                  "tuple of " + std::to_string(bytes) + " bytes exceeds the frame capacity of " +
                      std::to_string(state_->config.frame_size));
        if (buffered_bytes_ + bytes > state_->config.frame_size) flush();
        buffered_bytes_ += bytes;
        buffer_.push_back(std::move(tuple));
        if (buffer_.size() > local_max_) local_max_ = buffer_.size();
    }

    void finish() override {
        flush();
        state_->note_buffered(local_max_);
        next_->finish();
    }

  private:
    void flush() {
        for (Tuple& tuple : buffer_) next_->push(std::move(tuple));
        buffer_.clear();
        buffered_bytes_ = 0;
    }

    SharedState* state_;
    TupleSink* next_;
    std::vector<Tuple> buffer_;
    size_t buffered_bytes_ = 0;
    uint64_t local_max_ = 0;
};

BindingSet make_bindings(const std::vector<VarId>& schema, const Tuple& tuple) {
    BindingSet env;
    for (size_t i = 0; i < schema.size(); ++i) env.bind(schema[i], &tuple.fields[i]);
    return env;
}

Tuple project_tuple(const std::vector<VarId>& in_schema, const Tuple& in,
                    const std::vector<VarId>& out_schema, const XDMSequence* extra = nullptr,
                    VarId extra_var = 0) {
    Tuple out;
    out.fields.reserve(out_schema.size());
    for (VarId v : out_schema) {
        if (extra && v == extra_var) {
            out.fields.push_back(*extra);
            continue;
        }
        bool found = false;
        for (size_t i = 0; i < in_schema.size(); ++i) {
            if (in_schema[i] == v) {
                out.fields.push_back(in.fields[i]);
                found = true;
                break;
            }
        }
        if (!found) raise(ErrorKind::Internal, "projection misses $$" + std::to_string(v));
    }
    return out;
}

// Destructive variant: the consumed tuple gives up its field storage.
Tuple project_tuple_move(const std::vector<VarId>& in_schema, Tuple&& in,
                         const std::vector<VarId>& out_schema, XDMSequence* extra = nullptr,
                         VarId extra_var = 0) {
    Tuple out;
    out.fields.reserve(out_schema.size());
    for (VarId v : out_schema) {
        if (extra && v == extra_var) {
            out.fields.push_back(std::move(*extra));
            continue;
        }
        bool found = false;
        for (size_t i = 0; i < in_schema.size(); ++i) {
            if (in_schema[i] == v) {
                out.fields.push_back(std::move(in.fields[i]));
                found = true;
                break;
            }
        }
        if (!found) raise(ErrorKind::Internal, "projection misses $$" + std::to_string(v));
    }
    return out;
}

class AssignStep : public TupleSink {
  public:
    AssignStep(const PhysOp* op, EvalContext* ctx, TupleSink* next) : op_(op), ctx_(ctx), next_(next) {}

    void push(Tuple&& tuple) override {
        BindingSet env = make_bindings(op_->in_schema, tuple);
        XDMSequence value = eval_expr(op_->expr, env, *ctx_);
        next_->push(
            project_tuple_move(op_->in_schema, std::move(tuple), op_->out_schema, &value, op_->var));
    }
    void finish() override { next_->finish(); }

  private:
    const PhysOp* op_;
    EvalContext* ctx_;
    TupleSink* next_;
};

class SelectStep : public TupleSink {
  public:
    SelectStep(const PhysOp* op, EvalContext* ctx, TupleSink* next) : op_(op), ctx_(ctx), next_(next) {}

    void push(Tuple&& tuple) override {
        BindingSet env = make_bindings(op_->in_schema, tuple);
        if (!eval_expr_boolean(op_->expr, env, *ctx_)) return;
        next_->push(project_tuple_move(op_->in_schema, std::move(tuple), op_->out_schema));
    }
    void finish() override { next_->finish(); }

  private:
    const PhysOp* op_;
    EvalContext* ctx_;
    TupleSink* next_;
};

class UnnestStep : public TupleSink {
  public:
    UnnestStep(const PhysOp* op, EvalContext* ctx, TupleSink* next) : op_(op), ctx_(ctx), next_(next) {}

    void push(Tuple&& tuple) override {
        BindingSet env = make_bindings(op_->in_schema, tuple);
        XDMSequence seq = eval_expr(op_->expr, env, *ctx_);
        for (XDMItem& item : seq) {
            XDMSequence single{item};
            next_->push(project_tuple(op_->in_schema, tuple, op_->out_schema, &single, op_->var));
        }
    }
    void finish() override { next_->finish(); }

  private:
    const PhysOp* op_;
    EvalContext* ctx_;
    TupleSink* next_;
};

class SubplanStep : public TupleSink {
  public:
    SubplanStep(const PhysOp* op, EvalContext* ctx, TupleSink* next) : op_(op), ctx_(ctx), next_(next) {}

    void push(Tuple&& tuple) override {
        std::vector<std::pair<VarId, XDMSequence>> input;
        input.reserve(op_->in_schema.size());
        for (size_t i = 0; i < op_->in_schema.size(); ++i)
            input.emplace_back(op_->in_schema[i], tuple.fields[i]);
        auto results = interpret_nested_plan(op_->nested, input, *ctx_);
        for (auto& nested : results) {
            Tuple out;
            out.fields.reserve(op_->out_schema.size());
            for (VarId v : op_->out_schema) {
                const XDMSequence* found = nullptr;
                for (auto& [var, seq] : nested)
                    if (var == v) found = &seq;
                if (!found)
                    for (size_t i = 0; i < op_->in_schema.size(); ++i)
                        if (op_->in_schema[i] == v) found = &tuple.fields[i];
                if (!found) raise(ErrorKind::Internal, "subplan output misses a field");
                out.fields.push_back(*found);
            }
            next_->push(std::move(out));
        }
    }
    void finish() override { next_->finish(); }

  private:
    const PhysOp* op_;
    EvalContext* ctx_;
    TupleSink* next_;
};

class LocalAggregateStep : public TupleSink {
  public:
    LocalAggregateStep(const PhysOp* op, EvalContext* ctx, TupleSink* next)
        : op_(op), ctx_(ctx), next_(next), acc_(op->aggs[0].expr, ctx) {}

    void push(Tuple&& tuple) override {
        BindingSet env = make_bindings(op_->in_schema, tuple);
        acc_.accumulate(env);
    }

    void finish() override {
        Tuple out;
        out.fields = acc_.partial();
        next_->push(std::move(out));
        next_->finish();
    }

  private:
    const PhysOp* op_;
    EvalContext* ctx_;
    TupleSink* next_;
    AggAccumulator acc_;
};

class GlobalAggregateStep : public TupleSink {
  public:
    GlobalAggregateStep(const PhysOp* op, TupleSink* next) : op_(op), next_(next) {}

    void push(Tuple&& tuple) override { partials_.push_back(std::move(tuple.fields)); }

    void finish() override {
        Tuple out;
        out.fields.push_back(AggAccumulator::combine_partials(op_->aggs[0].global_fn, partials_));
        next_->push(std::move(out));
        next_->finish();
    }

  private:
    const PhysOp* op_;
    TupleSink* next_;
    std::vector<std::vector<XDMSequence>> partials_;
};

class SingleAggregateStep : public TupleSink {
  public:
    SingleAggregateStep(const PhysOp* op, EvalContext* ctx, TupleSink* next) : op_(op), next_(next) {
        for (const AggSpec& spec : op->aggs) accs_.emplace_back(spec.expr, ctx);
    }

    void push(Tuple&& tuple) override {
        BindingSet env = make_bindings(op_->in_schema, tuple);
        for (AggAccumulator& acc : accs_) acc.accumulate(env);
    }

    void finish() override {
        Tuple out;
        for (AggAccumulator& acc : accs_) out.fields.push_back(acc.finish());
        next_->push(std::move(out));
        next_->finish();
    }

  private:
    const PhysOp* op_;
    TupleSink* next_;
    std::vector<AggAccumulator> accs_;
};

// Exchange output: routes encoded tuples into per-consumer frames.
class ExchangeSink : public TupleSink {
  public:
    ExchangeSink(SharedState* state, const Stage* stage, uint32_t my_partition)
        : state_(state), stage_(stage), partition_(my_partition) {
        const ChannelDesc& channel = state->plan->channels[stage->out_channel];
        consumers_ = channel.consumers;
        frames_.resize(consumers_);
        for (Frame& frame : frames_) frame.bytes.reserve(1024);
        ctx_ = EvalContext{state->spec, state->docs};
    }

    void push(Tuple&& tuple) override {
        std::vector<uint8_t> bytes;
        encode_tuple(tuple, &bytes);
        if (bytes.size() + 8 > state_->config.frame_size)
            raise(ErrorKind::FrameOverflow, "tuple exceeds frame capacity at exchange");
        switch (stage_->out_exchange) {
            case ExchangeKind::MergeToOne: append(0, bytes); break;
            case ExchangeKind::OneToOne: append(partition_ % consumers_, bytes); break;
            case ExchangeKind::Broadcast:
                for (uint32_t c = 0; c < consumers_; ++c) append(c, bytes);
                break;
            case ExchangeKind::HashPartition: {
                BindingSet env = make_bindings(stage_->out_schema, tuple);
                uint64_t hash = 1469598103934665603ull;
                for (const PlanExprPtr& key : stage_->out_keys) {
                    XDMSequence value = eval_expr(key, env, ctx_);
                    std::string canonical = hash_canonical(value);
                    for (unsigned char c : canonical) {
                        hash ^= c;
                        hash *= 1099511628211ull;
                    }
                }
                append(static_cast<uint32_t>(hash % consumers_), bytes);
                break;
            }
        }
    }

    void finish() override {
        for (uint32_t c = 0; c < consumers_; ++c) {
            if (frames_[c].tuple_count > 0) send(c);
            queue(c).close();
        }
        state_->note_buffered(local_max_);
    }

    // Canonical key bytes: equal values (after the value-eq promotion rules)
    // map to equal strings. Numerics hash through double, so decimal/double
    // mixes land in one bucket; the join condition still verifies equality.
    static std::string hash_canonical(const XDMSequence& seq) {
        if (seq.empty()) return "()";
        AtomicValue v = atomize_item(seq.front());
        if (v.is_string_family()) return "S:" + v.as_string();
        if (v.is_numeric()) {
            double d = v.numeric_as_double();
            uint64_t bits;
            std::memcpy(&bits, &d, 8);
            if (d == 0.0) bits = 0; // -0.0 and 0.0 compare equal
            return "N:" + std::to_string(bits);
        }
        switch (v.kind()) {
            case AtomicKind::Boolean: return v.as_bool() ? "B:1" : "B:0";
            case AtomicKind::Date:
            case AtomicKind::DateTime:
            case AtomicKind::Time: return "T:" + std::to_string(v.as_millis());
            default: return "O:" + v.lexical();
        }
    }

  private:
    FrameQueue& queue(uint32_t consumer) {
        return *state_->channels[stage_->out_channel][consumer][partition_];
    }

    void append(uint32_t consumer, const std::vector<uint8_t>& bytes) {
        Frame& frame = frames_[consumer];
        if (frame.bytes.size() + bytes.size() + 4 > state_->config.frame_size && frame.tuple_count > 0)
            send(consumer);
        put_u32(&frames_[consumer].bytes, static_cast<uint32_t>(bytes.size()));
        put_bytes(&frames_[consumer].bytes, bytes.data(), bytes.size());
        frames_[consumer].tuple_count++;
        if (frames_[consumer].tuple_count > local_max_) local_max_ = frames_[consumer].tuple_count;
    }

    void send(uint32_t consumer) {
        Frame& frame = frames_[consumer];
        uint64_t bytes = frame.bytes.size();
        switch (stage_->out_exchange) {
            case ExchangeKind::MergeToOne: state_->merge_bytes += bytes; break;
            case ExchangeKind::HashPartition: state_->hash_bytes += bytes; break;
            case ExchangeKind::Broadcast: state_->broadcast_bytes += bytes; break;
            default: break;
        }
        state_->frames_sent++;
        queue(consumer).push(std::move(frame));
        frames_[consumer] = Frame{};
    }

    SharedState* state_;
    const Stage* stage_;
    uint32_t partition_;
    uint32_t consumers_;
    std::vector<Frame> frames_;
    uint64_t local_max_ = 0;
    EvalContext ctx_;
};

class ResultSink : public TupleSink {
  public:
    ResultSink(SharedState* state) : state_(state) {}

    void push(Tuple&& tuple) override {
        if (tuple.fields.empty()) return;
        XDMSequence& seq = tuple.fields[0];
        local_.insert(local_.end(), seq.begin(), seq.end());
    }

    void finish() override {
        std::lock_guard<std::mutex> lock(state_->result_mutex);
        state_->result.insert(state_->result.end(), local_.begin(), local_.end());
    }

  private:
    SharedState* state_;
    XDMSequence local_;
};

void for_each_frame_tuple(const Frame& frame,
                          const std::function<void(Tuple&&, size_t)>& fn) {
    size_t pos = 0;
    const std::vector<uint8_t>& bytes = frame.bytes;
    for (uint32_t i = 0; i < frame.tuple_count; ++i) {
        if (pos + 4 > bytes.size()) raise(ErrorKind::Internal, "truncated frame");
        uint32_t len = 0;
        for (int b = 0; b < 4; ++b) len |= static_cast<uint32_t>(bytes[pos + b]) << (b * 8);
        pos += 4;
        fn(decode_tuple(bytes.data() + pos, len), len);
        pos += len;
    }
}

// ---------------------------------------------------------------------------
// Hybrid hash join
// ---------------------------------------------------------------------------

// Keeps sub-partition 0 of the build side memory resident; once the in-memory
// footprint exceeds the budget the remaining sub-partitions spill to disk and
// are joined recursively.
class HybridHashJoin {
  public:
    static constexpr int kFanOut = 8;
    static constexpr int kMaxDepth = 8;

    HybridHashJoin(SharedState* state, const Stage* stage, uint32_t partition, EvalContext* ctx,
                   TupleSink* out, const std::vector<VarId>* out_schema, int depth = 0)
        : state_(state),
          stage_(stage),
          partition_(partition),
          ctx_(ctx),
          out_(out),
          out_schema_(out_schema),
          depth_(depth) {}

    void add_build(Tuple&& tuple, size_t serialized_bytes) {
        auto key = key_of(tuple, stage_->join.build_schema, stage_->join.build_keys);
        if (!key) return; // empty key never matches
        int sub = subpartition(*key);
        if (sub == 0 || depth_ >= kMaxDepth) {
            insert_resident(*key, std::move(tuple), serialized_bytes);
            return;
        }
        if (!spilling_ && resident_bytes_ > state_->config.join_memory_budget) start_spill();
        if (spilling_) {
            spill(build_files_, sub, *key, tuple);
        } else {
            insert_resident(*key, std::move(tuple), serialized_bytes);
        }
    }

    void build_done() {}

    void add_probe(Tuple&& tuple) {
        auto key = key_of(tuple, stage_->join.probe_schema, stage_->join.probe_keys);
        if (!key) return;
        int sub = subpartition(*key);
        if (spilling_ && sub != 0 && depth_ < kMaxDepth) {
            spill(probe_files_, sub, *key, tuple);
            return;
        }
        probe_resident(*key, tuple);
    }

    void probe_done() {
        for (int sub = 1; sub < kFanOut; ++sub) {
            if (!build_files_[sub].is_open() && !probe_files_[sub].is_open()) continue;
            state_->spills++;
            HybridHashJoin nested(state_, stage_, partition_, ctx_, out_, out_schema_, depth_ + 1);
            replay(build_files_[sub], build_paths_[sub],
                   [&](std::string key, Tuple&& tuple, size_t bytes) {
                       nested.insert_resident(key, std::move(tuple), bytes);
                   });
            nested.build_done();
            replay(probe_files_[sub], probe_paths_[sub],
                   [&](std::string key, Tuple&& tuple, size_t) { nested.probe_resident(key, tuple); });
            nested.probe_done();
        }
        cleanup();
    }

    void insert_resident(const std::string& key, Tuple&& tuple, size_t serialized_bytes) {
        resident_.emplace_back(key, std::move(tuple));
        resident_bytes_ += serialized_bytes + 64;
        sizes_.push_back(serialized_bytes);
        table_[resident_.back().first].push_back(resident_.size() - 1);
    }

    void probe_resident(const std::string& key, const Tuple& probe) {
        auto it = table_.find(key);
        if (it == table_.end()) return;
        for (size_t idx : it->second) {
            const Tuple& build = resident_[idx].second;
            Tuple combined;
            combined.fields.reserve(stage_->join.probe_schema.size() +
                                    stage_->join.build_schema.size());
            for (const XDMSequence& f : probe.fields) combined.fields.push_back(f);
            for (const XDMSequence& f : build.fields) combined.fields.push_back(f);
            BindingSet env = make_bindings(stage_->source_schema, combined);
            if (eval_expr_boolean(stage_->join.condition, env, *ctx_))
                out_->push(project_tuple(stage_->source_schema, combined, *out_schema_));
        }
    }

  private:
    std::optional<std::string> key_of(const Tuple& tuple, const std::vector<VarId>& schema,
                                      const std::vector<PlanExprPtr>& keys) {
        BindingSet env = make_bindings(schema, tuple);
        std::string combined;
        for (const PlanExprPtr& key : keys) {
            XDMSequence value = eval_expr(key, env, *ctx_);
            if (value.empty()) return std::nullopt;
            if (value.size() > 1) raise(ErrorKind::Type, "join key is not a singleton");
            combined += ExchangeSink::hash_canonical(value);
            combined.push_back('\x1f');
        }
        return combined;
    }

    int subpartition(const std::string& key) const {
        uint64_t hash = 0xcbf29ce484222325ull ^ (0x9e3779b9u * (depth_ + 1));
        for (unsigned char c : key) {
            hash ^= c;
            hash *= 1099511628211ull;
        }
        return static_cast<int>(hash % kFanOut);
    }

    void start_spill() {
        spilling_ = true;
        // Evict the resident tuples that belong to sub-partitions 1..n.
        std::vector<std::pair<std::string, Tuple>> keep;
        std::vector<size_t> keep_sizes;
        std::unordered_map<std::string, std::vector<size_t>> keep_table;
        resident_bytes_ = 0;
        for (size_t i = 0; i < resident_.size(); ++i) {
            auto& [key, tuple] = resident_[i];
            int sub = subpartition(key);
            if (sub == 0) {
                keep.emplace_back(key, std::move(tuple));
                keep_sizes.push_back(sizes_[i]);
                resident_bytes_ += sizes_[i] + 64;
                keep_table[keep.back().first].push_back(keep.size() - 1);
            } else {
                spill(build_files_, sub, key, tuple);
            }
        }
        resident_ = std::move(keep);
        sizes_ = std::move(keep_sizes);
        table_ = std::move(keep_table);
    }

    void spill(std::array<std::fstream, kFanOut>& files, int sub, const std::string& key,
               const Tuple& tuple) {
        auto& paths = &files == &build_files_ ? build_paths_ : probe_paths_;
        if (!files[sub].is_open()) {
            paths[sub] = state_->scratch /
                         ("join-" + std::to_string(partition_) + "-" + std::to_string(depth_) + "-" +
                          (&files == &build_files_ ? "b" : "p") + std::to_string(sub) + ".spill");
            files[sub].open(paths[sub], std::ios::in | std::ios::out | std::ios::trunc |
                                            std::ios::binary);
            if (!files[sub]) raise(ErrorKind::SpillIo, "cannot open spill file " + paths[sub].string());
        }
        std::vector<uint8_t> bytes;
        put_string(&bytes, key);
        encode_tuple(tuple, &bytes);
        uint32_t len = static_cast<uint32_t>(bytes.size());
        files[sub].write(reinterpret_cast<const char*>(&len), 4);
        files[sub].write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        if (!files[sub]) raise(ErrorKind::SpillIo, "spill write failed");
    }

    void replay(std::fstream& file, const std::filesystem::path& path,
                const std::function<void(std::string, Tuple&&, size_t)>& fn) {
        if (!file.is_open()) return;
        file.flush();
        file.seekg(0);
        while (true) {
            uint32_t len = 0;
            file.read(reinterpret_cast<char*>(&len), 4);
            if (!file) break;
            std::vector<uint8_t> bytes(len);
            file.read(reinterpret_cast<char*>(bytes.data()), len);
            if (!file) raise(ErrorKind::SpillIo, "truncated spill file " + path.string());
            Reader in{bytes.data(), bytes.size(), 0};
            std::string key = in.str();
            size_t tuple_bytes = bytes.size() - in.pos;
            Tuple tuple = decode_tuple(bytes.data() + in.pos, tuple_bytes);
            fn(std::move(key), std::move(tuple), tuple_bytes);
        }
        file.close();
    }

    void cleanup() {
        std::error_code ec;
        for (int sub = 0; sub < kFanOut; ++sub) {
            if (build_files_[sub].is_open()) build_files_[sub].close();
            if (probe_files_[sub].is_open()) probe_files_[sub].close();
            if (!build_paths_[sub].empty()) std::filesystem::remove(build_paths_[sub], ec);
            if (!probe_paths_[sub].empty()) std::filesystem::remove(probe_paths_[sub], ec);
        }
    }

    SharedState* state_;
    const Stage* stage_;
    uint32_t partition_;
    EvalContext* ctx_;
    TupleSink* out_;
    const std::vector<VarId>* out_schema_;
    int depth_;
    bool spilling_ = false;
    std::vector<std::pair<std::string, Tuple>> resident_;
    std::vector<size_t> sizes_;
    std::unordered_map<std::string, std::vector<size_t>> table_;
    size_t resident_bytes_ = 0;
    std::array<std::fstream, kFanOut> build_files_, probe_files_;
    std::array<std::filesystem::path, kFanOut> build_paths_, probe_paths_;
};

// ---------------------------------------------------------------------------
// Stage runner
// ---------------------------------------------------------------------------

class StageRunner {
  public:
    StageRunner(SharedState* state, const Stage* stage, uint32_t partition)
        : state_(state), stage_(stage), partition_(partition) {
        ctx_ = EvalContext{state->spec, state->docs};
    }

    void run() {
        // Build the op chain back to front with frame links between steps.
        std::unique_ptr<TupleSink> terminal;
        if (stage_->is_result) terminal = std::make_unique<ResultSink>(state_);
        else terminal = std::make_unique<ExchangeSink>(state_, stage_, partition_);
        sinks_.push_back(std::move(terminal));

        for (auto it = stage_->ops.rbegin(); it != stage_->ops.rend(); ++it) {
            const PhysOp& op = *it;
            TupleSink* next = sinks_.back().get();
            std::unique_ptr<TupleSink> step;
            switch (op.kind) {
                case PhysOpKind::Assign: step = std::make_unique<AssignStep>(&op, &ctx_, next); break;
                case PhysOpKind::Select: step = std::make_unique<SelectStep>(&op, &ctx_, next); break;
                case PhysOpKind::Unnest: step = std::make_unique<UnnestStep>(&op, &ctx_, next); break;
                case PhysOpKind::Subplan:
                    step = std::make_unique<SubplanStep>(&op, &ctx_, next);
                    break;
                case PhysOpKind::LocalAggregate:
                    step = std::make_unique<LocalAggregateStep>(&op, &ctx_, next);
                    break;
                case PhysOpKind::GlobalAggregate:
                    step = std::make_unique<GlobalAggregateStep>(&op, next);
                    break;
                case PhysOpKind::SingleAggregate:
                    step = std::make_unique<SingleAggregateStep>(&op, &ctx_, next);
                    break;
            }
            sinks_.push_back(std::move(step));
        }
        // The source hands tuples to the fused operator chain through a frame;
        // the chain's own output crosses another frame at the exchange sink.
        sinks_.push_back(std::make_unique<FrameLink>(state_, sinks_.back().get()));
        TupleSink* head = sinks_.back().get();

        switch (stage_->source) {
            case StageSource::EmptyTuple: {
                head->push(Tuple{});
                head->finish();
                break;
            }
            case StageSource::Scan: run_scan(head); break;
            case StageSource::Channel: {
                drain_channel(stage_->in_channel,
                              [&](Tuple&& tuple, size_t) { head->push(std::move(tuple)); });
                head->finish();
                break;
            }
            case StageSource::Join: run_join(head); break;
        }
    }

  private:
    void run_scan(TupleSink* head) {
        CollectionScan scan(state_->spec, partition_,
                            resolve_collection_dir(state_->spec.data_root, stage_->scan.source),
                            stage_->scan.steps);
        bool carries_node = !stage_->source_schema.empty();
        while (DocumentPtr fragment = scan.next()) {
            if (state_->abort.tripped()) throw Aborted{};
            Tuple tuple;
            if (carries_node) tuple.fields.push_back(XDMSequence{XDMItem(NodeHandle{fragment, 0})});
            head->push(std::move(tuple));
        }
        uint64_t peak = scan.stats().peak_live_nodes;
        uint64_t prev = state_->parser_peak.load(std::memory_order_relaxed);
        while (peak > prev && !state_->parser_peak.compare_exchange_weak(prev, peak)) {
        }
        head->finish();
    }

    // Strict producer-ordinal order keeps execution deterministic.
    void drain_channel(int channel, const std::function<void(Tuple&&, size_t)>& fn) {
        auto& queues = state_->channels[channel];
        for (auto& queue : queues[partition_]) {
            while (std::optional<Frame> frame = queue->pop()) {
                for_each_frame_tuple(*frame, fn);
            }
        }
    }

    void run_join(TupleSink* head) {
        const std::vector<VarId>& out_schema =
            stage_->ops.empty() ? stage_->out_schema : stage_->ops.front().in_schema;
        if (stage_->join.hash) {
            HybridHashJoin join(state_, stage_, partition_, &ctx_, head, &out_schema);
            drain_channel(stage_->build_channel,
                          [&](Tuple&& tuple, size_t bytes) { join.add_build(std::move(tuple), bytes); });
            join.build_done();
            drain_channel(stage_->probe_channel,
                          [&](Tuple&& tuple, size_t) { join.add_probe(std::move(tuple)); });
            join.probe_done();
            head->finish();
            return;
        }
        // Nested loop: materialize the (broadcast, smaller) build side.
        std::vector<Tuple> build;
        drain_channel(stage_->build_channel,
                      [&](Tuple&& tuple, size_t) { build.push_back(std::move(tuple)); });
        drain_channel(stage_->probe_channel, [&](Tuple&& probe, size_t) {
            for (const Tuple& b : build) {
                Tuple combined;
                combined.fields.reserve(probe.fields.size() + b.fields.size());
                for (const XDMSequence& f : probe.fields) combined.fields.push_back(f);
                for (const XDMSequence& f : b.fields) combined.fields.push_back(f);
                BindingSet env = make_bindings(stage_->source_schema, combined);
                if (eval_expr_boolean(stage_->join.condition, env, ctx_))
                    head->push(project_tuple(stage_->source_schema, combined, out_schema));
            }
        });
        head->finish();
    }

    SharedState* state_;
    const Stage* stage_;
    uint32_t partition_;
    EvalContext ctx_;
    std::vector<std::unique_ptr<TupleSink>> sinks_;
};

} // namespace

// ---------------------------------------------------------------------------
// execute
// ---------------------------------------------------------------------------

XDMSequence execute(const PhysicalPlan& plan, const RuntimeConfig& config, ExecStats* stats) {
    if (config.frame_size < 4096) raise(ErrorKind::Internal, "frame size below the 4096 byte floor");
    SharedState state;
    state.plan = &plan;
    state.config = config;
    state.spec = PartitionSpec{config.partitions, config.data_root};
    state.docs = std::make_shared<DocumentCache>();
    state.scratch = config.scratch_dir.empty()
                        ? std::filesystem::temp_directory_path() / "xq-scratch"
                        : config.scratch_dir;
    std::error_code ec;
    std::filesystem::create_directories(state.scratch, ec);

    // Channel queue matrices.
    state.channels.resize(plan.channels.size());
    for (const ChannelDesc& channel : plan.channels) {
        ChannelQueues queues;
        queues.resize(channel.consumers);
        for (uint32_t c = 0; c < channel.consumers; ++c) {
            for (uint32_t p = 0; p < channel.producers; ++p)
                queues[c].push_back(std::make_unique<FrameQueue>(&state.abort));
        }
        state.channels[channel.id] = std::move(queues);
    }

    std::vector<std::thread> workers;
    for (const Stage& stage : plan.stages) {
        for (uint32_t p = 0; p < stage.partitions; ++p) {
            workers.emplace_back([&state, &stage, p] {
                try {
                    StageRunner runner(&state, &stage, p);
                    runner.run();
                } catch (const Aborted&) {
                    // unwound by a failure elsewhere
                } catch (...) {
                    state.abort.trip(std::current_exception());
                    for (auto& channel : state.channels)
                        for (auto& row : channel)
                            for (auto& queue : row) queue->wake_all();
                }
            });
        }
    }
    for (std::thread& worker : workers) worker.join();
    state.abort.rethrow_if_any();

    if (stats) {
        stats->frames_sent = state.frames_sent;
        stats->merge_exchange_bytes = state.merge_bytes;
        stats->hash_exchange_bytes = state.hash_bytes;
        stats->broadcast_bytes = state.broadcast_bytes;
        stats->max_buffered_tuples = state.max_buffered;
        stats->join_spill_partitions = state.spills;
        stats->peak_parser_live_nodes = state.parser_peak;
    }
    return std::move(state.result);
}

std::string serialize_result(const XDMSequence& seq) {
    std::string out;
    for (const XDMItem& item : seq) {
        out += serialize_item(item);
        out.push_back('\n');
    }
    return out;
}

} // namespace xq
