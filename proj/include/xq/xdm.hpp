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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xq/decimal.hpp"

namespace xq {

// ---------------------------------------------------------------------------
// Atomic values
// ---------------------------------------------------------------------------

enum class AtomicKind : uint8_t {
    Boolean,
    Byte,
    Short,
    Integer,
    Long,
    Double,
    Float,
    String,
    Binary,
    Decimal,
    Date,
    DateTime,
    Time,
    Duration,
    QName,
    UntypedAtomic,
};

const char* atomic_kind_name(AtomicKind kind);
std::optional<AtomicKind> atomic_kind_from_name(std::string_view name);

/// A single typed atomic value. Instants (date, dateTime, time, duration) are
/// held as epoch or elapsed milliseconds; the integer family shares an int64
/// payload; string-like kinds share a string payload.
class AtomicValue {
  public:
    AtomicValue() : kind_(AtomicKind::UntypedAtomic), payload_(std::string()) {}

    static AtomicValue boolean(bool v);
    static AtomicValue integer(int64_t v) { return of_int(AtomicKind::Integer, v); }
    static AtomicValue of_int(AtomicKind kind, int64_t v);
    static AtomicValue double_value(double v);
    static AtomicValue float_value(float v);
    static AtomicValue string_value(std::string v) { return of_string(AtomicKind::String, std::move(v)); }
    static AtomicValue untyped(std::string v) { return of_string(AtomicKind::UntypedAtomic, std::move(v)); }
    static AtomicValue of_string(AtomicKind kind, std::string v);
    static AtomicValue decimal(Decimal v);
    static AtomicValue date_time(int64_t epoch_millis) { return of_millis(AtomicKind::DateTime, epoch_millis); }
    static AtomicValue of_millis(AtomicKind kind, int64_t millis);

    AtomicKind kind() const { return kind_; }

    bool as_bool() const { return std::get<bool>(payload_); }
    int64_t as_int() const { return std::get<int64_t>(payload_); }
    double as_double_payload() const { return std::get<double>(payload_); }
    float as_float_payload() const { return std::get<float>(payload_); }
    const std::string& as_string() const { return std::get<std::string>(payload_); }
    const Decimal& as_decimal() const { return std::get<Decimal>(payload_); }
    int64_t as_millis() const { return std::get<int64_t>(payload_); }

    bool is_integer_family() const;
    bool is_numeric() const;
    bool is_string_family() const { return kind_ == AtomicKind::String || kind_ == AtomicKind::UntypedAtomic; }

    /// Numeric view as double (numeric kinds only).
    double numeric_as_double() const;

    /// Canonical lexical form (also the serialization of the value).
    std::string lexical() const;

    bool equals(const AtomicValue& other) const; // same kind and payload

  private:
    AtomicKind kind_;
    std::variant<bool, int64_t, double, float, std::string, Decimal> payload_;
};

// ---------------------------------------------------------------------------
// Nodes
// ---------------------------------------------------------------------------

enum class NodeKind : uint8_t {
    Document,
    Element,
    Attribute,
    Text,
    Comment,
    ProcessingInstruction,
};

/// Total node identity: lexicographic (partition, doc_seq, pre_order) orders
/// every node of an ingestion run, and a parent's pre_order precedes all of
/// its descendants'.
struct NodeId {
    uint32_t partition = 0;
    uint32_t doc_seq = 0;
    uint32_t pre_order = 0;

    friend bool operator==(const NodeId&, const NodeId&) = default;
};

enum class Ordering { Less, Equal, Greater };

Ordering compare_document_order(const NodeId& a, const NodeId& b);

constexpr uint32_t kNoNode = 0xffffffffu;
constexpr uint32_t kNoName = 0xffffffffu;

struct NodeRecord {
    NodeKind kind = NodeKind::Element;
    uint16_t attr_count = 0;     // attribute records follow this one contiguously
    uint32_t name = kNoName;     // index into Document::names
    uint32_t parent = kNoNode;   // record index
    uint32_t first_child = kNoNode;
    uint32_t next_sibling = kNoNode;
    uint32_t pre_order = 0;      // position in the full document, not the arena
    uint32_t subtree_end = 0;    // one past the last record of this subtree
    std::string text;            // text/comment/pi content or attribute value
};

using NameTable = std::vector<std::string>;

/// A parsed document or document fragment: an arena of node records in
/// document order plus an interned name table. Immutable after construction;
/// fragments of one file share the same table.
struct Document {
    uint32_t partition = 0;
    uint32_t doc_seq = 0;
    std::string source_path;
    std::vector<NodeRecord> nodes;
    std::shared_ptr<const NameTable> names;

    const std::string& name_at(uint32_t id) const { return (*names)[id]; }
};

using DocumentPtr = std::shared_ptr<const Document>;

struct NodeHandle {
    DocumentPtr doc;
    uint32_t index = 0;

    const NodeRecord& record() const { return doc->nodes[index]; }
    NodeKind kind() const { return record().kind; }
    NodeId id() const { return NodeId{doc->partition, doc->doc_seq, record().pre_order}; }
    std::string_view name() const;
    std::string string_value() const;

    std::vector<NodeHandle> children() const;
    std::vector<NodeHandle> attributes() const;
    /// Element children with the given name, in document order.
    std::vector<NodeHandle> child_elements(std::string_view name) const;
};

/// Serialize a node back to XML text.
std::string serialize_node(const NodeHandle& node);

// ---------------------------------------------------------------------------
// Items and sequences
// ---------------------------------------------------------------------------

class XDMItem {
  public:
    XDMItem(NodeHandle node) : value_(std::move(node)) {}
    XDMItem(AtomicValue atomic) : value_(std::move(atomic)) {}

    bool is_node() const { return std::holds_alternative<NodeHandle>(value_); }
    const NodeHandle& node() const { return std::get<NodeHandle>(value_); }
    const AtomicValue& atomic() const { return std::get<AtomicValue>(value_); }

  private:
    std::variant<NodeHandle, AtomicValue> value_;
};

/// Flat, ordered sequence of items.
using XDMSequence = std::vector<XDMItem>;

std::string serialize_item(const XDMItem& item);

// ---------------------------------------------------------------------------
// Data model operations
// ---------------------------------------------------------------------------

/// Replace every node by the untypedAtomic of its string value; atomics pass
/// through; order is preserved.
XDMSequence atomize(const XDMSequence& seq);
AtomicValue atomize_item(const XDMItem& item);

/// XQuery effective boolean value. Throws a Type error on a multi-item
/// sequence whose first item is atomic.
bool effective_boolean_value(const XDMSequence& seq);

/// Kind promotion: untypedAtomic casts by lexical rules, numeric widening is
/// permitted, identity otherwise. Throws a Type error when impossible.
AtomicValue promote(const AtomicValue& value, AtomicKind target);

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class ArithOp { Add, Subtract, Multiply, Divide };

/// Value comparison of two atomics after promotion to a common kind.
bool value_compare_atomic(const AtomicValue& a, const AtomicValue& b, CompareOp op);

AtomicValue arithmetic_atomic(const AtomicValue& a, const AtomicValue& b, ArithOp op);

/// Constructor-style cast (decimal(), string(), dateTime(), ...).
AtomicValue cast_atomic(const AtomicValue& value, AtomicKind target);

} // namespace xq
