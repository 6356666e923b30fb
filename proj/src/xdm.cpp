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

#include "xq/xdm.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

#include "xq/datetime.hpp"
#include "xq/error.hpp"

namespace xq {

namespace {

struct KindName {
    AtomicKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {AtomicKind::Boolean, "boolean"},
    {AtomicKind::Byte, "byte"},
    {AtomicKind::Short, "short"},
    {AtomicKind::Integer, "integer"},
    {AtomicKind::Long, "long"},
    {AtomicKind::Double, "double"},
    {AtomicKind::Float, "float"},
    {AtomicKind::String, "string"},
    {AtomicKind::Binary, "binary"},
    {AtomicKind::Decimal, "decimal"},
    {AtomicKind::Date, "date"},
    {AtomicKind::DateTime, "dateTime"},
    {AtomicKind::Time, "time"},
    {AtomicKind::Duration, "duration"},
    {AtomicKind::QName, "QName"},
    {AtomicKind::UntypedAtomic, "untypedAtomic"},
};

std::string double_to_lexical(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "INF" : "-INF";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

bool in_int_range(int64_t v, AtomicKind kind) {
    switch (kind) {
        case AtomicKind::Byte: return v >= -128 && v <= 127;
        case AtomicKind::Short: return v >= -32768 && v <= 32767;
        case AtomicKind::Integer: return v >= INT32_MIN && v <= INT32_MAX;
        case AtomicKind::Long: return true;
        default: return false;
    }
}

std::optional<int64_t> parse_int_lexical(std::string_view text) {
    if (text.empty()) return std::nullopt;
    int64_t v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_double_lexical(std::string_view text) {
    if (text == "INF") return HUGE_VAL;
    if (text == "-INF") return -HUGE_VAL;
    if (text == "NaN") return std::nan("");
    if (text.empty()) return std::nullopt;
    double v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::string_view trimmed(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\n' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\n' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

int numeric_rank(AtomicKind kind) {
    switch (kind) {
        case AtomicKind::Byte: return 0;
        case AtomicKind::Short: return 1;
        case AtomicKind::Integer: return 2;
        case AtomicKind::Long: return 3;
        case AtomicKind::Decimal: return 4;
        case AtomicKind::Float: return 5;
        case AtomicKind::Double: return 6;
        default: return -1;
    }
}

void append_escaped_text(std::string& out, std::string_view text) {
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
}

void append_escaped_attr(std::string& out, std::string_view text) {
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
}

void serialize_node_into(const NodeHandle& node, std::string& out) {
    const NodeRecord& rec = node.record();
    switch (rec.kind) {
        case NodeKind::Document:
            for (NodeHandle child : node.children()) serialize_node_into(child, out);
            break;
        case NodeKind::Element: {
            out.push_back('<');
            out.append(node.name());
            for (NodeHandle attr : node.attributes()) {
                out.push_back(' ');
                out.append(attr.name());
                out += "=\"";
                append_escaped_attr(out, attr.record().text);
                out.push_back('"');
            }
            std::vector<NodeHandle> children = node.children();
            if (children.empty()) {
                out += "/>";
            } else {
                out.push_back('>');
                for (NodeHandle child : children) serialize_node_into(child, out);
                out += "</";
                out.append(node.name());
                out.push_back('>');
            }
            break;
        }
        case NodeKind::Attribute:
            out.append(node.name());
            out += "=\"";
            append_escaped_attr(out, rec.text);
            out.push_back('"');
            break;
        case NodeKind::Text:
            append_escaped_text(out, rec.text);
            break;
        case NodeKind::Comment:
            out += "<!--";
            out += rec.text;
            out += "-->";
            break;
        case NodeKind::ProcessingInstruction:
            out += "<?";
            out.append(node.name());
            if (!rec.text.empty()) {
                out.push_back(' ');
                out += rec.text;
            }
            out += "?>";
            break;
    }
}

} // namespace

const char* atomic_kind_name(AtomicKind kind) {
    for (const auto& entry : kKindNames)
        if (entry.kind == kind) return entry.name;
    return "unknown";
}

std::optional<AtomicKind> atomic_kind_from_name(std::string_view name) {
    for (const auto& entry : kKindNames)
        if (name == entry.name) return entry.kind;
    return std::nullopt;
}

AtomicValue AtomicValue::boolean(bool v) {
    AtomicValue a;
    a.kind_ = AtomicKind::Boolean;
    a.payload_ = v;
    return a;
}

AtomicValue AtomicValue::of_int(AtomicKind kind, int64_t v) {
    AtomicValue a;
    a.kind_ = kind;
    a.payload_ = v;
    return a;
}

AtomicValue AtomicValue::double_value(double v) {
    AtomicValue a;
    a.kind_ = AtomicKind::Double;
    a.payload_ = v;
    return a;
}

AtomicValue AtomicValue::float_value(float v) {
    AtomicValue a;
    a.kind_ = AtomicKind::Float;
    a.payload_ = v;
    return a;
}

AtomicValue AtomicValue::of_string(AtomicKind kind, std::string v) {
    AtomicValue a;
    a.kind_ = kind;
    a.payload_ = std::move(v);
    return a;
}

AtomicValue AtomicValue::decimal(Decimal v) {
    AtomicValue a;
    a.kind_ = AtomicKind::Decimal;
    a.payload_ = v;
    return a;
}

AtomicValue AtomicValue::of_millis(AtomicKind kind, int64_t millis) {
    AtomicValue a;
    a.kind_ = kind;
    a.payload_ = millis;
    return a;
}

bool AtomicValue::is_integer_family() const {
    switch (kind_) {
        case AtomicKind::Byte:
        case AtomicKind::Short:
        case AtomicKind::Integer:
        case AtomicKind::Long: return true;
        default: return false;
    }
}

bool AtomicValue::is_numeric() const {
    return is_integer_family() || kind_ == AtomicKind::Decimal || kind_ == AtomicKind::Double ||
           kind_ == AtomicKind::Float;
}

double AtomicValue::numeric_as_double() const {
    switch (kind_) {
        case AtomicKind::Double: return as_double_payload();
        case AtomicKind::Float: return as_float_payload();
        case AtomicKind::Decimal: return as_decimal().to_double();
        default: return static_cast<double>(as_int());
    }
}

std::string AtomicValue::lexical() const {
    switch (kind_) {
        case AtomicKind::Boolean: return as_bool() ? "true" : "false";
        case AtomicKind::Byte:
        case AtomicKind::Short:
        case AtomicKind::Integer:
        case AtomicKind::Long: return std::to_string(as_int());
        case AtomicKind::Double: return double_to_lexical(as_double_payload());
        case AtomicKind::Float: return double_to_lexical(as_float_payload());
        case AtomicKind::Decimal: return as_decimal().to_string();
        case AtomicKind::Date: return format_date(as_millis());
        case AtomicKind::DateTime: return format_date_time(as_millis());
        case AtomicKind::Time:
        case AtomicKind::Duration: return std::to_string(as_millis());
        case AtomicKind::String:
        case AtomicKind::Binary:
        case AtomicKind::QName:
        case AtomicKind::UntypedAtomic: return as_string();
    }
    return "";
}

bool AtomicValue::equals(const AtomicValue& other) const {
    if (kind_ != other.kind_) return false;
    return payload_ == other.payload_;
}

Ordering compare_document_order(const NodeId& a, const NodeId& b) {
    if (a.partition != b.partition) return a.partition < b.partition ? Ordering::Less : Ordering::Greater;
    if (a.doc_seq != b.doc_seq) return a.doc_seq < b.doc_seq ? Ordering::Less : Ordering::Greater;
    if (a.pre_order != b.pre_order) return a.pre_order < b.pre_order ? Ordering::Less : Ordering::Greater;
    return Ordering::Equal;
}

std::string_view NodeHandle::name() const {
    const NodeRecord& rec = record();
    if (rec.name == kNoName) return {};
    return doc->name_at(rec.name);
}

std::string NodeHandle::string_value() const {
    const NodeRecord& rec = record();
    switch (rec.kind) {
        case NodeKind::Text:
        case NodeKind::Comment:
        case NodeKind::ProcessingInstruction:
        case NodeKind::Attribute: return rec.text;
        default: break;
    }
    std::string out;
    for (uint32_t i = index; i < rec.subtree_end; ++i) {
        const NodeRecord& r = doc->nodes[i];
        if (r.kind == NodeKind::Text) out += r.text;
    }
    return out;
}

std::vector<NodeHandle> NodeHandle::children() const {
    std::vector<NodeHandle> out;
    uint32_t child = record().first_child;
    while (child != kNoNode) {
        out.push_back(NodeHandle{doc, child});
        child = doc->nodes[child].next_sibling;
    }
    return out;
}

std::vector<NodeHandle> NodeHandle::attributes() const {
    std::vector<NodeHandle> out;
    const NodeRecord& rec = record();
    for (uint16_t i = 0; i < rec.attr_count; ++i) out.push_back(NodeHandle{doc, index + 1u + i});
    return out;
}

std::vector<NodeHandle> NodeHandle::child_elements(std::string_view name) const {
    std::vector<NodeHandle> out;
    uint32_t child = record().first_child;
    while (child != kNoNode) {
        const NodeRecord& r = doc->nodes[child];
        if (r.kind == NodeKind::Element && r.name != kNoName && doc->name_at(r.name) == name)
            out.push_back(NodeHandle{doc, child});
        child = r.next_sibling;
    }
    return out;
}

std::string serialize_node(const NodeHandle& node) {
    std::string out;
    serialize_node_into(node, out);
    return out;
}

std::string serialize_item(const XDMItem& item) {
    if (item.is_node()) return serialize_node(item.node());
    return item.atomic().lexical();
}

AtomicValue atomize_item(const XDMItem& item) {
    if (item.is_node()) return AtomicValue::untyped(item.node().string_value());
    return item.atomic();
}

XDMSequence atomize(const XDMSequence& seq) {
    XDMSequence out;
    out.reserve(seq.size());
    for (const XDMItem& item : seq) out.emplace_back(atomize_item(item));
    return out;
}

bool effective_boolean_value(const XDMSequence& seq) {
    if (seq.empty()) return false;
    if (seq.front().is_node()) return true;
    if (seq.size() > 1)
        raise(ErrorKind::Type, "effective boolean value of a multi-item sequence starting with an atomic");
    const AtomicValue& v = seq.front().atomic();
    switch (v.kind()) {
        case AtomicKind::Boolean: return v.as_bool();
        case AtomicKind::String:
        case AtomicKind::UntypedAtomic: return !v.as_string().empty();
        case AtomicKind::Byte:
        case AtomicKind::Short:
        case AtomicKind::Integer:
        case AtomicKind::Long: return v.as_int() != 0;
        case AtomicKind::Double: {
            double d = v.as_double_payload();
            return d != 0.0 && !std::isnan(d);
        }
        case AtomicKind::Float: {
            float f = v.as_float_payload();
            return f != 0.0f && !std::isnan(f);
        }
        case AtomicKind::Decimal: return !v.as_decimal().is_zero();
        default:
            raise(ErrorKind::Type,
                  std::string("effective boolean value undefined for ") + atomic_kind_name(v.kind()));
    }
}

AtomicValue promote(const AtomicValue& value, AtomicKind target) {
    if (value.kind() == target) return value;

    if (value.kind() == AtomicKind::UntypedAtomic) {
        std::string_view text = trimmed(value.as_string());
        switch (target) {
            case AtomicKind::String: return AtomicValue::string_value(std::string(text));
            case AtomicKind::Boolean:
                if (text == "true" || text == "1") return AtomicValue::boolean(true);
                if (text == "false" || text == "0") return AtomicValue::boolean(false);
                break;
            case AtomicKind::Byte:
            case AtomicKind::Short:
            case AtomicKind::Integer:
            case AtomicKind::Long:
                if (auto v = parse_int_lexical(text); v && in_int_range(*v, target))
                    return AtomicValue::of_int(target, *v);
                break;
            case AtomicKind::Decimal:
                if (auto v = Decimal::parse(text)) return AtomicValue::decimal(*v);
                break;
            case AtomicKind::Double:
                if (auto v = parse_double_lexical(text)) return AtomicValue::double_value(*v);
                break;
            case AtomicKind::Float:
                if (auto v = parse_double_lexical(text)) return AtomicValue::float_value(static_cast<float>(*v));
                break;
            case AtomicKind::DateTime:
                if (auto v = parse_date_time_millis(text)) return AtomicValue::date_time(*v);
                break;
            case AtomicKind::Date:
                if (auto v = parse_date_millis(text)) return AtomicValue::of_millis(AtomicKind::Date, *v);
                break;
            default: break;
        }
        raise(ErrorKind::Type, "cannot promote untypedAtomic \"" + value.as_string() + "\" to " +
                                   atomic_kind_name(target));
    }

    int from_rank = numeric_rank(value.kind());
    int to_rank = numeric_rank(target);
    if (from_rank >= 0 && to_rank >= 0 && from_rank <= to_rank) {
        switch (target) {
            case AtomicKind::Short:
            case AtomicKind::Integer:
            case AtomicKind::Long: return AtomicValue::of_int(target, value.as_int());
            case AtomicKind::Decimal:
                return AtomicValue::decimal(Decimal::from_int(value.as_int()));
            case AtomicKind::Float:
                return AtomicValue::float_value(static_cast<float>(value.numeric_as_double()));
            case AtomicKind::Double: return AtomicValue::double_value(value.numeric_as_double());
            default: break;
        }
    }

    raise(ErrorKind::Type, std::string("cannot promote ") + atomic_kind_name(value.kind()) + " to " +
                               atomic_kind_name(target));
}

namespace {

bool compare_with(int cmp, CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return cmp == 0;
        case CompareOp::Ne: return cmp != 0;
        case CompareOp::Lt: return cmp < 0;
        case CompareOp::Le: return cmp <= 0;
        case CompareOp::Gt: return cmp > 0;
        case CompareOp::Ge: return cmp >= 0;
    }
    return false;
}

// Pick the common comparison kind for a pair of atomics.
AtomicKind common_kind(const AtomicValue& a, const AtomicValue& b) {
    bool a_untyped = a.kind() == AtomicKind::UntypedAtomic;
    bool b_untyped = b.kind() == AtomicKind::UntypedAtomic;
    if (a_untyped && b_untyped) return AtomicKind::String;
    if (a_untyped) return b.kind() == AtomicKind::String ? AtomicKind::String : b.kind();
    if (b_untyped) return a.kind() == AtomicKind::String ? AtomicKind::String : a.kind();
    if (a.kind() == b.kind()) return a.kind();
    if (a.is_numeric() && b.is_numeric()) {
        if (a.kind() == AtomicKind::Double || b.kind() == AtomicKind::Double) return AtomicKind::Double;
        if (a.kind() == AtomicKind::Float || b.kind() == AtomicKind::Float) return AtomicKind::Float;
        return AtomicKind::Decimal;
    }
    raise(ErrorKind::Type, std::string("cannot compare ") + atomic_kind_name(a.kind()) + " with " +
                               atomic_kind_name(b.kind()));
}

} // namespace

bool value_compare_atomic(const AtomicValue& a, const AtomicValue& b, CompareOp op) {
    // String-family pairs dominate the workload; compare without promotion.
    if (a.is_string_family() && b.is_string_family()) {
        int cmp = a.as_string().compare(b.as_string());
        return compare_with(cmp < 0 ? -1 : cmp > 0 ? 1 : 0, op);
    }
    AtomicKind kind = common_kind(a, b);
    AtomicValue lhs = promote(a, kind == AtomicKind::String && a.kind() == AtomicKind::UntypedAtomic
                                     ? AtomicKind::String
                                     : kind);
    AtomicValue rhs = promote(b, kind == AtomicKind::String && b.kind() == AtomicKind::UntypedAtomic
                                     ? AtomicKind::String
                                     : kind);
    switch (kind) {
        case AtomicKind::Boolean: {
            int cmp = (lhs.as_bool() ? 1 : 0) - (rhs.as_bool() ? 1 : 0);
            return compare_with(cmp, op);
        }
        case AtomicKind::Byte:
        case AtomicKind::Short:
        case AtomicKind::Integer:
        case AtomicKind::Long: {
            int cmp = lhs.as_int() < rhs.as_int() ? -1 : lhs.as_int() > rhs.as_int() ? 1 : 0;
            return compare_with(cmp, op);
        }
        case AtomicKind::Decimal: {
            Decimal l = lhs.is_integer_family() ? Decimal::from_int(lhs.as_int()) : lhs.as_decimal();
            Decimal r = rhs.is_integer_family() ? Decimal::from_int(rhs.as_int()) : rhs.as_decimal();
            return compare_with(l.compare(r), op);
        }
        case AtomicKind::Double:
        case AtomicKind::Float: {
            double l = lhs.numeric_as_double();
            double r = rhs.numeric_as_double();
            if (std::isnan(l) || std::isnan(r)) return op == CompareOp::Ne;
            int cmp = l < r ? -1 : l > r ? 1 : 0;
            return compare_with(cmp, op);
        }
        case AtomicKind::String: {
            int cmp = lhs.as_string().compare(rhs.as_string());
            return compare_with(cmp < 0 ? -1 : cmp > 0 ? 1 : 0, op);
        }
        case AtomicKind::Date:
        case AtomicKind::DateTime:
        case AtomicKind::Time: {
            int cmp = lhs.as_millis() < rhs.as_millis() ? -1 : lhs.as_millis() > rhs.as_millis() ? 1 : 0;
            return compare_with(cmp, op);
        }
        default:
            raise(ErrorKind::Type,
                  std::string("comparison not supported for ") + atomic_kind_name(kind));
    }
}

namespace {

// Arithmetic promotion: untyped atomics whose lexical form is a plain decimal
// become decimals, keeping sums exact and order-independent; forms with an
// exponent go to double.
AtomicValue numeric_operand(const AtomicValue& v) {
    if (v.kind() == AtomicKind::UntypedAtomic) {
        std::string_view text = trimmed(v.as_string());
        if (auto d = Decimal::parse(text)) return AtomicValue::decimal(*d);
        if (auto d = parse_double_lexical(text)) return AtomicValue::double_value(*d);
        raise(ErrorKind::Type, "cannot treat \"" + v.as_string() + "\" as a number");
    }
    if (!v.is_numeric()) raise(ErrorKind::Type, std::string(atomic_kind_name(v.kind())) + " is not numeric");
    return v;
}

} // namespace

AtomicValue arithmetic_atomic(const AtomicValue& a, const AtomicValue& b, ArithOp op) {
    AtomicValue lhs = numeric_operand(a);
    AtomicValue rhs = numeric_operand(b);
    bool use_double = lhs.kind() == AtomicKind::Double || rhs.kind() == AtomicKind::Double ||
                      lhs.kind() == AtomicKind::Float || rhs.kind() == AtomicKind::Float;
    if (use_double) {
        double l = lhs.numeric_as_double();
        double r = rhs.numeric_as_double();
        switch (op) {
            case ArithOp::Add: return AtomicValue::double_value(l + r);
            case ArithOp::Subtract: return AtomicValue::double_value(l - r);
            case ArithOp::Multiply: return AtomicValue::double_value(l * r);
            case ArithOp::Divide: return AtomicValue::double_value(l / r);
        }
    }
    bool both_integers = lhs.is_integer_family() && rhs.is_integer_family();
    Decimal l = lhs.is_integer_family() ? Decimal::from_int(lhs.as_int()) : lhs.as_decimal();
    Decimal r = rhs.is_integer_family() ? Decimal::from_int(rhs.as_int()) : rhs.as_decimal();
    Decimal result;
    switch (op) {
        case ArithOp::Add: result = l.add(r); break;
        case ArithOp::Subtract: result = l.subtract(r); break;
        case ArithOp::Multiply: result = l.multiply(r); break;
        case ArithOp::Divide: return AtomicValue::decimal(l.divide(r));
    }
    if (both_integers) {
        if (auto v = result.to_int()) return AtomicValue::of_int(AtomicKind::Integer, *v);
    }
    return AtomicValue::decimal(result);
}

AtomicValue cast_atomic(const AtomicValue& value, AtomicKind target) {
    if (value.kind() == target) return value;
    if (value.kind() == AtomicKind::UntypedAtomic || value.kind() == AtomicKind::String) {
        AtomicValue as_untyped = AtomicValue::untyped(value.kind() == AtomicKind::String
                                                          ? value.as_string()
                                                          : value.as_string());
        return promote(as_untyped, target);
    }
    if (target == AtomicKind::String || target == AtomicKind::UntypedAtomic)
        return AtomicValue::of_string(target, value.lexical());
    if (value.is_numeric()) {
        int from_rank = numeric_rank(value.kind());
        int to_rank = numeric_rank(target);
        if (from_rank >= 0 && to_rank >= 0) {
            if (from_rank <= to_rank) return promote(value, target);
            // Narrowing numeric cast.
            switch (target) {
                case AtomicKind::Decimal:
                    if (value.kind() == AtomicKind::Double || value.kind() == AtomicKind::Float) {
                        if (auto d = Decimal::parse(double_to_lexical(value.numeric_as_double())))
                            return AtomicValue::decimal(*d);
                        raise(ErrorKind::Type, "double not representable as decimal");
                    }
                    return AtomicValue::decimal(Decimal::from_int(value.as_int()));
                case AtomicKind::Byte:
                case AtomicKind::Short:
                case AtomicKind::Integer:
                case AtomicKind::Long: {
                    int64_t v;
                    if (value.kind() == AtomicKind::Decimal) {
                        auto i = value.as_decimal().to_int();
                        if (!i) raise(ErrorKind::Type, "decimal is not an integer");
                        v = *i;
                    } else {
                        v = static_cast<int64_t>(value.numeric_as_double());
                    }
                    if (!in_int_range(v, target)) raise(ErrorKind::Type, "integer out of range for cast");
                    return AtomicValue::of_int(target, v);
                }
                default: break;
            }
        }
    }
    raise(ErrorKind::Type, std::string("cannot cast ") + atomic_kind_name(value.kind()) + " to " +
                               atomic_kind_name(target));
}

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Lex: return "LexError";
        case ErrorKind::Syntax: return "SyntaxError";
        case ErrorKind::Bind: return "BindError";
        case ErrorKind::Type: return "TypeError";
        case ErrorKind::Parse: return "ParseError";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::PlanSyntax: return "PlanSyntaxError";
        case ErrorKind::Translation: return "TranslationError";
        case ErrorKind::Rule: return "RuleError";
        case ErrorKind::PhysicalPlan: return "PhysicalPlanError";
        case ErrorKind::FrameOverflow: return "FrameOverflow";
        case ErrorKind::SpillIo: return "SpillIoError";
        case ErrorKind::Internal: return "InternalError";
    }
    return "Error";
}

} // namespace xq
