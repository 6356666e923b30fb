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

#include "xq/expr_eval.hpp"

#include <algorithm>
#include <cctype>

#include "xq/datetime.hpp"
#include "xq/error.hpp"

namespace xq {

namespace {

AtomicKind type_name_to_kind(const std::string& name) {
    if (auto kind = atomic_kind_from_name(name)) return *kind;
    raise(ErrorKind::Type, "unknown atomic type " + name);
}

bool matches_type_name(const XDMItem& item, const std::string& type) {
    if (type == "any_type" || type == "node") return true;
    if (type == "element_node")
        // doc() results flow through child(treat(., element_node), ...) in the
        // plans, so document nodes pass the element test.
        return item.is_node() && (item.node().kind() == NodeKind::Element ||
                                  item.node().kind() == NodeKind::Document);
    if (type == "document_node") return item.is_node() && item.node().kind() == NodeKind::Document;
    if (item.is_node()) return false;
    return item.atomic().kind() == type_name_to_kind(type);
}

XDMSequence singleton(AtomicValue v) {
    XDMSequence out;
    out.emplace_back(std::move(v));
    return out;
}

XDMSequence singleton_node(DocumentPtr doc) {
    XDMSequence out;
    out.emplace_back(NodeHandle{std::move(doc), 0});
    return out;
}

// Atomized singleton-or-empty operand for value comparisons and arithmetic.
std::optional<AtomicValue> atomized_operand(const XDMSequence& seq, const char* what) {
    if (seq.empty()) return std::nullopt;
    if (seq.size() > 1) raise(ErrorKind::Type, std::string(what) + " requires a singleton sequence");
    return atomize_item(seq.front());
}

CompareOp parse_compare_suffix(std::string_view symbol, std::string_view prefix) {
    std::string_view op = symbol.substr(prefix.size());
    if (op == "eq") return CompareOp::Eq;
    if (op == "ne") return CompareOp::Ne;
    if (op == "lt") return CompareOp::Lt;
    if (op == "le") return CompareOp::Le;
    if (op == "gt") return CompareOp::Gt;
    if (op == "ge") return CompareOp::Ge;
    raise(ErrorKind::Internal, "bad comparison symbol");
}

bool node_id_less(const XDMItem& a, const XDMItem& b) {
    return compare_document_order(a.node().id(), b.node().id()) == Ordering::Less;
}

// sort / distinct families: act on all-node sequences, pass anything holding
// an atomic through unchanged.
XDMSequence sort_distinct_family(XDMSequence seq, bool sort, bool distinct) {
    bool all_nodes =
        std::all_of(seq.begin(), seq.end(), [](const XDMItem& i) { return i.is_node(); });
    if (!all_nodes) return seq;
    if (sort) std::stable_sort(seq.begin(), seq.end(), node_id_less);
    if (distinct) {
        XDMSequence out;
        for (XDMItem& item : seq) {
            if (!out.empty() && compare_document_order(out.back().node().id(), item.node().id()) ==
                                    Ordering::Equal)
                continue;
            out.push_back(std::move(item));
        }
        return out;
    }
    return seq;
}

AtomicValue to_date_time(const AtomicValue& v) {
    if (v.kind() == AtomicKind::DateTime) return v;
    if (v.is_string_family()) {
        if (auto ms = parse_date_time_millis(v.as_string())) return AtomicValue::date_time(*ms);
        raise(ErrorKind::Type, "cannot parse dateTime \"" + v.as_string() + "\"");
    }
    raise(ErrorKind::Type, std::string("cannot cast ") + atomic_kind_name(v.kind()) + " to dateTime");
}

XDMSequence arithmetic_seq(const XDMSequence& lhs, const XDMSequence& rhs, ArithOp op) {
    auto l = atomized_operand(lhs, "arithmetic");
    auto r = atomized_operand(rhs, "arithmetic");
    if (!l || !r) return {};
    return singleton(arithmetic_atomic(*l, *r, op));
}

} // namespace

XDMSequence eval_expr(const PlanExprPtr& expr, BindingSet& env, EvalContext& ctx) {
    switch (expr->kind) {
        case PlanExprKind::Variable: {
            const XDMSequence* seq = env.lookup(expr->var);
            if (!seq) raise(ErrorKind::Internal, "unbound $$" + std::to_string(expr->var));
            return *seq;
        }
        case PlanExprKind::Literal: return singleton(expr->literal);
        case PlanExprKind::TypeName: raise(ErrorKind::Type, "type name used as a value");
        case PlanExprKind::Quantified: {
            XDMSequence source = eval_expr(expr->args[0], env, ctx);
            for (const XDMItem& item : source) {
                XDMSequence bound{item};
                env.bind(expr->var, &bound);
                bool ok = eval_expr_boolean(expr->args[1], env, ctx);
                env.pop();
                if (ok) return singleton(AtomicValue::boolean(true));
            }
            return singleton(AtomicValue::boolean(false));
        }
        case PlanExprKind::ForEach: {
            XDMSequence source = eval_expr(expr->args[0], env, ctx);
            XDMSequence out;
            for (const XDMItem& item : source) {
                XDMSequence bound{item};
                env.bind(expr->var, &bound);
                XDMSequence part = eval_expr(expr->args[1], env, ctx);
                env.pop();
                out.insert(out.end(), part.begin(), part.end());
            }
            return out;
        }
        case PlanExprKind::Call: break;
    }

    const std::string& fn = expr->symbol;
    auto arg = [&](size_t i) { return eval_expr(expr->args[i], env, ctx); };
    // Borrowed view for read-only arguments: variable references are the
    // common case and need no copy.
    struct ArgView {
        const XDMSequence* ref;
        XDMSequence owned;
        const XDMSequence& get() const { return ref ? *ref : owned; }
    };
    auto arg_view = [&](size_t i) -> ArgView {
        const PlanExprPtr& a = expr->args[i];
        if (a->kind == PlanExprKind::Variable) {
            const XDMSequence* seq = env.lookup(a->var);
            if (!seq) raise(ErrorKind::Internal, "unbound $$" + std::to_string(a->var));
            return ArgView{seq, {}};
        }
        return ArgView{nullptr, eval_expr(a, env, ctx)};
    };

    if (fn == "iterate" || fn == "create_sequence") return arg(0);
    if (fn == "data") return atomize(arg_view(0).get());
    if (fn == "boolean")
        return singleton(AtomicValue::boolean(effective_boolean_value(arg_view(0).get())));
    if (fn == "not")
        return singleton(AtomicValue::boolean(!effective_boolean_value(arg_view(0).get())));
    if (fn == "treat") {
        XDMSequence value = arg(0);
        const std::string& type = expr->args[1]->symbol;
        for (const XDMItem& item : value)
            if (!matches_type_name(item, type)) raise(ErrorKind::Type, "treat as " + type + " failed");
        return value;
    }
    if (fn == "promote") {
        XDMSequence value = atomize(arg(0));
        AtomicKind target = type_name_to_kind(expr->args[1]->symbol);
        XDMSequence out;
        out.reserve(value.size());
        for (const XDMItem& item : value) out.emplace_back(promote(item.atomic(), target));
        return out;
    }
    if (fn == "child" || fn == "attribute") {
        ArgView input_view = arg_view(0);
        const XDMSequence& input = input_view.get();
        if (expr->args[1]->kind != PlanExprKind::Literal)
            raise(ErrorKind::Type, "step name must be a literal");
        const std::string& name = expr->args[1]->literal.as_string();
        XDMSequence out;
        for (const XDMItem& item : input) {
            if (!item.is_node()) raise(ErrorKind::Type, "path step over an atomic value");
            const NodeHandle& node = item.node();
            if (fn == "child") {
                const Document& doc = *node.doc;
                uint32_t child = node.record().first_child;
                while (child != kNoNode) {
                    const NodeRecord& rec = doc.nodes[child];
                    if (rec.kind == NodeKind::Element && rec.name != kNoName &&
                        doc.name_at(rec.name) == name)
                        out.emplace_back(NodeHandle{node.doc, child});
                    child = rec.next_sibling;
                }
            } else {
                for (NodeHandle attr : node.attributes())
                    if (attr.name() == name) out.emplace_back(attr);
            }
        }
        return out;
    }
    if (fn == "sort-distinct-nodes-asc-or-atomics") return sort_distinct_family(arg(0), true, true);
    if (fn == "sort-nodes-asc-or-atomics") return sort_distinct_family(arg(0), true, false);
    if (fn == "distinct-nodes-or-atomics") return sort_distinct_family(arg(0), false, true);
    if (fn.rfind("value-", 0) == 0) {
        ArgView lv = arg_view(0), rv = arg_view(1);
        auto l = atomized_operand(lv.get(), "value comparison");
        auto r = atomized_operand(rv.get(), "value comparison");
        if (!l || !r) return {};
        return singleton(
            AtomicValue::boolean(value_compare_atomic(*l, *r, parse_compare_suffix(fn, "value-"))));
    }
    if (fn.rfind("general-", 0) == 0) {
        CompareOp op = parse_compare_suffix(fn, "general-");
        XDMSequence lhs = atomize(arg_view(0).get());
        XDMSequence rhs = atomize(arg_view(1).get());
        for (const XDMItem& l : lhs)
            for (const XDMItem& r : rhs)
                if (value_compare_atomic(l.atomic(), r.atomic(), op))
                    return singleton(AtomicValue::boolean(true));
        return singleton(AtomicValue::boolean(false));
    }
    if (fn == "and" || fn == "or") {
        bool is_and = fn == "and";
        for (const PlanExprPtr& operand : expr->args) {
            bool v = eval_expr_boolean(operand, env, ctx);
            if (is_and && !v) return singleton(AtomicValue::boolean(false));
            if (!is_and && v) return singleton(AtomicValue::boolean(true));
        }
        return singleton(AtomicValue::boolean(is_and));
    }
    if (fn == "add" || fn == "subtract" || fn == "multiply" || fn == "divide") {
        ArgView lv = arg_view(0), rv = arg_view(1);
        ArithOp op = fn == "add" ? ArithOp::Add
                     : fn == "subtract" ? ArithOp::Subtract
                     : fn == "multiply" ? ArithOp::Multiply : ArithOp::Divide;
        return arithmetic_seq(lv.get(), rv.get(), op);
    }
    if (fn == "count" || fn == "sum" || fn == "min" || fn == "max" || fn == "avg") {
        AggAccumulator acc(expr, &ctx);
        acc.accumulate(env);
        return acc.finish();
    }
    if (fn == "sequence") {
        XDMSequence out;
        for (size_t i = 0; i < expr->args.size(); ++i) {
            XDMSequence part = arg(i);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    if (fn == "doc") {
        auto name = atomized_operand(arg(0), "doc");
        if (!name) return {};
        std::filesystem::path path = ctx.spec.data_root / name->as_string();
        return singleton_node(ctx.docs->document(path));
    }
    if (fn == "collection") {
        auto name = atomized_operand(arg(0), "collection");
        if (!name) return {};
        auto docs =
            ctx.docs->collection(resolve_collection_dir(ctx.spec.data_root, name->as_string()));
        XDMSequence out;
        out.reserve(docs->size());
        for (const DocumentPtr& doc : *docs) out.emplace_back(NodeHandle{doc, 0});
        return out;
    }
    if (fn == "dateTime") {
        auto v = atomized_operand(arg(0), "dateTime");
        if (!v) return {};
        return singleton(to_date_time(*v));
    }
    if (fn == "year-from-dateTime" || fn == "month-from-dateTime" || fn == "day-from-dateTime") {
        auto v = atomized_operand(arg(0), fn.c_str());
        if (!v) return {};
        AtomicValue dt = to_date_time(*v);
        CivilDate cd = civil_from_millis(dt.as_millis());
        int64_t part = fn[0] == 'y' ? cd.year : fn[0] == 'm' ? cd.month : cd.day;
        return singleton(AtomicValue::integer(part));
    }
    if (fn == "upper-case") {
        auto v = atomized_operand(arg(0), "upper-case");
        if (!v) return singleton(AtomicValue::string_value(""));
        std::string s = v->as_string();
        for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return singleton(AtomicValue::string_value(std::move(s)));
    }
    if (fn == "decimal" || fn == "string" || fn == "integer" || fn == "double") {
        auto v = atomized_operand(arg(0), fn.c_str());
        if (!v) return {};
        return singleton(cast_atomic(*v, type_name_to_kind(fn)));
    }
    raise(ErrorKind::Type, "unknown function " + fn);
}

bool eval_expr_boolean(const PlanExprPtr& expr, BindingSet& env, EvalContext& ctx) {
    return effective_boolean_value(eval_expr(expr, env, ctx));
}

// ---------------------------------------------------------------------------
// Aggregate accumulation
// ---------------------------------------------------------------------------

AggAccumulator::AggAccumulator(PlanExprPtr expr, EvalContext* ctx) : ctx_(ctx) {
    if (!expr || expr->kind != PlanExprKind::Call)
        raise(ErrorKind::Internal, "aggregate accumulator needs a call expression");
    fn_ = expr->symbol;
    arg_ = expr->args.at(0);
}

namespace {

AtomicValue numeric_for_aggregate(const XDMItem& item) {
    AtomicValue v = atomize_item(item);
    if (v.kind() == AtomicKind::UntypedAtomic) {
        if (auto d = Decimal::parse(v.as_string())) return AtomicValue::decimal(*d);
        return promote(v, AtomicKind::Double);
    }
    if (!v.is_numeric()) raise(ErrorKind::Type, "aggregate over a non-numeric value");
    return v;
}

AtomicValue add_values(const AtomicValue& a, const AtomicValue& b) {
    return arithmetic_atomic(a, b, ArithOp::Add);
}

} // namespace

void AggAccumulator::accumulate(BindingSet& env) {
    const XDMSequence* borrowed = nullptr;
    XDMSequence owned;
    if (arg_->kind == PlanExprKind::Variable) {
        borrowed = env.lookup(arg_->var);
        if (!borrowed) raise(ErrorKind::Internal, "unbound aggregate input");
    } else {
        owned = eval_expr(arg_, env, *ctx_);
    }
    const XDMSequence& value = borrowed ? *borrowed : owned;
    if (fn_ == "create_sequence") {
        items_.insert(items_.end(), value.begin(), value.end());
        return;
    }
    if (fn_ == "count") {
        count_ += static_cast<int64_t>(value.size());
        return;
    }
    for (const XDMItem& item : value) {
        AtomicValue v = numeric_for_aggregate(item);
        if (fn_ == "sum") {
            fold_ = any_ ? add_values(fold_, v) : v;
        } else if (fn_ == "avg") {
            avg_sum_ = any_ ? add_values(avg_sum_, v) : v;
            ++count_;
        } else {
            CompareOp op = fn_ == "min" ? CompareOp::Lt : CompareOp::Gt;
            if (!any_ || value_compare_atomic(v, fold_, op)) fold_ = v;
        }
        any_ = true;
    }
}

XDMSequence AggAccumulator::finish() const {
    if (fn_ == "create_sequence") return items_;
    if (fn_ == "count") return singleton(AtomicValue::integer(count_));
    if (fn_ == "sum") return any_ ? singleton(fold_) : singleton(AtomicValue::integer(0));
    if (fn_ == "avg") {
        if (count_ == 0) return {};
        return singleton(arithmetic_atomic(avg_sum_, AtomicValue::integer(count_), ArithOp::Divide));
    }
    return any_ ? singleton(fold_) : XDMSequence{};
}

std::vector<XDMSequence> AggAccumulator::partial() const {
    if (fn_ == "count") return {singleton(AtomicValue::integer(count_))};
    if (fn_ == "avg") {
        XDMSequence sum = any_ ? singleton(avg_sum_) : XDMSequence{};
        return {std::move(sum), singleton(AtomicValue::integer(count_))};
    }
    if (fn_ == "sum" || fn_ == "min" || fn_ == "max")
        return {any_ ? singleton(fold_) : XDMSequence{}};
    raise(ErrorKind::Internal, "no partial state for " + fn_);
}

XDMSequence AggAccumulator::combine_partials(
    AggFn global_fn, const std::vector<std::vector<XDMSequence>>& partials) {
    switch (global_fn) {
        case AggFn::Count: raise(ErrorKind::Internal, "count is never a global combine");
        case AggFn::Sum: {
            bool any = false;
            AtomicValue total;
            for (const auto& p : partials) {
                if (p.at(0).empty()) continue;
                AtomicValue v = p[0].front().atomic();
                total = any ? add_values(total, v) : v;
                any = true;
            }
            return any ? singleton(total) : singleton(AtomicValue::integer(0));
        }
        case AggFn::Min:
        case AggFn::Max: {
            bool any = false;
            AtomicValue best;
            CompareOp op = global_fn == AggFn::Min ? CompareOp::Lt : CompareOp::Gt;
            for (const auto& p : partials) {
                if (p.at(0).empty()) continue;
                AtomicValue v = p[0].front().atomic();
                if (!any || value_compare_atomic(v, best, op)) best = v;
                any = true;
            }
            return any ? singleton(best) : XDMSequence{};
        }
        case AggFn::Avg: {
            bool any = false;
            AtomicValue total;
            int64_t count = 0;
            for (const auto& p : partials) {
                if (p.at(0).empty()) continue;
                AtomicValue v = p[0].front().atomic();
                total = any ? add_values(total, v) : v;
                any = true;
                count += p.at(1).front().atomic().as_int();
            }
            if (!any || count == 0) return {};
            return singleton(arithmetic_atomic(total, AtomicValue::integer(count), ArithOp::Divide));
        }
    }
    raise(ErrorKind::Internal, "bad global aggregate");
}

} // namespace xq
