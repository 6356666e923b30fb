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

#include "xq/oracle.hpp"

#include <algorithm>
#include <cctype>

#include "xq/datetime.hpp"
#include "xq/error.hpp"
#include "xq/frontend.hpp"

namespace xq {

namespace {

struct Env {
    std::vector<std::pair<std::string, XDMSequence>> bindings;

    const XDMSequence* lookup(const std::string& name) const {
        for (auto it = bindings.rbegin(); it != bindings.rend(); ++it)
            if (it->first == name) return &it->second;
        return nullptr;
    }
};

class NaiveEval {
  public:
    NaiveEval(const std::filesystem::path& data_root, DocumentCache* docs)
        : data_root_(data_root), docs_(docs) {}

    XDMSequence eval(const AstPtr& node, Env& env) {
        switch (node->kind) {
            case AstKind::Literal: return {XDMItem(node->literal)};
            case AstKind::VarRef: {
                const XDMSequence* bound = env.lookup(node->name);
                if (!bound) raise(ErrorKind::Bind, "unbound variable $" + node->name);
                return *bound;
            }
            case AstKind::FnCall: return eval_call(node, env);
            case AstKind::ForEach: {
                XDMSequence source = eval(node->args[0], env);
                XDMSequence out;
                for (const XDMItem& item : source) {
                    env.bindings.emplace_back(node->name, XDMSequence{item});
                    XDMSequence part = eval(node->args[1], env);
                    env.bindings.pop_back();
                    out.insert(out.end(), part.begin(), part.end());
                }
                return out;
            }
            case AstKind::Quantified: {
                XDMSequence source = eval(node->args[0], env);
                for (const XDMItem& item : source) {
                    env.bindings.emplace_back(node->name, XDMSequence{item});
                    bool ok = effective_boolean_value(eval(node->args[1], env));
                    env.bindings.pop_back();
                    if (ok) return bool_seq(true);
                }
                return bool_seq(false);
            }
            case AstKind::Flwor: {
                XDMSequence out;
                eval_clauses(node, 0, env, &out);
                return out;
            }
            default:
                raise(ErrorKind::Internal, "oracle expects a normalized core tree");
        }
    }

  private:
    static XDMSequence bool_seq(bool v) { return {XDMItem(AtomicValue::boolean(v))}; }

    void eval_clauses(const AstPtr& flwor, size_t index, Env& env, XDMSequence* out) {
        if (index == flwor->clauses.size()) {
            for (const AstPtr& conjunct : flwor->where_conjuncts)
                if (!effective_boolean_value(eval(conjunct, env))) return;
            XDMSequence part = eval(flwor->ret, env);
            out->insert(out->end(), part.begin(), part.end());
            return;
        }
        const FlworClause& clause = flwor->clauses[index];
        if (clause.is_let) {
            env.bindings.emplace_back(clause.var, eval(clause.source, env));
            eval_clauses(flwor, index + 1, env, out);
            env.bindings.pop_back();
            return;
        }
        XDMSequence source = eval(clause.source, env);
        for (const XDMItem& item : source) {
            env.bindings.emplace_back(clause.var, XDMSequence{item});
            eval_clauses(flwor, index + 1, env, out);
            env.bindings.pop_back();
        }
    }

    std::optional<AtomicValue> atomized_singleton(const XDMSequence& seq, const char* what) {
        if (seq.empty()) return std::nullopt;
        if (seq.size() > 1) raise(ErrorKind::Type, std::string(what) + " over a multi-item sequence");
        return atomize_item(seq.front());
    }

    AtomicValue numeric_value(const XDMItem& item) {
        AtomicValue v = atomize_item(item);
        if (v.kind() == AtomicKind::UntypedAtomic) {
            if (auto d = Decimal::parse(v.as_string())) return AtomicValue::decimal(*d);
            return promote(v, AtomicKind::Double);
        }
        if (!v.is_numeric()) raise(ErrorKind::Type, "non-numeric value in aggregate");
        return v;
    }

    XDMSequence eval_call(const AstPtr& node, Env& env) {
        const std::string& fn = node->name;
        auto arg = [&](size_t i) { return eval(node->args[i], env); };
        struct ArgView {
            const XDMSequence* ref;
            XDMSequence owned;
            const XDMSequence& get() const { return ref ? *ref : owned; }
        };
        auto arg_view = [&](size_t i) -> ArgView {
            const AstPtr& a = node->args[i];
            if (a->kind == AstKind::VarRef) {
                const XDMSequence* bound = env.lookup(a->name);
                if (!bound) raise(ErrorKind::Bind, "unbound variable $" + a->name);
                return ArgView{bound, {}};
            }
            return ArgView{nullptr, eval(a, env)};
        };

        if (fn == "data") return atomize(arg_view(0).get());
        if (fn == "boolean") return bool_seq(effective_boolean_value(arg_view(0).get()));
        if (fn == "not") return bool_seq(!effective_boolean_value(arg_view(0).get()));
        if (fn == "child" || fn == "attribute") {
            ArgView input_view = arg_view(0);
            const XDMSequence& input = input_view.get();
            const std::string& name = node->args[1]->literal.as_string();
            XDMSequence out;
            for (const XDMItem& item : input) {
                if (!item.is_node()) raise(ErrorKind::Type, "path step over an atomic");
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
        if (fn == "treat") {
            XDMSequence value = arg(0);
            const std::string& type = node->args[1]->name;
            for (const XDMItem& item : value) {
                bool ok;
                if (type == "any_type" || type == "node") ok = true;
                else if (type == "element_node")
                    ok = item.is_node() && (item.node().kind() == NodeKind::Element ||
                                            item.node().kind() == NodeKind::Document);
                else if (type == "document_node")
                    ok = item.is_node() && item.node().kind() == NodeKind::Document;
                else if (item.is_node()) ok = false;
                else ok = item.atomic().kind() == *atomic_kind_from_name(type);
                if (!ok) raise(ErrorKind::Type, "treat as " + type + " failed");
            }
            return value;
        }
        if (fn == "promote") {
            XDMSequence value = atomize(arg(0));
            AtomicKind target = *atomic_kind_from_name(node->args[1]->name);
            XDMSequence out;
            for (const XDMItem& item : value) out.emplace_back(promote(item.atomic(), target));
            return out;
        }
        if (fn == "sort-distinct-nodes-asc-or-atomics" || fn == "sort-nodes-asc-or-atomics" ||
            fn == "distinct-nodes-or-atomics") {
            XDMSequence seq = arg(0);
            bool all_nodes =
                std::all_of(seq.begin(), seq.end(), [](const XDMItem& i) { return i.is_node(); });
            if (!all_nodes) return seq;
            if (fn != "distinct-nodes-or-atomics")
                std::stable_sort(seq.begin(), seq.end(), [](const XDMItem& a, const XDMItem& b) {
                    return compare_document_order(a.node().id(), b.node().id()) == Ordering::Less;
                });
            if (fn != "sort-nodes-asc-or-atomics") {
                XDMSequence out;
                for (XDMItem& item : seq) {
                    bool dup = false;
                    if (fn == "distinct-nodes-or-atomics") {
                        // Unsorted input: scan previously kept nodes.
                        for (const XDMItem& kept : out)
                            if (compare_document_order(kept.node().id(), item.node().id()) ==
                                Ordering::Equal) {
                                dup = true;
                                break;
                            }
                    } else {
                        dup = !out.empty() &&
                              compare_document_order(out.back().node().id(), item.node().id()) ==
                                  Ordering::Equal;
                    }
                    if (!dup) out.push_back(std::move(item));
                }
                return out;
            }
            return seq;
        }
        if (fn.rfind("value-", 0) == 0) {
            ArgView lv = arg_view(0), rv = arg_view(1);
            auto l = atomized_singleton(lv.get(), "value comparison");
            auto r = atomized_singleton(rv.get(), "value comparison");
            if (!l || !r) return {};
            return bool_seq(value_compare_atomic(*l, *r, compare_suffix(fn, 6)));
        }
        if (fn.rfind("general-", 0) == 0) {
            CompareOp op = compare_suffix(fn, 8);
            XDMSequence lhs = atomize(arg(0));
            XDMSequence rhs = atomize(arg(1));
            for (const XDMItem& l : lhs)
                for (const XDMItem& r : rhs)
                    if (value_compare_atomic(l.atomic(), r.atomic(), op)) return bool_seq(true);
            return bool_seq(false);
        }
        if (fn == "and" || fn == "or") {
            bool is_and = fn == "and";
            for (const AstPtr& operand : node->args) {
                bool v = effective_boolean_value(eval(operand, env));
                if (v != is_and) return bool_seq(!is_and);
            }
            return bool_seq(is_and);
        }
        if (fn == "add" || fn == "subtract" || fn == "multiply" || fn == "divide") {
            auto l = atomized_singleton(arg(0), "arithmetic");
            auto r = atomized_singleton(arg(1), "arithmetic");
            if (!l || !r) return {};
            ArithOp op = fn == "add" ? ArithOp::Add
                         : fn == "subtract" ? ArithOp::Subtract
                         : fn == "multiply" ? ArithOp::Multiply : ArithOp::Divide;
            return {XDMItem(arithmetic_atomic(*l, *r, op))};
        }
        if (fn == "count") return {XDMItem(AtomicValue::integer(static_cast<int64_t>(arg(0).size())))};
        if (fn == "sum") {
            XDMSequence value = arg(0);
            if (value.empty()) return {XDMItem(AtomicValue::integer(0))};
            AtomicValue total = numeric_value(value[0]);
            for (size_t i = 1; i < value.size(); ++i)
                total = arithmetic_atomic(total, numeric_value(value[i]), ArithOp::Add);
            return {XDMItem(total)};
        }
        if (fn == "min" || fn == "max") {
            XDMSequence value = arg(0);
            if (value.empty()) return {};
            CompareOp op = fn == "min" ? CompareOp::Lt : CompareOp::Gt;
            AtomicValue best = numeric_value(value[0]);
            for (size_t i = 1; i < value.size(); ++i) {
                AtomicValue v = numeric_value(value[i]);
                if (value_compare_atomic(v, best, op)) best = v;
            }
            return {XDMItem(best)};
        }
        if (fn == "avg") {
            XDMSequence value = arg(0);
            if (value.empty()) return {};
            AtomicValue total = numeric_value(value[0]);
            for (size_t i = 1; i < value.size(); ++i)
                total = arithmetic_atomic(total, numeric_value(value[i]), ArithOp::Add);
            return {XDMItem(arithmetic_atomic(
                total, AtomicValue::integer(static_cast<int64_t>(value.size())), ArithOp::Divide))};
        }
        if (fn == "sequence") {
            XDMSequence out;
            for (size_t i = 0; i < node->args.size(); ++i) {
                XDMSequence part = arg(i);
                out.insert(out.end(), part.begin(), part.end());
            }
            return out;
        }
        if (fn == "doc") {
            auto name = atomized_singleton(arg(0), "doc");
            if (!name) return {};
            return {XDMItem(NodeHandle{docs_->document(data_root_ / name->as_string()), 0})};
        }
        if (fn == "collection") {
            auto name = atomized_singleton(arg(0), "collection");
            if (!name) return {};
            auto docs = docs_->collection(resolve_collection_dir(data_root_, name->as_string()));
            XDMSequence out;
            out.reserve(docs->size());
            for (const DocumentPtr& doc : *docs) out.emplace_back(NodeHandle{doc, 0});
            return out;
        }
        if (fn == "dateTime") {
            auto v = atomized_singleton(arg(0), "dateTime");
            if (!v) return {};
            if (v->kind() == AtomicKind::DateTime) return {XDMItem(*v)};
            if (!v->is_string_family())
                raise(ErrorKind::Type, "cannot cast to dateTime");
            auto ms = parse_date_time_millis(v->as_string());
            if (!ms) raise(ErrorKind::Type, "cannot parse dateTime \"" + v->as_string() + "\"");
            return {XDMItem(AtomicValue::date_time(*ms))};
        }
        if (fn == "year-from-dateTime" || fn == "month-from-dateTime" || fn == "day-from-dateTime") {
            auto v = atomized_singleton(arg(0), fn.c_str());
            if (!v) return {};
            if (v->kind() != AtomicKind::DateTime) raise(ErrorKind::Type, fn + " expects a dateTime");
            CivilDate cd = civil_from_millis(v->as_millis());
            int64_t part = fn[0] == 'y' ? cd.year : fn[0] == 'm' ? cd.month : cd.day;
            return {XDMItem(AtomicValue::integer(part))};
        }
        if (fn == "upper-case") {
            auto v = atomized_singleton(arg(0), "upper-case");
            if (!v) return {XDMItem(AtomicValue::string_value(""))};
            std::string s = v->as_string();
            for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return {XDMItem(AtomicValue::string_value(std::move(s)))};
        }
        if (fn == "decimal" || fn == "string" || fn == "integer" || fn == "double") {
            auto v = atomized_singleton(arg(0), fn.c_str());
            if (!v) return {};
            return {XDMItem(cast_atomic(*v, *atomic_kind_from_name(fn)))};
        }
        raise(ErrorKind::Type, "unknown function " + fn);
    }

    static CompareOp compare_suffix(const std::string& fn, size_t prefix) {
        std::string op = fn.substr(prefix);
        if (op == "eq") return CompareOp::Eq;
        if (op == "ne") return CompareOp::Ne;
        if (op == "lt") return CompareOp::Lt;
        if (op == "le") return CompareOp::Le;
        if (op == "gt") return CompareOp::Gt;
        return CompareOp::Ge;
    }

    std::filesystem::path data_root_;
    DocumentCache* docs_;
};

} // namespace

XDMSequence Oracle::eval_core(const AstPtr& core) {
    NaiveEval eval(data_root_, docs_.get());
    Env env;
    return eval.eval(core, env);
}

XDMSequence Oracle::eval_query(const std::string& query_text) {
    return eval_core(normalize(parse_query(query_text)));
}

} // namespace xq
