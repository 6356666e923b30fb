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

#include <cctype>
#include <unordered_set>

#include "xq/algebra.hpp"
#include "xq/error.hpp"

namespace xq {

namespace {

const std::unordered_set<std::string>& plan_type_names() {
    static const std::unordered_set<std::string> names = {
        "element_node", "document_node", "node", "any_type", "string",  "integer",
        "decimal",      "double",        "boolean", "dateTime", "date", "untypedAtomic",
    };
    return names;
}

void print_expr_into(const PlanExprPtr& expr, std::string& out) {
    switch (expr->kind) {
        case PlanExprKind::Variable:
            out += "$$";
            out += std::to_string(expr->var);
            return;
        case PlanExprKind::Literal: {
            const AtomicValue& v = expr->literal;
            if (v.is_string_family()) {
                out.push_back('"');
                for (char c : v.as_string()) {
                    if (c == '"' || c == '\\') out.push_back('\\');
                    out.push_back(c);
                }
                out.push_back('"');
            } else {
                out += v.lexical();
            }
            return;
        }
        case PlanExprKind::TypeName:
            out += expr->symbol;
            return;
        case PlanExprKind::Call: {
            out += expr->symbol;
            out.push_back('(');
            for (size_t i = 0; i < expr->args.size(); ++i) {
                if (i) out += ", ";
                print_expr_into(expr->args[i], out);
            }
            out.push_back(')');
            return;
        }
        case PlanExprKind::Quantified:
        case PlanExprKind::ForEach: {
            out += expr->kind == PlanExprKind::Quantified ? "some" : "for-each";
            out += "($$";
            out += std::to_string(expr->var);
            out += ", ";
            print_expr_into(expr->args[0], out);
            out += ", ";
            print_expr_into(expr->args[1], out);
            out.push_back(')');
            return;
        }
    }
}

void print_op_chain(const LogicalOp& op, int indent, std::string& out) {
    out.append(static_cast<size_t>(indent) * 2, ' ');
    switch (op.kind) {
        case LogicalOpKind::EmptyTupleSource:
        case LogicalOpKind::NestedTupleSource:
            out += logical_op_name(op.kind);
            out.push_back('\n');
            return;
        case LogicalOpKind::Subplan: {
            out += "SUBPLAN {\n";
            print_op_chain(*op.nested[0], indent + 1, out);
            out.append(static_cast<size_t>(indent) * 2, ' ');
            out += "}\n";
            print_op_chain(*op.inputs[0], indent, out);
            return;
        }
        case LogicalOpKind::Join: {
            out += "JOIN( ";
            print_expr_into(op.exprs[0], out);
            out += " )\n";
            out.append(static_cast<size_t>(indent) * 2, ' ');
            out += "{\n";
            print_op_chain(*op.inputs[0], indent + 1, out);
            out.append(static_cast<size_t>(indent) * 2, ' ');
            out += "} {\n";
            print_op_chain(*op.inputs[1], indent + 1, out);
            out.append(static_cast<size_t>(indent) * 2, ' ');
            out += "}\n";
            return;
        }
        case LogicalOpKind::DataScan: {
            out += "DATASCAN( collection(\"";
            out += op.scan_source;
            out += "\"), $$";
            out += std::to_string(op.produced[0]);
            if (!op.scan_steps.empty()) {
                out += ", \"";
                for (const std::string& step : op.scan_steps) {
                    out.push_back('/');
                    out += step;
                }
                out.push_back('"');
            }
            out += " )\n";
            print_op_chain(*op.inputs[0], indent, out);
            return;
        }
        case LogicalOpKind::DistributeResult:
        case LogicalOpKind::Select: {
            out += logical_op_name(op.kind);
            out += "( ";
            print_expr_into(op.exprs[0], out);
            out += " )\n";
            print_op_chain(*op.inputs[0], indent, out);
            return;
        }
        case LogicalOpKind::Assign:
        case LogicalOpKind::Unnest:
        case LogicalOpKind::Aggregate: {
            out += logical_op_name(op.kind);
            out += "( ";
            for (size_t i = 0; i < op.produced.size(); ++i) {
                if (i) out += ", ";
                out += "$$";
                out += std::to_string(op.produced[i]);
                out.push_back(':');
                print_expr_into(op.exprs[i], out);
            }
            out += " )";
            if (op.kind == LogicalOpKind::Aggregate && op.two_step) {
                out += " [two-step: local ";
                out += agg_fn_name(op.local_fn);
                out += ", global ";
                out += agg_fn_name(op.global_fn);
                out += "]";
            }
            out.push_back('\n');
            print_op_chain(*op.inputs[0], indent, out);
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Line {
    std::string text;
    size_t number;
};

struct ExprCursor {
    const std::string& text;
    size_t pos = 0;
    size_t line;

    [[noreturn]] void fail(const std::string& message) const {
        raise(ErrorKind::PlanSyntax, message + " at line " + std::to_string(line));
    }

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }

    bool accept(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    bool done() {
        skip_ws();
        return pos >= text.size();
    }

    VarId parse_var() {
        skip_ws();
        if (pos + 2 > text.size() || text[pos] != '$' || text[pos + 1] != '$') fail("expected $$N");
        pos += 2;
        size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) fail("expected variable ordinal");
        return static_cast<VarId>(std::stoul(text.substr(start, pos - start)));
    }

    std::string parse_string() {
        expect('"');
        std::string out;
        while (pos < text.size() && text[pos] != '"') {
            if (text[pos] == '\\' && pos + 1 < text.size()) ++pos;
            out.push_back(text[pos]);
            ++pos;
        }
        if (pos >= text.size()) fail("unterminated string");
        ++pos;
        return out;
    }

    PlanExprPtr parse_expr() {
        skip_ws();
        if (pos >= text.size()) fail("expected expression");
        char c = text[pos];
        if (c == '$') return pe_var(parse_var());
        if (c == '"') return pe_literal(AtomicValue::string_value(parse_string()));
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos;
            if (c == '-') ++pos;
            bool decimal = false;
            while (pos < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) {
                if (text[pos] == '.') decimal = true;
                ++pos;
            }
            std::string word = text.substr(start, pos - start);
            if (decimal) {
                auto d = Decimal::parse(word);
                if (!d) fail("bad decimal literal " + word);
                return pe_literal(AtomicValue::decimal(*d));
            }
            return pe_literal(AtomicValue::integer(std::stoll(word)));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
                    text[pos] == '-' || text[pos] == '.'))
                ++pos;
            std::string word = text.substr(start, pos - start);
            skip_ws();
            if (pos < text.size() && text[pos] == '(') {
                ++pos;
                if (word == "some" || word == "for-each") {
                    VarId var = parse_var();
                    expect(',');
                    PlanExprPtr source = parse_expr();
                    expect(',');
                    PlanExprPtr body = parse_expr();
                    expect(')');
                    return word == "some" ? pe_quantified(var, std::move(source), std::move(body))
                                          : pe_foreach(var, std::move(source), std::move(body));
                }
                std::vector<PlanExprPtr> args;
                skip_ws();
                if (!accept(')')) {
                    while (true) {
                        args.push_back(parse_expr());
                        if (accept(')')) break;
                        expect(',');
                    }
                }
                return pe_call(std::move(word), std::move(args));
            }
            if (word == "true") return pe_literal(AtomicValue::boolean(true));
            if (word == "false") return pe_literal(AtomicValue::boolean(false));
            if (plan_type_names().count(word)) return pe_type(std::move(word));
            fail("unknown identifier " + word);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

class PlanParser {
  public:
    explicit PlanParser(const std::string& text) {
        size_t line_no = 1;
        size_t start = 0;
        while (start <= text.size()) {
            size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            std::string line = text.substr(start, end - start);
            size_t b = line.find_first_not_of(" \t\r");
            if (b != std::string::npos) {
                size_t e = line.find_last_not_of(" \t\r");
                lines_.push_back(Line{line.substr(b, e - b + 1), line_no});
            }
            if (end == text.size()) break;
            start = end + 1;
            ++line_no;
        }
    }

    LogicalPlan parse() {
        LogicalOpPtr root = parse_block();
        if (pos_ != lines_.size())
            raise(ErrorKind::PlanSyntax, "trailing content at line " + std::to_string(lines_[pos_].number));
        if (!root || root->kind != LogicalOpKind::DistributeResult)
            raise(ErrorKind::PlanSyntax, "plan does not start with DISTRIBUTE-RESULT");
        LogicalPlan plan;
        plan.root = root;
        plan.result_var = root->exprs[0]->var;
        plan.next_var = max_var_ + 1;
        return plan;
    }

  private:
    [[noreturn]] void fail(const std::string& message) {
        size_t number = pos_ < lines_.size() ? lines_[pos_].number
                                             : (lines_.empty() ? 0 : lines_.back().number);
        raise(ErrorKind::PlanSyntax, message + " at line " + std::to_string(number));
    }

    const Line& peek() {
        if (pos_ >= lines_.size()) fail("unexpected end of plan");
        return lines_[pos_];
    }

    bool at_close() { return pos_ < lines_.size() && lines_[pos_].text[0] == '}'; }

    void track(VarId var) { max_var_ = std::max(max_var_, var); }

    void track_expr(const PlanExprPtr& expr) {
        for (VarId v : expr_variables(expr)) track(v);
        if (expr->kind == PlanExprKind::Quantified || expr->kind == PlanExprKind::ForEach) track(expr->var);
        for (const PlanExprPtr& arg : expr->args)
            if (arg) track_expr(arg);
    }

    // Parses a chain of operators down to its leaf (or JOIN) and links them.
    LogicalOpPtr parse_block() {
        std::vector<LogicalOpPtr> ops;
        while (true) {
            if (pos_ >= lines_.size() || at_close()) break;
            LogicalOpPtr op = parse_entry();
            bool is_leaf = op->kind == LogicalOpKind::EmptyTupleSource ||
                           op->kind == LogicalOpKind::NestedTupleSource ||
                           op->kind == LogicalOpKind::Join;
            ops.push_back(std::move(op));
            if (is_leaf) break;
        }
        if (ops.empty()) fail("empty plan block");
        for (size_t i = 0; i + 1 < ops.size(); ++i) ops[i]->inputs = {ops[i + 1]};
        LogicalOpKind last = ops.back()->kind;
        if (last != LogicalOpKind::EmptyTupleSource && last != LogicalOpKind::NestedTupleSource &&
            last != LogicalOpKind::Join)
            fail("plan block does not end in a source operator");
        return ops.front();
    }

    LogicalOpPtr parse_entry() {
        Line line = peek();
        ++pos_;
        const std::string& text = line.text;
        size_t name_end = 0;
        while (name_end < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[name_end])) || text[name_end] == '-'))
            ++name_end;
        std::string name = text.substr(0, name_end);

        if (name == "EMPTY-TUPLE-SOURCE" || name == "NESTED-TUPLE-SOURCE") {
            return make_op(name == "EMPTY-TUPLE-SOURCE" ? LogicalOpKind::EmptyTupleSource
                                                        : LogicalOpKind::NestedTupleSource);
        }
        if (name == "SUBPLAN") {
            LogicalOpPtr op = make_op(LogicalOpKind::Subplan);
            op->nested.push_back(parse_block());
            if (!at_close() || lines_[pos_].text != "}") fail("expected '}' closing SUBPLAN");
            ++pos_;
            return op;
        }

        ExprCursor cursor{text, name_end, line.number};
        if (name == "JOIN") {
            cursor.expect('(');
            PlanExprPtr cond = cursor.parse_expr();
            track_expr(cond);
            cursor.expect(')');
            LogicalOpPtr op = make_op(LogicalOpKind::Join);
            op->exprs.push_back(std::move(cond));
            if (peek().text != "{") fail("expected '{' after JOIN");
            ++pos_;
            op->inputs.push_back(parse_block());
            if (peek().text != "} {") fail("expected '} {' between JOIN branches");
            ++pos_;
            op->inputs.push_back(parse_block());
            if (peek().text != "}") fail("expected '}' closing JOIN");
            ++pos_;
            return op;
        }
        if (name == "DATASCAN") {
            cursor.expect('(');
            PlanExprPtr source = cursor.parse_expr();
            if (!expr_is_call(source, "collection") || source->args.size() != 1 ||
                source->args[0]->kind != PlanExprKind::Literal)
                fail("DATASCAN expects collection(\"path\") first");
            LogicalOpPtr op = make_op(LogicalOpKind::DataScan);
            op->scan_source = source->args[0]->literal.as_string();
            cursor.expect(',');
            VarId var = cursor.parse_var();
            track(var);
            op->produced.push_back(var);
            if (cursor.accept(',')) {
                std::string path = cursor.parse_string();
                size_t start = 0;
                while (start < path.size()) {
                    if (path[start] == '/') {
                        ++start;
                        continue;
                    }
                    size_t slash = path.find('/', start);
                    if (slash == std::string::npos) slash = path.size();
                    op->scan_steps.push_back(path.substr(start, slash - start));
                    start = slash;
                }
            }
            cursor.expect(')');
            return op;
        }

        LogicalOpKind kind;
        if (name == "DISTRIBUTE-RESULT") kind = LogicalOpKind::DistributeResult;
        else if (name == "ASSIGN") kind = LogicalOpKind::Assign;
        else if (name == "UNNEST") kind = LogicalOpKind::Unnest;
        else if (name == "AGGREGATE") kind = LogicalOpKind::Aggregate;
        else if (name == "SELECT") kind = LogicalOpKind::Select;
        else {
            --pos_;
            fail("unknown operator " + name);
        }

        LogicalOpPtr op = make_op(kind);
        cursor.expect('(');
        if (kind == LogicalOpKind::DistributeResult || kind == LogicalOpKind::Select) {
            PlanExprPtr expr = cursor.parse_expr();
            track_expr(expr);
            op->exprs.push_back(std::move(expr));
        } else {
            while (true) {
                VarId var = cursor.parse_var();
                track(var);
                cursor.expect(':');
                PlanExprPtr expr = cursor.parse_expr();
                track_expr(expr);
                op->produced.push_back(var);
                op->exprs.push_back(std::move(expr));
                if (!cursor.accept(',')) break;
            }
        }
        cursor.expect(')');
        if (kind == LogicalOpKind::Aggregate && cursor.accept('[')) {
            auto word = [&]() {
                cursor.skip_ws();
                size_t start = cursor.pos;
                while (cursor.pos < text.size() &&
                       (std::isalnum(static_cast<unsigned char>(text[cursor.pos])) ||
                        text[cursor.pos] == '-'))
                    ++cursor.pos;
                return text.substr(start, cursor.pos - start);
            };
            auto parse_fn = [&](const std::string& w) {
                if (w == "count") return AggFn::Count;
                if (w == "sum") return AggFn::Sum;
                if (w == "min") return AggFn::Min;
                if (w == "max") return AggFn::Max;
                if (w == "avg") return AggFn::Avg;
                fail("unknown aggregate " + w);
            };
            if (word() != "two-step") fail("expected two-step annotation");
            cursor.expect(':');
            if (word() != "local") fail("expected 'local'");
            op->local_fn = parse_fn(word());
            cursor.expect(',');
            if (word() != "global") fail("expected 'global'");
            op->global_fn = parse_fn(word());
            cursor.expect(']');
            op->two_step = true;
        }
        return op;
    }

    std::vector<Line> lines_;
    size_t pos_ = 0;
    VarId max_var_ = 0;
};

} // namespace

std::string print_expr(const PlanExprPtr& expr) {
    std::string out;
    print_expr_into(expr, out);
    return out;
}

std::string print_plan(const LogicalPlan& plan) {
    std::string out;
    print_op_chain(*plan.root, 0, out);
    return out;
}

LogicalPlan parse_plan(const std::string& text) {
    return PlanParser(text).parse();
}

uint64_t plan_text_hash(const LogicalPlan& plan) {
    std::string text = print_plan(plan);
    uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

} // namespace xq
