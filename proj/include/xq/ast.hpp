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

#include <memory>
#include <string>
#include <vector>

#include "xq/xdm.hpp"

namespace xq {

enum class AstKind {
    Literal,
    VarRef,
    FnCall,
    TypeName,
    Compare,
    Arith,
    And,
    Or,
    Path,
    Flwor,
    Quantified,
    SequenceCtor,
    // Core-only: concatenation of body results over the items of a source
    // sequence, with the item bound to a variable. Path steps expand to this.
    ForEach,
};

struct AstNode;
using AstPtr = std::shared_ptr<const AstNode>;

struct FlworClause {
    bool is_let = false;
    std::string var;
    AstPtr source;
};

/// One node type covers both the surface syntax tree and the normalized core
/// form; normalization removes Compare/Arith/And/Or/Path/SequenceCtor in favor
/// of explicit function applications.
struct AstNode {
    AstKind kind = AstKind::Literal;
    uint32_t offset = 0;

    AtomicValue literal;               // Literal
    std::string name;                  // VarRef/Quantified/ForEach: variable; FnCall: function;
                                       // Path: step name; TypeName: type
    bool attribute_step = false;       // Path
    CompareOp cmp = CompareOp::Eq;     // Compare
    bool general_comparison = false;   // Compare: =, !=, <, <=, >, >=
    ArithOp arith = ArithOp::Add;      // Arith

    // Children. Path: [base]; Compare/Arith: [lhs, rhs]; And/Or: operands;
    // FnCall: arguments; Quantified/ForEach: [source, body]; SequenceCtor: items.
    std::vector<AstPtr> args;

    // Flwor
    std::vector<FlworClause> clauses;
    AstPtr where;                         // surface form
    std::vector<AstPtr> where_conjuncts;  // core form, each wrapped in boolean()
    AstPtr ret;
};

AstPtr ast_literal(AtomicValue value, uint32_t offset = 0);
AstPtr ast_var(std::string name, uint32_t offset = 0);
AstPtr ast_call(std::string fn, std::vector<AstPtr> args, uint32_t offset = 0);
AstPtr ast_type_name(std::string name, uint32_t offset = 0);
AstPtr ast_foreach(std::string var, AstPtr source, AstPtr body);
AstPtr ast_quantified(std::string var, AstPtr source, AstPtr cond, uint32_t offset = 0);

/// Unparse a surface-syntax tree back to query text (round-trips through
/// parse_query for the supported subset).
std::string ast_to_query(const AstPtr& node);

/// Structural equality (used by the round-trip and idempotence properties).
bool ast_equal(const AstPtr& a, const AstPtr& b);

} // namespace xq
