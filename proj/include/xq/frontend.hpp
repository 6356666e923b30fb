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

#include <string>
#include <string_view>
#include <vector>

#include "xq/ast.hpp"

namespace xq {

enum class TokenKind {
    For,
    Let,
    In,
    Where,
    Return,
    Some,
    Satisfies,
    And,
    Or,
    Name,
    Var,
    String,
    IntegerLit,
    DecimalLit,
    DoubleLit,
    LParen,
    RParen,
    Slash,
    At,
    Comma,
    Assign, // :=
    Plus,
    Minus,
    Star,
    EqGeneral, // =
    NeGeneral, // !=
    LtGeneral,
    LeGeneral,
    GtGeneral,
    GeGeneral,
    End,
};

struct Token {
    TokenKind kind;
    std::string text;
    uint32_t offset;
};

/// Lex query text into tokens with source offsets. Comparison words (eq, lt,
/// div, ...) stay Name tokens and are recognized contextually by the parser.
std::vector<Token> tokenize(std::string_view text);

/// Parse the XQuery subset into a surface syntax tree.
AstPtr parse_query(std::string_view text);

/// Rewrite the surface tree into the explicit core form: path steps become
/// iterate/child/sort-distinct compositions, comparisons get explicit
/// atomization, condition sites get explicit effective-boolean-value wrappers,
/// and function arguments gain their treat/promote/data coercions. Idempotent.
AstPtr normalize(const AstPtr& ast);

} // namespace xq
