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

#include "xq/error.hpp"
#include "xq/frontend.hpp"

namespace xq {

namespace {

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

TokenKind keyword_kind(std::string_view word) {
    if (word == "for") return TokenKind::For;
    if (word == "let") return TokenKind::Let;
    if (word == "in") return TokenKind::In;
    if (word == "where") return TokenKind::Where;
    if (word == "return") return TokenKind::Return;
    if (word == "some") return TokenKind::Some;
    if (word == "satisfies") return TokenKind::Satisfies;
    if (word == "and") return TokenKind::And;
    if (word == "or") return TokenKind::Or;
    return TokenKind::Name;
}

} // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    size_t pos = 0;
    auto push = [&](TokenKind kind, std::string tok_text, size_t offset) {
        out.push_back(Token{kind, std::move(tok_text), static_cast<uint32_t>(offset)});
    };
    while (pos < text.size()) {
        char c = text[pos];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++pos;
            continue;
        }
        if (c == '(' && pos + 1 < text.size() && text[pos + 1] == ':') {
            // Nested (: ... :) comments.
            size_t start = pos;
            int depth = 0;
            while (pos < text.size()) {
                if (text[pos] == '(' && pos + 1 < text.size() && text[pos + 1] == ':') {
                    ++depth;
                    pos += 2;
                } else if (text[pos] == ':' && pos + 1 < text.size() && text[pos + 1] == ')') {
                    --depth;
                    pos += 2;
                    if (depth == 0) break;
                } else {
                    ++pos;
                }
            }
            if (depth != 0) raise(ErrorKind::Lex, "unterminated comment at offset " + std::to_string(start));
            continue;
        }
        size_t start = pos;
        if (name_start(c)) {
            ++pos;
            while (pos < text.size() && name_char(text[pos])) ++pos;
            std::string word(text.substr(start, pos - start));
            TokenKind kind = keyword_kind(word);
            push(kind, std::move(word), start);
            continue;
        }
        if (c == '$') {
            ++pos;
            if (pos >= text.size() || !name_start(text[pos]))
                raise(ErrorKind::Lex, "expected variable name at offset " + std::to_string(start));
            size_t name_begin = pos;
            ++pos;
            while (pos < text.size() && name_char(text[pos])) ++pos;
            push(TokenKind::Var, std::string(text.substr(name_begin, pos - name_begin)), start);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            bool decimal = false, dbl = false;
            if (pos < text.size() && text[pos] == '.') {
                decimal = true;
                ++pos;
                while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            }
            if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
                dbl = true;
                ++pos;
                if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
                if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
                    raise(ErrorKind::Lex, "malformed number at offset " + std::to_string(start));
                while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            }
            TokenKind kind = dbl ? TokenKind::DoubleLit
                                 : decimal ? TokenKind::DecimalLit : TokenKind::IntegerLit;
            push(kind, std::string(text.substr(start, pos - start)), start);
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            ++pos;
            std::string value;
            bool closed = false;
            while (pos < text.size()) {
                if (text[pos] == quote) {
                    if (pos + 1 < text.size() && text[pos + 1] == quote) {
                        value.push_back(quote);
                        pos += 2;
                        continue;
                    }
                    ++pos;
                    closed = true;
                    break;
                }
                value.push_back(text[pos]);
                ++pos;
            }
            if (!closed) raise(ErrorKind::Lex, "unterminated string at offset " + std::to_string(start));
            push(TokenKind::String, std::move(value), start);
            continue;
        }
        switch (c) {
            case '(': push(TokenKind::LParen, "(", pos); ++pos; continue;
            case ')': push(TokenKind::RParen, ")", pos); ++pos; continue;
            case '/': push(TokenKind::Slash, "/", pos); ++pos; continue;
            case '@': push(TokenKind::At, "@", pos); ++pos; continue;
            case ',': push(TokenKind::Comma, ",", pos); ++pos; continue;
            case '+': push(TokenKind::Plus, "+", pos); ++pos; continue;
            case '-': push(TokenKind::Minus, "-", pos); ++pos; continue;
            case '*': push(TokenKind::Star, "*", pos); ++pos; continue;
            case '=': push(TokenKind::EqGeneral, "=", pos); ++pos; continue;
            case '!':
                if (pos + 1 < text.size() && text[pos + 1] == '=') {
                    push(TokenKind::NeGeneral, "!=", pos);
                    pos += 2;
                    continue;
                }
                raise(ErrorKind::Lex, "illegal character '!' at offset " + std::to_string(pos));
            case '<':
                if (pos + 1 < text.size() && text[pos + 1] == '=') {
                    push(TokenKind::LeGeneral, "<=", pos);
                    pos += 2;
                } else {
                    push(TokenKind::LtGeneral, "<", pos);
                    ++pos;
                }
                continue;
            case '>':
                if (pos + 1 < text.size() && text[pos + 1] == '=') {
                    push(TokenKind::GeGeneral, ">=", pos);
                    pos += 2;
                } else {
                    push(TokenKind::GtGeneral, ">", pos);
                    ++pos;
                }
                continue;
            case ':':
                if (pos + 1 < text.size() && text[pos + 1] == '=') {
                    push(TokenKind::Assign, ":=", pos);
                    pos += 2;
                    continue;
                }
                raise(ErrorKind::Lex, "illegal character ':' at offset " + std::to_string(pos));
            default:
                raise(ErrorKind::Lex, std::string("illegal character '") + c + "' at offset " +
                                          std::to_string(pos));
        }
    }
    out.push_back(Token{TokenKind::End, "", static_cast<uint32_t>(text.size())});
    return out;
}

} // namespace xq
