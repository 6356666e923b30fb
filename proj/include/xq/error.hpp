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

#include <stdexcept>
#include <string>

namespace xq {

enum class ErrorKind {
    Lex,           // illegal character in query text
    Syntax,        // query parse failure
    Bind,          // unbound variable
    Type,          // dynamic type error (promotion, comparison, EBV)
    Parse,         // malformed XML input
    Io,            // file system failure
    PlanSyntax,    // plan text parse failure
    Translation,   // construct outside the supported subset
    Rule,          // a rewrite produced an invalid plan
    PhysicalPlan,  // no physical mapping for an operator
    FrameOverflow, // single tuple exceeds frame capacity
    SpillIo,       // temp file failure during join spill
    Internal,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace xq
