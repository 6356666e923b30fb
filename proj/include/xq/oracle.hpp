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

#include <filesystem>
#include <memory>

#include "xq/ast.hpp"
#include "xq/xml_ingest.hpp"

namespace xq {

/// Ground-truth interpreter: a deliberately simple tree walker over the
/// normalized core form and fully materialized documents. It shares the data
/// model primitives with the engine but none of the plan or expression
/// evaluation machinery, so engine/oracle agreement is meaningful evidence.
/// Results are independent of partition count.
class Oracle {
  public:
    Oracle(std::filesystem::path data_root, std::shared_ptr<DocumentCache> docs = nullptr)
        : data_root_(std::move(data_root)),
          docs_(docs ? std::move(docs) : std::make_shared<DocumentCache>()) {}

    XDMSequence eval_query(const std::string& query_text);
    XDMSequence eval_core(const AstPtr& core);

  private:
    std::filesystem::path data_root_;
    std::shared_ptr<DocumentCache> docs_;
};

} // namespace xq
