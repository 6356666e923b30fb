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
#include <optional>
#include <string>
#include <string_view>

namespace xq {

// Instants are proleptic-Gregorian UTC epoch milliseconds. Timezone offsets in
// lexical forms are accepted and normalized away.

std::optional<int64_t> parse_date_time_millis(std::string_view text);
std::optional<int64_t> parse_date_millis(std::string_view text); // midnight UTC

struct CivilDate {
    int32_t year;
    uint32_t month; // 1..12
    uint32_t day;   // 1..31
};

CivilDate civil_from_millis(int64_t epoch_millis);
int64_t millis_from_civil(int32_t year, uint32_t month, uint32_t day);

std::string format_date_time(int64_t epoch_millis); // yyyy-mm-ddThh:mm:ss.mmm
std::string format_date(int64_t epoch_millis);      // yyyy-mm-dd

} // namespace xq
