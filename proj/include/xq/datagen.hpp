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
#include <map>
#include <string>

namespace xq {

/// Deterministic weather-corpus generator: same spec, byte-identical output.
/// Writes /sensors (daily readings), /stations (station metadata with
/// location labels), and /sensors_min + /sensors_max (per-day extremes for
/// the two-sided join), plus a manifest of planted ground truths.
struct GenSpec {
    uint64_t seed = 42;
    uint32_t stations = 10;
    uint32_t days = 100; // one reading per station-day, data types cycling
    uint32_t partitions = 4;
    uint32_t records_per_file = 1000;
    uint32_t extreme_days = 40; // per-station days in sensors_min/sensors_max
    bool plant_extrema = true;  // plant the known query targets (max, min, fixed dates)
    std::filesystem::path out;
};

struct Manifest {
    std::map<std::string, std::string> values;

    const std::string& at(const std::string& key) const;
    int64_t count(const std::string& key) const;

    void save(const std::filesystem::path& path) const;
    static Manifest load(const std::filesystem::path& path);
};

Manifest generate(const GenSpec& spec);

} // namespace xq
