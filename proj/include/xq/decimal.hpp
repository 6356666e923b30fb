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

/// Fixed-point decimal with 18 fractional digits, round-half-even on division.
/// Backed by a 128-bit integer count of 1e-18 units, which keeps desk-scale
/// aggregation exact and independent of evaluation order.
class Decimal {
  public:
    static constexpr int kFractionDigits = 18;

    Decimal() : units_(0) {}

    static Decimal from_units(__int128 units);
    static Decimal from_int(int64_t value);
    static std::optional<Decimal> parse(std::string_view text);

    __int128 units() const { return units_; }
    bool is_zero() const { return units_ == 0; }
    bool is_negative() const { return units_ < 0; }

    Decimal add(const Decimal& other) const;
    Decimal subtract(const Decimal& other) const;
    Decimal negate() const;
    Decimal multiply(const Decimal& other) const; // throws Type error on overflow
    Decimal divide(const Decimal& other) const;   // half-even; throws on zero divisor

    int compare(const Decimal& other) const;
    bool operator==(const Decimal& other) const { return units_ == other.units_; }

    double to_double() const;
    std::optional<int64_t> to_int() const; // only when integral and in range

    /// Canonical lexical form, trailing fraction zeros trimmed ("41.2", "-0.5", "10").
    std::string to_string() const;

  private:
    explicit Decimal(__int128 units) : units_(units) {}

    __int128 units_;
};

} // namespace xq
