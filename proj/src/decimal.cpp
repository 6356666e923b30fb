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

#include "xq/decimal.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "xq/error.hpp"

namespace xq {

namespace {

constexpr __int128 kScale = []() {
    __int128 s = 1;
    for (int i = 0; i < Decimal::kFractionDigits; ++i) s *= 10;
    return s;
}();

const __int128 kInt128Max = static_cast<__int128>(~static_cast<unsigned __int128>(0) >> 1);

bool add_overflows(__int128 a, __int128 b, __int128* out) {
    return __builtin_add_overflow(a, b, out);
}

bool mul_overflows(__int128 a, __int128 b, __int128* out) {
    return __builtin_mul_overflow(a, b, out);
}

std::string int128_to_string(__int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    char buf[64];
    int pos = 64;
    while (u > 0) {
        buf[--pos] = static_cast<char>('0' + static_cast<int>(u % 10));
        u /= 10;
    }
    std::string out;
    if (neg) out.push_back('-');
    out.append(buf + pos, 64 - pos);
    return out;
}

} // namespace

Decimal Decimal::from_units(__int128 units) { return Decimal(units); }

Decimal Decimal::from_int(int64_t value) {
    return Decimal(static_cast<__int128>(value) * kScale);
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
    size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }
    bool any_digit = false;
    __int128 int_part = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        __int128 next;
        if (mul_overflows(int_part, 10, &next)) return std::nullopt;
        if (add_overflows(next, text[i] - '0', &int_part)) return std::nullopt;
        any_digit = true;
        ++i;
    }
    __int128 frac_units = 0;
    if (i < text.size() && text[i] == '.') {
        ++i;
        __int128 digit_scale = kScale / 10;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            if (digit_scale > 0) frac_units += (text[i] - '0') * digit_scale;
            digit_scale /= 10;
            any_digit = true;
            ++i;
        }
    }
    if (!any_digit || i != text.size()) return std::nullopt;
    __int128 scaled;
    if (mul_overflows(int_part, kScale, &scaled)) return std::nullopt;
    __int128 total;
    if (add_overflows(scaled, frac_units, &total)) return std::nullopt;
    return Decimal(neg ? -total : total);
}

Decimal Decimal::add(const Decimal& other) const {
    __int128 out;
    if (add_overflows(units_, other.units_, &out)) raise(ErrorKind::Type, "decimal overflow in addition");
    return Decimal(out);
}

Decimal Decimal::subtract(const Decimal& other) const {
    __int128 out;
    if (__builtin_sub_overflow(units_, other.units_, &out)) raise(ErrorKind::Type, "decimal overflow in subtraction");
    return Decimal(out);
}

Decimal Decimal::negate() const { return Decimal(-units_); }

Decimal Decimal::multiply(const Decimal& other) const {
    // Split both operands into integral and fractional unit counts so the
    // intermediate products stay inside 128 bits for desk-scale magnitudes.
    bool neg = (units_ < 0) != (other.units_ < 0);
    unsigned __int128 a = units_ < 0 ? static_cast<unsigned __int128>(-(units_ + 1)) + 1
                                     : static_cast<unsigned __int128>(units_);
    unsigned __int128 b = other.units_ < 0 ? static_cast<unsigned __int128>(-(other.units_ + 1)) + 1
                                           : static_cast<unsigned __int128>(other.units_);
    unsigned __int128 scale = static_cast<unsigned __int128>(kScale);
    unsigned __int128 ai = a / scale, af = a % scale;
    unsigned __int128 bi = b / scale, bf = b % scale;

    unsigned __int128 hi;
    if (__builtin_mul_overflow(ai, bi, &hi)) raise(ErrorKind::Type, "decimal overflow in multiplication");
    unsigned __int128 hi_units;
    if (__builtin_mul_overflow(hi, scale, &hi_units)) raise(ErrorKind::Type, "decimal overflow in multiplication");

    unsigned __int128 cross1, cross2;
    if (__builtin_mul_overflow(ai, bf, &cross1) || __builtin_mul_overflow(bi, af, &cross2))
        raise(ErrorKind::Type, "decimal overflow in multiplication");

    // af*bf < 1e36, safely representable; half-even round at the last digit.
    unsigned __int128 low_prod = af * bf;
    unsigned __int128 low = low_prod / scale;
    unsigned __int128 rem = low_prod % scale;
    unsigned __int128 half = scale / 2;
    if (rem > half || (rem == half && (low & 1))) ++low;

    unsigned __int128 total = hi_units;
    if (__builtin_add_overflow(total, cross1, &total) || __builtin_add_overflow(total, cross2, &total) ||
        __builtin_add_overflow(total, low, &total))
        raise(ErrorKind::Type, "decimal overflow in multiplication");
    if (total > static_cast<unsigned __int128>(kInt128Max)) raise(ErrorKind::Type, "decimal overflow in multiplication");
    __int128 result = static_cast<__int128>(total);
    return Decimal(neg ? -result : result);
}

Decimal Decimal::divide(const Decimal& other) const {
    if (other.units_ == 0) raise(ErrorKind::Type, "decimal division by zero");
    bool neg = (units_ < 0) != (other.units_ < 0);
    unsigned __int128 a = units_ < 0 ? static_cast<unsigned __int128>(-(units_ + 1)) + 1
                                     : static_cast<unsigned __int128>(units_);
    unsigned __int128 b = other.units_ < 0 ? static_cast<unsigned __int128>(-(other.units_ + 1)) + 1
                                           : static_cast<unsigned __int128>(other.units_);
    // Long division digit by digit over the 18 fractional places keeps every
    // intermediate below b * 10.
    unsigned __int128 quotient = a / b;
    unsigned __int128 remainder = a % b;
    for (int i = 0; i < kFractionDigits; ++i) {
        if (__builtin_mul_overflow(quotient, static_cast<unsigned __int128>(10), &quotient))
            raise(ErrorKind::Type, "decimal overflow in division");
        remainder *= 10;
        quotient += remainder / b;
        remainder %= b;
    }
    // Half-even on the residue.
    unsigned __int128 twice = remainder * 2;
    if (twice > b || (twice == b && (quotient & 1))) ++quotient;
    if (quotient > static_cast<unsigned __int128>(kInt128Max)) raise(ErrorKind::Type, "decimal overflow in division");
    __int128 result = static_cast<__int128>(quotient);
    return Decimal(neg ? -result : result);
}

int Decimal::compare(const Decimal& other) const {
    if (units_ < other.units_) return -1;
    if (units_ > other.units_) return 1;
    return 0;
}

double Decimal::to_double() const {
    return static_cast<double>(units_) / static_cast<double>(kScale);
}

std::optional<int64_t> Decimal::to_int() const {
    if (units_ % kScale != 0) return std::nullopt;
    __int128 v = units_ / kScale;
    if (v > std::numeric_limits<int64_t>::max() || v < std::numeric_limits<int64_t>::min()) return std::nullopt;
    return static_cast<int64_t>(v);
}

std::string Decimal::to_string() const {
    __int128 v = units_;
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    unsigned __int128 scale = static_cast<unsigned __int128>(kScale);
    std::string int_part = int128_to_string(static_cast<__int128>(u / scale));
    unsigned __int128 frac = u % scale;
    std::string out;
    if (neg) out.push_back('-');
    out += int_part;
    if (frac != 0) {
        char digits[kFractionDigits];
        for (int i = kFractionDigits - 1; i >= 0; --i) {
            digits[i] = static_cast<char>('0' + static_cast<int>(frac % 10));
            frac /= 10;
        }
        int last = kFractionDigits - 1;
        while (last >= 0 && digits[last] == '0') --last;
        out.push_back('.');
        out.append(digits, digits + last + 1);
    }
    return out;
}

} // namespace xq
