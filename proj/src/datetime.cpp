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

#include "xq/datetime.hpp"

#include <cctype>
#include <cstdio>

namespace xq {

namespace {

constexpr int64_t kMillisPerDay = 86400000;

// Days from civil algorithm (proleptic Gregorian), era-based.
int64_t days_from_civil(int32_t y, uint32_t m, uint32_t d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const uint32_t yoe = static_cast<uint32_t>(y - era * 400);
    const uint32_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const uint32_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

struct NumberCursor {
    std::string_view text;
    size_t pos = 0;

    bool digits(int count, int64_t* out) {
        int64_t v = 0;
        for (int i = 0; i < count; ++i) {
            if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) return false;
            v = v * 10 + (text[pos] - '0');
            ++pos;
        }
        *out = v;
        return true;
    }

    bool literal(char c) {
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    bool done() const { return pos == text.size(); }
};

bool valid_ymd(int64_t y, int64_t mo, int64_t d) {
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return false;
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int max_day = lengths[mo - 1];
    if (mo == 2) {
        bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        if (leap) max_day = 29;
    }
    return d <= max_day;
}

} // namespace

std::optional<int64_t> parse_date_time_millis(std::string_view text) {
    NumberCursor c{text};
    bool neg_year = c.literal('-');
    int64_t y, mo, d, h, mi, s;
    if (!c.digits(4, &y)) return std::nullopt;
    if (neg_year) y = -y;
    if (!c.literal('-') || !c.digits(2, &mo)) return std::nullopt;
    if (!c.literal('-') || !c.digits(2, &d)) return std::nullopt;
    if (!c.literal('T') || !c.digits(2, &h)) return std::nullopt;
    if (!c.literal(':') || !c.digits(2, &mi)) return std::nullopt;
    if (!c.literal(':') || !c.digits(2, &s)) return std::nullopt;
    if (!valid_ymd(y, mo, d) || h > 24 || mi > 59 || s > 60) return std::nullopt;
    int64_t millis = 0;
    if (c.literal('.')) {
        int64_t scale = 100;
        bool any = false;
        while (c.pos < text.size() && std::isdigit(static_cast<unsigned char>(text[c.pos]))) {
            if (scale > 0) millis += (text[c.pos] - '0') * scale;
            scale /= 10;
            ++c.pos;
            any = true;
        }
        if (!any) return std::nullopt;
    }
    int64_t tz_offset_min = 0;
    if (!c.done()) {
        if (c.literal('Z')) {
            // UTC
        } else {
            bool neg;
            if (c.literal('+')) {
                neg = false;
            } else if (c.literal('-')) {
                neg = true;
            } else {
                return std::nullopt;
            }
            int64_t th, tm;
            if (!c.digits(2, &th) || !c.literal(':') || !c.digits(2, &tm)) return std::nullopt;
            if (th > 14 || tm > 59) return std::nullopt;
            tz_offset_min = th * 60 + tm;
            if (neg) tz_offset_min = -tz_offset_min;
        }
        if (!c.done()) return std::nullopt;
    }
    int64_t days = days_from_civil(static_cast<int32_t>(y), static_cast<uint32_t>(mo), static_cast<uint32_t>(d));
    int64_t total = days * kMillisPerDay + ((h * 60 + mi) * 60 + s) * 1000 + millis;
    return total - tz_offset_min * 60000;
}

std::optional<int64_t> parse_date_millis(std::string_view text) {
    NumberCursor c{text};
    bool neg_year = c.literal('-');
    int64_t y, mo, d;
    if (!c.digits(4, &y)) return std::nullopt;
    if (neg_year) y = -y;
    if (!c.literal('-') || !c.digits(2, &mo)) return std::nullopt;
    if (!c.literal('-') || !c.digits(2, &d)) return std::nullopt;
    if (!valid_ymd(y, mo, d)) return std::nullopt;
    if (!c.done()) {
        if (c.literal('Z') && c.done()) {
            // accepted
        } else {
            return std::nullopt;
        }
    }
    return days_from_civil(static_cast<int32_t>(y), static_cast<uint32_t>(mo), static_cast<uint32_t>(d)) * kMillisPerDay;
}

CivilDate civil_from_millis(int64_t epoch_millis) {
    int64_t z = epoch_millis / kMillisPerDay;
    if (epoch_millis % kMillisPerDay < 0) --z;
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const uint32_t doe = static_cast<uint32_t>(z - era * 146097);
    const uint32_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const uint32_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const uint32_t mp = (5 * doy + 2) / 153;
    const uint32_t day = doy - (153 * mp + 2) / 5 + 1;
    const uint32_t month = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int32_t>(y + (month <= 2)), month, day};
}

int64_t millis_from_civil(int32_t year, uint32_t month, uint32_t day) {
    return days_from_civil(year, month, day) * kMillisPerDay;
}

std::string format_date_time(int64_t epoch_millis) {
    CivilDate cd = civil_from_millis(epoch_millis);
    int64_t day_ms = epoch_millis % kMillisPerDay;
    if (day_ms < 0) day_ms += kMillisPerDay;
    int64_t ms = day_ms % 1000;
    int64_t sec = day_ms / 1000 % 60;
    int64_t min = day_ms / 60000 % 60;
    int64_t hour = day_ms / 3600000;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03d", cd.year, cd.month, cd.day,
                  static_cast<int>(hour), static_cast<int>(min), static_cast<int>(sec), static_cast<int>(ms));
    return buf;
}

std::string format_date(int64_t epoch_millis) {
    CivilDate cd = civil_from_millis(epoch_millis);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", cd.year, cd.month, cd.day);
    return buf;
}

} // namespace xq
