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

#include "xq/datagen.hpp"

#include <fstream>
#include <random>
#include <vector>

#include "xq/datetime.hpp"
#include "xq/error.hpp"

namespace xq {

namespace {

constexpr int64_t kMillisPerDay = 86400000;

const char* kDataTypes[] = {"TMAX", "TMIN", "PRCP", "AWND", "SNOW"};

struct StationInfo {
    std::string id;
    std::string display_name;
    std::string state_id;
    std::string state_name;
    std::string latitude;
    std::string longitude;
};

// Integer tenths rendered exactly ("412" -> "41.2", "410" -> "41").
std::string tenths_to_string(int64_t tenths) {
    int64_t whole = tenths / 10;
    int64_t frac = tenths % 10;
    if (frac < 0) frac = -frac;
    std::string out;
    if (tenths < 0 && whole == 0) out += "-";
    out += std::to_string(whole);
    if (frac != 0) {
        out.push_back('.');
        out.push_back(static_cast<char>('0' + frac));
    }
    return out;
}

class FileSink {
  public:
    FileSink(std::filesystem::path dir, std::string root_element, std::string declaration,
             uint32_t records_per_file)
        : dir_(std::move(dir)),
          root_(std::move(root_element)),
          declaration_(std::move(declaration)),
          records_per_file_(records_per_file) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) raise(ErrorKind::Io, "cannot create " + dir_.string());
    }

    void add(const std::string& record) {
        if (!out_.is_open()) open_next();
        out_ << record << "\n";
        if (++in_file_ >= records_per_file_) close_file();
    }

    void done() {
        if (out_.is_open()) close_file();
    }

    uint32_t files_written() const { return file_index_; }

  private:
    void open_next() {
        char name[32];
        std::snprintf(name, sizeof(name), "part-%05u.xml", file_index_);
        out_.open(dir_ / name, std::ios::binary);
        if (!out_) raise(ErrorKind::Io, "cannot write " + (dir_ / name).string());
        out_ << declaration_ << "\n<" << root_ << ">\n";
        in_file_ = 0;
    }

    void close_file() {
        out_ << "</" << root_ << ">\n";
        out_.close();
        ++file_index_;
    }

    std::filesystem::path dir_;
    std::string root_;
    std::string declaration_;
    uint32_t records_per_file_;
    std::ofstream out_;
    uint32_t in_file_ = 0;
    uint32_t file_index_ = 0;
};

std::string data_record(int64_t date_millis, const char* data_type, const std::string& station,
                        const std::string& value) {
    std::string out = "<data><date>";
    out += format_date_time(date_millis);
    out += "</date><dataType>";
    out += data_type;
    out += "</dataType><station>";
    out += station;
    out += "</station><value>";
    out += value;
    out += "</value></data>";
    return out;
}

} // namespace

const std::string& Manifest::at(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) raise(ErrorKind::Io, "manifest key missing: " + key);
    return it->second;
}

int64_t Manifest::count(const std::string& key) const { return std::stoll(at(key)); }

void Manifest::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::Io, "cannot write " + path.string());
    for (const auto& [key, value] : values) out << key << "=" << value << "\n";
}

Manifest Manifest::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot read " + path.string());
    Manifest manifest;
    std::string line;
    while (std::getline(in, line)) {
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        manifest.values[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return manifest;
}

Manifest generate(const GenSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    // Raw engine output with modulo keeps the byte stream identical across
    // standard library implementations.
    auto pick = [&rng](uint64_t bound) { return static_cast<int64_t>(rng() % bound); };

    const int64_t day0 = millis_from_civil(1975, 1, 1) / kMillisPerDay;
    const int64_t day_span = millis_from_civil(2004, 12, 31) / kMillisPerDay - day0;

    // Station table. Three fixed stations anchor the query predicates; the
    // single Washington station keeps the 1976-07-04 join count controlled.
    std::vector<StationInfo> stations;
    static const char* kStates[][2] = {{"FIPS:12", "Florida"},   {"FIPS:36", "New York"},
                                       {"FIPS:53", "Washington"}, {"FIPS:06", "California"},
                                       {"FIPS:48", "Texas"},      {"FIPS:17", "Illinois"},
                                       {"FIPS:08", "Colorado"},   {"FIPS:23", "Maine"}};
    for (uint32_t s = 0; s < spec.stations; ++s) {
        StationInfo info;
        if (s == 0) {
            info.id = "GHCND:USW00012836";
            info.display_name = "KEY WEST INTL AIRPORT FL US";
            info.state_id = kStates[0][0];
            info.state_name = kStates[0][1];
        } else if (s == 1) {
            info.id = "GHCND:USW00014771";
            info.display_name = "SYRACUSE HANCOCK INTL AIRPORT NY US";
            info.state_id = kStates[1][0];
            info.state_name = kStates[1][1];
        } else if (s == 2) {
            info.id = "GHCND:USW00024233";
            info.display_name = "SEATTLE TACOMA INTL AIRPORT WA US";
            info.state_id = kStates[2][0];
            info.state_name = kStates[2][1];
        } else {
            char id[32];
            std::snprintf(id, sizeof(id), "GHCND:US%09u", s);
            info.id = id;
            info.display_name = "STATION " + std::to_string(s) + " US";
            // Skip Washington so exactly one station matches the state probe.
            size_t state = 3 + s % 5;
            info.state_id = kStates[state][0];
            info.state_name = kStates[state][1];
        }
        info.latitude = tenths_to_string(pick(1800) - 900);
        info.longitude = tenths_to_string(pick(3600) - 1800);
        stations.push_back(std::move(info));
    }

    // Ground-truth counters maintained while emitting.
    int64_t q1_count = 0;
    int64_t q2_count = 0;
    int64_t q3_max_tenths = INT64_MIN;
    int64_t q4_count = 0;
    int64_t q5_min_tenths = INT64_MAX;
    int64_t prcp_1999_station1 = 0;
    int64_t record_count = 0;

    const std::string wa_station = spec.stations > 2 ? stations[2].id : std::string();

    // value_units: raw integer value for temperatures/precipitation/snow, or
    // milli-units for AWND (which carries one fractional digit).
    auto classify = [&](const std::string& station, const char* type, int64_t date_millis,
                        int64_t value_units, bool is_awnd) {
        ++record_count;
        CivilDate cd = civil_from_millis(date_millis);
        if (station == stations[0].id && cd.year >= 2003 && cd.month == 12 && cd.day == 25)
            ++q1_count;
        if (is_awnd && value_units > 491744) ++q2_count; // raw value > 491.744
        if (!is_awnd && std::string_view(type) == "TMAX" && value_units > q3_max_tenths)
            q3_max_tenths = value_units;
        if (station == wa_station && date_millis == millis_from_civil(1976, 7, 4)) ++q4_count;
        if (std::string_view(type) == "TMIN" && cd.year == 2001 && value_units < q5_min_tenths)
            q5_min_tenths = value_units;
        if (station == stations[1].id && std::string_view(type) == "PRCP" && cd.year == 1999)
            prcp_1999_station1 += value_units;
    };

    FileSink sensors(spec.out / "sensors", "dataCollection",
                     "<?xml version=\"1.0\" encoding=\"UTF-8\"?>", spec.records_per_file);

    // AWND carries one fractional digit; its milli-unit value keeps the
    // 491.744 comparison exact in integers (x/1000 > 491.744 <=> x > 491744).
    auto emit_random = [&](uint32_t s, const char* type) {
        int64_t date = (day0 + pick(static_cast<uint64_t>(day_span))) * kMillisPerDay;
        std::string value;
        int64_t units = 0;
        bool is_awnd = false;
        if (std::string_view(type) == "TMAX") {
            units = pick(710) - 300; // -30.0 .. 41.0 C in tenths, below the planted max
            value = std::to_string(units);
        } else if (std::string_view(type) == "TMIN") {
            units = pick(700) - 400; // above the planted minimum
            value = std::to_string(units);
        } else if (std::string_view(type) == "PRCP") {
            units = pick(2000);
            value = std::to_string(units);
        } else if (std::string_view(type) == "SNOW") {
            units = pick(800);
            value = std::to_string(units);
        } else { // AWND with one fractional digit, 0 .. 519.9
            int64_t milli = pick(520000);
            milli -= milli % 100;
            units = milli;
            is_awnd = true;
            value = std::to_string(milli / 1000);
            int64_t frac = milli % 1000 / 100;
            if (frac != 0) {
                value.push_back('.');
                value.push_back(static_cast<char>('0' + frac));
            }
        }
        classify(stations[s].id, type, date, units, is_awnd);
        sensors.add(data_record(date, type, stations[s].id, value));
    };

    // One reading per station-day; the type cycles so every fifth reading of
    // a station is the same data type.
    for (uint32_t d = 0; d < spec.days; ++d)
        for (uint32_t s = 0; s < spec.stations; ++s) emit_random(s, kDataTypes[(d + s) % 5]);

    // Planted rows: query targets that must exist regardless of scale.
    auto plant = [&](uint32_t s, const char* type, int32_t year, uint32_t month, uint32_t day,
                     int64_t units) {
        if (!spec.plant_extrema || s >= spec.stations) return;
        int64_t date = millis_from_civil(year, month, day);
        classify(stations[s].id, type, date, units, false);
        sensors.add(data_record(date, type, stations[s].id, std::to_string(units)));
    };
    for (int32_t year = 2003; year <= 2006; ++year) plant(0, "TMAX", year, 12, 25, 250 + year % 7);
    plant(0, "PRCP", 2004, 12, 25, 30);
    plant(2, "TMAX", 1976, 7, 4, 289);
    plant(2, "TMIN", 1976, 7, 4, 147);
    plant(2, "PRCP", 1976, 7, 4, 0);
    plant(1, "TMAX", 2000, 6, 15, 412);  // the highest temperature anywhere
    plant(1, "TMIN", 2001, 1, 16, -405); // the lowest 2001 temperature
    plant(1, "PRCP", 1999, 3, 7, 118);
    plant(1, "PRCP", 1999, 9, 30, 52);
    sensors.done();

    // Station metadata (the paper's sample declares ISO-8859-1; exercise that
    // decoder path here).
    FileSink station_sink(spec.out / "stations", "stationCollection",
                          "<?xml version=\"1.0\" encoding=\"ISO-8859-1\"?>",
                          std::max<uint32_t>(1, spec.records_per_file / 10));
    for (const StationInfo& info : stations) {
        std::string record = "<station><id>" + info.id + "</id><displayName>" + info.display_name +
                             "</displayName><latitude>" + info.latitude + "</latitude><longitude>" +
                             info.longitude + "</longitude>";
        record += "<locationLabels><type>CNTRY</type><id>FIPS:US</id><displayName>United "
                  "States</displayName></locationLabels>";
        record += "<locationLabels><type>ST</type><id>" + info.state_id + "</id><displayName>" +
                  info.state_name + "</displayName></locationLabels>";
        record += "</station>";
        station_sink.add(record);
    }
    station_sink.done();

    // Daily extremes for the two-key join: one TMIN and one TMAX per station
    // and day, same station/date on both sides.
    FileSink min_sink(spec.out / "sensors_min", "dataCollection",
                      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>", spec.records_per_file);
    FileSink max_sink(spec.out / "sensors_max", "dataCollection",
                      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>", spec.records_per_file);
    int64_t diff_sum_tenths = 0;
    int64_t diff_count = 0;
    for (uint32_t s = 0; s < spec.stations; ++s) {
        for (uint32_t d = 0; d < spec.extreme_days; ++d) {
            int64_t date = millis_from_civil(2000, 1, 1) + d * kMillisPerDay;
            int64_t low = pick(500) - 300;
            int64_t high = low + static_cast<int64_t>(pick(300));
            min_sink.add(data_record(date, "TMIN", stations[s].id, std::to_string(low)));
            max_sink.add(data_record(date, "TMAX", stations[s].id, std::to_string(high)));
            diff_sum_tenths += high - low;
            ++diff_count;
        }
    }
    min_sink.done();
    max_sink.done();

    Manifest manifest;
    manifest.values["seed"] = std::to_string(spec.seed);
    manifest.values["stations"] = std::to_string(spec.stations);
    manifest.values["days"] = std::to_string(spec.days);
    manifest.values["partitions"] = std::to_string(spec.partitions);
    manifest.values["sensor_records"] = std::to_string(record_count);
    manifest.values["sensor_files"] = std::to_string(sensors.files_written());
    manifest.values["q1_count"] = std::to_string(q1_count);
    manifest.values["q2_count"] = std::to_string(q2_count);
    manifest.values["q3_expected"] =
        q3_max_tenths == INT64_MIN ? "" : tenths_to_string(q3_max_tenths);
    manifest.values["q4_count"] = std::to_string(q4_count);
    manifest.values["q5_expected"] =
        q5_min_tenths == INT64_MAX ? "" : tenths_to_string(q5_min_tenths);
    if (spec.stations > 1)
        manifest.values["prcp_1999_sum_" + stations[1].id] = std::to_string(prcp_1999_station1);
    manifest.values["extreme_pairs"] = std::to_string(diff_count);
    manifest.values["extreme_diff_sum_tenths"] = std::to_string(diff_sum_tenths);
    manifest.save(spec.out / "manifest.txt");
    return manifest;
}

} // namespace xq
