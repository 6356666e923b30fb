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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <thread>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "xq/bench.hpp"
#include "xq/datagen.hpp"
#include "xq/engine.hpp"
#include "xq/frontend.hpp"
#include "xq/optimizer.hpp"
#include "xq/oracle.hpp"
#include "xq/plan_interp.hpp"

using namespace xq;

namespace {

std::filesystem::path scratch_root() {
    static std::filesystem::path root = [] {
        std::filesystem::path p = std::filesystem::temp_directory_path() / "xq-acceptance";
        std::filesystem::create_directories(p);
        return p;
    }();
    return root;
}

void report(int criterion, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("ACCEPTANCE %d %s: %s%s%s\n", criterion, name.c_str(), ok ? "PASS" : "FAIL",
                detail.empty() ? "" : " ", detail.c_str());
    std::fflush(stdout);
}

std::string load_query(const std::string& name) {
    std::ifstream in(std::string(XQ_QUERY_DIR) + "/" + name);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string load_fixture(const std::string& name) {
    std::ifstream in(std::string(XQ_FIXTURE_DIR) + "/" + name);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string sorted_lines(const std::string& text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& line : lines) out += line + "\n";
    return out;
}

// The seeded reference corpus shared by criteria 2, 3 and 6 (~96MB).
const std::filesystem::path& reference_corpus(Manifest* manifest_out = nullptr) {
    static std::filesystem::path path;
    static Manifest manifest;
    if (path.empty()) {
        path = scratch_root() / "reference";
        std::filesystem::remove_all(path);
        GenSpec spec;
        spec.seed = 42;
        spec.stations = 8;
        spec.days = 96000;
        spec.extreme_days = 40;
        spec.records_per_file = 1000;
        spec.out = path;
        manifest = generate(spec);
    }
    if (manifest_out) *manifest_out = manifest;
    return path;
}

const std::vector<std::pair<std::string, std::string>>& query_corpus() {
    static std::vector<std::pair<std::string, std::string>> queries = [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const char* name : {"q1", "q2", "q3", "q4", "q5", "q6", "q7"})
            out.emplace_back(name, load_query(std::string(name) + ".xq"));
        return out;
    }();
    return queries;
}

bool is_join_query(const std::string& name) {
    return name == "q4" || name == "q5" || name == "q6" || name == "q7";
}

} // namespace

// ---------------------------------------------------------------------------
// 1. Plan snapshot fidelity
// ---------------------------------------------------------------------------

TEST_CASE("criterion 1: plan snapshot fidelity") {
    bool ok = true;
    auto check = [&](const LogicalPlan& plan, const std::string& fixture) {
        LogicalPlan expected = parse_plan(load_fixture(fixture));
        bool equal = plan_alpha_equal(plan, expected);
        INFO("fixture " << fixture << "\n" << print_plan(plan));
        CHECK(equal);
        ok = ok && equal;
    };
    auto trace_plan = [](const OptimizeResult& result, const std::string& rule,
                         int application) -> const LogicalPlan* {
        const LogicalPlan* found = nullptr;
        for (const TracePoint& point : result.trace) {
            if (point.rule != rule) continue;
            if (application >= 0 && point.application == application) return &point.plan;
            found = &point.plan;
        }
        return application >= 0 ? nullptr : found;
    };
    OptimizerOptions options;
    options.trace = true;

    // doc() variant: every intermediate of the path expression rules.
    LogicalPlan bookstore = translate(normalize(parse_query("doc(\"book.xml\")/bookstore/book")));
    check(bookstore, "bookstore_initial.txt");
    OptimizeResult doc_result = run_optimizer(bookstore, options);
    struct Expect {
        const char* rule;
        int application;
        const char* fixture;
    };
    for (const Expect& expect :
         {Expect{"remove-sort", -1, "bookstore_after_sort_removal.txt"},
          Expect{"remove-subplan", 1, "bookstore_after_subplan_1.txt"},
          Expect{"remove-subplan", 2, "bookstore_after_subplan_2.txt"},
          Expect{"scalar-to-unnest", -1, "bookstore_after_unnest.txt"},
          Expect{"combine-unnest", -1, "bookstore_after_combine.txt"}}) {
        const LogicalPlan* plan = trace_plan(doc_result, expect.rule, expect.application);
        REQUIRE(plan);
        check(*plan, expect.fixture);
    }

    // collection() variant: both datascan listings.
    LogicalPlan coll = translate(normalize(parse_query("collection(\"/books\")/bookstore/book")));
    OptimizeResult coll_result = run_optimizer(coll, options);
    {
        const LogicalPlan* plan = trace_plan(coll_result, "introduce-datascan", -1);
        REQUIRE(plan);
        check(*plan, "collection_after_datascan.txt");
        plan = trace_plan(coll_result, "push-child-into-datascan", -1);
        REQUIRE(plan);
        check(*plan, "collection_after_pushdown.txt");
    }

    // Aggregate listing.
    LogicalPlan count = translate(
        normalize(parse_query("count( for $x in collection(\"/books\")/bookstore/book return $x )")));
    OptimizeResult count_result = run_optimizer(count, options);
    {
        const LogicalPlan* plan = trace_plan(count_result, "scalar-to-aggregate", -1);
        REQUIRE(plan);
        check(*plan, "count_after_aggregate_rule.txt");
    }

    // Final join plan.
    LogicalPlan join = translate(normalize(parse_query(
        "for $r in collection(\"/ann-books\")/bookstore/book "
        "for $s in collection(\"/joe-books\")/bookstore/book "
        "where $r/title eq $s/title return $r")));
    OptimizeResult join_result = run_optimizer(join, options);
    {
        const LogicalPlan* plan = trace_plan(join_result, "introduce-join", -1);
        REQUIRE(plan);
        check(*plan, "join_final.txt");
    }

    report(1, "plan-snapshot-fidelity", ok);
}

// ---------------------------------------------------------------------------
// 2. Oracle equivalence on the reference corpus at 1, 2 and 4 partitions
// ---------------------------------------------------------------------------

TEST_CASE("criterion 2: oracle equivalence") {
    auto started = std::chrono::steady_clock::now();
    const std::filesystem::path& corpus = reference_corpus();
    bool ok = true;

    auto docs = std::make_shared<DocumentCache>();
    for (const auto& [name, text] : query_corpus()) {
        Oracle oracle(corpus, docs);
        std::string expected = serialize_result(oracle.eval_query(text));
        std::string expected_multiset = is_join_query(name) ? sorted_lines(expected) : expected;
        for (uint32_t partitions : {1u, 2u, 4u}) {
            RunConfig config;
            config.query_text = text;
            config.data_root = corpus;
            config.partitions = partitions;
            RunResult run = run_query(config);
            bool equal;
            if (is_join_query(name)) {
                equal = sorted_lines(run.serialized) == expected_multiset;
            } else {
                equal = run.serialized == expected;
            }
            if (!equal && name == "q7") {
                // avg tolerance: relative 1e-9
                double got = std::stod(run.serialized);
                double want = std::stod(expected);
                equal = std::abs(got - want) <= 1e-9 * std::max(std::abs(want), 1.0);
            }
            INFO(name << " at " << partitions << " partitions");
            CHECK(equal);
            ok = ok && equal;
        }
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    bool in_budget = elapsed < 300.0;
    CHECK(in_budget);
    char detail[64];
    std::snprintf(detail, sizeof(detail), "(%.1fs of 300s budget)", elapsed);
    report(2, "oracle-equivalence", ok && in_budget, detail);
}

// ---------------------------------------------------------------------------
// 3. Manifest ground truths for queries 2, 3, 4
// ---------------------------------------------------------------------------

TEST_CASE("criterion 3: manifest ground truth") {
    Manifest manifest;
    const std::filesystem::path& corpus = reference_corpus(&manifest);
    bool ok = true;

    RunConfig config;
    config.data_root = corpus;
    config.partitions = 2;

    config.query_text = load_query("q2.xq");
    int64_t q2 = static_cast<int64_t>(run_query(config).result.size());
    CHECK(q2 == manifest.count("q2_count"));
    ok = ok && q2 == manifest.count("q2_count");

    config.query_text = load_query("q3.xq");
    std::string q3 = run_query(config).serialized;
    CHECK(q3 == manifest.at("q3_expected") + "\n");
    ok = ok && q3 == manifest.at("q3_expected") + "\n";

    config.query_text = load_query("q4.xq");
    int64_t q4 = static_cast<int64_t>(run_query(config).result.size());
    CHECK(q4 == manifest.count("q4_count"));
    ok = ok && q4 == manifest.count("q4_count");

    report(3, "manifest-ground-truth", ok);
}

// ---------------------------------------------------------------------------
// 4. Speedup at desk scale on a >=500MB corpus
// ---------------------------------------------------------------------------

namespace {

// How much真 parallel CPU this machine actually offers: two busy threads
// versus one. A 4-core desktop measures close to 2.0 here; an oversubscribed
// container measures much less, which bounds any achievable speedup.
double measured_parallel_capacity() {
    auto burn = [] {
        volatile uint64_t x = 1;
        for (uint64_t i = 0; i < 400000000ull; ++i) x = x * 2862933555777941757ull + 3037000493ull;
        (void)x;
    };
    auto t0 = std::chrono::steady_clock::now();
    burn();
    double one = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    t0 = std::chrono::steady_clock::now();
    std::thread a(burn), b(burn);
    a.join();
    b.join();
    double two = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return 2.0 * one / two;
}

} // namespace

TEST_CASE("criterion 4: speedup") {
    std::filesystem::path corpus = scratch_root() / "speedup";
    std::filesystem::remove_all(corpus);
    GenSpec spec;
    spec.seed = 7;
    spec.stations = 120;
    spec.days = 34000;
    spec.records_per_file = 4000;
    spec.extreme_days = 10;
    spec.out = corpus;
    generate(spec);
    uint64_t bytes = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(corpus))
        if (entry.is_regular_file()) bytes += entry.file_size();
    INFO("corpus bytes: " << bytes);
    REQUIRE(bytes >= 500ull << 20);

    double capacity = measured_parallel_capacity();
    std::printf("measured parallel capacity of this machine: %.2fx (4-core desktops measure ~2.0 "
                "for two threads)\n",
                capacity);

    BenchSpec bench;
    for (const char* name : {"q1", "q2", "q3"})
        bench.queries.push_back(BenchQuery{name, load_query(std::string(name) + ".xq")});
    bench.partition_counts = {1, 4, 8};
    bench.repetitions = 3;
    bench.base.data_root = corpus;
    std::vector<BenchRow> rows = run_bench(bench);
    std::printf("%s", format_report(rows).c_str());

    bool ok = true;
    for (const char* name : {"q1", "q2", "q3"}) {
        double mean1 = 0, mean4 = 0, mean8 = 0;
        for (const BenchRow& row : rows) {
            if (row.query != name) continue;
            REQUIRE(row.error.empty());
            if (row.partitions == 1) mean1 = row.mean_ms;
            if (row.partitions == 4) mean4 = row.mean_ms;
            if (row.partitions == 8) mean8 = row.mean_ms;
        }
        bool four_vs_one = mean4 <= 0.6 * mean1;
        bool eight_vs_four = mean8 <= 1.25 * mean4;
        std::printf("  %s: 4p/1p = %.3f (<= 0.6), 8p/4p = %.3f (<= 1.25)\n", name, mean4 / mean1,
                    mean8 / mean4);
        CHECK(four_vs_one);
        CHECK(eight_vs_four);
        ok = ok && four_vs_one && eight_vs_four;
    }
    std::filesystem::remove_all(corpus); // reclaim the half gigabyte
    report(4, "speedup", ok);
}

// ---------------------------------------------------------------------------
// 5. Two-step aggregation equals single-partition on randomized datasets
// ---------------------------------------------------------------------------

TEST_CASE("criterion 5: two-step aggregation") {
    bool ok = true;
    std::mt19937 rng(95);
    for (int dataset = 0; dataset < 50; ++dataset) {
        std::filesystem::path dir = scratch_root() / ("agg-" + std::to_string(dataset));
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir / "vals");
        int files = 2 + static_cast<int>(rng() % 4);
        for (int f = 0; f < files; ++f) {
            std::ofstream out(dir / "vals" / ("f" + std::to_string(f) + ".xml"), std::ios::binary);
            out << "<c>";
            int records = static_cast<int>(rng() % 120); // may be empty
            for (int r = 0; r < records; ++r) {
                int64_t value = static_cast<int64_t>(rng() % 4000) - 2000;
                out << "<r><v>" << value / 10 << "." << std::abs(value % 10) << "</v></r>";
            }
            out << "</c>";
        }
        for (const char* agg : {"count", "sum", "min", "max", "avg"}) {
            std::string query =
                std::string(agg) + "( for $r in collection(\"/vals\")/c/r return $r/v )";
            RunConfig config;
            config.data_root = dir;
            config.query_text = query;
            config.partitions = 1;
            std::string single = run_query(config).serialized;
            config.partitions = 4;
            RunResult two_step = run_query(config);
            bool equal = two_step.serialized == single;
            // Partial tuples only: bytes across the merge exchange stay O(partitions).
            bool narrow = two_step.stats.merge_exchange_bytes <= 4 * 512;
            INFO("dataset " << dataset << " " << agg << ": " << single << " vs "
                            << two_step.serialized);
            CHECK(equal);
            CHECK(narrow);
            ok = ok && equal && narrow;
        }
        std::filesystem::remove_all(dir);
    }
    report(5, "two-step-aggregation", ok);
}

// ---------------------------------------------------------------------------
// 6. Join algorithm selection, spill path included
// ---------------------------------------------------------------------------

TEST_CASE("criterion 6: join algorithm selection") {
    bool ok = true;
    const std::filesystem::path& corpus = reference_corpus();

    // Plan assertions: the station join and the two-key extreme join pick the
    // hybrid hash join.
    for (const char* name : {"q6", "q7"}) {
        RunConfig config;
        config.data_root = corpus;
        config.partitions = 4;
        config.query_text = load_query(std::string(name) + ".xq");
        LogicalPlan plan = run_optimizer(translate(normalize(parse_query(config.query_text)))).plan;
        PhysicalConfig pc;
        pc.partitions = 4;
        pc.data_root = corpus;
        std::string physical = print_physical(select_physical(plan, pc));
        bool hash = physical.find("HYBRID-HASH-JOIN") != std::string::npos;
        INFO(name << "\n" << physical);
        CHECK(hash);
        ok = ok && hash;
        if (std::string(name) == "q7") {
            // Both keys (station and date) recognized for hashing.
            size_t keys_at = physical.find("keys=");
            REQUIRE(keys_at != std::string::npos);
            std::string keys = physical.substr(keys_at, physical.find(' ', keys_at) - keys_at);
            bool two_keys = keys.find(',') != std::string::npos;
            CHECK(two_keys);
            ok = ok && two_keys;
        }
    }

    // A non-equi predicate selects the nested loop join.
    {
        std::string nonequi = "for $r_min in collection(\"/sensors_min\")/dataCollection/data "
                              "for $r_max in collection(\"/sensors_max\")/dataCollection/data "
                              "where $r_min/value lt $r_max/value return $r_min/value";
        LogicalPlan plan = run_optimizer(translate(normalize(parse_query(nonequi)))).plan;
        PhysicalConfig pc;
        pc.partitions = 4;
        pc.data_root = corpus;
        std::string physical = print_physical(select_physical(plan, pc));
        bool nested = physical.find("NESTED-LOOP-JOIN") != std::string::npos;
        CHECK(nested);
        ok = ok && nested;
    }

    // Execution equality on a corpus whose per-partition build side exceeds
    // a 1MB budget. The spilled run must reproduce the in-memory multiset
    // (which criterion 2 pins against the oracle at reference scale).
    std::filesystem::path join_dir = scratch_root() / "join";
    std::filesystem::remove_all(join_dir);
    GenSpec spec;
    spec.seed = 17;
    spec.stations = 20;
    spec.days = 50;
    spec.extreme_days = 1200;
    spec.records_per_file = 500;
    spec.out = join_dir;
    generate(spec);

    {
        RunConfig config;
        config.data_root = join_dir;
        config.partitions = 2;
        config.query_text = load_query("q7.xq");
        config.scratch = join_dir / "scratch";
        RunResult in_memory = run_query(config);
        bool no_spill = in_memory.stats.join_spill_partitions == 0;
        config.join_memory_budget = 1 << 20;
        RunResult spilled = run_query(config);
        bool spill_hit = spilled.stats.join_spill_partitions > 0;
        CHECK(no_spill);
        CHECK(spill_hit);
        bool equal = sorted_lines(spilled.serialized) == sorted_lines(in_memory.serialized) &&
                     !in_memory.serialized.empty();
        CHECK(equal);
        ok = ok && no_spill && spill_hit && equal;
    }
    {
        std::string nonequi = "for $s in collection(\"/stations\")/stationCollection/station "
                              "for $r in collection(\"/sensors\")/dataCollection/data "
                              "where $s/id lt $r/station return ($s/id, $r/station)";
        RunConfig config;
        config.data_root = join_dir;
        config.partitions = 2;
        config.query_text = nonequi;
        RunResult parallel = run_query(config);
        bool used_nested =
            parallel.physical_plan_text.find("NESTED-LOOP-JOIN") != std::string::npos;
        config.engine = EngineKind::Naive;
        RunResult naive = run_query(config);
        bool equal = sorted_lines(parallel.serialized) == sorted_lines(naive.serialized);
        CHECK(used_nested);
        CHECK(equal);
        ok = ok && used_nested && equal;
    }
    std::filesystem::remove_all(join_dir);
    report(6, "join-algorithm-selection", ok);
}

// ---------------------------------------------------------------------------
// 7. Rewrite soundness: every rule prefix preserves results
// ---------------------------------------------------------------------------

namespace {

// Random corpus-shaped queries: selections, aggregations and two-source
// equijoins over the generated weather schema.
std::string random_corpus_query(std::mt19937& rng) {
    auto pick_station = [&]() -> std::string {
        switch (rng() % 3) {
            case 0: return "GHCND:USW00012836";
            case 1: return "GHCND:USW00014771";
            default: return "GHCND:USW00024233";
        }
    };
    auto pick_type = [&]() -> std::string {
        static const char* types[] = {"TMAX", "TMIN", "PRCP", "AWND", "SNOW"};
        return types[rng() % 5];
    };
    auto predicate = [&](const std::string& var) -> std::string {
        switch (rng() % 5) {
            case 0: return var + "/dataType eq \"" + pick_type() + "\"";
            case 1: return var + "/station eq \"" + pick_station() + "\"";
            case 2:
                return "decimal(data(" + var + "/value)) gt " + std::to_string(rng() % 1500) + "." +
                       std::to_string(rng() % 10);
            case 3:
                return "year-from-dateTime(dateTime(data(" + var + "/date))) eq " +
                       std::to_string(1975 + rng() % 30);
            default:
                return "month-from-dateTime(dateTime(data(" + var + "/date))) eq " +
                       std::to_string(1 + rng() % 12);
        }
    };

    int shape = static_cast<int>(rng() % 6);
    if (shape == 0) { // plain selection
        std::string q = "for $r in collection(\"/sensors\")/dataCollection/data where " +
                        predicate("$r");
        if (rng() % 2) q += " and " + predicate("$r");
        return q + " return $r";
    }
    if (shape == 1) { // projection of a field
        return "for $r in collection(\"/sensors\")/dataCollection/data where " + predicate("$r") +
               " return $r/value";
    }
    if (shape == 2) { // aggregate
        static const char* aggs[] = {"count", "sum", "min", "max", "avg"};
        std::string agg = aggs[rng() % 5];
        std::string body = "for $r in collection(\"/sensors\")/dataCollection/data where " +
                           predicate("$r") + " return " +
                           (agg == std::string("count") ? "$r" : "$r/value");
        std::string q = agg + "( " + body + " )";
        if (rng() % 2) q += " div 10";
        return q;
    }
    if (shape == 3) { // station join
        std::string q = "for $s in collection(\"/stations\")/stationCollection/station "
                        "for $r in collection(\"/sensors\")/dataCollection/data "
                        "where $s/id eq $r/station";
        if (rng() % 2) q += " and " + predicate("$r");
        if (rng() % 2)
            q += " and (some $x in $s/locationLabels satisfies ($x/type eq \"ST\"))";
        return q + " return ($s/displayName, $r/value)";
    }
    if (shape == 4) { // two-key extreme join
        return "for $a in collection(\"/sensors_min\")/dataCollection/data "
               "for $b in collection(\"/sensors_max\")/dataCollection/data "
               "where $a/station eq $b/station and $a/date eq $b/date "
               "return $b/value - $a/value";
    }
    // let + selection
    return "for $r in collection(\"/sensors\")/dataCollection/data "
           "let $d := dateTime(data($r/date)) "
           "where " + predicate("$r") + " and year-from-dateTime($d) ge " +
           std::to_string(1975 + rng() % 25) + " return $r/date";
}

} // namespace

TEST_CASE("criterion 7: rewrite soundness over rule prefixes") {
    std::filesystem::path corpus = scratch_root() / "soundness";
    std::filesystem::remove_all(corpus);
    GenSpec spec;
    spec.seed = 3;
    spec.stations = 3;
    spec.days = 40;
    spec.extreme_days = 6;
    spec.records_per_file = 17;
    spec.out = corpus;
    generate(spec);

    auto docs = std::make_shared<DocumentCache>();
    EvalContext interp_ctx{PartitionSpec{2, corpus}, docs};
    Oracle oracle(corpus, docs);

    size_t rule_count = optimizer_rules().size();
    bool ok = true;
    std::mt19937 rng(2026);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::string query = random_corpus_query(rng);
        INFO("query: " << query);
        AstPtr core = normalize(parse_query(query));
        std::string expected = serialize_result(oracle.eval_core(core));
        std::string expected_sorted = sorted_lines(expected);
        LogicalPlan initial = translate(core);
        bool join_query = query.find("for $s") != std::string::npos ||
                          query.find("for $b") != std::string::npos;
        for (size_t prefix = 0; prefix <= rule_count; ++prefix) {
            OptimizerOptions options;
            options.rule_prefix = static_cast<int>(prefix);
            options.step_ceiling = 2000;
            OptimizeResult optimized = run_optimizer(initial, options);
            std::string got = serialize_result(interpret_plan(optimized.plan, interp_ctx));
            bool equal = join_query ? sorted_lines(got) == expected_sorted : got == expected;
            if (!equal) {
                INFO("prefix " << prefix << "\n" << print_plan(optimized.plan));
                CHECK(equal);
                ok = false;
                break;
            }
            ++checked;
        }
    }
    CHECK(checked > 0);
    std::filesystem::remove_all(corpus);
    char detail[64];
    std::snprintf(detail, sizeof(detail), "(%d prefix executions)", checked);
    report(7, "rewrite-soundness", ok, detail);
}

// ---------------------------------------------------------------------------
// 8. Memory-bound pushdown
// ---------------------------------------------------------------------------

TEST_CASE("criterion 8: memory-bound pushdown") {
    std::filesystem::path dir = scratch_root() / "pushdown";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir / "sensors");
    {
        std::ofstream out(dir / "sensors" / "big.xml", std::ios::binary);
        out << "<dataCollection>";
        for (int r = 0; r < 5000; ++r)
            out << "<data><station>S" << r % 7 << "</station><value>" << r << "</value></data>";
        out << "</dataCollection>";
    }
    RunConfig config;
    config.data_root = dir;
    config.partitions = 2;
    config.frame_size = 65536; // whole tree is ~50x this; one record is tiny
    config.query_text = "count( for $r in collection(\"/sensors\")/dataCollection/data "
                        "where $r/station eq \"S3\" return $r )";

    bool with_pushdown_ok = false;
    std::string count_result;
    try {
        count_result = run_query(config).serialized;
        with_pushdown_ok = count_result == "714\n";
    } catch (const Error&) {
    }
    CHECK(with_pushdown_ok);

    bool overflow_without = false;
    config.pushdown = false;
    try {
        run_query(config);
    } catch (const Error& e) {
        overflow_without = e.kind() == ErrorKind::FrameOverflow;
    }
    CHECK(overflow_without);

    std::filesystem::remove_all(dir);
    report(8, "memory-bound-pushdown", with_pushdown_ok && overflow_without);
}
