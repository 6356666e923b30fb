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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <random>

#include "xq/engine.hpp"
#include "xq/frontend.hpp"
#include "xq/optimizer.hpp"
#include "xq/plan_interp.hpp"
#include "xq/error.hpp"
#include "xq/datagen.hpp"
#include "xq/expr_eval.hpp"
#include "xq/oracle.hpp"
#include "xq/runtime.hpp"

using namespace xq;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / ("xq-runtime-" + name);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
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

RunConfig config_for(const TempDir& dir, const std::string& query, uint32_t partitions = 2) {
    RunConfig config;
    config.data_root = dir.path;
    config.partitions = partitions;
    config.query_text = query;
    return config;
}

} // namespace

TEST_CASE("tuple codec round-trips atomics and node subtrees") {
    DocumentPtr doc = parse_document_bytes(
        "<book id=\"1\"><title>Everyday &amp; More</title><year>2005</year></book>", 2, 9, "b.xml");
    Tuple tuple;
    tuple.fields.push_back(XDMSequence{XDMItem(NodeHandle{doc, 1})}); // the book element
    tuple.fields.push_back(XDMSequence{
        XDMItem(AtomicValue::integer(42)),
        XDMItem(AtomicValue::decimal(*Decimal::parse("-41.25"))),
        XDMItem(AtomicValue::double_value(2.5)),
        XDMItem(AtomicValue::boolean(true)),
        XDMItem(AtomicValue::string_value("s")),
        XDMItem(AtomicValue::untyped("u")),
        XDMItem(AtomicValue::date_time(1234567890123ll)),
    });
    tuple.fields.push_back(XDMSequence{});

    std::vector<uint8_t> bytes;
    encode_tuple(tuple, &bytes);
    Tuple back = decode_tuple(bytes.data(), bytes.size());
    REQUIRE(back.fields.size() == 3);
    REQUIRE(back.fields[0].size() == 1);
    const NodeHandle& node = back.fields[0][0].node();
    CHECK(node.name() == "book");
    CHECK(node.id() == NodeId{2, 9, 1});
    CHECK(node.string_value() == "Everyday & More2005");
    CHECK(serialize_node(node) ==
          "<book id=\"1\"><title>Everyday &amp; More</title><year>2005</year></book>");
    REQUIRE(back.fields[1].size() == 7);
    CHECK(back.fields[1][0].atomic().as_int() == 42);
    CHECK(back.fields[1][1].atomic().as_decimal().to_string() == "-41.25");
    CHECK(back.fields[1][2].atomic().as_double_payload() == 2.5);
    CHECK(back.fields[1][6].atomic().as_millis() == 1234567890123ll);
    CHECK(back.fields[2].empty());
}

TEST_CASE("bookstore query executes in document order") {
    TempDir dir("books");
    write_file(dir.path / "book.xml",
               "<bookstore><book id=\"1\"><title>One</title></book>"
               "<book id=\"2\"><title>Two</title></book></bookstore>");
    RunResult result = run_query(config_for(dir, "doc(\"book.xml\")/bookstore/book", 1));
    REQUIRE(result.result.size() == 2);
    CHECK(result.serialized ==
          "<book id=\"1\"><title>One</title></book>\n<book id=\"2\"><title>Two</title></book>\n");
}

TEST_CASE("query over an empty collection returns an empty result") {
    TempDir dir("empty");
    std::filesystem::create_directories(dir.path / "c");
    RunResult result = run_query(config_for(dir, "collection(\"/c\")/a/b", 4));
    CHECK(result.result.empty());
    CHECK(result.serialized.empty());
}

TEST_CASE("execution is deterministic across runs") {
    TempDir dir("det");
    std::mt19937 rng(3);
    for (int f = 0; f < 8; ++f) {
        std::string xml = "<dataCollection>";
        for (int r = 0; r < 50; ++r)
            xml += "<data><k>" + std::to_string(rng() % 10) + "</k><v>" +
                   std::to_string(rng() % 100) + "</v></data>";
        xml += "</dataCollection>";
        write_file(dir.path / "c" / ("f" + std::to_string(f) + ".xml"), xml);
    }
    std::string query = "for $r in collection(\"/c\")/dataCollection/data "
                        "where $r/k eq \"3\" return $r";
    std::string first = run_query(config_for(dir, query, 4)).serialized;
    for (int i = 0; i < 3; ++i) CHECK(run_query(config_for(dir, query, 4)).serialized == first);
}

TEST_CASE("hybrid hash join on a tiny instance") {
    TempDir dir("tinyjoin");
    write_file(dir.path / "build" / "b.xml",
               "<c><r><k>1</k><n>a</n></r><r><k>2</k><n>b</n></r></c>");
    write_file(dir.path / "probe" / "p.xml",
               "<c><r><k>2</k><m>x</m></r><r><k>2</k><m>y</m></r></c>");
    std::string query = "for $p in collection(\"/probe\")/c/r "
                        "for $b in collection(\"/build\")/c/r "
                        "where $b/k eq $p/k return ($b/n, $p/m)";
    RunResult result = run_query(config_for(dir, query, 2));
    // Two probe matches for k=2, two items each.
    CHECK(result.result.size() == 4);
    CHECK(sorted_lines(result.serialized) ==
          sorted_lines("<n>b</n>\n<m>x</m>\n<n>b</n>\n<m>y</m>\n"));
}

TEST_CASE("spill path produces the same multiset as in-memory execution") {
    TempDir dir("spill");
    std::mt19937 rng(17);
    for (int side = 0; side < 2; ++side) {
        std::string xml = "<c>";
        for (int r = 0; r < 400; ++r) {
            xml += "<r><k>" + std::to_string(rng() % 60) + "</k><v>" + std::to_string(rng() % 1000) +
                   "</v></r>";
        }
        xml += "</c>";
        write_file(dir.path / (side ? "right" : "left") / "data.xml", xml);
    }
    std::string query = "for $l in collection(\"/left\")/c/r "
                        "for $r in collection(\"/right\")/c/r "
                        "where $l/k eq $r/k return ($l/v, $r/v)";

    RunConfig big = config_for(dir, query, 2);
    RunResult in_memory = run_query(big);
    CHECK(in_memory.stats.join_spill_partitions == 0);

    RunConfig tiny = config_for(dir, query, 2);
    tiny.join_memory_budget = 2048; // force the spill path
    tiny.scratch = dir.path / "scratch";
    RunResult spilled = run_query(tiny);
    CHECK(spilled.stats.join_spill_partitions > 0);
    CHECK(sorted_lines(spilled.serialized) == sorted_lines(in_memory.serialized));
    CHECK_FALSE(in_memory.serialized.empty());
}

TEST_CASE("hash join equals nested loop join on 200 randomized instances") {
    // The logical-plan interpreter executes JOIN as a nested loop, so engine
    // (hybrid hash) vs interpreter compares the two join algorithms directly.
    std::mt19937 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        TempDir dir("rand" + std::to_string(trial));
        for (int side = 0; side < 2; ++side) {
            std::string xml = "<c>";
            int records = 5 + rng() % 40;
            for (int r = 0; r < records; ++r)
                xml += "<r><k>" + std::to_string(rng() % 8) + "</k><v>" + std::to_string(rng() % 50) +
                       "</v></r>";
            xml += "</c>";
            write_file(dir.path / (side ? "right" : "left") / "d.xml", xml);
        }
        std::string equi = "for $l in collection(\"/left\")/c/r "
                           "for $r in collection(\"/right\")/c/r "
                           "where $l/k eq $r/k return ($l/v, $r/v)";
        RunConfig config = config_for(dir, equi, 2);
        RunResult parallel = run_query(config);
        CHECK(parallel.physical_plan_text.find("HYBRID-HASH-JOIN") != std::string::npos);

        // Nested-loop reference via the plan interpreter.
        LogicalPlan plan = run_optimizer(translate(normalize(parse_query(equi)))).plan;
        EvalContext ctx{PartitionSpec{2, dir.path}, std::make_shared<DocumentCache>()};
        std::string nested_loop = serialize_result(interpret_plan(plan, ctx));
        CHECK(sorted_lines(parallel.serialized) == sorted_lines(nested_loop));

        if (trial % 10 == 0) {
            // Occasionally also pin both against the naive interpreter and
            // run the non-equi nested-loop selection end to end.
            config.engine = EngineKind::Naive;
            RunResult naive = run_query(config);
            CHECK(sorted_lines(parallel.serialized) == sorted_lines(naive.serialized));

            std::string nonequi = "for $l in collection(\"/left\")/c/r "
                                  "for $r in collection(\"/right\")/c/r "
                                  "where $l/k lt $r/k return ($l/v, $r/v)";
            RunConfig nl = config_for(dir, nonequi, 2);
            RunResult nl_parallel = run_query(nl);
            CHECK(nl_parallel.physical_plan_text.find("NESTED-LOOP-JOIN") != std::string::npos);
            nl.engine = EngineKind::Naive;
            RunResult nl_naive = run_query(nl);
            CHECK(sorted_lines(nl_parallel.serialized) == sorted_lines(nl_naive.serialized));
        }
    }
}

TEST_CASE("two-step aggregation combines partials") {
    // counts [3, 5, 0, 2] -> 10
    std::vector<std::vector<XDMSequence>> counts = {
        {XDMSequence{XDMItem(AtomicValue::integer(3))}},
        {XDMSequence{XDMItem(AtomicValue::integer(5))}},
        {XDMSequence{XDMItem(AtomicValue::integer(0))}},
        {XDMSequence{XDMItem(AtomicValue::integer(2))}},
    };
    XDMSequence total = AggAccumulator::combine_partials(AggFn::Sum, counts);
    REQUIRE(total.size() == 1);
    CHECK(total[0].atomic().as_int() == 10);

    // avg partials [(sum 10, count 2), (sum -, count 0)] -> 5
    std::vector<std::vector<XDMSequence>> avg = {
        {XDMSequence{XDMItem(AtomicValue::integer(10))}, XDMSequence{XDMItem(AtomicValue::integer(2))}},
        {XDMSequence{}, XDMSequence{XDMItem(AtomicValue::integer(0))}},
    };
    XDMSequence mean = AggAccumulator::combine_partials(AggFn::Avg, avg);
    REQUIRE(mean.size() == 1);
    CHECK(mean[0].atomic().as_decimal().to_string() == "5");

    // min skips empty partitions.
    std::vector<std::vector<XDMSequence>> mins = {
        {XDMSequence{}},
        {XDMSequence{XDMItem(AtomicValue::integer(-4))}},
        {XDMSequence{XDMItem(AtomicValue::integer(7))}},
    };
    XDMSequence low = AggAccumulator::combine_partials(AggFn::Min, mins);
    REQUIRE(low.size() == 1);
    CHECK(low[0].atomic().as_int() == -4);
    CHECK(AggAccumulator::combine_partials(AggFn::Min, {{XDMSequence{}}}).empty());
}

TEST_CASE("partitioned aggregates match the unpartitioned result") {
    TempDir dir("aggeq");
    std::mt19937 rng(7);
    for (int f = 0; f < 6; ++f) {
        std::string xml = "<c>";
        for (int r = 0; r < 30 + static_cast<int>(rng() % 40); ++r)
            xml += "<r><v>" + std::to_string(static_cast<int>(rng() % 2000) - 1000) + "</v></r>";
        xml += "</c>";
        write_file(dir.path / "vals" / ("f" + std::to_string(f) + ".xml"), xml);
    }
    for (const char* agg : {"count", "sum", "min", "max", "avg"}) {
        std::string query = std::string(agg) + "( for $r in collection(\"/vals\")/c/r return $r/v )";
        std::string single = run_query(config_for(dir, query, 1)).serialized;
        for (uint32_t partitions : {2u, 4u, 7u}) {
            INFO(agg << " at " << partitions << " partitions");
            CHECK(run_query(config_for(dir, query, partitions)).serialized == single);
        }
    }
}

TEST_CASE("aggregate partial tuples keep the merge exchange narrow") {
    TempDir dir("aggbytes");
    std::string xml = "<c>";
    for (int r = 0; r < 2000; ++r) xml += "<r><v>5</v></r>";
    xml += "</c>";
    for (int f = 0; f < 4; ++f) write_file(dir.path / "vals" / ("f" + std::to_string(f) + ".xml"), xml);
    RunConfig config =
        config_for(dir, "sum( for $r in collection(\"/vals\")/c/r return $r/v )", 4);
    RunResult result = run_query(config);
    CHECK(result.serialized == "40000\n");
    // One partial tuple per partition crosses the merge exchange.
    CHECK(result.stats.merge_exchange_bytes <= 4 * 512);
}

TEST_CASE("pipelines stay within one frame of buffering") {
    TempDir dir("pipe");
    std::string xml = "<c>";
    for (int r = 0; r < 3000; ++r) xml += "<r><v>" + std::to_string(r % 97) + "</v></r>";
    xml += "</c>";
    write_file(dir.path / "vals" / "f.xml", xml);
    RunConfig config = config_for(dir, "for $r in collection(\"/vals\")/c/r "
                                       "where $r/v eq \"13\" return $r", 1);
    config.frame_size = 4096;
    RunResult result = run_query(config);
    CHECK(result.result.size() == 31);
    CHECK(result.stats.max_buffered_tuples > 0);
    // Far fewer tuples buffered anywhere than the 3000-item stream.
    CHECK(result.stats.max_buffered_tuples < 300);
}

TEST_CASE("a tuple larger than the frame capacity is a hard error") {
    TempDir dir("overflow");
    std::string xml = "<c><r><v>";
    xml.append(20000, 'x');
    xml += "</v></r></c>";
    write_file(dir.path / "vals" / "f.xml", xml);
    RunConfig config = config_for(dir, "for $r in collection(\"/vals\")/c/r return $r", 1);
    config.frame_size = 8192;
    try {
        run_query(config);
        FAIL("expected a frame overflow");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::FrameOverflow);
    }
}

TEST_CASE("pushdown bounds the resident tree; disabling it overflows the frame") {
    TempDir dir("pushdown");
    // Whole document far larger than the frame budget; each record small.
    std::string xml = "<dataCollection>";
    for (int r = 0; r < 800; ++r)
        xml += "<data><station>S" + std::to_string(r % 10) + "</station><value>" +
               std::to_string(r) + "</value></data>";
    xml += "</dataCollection>";
    write_file(dir.path / "sensors" / "big.xml", xml);

    std::string query = "for $r in collection(\"/sensors\")/dataCollection/data "
                        "where $r/station eq \"S3\" return $r";
    RunConfig config = config_for(dir, query, 1);
    config.frame_size = 8192;
    RunResult ok = run_query(config);
    CHECK(ok.result.size() == 80);

    RunConfig disabled = config;
    disabled.pushdown = false;
    try {
        run_query(disabled);
        FAIL("expected a frame overflow without pushdown");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::FrameOverflow);
    }
}

TEST_CASE("serialized results round-trip through the parser") {
    TempDir dir("roundtrip");
    write_file(dir.path / "c" / "f.xml",
               "<c><r a=\"1\"><t>x &amp; y</t><e/></r><r a=\"2\"><t>z</t></r></c>");
    RunResult result = run_query(config_for(dir, "collection(\"/c\")/c/r", 1));
    REQUIRE(result.result.size() == 2);
    for (const XDMItem& item : result.result) {
        std::string xml = serialize_item(item);
        DocumentPtr reparsed = parse_document_bytes(xml, 0, 0, "rt");
        CHECK(serialize_node(NodeHandle{reparsed, 0}.children()[0]) == xml);
        CHECK(NodeHandle{reparsed, 0}.children()[0].string_value() ==
              item.node().string_value());
    }
}

TEST_CASE("naive and parallel engines agree on the query corpus") {
    TempDir dir("agree");
    GenSpec spec;
    spec.seed = 13;
    spec.stations = 4;
    spec.days = 60;
    spec.records_per_file = 20;
    spec.extreme_days = 10;
    spec.out = dir.path;
    generate(spec);
    for (const char* name : {"q1.xq", "q2.xq", "q3.xq", "q4.xq", "q5.xq", "q6.xq", "q7.xq"}) {
        std::ifstream in(std::string(XQ_QUERY_DIR) + "/" + name);
        std::string query((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        RunConfig config = config_for(dir, query, 3);
        RunResult parallel = run_query(config);
        config.engine = EngineKind::Naive;
        RunResult naive = run_query(config);
        INFO(name);
        CHECK(sorted_lines(parallel.serialized) == sorted_lines(naive.serialized));
    }
}
