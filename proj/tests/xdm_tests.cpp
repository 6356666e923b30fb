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
#include <random>

#include "xq/datetime.hpp"
#include "xq/error.hpp"
#include "xq/xdm.hpp"
#include "xq/xml_ingest.hpp"

using namespace xq;

TEST_CASE("document order comparison") {
    CHECK(compare_document_order({0, 0, 1}, {0, 0, 5}) == Ordering::Less);
    CHECK(compare_document_order({0, 0, 3}, {0, 0, 3}) == Ordering::Equal);
    CHECK(compare_document_order({0, 1, 0}, {0, 0, 99}) == Ordering::Greater);
}

TEST_CASE("comparator agrees with sorted position over a two-document partition") {
    // Independent oracle: enumerate all nodes of two documents, sort, and
    // check the comparator against positions.
    std::vector<NodeId> ids;
    for (uint32_t doc = 0; doc < 2; ++doc)
        for (uint32_t pre = 0; pre < 20; ++pre) ids.push_back(NodeId{0, doc, pre});
    std::mt19937 rng(11);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<NodeId> sorted = ids;
    std::sort(sorted.begin(), sorted.end(), [](const NodeId& a, const NodeId& b) {
        if (a.doc_seq != b.doc_seq) return a.doc_seq < b.doc_seq;
        return a.pre_order < b.pre_order;
    });
    for (size_t i = 0; i < sorted.size(); ++i)
        for (size_t j = 0; j < sorted.size(); ++j) {
            Ordering expected = i < j ? Ordering::Less : i > j ? Ordering::Greater : Ordering::Equal;
            CHECK(compare_document_order(sorted[i], sorted[j]) == expected);
        }
}

TEST_CASE("document order is a strict total order on random triples") {
    std::mt19937 rng(5);
    auto random_id = [&] {
        return NodeId{static_cast<uint32_t>(rng() % 3), static_cast<uint32_t>(rng() % 3),
                      static_cast<uint32_t>(rng() % 10)};
    };
    for (int trial = 0; trial < 2000; ++trial) {
        NodeId a = random_id(), b = random_id(), c = random_id();
        Ordering ab = compare_document_order(a, b);
        Ordering ba = compare_document_order(b, a);
        // antisymmetry
        if (ab == Ordering::Less) CHECK(ba == Ordering::Greater);
        if (ab == Ordering::Equal) CHECK(ba == Ordering::Equal);
        // totality: equal iff identical
        CHECK((ab == Ordering::Equal) == (a == b));
        // transitivity
        if (ab != Ordering::Greater && compare_document_order(b, c) != Ordering::Greater)
            CHECK(compare_document_order(a, c) != Ordering::Greater);
    }
}

namespace {

DocumentPtr parse(const std::string& xml) { return parse_document_bytes(xml, 0, 0, "test"); }

NodeHandle first_named(const DocumentPtr& doc, std::string_view name) {
    NodeHandle root{doc, 0};
    std::vector<NodeHandle> stack{root};
    while (!stack.empty()) {
        NodeHandle node = stack.back();
        stack.pop_back();
        if (node.kind() == NodeKind::Element && node.name() == name) return node;
        auto children = node.children();
        for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
    }
    FAIL("element not found: " << std::string(name));
    return root;
}

} // namespace

TEST_CASE("atomize") {
    DocumentPtr doc = parse("<book><title lang=\"en\">Everyday Italian</title></book>");
    XDMSequence seq{XDMItem(first_named(doc, "title"))};
    XDMSequence atoms = atomize(seq);
    REQUIRE(atoms.size() == 1);
    CHECK(atoms[0].atomic().kind() == AtomicKind::UntypedAtomic);
    CHECK(atoms[0].atomic().as_string() == "Everyday Italian");

    CHECK(atomize({}).empty());

    XDMSequence mixed{XDMItem(first_named(doc, "title")), XDMItem(AtomicValue::integer(5))};
    XDMSequence mixed_atoms = atomize(mixed);
    REQUIRE(mixed_atoms.size() == 2);
    CHECK(mixed_atoms[0].atomic().as_string() == "Everyday Italian");
    CHECK(mixed_atoms[1].atomic().as_int() == 5);

    // Idempotent and length preserving on atomic-only sequences.
    XDMSequence twice = atomize(mixed_atoms);
    REQUIRE(twice.size() == mixed_atoms.size());
    for (size_t i = 0; i < twice.size(); ++i)
        CHECK(twice[i].atomic().equals(mixed_atoms[i].atomic()));
}

TEST_CASE("atomization over randomized small trees matches a direct walk") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        // Random flat tree with text chunks.
        std::string xml = "<r>";
        std::string expected;
        int parts = 1 + rng() % 5;
        for (int i = 0; i < parts; ++i) {
            std::string chunk = "t" + std::to_string(rng() % 100);
            if (rng() % 2) {
                xml += "<c>" + chunk + "</c>";
            } else {
                xml += chunk;
            }
            expected += chunk;
        }
        xml += "</r>";
        DocumentPtr doc = parse(xml);
        XDMSequence seq{XDMItem(first_named(doc, "r"))};
        CHECK(atomize(seq)[0].atomic().as_string() == expected);
    }
}

TEST_CASE("effective boolean value") {
    CHECK_FALSE(effective_boolean_value({}));
    DocumentPtr doc = parse("<a/>");
    CHECK(effective_boolean_value({XDMItem(NodeHandle{doc, 0})}));
    CHECK_FALSE(effective_boolean_value({XDMItem(AtomicValue::integer(0))}));
    CHECK(effective_boolean_value({XDMItem(AtomicValue::integer(7))}));
    CHECK_FALSE(effective_boolean_value({XDMItem(AtomicValue::string_value(""))}));
    CHECK(effective_boolean_value({XDMItem(AtomicValue::string_value("x"))}));
    CHECK_FALSE(effective_boolean_value({XDMItem(AtomicValue::boolean(false))}));
    CHECK_FALSE(effective_boolean_value({XDMItem(AtomicValue::double_value(0.0))}));
    CHECK_FALSE(effective_boolean_value({XDMItem(AtomicValue::double_value(std::nan("")))}));
    CHECK(effective_boolean_value({XDMItem(AtomicValue::decimal(*Decimal::parse("0.1")))}));

    // Multi-item sequence starting with an atomic is an error; starting with
    // a node it is true regardless of content.
    XDMSequence bad{XDMItem(AtomicValue::integer(1)), XDMItem(AtomicValue::integer(2))};
    CHECK_THROWS_AS(effective_boolean_value(bad), Error);
    XDMSequence nodes{XDMItem(NodeHandle{doc, 0}), XDMItem(AtomicValue::integer(1))};
    CHECK(effective_boolean_value(nodes));
}

TEST_CASE("singleton EBV agrees with a direct table over all kinds") {
    // Independent oracle for the singleton rules.
    struct Case {
        AtomicValue value;
        bool expected;
    };
    std::vector<Case> cases = {
        {AtomicValue::boolean(true), true},
        {AtomicValue::boolean(false), false},
        {AtomicValue::of_int(AtomicKind::Byte, 0), false},
        {AtomicValue::of_int(AtomicKind::Short, -3), true},
        {AtomicValue::integer(0), false},
        {AtomicValue::of_int(AtomicKind::Long, 1), true},
        {AtomicValue::double_value(2.5), true},
        {AtomicValue::float_value(0.0f), false},
        {AtomicValue::string_value("a"), true},
        {AtomicValue::untyped(""), false},
        {AtomicValue::decimal(Decimal::from_int(0)), false},
    };
    for (const Case& c : cases) CHECK(effective_boolean_value({XDMItem(c.value)}) == c.expected);
}

TEST_CASE("promotion") {
    AtomicValue decimal = promote(AtomicValue::untyped("491.744"), AtomicKind::Decimal);
    CHECK(decimal.kind() == AtomicKind::Decimal);
    CHECK(decimal.as_decimal().to_string() == "491.744");

    AtomicValue same = promote(AtomicValue::string_value("a"), AtomicKind::String);
    CHECK(same.as_string() == "a");

    AtomicValue year = promote(AtomicValue::untyped("2005"), AtomicKind::Integer);
    CHECK(year.kind() == AtomicKind::Integer);
    CHECK(year.as_int() == 2005);

    CHECK_THROWS_AS(promote(AtomicValue::date_time(0), AtomicKind::Integer), Error);
    CHECK_THROWS_AS(promote(AtomicValue::untyped("abc"), AtomicKind::Integer), Error);

    // Numeric widening.
    CHECK(promote(AtomicValue::of_int(AtomicKind::Byte, 7), AtomicKind::Long).as_int() == 7);
    CHECK(promote(AtomicValue::integer(3), AtomicKind::Double).as_double_payload() == 3.0);
    CHECK(promote(AtomicValue::decimal(*Decimal::parse("1.5")), AtomicKind::Double)
              .as_double_payload() == 1.5);
}

TEST_CASE("promote to own kind is identity for every kind") {
    std::vector<AtomicValue> values = {
        AtomicValue::boolean(true),
        AtomicValue::of_int(AtomicKind::Byte, 1),
        AtomicValue::of_int(AtomicKind::Short, 2),
        AtomicValue::integer(3),
        AtomicValue::of_int(AtomicKind::Long, 4),
        AtomicValue::double_value(1.25),
        AtomicValue::float_value(0.5f),
        AtomicValue::string_value("s"),
        AtomicValue::decimal(Decimal::from_int(9)),
        AtomicValue::date_time(1234567),
        AtomicValue::untyped("u"),
    };
    for (const AtomicValue& v : values) {
        AtomicValue p = promote(v, v.kind());
        CHECK(p.kind() == v.kind());
        CHECK(p.equals(v));
    }
}

TEST_CASE("decimal arithmetic is exact") {
    Decimal a = *Decimal::parse("491.744");
    CHECK(a.to_string() == "491.744");
    CHECK(a.add(*Decimal::parse("0.256")).to_string() == "492");
    CHECK(Decimal::from_int(412).divide(Decimal::from_int(10)).to_string() == "41.2");
    CHECK(Decimal::from_int(-405).divide(Decimal::from_int(10)).to_string() == "-40.5");
    CHECK(*Decimal::parse("2.5") == Decimal::from_int(5).divide(Decimal::from_int(2)));

    // Round half to even at the 18th fractional digit.
    Decimal third = Decimal::from_int(1).divide(Decimal::from_int(3));
    CHECK(third.to_string() == "0.333333333333333333");
    Decimal x = Decimal::from_units(5); // 5e-18
    CHECK(x.divide(Decimal::from_int(10)).units() == 0); // 0.5e-18 rounds to even 0
    Decimal y = Decimal::from_units(15);
    CHECK(y.divide(Decimal::from_int(10)).units() == 2); // 1.5e-18 rounds to even 2

    CHECK(a.multiply(Decimal::from_int(2)).to_string() == "983.488");
    CHECK_THROWS_AS(Decimal::from_int(1).divide(Decimal::from_int(0)), Error);

    // Sum order independence: shuffled additions agree.
    std::mt19937 rng(3);
    std::vector<Decimal> values;
    for (int i = 0; i < 50; ++i) values.push_back(*Decimal::parse(std::to_string(rng() % 1000) + "." + std::to_string(rng() % 10)));
    Decimal forward;
    for (const Decimal& v : values) forward = forward.add(v);
    std::shuffle(values.begin(), values.end(), rng);
    Decimal shuffled;
    for (const Decimal& v : values) shuffled = shuffled.add(v);
    CHECK(forward == shuffled);
}

TEST_CASE("value comparison across kinds") {
    CHECK(value_compare_atomic(AtomicValue::untyped("GHCND:X"), AtomicValue::string_value("GHCND:X"),
                               CompareOp::Eq));
    CHECK(value_compare_atomic(AtomicValue::untyped("b"), AtomicValue::untyped("a"), CompareOp::Gt));
    CHECK(value_compare_atomic(AtomicValue::integer(2005), AtomicValue::integer(2003), CompareOp::Ge));
    CHECK(value_compare_atomic(AtomicValue::decimal(*Decimal::parse("491.8")),
                               AtomicValue::decimal(*Decimal::parse("491.744")), CompareOp::Gt));
    CHECK(value_compare_atomic(AtomicValue::integer(1), AtomicValue::double_value(1.0), CompareOp::Eq));
    CHECK(value_compare_atomic(AtomicValue::untyped("41"), AtomicValue::integer(41), CompareOp::Eq));
    CHECK_THROWS_AS(
        value_compare_atomic(AtomicValue::string_value("a"), AtomicValue::integer(1), CompareOp::Eq),
        Error);
}

TEST_CASE("dateTime parsing and calendar accessors") {
    auto ms = parse_date_time_millis("1976-07-04T00:00:00.000");
    REQUIRE(ms);
    CivilDate cd = civil_from_millis(*ms);
    CHECK(cd.year == 1976);
    CHECK(cd.month == 7);
    CHECK(cd.day == 4);
    CHECK(format_date_time(*ms) == "1976-07-04T00:00:00.000");

    // Timezone offsets normalize to UTC.
    auto offset = parse_date_time_millis("1976-07-04T02:30:00.000+02:30");
    REQUIRE(offset);
    CHECK(*offset == *ms);
    auto zulu = parse_date_time_millis("1976-07-04T00:00:00.000Z");
    REQUIRE(zulu);
    CHECK(*zulu == *ms);

    CHECK_FALSE(parse_date_time_millis("1976-07-04"));
    CHECK_FALSE(parse_date_time_millis("1976-13-04T00:00:00.000"));
    CHECK_FALSE(parse_date_time_millis("1976-02-30T00:00:00.000"));

    // Round trip across a range of instants.
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        int64_t t = static_cast<int64_t>(rng() % (4000ull * 365 * 86400000)) - 1000ll * 365 * 86400000;
        auto back = parse_date_time_millis(format_date_time(t));
        REQUIRE(back);
        CHECK(*back == t);
    }
}

TEST_CASE("node serialization") {
    DocumentPtr doc = parse("<book id=\"1\"><title>A &amp; B</title><empty/></book>");
    std::string xml = serialize_node(NodeHandle{doc, 0});
    CHECK(xml == "<book id=\"1\"><title>A &amp; B</title><empty/></book>");
}
