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

#include <fstream>
#include <random>

#include "xq/error.hpp"
#include "xq/xml_ingest.hpp"

using namespace xq;

namespace {

const char* kBookstore =
    "<?xml version=\"1.0\" encoding=\"ISO-8859-1\"?>\n"
    "<bookstore>\n"
    "  <book id=\"1\" category=\"COOKING\">\n"
    "    <title lang=\"en\">Everyday Italian</title>\n"
    "    <author>Giada De Laurentiis</author>\n"
    "    <year>2005</year>\n"
    "  </book>\n"
    "  <book id=\"2\" category=\"CHILDREN\">\n"
    "    <title lang=\"en\">Harry Potter</title>\n"
    "    <author>J K. Rowling</author>\n"
    "    <year>2005</year>\n"
    "  </book>\n"
    "</bookstore>\n";

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / ("xq-ingest-" + name);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace

TEST_CASE("bookstore sample parses with attributes and ids") {
    DocumentPtr doc = parse_document_bytes(kBookstore, 0, 0, "book.xml");
    NodeHandle root{doc, 0};
    REQUIRE(root.kind() == NodeKind::Document);
    auto children = root.children();
    REQUIRE(children.size() == 1);
    NodeHandle bookstore = children[0];
    CHECK(bookstore.name() == "bookstore");
    auto books = bookstore.child_elements("book");
    REQUIRE(books.size() == 2);
    auto attrs = books[0].attributes();
    REQUIRE(attrs.size() == 2);
    CHECK(attrs[0].name() == "id");
    CHECK(attrs[0].record().text == "1");
    CHECK(attrs[1].record().text == "COOKING");
    CHECK(books[0].child_elements("title")[0].string_value() == "Everyday Italian");
    // Pre-order identity follows a parent-before-descendant discipline.
    CHECK(bookstore.id().pre_order < books[0].id().pre_order);
    CHECK(books[0].id().pre_order < books[1].id().pre_order);
}

TEST_CASE("minimal document") {
    DocumentPtr doc = parse_document_bytes("<a/>", 3, 7, "a.xml");
    NodeHandle root{doc, 0};
    auto children = root.children();
    REQUIRE(children.size() == 1);
    CHECK(children[0].name() == "a");
    CHECK(children[0].children().empty());
    CHECK(children[0].id() == NodeId{3, 7, 1});
}

TEST_CASE("pre-order numbering matches a recursive-descent oracle") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        // Random 3-level tree; the expected pre-order is the order of
        // appearance of nodes in the serialized text (document first).
        std::string xml = "<r>";
        uint32_t expected_nodes = 2; // document + root
        int branches = 1 + rng() % 4;
        for (int b = 0; b < branches; ++b) {
            int attrs = rng() % 2;
            xml += "<b";
            if (attrs) xml += " k=\"v\"";
            xml += ">";
            expected_nodes += 1 + attrs;
            int leaves = rng() % 3;
            for (int l = 0; l < leaves; ++l) {
                xml += "<c>t</c>";
                expected_nodes += 2; // element + text
            }
            xml += "</b>";
        }
        xml += "</r>";
        DocumentPtr doc = parse_document_bytes(xml, 0, 0, "t.xml");
        REQUIRE(doc->nodes.size() == expected_nodes);
        // Arena order is document order for a whole parse: pre_order == index.
        for (uint32_t i = 0; i < doc->nodes.size(); ++i) CHECK(doc->nodes[i].pre_order == i);
    }
}

TEST_CASE("collection scan yields lexicographic path order") {
    TempDir dir("order");
    write_file(dir.path / "b.xml", "<r><x>b</x></r>");
    write_file(dir.path / "a.xml", "<r><x>a</x></r>");
    write_file(dir.path / "ignored.txt", "not xml");
    PartitionSpec spec{1, dir.path.parent_path()};
    CollectionScan scan(spec, 0, dir.path, {});
    DocumentPtr first = scan.next();
    REQUIRE(first);
    CHECK(NodeHandle{first, 0}.string_value() == "a");
    CHECK(first->doc_seq == 0);
    DocumentPtr second = scan.next();
    REQUIRE(second);
    CHECK(NodeHandle{second, 0}.string_value() == "b");
    CHECK(second->doc_seq == 1);
    CHECK(scan.next() == nullptr);
}

TEST_CASE("empty directory yields an empty stream") {
    TempDir dir("empty");
    PartitionSpec spec{1, dir.path.parent_path()};
    CollectionScan scan(spec, 0, dir.path, {});
    CHECK(scan.next() == nullptr);
}

TEST_CASE("ten files get doc_seq 0..9 and ids increase monotonically") {
    TempDir dir("ten");
    for (int i = 0; i < 10; ++i)
        write_file(dir.path / ("f" + std::to_string(i) + ".xml"), "<r><v>1</v></r>");
    PartitionSpec spec{1, dir.path.parent_path()};
    CollectionScan scan(spec, 0, dir.path, {});
    uint32_t expected = 0;
    NodeId last{};
    bool first = true;
    while (DocumentPtr doc = scan.next()) {
        CHECK(doc->doc_seq == expected);
        NodeId id = NodeHandle{doc, 0}.id();
        if (!first) CHECK(compare_document_order(last, id) == Ordering::Less);
        last = id;
        first = false;
        ++expected;
    }
    CHECK(expected == 10);
}

TEST_CASE("partition ranges are contiguous, disjoint and complete") {
    for (size_t files : {0u, 1u, 5u, 16u, 17u}) {
        for (uint32_t partitions : {1u, 2u, 4u, 8u}) {
            size_t covered = 0;
            size_t last_end = 0;
            for (uint32_t p = 0; p < partitions; ++p) {
                auto [begin, end] = partition_file_range(files, partitions, p);
                CHECK(begin == last_end);
                last_end = end;
                covered += end - begin;
            }
            CHECK(last_end == files);
            CHECK(covered == files);
        }
    }
}

TEST_CASE("path scan equals whole parse plus child steps") {
    std::mt19937 rng(41);
    TempDir dir("equiv");
    for (int f = 0; f < 6; ++f) {
        std::string xml = "<dataCollection>";
        int records = 1 + rng() % 6;
        for (int r = 0; r < records; ++r) {
            xml += "<data><v>" + std::to_string(rng() % 100) + "</v></data>";
            if (rng() % 3 == 0) xml += "<!-- note -->";
            if (rng() % 4 == 0) xml += "<other><data>decoy</data></other>";
        }
        xml += "</dataCollection>";
        write_file(dir.path / ("f" + std::to_string(f) + ".xml"), xml);
    }
    PartitionSpec spec{2, dir.path.parent_path()};
    for (uint32_t p = 0; p < 2; ++p) {
        // Oracle: whole-document parse, then child steps.
        std::vector<std::pair<NodeId, std::string>> expected;
        {
            CollectionScan whole(spec, p, dir.path, {});
            while (DocumentPtr doc = whole.next()) {
                for (NodeHandle top : NodeHandle{doc, 0}.child_elements("dataCollection"))
                    for (NodeHandle rec : top.child_elements("data"))
                        expected.emplace_back(rec.id(), serialize_node(rec));
            }
        }
        std::vector<std::pair<NodeId, std::string>> streamed;
        {
            CollectionScan with_path(spec, p, dir.path, {"dataCollection", "data"});
            NodeId last{};
            bool first = true;
            while (DocumentPtr fragment = with_path.next()) {
                NodeHandle node{fragment, 0};
                streamed.emplace_back(node.id(), serialize_node(node));
                if (!first) CHECK(compare_document_order(last, node.id()) == Ordering::Less);
                last = node.id();
                first = false;
            }
        }
        REQUIRE(streamed.size() == expected.size());
        for (size_t i = 0; i < streamed.size(); ++i) {
            CHECK(streamed[i].first == expected[i].first);
            CHECK(streamed[i].second == expected[i].second);
        }
    }
}

TEST_CASE("path scan keeps only the matched subtree resident") {
    // One large document: many records under the path, so the whole tree is
    // far larger than any single record subtree.
    std::string xml = "<dataCollection>";
    for (int r = 0; r < 500; ++r)
        xml += "<data><a>x</a><b>y</b><c>z</c></data>";
    xml += "</dataCollection>";

    XmlFragmentScanner whole(xml, 0, 0, "big.xml", {});
    DocumentPtr doc = whole.next();
    uint64_t total_nodes = doc->nodes.size();

    XmlFragmentScanner filtered(xml, 0, 0, "big.xml", {"dataCollection", "data"});
    uint64_t fragments = 0;
    uint64_t largest_fragment = 0;
    while (DocumentPtr fragment = filtered.next()) {
        ++fragments;
        largest_fragment = std::max<uint64_t>(largest_fragment, fragment->nodes.size());
    }
    CHECK(fragments == 500);
    CHECK(filtered.stats().peak_live_nodes <= largest_fragment);
    CHECK(filtered.stats().peak_live_nodes * 20 < total_nodes);
    // Every node is still counted for pre-order parity.
    CHECK(filtered.stats().nodes_counted == whole.stats().nodes_counted);
}

TEST_CASE("entities and character references") {
    DocumentPtr doc = parse_document_bytes(
        "<a t=\"&quot;q&quot;\">&lt;&amp;&gt; &#65;&#x42;</a>", 0, 0, "e.xml");
    NodeHandle root = NodeHandle{doc, 0}.children()[0];
    CHECK(root.string_value() == "<&> AB");
    CHECK(root.attributes()[0].record().text == "\"q\"");

    CHECK_THROWS_WITH_AS(parse_document_bytes("<a>&nbsp;</a>", 0, 0, "e.xml"),
                         doctest::Contains("entity"), Error);
}

TEST_CASE("encodings") {
    // ISO-8859-1 bytes transcode to UTF-8.
    std::string latin = "<?xml version=\"1.0\" encoding=\"ISO-8859-1\"?><a>caf\xe9</a>";
    DocumentPtr doc = parse_document_bytes(latin, 0, 0, "latin.xml");
    CHECK(NodeHandle{doc, 0}.children()[0].string_value() == "caf\xc3\xa9");

    CHECK_THROWS_WITH_AS(
        parse_document_bytes("<?xml version=\"1.0\" encoding=\"UTF-16\"?><a/>", 0, 0, "u16.xml"),
        doctest::Contains("encoding"), Error);
    std::string bom = "\xff\xfe<a/>";
    CHECK_THROWS_AS(parse_document_bytes(bom, 0, 0, "bom.xml"), Error);
}

TEST_CASE("malformed input carries a byte offset") {
    try {
        parse_document_bytes("<a><b></a>", 0, 0, "bad.xml");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("at byte") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_document_bytes("<a>", 0, 0, "bad.xml"), Error);
    CHECK_THROWS_AS(parse_document_bytes("text", 0, 0, "bad.xml"), Error);
    CHECK_THROWS_AS(parse_document_bytes("<a/><b/>", 0, 0, "bad.xml"), Error);
    CHECK_THROWS_WITH_AS(
        parse_document_bytes("<!DOCTYPE a SYSTEM \"ext.dtd\"><a/>", 0, 0, "dtd.xml"),
        doctest::Contains("document type"), Error);
}

TEST_CASE("cdata and comments merge into text runs") {
    DocumentPtr doc =
        parse_document_bytes("<a>one<![CDATA[ two <raw> ]]>three</a>", 0, 0, "c.xml");
    NodeHandle root = NodeHandle{doc, 0}.children()[0];
    auto children = root.children();
    REQUIRE(children.size() == 1); // a single merged text node
    CHECK(children[0].record().text == "one two <raw> three");

    DocumentPtr with_comment = parse_document_bytes("<a>x<!-- c -->y</a>", 0, 0, "c.xml");
    NodeHandle r2 = NodeHandle{with_comment, 0}.children()[0];
    CHECK(r2.children().size() == 3); // text, comment, text
    CHECK(r2.string_value() == "xy");
}
