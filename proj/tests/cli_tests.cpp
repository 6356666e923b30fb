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
#include <cstdlib>
#include <fstream>

#include "xq/datagen.hpp"
#include "xq/xml_ingest.hpp"

using namespace xq;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / ("xq-cli-" + name);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

struct CommandResult {
    int exit_code;
    std::string output; // stdout
    std::string errors; // stderr
};

CommandResult run_cli(const std::string& args) {
    static int counter = 0;
    std::filesystem::path out =
        std::filesystem::temp_directory_path() / ("xq-cli-out-" + std::to_string(counter));
    std::filesystem::path err =
        std::filesystem::temp_directory_path() / ("xq-cli-err-" + std::to_string(counter));
    ++counter;
    std::string command = std::string(XQPROC_BINARY) + " " + args + " > " + out.string() + " 2> " +
                          err.string();
    int status = std::system(command.c_str());
    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = read_file_bytes(out);
    result.errors = read_file_bytes(err);
    std::filesystem::remove(out);
    std::filesystem::remove(err);
    return result;
}

std::string sorted_lines(std::string text) {
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

} // namespace

TEST_CASE("exit codes") {
    TempDir dir("exit");
    std::filesystem::create_directories(dir.path / "c");
    // Success.
    CHECK(run_cli("-q \"1 div 10\" --data-root " + dir.path.string()).exit_code == 0);
    // Syntax error.
    CommandResult syntax = run_cli("-q \"(\"");
    CHECK(syntax.exit_code == 2);
    CHECK(syntax.errors.find("SyntaxError") != std::string::npos);
    // Bind error.
    CHECK(run_cli("-q \"\\$nope\"").exit_code == 3);
    // Type error.
    CHECK(run_cli("-q 'boolean((1, 2))'").exit_code == 3);
    // IO error: missing collection directory.
    CommandResult io = run_cli("-q 'collection(\"/missing\")/a/b' --data-root " + dir.path.string());
    CHECK(io.exit_code == 4);
}

TEST_CASE("result printing and plan dumps") {
    TempDir dir("dump");
    std::ofstream(dir.path / "book.xml") << "<bookstore><book id=\"1\"/><book id=\"2\"/></bookstore>";
    CommandResult result = run_cli("-q 'doc(\"book.xml\")/bookstore/book' --data-root " +
                                   dir.path.string() + " --dump-plan logical");
    CHECK(result.exit_code == 0);
    // Still executes.
    CHECK(result.output == "<book id=\"1\"/>\n<book id=\"2\"/>\n");
    // And prints the plan to stderr.
    CHECK(result.errors.find("DISTRIBUTE-RESULT") != std::string::npos);
    CHECK(result.errors.find("UNNEST") != std::string::npos);
}

TEST_CASE("naive and parallel engines print identical bytes after order normalization") {
    TempDir dir("diff");
    GenSpec spec;
    spec.seed = 21;
    spec.stations = 4;
    spec.days = 50;
    spec.out = dir.path;
    generate(spec);
    std::string query_file = std::string(XQ_QUERY_DIR) + "/q4.xq";
    CommandResult parallel = run_cli("--query-file " + query_file + " --data-root " +
                                     dir.path.string() + " --partitions 4");
    CommandResult naive =
        run_cli("--query-file " + query_file + " --data-root " + dir.path.string() + " --engine naive");
    CHECK(parallel.exit_code == 0);
    CHECK(naive.exit_code == 0);
    CHECK(sorted_lines(parallel.output) == sorted_lines(naive.output));
}

TEST_CASE("datagen and bench subcommands") {
    TempDir dir("bench");
    CommandResult gen = run_cli("datagen --seed 3 --stations 3 --days 30 --out " +
                                (dir.path / "data").string());
    CHECK(gen.exit_code == 0);

    std::string q2 = std::string(XQ_QUERY_DIR) + "/q2.xq";
    CommandResult bench = run_cli("bench --query-file " + q2 + " --data-root " +
                                  (dir.path / "data").string() +
                                  " --partitions-list 1 --partitions-list 2 --partitions-list 4" +
                                  " --repetitions 3");
    CHECK(bench.exit_code == 0);
    INFO(bench.output);
    // Header plus one row per partition count.
    CHECK(std::count(bench.output.begin(), bench.output.end(), '\n') == 4);
    CHECK(bench.output.find("query\tpartitions\tmean_ms\tresult_hash\tplan_hash") == 0);
    CHECK(bench.output.find("q2\t1\t") != std::string::npos);
    CHECK(bench.output.find("q2\t2\t") != std::string::npos);
    CHECK(bench.output.find("q2\t4\t") != std::string::npos);

    // The three rows carry identical result and plan hashes.
    std::vector<std::string> hashes;
    size_t pos = 0;
    while ((pos = bench.output.find("q2\t", pos)) != std::string::npos) {
        size_t line_end = bench.output.find('\n', pos);
        std::string line = bench.output.substr(pos, line_end - pos);
        hashes.push_back(line.substr(line.rfind('\t') - 16));
        pos = line_end;
    }
    REQUIRE(hashes.size() == 3);
    // Result hash (second to last column) identical across partition counts.
    std::vector<std::string> result_hashes;
    pos = 0;
    while ((pos = bench.output.find("q2\t", pos)) != std::string::npos) {
        size_t line_end = bench.output.find('\n', pos);
        std::string line = bench.output.substr(pos, line_end - pos);
        size_t last_tab = line.rfind('\t');
        size_t second_last = line.rfind('\t', last_tab - 1);
        result_hashes.push_back(line.substr(second_last + 1, last_tab - second_last - 1));
        pos = line_end;
    }
    CHECK(result_hashes[0] == result_hashes[1]);
    CHECK(result_hashes[1] == result_hashes[2]);
}
