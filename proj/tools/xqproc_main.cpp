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

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "xq/bench.hpp"
#include "xq/datagen.hpp"
#include "xq/engine.hpp"
#include "xq/error.hpp"

namespace {

int exit_code_for(xq::ErrorKind kind) {
    switch (kind) {
        case xq::ErrorKind::Lex:
        case xq::ErrorKind::Syntax:
        case xq::ErrorKind::PlanSyntax: return 2;
        case xq::ErrorKind::Type:
        case xq::ErrorKind::Bind:
        case xq::ErrorKind::Translation: return 3;
        default: return 4;
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) xq::raise(xq::ErrorKind::Io, "cannot open query file " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"xqproc: parallel XQuery subset processor over partitioned XML"};
    app.require_subcommand(0, 1);

    std::string query_text, query_file, engine = "parallel";
    std::string data_root = ".", scratch;
    uint32_t partitions = 1;
    size_t frame_size = 65536;
    size_t join_memory = 64ull << 20;
    bool no_pushdown = false;
    std::vector<std::string> dump_stages;

    app.add_option("-q,--query", query_text, "query text");
    app.add_option("--query-file", query_file, "file holding the query");
    app.add_option("--data-root", data_root, "directory collection strings resolve against");
    app.add_option("--partitions", partitions, "worker partition count")->check(CLI::Range(1u, 1024u));
    app.add_option("--frame-size", frame_size, "frame capacity in bytes, at least 4096")
        ->check(CLI::Range(size_t{4096}, size_t{1} << 30));
    app.add_option("--engine", engine, "parallel | naive")
        ->check(CLI::IsMember({"parallel", "naive"}));
    app.add_option("--dump-plan", dump_stages, "plan stages to print: initial, logical, physical")
        ->check(CLI::IsMember({"initial", "logical", "physical"}));
    app.add_option("--scratch", scratch, "spill directory");
    app.add_option("--join-memory", join_memory, "hybrid hash join memory budget in bytes");
    app.add_flag("--no-pushdown", no_pushdown, "disable the child-path scan pushdown rule");

    CLI::App* bench = app.add_subcommand("bench", "timing matrix over queries and partition counts");
    std::vector<std::string> bench_queries;
    std::vector<uint32_t> bench_partitions{1, 2, 4};
    int repetitions = 3;
    std::string bench_data_root = ".", report_path;
    bench->add_option("--query-file", bench_queries, "query files (name taken from the file stem)")
        ->required();
    bench->add_option("--partitions-list", bench_partitions, "partition counts to sweep");
    bench->add_option("--repetitions", repetitions, "measured runs per cell (after 2 warm-ups)");
    bench->add_option("--data-root", bench_data_root, "data root");
    bench->add_option("--report", report_path, "write the TSV report here (default stdout)");

    CLI::App* datagen = app.add_subcommand("datagen", "generate the weather corpus");
    xq::GenSpec gen;
    std::string gen_out;
    datagen->add_option("--seed", gen.seed, "RNG seed");
    datagen->add_option("--stations", gen.stations, "station count");
    datagen->add_option("--days", gen.days, "readings per station (one per day)");
    datagen->add_option("--partitions", gen.partitions, "intended partition count (recorded)");
    datagen->add_option("--records-per-file", gen.records_per_file, "records per XML file");
    datagen->add_option("--extreme-days", gen.extreme_days, "per-station days in sensors_min/max");
    datagen->add_option("--out", gen_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (datagen->parsed()) {
            gen.out = gen_out;
            xq::Manifest manifest = xq::generate(gen);
            std::printf("generated %s records into %s\n", manifest.at("sensor_records").c_str(),
                        gen_out.c_str());
            return 0;
        }

        if (bench->parsed()) {
            xq::BenchSpec spec;
            for (const std::string& path : bench_queries) {
                std::filesystem::path p(path);
                spec.queries.push_back(xq::BenchQuery{p.stem().string(), read_text_file(path)});
            }
            spec.partition_counts = bench_partitions;
            spec.repetitions = repetitions;
            spec.base.data_root = bench_data_root;
            spec.base.frame_size = frame_size;
            spec.base.join_memory_budget = join_memory;
            if (!scratch.empty()) spec.base.scratch = scratch;
            std::string report = xq::format_report(xq::run_bench(spec));
            if (report_path.empty()) {
                std::fputs(report.c_str(), stdout);
            } else {
                std::ofstream out(report_path, std::ios::binary);
                out << report;
            }
            return 0;
        }

        if (query_text.empty() && query_file.empty()) {
            std::fprintf(stderr, "error: provide --query or --query-file\n");
            return 2;
        }
        xq::RunConfig config;
        config.query_text = query_text.empty() ? read_text_file(query_file) : query_text;
        config.data_root = data_root;
        config.partitions = partitions;
        config.frame_size = frame_size;
        config.engine = engine == "naive" ? xq::EngineKind::Naive : xq::EngineKind::Parallel;
        config.pushdown = !no_pushdown;
        config.join_memory_budget = join_memory;
        if (!scratch.empty()) config.scratch = scratch;

        xq::RunResult result = xq::run_query(config);
        for (const std::string& stage : dump_stages) {
            if (stage == "initial")
                std::fprintf(stderr, "-- initial plan --\n%s", result.initial_plan_text.c_str());
            if (stage == "logical")
                std::fprintf(stderr, "-- logical plan --\n%s", result.logical_plan_text.c_str());
            if (stage == "physical")
                std::fprintf(stderr, "-- physical plan --\n%s", result.physical_plan_text.c_str());
        }
        std::fputs(result.serialized.c_str(), stdout);
        return 0;
    } catch (const xq::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
