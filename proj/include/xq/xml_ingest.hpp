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

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "xq/xdm.hpp"

namespace xq {

/// Partitioned data layout. A collection directory's sorted .xml file list is
/// split into contiguous per-partition ranges, so concatenating partition
/// outputs in ordinal order reproduces the global lexicographic file order at
/// any partition count. Files are never split across partitions.
struct PartitionSpec {
    uint32_t partition_count = 1;
    std::filesystem::path data_root;
};

struct DocumentHandleInfo {
    uint32_t partition = 0;
    std::filesystem::path path;
    uint32_t doc_seq = 0; // lexicographic rank within the partition
};

struct ParserStats {
    uint64_t nodes_counted = 0;      // every node seen, materialized or not
    uint64_t nodes_materialized = 0; // nodes built into fragments
    uint64_t peak_live_nodes = 0;    // largest fragment under construction
};

/// Streaming parser that walks one XML document and hands back matched
/// fragments one at a time. With an empty path filter the single fragment is
/// the whole document; with steps ["a","b"] each /a/b element subtree is
/// materialized on its own while everything else is only counted, so the
/// resident tree never exceeds the largest matched subtree.
///
/// Node pre_order values are identical to a whole-document parse: skipped
/// regions still advance the counter.
class XmlFragmentScanner {
  public:
    XmlFragmentScanner(std::string bytes, uint32_t partition, uint32_t doc_seq, std::string source_path,
                       std::vector<std::string> path_filter);
    ~XmlFragmentScanner();

    /// Next matched fragment in document order, or nullptr at end of document.
    DocumentPtr next();

    const ParserStats& stats() const { return stats_; }

  private:
    struct OpenFrame {
        std::string_view name;        // view into the input buffer
        uint32_t record = kNoNode;    // fragment arena index, kNoNode while skipping
        uint32_t last_child = kNoNode;
    };

    [[noreturn]] void fail(const std::string& message, size_t offset) const;
    void detect_encoding();
    bool at(const char* literal) const;
    void expect(const char* literal);
    void skip_whitespace();
    std::string_view read_name();
    void read_attribute_value(std::string* out);
    void append_entity(std::string* out);
    void handle_text_char(char c);
    void flush_text();
    void start_element();
    void end_element();
    void read_comment();
    void read_pi();
    void read_cdata();
    void begin_fragment(bool document_root);
    DocumentPtr finish_fragment();
    uint32_t add_record(NodeKind kind, std::string_view name, std::string text);
    uint32_t intern_name(std::string_view name);
    void count_node() { ++stats_.nodes_counted; ++pre_counter_; }

    std::string buf_;
    size_t pos_ = 0;
    uint32_t partition_;
    uint32_t doc_seq_;
    std::string source_path_;
    std::vector<std::string> filter_;

    uint32_t pre_counter_ = 0;
    int depth_ = 0;      // open element depth; root element is 1
    int match_len_ = 0;  // matched filter prefix along the open ancestor chain
    std::vector<OpenFrame> open_;
    bool prolog_done_ = false;
    bool root_seen_ = false;
    bool root_closed_ = false;
    bool doc_finished_ = false;

    std::unique_ptr<Document> frag_;
    std::shared_ptr<const NameTable> names_; // grows copy-on-write across fragments
    size_t last_fragment_nodes_ = 8;
    bool whole_document_;
    bool fragment_ready_ = false;
    bool text_pending_ = false;
    std::string text_;

    ParserStats stats_;
};

/// Parse a complete document (no path filter).
DocumentPtr parse_document_bytes(std::string bytes, uint32_t partition, uint32_t doc_seq,
                                 std::string source_path);

std::string read_file_bytes(const std::filesystem::path& path);

/// Sorted .xml files of a collection directory; other files are ignored.
std::vector<std::filesystem::path> list_collection_files(const std::filesystem::path& dir);

/// Contiguous [begin, end) slice of the sorted file list owned by a partition.
std::pair<size_t, size_t> partition_file_range(size_t file_count, uint32_t partition_count,
                                               uint32_t partition);

/// Streams fragments from every file in one partition's slice of a collection,
/// in lexicographic path order. doc_seq is the ordinal within the partition.
class CollectionScan {
  public:
    CollectionScan(const PartitionSpec& spec, uint32_t partition, const std::filesystem::path& collection_dir,
                   std::vector<std::string> path_filter);

    DocumentPtr next();

    const ParserStats& stats() const { return stats_; }

  private:
    uint32_t partition_;
    std::vector<std::filesystem::path> files_;
    size_t file_index_ = 0;
    uint32_t doc_seq_ = 0;
    std::vector<std::string> filter_;
    std::unique_ptr<XmlFragmentScanner> scanner_;
    ParserStats stats_;
};

/// Resolve a collection string ("/sensors") against the data root.
std::filesystem::path resolve_collection_dir(const std::filesystem::path& data_root,
                                             const std::string& collection);

/// Thread-safe parsed-document cache, shared across one query evaluation.
class DocumentCache {
  public:
    /// Whole-document parse of a single file (doc()).
    DocumentPtr document(const std::filesystem::path& path);

    /// Every document of a collection in global lexicographic order
    /// (partition 0, doc_seq = global rank); used by scalar collection()
    /// evaluation and the naive interpreter.
    std::shared_ptr<const std::vector<DocumentPtr>> collection(const std::filesystem::path& dir);

  private:
    std::mutex mutex_;
    std::unordered_map<std::string, DocumentPtr> docs_;
    std::unordered_map<std::string, std::shared_ptr<const std::vector<DocumentPtr>>> collections_;
};

} // namespace xq
