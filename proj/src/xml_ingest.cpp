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

#include "xq/xml_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>

#include "xq/error.hpp"

namespace xq {

namespace {

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.';
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

void append_utf8(std::string* out, uint32_t cp) {
    if (cp < 0x80) {
        out->push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out->push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out->push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out->push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out->push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out->push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out->push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

std::string latin1_to_utf8(const std::string& in) {
    std::string out;
    out.reserve(in.size() + in.size() / 8);
    for (unsigned char c : in) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back(static_cast<char>(0xc0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
        }
    }
    return out;
}

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

XmlFragmentScanner::XmlFragmentScanner(std::string bytes, uint32_t partition, uint32_t doc_seq,
                                       std::string source_path, std::vector<std::string> path_filter)
    : buf_(std::move(bytes)),
      partition_(partition),
      doc_seq_(doc_seq),
      source_path_(std::move(source_path)),
      filter_(std::move(path_filter)),
      whole_document_(filter_.empty()) {
    detect_encoding();
}

XmlFragmentScanner::~XmlFragmentScanner() = default;

void XmlFragmentScanner::fail(const std::string& message, size_t offset) const {
    raise(ErrorKind::Parse, message + " at byte " + std::to_string(offset) +
                                (source_path_.empty() ? "" : " in " + source_path_));
}

void XmlFragmentScanner::detect_encoding() {
    if (buf_.size() >= 2) {
        unsigned char b0 = buf_[0], b1 = buf_[1];
        if ((b0 == 0xff && b1 == 0xfe) || (b0 == 0xfe && b1 == 0xff))
            fail("unsupported encoding (UTF-16 byte order mark)", 0);
    }
    if (buf_.size() >= 3 && static_cast<unsigned char>(buf_[0]) == 0xef &&
        static_cast<unsigned char>(buf_[1]) == 0xbb && static_cast<unsigned char>(buf_[2]) == 0xbf)
        pos_ = 3;
    // Peek at the declaration; the prolog itself is ASCII either way.
    size_t decl = buf_.find("<?xml", pos_);
    if (decl == pos_) {
        size_t end = buf_.find("?>", decl);
        if (end == std::string::npos) fail("unterminated XML declaration", decl);
        std::string header = buf_.substr(decl, end - decl);
        size_t enc = header.find("encoding");
        if (enc != std::string::npos) {
            size_t q1 = header.find_first_of("\"'", enc);
            if (q1 != std::string::npos) {
                size_t q2 = header.find(header[q1], q1 + 1);
                if (q2 != std::string::npos) {
                    std::string name = lower_ascii(header.substr(q1 + 1, q2 - q1 - 1));
                    if (name == "iso-8859-1" || name == "latin1") {
                        buf_ = latin1_to_utf8(buf_);
                    } else if (name != "utf-8" && name != "utf8") {
                        fail("unsupported encoding " + name, decl);
                    }
                }
            }
        }
        pos_ = buf_.find("?>", pos_) + 2;
    }
}

bool XmlFragmentScanner::at(const char* literal) const {
    size_t len = std::strlen(literal);
    return buf_.compare(pos_, len, literal) == 0;
}

void XmlFragmentScanner::expect(const char* literal) {
    if (!at(literal)) fail(std::string("expected \"") + literal + "\"", pos_);
    pos_ += std::strlen(literal);
}

void XmlFragmentScanner::skip_whitespace() {
    while (pos_ < buf_.size() && is_ws(buf_[pos_])) ++pos_;
}

std::string_view XmlFragmentScanner::read_name() {
    size_t start = pos_;
    if (pos_ >= buf_.size() || !is_name_start(buf_[pos_])) fail("expected a name", pos_);
    ++pos_;
    while (pos_ < buf_.size() && is_name_char(buf_[pos_])) ++pos_;
    return std::string_view(buf_).substr(start, pos_ - start);
}

void XmlFragmentScanner::append_entity(std::string* out) {
    size_t start = pos_;
    ++pos_; // '&'
    size_t semi = buf_.find(';', pos_);
    if (semi == std::string::npos || semi - pos_ > 10) fail("unterminated entity reference", start);
    std::string_view name(buf_.data() + pos_, semi - pos_);
    pos_ = semi + 1;
    if (name == "lt") {
        if (out) out->push_back('<');
    } else if (name == "gt") {
        if (out) out->push_back('>');
    } else if (name == "amp") {
        if (out) out->push_back('&');
    } else if (name == "apos") {
        if (out) out->push_back('\'');
    } else if (name == "quot") {
        if (out) out->push_back('"');
    } else if (!name.empty() && name[0] == '#') {
        uint32_t cp = 0;
        if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
            for (size_t i = 2; i < name.size(); ++i) {
                char c = name[i];
                uint32_t digit;
                if (c >= '0' && c <= '9') digit = c - '0';
                else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
                else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
                else fail("bad character reference", start);
                cp = cp * 16 + digit;
            }
        } else {
            for (size_t i = 1; i < name.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) fail("bad character reference", start);
                cp = cp * 10 + (name[i] - '0');
            }
        }
        if (cp == 0 || cp > 0x10ffff) fail("character reference out of range", start);
        if (out) append_utf8(out, cp);
    } else {
        fail("unknown entity &" + std::string(name) + "; (only predefined entities are supported)", start);
    }
}

void XmlFragmentScanner::read_attribute_value(std::string* out) {
    if (pos_ >= buf_.size() || (buf_[pos_] != '"' && buf_[pos_] != '\'')) fail("expected quoted value", pos_);
    char quote = buf_[pos_++];
    while (pos_ < buf_.size() && buf_[pos_] != quote) {
        if (buf_[pos_] == '&') {
            append_entity(out);
        } else if (buf_[pos_] == '<') {
            fail("'<' in attribute value", pos_);
        } else {
            if (out) out->push_back(buf_[pos_]);
            ++pos_;
        }
    }
    if (pos_ >= buf_.size()) fail("unterminated attribute value", pos_);
    ++pos_;
}

uint32_t XmlFragmentScanner::intern_name(std::string_view name) {
    // A handful of names per schema: a linear probe beats hashing and avoids
    // the temporary string a map lookup would need.
    const NameTable& table = *names_;
    for (uint32_t i = 0; i < table.size(); ++i)
        if (table[i] == name) return i;
    auto grown = std::make_shared<NameTable>(table);
    grown->emplace_back(name);
    names_ = std::move(grown);
    frag_->names = names_;
    return static_cast<uint32_t>(names_->size() - 1);
}

uint32_t XmlFragmentScanner::add_record(NodeKind kind, std::string_view name, std::string text) {
    NodeRecord rec;
    rec.kind = kind;
    rec.pre_order = pre_counter_; // caller counts right after
    if (!name.empty()) rec.name = intern_name(name);
    rec.text = std::move(text);
    uint32_t idx = static_cast<uint32_t>(frag_->nodes.size());
    // Link to the innermost materialized ancestor, if any.
    if (!open_.empty() && open_.back().record != kNoNode && kind != NodeKind::Attribute) {
        OpenFrame& parent = open_.back();
        rec.parent = parent.record;
        if (parent.last_child == kNoNode) {
            frag_->nodes[parent.record].first_child = idx;
        } else {
            frag_->nodes[parent.last_child].next_sibling = idx;
        }
        parent.last_child = idx;
    } else if (whole_document_ && kind != NodeKind::Attribute && idx > 0 && open_.empty()) {
        // Document-level child (root element, comments, PIs).
        NodeRecord& doc_rec = frag_->nodes[0];
        rec.parent = 0;
        if (doc_rec.first_child == kNoNode) {
            doc_rec.first_child = idx;
        } else {
            uint32_t sib = doc_rec.first_child;
            while (frag_->nodes[sib].next_sibling != kNoNode) sib = frag_->nodes[sib].next_sibling;
            frag_->nodes[sib].next_sibling = idx;
        }
    }
    frag_->nodes.push_back(std::move(rec));
    ++stats_.nodes_materialized;
    stats_.peak_live_nodes = std::max<uint64_t>(stats_.peak_live_nodes, frag_->nodes.size());
    return idx;
}

void XmlFragmentScanner::begin_fragment(bool document_root) {
    frag_ = std::make_unique<Document>();
    frag_->partition = partition_;
    frag_->doc_seq = doc_seq_;
    frag_->source_path = source_path_;
    if (!names_) names_ = std::make_shared<NameTable>();
    frag_->names = names_;
    frag_->nodes.reserve(last_fragment_nodes_ + 8);
    if (document_root) {
        NodeRecord rec;
        rec.kind = NodeKind::Document;
        rec.pre_order = pre_counter_;
        frag_->nodes.push_back(std::move(rec));
        ++stats_.nodes_materialized;
        count_node();
    }
}

DocumentPtr XmlFragmentScanner::finish_fragment() {
    frag_->nodes[0].subtree_end = static_cast<uint32_t>(frag_->nodes.size());
    last_fragment_nodes_ = frag_->nodes.size();
    DocumentPtr done(frag_.release());
    return done;
}

void XmlFragmentScanner::handle_text_char(char c) {
    if (depth_ == 0) {
        if (!is_ws(c)) fail("text content outside the root element", pos_);
        ++pos_;
        return;
    }
    // Take the whole span up to the next markup or entity in one step.
    size_t end = pos_;
    while (end < buf_.size() && buf_[end] != '<' && buf_[end] != '&') ++end;
    text_pending_ = true;
    if (frag_) text_.append(buf_, pos_, end - pos_);
    pos_ = end;
}

void XmlFragmentScanner::flush_text() {
    if (!text_pending_) return;
    text_pending_ = false;
    if (frag_ && depth_ > 0 && !open_.empty() && open_.back().record != kNoNode) {
        add_record(NodeKind::Text, {}, std::move(text_));
        count_node();
    } else {
        count_node();
    }
    text_.clear();
}

void XmlFragmentScanner::start_element() {
    flush_text();
    ++pos_; // '<'
    std::string_view name = read_name();
    ++depth_;
    bool matched = false;
    if (!whole_document_ && match_len_ == depth_ - 1 && match_len_ < static_cast<int>(filter_.size()) &&
        name == filter_[static_cast<size_t>(match_len_)]) {
        matched = true;
        ++match_len_;
    }
    bool fragment_root = matched && match_len_ == static_cast<int>(filter_.size()) &&
                         depth_ == static_cast<int>(filter_.size());
    if (fragment_root) begin_fragment(false);

    bool materialize = frag_ != nullptr && (whole_document_ || match_len_ == static_cast<int>(filter_.size()));

    uint32_t record = kNoNode;
    if (materialize) record = add_record(NodeKind::Element, name, {});
    count_node();

    // Attributes.
    uint16_t attr_count = 0;
    while (true) {
        skip_whitespace();
        if (pos_ >= buf_.size()) fail("unterminated start tag", pos_);
        if (buf_[pos_] == '>' || at("/>")) break;
        std::string_view attr_name = read_name();
        skip_whitespace();
        expect("=");
        skip_whitespace();
        if (materialize) {
            std::string value;
            read_attribute_value(&value);
            NodeRecord rec;
            rec.kind = NodeKind::Attribute;
            rec.pre_order = pre_counter_;
            rec.name = intern_name(attr_name);
            rec.parent = record;
            rec.text = std::move(value);
            rec.subtree_end = static_cast<uint32_t>(frag_->nodes.size()) + 1;
            frag_->nodes.push_back(std::move(rec));
            ++stats_.nodes_materialized;
            stats_.peak_live_nodes = std::max<uint64_t>(stats_.peak_live_nodes, frag_->nodes.size());
        } else {
            read_attribute_value(nullptr);
        }
        count_node();
        ++attr_count;
    }
    if (materialize) frag_->nodes[record].attr_count = attr_count;

    if (!root_seen_) root_seen_ = true;

    if (at("/>")) {
        pos_ += 2;
        if (materialize) frag_->nodes[record].subtree_end = static_cast<uint32_t>(frag_->nodes.size());
        --depth_;
        if (matched) --match_len_;
        if (depth_ == 0) root_closed_ = true;
        if (fragment_root) fragment_ready_ = true;
        return;
    }
    expect(">");
    open_.push_back(OpenFrame{name, record, kNoNode});
}

void XmlFragmentScanner::end_element() {
    flush_text();
    pos_ += 2; // "</"
    std::string_view name = read_name();
    skip_whitespace();
    expect(">");
    if (open_.empty() || open_.back().name != name)
        fail("mismatched end tag </" + std::string(name) + ">", pos_);
    OpenFrame frame = open_.back();
    open_.pop_back();
    if (frame.record != kNoNode && frag_)
        frag_->nodes[frame.record].subtree_end = static_cast<uint32_t>(frag_->nodes.size());
    bool was_matched = match_len_ == depth_;
    --depth_;
    if (was_matched) --match_len_;
    if (depth_ == 0) root_closed_ = true;
    if (!whole_document_ && frag_ && frame.record == 0) fragment_ready_ = true;
}

void XmlFragmentScanner::read_comment() {
    flush_text();
    pos_ += 4; // "<!--"
    size_t end = buf_.find("-->", pos_);
    if (end == std::string::npos) fail("unterminated comment", pos_);
    std::string content = buf_.substr(pos_, end - pos_);
    pos_ = end + 3;
    bool materialize = frag_ && (whole_document_ ? true : match_len_ == static_cast<int>(filter_.size()));
    if (materialize && (depth_ > 0 ? (!open_.empty() && open_.back().record != kNoNode) : whole_document_))
        add_record(NodeKind::Comment, {}, std::move(content));
    count_node();
}

void XmlFragmentScanner::read_pi() {
    flush_text();
    pos_ += 2; // "<?"
    std::string_view target = read_name();
    size_t end = buf_.find("?>", pos_);
    if (end == std::string::npos) fail("unterminated processing instruction", pos_);
    std::string content = buf_.substr(pos_, end - pos_);
    size_t strip = 0;
    while (strip < content.size() && is_ws(content[strip])) ++strip;
    content.erase(0, strip);
    pos_ = end + 2;
    bool materialize = frag_ && (whole_document_ ? true : match_len_ == static_cast<int>(filter_.size()));
    if (materialize && (depth_ > 0 ? (!open_.empty() && open_.back().record != kNoNode) : whole_document_))
        add_record(NodeKind::ProcessingInstruction, target, std::move(content));
    count_node();
}

void XmlFragmentScanner::read_cdata() {
    pos_ += 9; // "<![CDATA["
    size_t end = buf_.find("]]>", pos_);
    if (end == std::string::npos) fail("unterminated CDATA section", pos_);
    if (depth_ == 0) fail("CDATA outside the root element", pos_);
    text_pending_ = true;
    if (frag_) text_.append(buf_, pos_, end - pos_);
    pos_ = end + 3;
}

DocumentPtr XmlFragmentScanner::next() {
    if (doc_finished_) return nullptr;
    if (!prolog_done_) {
        prolog_done_ = true;
        if (whole_document_) begin_fragment(true);
        else count_node(); // the document node itself
    }
    fragment_ready_ = false;
    while (pos_ < buf_.size()) {
        char c = buf_[pos_];
        if (c == '<') {
            char next_char = pos_ + 1 < buf_.size() ? buf_[pos_ + 1] : '\0';
            if (next_char == '/') {
                end_element();
            } else if (next_char == '!') {
                if (at("<!--")) read_comment();
                else if (at("<![CDATA[")) read_cdata();
                else if (at("<!DOCTYPE")) fail("document type declarations are not supported", pos_);
                else fail("unsupported markup declaration", pos_);
            } else if (next_char == '?') {
                read_pi();
            } else {
                if (root_closed_) fail("content after the root element", pos_);
                start_element();
            }
            if (fragment_ready_ && !whole_document_) {
                fragment_ready_ = false;
                return finish_fragment();
            }
        } else if (c == '&') {
            if (depth_ == 0) fail("entity reference outside the root element", pos_);
            text_pending_ = true;
            append_entity(frag_ ? &text_ : nullptr);
        } else {
            handle_text_char(c);
        }
    }
    if (!root_seen_ || !root_closed_ || !open_.empty()) fail("premature end of document", pos_);
    doc_finished_ = true;
    if (whole_document_) return finish_fragment();
    return nullptr;
}

DocumentPtr parse_document_bytes(std::string bytes, uint32_t partition, uint32_t doc_seq,
                                 std::string source_path) {
    XmlFragmentScanner scanner(std::move(bytes), partition, doc_seq, std::move(source_path), {});
    DocumentPtr doc = scanner.next();
    if (!doc) raise(ErrorKind::Parse, "empty document");
    return doc;
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) raise(ErrorKind::Io, "read failure on " + path.string());
    return bytes;
}

std::vector<std::filesystem::path> list_collection_files(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) raise(ErrorKind::Io, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
    }
    if (ec) raise(ErrorKind::Io, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    return files;
}

std::pair<size_t, size_t> partition_file_range(size_t file_count, uint32_t partition_count,
                                               uint32_t partition) {
    size_t base = file_count / partition_count;
    size_t extra = file_count % partition_count;
    size_t begin = partition * base + std::min<size_t>(partition, extra);
    size_t len = base + (partition < extra ? 1 : 0);
    return {begin, begin + len};
}

CollectionScan::CollectionScan(const PartitionSpec& spec, uint32_t partition,
                               const std::filesystem::path& collection_dir,
                               std::vector<std::string> path_filter)
    : partition_(partition), filter_(std::move(path_filter)) {
    if (partition >= spec.partition_count)
        raise(ErrorKind::Internal, "partition ordinal out of range");
    std::vector<std::filesystem::path> all = list_collection_files(collection_dir);
    auto [begin, end] = partition_file_range(all.size(), spec.partition_count, partition);
    files_.assign(all.begin() + static_cast<long>(begin), all.begin() + static_cast<long>(end));
}

DocumentPtr CollectionScan::next() {
    while (true) {
        if (!scanner_) {
            if (file_index_ >= files_.size()) return nullptr;
            const std::filesystem::path& path = files_[file_index_];
            scanner_ = std::make_unique<XmlFragmentScanner>(read_file_bytes(path), partition_, doc_seq_,
                                                            path.string(), filter_);
        }
        DocumentPtr fragment = scanner_->next();
        if (fragment) return fragment;
        stats_.nodes_counted += scanner_->stats().nodes_counted;
        stats_.nodes_materialized += scanner_->stats().nodes_materialized;
        stats_.peak_live_nodes = std::max(stats_.peak_live_nodes, scanner_->stats().peak_live_nodes);
        scanner_.reset();
        ++file_index_;
        ++doc_seq_;
    }
}

std::filesystem::path resolve_collection_dir(const std::filesystem::path& data_root,
                                             const std::string& collection) {
    std::string name = collection;
    while (!name.empty() && name.front() == '/') name.erase(name.begin());
    return data_root / name;
}

DocumentPtr DocumentCache::document(const std::filesystem::path& path) {
    std::string key = path.string();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = docs_.find(key);
        if (it != docs_.end()) return it->second;
    }
    DocumentPtr doc = parse_document_bytes(read_file_bytes(path), 0, 0, key);
    std::lock_guard<std::mutex> lock(mutex_);
    return docs_.emplace(key, std::move(doc)).first->second;
}

std::shared_ptr<const std::vector<DocumentPtr>> DocumentCache::collection(
    const std::filesystem::path& dir) {
    std::string key = dir.string();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = collections_.find(key);
        if (it != collections_.end()) return it->second;
    }
    auto docs = std::make_shared<std::vector<DocumentPtr>>();
    uint32_t seq = 0;
    for (const std::filesystem::path& path : list_collection_files(dir)) {
        docs->push_back(parse_document_bytes(read_file_bytes(path), 0, seq, path.string()));
        ++seq;
    }
    std::lock_guard<std::mutex> lock(mutex_);
    return collections_.emplace(key, std::move(docs)).first->second;
}

} // namespace xq
