#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "factcheck/core.hpp"

namespace factcheck {

// Title normalization used everywhere a page is named: underscores become
// spaces, outer whitespace is trimmed, case is preserved. Stored page ids are
// always in this form.
std::string normalize_title(std::string_view title);

// Retrieval of sentence-indexed passages by search query. Local snapshots are
// loaded fully into memory and are read-only afterwards, so concurrent
// queries are safe.
class CorpusStore {
public:
    // Loads every *.jsonl file in the directory. One JSON record per line:
    //   {"title": "Foo Bar", "sentences": ["s0", "s1", ...]}
    // Sentence lists are stored verbatim; the array index is the evidence
    // identifier, so empty strings are legal placeholder slots.
    static CorpusStore load_snapshot(const std::filesystem::path& dir);

    // In-memory store, mainly for tests.
    static CorpusStore from_passages(std::vector<Passage> passages);

    // Exact lookup after title normalization. Throws PageNotFound.
    const Passage& get_page(const std::string& title) const;

    bool has_page(const std::string& title) const;

    // Exact title match ranks first, then case-insensitive title containment
    // ranked by ascending title length (ties lexicographic). At most top_k
    // results, unique by page_id. An empty result is valid.
    std::vector<Passage> search(const SearchQuery& query, int top_k) const;

    size_t page_count() const { return pages_.size(); }

private:
    void insert(Passage passage);

    std::vector<Passage> pages_;
    std::unordered_map<std::string, size_t> index_;  // page_id -> pages_ slot
};

// Converts a source wiki dump into the local snapshot format, preserving
// each page's sentence segmentation bit-exactly. `input` may be a dump
// directory (every *.jsonl inside) or a single file. Dump records look like
//   {"id": "Foo_Bar", "text": "...", "lines": "0\tSentence zero\n1\tSentence one\t..."}
// where each line of "lines" is: sentence index, TAB, sentence text, then
// optional TAB-separated link annotations that are dropped. Missing indices
// become empty placeholder slots so gold sentence indices stay aligned.
// Returns the number of pages written.
size_t ingest_wiki_dump(const std::filesystem::path& input,
                        const std::filesystem::path& out_dir);

// Remote wiki search client speaking the standard public search/extract HTTP
// API. Optional; never used by tests or the evaluation default. Sentence
// indices of remote pages come from naive segmentation and are not aligned
// with any dataset's gold indices.
class RemoteWikiClient {
public:
    explicit RemoteWikiClient(std::string endpoint);

    Passage get_page(const std::string& title) const;
    std::vector<Passage> search(const SearchQuery& query, int top_k) const;

private:
    std::string endpoint_;
};

}  // namespace factcheck
