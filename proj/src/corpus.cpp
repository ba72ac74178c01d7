#include "factcheck/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace factcheck {

using json = nlohmann::json;

std::string normalize_title(std::string_view title) {
    std::string out = trim(title);
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::filesystem::path> jsonl_files(const std::filesystem::path& input) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(input)) {
        for (const auto& entry : std::filesystem::directory_iterator(input)) {
            if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(input);
    }
    return files;
}

}  // namespace

CorpusStore CorpusStore::load_snapshot(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw InvalidConfig("corpus snapshot directory does not exist: " + dir.string());
    }
    CorpusStore store;
    for (const auto& path : jsonl_files(dir)) {
        std::ifstream in(path);
        if (!in) throw InvalidConfig("cannot open snapshot file: " + path.string());
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            try {
                json record = json::parse(line);
                Passage passage;
                passage.page_id = normalize_title(record.at("title").get<std::string>());
                for (const auto& s : record.at("sentences")) {
                    passage.sentences.push_back(s.get<std::string>());
                }
                if (passage.page_id.empty()) throw ParseError(line_no, "empty title");
                store.insert(std::move(passage));
            } catch (const json::exception& e) {
                throw ParseError(line_no, std::string(e.what()) + " in " + path.string());
            }
        }
    }
    return store;
}

CorpusStore CorpusStore::from_passages(std::vector<Passage> passages) {
    CorpusStore store;
    for (auto& p : passages) {
        p.page_id = normalize_title(p.page_id);
        store.insert(std::move(p));
    }
    return store;
}

void CorpusStore::insert(Passage passage) {
    auto [it, inserted] = index_.emplace(passage.page_id, pages_.size());
    if (!inserted) {
        pages_[it->second] = std::move(passage);  // last record wins
        return;
    }
    pages_.push_back(std::move(passage));
}

const Passage& CorpusStore::get_page(const std::string& title) const {
    auto it = index_.find(normalize_title(title));
    if (it == index_.end()) throw PageNotFound(title);
    return pages_[it->second];
}

bool CorpusStore::has_page(const std::string& title) const {
    return index_.count(normalize_title(title)) > 0;
}

std::vector<Passage> CorpusStore::search(const SearchQuery& query, int top_k) const {
    if (top_k < 1) throw InvalidConfig("search top_k must be >= 1");
    std::vector<Passage> results;
    const std::string wanted = normalize_title(query.text);
    if (auto it = index_.find(wanted); it != index_.end()) {
        results.push_back(pages_[it->second]);
    }

    // Containment candidates, ranked by ascending title length then title.
    std::vector<const Passage*> candidates;
    const std::string needle = to_lower(wanted);
    if (!needle.empty()) {
        for (const Passage& page : pages_) {
            if (!results.empty() && page.page_id == results.front().page_id) continue;
            if (to_lower(page.page_id).find(needle) != std::string::npos) {
                candidates.push_back(&page);
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Passage* a, const Passage* b) {
        if (a->page_id.size() != b->page_id.size()) {
            return a->page_id.size() < b->page_id.size();
        }
        return a->page_id < b->page_id;
    });
    for (const Passage* page : candidates) {
        if (results.size() >= static_cast<size_t>(top_k)) break;
        results.push_back(*page);
    }
    if (results.size() > static_cast<size_t>(top_k)) results.resize(top_k);
    return results;
}

size_t ingest_wiki_dump(const std::filesystem::path& input,
                        const std::filesystem::path& out_dir) {
    if (!std::filesystem::exists(input)) {
        throw InvalidConfig("ingest input does not exist: " + input.string());
    }
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / "pages.jsonl");
    if (!out) throw InvalidConfig("cannot write snapshot to: " + out_dir.string());

    size_t written = 0;
    for (const auto& path : jsonl_files(input)) {
        std::ifstream in(path);
        if (!in) throw InvalidConfig("cannot open dump file: " + path.string());
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            json record;
            try {
                record = json::parse(line);
            } catch (const json::exception& e) {
                throw ParseError(line_no, std::string(e.what()) + " in " + path.string());
            }
            const std::string title = normalize_title(record.value("id", ""));
            if (title.empty()) continue;  // dumps carry empty filler records

            // "lines" is index TAB text [TAB link...]; indices may skip, and
            // the gap slots must survive as empty strings.
            std::vector<std::string> sentences;
            std::istringstream rows(record.value("lines", ""));
            std::string row;
            while (std::getline(rows, row)) {
                size_t tab = row.find('\t');
                if (tab == std::string::npos) continue;
                const std::string idx_text = row.substr(0, tab);
                char* parse_end = nullptr;
                long idx = std::strtol(idx_text.c_str(), &parse_end, 10);
                if (parse_end == idx_text.c_str() || *parse_end != '\0' || idx < 0) continue;
                size_t next_tab = row.find('\t', tab + 1);
                std::string sentence = next_tab == std::string::npos
                                           ? row.substr(tab + 1)
                                           : row.substr(tab + 1, next_tab - tab - 1);
                if (sentences.size() <= static_cast<size_t>(idx)) {
                    sentences.resize(idx + 1);
                }
                sentences[idx] = std::move(sentence);
            }

            json snapshot_record = {{"title", title}, {"sentences", sentences}};
            out << snapshot_record.dump() << "\n";
            ++written;
        }
    }
    return written;
}

}  // namespace factcheck
