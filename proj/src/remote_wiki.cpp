// Remote wiki client. Optional backing for CorpusStore-style retrieval; the
// evaluation flow always uses local snapshots so gold sentence indices align.

#include "httplib.h"
#include <nlohmann/json.hpp>

#include "factcheck/corpus.hpp"

namespace factcheck {

using json = nlohmann::json;

namespace {

// Naive segmentation: break after . ! ? followed by whitespace. Good enough
// for interactive checking; never used where gold indices matter.
std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\n') {
            if (!trim(current).empty()) out.push_back(trim(current));
            current.clear();
            continue;
        }
        current.push_back(c);
        if ((c == '.' || c == '!' || c == '?') && i + 1 < text.size() &&
            std::isspace(static_cast<unsigned char>(text[i + 1]))) {
            if (!trim(current).empty()) out.push_back(trim(current));
            current.clear();
        }
    }
    if (!trim(current).empty()) out.push_back(trim(current));
    return out;
}

json api_get(const std::string& endpoint, const httplib::Params& params) {
    httplib::Client client(endpoint);
    client.set_follow_location(true);
    auto result = client.Get("/w/api.php", params, httplib::Headers{});
    if (!result) {
        throw BackendUnreachable(endpoint + ": " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw BackendUnreachable(endpoint + ": HTTP " + std::to_string(result->status));
    }
    try {
        return json::parse(result->body);
    } catch (const json::exception& e) {
        throw BackendUnreachable("malformed wiki response: " + std::string(e.what()));
    }
}

}  // namespace

RemoteWikiClient::RemoteWikiClient(std::string endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.empty()) throw InvalidConfig("remote wiki client needs an endpoint");
}

Passage RemoteWikiClient::get_page(const std::string& title) const {
    json doc = api_get(endpoint_, {{"action", "query"},
                                   {"prop", "extracts"},
                                   {"explaintext", "1"},
                                   {"redirects", "1"},
                                   {"titles", title},
                                   {"format", "json"}});
    const auto& pages = doc.at("query").at("pages");
    for (const auto& [key, page] : pages.items()) {
        if (key == "-1" || !page.contains("extract")) continue;
        Passage passage;
        passage.page_id = normalize_title(page.value("title", title));
        passage.sentences = split_sentences(page.at("extract").get<std::string>());
        return passage;
    }
    throw PageNotFound(title);
}

std::vector<Passage> RemoteWikiClient::search(const SearchQuery& query, int top_k) const {
    if (top_k < 1) throw InvalidConfig("search top_k must be >= 1");
    json doc = api_get(endpoint_, {{"action", "query"},
                                   {"list", "search"},
                                   {"srsearch", query.text},
                                   {"srlimit", std::to_string(top_k)},
                                   {"format", "json"}});
    std::vector<Passage> results;
    for (const auto& hit : doc.at("query").at("search")) {
        if (results.size() >= static_cast<size_t>(top_k)) break;
        try {
            results.push_back(get_page(hit.at("title").get<std::string>()));
        } catch (const PageNotFound&) {
            // provider listed a page it cannot extract; skip it
        }
    }
    return results;
}

}  // namespace factcheck
