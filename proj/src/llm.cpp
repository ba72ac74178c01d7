#include "factcheck/llm.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace factcheck {

using json = nlohmann::json;

void SamplingParams::validate() const {
    if (temperature < 0.0 || temperature > 2.0) {
        throw InvalidConfig("temperature must be in [0, 2], got " +
                            std::to_string(temperature));
    }
    if (max_tokens <= 0) {
        throw InvalidConfig("max_tokens must be positive, got " +
                            std::to_string(max_tokens));
    }
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::map<std::string, std::vector<std::string>> tape)
    : tape_(std::move(tape)) {}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
    return ScriptedBackend(load_tape(path));
}

std::map<std::string, std::vector<std::string>> ScriptedBackend::load_tape(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open scripted tape: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(1, "tape is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ParseError(1, "tape must be a JSON object");
    std::map<std::string, std::vector<std::string>> tape;
    for (auto& [key, value] : doc.items()) {
        if (value.is_string()) {
            tape[key] = {value.get<std::string>()};
        } else if (value.is_array()) {
            std::vector<std::string> responses;
            for (auto& item : value) {
                if (!item.is_string()) {
                    throw ParseError(1, "tape entry \"" + key + "\" has a non-string response");
                }
                responses.push_back(item.get<std::string>());
            }
            if (responses.empty()) {
                throw ParseError(1, "tape entry \"" + key + "\" has no responses");
            }
            tape[key] = std::move(responses);
        } else {
            throw ParseError(1, "tape entry \"" + key + "\" must be a string or string array");
        }
    }
    return tape;
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& request,
                                             int sample_ordinal) {
    request.params.validate();
    calls_.fetch_add(1);

    const std::vector<std::string>* responses = nullptr;
    if (auto it = tape_.find(request.prompt); it != tape_.end()) {
        responses = &it->second;  // exact match wins outright
    } else {
        const std::string* best_key = nullptr;
        for (const auto& [key, value] : tape_) {
            if (request.prompt.find(key) == std::string::npos) continue;
            if (!best_key || key.size() > best_key->size() ||
                (key.size() == best_key->size() && key < *best_key)) {
                best_key = &key;
                responses = &value;
            }
        }
    }
    if (!responses) {
        std::string excerpt = request.prompt.substr(0, 160);
        throw ScriptMiss(excerpt);
    }
    size_t idx = std::min<size_t>(std::max(sample_ordinal, 0), responses->size() - 1);
    return CompletionResponse{(*responses)[idx], id(), false};
}

// ---------------------------------------------------------------------------
// CachingBackend
// ---------------------------------------------------------------------------

namespace {

// FNV-1a, 64 bit: stable across platforms and runs, which std::hash is not.
uint64_t fnv1a(uint64_t h, std::string_view s) {
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace

CachingBackend::CachingBackend(std::shared_ptr<CompletionBackend> inner,
                               std::filesystem::path cache_dir)
    : inner_(std::move(inner)), dir_(std::move(cache_dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path CachingBackend::record_path(const CompletionRequest& request,
                                                  int sample_ordinal) const {
    uint64_t h = 1469598103934665603ULL;
    h = fnv1a(h, inner_->id());
    h = fnv1a(h, "\x1f");
    h = fnv1a(h, request.prompt);
    h = fnv1a(h, "\x1f");
    h = fnv1a(h, std::to_string(request.params.temperature));
    h = fnv1a(h, "\x1f");
    h = fnv1a(h, std::to_string(request.params.max_tokens));
    h = fnv1a(h, "\x1f");
    h = fnv1a(h, std::to_string(sample_ordinal));
    std::string name = hex64(h);
    return dir_ / name.substr(0, 2) / (name + ".json");
}

CompletionResponse CachingBackend::complete(const CompletionRequest& request,
                                            int sample_ordinal) {
    const auto path = record_path(request, sample_ordinal);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        std::ifstream in(path);
        if (in) {
            json record;
            in >> record;
            return CompletionResponse{record.at("text").get<std::string>(),
                                      record.at("backend_id").get<std::string>(), true};
        }
    }
    CompletionResponse response = inner_->complete(request, sample_ordinal);
    json record = {
        {"backend_id", response.backend_id},
        {"prompt", request.prompt},
        {"temperature", request.params.temperature},
        {"max_tokens", request.params.max_tokens},
        {"ordinal", sample_ordinal},
        {"text", response.text},
    };
    std::lock_guard<std::mutex> lock(mutex_);
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << record.dump() << "\n";
    return response;
}

}  // namespace factcheck
