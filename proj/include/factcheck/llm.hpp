#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "factcheck/errors.hpp"

namespace factcheck {

struct SamplingParams {
    double temperature = 0.2;  // [0, 2]
    int max_tokens = 512;      // > 0
    std::optional<int64_t> seed;  // honored only by deterministic backends

    void validate() const;
};

struct CompletionRequest {
    std::string prompt;
    SamplingParams params;
};

struct CompletionResponse {
    std::string text;  // the backend's raw output, no trimming
    std::string backend_id;
    bool cached = false;
};

// Text-completion backend. Implementations must be safe to share across
// concurrent tasks. `sample_ordinal` distinguishes the i-th sample of a
// majority vote; plain calls pass 0.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    virtual std::string id() const = 0;
    virtual CompletionResponse complete(const CompletionRequest& request,
                                        int sample_ordinal) = 0;

    CompletionResponse complete(const CompletionRequest& request) {
        return complete(request, 0);
    }

    // Total completions issued. Observable so tests can assert a stage never
    // reached the backend.
    virtual long calls() const = 0;
};

// Deterministic replay backend: a tape of prompt-key -> ordered responses.
//
// Key resolution: an entry matches when its key equals the prompt or occurs
// as a substring of it. Among matches the longest key wins; equal lengths
// break lexicographically. Sample ordinal i yields entry i of the response
// list, clamped to the last entry, so a one-entry list answers every vote of
// a unanimous tape. The whole lookup is a pure function of
// (prompt, sample_ordinal), which is what makes runs bit-reproducible.
class ScriptedBackend : public CompletionBackend {
public:
    explicit ScriptedBackend(std::map<std::string, std::vector<std::string>> tape);

    // Loads a JSON object {key: [response, ...]} from a file.
    static ScriptedBackend from_file(const std::filesystem::path& path);
    static std::map<std::string, std::vector<std::string>> load_tape(
        const std::filesystem::path& path);

    std::string id() const override { return "scripted"; }
    using CompletionBackend::complete;
    CompletionResponse complete(const CompletionRequest& request,
                                int sample_ordinal) override;
    long calls() const override { return calls_.load(); }

private:
    std::map<std::string, std::vector<std::string>> tape_;
    std::atomic<long> calls_{0};
};

// Remote HTTP text-completion backend. Speaks a {model, prompt, temperature,
// max_tokens} JSON wire protocol and reads choices[0].text back. Transient
// transport failures and 5xx responses are retried with exponential backoff;
// HTTP 429 surfaces as QuotaExceeded without retry.
struct RemoteBackendConfig {
    std::string endpoint;                   // e.g. "http://localhost:8080"
    std::string path = "/v1/completions";
    std::string model;
    std::string auth_token;                 // empty = no Authorization header
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{250};
    std::chrono::milliseconds timeout{30000};
};

class RemoteBackend : public CompletionBackend {
public:
    explicit RemoteBackend(RemoteBackendConfig config);

    std::string id() const override;
    using CompletionBackend::complete;
    CompletionResponse complete(const CompletionRequest& request,
                                int sample_ordinal) override;
    long calls() const override { return calls_.load(); }

private:
    RemoteBackendConfig config_;
    std::atomic<long> calls_{0};
};

// Persistent response cache wrapping another backend. Records live in a
// content-addressed directory, one request/response record per file, each a
// single line of structured text. The key hash covers backend id, prompt,
// temperature, max_tokens and the sample ordinal, so voting samples are
// cached distinctly. Never changes observable text.
class CachingBackend : public CompletionBackend {
public:
    CachingBackend(std::shared_ptr<CompletionBackend> inner,
                   std::filesystem::path cache_dir);

    std::string id() const override { return inner_->id(); }
    using CompletionBackend::complete;
    CompletionResponse complete(const CompletionRequest& request,
                                int sample_ordinal) override;
    long calls() const override { return inner_->calls(); }

private:
    std::filesystem::path record_path(const CompletionRequest& request,
                                      int sample_ordinal) const;

    std::shared_ptr<CompletionBackend> inner_;
    std::filesystem::path dir_;
    std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Majority voting
// ---------------------------------------------------------------------------

template <typename Candidate>
struct VoteResult {
    Candidate winner{};
    std::map<Candidate, int> distribution;  // parseable outcomes only
    std::vector<std::string> raw_samples;   // every completion, issue order
};

// Issues n samples (ordinals fixed by issue order before dispatch), parses
// each, drops unparseable ones from the tally, and returns the modal
// candidate. Tie-break: the candidate whose earliest-issued sample comes
// first wins. With resample_unparseable, up to n replacement samples (at
// ordinals n..2n-1) stand in for failed parses. Throws AllSamplesUnparseable
// when nothing parses.
template <typename Candidate, typename Parse>
VoteResult<Candidate> majority_vote(CompletionBackend& backend,
                                    const CompletionRequest& request, int n,
                                    Parse&& parse,
                                    bool resample_unparseable = false) {
    if (n < 1) throw InvalidConfig("majority_vote requires n >= 1");
    VoteResult<Candidate> result;
    std::vector<Candidate> parsed;  // issue order
    int next_ordinal = n;
    for (int i = 0; i < n; ++i) {
        CompletionResponse response = backend.complete(request, i);
        result.raw_samples.push_back(response.text);
        std::optional<Candidate> candidate = parse(response.text);
        if (!candidate && resample_unparseable && next_ordinal < 2 * n) {
            response = backend.complete(request, next_ordinal++);
            result.raw_samples.push_back(response.text);
            candidate = parse(response.text);
        }
        if (candidate) parsed.push_back(std::move(*candidate));
    }
    if (parsed.empty()) {
        throw AllSamplesUnparseable(std::to_string(n) + " samples, none parsed");
    }
    for (const Candidate& c : parsed) ++result.distribution[c];
    int best = 0;
    for (const Candidate& c : parsed) {  // issue order makes the tie-break
        int count = result.distribution[c];
        if (count > best) {
            best = count;
            result.winner = c;
        }
    }
    return result;
}

}  // namespace factcheck
