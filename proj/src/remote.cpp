// Remote completion backend. Kept in its own translation unit so the HTTP
// stack is only compiled once.

#include <thread>

#include "httplib.h"
#include <nlohmann/json.hpp>

#include "factcheck/llm.hpp"

namespace factcheck {

using json = nlohmann::json;

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw InvalidConfig("remote backend needs an endpoint");
    if (config_.model.empty()) throw InvalidConfig("remote backend needs a model name");
}

// Model is folded into the id so cache keys distinguish models.
std::string RemoteBackend::id() const { return "remote:" + config_.model; }

CompletionResponse RemoteBackend::complete(const CompletionRequest& request,
                                           int /*sample_ordinal*/) {
    request.params.validate();
    calls_.fetch_add(1);

    json body = {
        {"model", config_.model},
        {"prompt", request.prompt},
        {"temperature", request.params.temperature},
        {"max_tokens", request.params.max_tokens},
    };
    httplib::Headers headers;
    if (!config_.auth_token.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.auth_token);
    }

    std::string last_error;
    auto backoff = config_.initial_backoff;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        httplib::Client client(config_.endpoint);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
            config_.timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(
            config_.timeout));
        auto result = client.Post(config_.path, headers, body.dump(), "application/json");
        if (!result) {
            last_error = httplib::to_string(result.error());
            continue;  // transport failure, retry
        }
        if (result->status == 429) {
            throw QuotaExceeded("HTTP 429 from " + config_.endpoint + ": " + result->body);
        }
        if (result->status >= 500) {
            last_error = "HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200) {
            throw BackendUnreachable("HTTP " + std::to_string(result->status) + " from " +
                                     config_.endpoint + ": " + result->body);
        }
        try {
            json doc = json::parse(result->body);
            return CompletionResponse{doc.at("choices").at(0).at("text").get<std::string>(),
                                      id(), false};
        } catch (const json::exception& e) {
            throw BackendUnreachable("malformed completion response: " + std::string(e.what()));
        }
    }
    throw BackendUnreachable(config_.endpoint + " after " +
                             std::to_string(config_.max_retries + 1) +
                             " attempts: " + last_error);
}

}  // namespace factcheck
