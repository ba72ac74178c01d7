#pragma once

#include <stdexcept>
#include <string>

namespace factcheck {

// Base class for all errors raised by the pipeline.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A completion could not be mapped onto any label of the requested scheme.
// Signals a malformed completion; callers may re-sample or drop the vote.
class UnrecognizedLabel : public Error {
public:
    explicit UnrecognizedLabel(const std::string& raw)
        : Error("unrecognized label: \"" + raw + "\""), raw_(raw) {}
    const std::string& raw() const { return raw_; }

private:
    std::string raw_;
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what_arg) : Error("empty input: " + what_arg) {}
};

class SchemeMismatch : public Error {
public:
    explicit SchemeMismatch(const std::string& msg) : Error("scheme mismatch: " + msg) {}
};

// Scripted backend has no entry matching the prompt.
class ScriptMiss : public Error {
public:
    explicit ScriptMiss(const std::string& prompt_key)
        : Error("scripted backend has no entry for prompt: \"" + prompt_key + "\""),
          prompt_key_(prompt_key) {}
    const std::string& prompt_key() const { return prompt_key_; }

private:
    std::string prompt_key_;
};

class BackendUnreachable : public Error {
public:
    explicit BackendUnreachable(const std::string& msg) : Error("backend unreachable: " + msg) {}
};

class QuotaExceeded : public Error {
public:
    explicit QuotaExceeded(const std::string& msg) : Error("quota exceeded: " + msg) {}
};

// Every sample of a majority vote failed to parse; the caller decides fallback.
class AllSamplesUnparseable : public Error {
public:
    explicit AllSamplesUnparseable(const std::string& msg)
        : Error("all samples unparseable: " + msg) {}
};

class EmptyDecomposition : public Error {
public:
    explicit EmptyDecomposition(const std::string& msg)
        : Error("claim processor produced no parseable claims: " + msg) {}
};

class EmptyQuerySet : public Error {
public:
    explicit EmptyQuerySet(const std::string& msg)
        : Error("query generator produced no parseable queries: " + msg) {}
};

class PageNotFound : public Error {
public:
    explicit PageNotFound(const std::string& title)
        : Error("page not found: \"" + title + "\""), title_(title) {}
    const std::string& title() const { return title_; }

private:
    std::string title_;
};

// Malformed line in a structured-text input file.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& reason)
        : Error("parse error at line " + std::to_string(line) + ": " + reason),
          line_(line),
          reason_(reason) {}
    int line() const { return line_; }
    const std::string& reason() const { return reason_; }

private:
    int line_;
    std::string reason_;
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& msg) : Error("invalid config: " + msg) {}
};

// State machine reached a state with no legal action. Always a bug; fail fast.
class NoLegalAction : public Error {
public:
    explicit NoLegalAction(const std::string& msg) : Error("no legal action: " + msg) {}
};

}  // namespace factcheck
