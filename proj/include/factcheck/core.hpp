#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factcheck/errors.hpp"

namespace factcheck {

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

enum class LabelScheme { Fever, Wice };

enum class Label {
    Supported,
    Refuted,
    NotEnoughInfo,
    PartiallySupported,
    NotSupported,
};

// The labels a scheme admits, in canonical order.
std::span<const Label> scheme_labels(LabelScheme scheme);

bool label_in_scheme(Label label, LabelScheme scheme);

// Canonical rendering, e.g. Label::NotEnoughInfo -> "NotEnoughInfo".
// parse_label(render_label(l), scheme) == l for every l in the scheme.
std::string_view render_label(Label label);

std::string_view render_scheme(LabelScheme scheme);

// Parses "fever" / "wice" (case-insensitive).
LabelScheme parse_scheme(std::string_view name);

// Normalizes LLM free-text into a scheme label. Matching is case-insensitive
// and tolerant of punctuation and whitespace; recognized synonyms are listed
// in the versioned table in core.cpp. Throws UnrecognizedLabel when nothing
// in the scheme's label set matches.
Label parse_label(std::string_view raw, LabelScheme scheme);

// Version tag of the label synonym table. Bump when entries change.
extern const int kLabelSynonymTableVersion;

// All Supported -> Supported; all NotSupported -> NotSupported; any other
// mix (including any PartiallySupported element) -> PartiallySupported.
// Inputs must be Wice labels. Throws EmptyInput / SchemeMismatch.
Label aggregate_subclaim_labels(const std::vector<Label>& labels);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// A unit of verifiable text with provenance back to its source input.
struct Claim {
    std::string id;
    std::string text;
    // Character offsets into the original input, when the claim was cut
    // verbatim from it.
    std::optional<std::pair<size_t, size_t>> source_span;
};

struct SearchQuery {
    std::string text;
    int rank = 1;  // order of generation, 1-based

    bool operator==(const SearchQuery&) const = default;
};

// A sentence-indexed document. The sentence index IS the evidence identifier,
// so the list must stay index-stable; empty strings are placeholder slots
// kept to preserve a source corpus's numbering.
struct Passage {
    std::string page_id;  // normalized title
    std::vector<std::string> sentences;
};

// A (page, sentence-index) evidence pointer. Equality and ordering ignore the
// cached text: metrics and gold annotations compare identifiers only.
struct SentenceRef {
    std::string page_id;
    int sent_idx = 0;
    std::optional<std::string> text;  // cached sentence, byte-for-byte

    friend bool operator==(const SentenceRef& a, const SentenceRef& b) {
        return a.page_id == b.page_id && a.sent_idx == b.sent_idx;
    }
    friend bool operator<(const SentenceRef& a, const SentenceRef& b) {
        if (a.page_id != b.page_id) return a.page_id < b.page_id;
        return a.sent_idx < b.sent_idx;
    }
};

// An entailment verdict under one scheme, with the vote histogram when
// majority voting was used (empty otherwise).
struct Verdict {
    Label label = Label::NotEnoughInfo;
    LabelScheme scheme = LabelScheme::Fever;
    std::map<Label, int> vote_distribution;
};

// ---------------------------------------------------------------------------
// Small text helpers shared across modules
// ---------------------------------------------------------------------------

std::string trim(std::string_view s);

// Lowercases and strips everything but letters and digits. This is the
// normalization behind label parsing.
std::string normalize_token(std::string_view s);

}  // namespace factcheck
