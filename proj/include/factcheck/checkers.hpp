#pragma once

#include <set>
#include <string>
#include <vector>

#include "factcheck/core.hpp"
#include "factcheck/llm.hpp"
#include "factcheck/prompts.hpp"

namespace factcheck {

// How evidence votes are combined across the n samples.
//   SetLevel:    the full selected set is one vote; the modal set wins.
//   PerSentence: a sentence is selected when it appears in a strict majority
//                of parseable samples.
enum class EvidenceVoteMode { SetLevel, PerSentence };

// Sampling knobs for the four checker modules. The per-module temperature
// defaults are the pipeline's operating points; override via config.
struct CheckerSettings {
    double temp_claim_processor = 0.2;
    double temp_query_generator = 0.5;
    double temp_evidence_seeker = 0.8;
    double temp_verdict_counselor = 0.8;
    double temp_policy_agent = 0.2;
    int max_tokens = 512;
    int votes = 5;  // majority-vote sample count for evidence and verdicts
    bool evidence_per_passage = true;  // one prompt per passage, union of selections
    EvidenceVoteMode evidence_vote = EvidenceVoteMode::SetLevel;
    bool resample_unparseable = false;

    void validate() const;
};

struct CheckerContext {
    CompletionBackend& backend;
    const PromptLibrary& prompts;
    CheckerSettings settings;
};

// One prompt round-trip, kept for the trace.
struct ModuleCall {
    std::string prompt;
    std::vector<std::string> completions;  // raw, in issue order
};

// ---------------------------------------------------------------------------
// Output parsing helpers (exposed for tests)
// ---------------------------------------------------------------------------

// Lines with a leading enumerator ("1." or "1)"); other lines are skipped.
std::vector<std::string> parse_enumerated_lines(const std::string& text);

// Every "[page, idx]" group in `text` that resolves against the candidate
// sentences; out-of-range and unknown-page refs are discarded. Returned refs
// carry the resolved sentence text.
std::set<SentenceRef> parse_sentence_refs(const std::string& text,
                                          const std::vector<Passage>& passages);

// "[page, idx] text" rendering used by prompts and output.
std::string render_sentence_line(const SentenceRef& ref);

// ---------------------------------------------------------------------------
// The four checker modules
// ---------------------------------------------------------------------------

struct ClaimsResult {
    std::vector<Claim> claims;
    std::vector<ModuleCall> calls;
};

// Decomposes input text into simple claims, one per enumerated output line.
// Claim ids are "<base_id>#<k>", 1-based. Throws EmptyDecomposition when the
// completion has no parseable line.
ClaimsResult process_claims(CheckerContext& ctx, const std::string& input_text,
                            const std::string& base_id);

struct QueriesResult {
    std::vector<SearchQuery> queries;
    std::vector<ModuleCall> calls;
};

// 1..max_queries distinct search queries in generation order. Duplicates
// (case/whitespace/underscore-insensitive) collapse onto the first
// occurrence. Throws EmptyQuerySet.
QueriesResult generate_queries(CheckerContext& ctx, const Claim& claim, int max_queries);

struct EvidenceResult {
    std::vector<SentenceRef> evidence;  // sorted by (page_id, sent_idx)
    std::vector<ModuleCall> calls;
};

// Selects evidence sentences for the claim from the supplied passages via a
// majority vote over settings.votes samples. Every returned ref resolves
// within `passages`. An empty result means no evidence found.
EvidenceResult seek_evidence(CheckerContext& ctx, const Claim& claim,
                             const std::vector<Passage>& passages);

struct VerdictResult {
    Verdict verdict;
    std::vector<ModuleCall> calls;
    std::string note;  // e.g. the no-evidence short-circuit
};

// Majority-vote verdict for the claim given resolved evidence sentences.
// Empty evidence under the Fever scheme yields NotEnoughInfo without calling
// the backend. AllSamplesUnparseable is rethrown with the claim id attached.
VerdictResult predict_verdict(CheckerContext& ctx, const Claim& claim,
                              const std::vector<SentenceRef>& evidence,
                              LabelScheme scheme);

// Folds per-sub-claim verdicts (all Wice scheme) into one Verdict whose
// vote_distribution is the label histogram of the inputs.
Verdict aggregate_verdicts(const std::vector<Verdict>& verdicts);

}  // namespace factcheck
