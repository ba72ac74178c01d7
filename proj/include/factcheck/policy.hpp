#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "factcheck/checkers.hpp"
#include "factcheck/core.hpp"
#include "factcheck/corpus.hpp"

namespace factcheck {

// The six pre-defined pipeline actions the policy agent chooses from.
enum class Action {
    CallClaimProcessor,
    RequestQueries,
    RetrievePassages,
    CallEvidenceSeeker,
    RequestVerdict,
    SendConclusion,
};

std::string_view render_action(Action action);

// Maps free text onto an action by normalized keyword containment; nullopt
// when nothing matches.
std::optional<Action> parse_action(std::string_view text);

enum class PolicyMode { Deterministic, LlmDriven };

struct PipelineConfig {
    LabelScheme scheme = LabelScheme::Fever;
    bool claim_split = false;
    bool golden_documents = false;  // skip query + retrieval, inject gold pages
    bool golden_sentences = false;  // skip evidence seeking too, inject gold refs
    PolicyMode policy_mode = PolicyMode::Deterministic;
    int top_k = 3;        // passages kept per query
    int max_queries = 3;  // queries kept per claim
    CheckerSettings checkers;

    void validate() const;
};

// One verification job. Gold fields feed the golden-evidence ablations;
// cited_passages restricts retrieval to the given articles (no query
// generation), which is how citation-grounded records are checked.
struct CheckInput {
    std::string id;
    std::string text;
    std::vector<Passage> cited_passages;
    // golden_documents: the pages injected instead of query+retrieval.
    std::optional<std::vector<std::string>> gold_pages;
    // golden_sentences: per-claim gold evidence. Aligned with claims by
    // ordinal when the counts match; otherwise the union backs every claim.
    std::optional<std::vector<std::vector<SentenceRef>>> gold_sentence_groups;
};

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

struct TraceRecord {
    int step = 0;
    Action action = Action::SendConclusion;
    std::string claim_id;  // empty for input-level actions
    std::string detail;
    std::vector<std::string> prompts;
    std::vector<std::string> completions;  // raw completions, issue order
    std::string policy_prompt;       // LlmDriven mode only
    std::string policy_completion;   // "
    std::string parsed;  // rendered parsed output
    std::string note;    // short-circuits, policy overrides
    double duration_ms = 0.0;
};

struct CheckTrace {
    std::vector<TraceRecord> records;

    // One structured-text record per line. Timing is off by default so that
    // identical runs serialize byte-identically.
    std::string to_jsonl(bool include_timing = false) const;
    static CheckTrace from_jsonl(const std::string& text);

    // Human-readable rendering for the `trace` CLI command.
    std::string pretty() const;
};

// Module errors annotated with where the pipeline stood; the partial trace
// always rides along.
class CheckFailure : public Error {
public:
    CheckFailure(std::string claim_id, Action action, const std::string& msg,
                 CheckTrace trace)
        : Error("check failed at " + std::string(render_action(action)) +
                (claim_id.empty() ? "" : " (claim \"" + claim_id + "\")") + ": " + msg),
          claim_id_(std::move(claim_id)),
          action_(action),
          trace_(std::move(trace)) {}

    const std::string& claim_id() const { return claim_id_; }
    Action action() const { return action_; }
    const CheckTrace& partial_trace() const { return trace_; }

private:
    std::string claim_id_;
    Action action_;
    CheckTrace trace_;
};

// ---------------------------------------------------------------------------
// State machine
// ---------------------------------------------------------------------------

struct ClaimState {
    Claim claim;
    std::vector<SearchQuery> queries;
    std::vector<Passage> passages;
    std::vector<SentenceRef> evidence;
    std::optional<Verdict> verdict;
    bool queries_done = false;
    bool retrieval_done = false;
    bool evidence_done = false;
};

struct CheckState {
    CheckInput input;
    PipelineConfig config;
    std::vector<ClaimState> claims;
    bool claims_ready = false;
    std::optional<Verdict> final_verdict;
    bool concluded = false;
    // Pending annotation (gold injections, cited-passage restriction) that
    // attaches to the next trace record.
    std::string init_note;
};

// Builds the starting state: without claim_split the input text is adopted
// as the single claim outright, and gold/cited injections are applied.
CheckState init_state(CheckInput input, PipelineConfig config, const CorpusStore* corpus);

// Exactly the legal next actions for the fixed flow: claims advance in
// order, one stage at a time, and SendConclusion only unlocks when every
// claim has a verdict. Empty once concluded.
std::set<Action> allowed_actions(const CheckState& state);

struct ActionChoice {
    Action action = Action::SendConclusion;
    std::string policy_prompt;
    std::string policy_completion;
    std::string note;  // set when the policy's choice was clamped
};

// Deterministic mode returns the unique legal action. LlmDriven mode prompts
// the backend with a state summary and an action menu, then clamps the
// parsed choice to allowed_actions, falling back to the deterministic action
// (noted) on an illegal or unparseable reply. Throws NoLegalAction if the
// state machine is stuck, which is always a bug.
ActionChoice next_action(CheckState& state, CheckerContext& ctx);

// Executes one action against the state and appends its trace record.
void apply_action(CheckState& state, const ActionChoice& choice, CheckerContext& ctx,
                  const CorpusStore* corpus, CheckTrace& trace);

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

struct ClaimCheck {
    Claim claim;
    std::vector<SearchQuery> queries;
    std::vector<std::string> retrieved_pages;  // page ids, retrieval order
    std::vector<SentenceRef> evidence;
    Verdict verdict;
};

struct CheckResult {
    Verdict final_verdict;
    std::vector<ClaimCheck> claims;
    CheckTrace trace;
};

struct PipelineDeps {
    CompletionBackend& backend;
    const PromptLibrary& prompts;
    const CorpusStore* corpus = nullptr;  // required for retrieval flows
};

// Drives the state machine from the raw input to SendConclusion and returns
// the final verdict, per-claim results, and the full trace. Module errors
// surface as CheckFailure with the partial trace attached.
CheckResult run_check(const CheckInput& input, const PipelineConfig& config,
                      const PipelineDeps& deps);

}  // namespace factcheck
