#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "factcheck/core.hpp"
#include "factcheck/policy.hpp"

namespace factcheck {

// ---------------------------------------------------------------------------
// Benchmark records
// ---------------------------------------------------------------------------

// A three-way-scheme record verified against a page corpus. Gold evidence
// comes as alternative groups: each group alone suffices to decide the claim.
struct FeverRecord {
    std::string id;
    std::string claim;
    Label label = Label::NotEnoughInfo;
    std::vector<std::vector<SentenceRef>> evidence_groups;
};

// A citation-grounded record: the claim is checked against the sentences of
// the article it cites, so the record itself carries the only passage. Gold
// supporting sentences come as alternative index sets; sub-claim fields are
// present only in decomposed releases.
struct WiceRecord {
    std::string id;
    std::string claim;
    Label label = Label::NotSupported;
    std::vector<std::string> evidence_sentences;
    std::vector<std::vector<int>> supporting_groups;
    std::vector<std::string> subclaims;
    std::vector<std::vector<int>> subclaim_supporting;  // aligned with subclaims
};

// Line-delimited records, one JSON object per line; field names follow the
// public releases (see README for the schemas). Both loaders report
// malformed input as ParseError with the line number and enforce the record
// invariants (an undecidable record carries no evidence; a decidable one
// carries at least one non-empty group; indices stay in range).
std::vector<FeverRecord> load_fever(const std::filesystem::path& path);
std::vector<WiceRecord> load_wice(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Sentence-level precision/recall/F1 of `predicted` against the union of the
// gold groups. Empty prediction scores 0 precision by convention; F1 is the
// harmonic mean, 0 when both P and R are 0. Pre: gold_groups carry at least
// one sentence (callers exclude records that need no evidence).
Prf evidence_prf(const std::set<SentenceRef>& predicted,
                 const std::vector<std::vector<SentenceRef>>& gold_groups);

struct FeverRow {
    Label predicted = Label::NotEnoughInfo;
    std::set<SentenceRef> predicted_evidence;
    Label gold = Label::NotEnoughInfo;
    std::vector<std::vector<SentenceRef>> gold_groups;
};

// Strict-accuracy hit: the label must match, and decidable rows must also
// cover at least one full gold group with the predicted evidence.
bool fever_row_hit(const FeverRow& row);

// Mean of fever_row_hit over the rows. Throws SchemeMismatch on labels
// outside the three-way scheme, EmptyInput on no rows.
double fever_score(const std::vector<FeverRow>& rows);

// rows are (predicted, gold) pairs.
double label_accuracy(const std::vector<std::pair<Label, Label>>& rows);

// Macro F1 over the scheme's classes; classes absent from both predictions
// and golds are excluded from the average. The optional-prediction overload
// treats a missing prediction as a false negative for the gold class (how
// failed pipeline runs are scored).
double macro_f1(const std::vector<std::pair<Label, Label>>& rows, LabelScheme scheme);
double macro_f1(const std::vector<std::pair<std::optional<Label>, Label>>& rows,
                LabelScheme scheme);

// ---------------------------------------------------------------------------
// Batch evaluation
// ---------------------------------------------------------------------------

struct EvalOptions {
    int jobs = 0;  // worker threads; 0 = logical core count
};

struct RecordOutcome {
    std::string id;
    Label gold = Label::NotEnoughInfo;
    std::optional<Label> predicted;  // disengaged = pipeline failure
    std::set<SentenceRef> predicted_evidence;
    std::vector<std::vector<SentenceRef>> gold_groups;
    bool requires_evidence = false;
    bool failed = false;
    std::string error;
};

struct EvalReport {
    LabelScheme scheme = LabelScheme::Fever;
    std::string dataset_path;
    PipelineConfig config;
    int jobs = 1;
    int n_records = 0;
    int n_failures = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    // Disengaged when the golden-sentence ablation makes them meaningless
    // (fever_score additionally only exists under the three-way scheme).
    std::optional<double> fever_score;
    std::optional<Prf> evidence_macro;  // per-record average; headline value
    std::optional<Prf> evidence_micro;  // pooled counts
    std::vector<RecordOutcome> outcomes;  // dataset order

    // Machine-readable report. Deterministic: identical inputs serialize
    // byte-identically (no timestamps; wall-clock stays on the console).
    std::string to_json_text() const;

    // Console table in the conventional column order:
    //   three-way: fever score, accuracy, evidence F1/P/R
    //   citation:  macro F1, accuracy, evidence F1/P/R
    // Values scaled to percentages, absent cells rendered as "-".
    std::string table_header() const;
    std::string table_row() const;
};

// Runs the full pipeline per record under `config`, scoring failures as
// incorrect (they stay in every denominator). Throws on systemic problems
// (empty dataset, invalid config); per-record errors are recorded on the
// outcome rows. evaluate_fever needs deps.corpus for retrieval flows;
// evaluate_wice checks each claim against its record's cited passage and
// rejects the golden-document flag (the citation already pins the document).
EvalReport evaluate_fever(const std::vector<FeverRecord>& records,
                          const PipelineConfig& config, const PipelineDeps& deps,
                          const EvalOptions& options = {});
EvalReport evaluate_wice(const std::vector<WiceRecord>& records,
                         const PipelineConfig& config, const PipelineDeps& deps,
                         const EvalOptions& options = {});

}  // namespace factcheck
