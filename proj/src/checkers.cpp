#include "factcheck/checkers.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "factcheck/corpus.hpp"

namespace factcheck {

void CheckerSettings::validate() const {
    for (double t : {temp_claim_processor, temp_query_generator, temp_evidence_seeker,
                     temp_verdict_counselor, temp_policy_agent}) {
        if (t < 0.0 || t > 2.0) {
            throw InvalidConfig("temperature must be in [0, 2], got " + std::to_string(t));
        }
    }
    if (max_tokens <= 0) throw InvalidConfig("max_tokens must be positive");
    if (votes < 1) throw InvalidConfig("vote count must be >= 1");
}

std::vector<std::string> parse_enumerated_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        size_t i = 0;
        while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
        if (i == 0 || i >= t.size()) continue;
        if (t[i] != '.' && t[i] != ')') continue;
        std::string item = trim(t.substr(i + 1));
        if (!item.empty()) out.push_back(std::move(item));
    }
    return out;
}

std::set<SentenceRef> parse_sentence_refs(const std::string& text,
                                          const std::vector<Passage>& passages) {
    std::set<SentenceRef> refs;
    size_t pos = 0;
    while ((pos = text.find('[', pos)) != std::string::npos) {
        size_t close = text.find(']', pos + 1);
        if (close == std::string::npos) break;
        std::string group = text.substr(pos + 1, close - pos - 1);
        pos = close + 1;

        // Page titles may contain commas; the index is after the last one.
        size_t comma = group.rfind(',');
        if (comma == std::string::npos) continue;
        std::string page = normalize_title(group.substr(0, comma));
        std::string idx_text = trim(group.substr(comma + 1));
        if (page.empty() || idx_text.empty()) continue;
        if (!std::all_of(idx_text.begin(), idx_text.end(),
                         [](unsigned char c) { return std::isdigit(c); })) {
            continue;
        }
        int idx = 0;
        try {
            idx = std::stoi(idx_text);
        } catch (const std::exception&) {
            continue;
        }

        // Discard anything that does not resolve within the supplied
        // passages; fabricated identifiers must not survive parsing.
        for (const Passage& passage : passages) {
            if (passage.page_id != page) continue;
            if (idx < 0 || static_cast<size_t>(idx) >= passage.sentences.size()) break;
            if (passage.sentences[idx].empty()) break;  // placeholder slot
            refs.insert(SentenceRef{page, idx, passage.sentences[idx]});
            break;
        }
    }
    return refs;
}

std::string render_sentence_line(const SentenceRef& ref) {
    std::string line = "[" + ref.page_id + ", " + std::to_string(ref.sent_idx) + "]";
    if (ref.text) {
        line += " ";
        line += *ref.text;
    }
    return line;
}

// ---------------------------------------------------------------------------
// Claim processor
// ---------------------------------------------------------------------------

ClaimsResult process_claims(CheckerContext& ctx, const std::string& input_text,
                            const std::string& base_id) {
    if (trim(input_text).empty()) throw EmptyInput("process_claims input text");
    ctx.settings.validate();

    const PromptTemplate& tpl = ctx.prompts.get("claim_processor");
    CompletionRequest request{
        tpl.render(input_text),
        SamplingParams{ctx.settings.temp_claim_processor, ctx.settings.max_tokens, {}}};
    CompletionResponse response = ctx.backend.complete(request);

    ClaimsResult result;
    result.calls.push_back(ModuleCall{request.prompt, {response.text}});
    int ordinal = 0;
    for (const std::string& line : parse_enumerated_lines(response.text)) {
        Claim claim;
        claim.id = base_id + "#" + std::to_string(++ordinal);
        claim.text = line;
        if (size_t at = input_text.find(line); at != std::string::npos) {
            claim.source_span = {at, at + line.size()};
        }
        result.claims.push_back(std::move(claim));
    }
    if (result.claims.empty()) {
        throw EmptyDecomposition("input \"" + base_id + "\"");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Query generator
// ---------------------------------------------------------------------------

namespace {

std::string query_dedup_key(const std::string& text) {
    std::string collapsed;
    bool in_space = false;
    for (char c : normalize_title(text)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !collapsed.empty()) collapsed.push_back(' ');
        in_space = false;
        collapsed.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return collapsed;
}

}  // namespace

QueriesResult generate_queries(CheckerContext& ctx, const Claim& claim, int max_queries) {
    if (max_queries < 1) throw InvalidConfig("max_queries must be >= 1");
    ctx.settings.validate();

    const PromptTemplate& tpl = ctx.prompts.get("query_generator");
    CompletionRequest request{
        tpl.render(claim.text),
        SamplingParams{ctx.settings.temp_query_generator, ctx.settings.max_tokens, {}}};
    CompletionResponse response = ctx.backend.complete(request);

    QueriesResult result;
    result.calls.push_back(ModuleCall{request.prompt, {response.text}});
    std::set<std::string> seen;
    for (const std::string& line : parse_enumerated_lines(response.text)) {
        if (!seen.insert(query_dedup_key(line)).second) continue;
        if (result.queries.size() >= static_cast<size_t>(max_queries)) break;
        result.queries.push_back(
            SearchQuery{line, static_cast<int>(result.queries.size()) + 1});
    }
    if (result.queries.empty()) throw EmptyQuerySet("claim \"" + claim.id + "\"");
    return result;
}

// ---------------------------------------------------------------------------
// Evidence seeker
// ---------------------------------------------------------------------------

namespace {

std::string render_evidence_input(const Claim& claim, const std::vector<Passage>& passages) {
    std::string out = "Passages:\n";
    for (const Passage& passage : passages) {
        for (size_t i = 0; i < passage.sentences.size(); ++i) {
            if (passage.sentences[i].empty()) continue;  // placeholder slot
            out += "[" + passage.page_id + ", " + std::to_string(i) + "] " +
                   passage.sentences[i] + "\n";
        }
    }
    out += "Claim: " + claim.text;
    return out;
}

// Runs one evidence prompt and folds its votes into `selected`.
void vote_evidence(CheckerContext& ctx, const Claim& claim,
                   const std::vector<Passage>& passages,
                   std::set<SentenceRef>& selected, std::vector<ModuleCall>& calls) {
    const PromptTemplate& tpl = ctx.prompts.get("evidence_seeker");
    CompletionRequest request{
        tpl.render(render_evidence_input(claim, passages)),
        SamplingParams{ctx.settings.temp_evidence_seeker, ctx.settings.max_tokens, {}}};

    // Every completion parses to a (possibly empty) set after the resolution
    // filter, so the vote itself cannot fail.
    auto parse = [&](const std::string& text) -> std::optional<std::set<SentenceRef>> {
        return parse_sentence_refs(text, passages);
    };

    if (ctx.settings.evidence_vote == EvidenceVoteMode::SetLevel) {
        auto vote = majority_vote<std::set<SentenceRef>>(ctx.backend, request,
                                                         ctx.settings.votes, parse,
                                                         ctx.settings.resample_unparseable);
        calls.push_back(ModuleCall{request.prompt, vote.raw_samples});
        selected.insert(vote.winner.begin(), vote.winner.end());
        return;
    }

    // Per-sentence thresholding: keep sentences picked by a strict majority
    // of the samples.
    ModuleCall call{request.prompt, {}};
    std::map<SentenceRef, int> counts;
    for (int i = 0; i < ctx.settings.votes; ++i) {
        CompletionResponse response = ctx.backend.complete(request, i);
        call.completions.push_back(response.text);
        for (const SentenceRef& ref : parse_sentence_refs(response.text, passages)) {
            ++counts[ref];
        }
    }
    calls.push_back(std::move(call));
    for (const auto& [ref, count] : counts) {
        if (2 * count > ctx.settings.votes) selected.insert(ref);
    }
}

}  // namespace

EvidenceResult seek_evidence(CheckerContext& ctx, const Claim& claim,
                             const std::vector<Passage>& passages) {
    ctx.settings.validate();
    EvidenceResult result;
    std::set<SentenceRef> selected;
    if (ctx.settings.evidence_per_passage) {
        for (const Passage& passage : passages) {
            vote_evidence(ctx, claim, {passage}, selected, result.calls);
        }
    } else if (!passages.empty()) {
        vote_evidence(ctx, claim, passages, selected, result.calls);
    }
    result.evidence.assign(selected.begin(), selected.end());
    return result;
}

// ---------------------------------------------------------------------------
// Verdict counselor
// ---------------------------------------------------------------------------

VerdictResult predict_verdict(CheckerContext& ctx, const Claim& claim,
                              const std::vector<SentenceRef>& evidence,
                              LabelScheme scheme) {
    ctx.settings.validate();
    VerdictResult result;

    // A Fever claim with no evidence is NotEnoughInfo by definition; the
    // backend is not consulted.
    if (evidence.empty() && scheme == LabelScheme::Fever) {
        result.verdict = Verdict{Label::NotEnoughInfo, scheme, {}};
        result.note = "no evidence; short-circuit to NotEnoughInfo";
        return result;
    }

    std::string input = "Evidence:\n";
    if (evidence.empty()) input += "(none)\n";
    for (const SentenceRef& ref : evidence) {
        if (!ref.text) {
            throw InvalidConfig("verdict evidence ref [" + ref.page_id + ", " +
                                std::to_string(ref.sent_idx) + "] has no resolved text");
        }
        input += render_sentence_line(ref) + "\n";
    }
    input += "Options: ";
    bool first = true;
    for (Label l : scheme_labels(scheme)) {
        if (!first) input += ", ";
        input += render_label(l);
        first = false;
    }
    input += "\nClaim: " + claim.text;

    const PromptTemplate& tpl = ctx.prompts.get("verdict_counselor");
    CompletionRequest request{
        tpl.render(input),
        SamplingParams{ctx.settings.temp_verdict_counselor, ctx.settings.max_tokens, {}}};

    auto parse = [scheme](const std::string& text) -> std::optional<Label> {
        try {
            return parse_label(text, scheme);
        } catch (const UnrecognizedLabel&) {
            return std::nullopt;
        }
    };
    try {
        auto vote = majority_vote<Label>(ctx.backend, request, ctx.settings.votes, parse,
                                         ctx.settings.resample_unparseable);
        result.calls.push_back(ModuleCall{request.prompt, vote.raw_samples});
        result.verdict = Verdict{vote.winner, scheme, vote.distribution};
    } catch (const AllSamplesUnparseable& e) {
        throw AllSamplesUnparseable("claim \"" + claim.id + "\": " + e.what());
    }
    return result;
}

Verdict aggregate_verdicts(const std::vector<Verdict>& verdicts) {
    if (verdicts.empty()) throw EmptyInput("aggregate_verdicts");
    std::vector<Label> labels;
    std::map<Label, int> histogram;
    for (const Verdict& v : verdicts) {
        if (v.scheme != LabelScheme::Wice) {
            throw SchemeMismatch("aggregate_verdicts expects Wice verdicts");
        }
        labels.push_back(v.label);
        ++histogram[v.label];
    }
    return Verdict{aggregate_subclaim_labels(labels), LabelScheme::Wice,
                   std::move(histogram)};
}

}  // namespace factcheck
