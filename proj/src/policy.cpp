#include "factcheck/policy.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include <nlohmann/json.hpp>

namespace factcheck {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kActionNames[] = {
    "call claim processor", "request queries",  "retrieve passages",
    "call evidence seeker", "request verdict",  "send conclusion",
};

constexpr Action kAllActions[] = {
    Action::CallClaimProcessor, Action::RequestQueries, Action::RetrievePassages,
    Action::CallEvidenceSeeker, Action::RequestVerdict, Action::SendConclusion,
};

// Normalized keyword alternatives accepted by parse_action. No keyword of
// one action may occur inside another action's keywords.
const std::vector<std::vector<std::string>> kActionKeywords = {
    {"callclaimprocessor", "claimprocessor", "processclaims", "splitclaims", "decompose"},
    {"requestqueries", "generatequeries", "querygenerator", "searchqueries", "writequeries"},
    {"retrievepassages", "retrievedocuments", "retrieval", "retrieve"},
    {"callevidenceseeker", "evidenceseeker", "seekevidence", "selectevidence", "extractevidence"},
    {"requestverdict", "verdictcounselor", "predictverdict", "verdict"},
    {"sendconclusion", "conclusion", "conclude"},
};

ClaimState* current_claim(CheckState& state) {
    for (ClaimState& cs : state.claims)
        if (!cs.verdict) return &cs;
    return nullptr;
}

std::string current_claim_id(CheckState& state) {
    ClaimState* cs = current_claim(state);
    return cs ? cs->claim.id : std::string();
}

std::string enumerate_lines(const std::vector<std::string>& items) {
    std::ostringstream out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out << '\n';
        out << (i + 1) << ". " << items[i];
    }
    return out.str();
}

std::string join_lines(const std::vector<std::string>& items) {
    std::ostringstream out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out << '\n';
        out << items[i];
    }
    return out.str();
}

void append_note(std::string& note, std::string_view extra) {
    if (extra.empty()) return;
    if (!note.empty()) note += "; ";
    note += extra;
}

void take_calls(TraceRecord& rec, const std::vector<ModuleCall>& calls) {
    for (const ModuleCall& call : calls) {
        rec.prompts.push_back(call.prompt);
        rec.completions.insert(rec.completions.end(), call.completions.begin(),
                               call.completions.end());
    }
}

// What the policy agent is told about the pipeline's position.
std::string state_summary(const CheckState& state) {
    if (!state.claims_ready)
        return "State: input text \"" + state.input.text + "\" has not been split into claims yet.";
    for (const ClaimState& cs : state.claims) {
        if (cs.verdict) continue;
        std::string head = "State: claim \"" + cs.claim.text + "\" ";
        if (!cs.queries_done) return head + "has no search queries yet.";
        if (!cs.retrieval_done) return head + "has search queries but no passages retrieved yet.";
        if (!cs.evidence_done) return head + "has retrieved passages but no evidence selected.";
        return head + "is ready for a verdict.";
    }
    return "State: all " + std::to_string(state.claims.size()) +
           " claim(s) have verdicts; nothing is left to verify.";
}

// Applies cited-passage and gold-evidence injections to freshly materialized
// claims, pre-marking the stages they replace. The description of what was
// skipped lands on the next trace record via state.init_note.
void finalize_claims(CheckState& state, const CorpusStore* corpus) {
    const CheckInput& in = state.input;
    const PipelineConfig& cfg = state.config;

    std::vector<Passage> gold_passages;
    if (cfg.golden_documents) {
        if (!corpus) throw InvalidConfig("golden documents need a corpus to resolve pages");
        for (const std::string& title : *in.gold_pages)
            gold_passages.push_back(corpus->get_page(title));
    }

    for (size_t i = 0; i < state.claims.size(); ++i) {
        ClaimState& cs = state.claims[i];
        if (!in.cited_passages.empty()) {
            cs.passages = in.cited_passages;
            cs.queries_done = cs.retrieval_done = true;
        }
        if (cfg.golden_documents) {
            cs.passages = gold_passages;
            cs.queries_done = cs.retrieval_done = true;
            // Nothing to seek evidence in (verifiable gold pages absent, as
            // on undecidable records): behave like an empty retrieval.
            if (cs.passages.empty()) cs.evidence_done = true;
        }
        if (cfg.golden_sentences) {
            const auto& groups = *in.gold_sentence_groups;
            std::vector<SentenceRef> refs;
            if (groups.size() == state.claims.size()) {
                refs = groups[i];
            } else {
                for (const auto& group : groups)
                    refs.insert(refs.end(), group.begin(), group.end());
            }
            for (SentenceRef& ref : refs) {
                if (ref.text) continue;
                const Passage* page = nullptr;
                for (const Passage& p : cs.passages)
                    if (p.page_id == ref.page_id) page = &p;
                if (!page && corpus && corpus->has_page(ref.page_id))
                    page = &corpus->get_page(ref.page_id);
                if (page && ref.sent_idx >= 0 &&
                    ref.sent_idx < static_cast<int>(page->sentences.size()))
                    ref.text = page->sentences[ref.sent_idx];
            }
            std::sort(refs.begin(), refs.end());
            refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
            cs.evidence = std::move(refs);
            cs.queries_done = cs.retrieval_done = cs.evidence_done = true;
        }
    }

    std::string note;
    if (!in.cited_passages.empty() && !cfg.golden_documents && !cfg.golden_sentences)
        note = "retrieval restricted to the input's cited passages";
    if (cfg.golden_sentences)
        note = "gold evidence sentences injected; query, retrieval, and evidence stages skipped";
    else if (cfg.golden_documents)
        note = "gold pages injected; query and retrieval stages skipped";
    append_note(state.init_note, note);
}

// All sub-claims must hold for the composite to hold: one refutation refutes
// the whole input, and an undecidable sub-claim blocks full support.
Verdict conjoin_fever_verdicts(const std::vector<Verdict>& verdicts) {
    Verdict out;
    out.scheme = LabelScheme::Fever;
    bool any_refuted = false;
    bool any_nei = false;
    for (const Verdict& v : verdicts) {
        if (v.scheme != LabelScheme::Fever)
            throw SchemeMismatch("conjunction needs three-way verdicts");
        out.vote_distribution[v.label] += 1;
        any_refuted |= v.label == Label::Refuted;
        any_nei |= v.label == Label::NotEnoughInfo;
    }
    out.label = any_refuted ? Label::Refuted
              : any_nei    ? Label::NotEnoughInfo
                           : Label::Supported;
    return out;
}

std::string render_votes(const Verdict& v) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [label, count] : v.vote_distribution) {
        out << (first ? "" : ", ") << render_label(label) << "=" << count;
        first = false;
    }
    return out.str();
}

}  // namespace

std::string_view render_action(Action action) {
    return kActionNames[static_cast<int>(action)];
}

std::optional<Action> parse_action(std::string_view text) {
    std::string norm = normalize_token(text);
    for (size_t i = 0; i < kActionKeywords.size(); ++i)
        for (const std::string& keyword : kActionKeywords[i])
            if (norm.find(keyword) != std::string::npos) return kAllActions[i];
    return std::nullopt;
}

void PipelineConfig::validate() const {
    if (top_k < 1) throw InvalidConfig("top_k must be at least 1");
    if (max_queries < 1) throw InvalidConfig("max_queries must be at least 1");
    checkers.validate();
}

// ---------------------------------------------------------------------------
// State machine
// ---------------------------------------------------------------------------

CheckState init_state(CheckInput input, PipelineConfig config, const CorpusStore* corpus) {
    config.validate();
    if (trim(input.text).empty()) throw EmptyInput("check input has no text");
    // Presence checks only: an engaged-but-empty gold list is a legitimate
    // annotation (records needing no evidence carry none).
    if (config.golden_documents && !input.gold_pages)
        throw InvalidConfig("golden documents requested but the input carries no gold pages");
    if (config.golden_sentences && !input.gold_sentence_groups)
        throw InvalidConfig("golden sentences requested but the input carries no gold groups");

    CheckState state;
    state.input = std::move(input);
    state.config = std::move(config);
    if (!state.config.claim_split) {
        ClaimState cs;
        cs.claim.id = state.input.id;
        cs.claim.text = trim(state.input.text);
        cs.claim.source_span = {{0, state.input.text.size()}};
        state.claims.push_back(std::move(cs));
        state.claims_ready = true;
        finalize_claims(state, corpus);
    }
    return state;
}

std::set<Action> allowed_actions(const CheckState& state) {
    if (state.concluded) return {};
    if (!state.claims_ready) return {Action::CallClaimProcessor};
    for (const ClaimState& cs : state.claims) {
        if (cs.verdict) continue;
        if (!cs.queries_done) return {Action::RequestQueries};
        if (!cs.retrieval_done) return {Action::RetrievePassages};
        if (!cs.evidence_done) return {Action::CallEvidenceSeeker};
        return {Action::RequestVerdict};
    }
    return {Action::SendConclusion};
}

ActionChoice next_action(CheckState& state, CheckerContext& ctx) {
    std::set<Action> allowed = allowed_actions(state);
    if (allowed.empty()) throw NoLegalAction("the check already concluded");
    Action fallback = *allowed.begin();

    ActionChoice choice;
    choice.action = fallback;
    if (state.config.policy_mode == PolicyMode::Deterministic) return choice;

    const PromptTemplate& tpl = ctx.prompts.get("policy_agent");
    choice.policy_prompt = tpl.render(state_summary(state));
    CompletionRequest req{choice.policy_prompt,
                          {ctx.settings.temp_policy_agent, ctx.settings.max_tokens, {}}};
    choice.policy_completion = ctx.backend.complete(req).text;

    std::optional<Action> parsed = parse_action(choice.policy_completion);
    if (!parsed) {
        choice.note = "policy reply not recognized; deterministic fallback to \"" +
                      std::string(render_action(fallback)) + "\"";
    } else if (!allowed.count(*parsed)) {
        choice.note = "policy chose illegal \"" + std::string(render_action(*parsed)) +
                      "\"; overridden to \"" + std::string(render_action(fallback)) + "\"";
    } else {
        choice.action = *parsed;
    }
    return choice;
}

void apply_action(CheckState& state, const ActionChoice& choice, CheckerContext& ctx,
                  const CorpusStore* corpus, CheckTrace& trace) {
    std::set<Action> allowed = allowed_actions(state);
    if (!allowed.count(choice.action))
        throw NoLegalAction("action \"" + std::string(render_action(choice.action)) +
                            "\" is not legal in the current state");

    TraceRecord rec;
    rec.step = static_cast<int>(trace.records.size()) + 1;
    rec.action = choice.action;
    rec.claim_id = current_claim_id(state);
    rec.policy_prompt = choice.policy_prompt;
    rec.policy_completion = choice.policy_completion;
    rec.note = choice.note;

    const auto started = std::chrono::steady_clock::now();
    switch (choice.action) {
        case Action::CallClaimProcessor: {
            rec.claim_id.clear();
            ClaimsResult res = process_claims(ctx, state.input.text, state.input.id);
            for (Claim& claim : res.claims) {
                ClaimState cs;
                cs.claim = std::move(claim);
                state.claims.push_back(std::move(cs));
            }
            state.claims_ready = true;
            finalize_claims(state, corpus);
            take_calls(rec, res.calls);
            rec.detail = std::to_string(state.claims.size()) + " claim(s)";
            std::vector<std::string> texts;
            for (const ClaimState& cs : state.claims) texts.push_back(cs.claim.text);
            rec.parsed = enumerate_lines(texts);
            break;
        }
        case Action::RequestQueries: {
            ClaimState& cs = *current_claim(state);
            QueriesResult res = generate_queries(ctx, cs.claim, state.config.max_queries);
            cs.queries = std::move(res.queries);
            cs.queries_done = true;
            take_calls(rec, res.calls);
            rec.detail = std::to_string(cs.queries.size()) + " search query(ies)";
            std::vector<std::string> texts;
            for (const SearchQuery& q : cs.queries) texts.push_back(q.text);
            rec.parsed = enumerate_lines(texts);
            break;
        }
        case Action::RetrievePassages: {
            if (!corpus) throw InvalidConfig("passage retrieval requires a corpus");
            ClaimState& cs = *current_claim(state);
            std::set<std::string> seen;
            for (const SearchQuery& query : cs.queries) {
                for (Passage& page : corpus->search(query, state.config.top_k)) {
                    if (!seen.insert(page.page_id).second) continue;
                    cs.passages.push_back(std::move(page));
                }
            }
            cs.retrieval_done = true;
            rec.detail = std::to_string(cs.passages.size()) + " page(s)";
            std::vector<std::string> ids;
            for (const Passage& p : cs.passages) ids.push_back(p.page_id);
            rec.parsed = join_lines(ids);
            if (cs.passages.empty()) {
                cs.evidence_done = true;
                append_note(rec.note, "no passages retrieved; evidence stage skipped");
            }
            break;
        }
        case Action::CallEvidenceSeeker: {
            ClaimState& cs = *current_claim(state);
            EvidenceResult res = seek_evidence(ctx, cs.claim, cs.passages);
            cs.evidence = std::move(res.evidence);
            cs.evidence_done = true;
            take_calls(rec, res.calls);
            rec.detail = std::to_string(cs.evidence.size()) + " evidence sentence(s)";
            std::vector<std::string> lines;
            for (const SentenceRef& ref : cs.evidence) lines.push_back(render_sentence_line(ref));
            rec.parsed = join_lines(lines);
            break;
        }
        case Action::RequestVerdict: {
            ClaimState& cs = *current_claim(state);
            VerdictResult res = predict_verdict(ctx, cs.claim, cs.evidence, state.config.scheme);
            cs.verdict = res.verdict;
            take_calls(rec, res.calls);
            append_note(rec.note, res.note);
            rec.parsed = std::string(render_label(cs.verdict->label));
            rec.detail = rec.parsed;
            std::string votes = render_votes(*cs.verdict);
            if (!votes.empty()) rec.detail += " (votes: " + votes + ")";
            break;
        }
        case Action::SendConclusion: {
            std::vector<Verdict> verdicts;
            for (const ClaimState& cs : state.claims) verdicts.push_back(*cs.verdict);
            Verdict final_verdict;
            if (verdicts.size() == 1)
                final_verdict = verdicts.front();
            else if (state.config.scheme == LabelScheme::Wice)
                final_verdict = aggregate_verdicts(verdicts);
            else
                final_verdict = conjoin_fever_verdicts(verdicts);
            state.final_verdict = final_verdict;
            state.concluded = true;
            rec.parsed = std::string(render_label(final_verdict.label));
            rec.detail = "final verdict " + rec.parsed + " from " +
                         std::to_string(verdicts.size()) + " claim(s)";
            break;
        }
    }
    const auto finished = std::chrono::steady_clock::now();
    rec.duration_ms = std::chrono::duration<double, std::milli>(finished - started).count();

    if (!state.init_note.empty()) {
        append_note(rec.note, state.init_note);
        state.init_note.clear();
    }
    trace.records.push_back(std::move(rec));
}

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

CheckResult run_check(const CheckInput& input, const PipelineConfig& config,
                      const PipelineDeps& deps) {
    CheckerContext ctx{deps.backend, deps.prompts, config.checkers};
    CheckState state = init_state(input, config, deps.corpus);
    CheckTrace trace;

    // Every action permanently advances some stage flag, so the step count
    // is bounded; the cap only guards against regressions in that invariant.
    const size_t max_steps = 8 + 8 * std::max<size_t>(state.claims.size(), 1) + 64;
    while (!state.concluded) {
        if (trace.records.size() > max_steps)
            throw CheckFailure(current_claim_id(state), Action::SendConclusion,
                               "state machine failed to converge", trace);
        std::set<Action> allowed = allowed_actions(state);
        Action attributed = allowed.empty() ? Action::SendConclusion : *allowed.begin();
        try {
            ActionChoice choice = next_action(state, ctx);
            apply_action(state, choice, ctx, deps.corpus, trace);
        } catch (const CheckFailure&) {
            throw;
        } catch (const Error& err) {
            throw CheckFailure(current_claim_id(state), attributed, err.what(), trace);
        }
    }

    CheckResult result;
    result.final_verdict = *state.final_verdict;
    for (ClaimState& cs : state.claims) {
        ClaimCheck cc;
        cc.claim = std::move(cs.claim);
        cc.queries = std::move(cs.queries);
        for (const Passage& p : cs.passages) cc.retrieved_pages.push_back(p.page_id);
        cc.evidence = std::move(cs.evidence);
        cc.verdict = std::move(*cs.verdict);
        result.claims.push_back(std::move(cc));
    }
    result.trace = std::move(trace);
    return result;
}

// ---------------------------------------------------------------------------
// Trace serialization
// ---------------------------------------------------------------------------

std::string CheckTrace::to_jsonl(bool include_timing) const {
    std::ostringstream out;
    for (const TraceRecord& rec : records) {
        ordered_json j;
        j["step"] = rec.step;
        j["action"] = render_action(rec.action);
        j["claim_id"] = rec.claim_id;
        j["detail"] = rec.detail;
        j["prompts"] = rec.prompts;
        j["completions"] = rec.completions;
        if (!rec.policy_prompt.empty()) {
            j["policy_prompt"] = rec.policy_prompt;
            j["policy_completion"] = rec.policy_completion;
        }
        j["parsed"] = rec.parsed;
        if (!rec.note.empty()) j["note"] = rec.note;
        if (include_timing) j["duration_ms"] = rec.duration_ms;
        out << j.dump() << '\n';
    }
    return out.str();
}

CheckTrace CheckTrace::from_jsonl(const std::string& text) {
    CheckTrace trace;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& err) {
            throw ParseError(lineno, std::string("bad trace record: ") + err.what());
        }
        TraceRecord rec;
        rec.step = j.value("step", 0);
        std::string name = j.value("action", "");
        bool found = false;
        for (Action action : kAllActions) {
            if (name == render_action(action)) {
                rec.action = action;
                found = true;
            }
        }
        if (!found) throw ParseError(lineno, "unknown action \"" + name + "\"");
        rec.claim_id = j.value("claim_id", "");
        rec.detail = j.value("detail", "");
        rec.prompts = j.value("prompts", std::vector<std::string>{});
        rec.completions = j.value("completions", std::vector<std::string>{});
        rec.policy_prompt = j.value("policy_prompt", "");
        rec.policy_completion = j.value("policy_completion", "");
        rec.parsed = j.value("parsed", "");
        rec.note = j.value("note", "");
        rec.duration_ms = j.value("duration_ms", 0.0);
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

std::string CheckTrace::pretty() const {
    std::ostringstream out;
    for (const TraceRecord& rec : records) {
        out << "step " << rec.step << "  " << render_action(rec.action);
        if (!rec.claim_id.empty()) out << "  [" << rec.claim_id << "]";
        out << "\n";
        if (!rec.detail.empty()) out << "  " << rec.detail << "\n";
        std::istringstream parsed(rec.parsed);
        std::string line;
        while (std::getline(parsed, line)) out << "    | " << line << "\n";
        if (!rec.note.empty()) out << "  note: " << rec.note << "\n";
    }
    return out.str();
}

}  // namespace factcheck
