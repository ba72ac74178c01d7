#include "factcheck/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace factcheck {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad_line(int line, const std::string& reason) {
    throw ParseError(line, reason);
}

std::string record_id(const json& j, int line) {
    // Public releases store ids as integers, strings, or under "meta".
    if (j.contains("id")) {
        const json& id = j.at("id");
        if (id.is_string()) return id.get<std::string>();
        if (id.is_number_integer()) return std::to_string(id.get<long long>());
        bad_line(line, "\"id\" must be a string or an integer");
    }
    if (j.contains("meta") && j.at("meta").is_object() && j.at("meta").contains("id")) {
        const json& id = j.at("meta").at("id");
        if (id.is_string()) return id.get<std::string>();
        if (id.is_number_integer()) return std::to_string(id.get<long long>());
    }
    bad_line(line, "record has no \"id\"");
}

std::string string_field(const json& j, const char* key, int line) {
    if (!j.contains(key) || !j.at(key).is_string())
        bad_line(line, std::string("missing string field \"") + key + "\"");
    return j.at(key).get<std::string>();
}

Label label_field(const json& j, LabelScheme scheme, int line) {
    std::string raw = string_field(j, "label", line);
    try {
        return parse_label(raw, scheme);
    } catch (const Error& err) {
        bad_line(line, err.what());
    }
}

std::set<SentenceRef> group_union(const std::vector<std::vector<SentenceRef>>& groups) {
    std::set<SentenceRef> all;
    for (const auto& group : groups) all.insert(group.begin(), group.end());
    return all;
}

double harmonic_f1(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

std::string pct(const std::optional<double>& value) {
    if (!value) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *value * 100.0);
    return buf;
}

std::string pad(const std::string& cell, size_t width) {
    std::string out = cell;
    while (out.size() < width) out += ' ';
    return out;
}

constexpr size_t kColWidth = 13;

}  // namespace

// ---------------------------------------------------------------------------
// Loaders
// ---------------------------------------------------------------------------

std::vector<FeverRecord> load_fever(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset file: " + path.string());

    std::vector<FeverRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& err) {
            bad_line(lineno, std::string("bad record: ") + err.what());
        }

        FeverRecord rec;
        rec.id = record_id(j, lineno);
        rec.claim = string_field(j, "claim", lineno);
        if (trim(rec.claim).empty()) bad_line(lineno, "empty claim text");
        rec.label = label_field(j, LabelScheme::Fever, lineno);

        // Evidence groups come as annotator lists; each item is either the
        // release's [annotation_id, evidence_id, page, sent_idx] quadruple or
        // a bare [page, sent_idx] pair. Null pages mark "no evidence" slots.
        for (const json& group : j.value("evidence", json::array())) {
            if (!group.is_array()) bad_line(lineno, "evidence group is not a list");
            std::vector<SentenceRef> refs;
            for (const json& item : group) {
                if (!item.is_array() || (item.size() != 2 && item.size() < 4))
                    bad_line(lineno, "evidence item is not a [page, index] pair");
                const json& page = item.size() == 2 ? item[0] : item[2];
                const json& idx = item.size() == 2 ? item[1] : item[3];
                if (page.is_null() && idx.is_null()) continue;
                if (!page.is_string() || !idx.is_number_integer())
                    bad_line(lineno, "evidence item has a non-string page or non-integer index");
                int sent_idx = idx.get<int>();
                if (sent_idx < 0) bad_line(lineno, "negative sentence index");
                refs.push_back({normalize_title(page.get<std::string>()), sent_idx, {}});
            }
            if (refs.empty()) continue;
            std::sort(refs.begin(), refs.end());
            refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
            if (std::find(rec.evidence_groups.begin(), rec.evidence_groups.end(), refs) ==
                rec.evidence_groups.end())
                rec.evidence_groups.push_back(std::move(refs));
        }

        if (rec.label == Label::NotEnoughInfo && !rec.evidence_groups.empty())
            bad_line(lineno, "record labeled NotEnoughInfo carries evidence");
        if (rec.label != Label::NotEnoughInfo && rec.evidence_groups.empty())
            bad_line(lineno, "decidable record carries no evidence group");
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<WiceRecord> load_wice(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset file: " + path.string());

    std::vector<WiceRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& err) {
            bad_line(lineno, std::string("bad record: ") + err.what());
        }

        WiceRecord rec;
        rec.id = record_id(j, lineno);
        rec.claim = string_field(j, "claim", lineno);
        if (trim(rec.claim).empty()) bad_line(lineno, "empty claim text");
        rec.label = label_field(j, LabelScheme::Wice, lineno);

        if (!j.contains("evidence") || !j.at("evidence").is_array())
            bad_line(lineno, "missing \"evidence\" sentence list");
        for (const json& sent : j.at("evidence")) {
            if (!sent.is_string()) bad_line(lineno, "evidence sentence is not a string");
            rec.evidence_sentences.push_back(sent.get<std::string>());
        }

        auto read_index_group = [&](const json& group) {
            if (!group.is_array()) bad_line(lineno, "supporting set is not a list");
            std::vector<int> idxs;
            for (const json& v : group) {
                if (!v.is_number_integer()) bad_line(lineno, "supporting index is not an integer");
                int idx = v.get<int>();
                if (idx < 0 || idx >= static_cast<int>(rec.evidence_sentences.size()))
                    bad_line(lineno, "supporting index " + std::to_string(idx) +
                                         " is out of range");
                idxs.push_back(idx);
            }
            std::sort(idxs.begin(), idxs.end());
            idxs.erase(std::unique(idxs.begin(), idxs.end()), idxs.end());
            return idxs;
        };

        for (const json& group : j.value("supporting_sentences", json::array()))
            rec.supporting_groups.push_back(read_index_group(group));

        for (const json& sub : j.value("subclaims", json::array())) {
            if (!sub.is_string()) bad_line(lineno, "sub-claim is not a string");
            rec.subclaims.push_back(sub.get<std::string>());
        }
        for (const json& group : j.value("subclaim_supporting", json::array()))
            rec.subclaim_supporting.push_back(read_index_group(group));
        if (!rec.subclaim_supporting.empty() &&
            rec.subclaim_supporting.size() != rec.subclaims.size())
            bad_line(lineno, "subclaim_supporting is not aligned with subclaims");

        records.push_back(std::move(rec));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

Prf evidence_prf(const std::set<SentenceRef>& predicted,
                 const std::vector<std::vector<SentenceRef>>& gold_groups) {
    std::set<SentenceRef> gold = group_union(gold_groups);
    size_t hit = 0;
    for (const SentenceRef& ref : predicted) hit += gold.count(ref);

    Prf out;
    out.precision = predicted.empty() ? 0.0 : static_cast<double>(hit) / predicted.size();
    out.recall = gold.empty() ? 0.0 : static_cast<double>(hit) / gold.size();
    out.f1 = harmonic_f1(out.precision, out.recall);
    return out;
}

bool fever_row_hit(const FeverRow& row) {
    if (row.predicted != row.gold) return false;
    if (row.gold == Label::NotEnoughInfo) return true;
    for (const auto& group : row.gold_groups) {
        bool covered = !group.empty();
        for (const SentenceRef& ref : group)
            covered = covered && row.predicted_evidence.count(ref) > 0;
        if (covered) return true;
    }
    return false;
}

double fever_score(const std::vector<FeverRow>& rows) {
    if (rows.empty()) throw EmptyInput("fever_score needs at least one row");
    size_t hits = 0;
    for (const FeverRow& row : rows) {
        if (!label_in_scheme(row.predicted, LabelScheme::Fever) ||
            !label_in_scheme(row.gold, LabelScheme::Fever))
            throw SchemeMismatch("fever_score expects three-way labels");
        hits += fever_row_hit(row);
    }
    return static_cast<double>(hits) / rows.size();
}

double label_accuracy(const std::vector<std::pair<Label, Label>>& rows) {
    if (rows.empty()) throw EmptyInput("label_accuracy needs at least one row");
    size_t hits = 0;
    for (const auto& [predicted, gold] : rows) hits += predicted == gold;
    return static_cast<double>(hits) / rows.size();
}

double macro_f1(const std::vector<std::pair<std::optional<Label>, Label>>& rows,
                LabelScheme scheme) {
    if (rows.empty()) throw EmptyInput("macro_f1 needs at least one row");
    for (const auto& [predicted, gold] : rows) {
        if (predicted && !label_in_scheme(*predicted, scheme))
            throw SchemeMismatch("prediction outside the scheme");
        if (!label_in_scheme(gold, scheme))
            throw SchemeMismatch("gold label outside the scheme");
    }

    double f1_sum = 0.0;
    int classes = 0;
    for (Label cls : scheme_labels(scheme)) {
        size_t tp = 0, fp = 0, fn = 0;
        for (const auto& [predicted, gold] : rows) {
            bool p = predicted && *predicted == cls;
            bool g = gold == cls;
            tp += p && g;
            fp += p && !g;
            fn += !p && g;
        }
        if (tp + fp + fn == 0) continue;  // class absent from both sides
        double precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
        double recall = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
        f1_sum += harmonic_f1(precision, recall);
        ++classes;
    }
    return classes ? f1_sum / classes : 0.0;
}

double macro_f1(const std::vector<std::pair<Label, Label>>& rows, LabelScheme scheme) {
    std::vector<std::pair<std::optional<Label>, Label>> wide;
    wide.reserve(rows.size());
    for (const auto& [predicted, gold] : rows) wide.push_back({predicted, gold});
    return macro_f1(wide, scheme);
}

// ---------------------------------------------------------------------------
// Batch evaluation
// ---------------------------------------------------------------------------

namespace {

void run_pipeline(RecordOutcome& out, const CheckInput& input, const PipelineConfig& config,
                  const PipelineDeps& deps) {
    try {
        CheckResult res = run_check(input, config, deps);
        out.predicted = res.final_verdict.label;
        for (const ClaimCheck& claim : res.claims)
            out.predicted_evidence.insert(claim.evidence.begin(), claim.evidence.end());
    } catch (const std::exception& err) {
        out.failed = true;
        out.error = err.what();
    }
}

RecordOutcome run_fever_record(const FeverRecord& rec, const PipelineConfig& config,
                               const PipelineDeps& deps) {
    RecordOutcome out;
    out.id = rec.id;
    out.gold = rec.label;
    out.gold_groups = rec.evidence_groups;
    out.requires_evidence = !group_union(rec.evidence_groups).empty();

    CheckInput input;
    input.id = rec.id;
    input.text = rec.claim;
    if (config.golden_documents) {
        std::vector<std::string> pages;
        std::set<std::string> seen;
        for (const auto& group : rec.evidence_groups)
            for (const SentenceRef& ref : group)
                if (seen.insert(ref.page_id).second) pages.push_back(ref.page_id);
        input.gold_pages = std::move(pages);
    }
    if (config.golden_sentences) {
        // One sufficient gold set is injected; the first group is the
        // canonical one in the release format.
        std::vector<std::vector<SentenceRef>> groups;
        groups.push_back(rec.evidence_groups.empty() ? std::vector<SentenceRef>{}
                                                     : rec.evidence_groups.front());
        input.gold_sentence_groups = std::move(groups);
    }
    run_pipeline(out, input, config, deps);
    return out;
}

RecordOutcome run_wice_record(const WiceRecord& rec, const PipelineConfig& config,
                              const PipelineDeps& deps) {
    // Sentence refs echoed by the selector pass through title normalization, so
    // the citation's page id has to be the normalized record id or nothing the
    // model cites would ever resolve back to the passage.
    const std::string page = normalize_title(rec.id);
    auto to_refs = [&](const std::vector<int>& idxs) {
        std::vector<SentenceRef> refs;
        for (int idx : idxs) refs.push_back({page, idx, rec.evidence_sentences[idx]});
        return refs;
    };

    RecordOutcome out;
    out.id = rec.id;
    out.gold = rec.label;
    for (const auto& group : rec.supporting_groups) {
        std::vector<SentenceRef> refs = to_refs(group);
        if (std::find(out.gold_groups.begin(), out.gold_groups.end(), refs) ==
            out.gold_groups.end())
            out.gold_groups.push_back(std::move(refs));
    }
    out.requires_evidence = !group_union(out.gold_groups).empty();

    CheckInput input;
    input.id = rec.id;
    input.text = rec.claim;
    input.cited_passages.push_back({page, rec.evidence_sentences});
    if (config.golden_sentences) {
        std::vector<std::vector<SentenceRef>> groups;
        if (config.claim_split && !rec.subclaim_supporting.empty()) {
            for (const auto& group : rec.subclaim_supporting) groups.push_back(to_refs(group));
        } else {
            groups.push_back(rec.supporting_groups.empty()
                                 ? std::vector<SentenceRef>{}
                                 : to_refs(rec.supporting_groups.front()));
        }
        input.gold_sentence_groups = std::move(groups);
    }
    run_pipeline(out, input, config, deps);
    return out;
}

template <typename Record, typename RunOne>
std::vector<RecordOutcome> run_pool(const std::vector<Record>& records, int jobs,
                                    const RunOne& run_one) {
    std::vector<RecordOutcome> outcomes(records.size());
    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp<int>(workers, 1, static_cast<int>(records.size()));

    std::atomic<size_t> next{0};
    auto drain = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= records.size()) break;
            outcomes[i] = run_one(records[i]);
        }
    };
    std::vector<std::thread> threads;
    for (int w = 1; w < workers; ++w) threads.emplace_back(drain);
    drain();
    for (std::thread& t : threads) t.join();
    return outcomes;
}

EvalReport assemble(LabelScheme scheme, const PipelineConfig& config, int jobs,
                    std::vector<RecordOutcome> outcomes) {
    if (outcomes.empty()) throw EmptyInput("evaluation needs at least one record");

    EvalReport report;
    report.scheme = scheme;
    report.config = config;
    report.jobs = jobs;
    report.n_records = static_cast<int>(outcomes.size());

    size_t correct = 0;
    std::vector<std::pair<std::optional<Label>, Label>> label_rows;
    for (const RecordOutcome& out : outcomes) {
        report.n_failures += out.failed;
        correct += !out.failed && out.predicted && *out.predicted == out.gold;
        label_rows.push_back({out.failed ? std::nullopt : out.predicted, out.gold});
    }
    report.accuracy = static_cast<double>(correct) / outcomes.size();
    report.macro_f1 = factcheck::macro_f1(label_rows, scheme);

    if (scheme == LabelScheme::Fever && !config.golden_sentences) {
        size_t hits = 0;
        for (const RecordOutcome& out : outcomes) {
            if (out.failed || !out.predicted) continue;
            hits += fever_row_hit({*out.predicted, out.predicted_evidence, out.gold,
                                   out.gold_groups});
        }
        report.fever_score = static_cast<double>(hits) / outcomes.size();
    }

    if (!config.golden_sentences) {
        int m = 0;
        double p_sum = 0.0, r_sum = 0.0;
        size_t hit_pool = 0, pred_pool = 0, gold_pool = 0;
        for (const RecordOutcome& out : outcomes) {
            if (!out.requires_evidence) continue;
            ++m;
            Prf prf = evidence_prf(out.predicted_evidence, out.gold_groups);
            p_sum += prf.precision;
            r_sum += prf.recall;
            std::set<SentenceRef> gold = group_union(out.gold_groups);
            for (const SentenceRef& ref : out.predicted_evidence) hit_pool += gold.count(ref);
            pred_pool += out.predicted_evidence.size();
            gold_pool += gold.size();
        }
        if (m > 0) {
            Prf macro;
            macro.precision = p_sum / m;
            macro.recall = r_sum / m;
            macro.f1 = harmonic_f1(macro.precision, macro.recall);
            report.evidence_macro = macro;

            Prf micro;
            micro.precision = pred_pool ? static_cast<double>(hit_pool) / pred_pool : 0.0;
            micro.recall = gold_pool ? static_cast<double>(hit_pool) / gold_pool : 0.0;
            micro.f1 = harmonic_f1(micro.precision, micro.recall);
            report.evidence_micro = micro;
        }
    }

    report.outcomes = std::move(outcomes);
    return report;
}

}  // namespace

EvalReport evaluate_fever(const std::vector<FeverRecord>& records, const PipelineConfig& config,
                          const PipelineDeps& deps, const EvalOptions& options) {
    if (config.scheme != LabelScheme::Fever)
        throw InvalidConfig("three-way records need the fever scheme");
    config.validate();
    auto outcomes = run_pool(records, options.jobs,
                             [&](const FeverRecord& r) { return run_fever_record(r, config, deps); });
    return assemble(LabelScheme::Fever, config, options.jobs, std::move(outcomes));
}

EvalReport evaluate_wice(const std::vector<WiceRecord>& records, const PipelineConfig& config,
                         const PipelineDeps& deps, const EvalOptions& options) {
    if (config.scheme != LabelScheme::Wice)
        throw InvalidConfig("citation-grounded records need the wice scheme");
    if (config.golden_documents)
        throw InvalidConfig(
            "golden documents are implicit for citation-grounded records; "
            "use --golden-sentences for the gold-evidence ablation");
    config.validate();
    auto outcomes = run_pool(records, options.jobs,
                             [&](const WiceRecord& r) { return run_wice_record(r, config, deps); });
    return assemble(LabelScheme::Wice, config, options.jobs, std::move(outcomes));
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

std::string EvalReport::to_json_text() const {
    auto prf_json = [](const Prf& prf) {
        return ordered_json{{"precision", prf.precision},
                            {"recall", prf.recall},
                            {"f1", prf.f1}};
    };

    ordered_json j;
    j["scheme"] = std::string(render_scheme(scheme));
    j["dataset"] = dataset_path;
    j["config"] = {
        {"claim_split", config.claim_split},
        {"golden_documents", config.golden_documents},
        {"golden_sentences", config.golden_sentences},
        {"policy", config.policy_mode == PolicyMode::Deterministic ? "deterministic" : "llm"},
        {"top_k", config.top_k},
        {"max_queries", config.max_queries},
        {"votes", config.checkers.votes},
        {"evidence_per_passage", config.checkers.evidence_per_passage},
        {"evidence_vote",
         config.checkers.evidence_vote == EvidenceVoteMode::SetLevel ? "set" : "per-sentence"},
        {"resample_unparseable", config.checkers.resample_unparseable},
        {"max_tokens", config.checkers.max_tokens},
        {"temperatures",
         {{"claim_processor", config.checkers.temp_claim_processor},
          {"query_generator", config.checkers.temp_query_generator},
          {"evidence_seeker", config.checkers.temp_evidence_seeker},
          {"verdict_counselor", config.checkers.temp_verdict_counselor},
          {"policy_agent", config.checkers.temp_policy_agent}}},
    };
    j["jobs"] = jobs;
    j["n_records"] = n_records;
    j["n_failures"] = n_failures;

    ordered_json metrics;
    metrics["accuracy"] = accuracy;
    metrics["macro_f1"] = macro_f1;
    if (scheme == LabelScheme::Fever)
        metrics["fever_score"] = fever_score ? ordered_json(*fever_score) : ordered_json();
    if (evidence_macro) {
        metrics["evidence"] = {{"macro", prf_json(*evidence_macro)},
                               {"micro", prf_json(*evidence_micro)}};
    } else {
        metrics["evidence"] = nullptr;
    }
    j["metrics"] = std::move(metrics);

    ordered_json rows = ordered_json::array();
    for (const RecordOutcome& out : outcomes) {
        ordered_json row;
        row["id"] = out.id;
        row["gold"] = std::string(render_label(out.gold));
        row["predicted"] = out.predicted
                               ? ordered_json(std::string(render_label(*out.predicted)))
                               : ordered_json();
        row["correct"] = !out.failed && out.predicted && *out.predicted == out.gold;
        if (scheme == LabelScheme::Fever && fever_score) {
            row["strict_hit"] =
                !out.failed && out.predicted &&
                fever_row_hit({*out.predicted, out.predicted_evidence, out.gold,
                               out.gold_groups});
        }
        if (out.requires_evidence && !config.golden_sentences)
            row["evidence"] = prf_json(evidence_prf(out.predicted_evidence, out.gold_groups));
        if (out.failed) {
            row["failed"] = true;
            row["error"] = out.error;
        }
        rows.push_back(std::move(row));
    }
    j["records"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string EvalReport::table_header() const {
    std::string first = scheme == LabelScheme::Fever ? "Fever Score" : "F1";
    return pad(first, kColWidth) + pad("Accuracy", kColWidth) + pad("Ev F1", kColWidth) +
           pad("Ev Precision", kColWidth) + pad("Ev Recall", kColWidth);
}

std::string EvalReport::table_row() const {
    std::optional<double> first =
        scheme == LabelScheme::Fever ? fever_score : std::optional<double>(macro_f1);
    std::optional<double> ev_p, ev_r, ev_f;
    if (evidence_macro) {
        ev_p = evidence_macro->precision;
        ev_r = evidence_macro->recall;
        ev_f = evidence_macro->f1;
    }
    return pad(pct(first), kColWidth) + pad(pct(accuracy), kColWidth) +
           pad(pct(ev_f), kColWidth) + pad(pct(ev_p), kColWidth) + pad(pct(ev_r), kColWidth);
}

}  // namespace factcheck
