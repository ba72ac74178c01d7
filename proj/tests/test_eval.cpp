#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "factcheck/corpus.hpp"
#include "factcheck/errors.hpp"
#include "factcheck/eval.hpp"
#include "factcheck/llm.hpp"
#include "factcheck/policy.hpp"
#include "factcheck/prompts.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace factcheck;
using json = nlohmann::json;

namespace {

const fs::path kFixtures = FIXTURE_DIR;

fs::path write_temp(const std::string& stem, const std::string& body) {
    fs::path p = fs::temp_directory_path() / ("factcheck_eval_" + stem + ".jsonl");
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << body;
    return p;
}

ScriptedBackend fever_backend() {
    return ScriptedBackend(ScriptedBackend::load_tape(kFixtures / "mini_fever" / "tape.json"));
}

CorpusStore fever_corpus() {
    return CorpusStore::load_snapshot(kFixtures / "mini_fever" / "corpus");
}

std::vector<std::pair<Label, Label>> plain_rows(
    const std::vector<std::pair<std::optional<Label>, Label>>& rows) {
    std::vector<std::pair<Label, Label>> out;
    for (const auto& [p, g] : rows) out.emplace_back(p.value(), g);
    return out;
}

}  // namespace

TEST_CASE("fever loader reads the release format") {
    auto records = load_fever(kFixtures / "mini_fever" / "records.jsonl");
    REQUIRE(records.size() == 10);

    CHECK(records[0].id == "1");
    CHECK(records[0].claim == "Aurora Peak is located in Alaska.");
    CHECK(records[0].label == Label::Supported);
    REQUIRE(records[0].evidence_groups.size() == 1);
    CHECK(records[0].evidence_groups[0] ==
          std::vector<SentenceRef>{{"Aurora Peak", 0}});

    // Alternative groups stay distinct; each alone decides the claim.
    REQUIRE(records[1].evidence_groups.size() == 2);
    CHECK(records[1].evidence_groups[0] ==
          std::vector<SentenceRef>{{"Tomas Reiner", 1}});
    CHECK(records[1].evidence_groups[1] ==
          std::vector<SentenceRef>{{"Tomas Reiner", 0}, {"Tomas Reiner", 1}});

    // A single group may need several sentences together.
    REQUIRE(records[5].evidence_groups.size() == 1);
    CHECK(records[5].evidence_groups[0].size() == 2);

    // Undecidable records carry no evidence at all.
    CHECK(records[7].label == Label::NotEnoughInfo);
    CHECK(records[7].evidence_groups.empty());
    CHECK(records[9].evidence_groups.empty());
}

TEST_CASE("fever loader normalizes pages and dedupes groups") {
    // Underscored titles, integer ids, a duplicate group, and an unsorted
    // group all appear in the public release.
    fs::path p = write_temp(
        "norm",
        R"({"id": 7, "claim": "c.", "label": "SUPPORTS", "evidence": [[[1, 2, "Aurora_Peak", 1], [1, 2, "Aurora_Peak", 0]], [[3, 4, "Aurora_Peak", 0], [3, 4, "Aurora_Peak", 1]]]})"
        "\n");
    auto records = load_fever(p);
    fs::remove(p);
    REQUIRE(records.size() == 1);
    CHECK(records[0].id == "7");
    // Both groups collapse to the same sorted set of normalized refs.
    REQUIRE(records[0].evidence_groups.size() == 1);
    CHECK(records[0].evidence_groups[0] ==
          std::vector<SentenceRef>{{"Aurora Peak", 0}, {"Aurora Peak", 1}});
}

TEST_CASE("fever loader enforces the record invariants") {
    SUBCASE("undecidable record with evidence") {
        fs::path p = write_temp(
            "nei_ev",
            R"({"id": 1, "claim": "c.", "label": "NOT ENOUGH INFO", "evidence": [[[1, 2, "A", 0]]]})"
            "\n");
        CHECK_THROWS_AS(load_fever(p), ParseError);
        fs::remove(p);
    }
    SUBCASE("decidable record without evidence") {
        fs::path p = write_temp(
            "dec_noev",
            R"({"id": 1, "claim": "c.", "label": "REFUTES", "evidence": []})"
            "\n");
        CHECK_THROWS_AS(load_fever(p), ParseError);
        fs::remove(p);
    }
    SUBCASE("malformed line reports its number") {
        fs::path p = write_temp(
            "badline",
            R"({"id": 1, "claim": "c.", "label": "NOT ENOUGH INFO", "evidence": [[[1, 2, null, null]]]})"
            "\n{not json\n");
        try {
            load_fever(p);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
        fs::remove(p);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_fever(kFixtures / "nope.jsonl"), Error); }
}

TEST_CASE("wice loader reads records and sub-claim alignment") {
    auto records = load_wice(kFixtures / "mini_wice" / "records.jsonl");
    REQUIRE(records.size() == 6);

    int n_s = 0, n_ps = 0, n_ns = 0;
    for (const auto& r : records) {
        if (r.label == Label::Supported) ++n_s;
        if (r.label == Label::PartiallySupported) ++n_ps;
        if (r.label == Label::NotSupported) ++n_ns;
    }
    CHECK(n_s == 2);
    CHECK(n_ps == 3);
    CHECK(n_ns == 1);

    CHECK(records[0].id == "w1");
    REQUIRE(records[0].subclaims.size() == 2);
    REQUIRE(records[0].subclaim_supporting.size() == 2);
    CHECK(records[0].supporting_groups == std::vector<std::vector<int>>{{0, 1}});

    // Unsupported records may have empty supporting sets but still list one
    // (possibly empty) set per sub-claim.
    CHECK(records[1].supporting_groups.empty());
    CHECK(records[1].subclaim_supporting == std::vector<std::vector<int>>{{}, {}});

    CHECK(records[5].subclaims.size() == 3);
    CHECK(records[5].evidence_sentences.size() >= 2);
}

TEST_CASE("wice loader rejects inconsistent records") {
    SUBCASE("sub-claim support out of alignment") {
        fs::path p = write_temp(
            "misalign",
            R"({"meta": {"id": "x"}, "claim": "a. b.", "label": "supported", "evidence": ["s0.", "s1."], "supporting_sentences": [[0]], "subclaims": ["a.", "b."], "subclaim_supporting": [[0]]})"
            "\n");
        CHECK_THROWS_AS(load_wice(p), ParseError);
        fs::remove(p);
    }
    SUBCASE("supporting index out of range") {
        fs::path p = write_temp(
            "range",
            R"({"meta": {"id": "x"}, "claim": "a.", "label": "supported", "evidence": ["s0."], "supporting_sentences": [[3]]})"
            "\n");
        CHECK_THROWS_AS(load_wice(p), ParseError);
        fs::remove(p);
    }
}

TEST_CASE("evidence precision, recall, and F1 against the gold union") {
    const SentenceRef a1{"A", 1}, a2{"A", 2}, b0{"B", 0};

    SUBCASE("over-selection costs precision only") {
        Prf prf = evidence_prf({a1, a2}, {{a1}});
        CHECK(prf.precision == doctest::Approx(0.5));
        CHECK(prf.recall == doctest::Approx(1.0));
        CHECK(prf.f1 == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("empty prediction scores zero") {
        Prf prf = evidence_prf({}, {{a1}});
        CHECK(prf.precision == 0.0);
        CHECK(prf.recall == 0.0);
        CHECK(prf.f1 == 0.0);
    }
    SUBCASE("exact union is a perfect score") {
        Prf prf = evidence_prf({a1, b0}, {{a1}, {b0}});
        CHECK(prf.precision == doctest::Approx(1.0));
        CHECK(prf.recall == doctest::Approx(1.0));
        CHECK(prf.f1 == doctest::Approx(1.0));
    }
    SUBCASE("refs shared between groups count once") {
        // Union is {a1, a2}; predicting only a1 recalls half of it.
        Prf prf = evidence_prf({a1}, {{a1}, {a1, a2}});
        CHECK(prf.precision == doctest::Approx(1.0));
        CHECK(prf.recall == doctest::Approx(0.5));
    }
}

TEST_CASE("strict-accuracy hit demands a full gold group") {
    const SentenceRef a0{"A", 0}, a1{"A", 1}, b0{"B", 0};
    FeverRow row;
    row.gold = Label::Supported;
    row.gold_groups = {{a0, a1}, {b0}};

    SUBCASE("label mismatch loses even with perfect evidence") {
        row.predicted = Label::Refuted;
        row.predicted_evidence = {a0, a1, b0};
        CHECK_FALSE(fever_row_hit(row));
    }
    SUBCASE("covering any one group suffices") {
        row.predicted = Label::Supported;
        row.predicted_evidence = {b0};
        CHECK(fever_row_hit(row));
    }
    SUBCASE("a partial group does not count") {
        row.predicted = Label::Supported;
        row.predicted_evidence = {a0};  // half of group 1, none of group 2
        CHECK_FALSE(fever_row_hit(row));
    }
    SUBCASE("undecidable rows need no evidence") {
        FeverRow nei;
        nei.gold = Label::NotEnoughInfo;
        nei.predicted = Label::NotEnoughInfo;
        CHECK(fever_row_hit(nei));
        nei.predicted = Label::Supported;
        CHECK_FALSE(fever_row_hit(nei));
    }
}

TEST_CASE("fever_score guards its domain") {
    CHECK_THROWS_AS(fever_score({}), EmptyInput);
    FeverRow bad;
    bad.predicted = Label::PartiallySupported;
    bad.gold = Label::NotEnoughInfo;
    CHECK_THROWS_AS(fever_score({bad}), SchemeMismatch);
}

TEST_CASE("accuracy and macro F1 on a frozen confusion") {
    using P = std::pair<Label, Label>;
    const Label S = Label::Supported, R = Label::Refuted, N = Label::NotEnoughInfo;
    // (predicted, gold)
    std::vector<P> rows = {{S, S}, {S, S}, {R, R}, {N, N}, {S, R}, {R, S}};

    CHECK(label_accuracy(rows) == doctest::Approx(2.0 / 3.0));
    // S: P=2/3 R=2/3 F1=2/3; R: P=1/2 R=1/2 F1=1/2; N: perfect.
    CHECK(macro_f1(rows, LabelScheme::Fever) ==
          doctest::Approx((2.0 / 3.0 + 0.5 + 1.0) / 3.0));

    // The independent implementation agrees.
    std::vector<std::pair<std::optional<Label>, Label>> opt_rows;
    for (auto [p, g] : rows) opt_rows.emplace_back(p, g);
    CHECK(macro_f1(rows, LabelScheme::Fever) ==
          doctest::Approx(oracles::macro_f1(opt_rows, LabelScheme::Fever)));
    CHECK(label_accuracy(rows) == doctest::Approx(oracles::accuracy(plain_rows(opt_rows))));
}

TEST_CASE("macro F1 ignores classes absent on both sides") {
    using P = std::pair<Label, Label>;
    const Label S = Label::Supported, R = Label::Refuted;
    // NotEnoughInfo appears nowhere, so the average is over two classes:
    // S: P=1, R=2/3, F1=4/5; R: predicted once, never gold, F1=0.
    std::vector<P> rows = {{S, S}, {R, S}, {S, S}};
    CHECK(macro_f1(rows, LabelScheme::Fever) == doctest::Approx(0.4));

    std::vector<std::pair<std::optional<Label>, Label>> opt_rows;
    for (auto [p, g] : rows) opt_rows.emplace_back(p, g);
    CHECK(oracles::macro_f1(opt_rows, LabelScheme::Fever) == doctest::Approx(0.4));
}

TEST_CASE("failed predictions are false negatives for the gold class") {
    const Label S = Label::Supported;
    std::vector<std::pair<std::optional<Label>, Label>> rows = {
        {std::nullopt, S}, {S, S}};
    // S: tp=1, fp=0, fn=1 -> P=1, R=1/2, F1=2/3; other classes absent.
    CHECK(macro_f1(rows, LabelScheme::Fever) == doctest::Approx(2.0 / 3.0));
    CHECK(oracles::macro_f1(rows, LabelScheme::Fever) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("metric functions match the oracle on random confusions") {
    std::mt19937 rng(20260818);
    std::uniform_int_distribution<int> pick(0, 2);
    std::uniform_int_distribution<int> n_rows(1, 12);
    std::uniform_int_distribution<int> fail(0, 9);
    const Label alphabet[3] = {Label::Supported, Label::Refuted,
                               Label::NotEnoughInfo};

    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<std::optional<Label>, Label>> rows;
        const int n = n_rows(rng);
        for (int i = 0; i < n; ++i) {
            std::optional<Label> pred = alphabet[pick(rng)];
            if (fail(rng) == 0) pred.reset();
            rows.emplace_back(pred, alphabet[pick(rng)]);
        }
        CHECK(macro_f1(rows, LabelScheme::Fever) ==
              doctest::Approx(oracles::macro_f1(rows, LabelScheme::Fever)));
        bool any_failed = std::any_of(rows.begin(), rows.end(),
                                      [](const auto& r) { return !r.first; });
        if (!any_failed) {
            auto plain = plain_rows(rows);
            CHECK(label_accuracy(plain) == doctest::Approx(oracles::accuracy(plain)));
        }
    }
}

TEST_CASE("three-way benchmark run reproduces the frozen fixture metrics") {
    auto records = load_fever(kFixtures / "mini_fever" / "records.jsonl");
    auto backend = fever_backend();
    auto corpus = fever_corpus();
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, &corpus};
    PipelineConfig config;
    config.scheme = LabelScheme::Fever;

    EvalReport report = evaluate_fever(records, config, deps, {.jobs = 1});

    CHECK(report.n_records == 10);
    CHECK(report.n_failures == 0);
    CHECK(report.accuracy == doctest::Approx(1.0));
    CHECK(report.macro_f1 == doctest::Approx(1.0));
    REQUIRE(report.fever_score.has_value());
    CHECK(*report.fever_score == doctest::Approx(1.0));

    // Seven records need evidence. One of them recalls half its gold union,
    // the rest are exact, and nothing spurious is ever selected.
    REQUIRE(report.evidence_macro.has_value());
    CHECK(report.evidence_macro->precision == doctest::Approx(1.0));
    CHECK(report.evidence_macro->recall == doctest::Approx(6.5 / 7.0));
    CHECK(report.evidence_macro->f1 ==
          doctest::Approx(2.0 * (6.5 / 7.0) / (1.0 + 6.5 / 7.0)));
    REQUIRE(report.evidence_micro.has_value());
    CHECK(report.evidence_micro->precision == doctest::Approx(1.0));
    CHECK(report.evidence_micro->recall == doctest::Approx(8.0 / 9.0));

    // Outcomes keep dataset order and carry the per-record detail.
    REQUIRE(report.outcomes.size() == 10);
    CHECK(report.outcomes[0].id == "1");
    CHECK(report.outcomes[9].id == "10");
    CHECK(report.outcomes[1].predicted_evidence ==
          std::set<SentenceRef>{{"Tomas Reiner", 1}});
    CHECK_FALSE(report.outcomes[7].requires_evidence);
    CHECK(report.outcomes[0].requires_evidence);

    // Every row agrees with the independent metric implementations.
    std::vector<FeverRow> rows;
    std::vector<std::pair<std::optional<Label>, Label>> label_rows;
    for (const auto& out : report.outcomes) {
        rows.push_back({out.predicted.value(), out.predicted_evidence, out.gold,
                        out.gold_groups});
        label_rows.emplace_back(out.predicted, out.gold);
        CHECK(oracles::strict_hit(out.predicted.value(), out.gold,
                                  out.predicted_evidence, out.gold_groups));
    }
    CHECK(*report.fever_score == doctest::Approx(fever_score(rows)));
    CHECK(report.macro_f1 ==
          doctest::Approx(oracles::macro_f1(label_rows, LabelScheme::Fever)));
}

TEST_CASE("a single wrong evidence pick moves the strict score but not accuracy") {
    auto records = load_fever(kFixtures / "mini_fever" / "records.jsonl");
    auto backend = ScriptedBackend(
        ScriptedBackend::load_tape(kFixtures / "mini_fever" / "tape_missing_evidence.json"));
    auto corpus = fever_corpus();
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, &corpus};
    PipelineConfig config;

    EvalReport report = evaluate_fever(records, config, deps, {.jobs = 1});
    CHECK(report.accuracy == doctest::Approx(1.0));
    CHECK(*report.fever_score == doctest::Approx(0.9));
}

TEST_CASE("record failures stay in every denominator") {
    auto records = load_fever(kFixtures / "mini_fever" / "records.jsonl");
    auto tape = ScriptedBackend::load_tape(kFixtures / "mini_fever" / "tape.json");
    // Cut the verdict entry for record 1: its run dies at the verdict stage.
    tape.erase("Claim: Aurora Peak is located in Alaska.\nVerdict:");
    ScriptedBackend backend(std::move(tape));
    auto corpus = fever_corpus();
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, &corpus};
    PipelineConfig config;

    EvalReport report = evaluate_fever(records, config, deps, {.jobs = 1});
    CHECK(report.n_failures == 1);
    CHECK(report.outcomes[0].failed);
    CHECK_FALSE(report.outcomes[0].predicted.has_value());
    CHECK_FALSE(report.outcomes[0].error.empty());
    CHECK(report.accuracy == doctest::Approx(0.9));
    CHECK(*report.fever_score == doctest::Approx(0.9));
    // The failed record still drags the evidence average down.
    CHECK(report.evidence_macro->precision == doctest::Approx(6.0 / 7.0));
}

TEST_CASE("golden-document runs skip retrieval but still score evidence") {
    auto records = load_fever(kFixtures / "mini_fever" / "records.jsonl");
    auto backend = fever_backend();
    auto corpus = fever_corpus();
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, &corpus};
    PipelineConfig config;
    config.golden_documents = true;

    EvalReport report = evaluate_fever(records, config, deps, {.jobs = 1});
    CHECK(report.accuracy == doctest::Approx(1.0));
    CHECK(report.fever_score.has_value());
    CHECK(report.evidence_macro.has_value());
}

TEST_CASE("golden-sentence runs disengage the evidence metrics") {
    auto records = load_fever(kFixtures / "mini_fever" / "records.jsonl");
    auto backend = fever_backend();
    auto corpus = fever_corpus();
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, &corpus};
    PipelineConfig config;
    config.golden_sentences = true;

    EvalReport report = evaluate_fever(records, config, deps, {.jobs = 1});
    CHECK(report.accuracy == doctest::Approx(1.0));
    CHECK_FALSE(report.fever_score.has_value());
    CHECK_FALSE(report.evidence_macro.has_value());
    CHECK_FALSE(report.evidence_micro.has_value());

    // The JSON report renders the disengaged cells as nulls.
    json j = json::parse(report.to_json_text());
    CHECK(j.at("metrics").at("fever_score").is_null());
    CHECK(j.at("metrics").at("evidence").is_null());
    // And the console row dashes them out.
    std::string row = report.table_row();
    CHECK(row.find("-") != std::string::npos);
    CHECK(row.find("100.00") != std::string::npos);
}

TEST_CASE("citation-grounded benchmark run aggregates sub-claim verdicts") {
    auto records = load_wice(kFixtures / "mini_wice" / "records.jsonl");
    auto backend = ScriptedBackend(
        ScriptedBackend::load_tape(kFixtures / "mini_wice" / "tape.json"));
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, nullptr};
    PipelineConfig config;
    config.scheme = LabelScheme::Wice;
    config.claim_split = true;

    EvalReport report = evaluate_wice(records, config, deps, {.jobs = 1});
    CHECK(report.n_failures == 0);
    CHECK(report.accuracy == doctest::Approx(1.0));
    CHECK(report.macro_f1 == doctest::Approx(1.0));
    CHECK_FALSE(report.fever_score.has_value());  // three-way metric only

    // Per-record labels, including the mixed sub-verdict cases.
    REQUIRE(report.outcomes.size() == 6);
    CHECK(report.outcomes[0].predicted == Label::Supported);
    CHECK(report.outcomes[1].predicted == Label::NotSupported);
    CHECK(report.outcomes[2].predicted == Label::PartiallySupported);
    CHECK(report.outcomes[3].predicted == Label::PartiallySupported);
    CHECK(report.outcomes[4].predicted == Label::Supported);
    CHECK(report.outcomes[5].predicted == Label::PartiallySupported);

    // The fully-unsupported record needs no evidence; the rest do.
    CHECK_FALSE(report.outcomes[1].requires_evidence);
    CHECK(report.outcomes[0].requires_evidence);
    REQUIRE(report.evidence_macro.has_value());
    CHECK(report.evidence_macro->f1 == doctest::Approx(1.0));
}

TEST_CASE("citation-grounded runs work without sub-claim splitting") {
    auto records = load_wice(kFixtures / "mini_wice" / "records.jsonl");
    auto backend = ScriptedBackend(
        ScriptedBackend::load_tape(kFixtures / "mini_wice" / "tape.json"));
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, nullptr};
    PipelineConfig config;
    config.scheme = LabelScheme::Wice;
    config.claim_split = false;

    EvalReport report = evaluate_wice(records, config, deps, {.jobs = 1});
    CHECK(report.accuracy == doctest::Approx(1.0));
}

TEST_CASE("citation-grounded evaluation rejects unusable configs") {
    auto records = load_wice(kFixtures / "mini_wice" / "records.jsonl");
    auto backend = ScriptedBackend(
        ScriptedBackend::load_tape(kFixtures / "mini_wice" / "tape.json"));
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, nullptr};

    SUBCASE("golden documents are meaningless under a pinned citation") {
        PipelineConfig config;
        config.scheme = LabelScheme::Wice;
        config.golden_documents = true;
        CHECK_THROWS_AS(evaluate_wice(records, config, deps), InvalidConfig);
    }
    SUBCASE("scheme must match the dataset family") {
        PipelineConfig config;
        config.scheme = LabelScheme::Fever;
        CHECK_THROWS_AS(evaluate_wice(records, config, deps), InvalidConfig);
    }
}

TEST_CASE("three-way evaluation requires the three-way scheme") {
    auto records = load_fever(kFixtures / "mini_fever" / "records.jsonl");
    auto backend = fever_backend();
    auto corpus = fever_corpus();
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, &corpus};
    PipelineConfig config;
    config.scheme = LabelScheme::Wice;
    CHECK_THROWS_AS(evaluate_fever(records, config, deps), InvalidConfig);
}

TEST_CASE("evaluation refuses an empty dataset") {
    auto backend = fever_backend();
    auto corpus = fever_corpus();
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, &corpus};
    CHECK_THROWS_AS(evaluate_fever({}, PipelineConfig{}, deps), EmptyInput);
}

TEST_CASE("parallel evaluation is deterministic") {
    auto records = load_fever(kFixtures / "mini_fever" / "records.jsonl");
    auto corpus = fever_corpus();
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineConfig config;

    auto run = [&](int jobs) {
        auto backend = fever_backend();
        PipelineDeps deps{backend, prompts, &corpus};
        return evaluate_fever(records, config, deps, {.jobs = jobs});
    };

    EvalReport serial = run(1);
    EvalReport parallel = run(3);
    EvalReport repeat = run(3);

    // Byte-identical for the same worker count.
    CHECK(parallel.to_json_text() == repeat.to_json_text());

    // And identical in substance across worker counts.
    json a = json::parse(serial.to_json_text());
    json b = json::parse(parallel.to_json_text());
    a.erase("jobs");
    b.erase("jobs");
    CHECK(a.dump(2) == b.dump(2));
}

TEST_CASE("report JSON exposes config and per-record rows") {
    auto records = load_fever(kFixtures / "mini_fever" / "records.jsonl");
    auto backend = fever_backend();
    auto corpus = fever_corpus();
    PromptLibrary prompts = PromptLibrary::builtin();
    PipelineDeps deps{backend, prompts, &corpus};
    PipelineConfig config;

    EvalReport report = evaluate_fever(records, config, deps, {.jobs = 1});
    json j = json::parse(report.to_json_text());
    CHECK(j.at("scheme") == "fever");
    CHECK(j.at("n_records") == 10);
    CHECK(j.at("n_failures") == 0);
    CHECK(j.at("config").at("claim_split") == false);
    CHECK(j.at("metrics").at("accuracy") == doctest::Approx(1.0));
    REQUIRE(j.at("records").is_array());
    REQUIRE(j.at("records").size() == 10);
    CHECK(j.at("records")[0].at("id") == "1");
    CHECK(j.at("records")[0].at("predicted") == "Supported");
    CHECK(j.at("records")[0].at("correct") == true);
    CHECK(j.at("records")[0].at("strict_hit") == true);
    // Failure keys appear only on failed rows.
    CHECK_FALSE(j.at("records")[0].contains("failed"));
}

TEST_CASE("console table uses the conventional column order") {
    EvalReport fever;
    fever.scheme = LabelScheme::Fever;
    fever.accuracy = 1.0;
    fever.macro_f1 = 1.0;
    fever.fever_score = 0.9;
    fever.evidence_macro = Prf{1.0, 0.5, 2.0 / 3.0};
    std::string header = fever.table_header();
    std::string row = fever.table_row();
    CHECK(header.find("Fever Score") == 0);
    CHECK(header.find("Accuracy") != std::string::npos);
    CHECK(header.find("Ev F1") != std::string::npos);
    CHECK(row.find("90.00") == 0);
    CHECK(row.find("100.00") != std::string::npos);
    CHECK(row.find("66.67") != std::string::npos);
    CHECK(row.find("50.00") != std::string::npos);

    EvalReport wice;
    wice.scheme = LabelScheme::Wice;
    wice.accuracy = 0.5;
    wice.macro_f1 = 0.25;
    CHECK(wice.table_header().find("F1") == 0);
    CHECK(wice.table_row().find("25.00") == 0);
    // Evidence cells absent: dashed out.
    CHECK(wice.table_row().find("-") != std::string::npos);
}
