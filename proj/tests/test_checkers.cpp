#include <doctest.h>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "factcheck/checkers.hpp"

using namespace factcheck;

namespace {

using Tape = std::map<std::string, std::vector<std::string>>;

struct Rig {
    ScriptedBackend backend;
    PromptLibrary prompts = PromptLibrary::builtin();
    CheckerContext ctx{backend, prompts, CheckerSettings{}};

    explicit Rig(Tape tape) : backend(std::move(tape)) {}
};

const std::vector<Passage> kPassages = {
    {"Tomas Reiner",
     {"Tomas Reiner was a Czech composer of chamber music.",
      "Reiner was born in Brno in 1898.",
      "He studied at the Prague Conservatory under Josef Suk.",
      "Reiner died in Terezin in 1944."}},
    {"Lake Verenthe",
     {"Lake Verenthe is a freshwater lake in northern Estonia.",
      "",  // placeholder slot
      "It freezes over for roughly four months each winter."}},
};

Claim claim(const std::string& text, const std::string& id = "c#1") {
    return Claim{id, text, {}};
}

}  // namespace

TEST_CASE("checker settings validation") {
    CheckerSettings s;
    CHECK_NOTHROW(s.validate());
    s.votes = 0;
    CHECK_THROWS_AS(s.validate(), InvalidConfig);
    s = CheckerSettings{};
    s.temp_evidence_seeker = 3.0;
    CHECK_THROWS_AS(s.validate(), InvalidConfig);
    s = CheckerSettings{};
    s.max_tokens = -1;
    CHECK_THROWS_AS(s.validate(), InvalidConfig);
}

TEST_CASE("parse_enumerated_lines keeps numbered items only") {
    auto lines = parse_enumerated_lines(
        "Here you go:\n1. First claim.\n2) Second claim.\n- bullet noise\n"
        "10. Tenth.\n3.\n  4. indented  \n");
    CHECK(lines == std::vector<std::string>{"First claim.", "Second claim.", "Tenth.",
                                            "indented"});
    CHECK(parse_enumerated_lines("no structure at all").empty());
}

TEST_CASE("parse_sentence_refs resolves only within the supplied passages") {
    auto refs = parse_sentence_refs(
        "[Tomas Reiner, 1]\n[Tomas Reiner, 3] trailing prose\n"
        "[Unknown Page, 0]\n[Tomas Reiner, 99]\n[Tomas Reiner, -1]\n[Tomas Reiner]\n",
        kPassages);
    REQUIRE(refs.size() == 2);
    CHECK(refs.count(SentenceRef{"Tomas Reiner", 1, {}}) == 1);
    CHECK(refs.count(SentenceRef{"Tomas Reiner", 3, {}}) == 1);
    // Resolved refs carry the sentence text.
    CHECK(refs.begin()->text == "Reiner was born in Brno in 1898.");
}

TEST_CASE("parse_sentence_refs normalizes titles and splits on the last comma") {
    std::vector<Passage> passages = {{"Dublin, Ohio", {"Dublin, Ohio is a city."}}};
    auto refs = parse_sentence_refs("[Dublin, Ohio, 0] and [Dublin,_Ohio, 0]", passages);
    REQUIRE(refs.size() == 1);
    CHECK(refs.begin()->page_id == "Dublin, Ohio");
}

TEST_CASE("parse_sentence_refs skips placeholder slots") {
    auto refs = parse_sentence_refs("[Lake Verenthe, 1]\n[Lake Verenthe, 2]", kPassages);
    REQUIRE(refs.size() == 1);
    CHECK(refs.begin()->sent_idx == 2);
}

TEST_CASE("process_claims assigns ordered ids and source spans") {
    std::string input = "Tomas Reiner was born in Brno and died in Terezin.";
    Rig rig(Tape{{"Text: " + input + "\nClaims:",
              {"1. Tomas Reiner was born in Brno.\n2. Tomas Reiner died in Terezin."}}});
    ClaimsResult result = process_claims(rig.ctx, input, "rec9");
    REQUIRE(result.claims.size() == 2);
    CHECK(result.claims[0].id == "rec9#1");
    CHECK(result.claims[1].id == "rec9#2");
    CHECK(result.claims[0].text == "Tomas Reiner was born in Brno.");
    // "Tomas Reiner was born in Brno" appears verbatim at offset 0 but the
    // final period breaks the match, so no span; claim 2 has none either.
    CHECK(result.calls.size() == 1);
    CHECK(result.calls[0].completions.size() == 1);
}

TEST_CASE("process_claims records a span when the claim is cut verbatim") {
    std::string input = "The lake is deep. The lake is cold.";
    Rig rig(Tape{{"Text: " + input + "\nClaims:",
              {"1. The lake is deep.\n2. The lake is cold."}}});
    ClaimsResult result = process_claims(rig.ctx, input, "rec");
    REQUIRE(result.claims.size() == 2);
    REQUIRE(result.claims[0].source_span.has_value());
    CHECK(result.claims[0].source_span->first == 0);
    CHECK(result.claims[1].source_span->first == 18);
}

TEST_CASE("process_claims failure modes") {
    Rig rig(Tape{{"Claims:", {"none of these lines\nare enumerated"}}});
    CHECK_THROWS_AS(process_claims(rig.ctx, "some text", "rec"), EmptyDecomposition);
    CHECK_THROWS_AS(process_claims(rig.ctx, "   \n", "rec"), EmptyInput);
}

TEST_CASE("generate_queries dedupes and caps") {
    Claim c = claim("Tomas Reiner was born in Brno.");
    Rig rig(Tape{{"Claim: " + c.text + "\nSearch queries:",
              {"1. Tomas Reiner\n2. tomas_reiner\n3. Brno\n4. Reiner 1898\n5. extra"}}});
    QueriesResult result = generate_queries(rig.ctx, c, 3);
    REQUIRE(result.queries.size() == 3);
    CHECK(result.queries[0] == SearchQuery{"Tomas Reiner", 1});
    CHECK(result.queries[1] == SearchQuery{"Brno", 2});  // underscore dupe collapsed
    CHECK(result.queries[2] == SearchQuery{"Reiner 1898", 3});

    CHECK_THROWS_AS(generate_queries(rig.ctx, c, 0), InvalidConfig);

    Rig empty(Tape{{"Search queries:", {"nothing enumerated"}}});
    CHECK_THROWS_AS(generate_queries(empty.ctx, c, 3), EmptyQuerySet);
}

TEST_CASE("seek_evidence prompts per passage and unions the winners") {
    Claim c = claim("Reiner was born in Brno and Lake Verenthe freezes.");
    Rig rig(Tape{{"Claim: " + c.text + "\nSelected evidence:",
              {"[Tomas Reiner, 1]\n[Lake Verenthe, 2]"}}});
    EvidenceResult result = seek_evidence(rig.ctx, c, kPassages);

    // One prompt per passage, each answered by the same tape entry; refs that
    // point at the other page are discarded by the resolution filter, so the
    // union reconstructs exactly the two real sentences.
    CHECK(result.calls.size() == 2);
    REQUIRE(result.evidence.size() == 2);
    CHECK(result.evidence[0] == SentenceRef{"Lake Verenthe", 2, {}});  // sorted order
    CHECK(result.evidence[1] == SentenceRef{"Tomas Reiner", 1, {}});
    CHECK(result.evidence[0].text == "It freezes over for roughly four months each winter.");

    // Each per-passage prompt lists only that passage's sentences. The claim
    // line mentions both pages, so probe for sentence text, not titles.
    CHECK(result.calls[0].prompt.find("[Tomas Reiner, 1]") != std::string::npos);
    CHECK(result.calls[0].prompt.find("freshwater lake") == std::string::npos);
    CHECK(result.calls[1].prompt.find("[Lake Verenthe, 0]") != std::string::npos);
    CHECK(result.calls[1].prompt.find("born in Brno in 1898") == std::string::npos);
    // The placeholder slot must not be offered to the model.
    CHECK(result.calls[1].prompt.find("[Lake Verenthe, 1]") == std::string::npos);
}

TEST_CASE("seek_evidence single-prompt mode sees all passages at once") {
    Claim c = claim("combined");
    Rig rig(Tape{{"Claim: combined\nSelected evidence:", {"[Tomas Reiner, 0]"}}});
    rig.ctx.settings.evidence_per_passage = false;
    EvidenceResult result = seek_evidence(rig.ctx, c, kPassages);
    CHECK(result.calls.size() == 1);
    CHECK(result.calls[0].prompt.find("[Tomas Reiner, 0]") != std::string::npos);
    CHECK(result.calls[0].prompt.find("[Lake Verenthe, 0]") != std::string::npos);
    REQUIRE(result.evidence.size() == 1);
}

TEST_CASE("seek_evidence set-level vote picks the modal selection") {
    Claim c = claim("voting");
    Rig rig(Tape{{"Claim: voting\nSelected evidence:",
              {"[Tomas Reiner, 1]", "[Tomas Reiner, 1]", "[Tomas Reiner, 3]",
               "[Tomas Reiner, 1]", "nothing found"}}});
    std::vector<Passage> one_page = {kPassages[0]};
    EvidenceResult result = seek_evidence(rig.ctx, c, one_page);
    REQUIRE(result.evidence.size() == 1);
    CHECK(result.evidence[0].sent_idx == 1);
}

TEST_CASE("seek_evidence per-sentence vote keeps strict-majority sentences") {
    Claim c = claim("threshold");
    // Sentence 1 appears in 3 of 5 samples, sentence 3 in 2 of 5.
    Rig rig(Tape{{"Claim: threshold\nSelected evidence:",
              {"[Tomas Reiner, 1]\n[Tomas Reiner, 3]", "[Tomas Reiner, 1]",
               "[Tomas Reiner, 1]\n[Tomas Reiner, 3]", "nope", "nope"}}});
    rig.ctx.settings.evidence_vote = EvidenceVoteMode::PerSentence;
    std::vector<Passage> one_page = {kPassages[0]};
    EvidenceResult result = seek_evidence(rig.ctx, c, one_page);
    REQUIRE(result.evidence.size() == 1);
    CHECK(result.evidence[0].sent_idx == 1);
}

TEST_CASE("seek_evidence with no passages asks nothing and finds nothing") {
    Claim c = claim("whatever");
    Rig rig({});
    EvidenceResult result = seek_evidence(rig.ctx, c, {});
    CHECK(result.evidence.empty());
    CHECK(result.calls.empty());
    CHECK(rig.backend.calls() == 0);
}

TEST_CASE("predict_verdict majority-votes over scheme labels") {
    Claim c = claim("Tomas Reiner was born in Brno.");
    Rig rig(Tape{{"Claim: " + c.text + "\nVerdict:",
              {"Supported", "Refuted", "Supported", "supported.", "NotEnoughInfo"}}});
    std::vector<SentenceRef> evidence = {
        {"Tomas Reiner", 1, std::string("Reiner was born in Brno in 1898.")}};
    VerdictResult result = predict_verdict(rig.ctx, c, evidence, LabelScheme::Fever);
    CHECK(result.verdict.label == Label::Supported);
    CHECK(result.verdict.scheme == LabelScheme::Fever);
    CHECK(result.verdict.vote_distribution.at(Label::Supported) == 3);
    CHECK(result.verdict.vote_distribution.at(Label::Refuted) == 1);
    REQUIRE(result.calls.size() == 1);
    CHECK(result.calls[0].prompt.find("Evidence:\n[Tomas Reiner, 1] Reiner was born") !=
          std::string::npos);
    CHECK(result.calls[0].prompt.find("Options: Supported, Refuted, NotEnoughInfo") !=
          std::string::npos);
}

TEST_CASE("predict_verdict short-circuits empty three-way evidence to NotEnoughInfo") {
    Claim c = claim("anything");
    Rig rig({});
    VerdictResult result = predict_verdict(rig.ctx, c, {}, LabelScheme::Fever);
    CHECK(result.verdict.label == Label::NotEnoughInfo);
    CHECK(result.note == "no evidence; short-circuit to NotEnoughInfo");
    CHECK(result.calls.empty());
    CHECK(rig.backend.calls() == 0);
}

TEST_CASE("predict_verdict consults the model on empty citation-scheme evidence") {
    Claim c = claim("Harvey Lund invented the rotary kiln.");
    Rig rig(Tape{{"Claim: " + c.text + "\nVerdict:", {"NotSupported"}}});
    VerdictResult result = predict_verdict(rig.ctx, c, {}, LabelScheme::Wice);
    CHECK(result.verdict.label == Label::NotSupported);
    REQUIRE(result.calls.size() == 1);
    CHECK(result.calls[0].prompt.find("Evidence:\n(none)") != std::string::npos);
    CHECK(result.calls[0].prompt.find(
              "Options: Supported, PartiallySupported, NotSupported") != std::string::npos);
}

TEST_CASE("predict_verdict requires resolved evidence text") {
    Claim c = claim("x");
    Rig rig({});
    std::vector<SentenceRef> unresolved = {{"Some Page", 2, std::nullopt}};
    CHECK_THROWS_AS(predict_verdict(rig.ctx, c, unresolved, LabelScheme::Fever),
                    InvalidConfig);
}

TEST_CASE("predict_verdict attaches the claim id when every sample is junk") {
    Claim c = claim("mystery", "rec7#2");
    Rig rig(Tape{{"Claim: mystery\nVerdict:", {"hmm", "unclear", "maybe", "??", "!!"}}});
    std::vector<SentenceRef> evidence = {{"Tomas Reiner", 1, std::string("text")}};
    try {
        predict_verdict(rig.ctx, c, evidence, LabelScheme::Fever);
        FAIL("expected AllSamplesUnparseable");
    } catch (const AllSamplesUnparseable& e) {
        CHECK(std::string(e.what()).find("rec7#2") != std::string::npos);
    }
}

TEST_CASE("predict_verdict resamples junk when configured") {
    Claim c = claim("retry me");
    // Ordinals 0..4 junk; 5..9 parse.
    Rig rig(Tape{{"Claim: retry me\nVerdict:",
              {"junk", "junk", "junk", "junk", "junk",
               "Refuted", "Refuted", "Refuted", "Refuted", "Refuted"}}});
    rig.ctx.settings.resample_unparseable = true;
    std::vector<SentenceRef> evidence = {{"Tomas Reiner", 1, std::string("text")}};
    VerdictResult result = predict_verdict(rig.ctx, c, evidence, LabelScheme::Fever);
    CHECK(result.verdict.label == Label::Refuted);
    CHECK(result.verdict.vote_distribution.at(Label::Refuted) == 5);
}

TEST_CASE("aggregate_verdicts folds citation-scheme sub-verdicts") {
    auto v = [](Label l) { return Verdict{l, LabelScheme::Wice, {}}; };
    Verdict folded = aggregate_verdicts({v(Label::Supported), v(Label::NotSupported)});
    CHECK(folded.label == Label::PartiallySupported);
    CHECK(folded.scheme == LabelScheme::Wice);
    CHECK(folded.vote_distribution.at(Label::Supported) == 1);
    CHECK(folded.vote_distribution.at(Label::NotSupported) == 1);

    CHECK(aggregate_verdicts({v(Label::Supported), v(Label::Supported)}).label ==
          Label::Supported);
    CHECK_THROWS_AS(aggregate_verdicts({}), EmptyInput);
    CHECK_THROWS_AS(
        aggregate_verdicts({Verdict{Label::Refuted, LabelScheme::Fever, {}}}),
        SchemeMismatch);
}
