#include "factcheck/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "factcheck/corpus.hpp"
#include "factcheck/eval.hpp"
#include "factcheck/policy.hpp"
#include "factcheck/prompts.hpp"

namespace factcheck {

namespace {

// Flags shared by `check` and `eval`, gathered before pipeline assembly.
struct RunFlags {
    std::string scheme = "fever";
    std::string corpus_dir;
    std::string backend;
    std::string endpoint;
    std::string model;
    std::string prompts_dir;
    std::string cache_dir;
    bool claim_split = false;
    bool golden_documents = false;
    bool golden_sentences = false;
    int votes = 5;
    int top_k = 3;
    int max_queries = 3;
    std::string policy = "deterministic";
};

void add_run_flags(CLI::App* cmd, RunFlags& flags, bool with_golden) {
    cmd->add_option("--scheme", flags.scheme, "label scheme: fever | wice")
        ->check(CLI::IsMember({"fever", "wice"}))
        ->capture_default_str();
    cmd->add_option("--backend", flags.backend,
                    "completion backend: scripted:<tape.json> | remote")
        ->required();
    cmd->add_option("--endpoint", flags.endpoint, "remote backend base URL");
    cmd->add_option("--model", flags.model, "remote backend model name");
    cmd->add_option("--prompts", flags.prompts_dir,
                    "directory of *.prompt files overriding the built-in templates");
    cmd->add_option("--cache", flags.cache_dir, "completion cache directory");
    cmd->add_flag("--claim-split,!--no-claim-split", flags.claim_split,
                  "decompose the input into sub-claims first");
    if (with_golden) {
        cmd->add_flag("--golden-documents", flags.golden_documents,
                      "skip query generation and retrieval, inject gold pages");
        cmd->add_flag("--golden-sentences", flags.golden_sentences,
                      "skip evidence seeking too, inject gold sentences");
    }
    cmd->add_option("--votes", flags.votes, "samples per majority vote")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--top-k", flags.top_k, "passages kept per search query")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-queries", flags.max_queries, "search queries kept per claim")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--policy", flags.policy, "action selection: deterministic | llm")
        ->check(CLI::IsMember({"deterministic", "llm"}))
        ->capture_default_str();
}

PipelineConfig make_config(const RunFlags& flags) {
    PipelineConfig config;
    config.scheme = parse_scheme(flags.scheme);
    config.claim_split = flags.claim_split;
    config.golden_documents = flags.golden_documents;
    config.golden_sentences = flags.golden_sentences;
    config.policy_mode =
        flags.policy == "llm" ? PolicyMode::LlmDriven : PolicyMode::Deterministic;
    config.top_k = flags.top_k;
    config.max_queries = flags.max_queries;
    config.checkers.votes = flags.votes;
    return config;
}

// "scripted:<path>" or "remote"; anything else is a usage error, reported
// before any work starts.
std::shared_ptr<CompletionBackend> make_backend(const RunFlags& flags) {
    constexpr std::string_view scripted_prefix = "scripted:";
    std::shared_ptr<CompletionBackend> backend;
    if (flags.backend.rfind(scripted_prefix, 0) == 0) {
        std::string path = flags.backend.substr(scripted_prefix.size());
        if (path.empty()) throw InvalidConfig("--backend scripted: needs a tape path");
        backend = std::make_shared<ScriptedBackend>(ScriptedBackend::load_tape(path));
    } else if (flags.backend == "remote") {
        if (flags.endpoint.empty())
            throw InvalidConfig("--backend remote needs --endpoint");
        RemoteBackendConfig config;
        config.endpoint = flags.endpoint;
        config.model = flags.model;
        if (const char* token = std::getenv("FACTCHECK_API_TOKEN")) config.auth_token = token;
        backend = std::make_shared<RemoteBackend>(std::move(config));
    } else {
        throw InvalidConfig("--backend must be scripted:<path> or remote, got \"" +
                            flags.backend + "\"");
    }
    if (!flags.cache_dir.empty())
        backend = std::make_shared<CachingBackend>(std::move(backend), flags.cache_dir);
    return backend;
}

PromptLibrary make_prompts(const RunFlags& flags) {
    if (flags.prompts_dir.empty()) return PromptLibrary::builtin();
    return PromptLibrary::load_dir(flags.prompts_dir);
}

int cmd_check(const RunFlags& flags, const std::string& text, const std::string& trace_path,
              std::ostream& out) {
    PipelineConfig config = make_config(flags);
    std::shared_ptr<CompletionBackend> backend = make_backend(flags);
    PromptLibrary prompts = make_prompts(flags);

    std::optional<CorpusStore> corpus;
    if (!flags.corpus_dir.empty()) corpus.emplace(CorpusStore::load_snapshot(flags.corpus_dir));

    PipelineDeps deps{*backend, prompts, corpus ? &*corpus : nullptr};
    CheckInput input;
    input.id = "input";
    input.text = text;
    CheckResult result = run_check(input, config, deps);

    std::ostringstream report;
    report << "Claims:\n";
    for (size_t i = 0; i < result.claims.size(); ++i)
        report << "  " << (i + 1) << ". " << result.claims[i].claim.text << "\n";
    for (size_t i = 0; i < result.claims.size(); ++i) {
        const ClaimCheck& claim = result.claims[i];
        report << "\n[" << (i + 1) << "] " << claim.claim.text << "\n";
        report << "  Search queries:\n";
        if (claim.queries.empty()) report << "    (none)\n";
        for (const SearchQuery& query : claim.queries)
            report << "    " << query.rank << ". " << query.text << "\n";
        report << "  Pages:\n";
        if (claim.retrieved_pages.empty()) report << "    (none)\n";
        for (const std::string& page : claim.retrieved_pages)
            report << "    " << page << "\n";
        report << "  Evidence:\n";
        if (claim.evidence.empty()) report << "    (none)\n";
        for (const SentenceRef& ref : claim.evidence)
            report << "    " << render_sentence_line(ref) << "\n";
        const Verdict& verdict = claim.verdict;
        report << "  Verdict: " << render_label(verdict.label);
        if (!verdict.vote_distribution.empty()) {
            report << " (votes:";
            for (const auto& [label, count] : verdict.vote_distribution)
                report << " " << render_label(label) << "=" << count;
            report << ")";
        }
        report << "\n";
    }
    report << "\nConclusion: " << render_label(result.final_verdict.label) << "\n";

    if (!trace_path.empty()) {
        std::ofstream trace_file(trace_path);
        if (!trace_file) throw Error("cannot write trace file: " + trace_path);
        trace_file << result.trace.to_jsonl();
    }
    out << report.str();
    return 0;
}

int cmd_eval(const RunFlags& flags, const std::string& dataset_path,
             const std::string& out_path, int jobs, std::ostream& out) {
    PipelineConfig config = make_config(flags);
    std::shared_ptr<CompletionBackend> backend = make_backend(flags);
    PromptLibrary prompts = make_prompts(flags);
    CorpusStore corpus = CorpusStore::load_snapshot(flags.corpus_dir);
    PipelineDeps deps{*backend, prompts, &corpus};

    EvalOptions options;
    options.jobs = jobs;

    EvalReport report;
    if (config.scheme == LabelScheme::Fever)
        report = evaluate_fever(load_fever(dataset_path), config, deps, options);
    else
        report = evaluate_wice(load_wice(dataset_path), config, deps, options);
    report.dataset_path = dataset_path;

    std::ostringstream output;
    output << report.table_header() << "\n" << report.table_row() << "\n";
    output << "records: " << report.n_records << "  failures: " << report.n_failures << "\n";
    if (!out_path.empty()) {
        std::ofstream report_file(out_path);
        if (!report_file) throw Error("cannot write report file: " + out_path);
        report_file << report.to_json_text();
        output << "report: " << out_path << "\n";
    }
    out << output.str();
    return 0;
}

int cmd_ingest(const std::string& dump_path, const std::string& out_dir, std::ostream& out) {
    size_t pages = ingest_wiki_dump(dump_path, out_dir);
    out << "ingested " << pages << " page(s) into " << out_dir << "\n";
    return 0;
}

int cmd_trace(const std::string& trace_path, std::ostream& out) {
    std::ifstream in(trace_path);
    if (!in) throw Error("cannot open trace file: " + trace_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    CheckTrace trace = CheckTrace::from_jsonl(buffer.str());
    out << trace.pretty();
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"LLM-prompted fact-checking pipeline"};
    app.name("factcheck");
    app.require_subcommand(1);
    app.set_config("--config", "", "config file mirroring the flags one-to-one");

    RunFlags check_flags;
    std::string check_text, check_trace_path;
    CLI::App* check = app.add_subcommand("check", "verify a single input text");
    check->add_option("text", check_text, "the text to fact-check")->required();
    check->add_option("--corpus", check_flags.corpus_dir, "corpus snapshot directory");
    check->add_option("--trace", check_trace_path, "write the run trace to this file");
    add_run_flags(check, check_flags, /*with_golden=*/false);

    RunFlags eval_flags;
    std::string eval_dataset, eval_out;
    int eval_jobs = 0;
    CLI::App* eval = app.add_subcommand("eval", "evaluate a dataset end to end");
    eval->add_option("--dataset", eval_dataset, "dataset records file")->required();
    eval->add_option("--corpus", eval_flags.corpus_dir, "corpus snapshot directory")
        ->required();
    eval->add_option("--out", eval_out, "write the machine-readable report here");
    eval->add_option("--jobs", eval_jobs, "worker threads (default: logical cores)")
        ->check(CLI::PositiveNumber);
    add_run_flags(eval, eval_flags, /*with_golden=*/true);

    std::string ingest_dump, ingest_out;
    CLI::App* ingest = app.add_subcommand("ingest", "build a corpus snapshot from a wiki dump");
    ingest->add_option("--dump", ingest_dump, "dump file or directory of dump files")
        ->required();
    ingest->add_option("--out", ingest_out, "snapshot output directory")->required();

    std::string trace_path;
    CLI::App* trace = app.add_subcommand("trace", "pretty-print a stored run trace");
    trace->add_option("file", trace_path, "trace file written by check --trace")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (check->parsed()) return cmd_check(check_flags, check_text, check_trace_path, out);
        if (eval->parsed()) return cmd_eval(eval_flags, eval_dataset, eval_out, eval_jobs, out);
        if (ingest->parsed()) return cmd_ingest(ingest_dump, ingest_out, out);
        if (trace->parsed()) return cmd_trace(trace_path, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "usage error: no command given\n";
    return 2;
}

}  // namespace factcheck
