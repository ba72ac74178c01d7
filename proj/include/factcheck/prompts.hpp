#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factcheck/errors.hpp"

namespace factcheck {

// An LLM prompt assembled from a task instruction, in-context demonstrations,
// and a query block whose slot marker is replaced by the actual input.
//
// Template file format (plain text):
//
//     module: claim_processor
//     slot: {{input}}
//
//     --- instruction
//     <free text>
//     --- demonstration input
//     <free text>
//     --- demonstration output
//     <free text>
//     (demonstration pairs repeat; at least one is required)
//     --- query
//     <free text containing the slot marker exactly once>
//
struct PromptTemplate {
    std::string module_name;
    std::string instruction;
    std::vector<std::pair<std::string, std::string>> demonstrations;
    std::string input_slot = "{{input}}";
    std::string query_block;  // contains input_slot exactly once

    // instruction, blank line, each demonstration as input + output, then the
    // query block with the slot filled in.
    std::string render(std::string_view input) const;
};

// Throws ParseError (with line numbers) on malformed text.
PromptTemplate parse_template(const std::string& text);

PromptTemplate load_template_file(const std::filesystem::path& path);

// The per-module template set used by the checker modules and the policy
// agent. Defaults are compiled in from data/prompts/; a directory of
// *.prompt files overrides them per module.
class PromptLibrary {
public:
    // Compiled-in defaults.
    static PromptLibrary builtin();

    // Builtin defaults overlaid with every *.prompt file in `dir`.
    static PromptLibrary load_dir(const std::filesystem::path& dir);

    const PromptTemplate& get(const std::string& module_name) const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

}  // namespace factcheck
