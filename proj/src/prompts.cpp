#include "factcheck/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "factcheck/core.hpp"
#include "prompts_builtin.hpp"

namespace factcheck {

namespace {

size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return 0;
    size_t count = 0;
    for (size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

// Strips leading and trailing blank lines but keeps inner structure.
std::string trim_block(const std::string& block) {
    size_t b = 0;
    size_t e = block.size();
    while (b < e && (block[b] == '\n' || block[b] == '\r')) ++b;
    while (e > b && (block[e - 1] == '\n' || block[e - 1] == '\r' || block[e - 1] == ' ')) --e;
    return block.substr(b, e - b);
}

}  // namespace

std::string PromptTemplate::render(std::string_view input) const {
    std::string out = instruction;
    out += "\n\n";
    for (const auto& [demo_in, demo_out] : demonstrations) {
        out += demo_in;
        out += "\n";
        out += demo_out;
        out += "\n\n";
    }
    std::string query = query_block;
    size_t pos = query.find(input_slot);
    if (pos == std::string::npos) {
        throw InvalidConfig("template \"" + module_name + "\" has no input slot in its query block");
    }
    query.replace(pos, input_slot.size(), input);
    out += query;
    return out;
}

PromptTemplate parse_template(const std::string& text) {
    PromptTemplate tpl;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    std::string section;      // current section name, "" = header
    std::string body;         // accumulated section body
    int section_line = 0;
    std::vector<std::pair<std::string, std::string>> sections;  // (name, body)
    std::vector<int> section_lines;

    auto flush = [&]() {
        if (!section.empty()) {
            sections.emplace_back(section, trim_block(body));
            section_lines.push_back(section_line);
        }
        body.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("--- ", 0) == 0) {
            flush();
            section = trim(line.substr(4));
            section_line = line_no;
            continue;
        }
        if (section.empty()) {
            if (line.rfind("module:", 0) == 0) {
                tpl.module_name = trim(line.substr(7));
            } else if (line.rfind("slot:", 0) == 0) {
                tpl.input_slot = trim(line.substr(5));
            } else if (!trim(line).empty()) {
                throw ParseError(line_no, "unexpected text before first section: \"" + line + "\"");
            }
        } else {
            body += line;
            body += "\n";
        }
    }
    flush();

    std::string pending_demo_input;
    bool have_demo_input = false;
    for (size_t i = 0; i < sections.size(); ++i) {
        const auto& [name, content] = sections[i];
        int at = section_lines[i];
        if (name == "instruction") {
            tpl.instruction = content;
        } else if (name == "demonstration input") {
            if (have_demo_input) throw ParseError(at, "demonstration input without an output");
            pending_demo_input = content;
            have_demo_input = true;
        } else if (name == "demonstration output") {
            if (!have_demo_input) throw ParseError(at, "demonstration output without an input");
            tpl.demonstrations.emplace_back(pending_demo_input, content);
            have_demo_input = false;
        } else if (name == "query") {
            tpl.query_block = content;
        } else {
            throw ParseError(at, "unknown section \"" + name + "\"");
        }
    }

    if (tpl.module_name.empty()) throw ParseError(1, "missing module: header");
    if (tpl.input_slot.empty()) throw ParseError(1, "empty slot: marker");
    if (tpl.instruction.empty()) throw ParseError(1, "missing instruction section");
    if (have_demo_input) throw ParseError(1, "trailing demonstration input without an output");
    if (tpl.demonstrations.empty()) throw ParseError(1, "at least one demonstration is required");
    size_t slots = count_occurrences(tpl.query_block, tpl.input_slot);
    if (slots != 1) {
        throw ParseError(1, "query block must contain the slot marker exactly once, found " +
                                std::to_string(slots));
    }
    return tpl;
}

PromptTemplate load_template_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open prompt template: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_template(buffer.str());
}

PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    for (const auto& [name, text] : builtin_prompts()) {
        lib.templates_[name] = parse_template(std::string(text));
    }
    return lib;
}

PromptLibrary PromptLibrary::load_dir(const std::filesystem::path& dir) {
    PromptLibrary lib = builtin();
    if (!std::filesystem::is_directory(dir)) {
        throw InvalidConfig("prompt directory does not exist: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".prompt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        PromptTemplate tpl = load_template_file(path);
        lib.templates_[tpl.module_name] = std::move(tpl);
    }
    return lib;
}

const PromptTemplate& PromptLibrary::get(const std::string& module_name) const {
    auto it = templates_.find(module_name);
    if (it == templates_.end()) {
        throw InvalidConfig("no prompt template for module \"" + module_name + "\"");
    }
    return it->second;
}

}  // namespace factcheck
