#include "factcheck/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace factcheck {

namespace {

constexpr std::array<Label, 3> kFeverLabels = {
    Label::Supported, Label::Refuted, Label::NotEnoughInfo};
constexpr std::array<Label, 3> kWiceLabels = {
    Label::Supported, Label::PartiallySupported, Label::NotSupported};

struct Synonym {
    std::string_view key;  // normalize_token() form
    Label label;
};

// Versioned synonym table. Keys are the normalize_token() renderings, so an
// entry like "notenoughinfo" also covers "NOT ENOUGH INFO", "not_enough_info"
// and "Not enough info.". Extend the list here; do not add fuzzy matching.
constexpr std::array<Synonym, 13> kLabelSynonyms = {{
    {"supported", Label::Supported},
    {"support", Label::Supported},
    {"supports", Label::Supported},
    {"refuted", Label::Refuted},
    {"refute", Label::Refuted},
    {"refutes", Label::Refuted},
    {"notenoughinfo", Label::NotEnoughInfo},
    {"notenoughinformation", Label::NotEnoughInfo},
    {"nei", Label::NotEnoughInfo},
    {"partiallysupported", Label::PartiallySupported},
    {"partialsupport", Label::PartiallySupported},
    {"notsupported", Label::NotSupported},
    {"unsupported", Label::NotSupported},
}};

}  // namespace

const int kLabelSynonymTableVersion = 1;

std::span<const Label> scheme_labels(LabelScheme scheme) {
    return scheme == LabelScheme::Fever ? std::span<const Label>(kFeverLabels)
                                        : std::span<const Label>(kWiceLabels);
}

bool label_in_scheme(Label label, LabelScheme scheme) {
    auto labels = scheme_labels(scheme);
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::string_view render_label(Label label) {
    switch (label) {
        case Label::Supported: return "Supported";
        case Label::Refuted: return "Refuted";
        case Label::NotEnoughInfo: return "NotEnoughInfo";
        case Label::PartiallySupported: return "PartiallySupported";
        case Label::NotSupported: return "NotSupported";
    }
    return "?";
}

std::string_view render_scheme(LabelScheme scheme) {
    return scheme == LabelScheme::Fever ? "fever" : "wice";
}

LabelScheme parse_scheme(std::string_view name) {
    std::string n = normalize_token(name);
    if (n == "fever") return LabelScheme::Fever;
    if (n == "wice") return LabelScheme::Wice;
    throw InvalidConfig("unknown label scheme: \"" + std::string(name) + "\"");
}

Label parse_label(std::string_view raw, LabelScheme scheme) {
    const std::string key = normalize_token(raw);
    for (const auto& entry : kLabelSynonyms) {
        if (entry.key == key && label_in_scheme(entry.label, scheme)) {
            return entry.label;
        }
    }
    throw UnrecognizedLabel(std::string(raw));
}

Label aggregate_subclaim_labels(const std::vector<Label>& labels) {
    if (labels.empty()) throw EmptyInput("aggregate_subclaim_labels");
    bool all_supported = true;
    bool all_not_supported = true;
    for (Label l : labels) {
        if (!label_in_scheme(l, LabelScheme::Wice)) {
            throw SchemeMismatch("aggregate_subclaim_labels expects Wice labels, got " +
                                 std::string(render_label(l)));
        }
        all_supported = all_supported && l == Label::Supported;
        all_not_supported = all_not_supported && l == Label::NotSupported;
    }
    if (all_supported) return Label::Supported;
    if (all_not_supported) return Label::NotSupported;
    return Label::PartiallySupported;
}

std::string trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string normalize_token(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
    }
    return out;
}

}  // namespace factcheck
