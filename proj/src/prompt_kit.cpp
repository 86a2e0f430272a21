#include "cmind/prompt_kit.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>

#include "cmind/error.hpp"
#include "cmind/prompt_resources.hpp"
#include "cmind/util.hpp"

namespace cmind {

BugReport BugReport::from_text(std::string text) {
    if (trim(text).empty())
        throw Error(ErrorCode::InvalidReport, "bug report is empty");
    return BugReport{std::move(text)};
}

BugReport BugReport::from_file(const std::filesystem::path& path) {
    return from_text(utf8_sanitize(read_file(path)));
}

const char* reasoning_strategy_name(ReasoningStrategy strategy) {
    switch (strategy) {
    case ReasoningStrategy::forward_reasoning: return "forward_reasoning";
    case ReasoningStrategy::backward_reasoning: return "backward_reasoning";
    case ReasoningStrategy::code_comprehension: return "code_comprehension";
    }
    return "unknown";
}

std::string substitute_placeholders(const std::string& tmpl,
                                    const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            std::size_t close = tmpl.find('}', i + 1);
            if (close != std::string::npos) {
                std::string key = tmpl.substr(i + 1, close - i - 1);
                auto it = values.find(key);
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i]);
        ++i;
    }
    return out;
}

PromptKit::PromptKit() {
    if (const char* dir = std::getenv("CMIND_PROMPT_DIR"); dir != nullptr && *dir != '\0') {
        *this = from_directory(dir);
        return;
    }
    templates_[PromptTemplate::entry_collection] = embedded::kEntryCollectionTemplate;
    templates_[PromptTemplate::analysis_choice] = embedded::kAnalysisChoiceTemplate;
    templates_[PromptTemplate::chain_selection] = embedded::kChainSelectionTemplate;
    templates_[PromptTemplate::bug_reasoner] = embedded::kBugReasonerTemplate;
    templates_[PromptTemplate::summary] = embedded::kSummaryTemplate;
}

PromptKit PromptKit::from_directory(const std::filesystem::path& dir) {
    static const std::pair<PromptTemplate, const char*> kFiles[] = {
        {PromptTemplate::entry_collection, "entry_collection.txt"},
        {PromptTemplate::analysis_choice, "analysis_choice.txt"},
        {PromptTemplate::chain_selection, "chain_selection.txt"},
        {PromptTemplate::bug_reasoner, "bug_reasoner.txt"},
        {PromptTemplate::summary, "summary.txt"},
    };
    PromptKit kit;
    for (const auto& [which, filename] : kFiles) {
        std::filesystem::path path = dir / filename;
        try {
            kit.templates_[which] = read_file(path);
        } catch (const Error&) {
            throw Error(ErrorCode::ConfigInvalid, "missing prompt template " + path.string());
        }
    }
    return kit;
}

const std::string& PromptKit::template_text(PromptTemplate which) const {
    return templates_.at(which);
}

std::uint64_t PromptKit::template_checksum(PromptTemplate which) const {
    return fnv1a64(templates_.at(which));
}

std::string PromptKit::render_entry_prompt(const BugReport& report,
                                           const std::vector<std::string>& filenames) const {
    std::string listing;
    for (std::size_t i = 0; i < filenames.size(); ++i) {
        if (i > 0) listing += ", ";
        listing += filenames[i];
    }
    return substitute_placeholders(template_text(PromptTemplate::entry_collection),
                                   {{"bug_report", report.text}, {"filename", listing}});
}

std::string PromptKit::render_analysis_choice_prompt(
    const BugReport& report, const CodeBlockSet& codeblocks,
    const std::vector<std::string>& function_names) const {
    std::string names;
    for (std::size_t i = 0; i < function_names.size(); ++i) {
        if (i > 0) names += ", ";
        names += function_names[i];
    }
    return substitute_placeholders(template_text(PromptTemplate::analysis_choice),
                                   {{"bug_report", report.text},
                                    {"codeblocks", render_code_blocks(codeblocks)},
                                    {"function_name", names}});
}

std::string PromptKit::render_chain_selection_prompt(const std::string& callpaths,
                                                     const BugReport& report,
                                                     const CodeBlockSet& codeblocks) const {
    return substitute_placeholders(template_text(PromptTemplate::chain_selection),
                                   {{"callpaths", callpaths},
                                    {"bug_report", report.text},
                                    {"codeblocks", render_code_blocks(codeblocks)}});
}

std::string PromptKit::render_reasoner_prompt(const CodeBlockSet& codeblocks,
                                              const std::string& callmethods,
                                              const std::string& path_to_explore,
                                              const BugReport& report) const {
    return substitute_placeholders(template_text(PromptTemplate::bug_reasoner),
                                   {{"codeblocks", render_code_blocks(codeblocks)},
                                    {"callmethods", callmethods},
                                    {"path_to_explore", path_to_explore},
                                    {"bug_report", report.text}});
}

std::string PromptKit::render_summary_prompt(const std::string& reasoning_steps,
                                             const std::string& hypothesis) const {
    return substitute_placeholders(template_text(PromptTemplate::summary),
                                   {{"reasoning_steps", reasoning_steps},
                                    {"hypothesis", hypothesis}});
}

// ---------------------------------------------------------------------------
// Output-grammar parsers
// ---------------------------------------------------------------------------

namespace {

std::string strip_brackets(std::string value) {
    value = trim(value);
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']')
        value = trim(value.substr(1, value.size() - 2));
    return value;
}

std::string strip_call_parens(std::string name) {
    name = trim(name);
    while (name.size() >= 2 && name.compare(name.size() - 2, 2, "()") == 0)
        name = trim(name.substr(0, name.size() - 2));
    return name;
}

bool is_none(const std::string& value) {
    return to_lower(value) == "none";
}

} // namespace

EntryPoints parse_entry_response(const std::string& text) {
    static const std::regex kToken(
        R"((METHOD|FILE)\s*:\s*[0-9]+\s*\.[ \t]*(\[[^\]\n]*\]|[^\s,;]+))",
        std::regex::icase);
    EntryPoints entry;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kToken);
         it != std::sregex_iterator(); ++it) {
        std::string kind = to_lower((*it)[1].str());
        std::string value = strip_call_parens(strip_brackets((*it)[2].str()));
        if (value.empty() || is_none(value)) continue;
        auto& bucket = kind == "method" ? entry.methods : entry.files;
        if (bucket.size() < 3) bucket.push_back(value);
    }
    if (entry.methods.empty() && entry.files.empty())
        throw Error(ErrorCode::NoEntryPoints, "response names no methods or files");
    return entry;
}

AnalysisChoice parse_analysis_choice(const std::string& text) {
    std::string lower = to_lower(collapse_whitespace(text));
    bool mentions_dataflow =
        lower.find("data flow") != std::string::npos || lower.find("dataflow") != std::string::npos;
    if (mentions_dataflow) {
        static const std::regex kSource(R"(source\s*:\s*\[?\s*([A-Za-z_][A-Za-z0-9_:~]*)\s*\]?)",
                                        std::regex::icase);
        static const std::regex kSink(R"(sink\s*:\s*\[?\s*([A-Za-z_][A-Za-z0-9_:~]*)\s*\]?)",
                                      std::regex::icase);
        std::smatch source_match, sink_match;
        if (std::regex_search(text, source_match, kSource) &&
            std::regex_search(text, sink_match, kSink)) {
            AnalysisChoice choice;
            choice.kind = AnalysisKind::dataflow;
            choice.source = source_match[1].str();
            choice.sink = sink_match[1].str();
            return choice;
        }
    }
    if (lower.find("call graph") != std::string::npos || lower.find("callgraph") != std::string::npos)
        return AnalysisChoice{AnalysisKind::callgraph, "", ""};
    throw Error(ErrorCode::UnparseableChoice, "neither analysis named: " + collapse_whitespace(text).substr(0, 120));
}

std::vector<CallChain> parse_chain_selection(const std::string& text,
                                             const std::vector<CallChain>& offered,
                                             std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& message) {
        if (warnings != nullptr) warnings->push_back(message);
    };

    auto canonical = [](const CallChain& chain) {
        std::vector<std::string> names = chain.functions;
        if (chain.direction == ChainDirection::backward)
            std::reverse(names.begin(), names.end());
        return names;
    };
    auto is_contiguous_subsequence = [](const std::vector<std::string>& part,
                                        const std::vector<std::string>& whole) {
        if (part.empty() || part.size() > whole.size()) return false;
        for (std::size_t offset = 0; offset + part.size() <= whole.size(); ++offset) {
            if (std::equal(part.begin(), part.end(), whole.begin() + static_cast<long>(offset)))
                return true;
        }
        return false;
    };

    static const std::regex kPathLabel(R"(path\s*:\s*[0-9]+\s*\.)", std::regex::icase);
    std::vector<std::pair<std::size_t, std::size_t>> labels; // (start, end) of each label
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kPathLabel);
         it != std::sregex_iterator(); ++it) {
        labels.emplace_back(static_cast<std::size_t>(it->position()),
                            static_cast<std::size_t>(it->position() + it->length()));
    }

    std::vector<CallChain> selected;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::size_t begin = labels[i].second;
        std::size_t end = i + 1 < labels.size() ? labels[i + 1].first : text.size();
        std::size_t newline = text.find('\n', begin);
        if (newline != std::string::npos && newline < end) end = newline;
        std::string chain_text = trim(text.substr(begin, end - begin));
        if (chain_text.empty()) continue;

        CallChain chain;
        try {
            chain = parse_call_chain(chain_text);
        } catch (const Error& e) {
            warn(std::string("dropped unparseable chain selection: ") + e.what());
            continue;
        }
        auto part = canonical(chain);
        bool valid = false;
        for (const auto& candidate : offered) {
            if (is_contiguous_subsequence(part, canonical(candidate))) { valid = true; break; }
        }
        if (!valid) {
            warn("dropped chain not offered: " + render_call_chain(chain));
            continue;
        }
        if (std::find(selected.begin(), selected.end(), chain) == selected.end())
            selected.push_back(std::move(chain));
    }

    if (selected.empty() && !offered.empty()) {
        warn("no valid chain selected; falling back to the first offered chain");
        selected.push_back(offered.front());
    }
    return selected;
}

ReasonerOutput parse_reasoner_response(const std::string& text) {
    static const std::regex kLabel(
        R"((REASONING\s+METHODS?|REASONING\s+STEPS|HYPOTHESIS|METHOD\s+MISSING)\s*:)",
        std::regex::icase);

    struct Field {
        std::string kind; // normalized: methods, steps, hypothesis, missing
        std::size_t value_start;
        std::size_t label_start;
    };
    std::vector<Field> fields;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kLabel);
         it != std::sregex_iterator(); ++it) {
        std::string label = to_lower(collapse_whitespace((*it)[1].str()));
        std::string kind;
        if (label.find("method missing") != std::string::npos) kind = "missing";
        else if (label.find("steps") != std::string::npos) kind = "steps";
        else if (label.find("reasoning method") != std::string::npos) kind = "methods";
        else kind = "hypothesis";
        fields.push_back({kind, static_cast<std::size_t>(it->position() + it->length()),
                          static_cast<std::size_t>(it->position())});
    }

    ReasonerOutput out;
    bool missing_field_present = false;
    std::string strategy_text;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        std::size_t end = i + 1 < fields.size() ? fields[i + 1].label_start : text.size();
        std::string value = strip_brackets(text.substr(fields[i].value_start,
                                                       end - fields[i].value_start));
        if (fields[i].kind == "methods") {
            strategy_text = value;
        } else if (fields[i].kind == "steps") {
            out.steps = value;
        } else if (fields[i].kind == "hypothesis") {
            out.hypothesis = value;
        } else {
            missing_field_present = true;
            std::string normalized = value;
            for (char& c : normalized)
                if (c == ',' || c == '\n' || c == '\t' || c == ';') c = ' ';
            for (const auto& piece : split_lines(collapse_whitespace(normalized))) {
                for (std::size_t start = 0, pos = 0; pos <= piece.size(); ++pos) {
                    if (pos == piece.size() || piece[pos] == ' ') {
                        std::string name = strip_call_parens(strip_brackets(piece.substr(start, pos - start)));
                        start = pos + 1;
                        if (name.empty() || is_none(name)) continue;
                        if (std::find(out.missing_methods.begin(), out.missing_methods.end(), name) ==
                            out.missing_methods.end())
                            out.missing_methods.push_back(name);
                    }
                }
            }
        }
    }
    (void)missing_field_present;

    // Strategy normalizes by keyword; fall back to scanning the whole reply.
    std::string scan = to_lower(strategy_text.empty() ? text : strategy_text);
    if (scan.find("forward") != std::string::npos)
        out.strategy = ReasoningStrategy::forward_reasoning;
    else if (scan.find("backward") != std::string::npos)
        out.strategy = ReasoningStrategy::backward_reasoning;
    else if (scan.find("comprehension") != std::string::npos)
        out.strategy = ReasoningStrategy::code_comprehension;

    if (trim(out.hypothesis).empty() && out.missing_methods.empty())
        throw Error(ErrorCode::UnparseableReasoning,
                    "reply has neither a hypothesis nor a METHOD MISSING request");
    return out;
}

} // namespace cmind
