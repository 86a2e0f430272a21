#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmind/callgraph.hpp"
#include "cmind/code_blocks.hpp"

namespace cmind {

struct BugReport {
    std::string text;

    /// Throws InvalidReport when empty after whitespace trim.
    static BugReport from_text(std::string text);
    static BugReport from_file(const std::filesystem::path& path);
};

/// Up to three methods and three files; never contains the literal "NONE".
struct EntryPoints {
    std::vector<std::string> methods;
    std::vector<std::string> files;
};

enum class AnalysisKind { callgraph, dataflow };

struct AnalysisChoice {
    AnalysisKind kind = AnalysisKind::callgraph;
    std::string source; // dataflow only
    std::string sink;   // dataflow only
};

enum class ReasoningStrategy { forward_reasoning, backward_reasoning, code_comprehension };

const char* reasoning_strategy_name(ReasoningStrategy strategy);

struct ReasonerOutput {
    std::optional<ReasoningStrategy> strategy;
    std::string steps;
    std::string hypothesis;
    std::vector<std::string> missing_methods;
};

/// Straight `{placeholder}` substitution; the template text is never mutated
/// beyond replacing the named slots.
std::string substitute_placeholders(const std::string& tmpl,
                                    const std::map<std::string, std::string>& values);

enum class PromptTemplate {
    entry_collection,
    analysis_choice,
    chain_selection,
    bug_reasoner,
    summary,
};

/// Owns the five prompt templates. Defaults are embedded at build time from
/// resources/prompts/; a directory override (CMIND_PROMPT_DIR or an explicit
/// path) lets operators edit templates without rebuilding.
class PromptKit {
public:
    /// Embedded templates, unless CMIND_PROMPT_DIR points at a directory.
    PromptKit();
    static PromptKit from_directory(const std::filesystem::path& dir);

    const std::string& template_text(PromptTemplate which) const;
    std::uint64_t template_checksum(PromptTemplate which) const;

    std::string render_entry_prompt(const BugReport& report,
                                    const std::vector<std::string>& filenames) const;
    std::string render_analysis_choice_prompt(const BugReport& report,
                                              const CodeBlockSet& codeblocks,
                                              const std::vector<std::string>& function_names) const;
    std::string render_chain_selection_prompt(const std::string& callpaths,
                                              const BugReport& report,
                                              const CodeBlockSet& codeblocks) const;
    std::string render_reasoner_prompt(const CodeBlockSet& codeblocks,
                                       const std::string& callmethods,
                                       const std::string& path_to_explore,
                                       const BugReport& report) const;
    std::string render_summary_prompt(const std::string& reasoning_steps,
                                      const std::string& hypothesis) const;

private:
    std::map<PromptTemplate, std::string> templates_;
};

/// Scans for METHOD:n.value / FILE:n.value tokens (n = 1..3), case-insensitive
/// and tolerant of surrounding prose; NONE values drop, trailing "()" strips,
/// at most three of each survive. Throws NoEntryPoints when nothing remains.
EntryPoints parse_entry_response(const std::string& text);

/// "data flow analysis: source:[X] sink:[Y]" (brackets optional) wins; any
/// mention of call graph analysis falls back to callgraph; anything else
/// throws UnparseableChoice.
AnalysisChoice parse_analysis_choice(const std::string& text);

/// Extracts "path: n.<chain>" items and keeps only selections equal to an
/// offered chain or a contiguous subsequence of one. Invalid selections drop
/// with warnings; an empty result falls back to the first offered chain.
std::vector<CallChain> parse_chain_selection(const std::string& text,
                                             const std::vector<CallChain>& offered,
                                             std::vector<std::string>* warnings);

/// Tolerant extraction of the four labeled reasoner fields. Throws
/// UnparseableReasoning when there is neither a hypothesis nor a
/// METHOD MISSING request.
ReasonerOutput parse_reasoner_response(const std::string& text);

} // namespace cmind
