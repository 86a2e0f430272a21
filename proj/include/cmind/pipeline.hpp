#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmind/llm.hpp"
#include "cmind/prompt_kit.hpp"
#include "cmind/source_tree.hpp"

namespace cmind {

struct PipelineConfig {
    int max_iterations = 5;    // Areas 3-5 loop bound
    int max_chain_depth = 8;
    int max_chains = 100;
    std::size_t code_budget = 24000; // characters of code per prompt
    static constexpr int kMaxEntryPoints = 3;
    LlmConfig llm;
};

struct TraceExchange {
    std::string stage;
    std::string prompt;
    std::string response;
    std::string parsed; // one-line summary of the parse outcome
};

struct ToolEvent {
    std::string tool;
    std::string inputs;
    std::string outputs;
};

/// Auditable record of the whole run: every LLM exchange exactly once, every
/// tool invocation, and the warnings accumulated along the way.
struct ReasoningTrace {
    std::vector<TraceExchange> exchanges;
    std::vector<ToolEvent> tool_events;
    std::vector<std::string> warnings;
};

enum class RunStatus { completed, inconclusive, failed };

const char* run_status_name(RunStatus status);

struct LocalizationResult {
    RunStatus status = RunStatus::failed;
    std::string hypothesis;
    std::optional<ReasoningStrategy> strategy;
    std::string reasoning_steps;
    std::string summary;
    EntryPoints entry;
    std::optional<AnalysisKind> analysis_kind;
    std::vector<std::string> selected_chains; // rendered arrow texts
    ReasoningTrace trace;
    std::string failure_reason; // set when status == failed

    nlohmann::json to_json() const;
};

/// Runs the staged pipeline end to end: collect entry points, choose and run
/// static analysis, iterate the reasoner with METHOD MISSING fulfillment,
/// then summarize. Errors never escape; failures come back as
/// status == failed with the trace up to that point.
LocalizationResult run_pipeline(const BugReport& report,
                                const SourceTree& tree,
                                const PipelineConfig& config,
                                LlmGateway& gateway);

} // namespace cmind
