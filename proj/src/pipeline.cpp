#include "cmind/pipeline.hpp"

#include <algorithm>
#include <set>

#include "cmind/callgraph.hpp"
#include "cmind/code_blocks.hpp"
#include "cmind/dataflow.hpp"
#include "cmind/error.hpp"
#include "cmind/function_index.hpp"
#include "cmind/util.hpp"

namespace cmind {

using nlohmann::json;

const char* run_status_name(RunStatus status) {
    switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::inconclusive: return "inconclusive";
    case RunStatus::failed: return "failed";
    }
    return "unknown";
}

namespace {

constexpr const char* kReaskSuffix =
    "\nYour previous reply did not follow the required format. "
    "Please answer again using exactly the required format.";

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

const char* analysis_kind_name(AnalysisKind kind) {
    return kind == AnalysisKind::callgraph ? "callgraph" : "dataflow";
}

class PipelineRun {
public:
    PipelineRun(const BugReport& report, const SourceTree& tree,
                const PipelineConfig& config, LlmGateway& gateway)
        : report_(report), tree_(tree), config_(config), gateway_(gateway),
          entry_session_(gateway.new_session(StageLabel::entry_collector)),
          analysis_session_(gateway.new_session(StageLabel::analysis_selector)),
          chain_session_(gateway.new_session(StageLabel::chain_selector)),
          reasoner_session_(gateway.new_session(StageLabel::reasoner)),
          summarizer_session_(gateway.new_session(StageLabel::summarizer)) {}

    LocalizationResult run() {
        LocalizationResult result;
        try {
            index_ = extract_functions(tree_);
            tool_event("extract_functions", tree_.root_label,
                       std::to_string(index_.functions.size()) + " functions, " +
                           std::to_string(index_.warnings.size()) + " warnings");
            for (const auto& warning : index_.warnings) warn("extract: " + warning);

            collect_entry_points();
            run_static_analysis();
            auto [final_output, exhausted] = reason_loop();
            result = summarize(final_output, exhausted);
        } catch (const Error& e) {
            result.status = RunStatus::failed;
            result.failure_reason = error_code_name(e.code());
            warn(std::string("pipeline failed: ") + e.what());
            result.entry = entry_;
            if (choice_) result.analysis_kind = choice_->kind;
        } catch (const std::exception& e) {
            result.status = RunStatus::failed;
            result.failure_reason = "InternalError";
            warn(std::string("pipeline failed unexpectedly: ") + e.what());
        }
        for (const auto& warning : gateway_.warnings()) warn("gateway: " + warning);
        result.trace = std::move(trace_);
        return result;
    }

private:
    void warn(const std::string& message) { trace_.warnings.push_back(message); }

    void tool_event(const std::string& tool, const std::string& inputs, const std::string& outputs) {
        trace_.tool_events.push_back({tool, inputs, outputs});
    }

    void record_exchange(Session& session, const std::string& prompt,
                         const std::string& response, const std::string& parsed) {
        trace_.exchanges.push_back({stage_label_name(session.stage()), prompt, response, parsed});
    }

    // Sends `prompt`, parses the reply; on a parse failure re-sends the same
    // prompt with a one-line correction request, at most twice.
    template <typename ParseFn, typename DescribeFn>
    auto ask(Session& session, const std::string& prompt, ParseFn&& parse, DescribeFn&& describe) {
        std::string current = prompt;
        for (int attempt = 0;; ++attempt) {
            std::string response = gateway_.complete(session, current);
            try {
                auto parsed = parse(response);
                record_exchange(session, current, response, describe(parsed));
                return parsed;
            } catch (const Error& e) {
                record_exchange(session, current, response, std::string("parse error: ") + e.what());
                if (attempt >= 2) throw;
                current = prompt + kReaskSuffix;
            }
        }
    }

    void collect_entry_points() {
        std::vector<std::string> filenames;
        for (const auto& file : tree_.files) filenames.push_back(file.path);

        std::string prompt = kit_.render_entry_prompt(report_, filenames);
        entry_ = ask(entry_session_, prompt, parse_entry_response, [](const EntryPoints& e) {
            return std::to_string(e.methods.size()) + " methods, " +
                   std::to_string(e.files.size()) + " files";
        });

        std::vector<std::string> labels;
        for (const auto& name : entry_.methods) {
            auto defs = lookup_function(index_, name);
            tool_event("lookup_function", name, std::to_string(defs.size()) + " hits");
            if (defs.empty()) {
                warn("entry method not found in tree: " + name);
                continue;
            }
            labels.push_back(name);
            for (const FunctionDef* def : defs)
                if (std::find(entry_functions_.begin(), entry_functions_.end(),
                              def->qualified_name) == entry_functions_.end())
                    entry_functions_.push_back(def->qualified_name);
        }
        for (const auto& path : entry_.files) {
            const SourceFile* file = nullptr;
            try {
                file = lookup_file(tree_, path);
            } catch (const Error& e) {
                warn(std::string("entry file ambiguous: ") + e.what());
                continue;
            }
            if (file == nullptr) {
                warn("entry file not in the provided listing: " + path);
                continue;
            }
            entry_files_.push_back(file->path);
            labels.push_back(file->path);
        }

        if (labels.empty()) {
            // Nothing the model named exists; keep the run alive with a small
            // deterministic slice of the tree.
            warn("no entry point resolved; falling back to the first C files in the tree");
            int added = 0;
            for (const auto& file : tree_.files) {
                if (file.language_tag != LanguageTag::c_source) continue;
                labels.push_back(file.path);
                entry_files_.push_back(file.path);
                if (++added == PipelineConfig::kMaxEntryPoints) break;
            }
        }

        known_blocks_ = collect_code_blocks(index_, tree_, labels, config_.code_budget);
        tool_event("collect_code_blocks", join(labels, ", "),
                   std::to_string(known_blocks_.blocks.size()) + " blocks, " +
                       std::to_string(known_blocks_.absent.size()) + " absent");
        for (const auto& miss : known_blocks_.absent) warn("no code found for entry: " + miss);

        if (entry_functions_.empty()) {
            for (const auto& path : entry_files_) {
                auto it = index_.by_file.find(path);
                if (it == index_.by_file.end()) continue;
                for (std::size_t idx : it->second)
                    entry_functions_.push_back(index_.functions[idx].qualified_name);
            }
        }
    }

    void run_static_analysis() {
        graph_ = build_callgraph(index_);
        tool_event("build_callgraph", std::to_string(index_.functions.size()) + " functions",
                   std::to_string(graph_.edges.size()) + " edges, " +
                       std::to_string(graph_.unresolved_calls.size()) + " unresolved");

        std::string prompt =
            kit_.render_analysis_choice_prompt(report_, known_blocks_, entry_functions_);
        AnalysisChoice choice =
            ask(analysis_session_, prompt, parse_analysis_choice, [](const AnalysisChoice& c) {
                return c.kind == AnalysisKind::dataflow
                           ? "dataflow source=" + c.source + " sink=" + c.sink
                           : std::string("callgraph");
            });
        choice_ = choice;

        if (choice.kind == AnalysisKind::dataflow) {
            bool source_ok = false;
            for (const auto& name : entry_functions_) {
                if (name == choice.source) { source_ok = true; break; }
                std::size_t sep = name.rfind("::");
                if (sep != std::string::npos && name.substr(sep + 2) == choice.source)
                    source_ok = true;
            }
            if (!source_ok)
                warn("dataflow source '" + choice.source + "' is not an entry method");

            if (source_ok) {
                try {
                    dataflow_ = dataflow_paths(index_, graph_, choice.source, choice.sink, 16);
                    tool_event("dataflow_paths", choice.source + " -> " + choice.sink,
                               std::to_string(dataflow_.size()) + " paths");
                } catch (const Error& e) {
                    warn(std::string("dataflow failed: ") + e.what());
                }
            }
            if (!dataflow_.empty()) return;

            warn("dataflow produced no paths; falling back to call graph analysis");
            choice_->kind = AnalysisKind::callgraph;
        }

        run_callgraph_area();
    }

    void run_callgraph_area() {
        std::vector<std::string> roots = entry_functions_;
        if (roots.empty()) {
            warn("no chain roots available; skipping chain enumeration");
            return;
        }
        ChainEnumeration enumeration = enumerate_call_chains(
            graph_, roots, ChainDirection::forward, config_.max_chain_depth, config_.max_chains);
        tool_event("enumerate_call_chains", join(roots, ", "),
                   std::to_string(enumeration.chains.size()) + " chains" +
                       (enumeration.truncated ? " (truncated)" : ""));
        if (enumeration.truncated)
            warn("chain enumeration truncated at " + std::to_string(config_.max_chains));
        if (enumeration.chains.empty()) return;

        std::string callpaths;
        for (std::size_t i = 0; i < enumeration.chains.size(); ++i) {
            callpaths += std::to_string(i + 1) + ". " + render_call_chain(enumeration.chains[i]);
            callpaths += "\n";
        }
        std::string prompt = kit_.render_chain_selection_prompt(callpaths, report_, known_blocks_);
        std::string response = gateway_.complete(chain_session_, prompt);
        chains_ = parse_chain_selection(response, enumeration.chains, &trace_.warnings);
        std::vector<std::string> rendered;
        for (const auto& chain : chains_) rendered.push_back(render_call_chain(chain));
        record_exchange(chain_session_, prompt, response,
                        std::to_string(chains_.size()) + " chains selected");
        tool_event("parse_chain_selection", std::to_string(enumeration.chains.size()) + " offered",
                   join(rendered, " | "));
    }

    struct LoopOutcome {
        ReasonerOutput output;
        bool exhausted = false;
    };

    LoopOutcome reason_loop() {
        std::optional<ReasoningStrategy> previous_strategy;
        std::vector<std::string> feedback;

        for (int iteration = 1;; ++iteration) {
            bool dataflow_mode = choice_ && choice_->kind == AnalysisKind::dataflow &&
                                 !dataflow_.empty();
            std::string callmethods;
            std::string path_to_explore;
            if (dataflow_mode) {
                for (const auto& path : dataflow_) {
                    callmethods += render_dataflow_path(path);
                    callmethods += "\n";
                }
                path_to_explore = choice_->source + " -> " + choice_->sink;
            } else {
                std::vector<std::string> chain_functions;
                for (const auto& chain : chains_)
                    for (const auto& name : chain.functions)
                        if (std::find(chain_functions.begin(), chain_functions.end(), name) ==
                            chain_functions.end())
                            chain_functions.push_back(name);
                std::size_t used = known_blocks_.text_size();
                std::size_t budget_left = config_.code_budget > used ? config_.code_budget - used : 0;
                CodeBlockSet chain_blocks =
                    collect_code_blocks(index_, tree_, chain_functions, budget_left);
                callmethods = render_code_blocks(chain_blocks);
                std::vector<std::string> rendered;
                for (const auto& chain : chains_) rendered.push_back(render_call_chain(chain));
                path_to_explore = join(rendered, "\n");
            }
            if (!feedback.empty()) {
                callmethods += "\n" + join(feedback, "\n") + "\n";
                feedback.clear();
            }

            std::string prompt =
                kit_.render_reasoner_prompt(known_blocks_, callmethods, path_to_explore, report_);
            ReasonerOutput output =
                ask(reasoner_session_, prompt, parse_reasoner_response, [](const ReasonerOutput& o) {
                    std::string s = o.strategy ? reasoning_strategy_name(*o.strategy) : "no strategy";
                    return s + ", " + std::to_string(o.missing_methods.size()) + " missing";
                });

            if (output.strategy && previous_strategy && *output.strategy != *previous_strategy)
                warn("reasoning strategy changed from " +
                     std::string(reasoning_strategy_name(*previous_strategy)) + " to " +
                     reasoning_strategy_name(*output.strategy));
            if (output.strategy) previous_strategy = output.strategy;

            if (output.missing_methods.empty()) return {output, false};
            if (iteration >= config_.max_iterations) {
                warn("reasoner still requesting methods at max_iterations=" +
                     std::to_string(config_.max_iterations));
                return {output, true};
            }

            std::vector<std::string> to_add;
            for (const auto& name : output.missing_methods) {
                if (fulfilled_.count(name)) {
                    feedback.push_back("NOT FOUND: " + name);
                    continue;
                }
                fulfilled_.insert(name);
                auto defs = lookup_function(index_, name);
                tool_event("lookup_function", name, std::to_string(defs.size()) + " hits");
                if (defs.empty()) feedback.push_back("NOT FOUND: " + name);
                else to_add.push_back(name);
            }
            if (!to_add.empty()) {
                append_code_blocks(known_blocks_, index_, tree_, to_add, config_.code_budget);
                if (known_blocks_.truncated)
                    warn("code budget reached while fulfilling method requests");
            }
        }
    }

    LocalizationResult summarize(const ReasonerOutput& output, bool exhausted) {
        LocalizationResult result;
        result.hypothesis = trim(output.hypothesis);
        result.strategy = output.strategy;
        result.reasoning_steps = output.steps;
        result.entry = entry_;
        if (choice_) result.analysis_kind = choice_->kind;
        for (const auto& chain : chains_) result.selected_chains.push_back(render_call_chain(chain));

        if (result.hypothesis.empty()) {
            result.status = RunStatus::inconclusive;
            return result;
        }

        std::string prompt = kit_.render_summary_prompt(output.steps, result.hypothesis);
        std::string summary;
        try {
            summary = gateway_.complete(summarizer_session_, prompt);
            record_exchange(summarizer_session_, prompt, summary, "summary");
        } catch (const Error& e) {
            warn(std::string("summary stage failed: ") + e.what() + "; using the hypothesis verbatim");
            summary = result.hypothesis;
        }
        if (trim(summary).empty()) summary = result.hypothesis;
        result.summary = summary;
        result.status = exhausted ? RunStatus::inconclusive : RunStatus::completed;
        return result;
    }

    const BugReport& report_;
    const SourceTree& tree_;
    const PipelineConfig& config_;
    LlmGateway& gateway_;
    PromptKit kit_;

    Session& entry_session_;
    Session& analysis_session_;
    Session& chain_session_;
    Session& reasoner_session_;
    Session& summarizer_session_;

    FunctionIndex index_;
    CallGraph graph_;
    EntryPoints entry_;
    std::optional<AnalysisChoice> choice_;
    std::vector<CallChain> chains_;
    std::vector<DataflowPath> dataflow_;
    CodeBlockSet known_blocks_;
    std::vector<std::string> entry_functions_; // resolved entry methods (qualified)
    std::vector<std::string> entry_files_;
    std::set<std::string> fulfilled_;
    ReasoningTrace trace_;
};

} // namespace

LocalizationResult run_pipeline(const BugReport& report,
                                const SourceTree& tree,
                                const PipelineConfig& config,
                                LlmGateway& gateway) {
    PipelineRun run(report, tree, config, gateway);
    return run.run();
}

json LocalizationResult::to_json() const {
    json exchanges = json::array();
    for (const auto& e : trace.exchanges)
        exchanges.push_back({{"stage", e.stage}, {"prompt", e.prompt}, {"response", e.response}});
    json j = {
        {"status", run_status_name(status)},
        {"hypothesis", hypothesis},
        {"strategy", strategy ? json(reasoning_strategy_name(*strategy)) : json(nullptr)},
        {"reasoning_steps", reasoning_steps},
        {"summary", summary},
        {"entry_points", {{"methods", entry.methods}, {"files", entry.files}}},
        {"analysis_kind", analysis_kind ? json(analysis_kind_name(*analysis_kind)) : json(nullptr)},
        {"selected_chains", selected_chains},
        {"warnings", trace.warnings},
        {"trace", exchanges},
    };
    if (status == RunStatus::failed) j["failure_reason"] = failure_reason;
    return j;
}

} // namespace cmind
