#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cmind/callgraph.hpp"
#include "cmind/error.hpp"
#include "cmind/eval.hpp"
#include "cmind/function_index.hpp"
#include "cmind/job_service.hpp"
#include "cmind/pipeline.hpp"
#include "cmind/util.hpp"

namespace {

using nlohmann::json;

constexpr int kExitCompleted = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 64;    // EX_USAGE
constexpr int kExitData = 65;     // EX_DATAERR
constexpr int kExitIo = 74;       // EX_IOERR
constexpr int kExitAddress = 75;  // EX_TEMPFAIL

int exit_code_for(const cmind::Error& e) {
    switch (e.code()) {
    case cmind::ErrorCode::PathNotFound:
    case cmind::ErrorCode::IoError:
    case cmind::ErrorCode::UnsupportedArchive:
    case cmind::ErrorCode::ArchiveTraversal:
    case cmind::ErrorCode::ArchiveTooLarge:
    case cmind::ErrorCode::InvalidReport:
        return kExitIo;
    case cmind::ErrorCode::AddressInUse:
        return kExitAddress;
    case cmind::ErrorCode::UnknownRoot:
    case cmind::ErrorCode::ManifestInvalid:
        return kExitData;
    default:
        return kExitFailed;
    }
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return (value != nullptr && *value != '\0') ? value : fallback;
}

// Config precedence: flags > environment > config file ($CMIND_CONFIG, else
// ~/.config/cmind/config.json).
cmind::PipelineConfig base_pipeline_config() {
    cmind::PipelineConfig config;

    std::filesystem::path config_path;
    if (const char* explicit_path = std::getenv("CMIND_CONFIG");
        explicit_path != nullptr && *explicit_path != '\0') {
        config_path = explicit_path;
    } else if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') {
        config_path = std::filesystem::path(home) / ".config" / "cmind" / "config.json";
    }
    if (!config_path.empty() && std::filesystem::exists(config_path)) {
        try {
            json j = json::parse(cmind::read_file(config_path));
            config.llm.model_name = j.value("model", config.llm.model_name);
            config.llm.endpoint = j.value("endpoint", config.llm.endpoint);
            config.llm.api_key_ref = j.value("api_key_env", config.llm.api_key_ref);
            config.max_iterations = j.value("max_iterations", config.max_iterations);
            config.max_chain_depth = j.value("chain_depth", config.max_chain_depth);
            config.code_budget = j.value("code_budget", config.code_budget);
        } catch (const std::exception& e) {
            std::cerr << "warning: ignoring config file " << config_path << ": " << e.what() << "\n";
        }
    }

    config.llm.model_name = env_or("CMIND_MODEL", config.llm.model_name);
    config.llm.endpoint = env_or("CMIND_ENDPOINT", config.llm.endpoint);
    config.llm.api_key_ref = env_or("CMIND_API_KEY_ENV", config.llm.api_key_ref);
    return config;
}

void apply_backend_flags(cmind::LlmConfig& llm, const std::string& transcript,
                         const std::string& record) {
    if (!transcript.empty()) {
        llm.backend = cmind::LlmBackend::scripted;
        llm.transcript_path = transcript;
    } else if (!record.empty()) {
        llm.backend = cmind::LlmBackend::recording;
        llm.transcript_path = record;
    } else {
        llm.backend = cmind::LlmBackend::live;
    }
}

int run_localize(const std::string& src, const std::string& report_path,
                 const std::string& transcript, const std::string& record,
                 const std::string& out_path, cmind::PipelineConfig config) {
    apply_backend_flags(config.llm, transcript, record);

    cmind::BugReport report = cmind::BugReport::from_file(report_path);
    cmind::SourceTree tree = cmind::load_source_tree(src);
    cmind::LlmGateway gateway(config.llm);
    cmind::LocalizationResult result = cmind::run_pipeline(report, tree, config, gateway);

    if (!out_path.empty()) {
        cmind::write_file(out_path, result.to_json().dump(2, ' ', false,
                                                          json::error_handler_t::replace) +
                                        "\n");
    }
    for (const auto& warning : result.trace.warnings) std::cerr << "warning: " << warning << "\n";

    switch (result.status) {
    case cmind::RunStatus::completed:
        std::cout << result.summary << "\n";
        return kExitCompleted;
    case cmind::RunStatus::inconclusive:
        std::cout << result.summary << "\n";
        std::cerr << "inconclusive: iteration budget exhausted before a final answer\n";
        return kExitInconclusive;
    case cmind::RunStatus::failed:
        std::cerr << "failed: " << result.failure_reason << "\n";
        return kExitFailed;
    }
    return kExitFailed;
}

cmind::JobHttpServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

int run_serve(const std::string& listen, const std::string& data_root, int workers,
              const std::string& transcript, const std::string& record,
              cmind::PipelineConfig config) {
    apply_backend_flags(config.llm, transcript, record);

    std::string host = "127.0.0.1";
    int port = 8080;
    if (std::size_t colon = listen.rfind(':'); colon != std::string::npos) {
        host = listen.substr(0, colon);
        port = std::stoi(listen.substr(colon + 1));
    } else if (!listen.empty()) {
        host = listen;
    }

    cmind::JobServiceConfig service_config;
    service_config.data_root = data_root;
    service_config.workers = workers;
    service_config.pipeline = std::move(config);

    cmind::JobService service(std::move(service_config));
    cmind::JobHttpServer server(service);
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    std::cerr << "cmind: serving on " << host << ":" << port << " (data root " << data_root
              << ", " << workers << " workers)\n";
    server.listen(host, port);
    std::cerr << "cmind: shutting down\n";
    g_server = nullptr;
    return kExitCompleted;
}

int run_eval(const std::string& corpus, const std::string& out_dir, bool review,
             const std::string& model_label, cmind::PipelineConfig config) {
    cmind::EvalReport report = cmind::run_corpus(corpus, config, model_label);

    std::filesystem::path out(out_dir.empty() ? corpus : out_dir);
    std::filesystem::create_directories(out);
    cmind::write_file(out / "eval_report.json",
                      report.to_json().dump(2, ' ', false, json::error_handler_t::replace) + "\n");
    cmind::write_file(out / "eval_report.txt", report.render_table());

    std::cout << report.render_table();
    if (review) {
        for (const auto& r : report.per_case) {
            std::cout << "\n--- " << r.case_id << " [" << (r.correct ? "correct" : "incorrect")
                      << ", " << cmind::run_status_name(r.status) << "]\n"
                      << (r.hypothesis.empty() ? "(no hypothesis)" : r.hypothesis) << "\n";
        }
    }
    return kExitCompleted;
}

int run_analyze(const std::string& src, bool chains, const std::vector<std::string>& roots,
                int depth, bool backward) {
    cmind::SourceTree tree = cmind::load_source_tree(src);
    cmind::FunctionIndex index = cmind::extract_functions(tree);
    cmind::CallGraph graph = cmind::build_callgraph(index);

    if (!chains) {
        for (const auto& [caller, callee] : graph.edges)
            std::cout << caller << " -> " << callee << "\n";
        return kExitCompleted;
    }

    cmind::ChainEnumeration enumeration = cmind::enumerate_call_chains(
        graph, roots,
        backward ? cmind::ChainDirection::backward : cmind::ChainDirection::forward, depth);
    for (const auto& chain : enumeration.chains)
        std::cout << cmind::render_call_chain(chain) << "\n";
    if (enumeration.truncated) std::cerr << "warning: chain list truncated\n";
    return kExitCompleted;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CMind: localize C memory bugs from a bug report and a source tree"};
    app.require_subcommand(1);

    cmind::PipelineConfig config = base_pipeline_config();

    std::string model = config.llm.model_name;
    std::string endpoint = config.llm.endpoint;
    std::string api_key_env = config.llm.api_key_ref;

    auto add_llm_flags = [&](CLI::App* cmd) {
        cmd->add_option("--model", model, "Chat-completion model name");
        cmd->add_option("--endpoint", endpoint, "Chat-completion endpoint URL");
        cmd->add_option("--api-key-env", api_key_env,
                        "Environment variable holding the API key");
    };

    // localize
    auto* localize = app.add_subcommand("localize", "Run bug localization once");
    std::string src, report_path, transcript, record, out_path;
    localize->add_option("--src", src, "Source folder or archive file")->required();
    localize->add_option("--report", report_path, "Bug report text file")->required();
    localize->add_option("--transcript", transcript, "Replay a recorded transcript (offline)");
    localize->add_option("--record", record, "Record live responses to this transcript file");
    localize->add_option("--out", out_path, "Write the result JSON here");
    localize->add_option("--max-iterations", config.max_iterations, "Reasoner loop bound");
    localize->add_option("--depth", config.max_chain_depth, "Call chain depth bound");
    localize->add_option("--budget", config.code_budget, "Code characters per prompt");
    add_llm_flags(localize);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the job-submission HTTP service");
    std::string listen = "127.0.0.1:8080";
    std::string data_root = "cmind-jobs";
    int workers = 2;
    serve->add_option("--listen", listen, "host:port to bind");
    serve->add_option("--data-root", data_root, "Directory for job persistence");
    serve->add_option("--workers", workers, "Concurrent pipeline runs");
    serve->add_option("--transcript", transcript, "Scripted mode for every job");
    serve->add_option("--record", record, "Record live responses per job");
    add_llm_flags(serve);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Run a corpus and emit correct/incorrect accounting");
    std::string corpus, out_dir, model_label;
    bool review = false;
    eval_cmd->add_option("--corpus", corpus, "Corpus directory with manifest.jsonl")->required();
    eval_cmd->add_option("--out", out_dir, "Output directory (defaults to the corpus dir)");
    eval_cmd->add_option("--model-label", model_label, "Label for the report's Models column");
    eval_cmd->add_flag("--review", review, "Print per-case hypotheses for human adjudication");
    add_llm_flags(eval_cmd);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Dump the callgraph or call chains");
    std::string analyze_src;
    bool chains = false, backward = false;
    std::vector<std::string> roots;
    int depth = 8;
    analyze->add_option("--src", analyze_src, "Source folder or archive file")->required();
    analyze->add_flag("--chains", chains, "Print chains instead of the edge list");
    analyze->add_option("--root", roots, "Chain enumeration root (repeatable)");
    analyze->add_option("--depth", depth, "Chain depth bound");
    analyze->add_flag("--backward", backward, "Follow callee -> caller edges");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    config.llm.model_name = model;
    config.llm.endpoint = endpoint;
    config.llm.api_key_ref = api_key_env;

    try {
        if (localize->parsed())
            return run_localize(src, report_path, transcript, record, out_path, config);
        if (serve->parsed())
            return run_serve(listen, data_root, workers, transcript, record, config);
        if (eval_cmd->parsed())
            return run_eval(corpus, out_dir, review, model_label, config);
        if (analyze->parsed()) {
            if (chains && roots.empty()) {
                std::cerr << "error: --chains requires at least one --root\n";
                return kExitUsage;
            }
            return run_analyze(analyze_src, chains, roots, depth, backward);
        }
    } catch (const cmind::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailed;
    }
    return kExitUsage;
}
