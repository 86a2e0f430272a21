#include "cmind/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cmind/error.hpp"
#include "cmind/util.hpp"

namespace cmind {

using nlohmann::json;

const char* stage_label_name(StageLabel stage) {
    switch (stage) {
    case StageLabel::entry_collector: return "entry_collector";
    case StageLabel::analysis_selector: return "analysis_selector";
    case StageLabel::chain_selector: return "chain_selector";
    case StageLabel::reasoner: return "reasoner";
    case StageLabel::summarizer: return "summarizer";
    }
    return "unknown";
}

std::optional<StageLabel> stage_label_from_name(const std::string& name) {
    for (StageLabel stage : {StageLabel::entry_collector, StageLabel::analysis_selector,
                             StageLabel::chain_selector, StageLabel::reasoner,
                             StageLabel::summarizer}) {
        if (name == stage_label_name(stage)) return stage;
    }
    return std::nullopt;
}

std::string prompt_fingerprint(std::string_view prompt) {
    return to_hex64(fnv1a64(collapse_whitespace(prompt)));
}

Transcript Transcript::load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open transcript " + path.string());
    Transcript transcript;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::IoError,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (record.contains("header")) continue; // metadata record
        TranscriptEntry entry;
        entry.stage = record.value("stage", "");
        entry.fingerprint = record.value("fingerprint", "");
        entry.prompt = record.value("prompt", "");
        entry.response = record.value("response", "");
        if (!stage_label_from_name(entry.stage))
            throw Error(ErrorCode::TranscriptStageMismatch,
                        path.string() + ":" + std::to_string(line_no) +
                            ": unknown stage label '" + entry.stage + "'");
        transcript.entries.push_back(std::move(entry));
    }
    return transcript;
}

LlmGateway::LlmGateway(LlmConfig config) : config_(std::move(config)) {
    if (config_.max_retries < 0)
        throw Error(ErrorCode::ConfigInvalid, "max_retries must be >= 0");
    switch (config_.backend) {
    case LlmBackend::live:
        if (config_.endpoint.empty() || config_.api_key_ref.empty())
            throw Error(ErrorCode::ConfigInvalid, "live backend requires endpoint and api_key_ref");
        break;
    case LlmBackend::recording:
        if (config_.endpoint.empty() || config_.api_key_ref.empty())
            throw Error(ErrorCode::ConfigInvalid, "recording backend requires endpoint and api_key_ref");
        if (config_.transcript_path.empty())
            throw Error(ErrorCode::ConfigInvalid, "recording backend requires a transcript path");
        break;
    case LlmBackend::scripted: {
        if (config_.transcript_path.empty())
            throw Error(ErrorCode::ConfigInvalid, "scripted backend requires a transcript path");
        Transcript transcript = Transcript::load_jsonl(config_.transcript_path);
        for (auto& entry : transcript.entries)
            scripted_[entry.stage].push_back(std::move(entry));
        break;
    }
    }
    transport_ = http_chat_completion;
}

Session& LlmGateway::new_session(StageLabel stage) {
    sessions_.push_back(Session(stage));
    return sessions_.back();
}

std::string LlmGateway::complete(Session& session, const std::string& prompt) {
    if (trim(prompt).empty())
        throw Error(ErrorCode::ConfigInvalid, "prompt must be non-empty");

    LlmExchange exchange;
    exchange.prompt = prompt;

    switch (config_.backend) {
    case LlmBackend::scripted: {
        const char* stage = stage_label_name(session.stage());
        auto& queue = scripted_[stage];
        if (queue.empty())
            throw Error(ErrorCode::TranscriptExhausted,
                        std::string("no transcript entries left for stage ") + stage);
        TranscriptEntry entry = std::move(queue.front());
        queue.pop_front();
        if (!entry.fingerprint.empty() && entry.fingerprint != prompt_fingerprint(prompt)) {
            warnings_.push_back(std::string("fingerprint mismatch for stage ") + stage +
                                " (transcript " + entry.fingerprint + ", prompt " +
                                prompt_fingerprint(prompt) + ")");
        }
        exchange.response = entry.response;
        break;
    }
    case LlmBackend::live: {
        exchange.response = complete_live(prompt, &exchange.latency_ms);
        break;
    }
    case LlmBackend::recording: {
        exchange.response = complete_live(prompt, &exchange.latency_ms);
        std::ofstream out(config_.transcript_path, std::ios::app);
        if (!out) throw Error(ErrorCode::IoError, "cannot append to " + config_.transcript_path);
        if (!recording_header_written_) {
            out << json{{"header", {{"model", config_.model_name}}}}.dump() << "\n";
            recording_header_written_ = true;
        }
        json record = {{"stage", stage_label_name(session.stage())},
                       {"fingerprint", prompt_fingerprint(prompt)},
                       {"prompt", prompt},
                       {"response", exchange.response}};
        out << record.dump() << "\n";
        break;
    }
    }

    session.history_.push_back(exchange);
    return exchange.response;
}

std::string LlmGateway::complete_live(const std::string& prompt, long* latency_ms) {
    auto begin = std::chrono::steady_clock::now();
    for (int attempt = 0;; ++attempt) {
        try {
            std::string response = transport_(config_, prompt);
            *latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - begin)
                              .count();
            return response;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::TransportError || attempt >= config_.max_retries) throw;
            long delay = static_cast<long>(config_.retry_backoff_ms) << attempt;
            if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
}

} // namespace cmind
