#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cmind {

enum class LlmBackend { live, scripted, recording };

enum class StageLabel {
    entry_collector,
    analysis_selector,
    chain_selector,
    reasoner,
    summarizer,
};

const char* stage_label_name(StageLabel stage);
std::optional<StageLabel> stage_label_from_name(const std::string& name);

struct LlmConfig {
    LlmBackend backend = LlmBackend::scripted;
    std::string model_name = "o4-mini";
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string api_key_ref = "OPENAI_API_KEY"; // environment variable holding the key
    int max_retries = 3;
    int request_timeout_seconds = 60;
    int retry_backoff_ms = 250; // doubled per attempt; tests set 0
    std::string transcript_path; // scripted input / recording output
};

struct LlmExchange {
    std::string prompt;   // stored verbatim
    std::string response; // stored verbatim
    long latency_ms = 0;
    long prompt_tokens = -1;     // -1 when the backend does not report
    long completion_tokens = -1;
};

struct TranscriptEntry {
    std::string stage;
    std::string fingerprint; // empty means "unchecked" (hand-authored)
    std::string prompt;
    std::string response;
};

/// Stable hash of the normalized (whitespace-collapsed) prompt text.
std::string prompt_fingerprint(std::string_view prompt);

struct Transcript {
    std::vector<TranscriptEntry> entries;

    /// Line-delimited JSON records {stage, fingerprint, prompt, response}.
    /// Records with a "header" key are metadata and skipped. Throws
    /// TranscriptStageMismatch for unknown stage labels, IoError on read
    /// failure.
    static Transcript load_jsonl(const std::filesystem::path& path);
};

class LlmGateway;

/// Per-stage conversation record. History is append-only and audit-only:
/// every pipeline prompt is self-contained, so history is never resent.
class Session {
public:
    StageLabel stage() const { return stage_; }
    const std::vector<LlmExchange>& history() const { return history_; }

private:
    friend class LlmGateway;
    explicit Session(StageLabel stage) : stage_(stage) {}

    StageLabel stage_;
    std::vector<LlmExchange> history_;
};

/// Performs one live request; throws Error(TransportError) on failure.
/// Injectable so retry behavior is testable without a network.
using TransportFn = std::function<std::string(const LlmConfig&, const std::string& prompt)>;

class LlmGateway {
public:
    /// Validates the config (live/recording need endpoint + api_key_ref,
    /// scripted needs a readable transcript); throws ConfigInvalid.
    explicit LlmGateway(LlmConfig config);

    LlmGateway(const LlmGateway&) = delete;
    LlmGateway& operator=(const LlmGateway&) = delete;

    Session& new_session(StageLabel stage);

    /// live: one user message, assistant text back, retries with exponential
    /// backoff on TransportError. scripted: next transcript entry for the
    /// session's stage (fingerprint mismatches warn, not fail). recording:
    /// live + append to the transcript file.
    std::string complete(Session& session, const std::string& prompt);

    const LlmConfig& config() const { return config_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    const std::deque<Session>& sessions() const { return sessions_; }

    void set_transport(TransportFn transport) { transport_ = std::move(transport); }

private:
    std::string complete_live(const std::string& prompt, long* latency_ms);

    LlmConfig config_;
    TransportFn transport_;
    std::deque<Session> sessions_; // deque: stable references
    std::map<std::string, std::deque<TranscriptEntry>> scripted_; // per-stage queues
    bool recording_header_written_ = false;
    std::vector<std::string> warnings_;
};

/// Default transport speaking the HTTP JSON chat-completion protocol.
std::string http_chat_completion(const LlmConfig& config, const std::string& prompt);

} // namespace cmind
