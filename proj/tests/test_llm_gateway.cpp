#include <doctest.h>

#include <atomic>

#include "cmind/error.hpp"
#include "cmind/llm.hpp"

#include "test_support.hpp"

using namespace cmind;
using test_support::TempDir;

namespace {

LlmConfig scripted_config(const std::filesystem::path& transcript) {
    LlmConfig config;
    config.backend = LlmBackend::scripted;
    config.transcript_path = transcript.string();
    return config;
}

} // namespace

TEST_SUITE("llm_gateway") {

TEST_CASE("sessions for different stages keep disjoint histories") {
    TempDir dir;
    auto path = test_support::write_transcript(dir.path, "t.jsonl",
                                               {{"entry_collector", "one"}, {"reasoner", "two"}});
    LlmGateway gateway(scripted_config(path));
    Session& entry = gateway.new_session(StageLabel::entry_collector);
    Session& reasoner = gateway.new_session(StageLabel::reasoner);

    CHECK(gateway.complete(entry, "p1") == "one");
    CHECK(gateway.complete(reasoner, "p2") == "two");
    REQUIRE(entry.history().size() == 1);
    REQUIRE(reasoner.history().size() == 1);
    CHECK(entry.history()[0].response == "one");
    CHECK(reasoner.history()[0].response == "two");
    CHECK(entry.history()[0].prompt == "p1");
}

TEST_CASE("config validation") {
    SUBCASE("live without endpoint") {
        LlmConfig config;
        config.backend = LlmBackend::live;
        config.endpoint = "";
        CHECK_THROWS_AS(LlmGateway{config}, Error);
    }
    SUBCASE("live without api key ref") {
        LlmConfig config;
        config.backend = LlmBackend::live;
        config.api_key_ref = "";
        try {
            LlmGateway gateway(config);
            FAIL("expected ConfigInvalid");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigInvalid);
        }
    }
    SUBCASE("scripted without a transcript") {
        LlmConfig config;
        config.backend = LlmBackend::scripted;
        CHECK_THROWS_AS(LlmGateway{config}, Error);
    }
    SUBCASE("empty prompts are rejected") {
        TempDir dir;
        auto path = test_support::write_transcript(dir.path, "t.jsonl", {{"reasoner", "x"}});
        LlmGateway gateway(scripted_config(path));
        Session& session = gateway.new_session(StageLabel::reasoner);
        CHECK_THROWS_AS(gateway.complete(session, "   "), Error);
    }
}

TEST_CASE("scripted replay is deterministic and per-stage") {
    TempDir dir;
    auto path = test_support::write_transcript(
        dir.path, "t.jsonl",
        {{"reasoner", "r1"}, {"entry_collector", "e1"}, {"reasoner", "r2"}});

    for (int round = 0; round < 2; ++round) {
        LlmGateway gateway(scripted_config(path));
        Session& reasoner = gateway.new_session(StageLabel::reasoner);
        Session& entry = gateway.new_session(StageLabel::entry_collector);
        CHECK(gateway.complete(reasoner, "a") == "r1");
        CHECK(gateway.complete(entry, "b") == "e1");
        CHECK(gateway.complete(reasoner, "c") == "r2");
    }
}

TEST_CASE("transcript exhaustion raises TranscriptExhausted") {
    TempDir dir;
    auto path = test_support::write_transcript(dir.path, "t.jsonl", {{"reasoner", "only"}});
    LlmGateway gateway(scripted_config(path));
    Session& session = gateway.new_session(StageLabel::reasoner);
    CHECK(gateway.complete(session, "x") == "only");
    try {
        gateway.complete(session, "y");
        FAIL("expected TranscriptExhausted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TranscriptExhausted);
    }
}

TEST_CASE("unknown stage labels fail at load") {
    TempDir dir;
    test_support::write_file(dir.path / "bad.jsonl",
                             R"({"stage":"oracle","fingerprint":"","prompt":"","response":"x"})"
                             "\n");
    try {
        LlmGateway gateway(scripted_config(dir.path / "bad.jsonl"));
        FAIL("expected TranscriptStageMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TranscriptStageMismatch);
    }
}

TEST_CASE("fingerprint mismatches warn but still replay") {
    TempDir dir;
    nlohmann::json record = {{"stage", "reasoner"},
                             {"fingerprint", "0000000000000000"},
                             {"prompt", "other"},
                             {"response", "r"}};
    test_support::write_file(dir.path / "t.jsonl", record.dump() + "\n");
    LlmGateway gateway(scripted_config(dir.path / "t.jsonl"));
    Session& session = gateway.new_session(StageLabel::reasoner);
    CHECK(gateway.complete(session, "different prompt") == "r");
    REQUIRE(gateway.warnings().size() == 1);
    CHECK(gateway.warnings()[0].find("fingerprint mismatch") != std::string::npos);
}

TEST_CASE("fingerprints are whitespace-collapsed hashes") {
    CHECK(prompt_fingerprint("a  b\n\tc") == prompt_fingerprint(" a b c "));
    CHECK(prompt_fingerprint("a b") != prompt_fingerprint("a c"));
    CHECK(prompt_fingerprint("x").size() == 16);
}

TEST_CASE("live retries: two transient failures then success on the third attempt") {
    LlmConfig config;
    config.backend = LlmBackend::live;
    config.max_retries = 3;
    config.retry_backoff_ms = 0;
    LlmGateway gateway(config);

    std::atomic<int> attempts{0};
    gateway.set_transport([&](const LlmConfig&, const std::string&) -> std::string {
        int n = ++attempts;
        if (n <= 2) throw Error(ErrorCode::TransportError, "transient");
        return "recovered";
    });
    Session& session = gateway.new_session(StageLabel::summarizer);
    CHECK(gateway.complete(session, "p") == "recovered");
    CHECK(attempts.load() == 3);
}

TEST_CASE("live retries: exhaustion rethrows TransportError") {
    LlmConfig config;
    config.backend = LlmBackend::live;
    config.max_retries = 2;
    config.retry_backoff_ms = 0;
    LlmGateway gateway(config);

    std::atomic<int> attempts{0};
    gateway.set_transport([&](const LlmConfig&, const std::string&) -> std::string {
        ++attempts;
        throw Error(ErrorCode::TransportError, "down");
    });
    Session& session = gateway.new_session(StageLabel::summarizer);
    try {
        gateway.complete(session, "p");
        FAIL("expected TransportError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TransportError);
    }
    CHECK(attempts.load() == 3); // initial + 2 retries
}

TEST_CASE("recording writes fingerprints that replay cleanly") {
    TempDir dir;
    std::filesystem::path path = dir.path / "rec.jsonl";

    LlmConfig config;
    config.backend = LlmBackend::recording;
    config.transcript_path = path.string();
    config.retry_backoff_ms = 0;
    LlmGateway recorder(config);
    recorder.set_transport([](const LlmConfig&, const std::string& prompt) {
        return "echo: " + prompt.substr(0, 8);
    });
    Session& session = recorder.new_session(StageLabel::entry_collector);
    CHECK(recorder.complete(session, "first prompt") == "echo: first pr");

    // Replay: the recorded fingerprint matches the same prompt, no warnings.
    LlmGateway replayer(scripted_config(path));
    Session& replay_session = replayer.new_session(StageLabel::entry_collector);
    CHECK(replayer.complete(replay_session, "first prompt") == "echo: first pr");
    CHECK(replayer.warnings().empty());

    // And the header record is tolerated by the loader.
    Transcript transcript = Transcript::load_jsonl(path);
    REQUIRE(transcript.entries.size() == 1);
    CHECK(transcript.entries[0].fingerprint == prompt_fingerprint("first prompt"));
}

} // TEST_SUITE
