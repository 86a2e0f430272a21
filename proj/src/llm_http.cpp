#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cmind/error.hpp"
#include "cmind/llm.hpp"

namespace cmind {

using nlohmann::json;

namespace {

struct ParsedEndpoint {
    std::string origin; // scheme://host[:port]
    std::string path;   // leading '/'
};

ParsedEndpoint parse_endpoint(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorCode::ConfigInvalid, "endpoint must be an http(s) URL: " + url);
    std::size_t path_start = url.find('/', scheme_end + 3);
    ParsedEndpoint out;
    if (path_start == std::string::npos) {
        out.origin = url;
        out.path = "/v1/chat/completions";
    } else {
        out.origin = url.substr(0, path_start);
        out.path = url.substr(path_start);
    }
    return out;
}

} // namespace

std::string http_chat_completion(const LlmConfig& config, const std::string& prompt) {
    ParsedEndpoint endpoint = parse_endpoint(config.endpoint);

    const char* key = std::getenv(config.api_key_ref.c_str());
    if (key == nullptr || *key == '\0')
        throw Error(ErrorCode::ConfigInvalid,
                    "environment variable " + config.api_key_ref + " is not set");

    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(config.request_timeout_seconds, 0);
    client.set_read_timeout(config.request_timeout_seconds, 0);
    client.set_write_timeout(config.request_timeout_seconds, 0);

    json body = {
        {"model", config.model_name},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
    };
    httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    auto result = client.Post(endpoint.path, headers, body.dump(), "application/json");
    if (!result)
        throw Error(ErrorCode::TransportError,
                    "request failed: " + httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300)
        throw Error(ErrorCode::TransportError,
                    "HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 512));

    try {
        json reply = json::parse(result->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::TransportError, std::string("malformed completion response: ") + e.what());
    }
}

} // namespace cmind
