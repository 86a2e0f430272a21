#include <regex>
#include <thread>

#include <httplib.h>

#include "cmind/error.hpp"
#include "cmind/job_service.hpp"

namespace cmind {

using nlohmann::json;

struct JobHttpServer::Impl {
    explicit Impl(JobService& service) : service(service) { configure(); }

    void configure() {
        server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("ok", "text/plain");
        });

        server.Post("/jobs", [this](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_file("report") || !req.has_file("source")) {
                respond_error(res, 400, "InvalidReport",
                              "multipart fields 'report' and 'source' are required");
                return;
            }
            try {
                std::string id = service.submit_job(req.get_file_value("report").content,
                                                    req.get_file_value("source").content);
                res.status = 202;
                res.set_content(json{{"id", id}}.dump(), "application/json");
            } catch (const Error& e) {
                respond_error(res, 400, error_code_name(e.code()), e.what());
            }
        });

        server.Get(R"(/jobs/([0-9a-f]{16})/result)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       try {
                           json result = service.fetch_result(req.matches[1].str());
                           res.set_content(
                               result.dump(2, ' ', false, json::error_handler_t::replace),
                               "application/json");
                       } catch (const Error& e) {
                           if (e.code() == ErrorCode::UnknownJob)
                               respond_error(res, 404, "UnknownJob", e.what());
                           else if (e.code() == ErrorCode::NotReady)
                               respond_error(res, 409, "NotReady", e.what());
                           else
                               respond_error(res, 500, error_code_name(e.code()), e.what());
                       }
                   });

        server.Get(R"(/jobs/([0-9a-f]{16}))",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       std::string id = req.matches[1].str();
                       auto record = service.store().get(id);
                       if (!record) {
                           respond_error(res, 404, "UnknownJob", id);
                           return;
                       }
                       json j = {{"id", record->id},
                                 {"status", job_status_name(record->status)},
                                 {"submitted_at", record->submitted_at}};
                       if (!record->failure_reason.empty())
                           j["failure_reason"] = record->failure_reason;
                       res.set_content(j.dump(), "application/json");
                   });
    }

    static void respond_error(httplib::Response& res, int status, const std::string& code,
                              const std::string& message) {
        res.status = status;
        res.set_content(json{{"error", code}, {"message", message}}.dump(), "application/json");
    }

    JobService& service;
    httplib::Server server;
    std::thread background;
};

JobHttpServer::JobHttpServer(JobService& service) : impl_(std::make_unique<Impl>(service)) {}

JobHttpServer::~JobHttpServer() { stop(); }

void JobHttpServer::listen(const std::string& host, int port) {
    if (!impl_->server.bind_to_port(host, port))
        throw Error(ErrorCode::AddressInUse, host + ":" + std::to_string(port));
    impl_->server.listen_after_bind();
}

int JobHttpServer::listen_any(const std::string& host) {
    int port = impl_->server.bind_to_any_port(host);
    if (port <= 0) throw Error(ErrorCode::AddressInUse, host);
    impl_->background = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void JobHttpServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->background.joinable()) impl_->background.join();
}

} // namespace cmind
