#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmind/pipeline.hpp"

namespace cmind {

enum class JobStatus { queued, running, completed, failed };

const char* job_status_name(JobStatus status);

struct JobRecord {
    std::string id; // 16 lowercase hex chars
    JobStatus status = JobStatus::queued;
    std::string submitted_at; // ISO 8601 UTC
    std::string failure_reason;
};

bool is_valid_job_id(const std::string& id);

/// One directory per job under the data root: report.txt, source.archive,
/// status.json, result.json. All writes are atomic renames, so terminal jobs
/// survive a crash; jobs found queued/running at load resume as failed with
/// failure_reason = "interrupted".
class JobStore {
public:
    explicit JobStore(std::filesystem::path data_root);

    std::string create(const std::string& report_text, const std::string& archive_bytes);
    std::optional<JobRecord> get(const std::string& id) const;
    void set_running(const std::string& id);
    void set_completed(const std::string& id, const nlohmann::json& result);
    void set_failed(const std::string& id, const std::string& reason,
                    const nlohmann::json* result = nullptr);

    std::string report_text(const std::string& id) const;
    std::string archive_bytes(const std::string& id) const;
    nlohmann::json result_json(const std::string& id) const; // throws UnknownJob/NotReady

    std::vector<std::string> ids() const;

private:
    void persist_status(const JobRecord& record) const;

    std::filesystem::path root_;
    mutable std::mutex mutex_;
    std::map<std::string, JobRecord> jobs_;
};

struct JobServiceConfig {
    std::filesystem::path data_root;
    int workers = 2; // concurrent pipeline runs; 0 keeps jobs queued (tests)
    PipelineConfig pipeline;
};

/// The submit/poll/download lifecycle around the pipeline.
class JobService {
public:
    explicit JobService(JobServiceConfig config);
    ~JobService();

    JobService(const JobService&) = delete;
    JobService& operator=(const JobService&) = delete;

    /// Persists the inputs, queues a run, returns the new id immediately.
    /// Throws InvalidReport, ArchiveRejected.
    std::string submit_job(const std::string& report_text, const std::string& archive_bytes);

    JobStatus job_status(const std::string& id) const;          // throws UnknownJob
    nlohmann::json fetch_result(const std::string& id) const;   // throws UnknownJob, NotReady

    JobStore& store() { return store_; }

    /// Blocks until every queued/running job is terminal (test helper).
    void wait_idle();

private:
    void worker_loop();
    void run_job(const std::string& id);

    JobServiceConfig config_;
    JobStore store_;

    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::condition_variable idle_cv_;
    std::deque<std::string> queue_;
    int active_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

/// HTTP facade: POST /jobs (multipart report+source), GET /jobs/{id},
/// GET /jobs/{id}/result, GET /healthz.
class JobHttpServer {
public:
    explicit JobHttpServer(JobService& service);
    ~JobHttpServer();

    /// Binds and serves until stop(); throws AddressInUse when the bind fails.
    void listen(const std::string& host, int port);
    /// Binds an ephemeral port, serves on a background thread, returns the
    /// port (test helper).
    int listen_any(const std::string& host);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace cmind
