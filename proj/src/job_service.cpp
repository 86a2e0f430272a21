#include "cmind/job_service.hpp"

#include <algorithm>

#include "cmind/archive.hpp"
#include "cmind/error.hpp"
#include "cmind/util.hpp"

namespace cmind {

using nlohmann::json;

const char* job_status_name(JobStatus status) {
    switch (status) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::completed: return "completed";
    case JobStatus::failed: return "failed";
    }
    return "unknown";
}

namespace {

std::optional<JobStatus> job_status_from_name(const std::string& name) {
    for (JobStatus s : {JobStatus::queued, JobStatus::running, JobStatus::completed,
                        JobStatus::failed}) {
        if (name == job_status_name(s)) return s;
    }
    return std::nullopt;
}

} // namespace

bool is_valid_job_id(const std::string& id) {
    if (id.size() != 16) return false;
    for (char c : id)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
}

JobStore::JobStore(std::filesystem::path data_root) : root_(std::move(data_root)) {
    namespace fs = std::filesystem;
    fs::create_directories(root_);
    for (const auto& dir : fs::directory_iterator(root_)) {
        if (!dir.is_directory()) continue;
        std::string id = dir.path().filename().string();
        if (!is_valid_job_id(id)) continue;
        fs::path status_path = dir.path() / "status.json";
        if (!fs::exists(status_path)) continue;
        JobRecord record;
        record.id = id;
        try {
            json j = json::parse(read_file(status_path));
            record.submitted_at = j.value("submitted_at", "");
            record.failure_reason = j.value("failure_reason", "");
            auto status = job_status_from_name(j.value("status", ""));
            record.status = status.value_or(JobStatus::failed);
        } catch (...) {
            record.status = JobStatus::failed;
            record.failure_reason = "corrupt status file";
        }
        // Jobs caught mid-flight by a restart resume as failed.
        if (record.status == JobStatus::queued || record.status == JobStatus::running) {
            record.status = JobStatus::failed;
            record.failure_reason = "interrupted";
            persist_status(record);
        }
        jobs_[id] = std::move(record);
    }
}

void JobStore::persist_status(const JobRecord& record) const {
    json j = {{"id", record.id},
              {"status", job_status_name(record.status)},
              {"submitted_at", record.submitted_at}};
    if (!record.failure_reason.empty()) j["failure_reason"] = record.failure_reason;
    write_file_atomic(root_ / record.id / "status.json", j.dump(2) + "\n");
}

std::string JobStore::create(const std::string& report_text, const std::string& archive_bytes) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::string id = random_hex16();
    while (jobs_.count(id)) id = random_hex16(); // regenerate on collision
    JobRecord record;
    record.id = id;
    record.status = JobStatus::queued;
    record.submitted_at = iso8601_utc_now();

    std::filesystem::create_directories(root_ / id);
    write_file(root_ / id / "report.txt", report_text);
    write_file(root_ / id / "source.archive", archive_bytes);
    persist_status(record);
    jobs_[id] = record;
    return id;
}

std::optional<JobRecord> JobStore::get(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

void JobStore::set_running(const std::string& id) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end() || it->second.status != JobStatus::queued) return;
    it->second.status = JobStatus::running;
    persist_status(it->second);
}

void JobStore::set_completed(const std::string& id, const json& result) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end() || it->second.status != JobStatus::running) return;
    write_file_atomic(root_ / id / "result.json",
                      result.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
    it->second.status = JobStatus::completed;
    persist_status(it->second);
}

void JobStore::set_failed(const std::string& id, const std::string& reason, const json* result) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return;
    if (it->second.status == JobStatus::completed || it->second.status == JobStatus::failed) return;
    if (result != nullptr)
        write_file_atomic(root_ / id / "result.json",
                          result->dump(2, ' ', false, json::error_handler_t::replace) + "\n");
    it->second.status = JobStatus::failed;
    it->second.failure_reason = reason;
    persist_status(it->second);
}

std::string JobStore::report_text(const std::string& id) const {
    return read_file(root_ / id / "report.txt");
}

std::string JobStore::archive_bytes(const std::string& id) const {
    return read_file(root_ / id / "source.archive");
}

json JobStore::result_json(const std::string& id) const {
    auto record = get(id);
    if (!record) throw Error(ErrorCode::UnknownJob, id);
    if (record->status == JobStatus::queued || record->status == JobStatus::running)
        throw Error(ErrorCode::NotReady, id + " is " + job_status_name(record->status));
    std::filesystem::path path = root_ / id / "result.json";
    if (!std::filesystem::exists(path)) {
        // Terminal without a stored result: synthesize the failure shape.
        return json{{"id", id},
                    {"status", "failed"},
                    {"failure_reason", record->failure_reason.empty() ? "unknown"
                                                                      : record->failure_reason}};
    }
    return json::parse(read_file(path));
}

std::vector<std::string> JobStore::ids() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, record] : jobs_) {
        (void)record;
        out.push_back(id);
    }
    return out;
}

// ---------------------------------------------------------------------------

JobService::JobService(JobServiceConfig config)
    : config_(std::move(config)), store_(config_.data_root) {
    for (int i = 0; i < config_.workers; ++i)
        workers_.emplace_back([this] { worker_loop(); });
}

JobService::~JobService() {
    {
        std::lock_guard<std::mutex> lock(queue_mutex_);
        stopping_ = true;
    }
    queue_cv_.notify_all();
    for (auto& worker : workers_) worker.join();
}

std::string JobService::submit_job(const std::string& report_text,
                                   const std::string& archive_bytes) {
    if (trim(report_text).empty())
        throw Error(ErrorCode::InvalidReport, "report must be non-empty");
    try {
        if (detect_archive_format(archive_bytes) == ArchiveFormat::unknown)
            throw Error(ErrorCode::UnsupportedArchive, "unrecognized archive format");
        validate_archive(archive_bytes);
    } catch (const Error& e) {
        throw Error(ErrorCode::ArchiveRejected, e.what());
    }

    std::string id = store_.create(report_text, archive_bytes);
    {
        std::lock_guard<std::mutex> lock(queue_mutex_);
        queue_.push_back(id);
    }
    queue_cv_.notify_one();
    return id;
}

JobStatus JobService::job_status(const std::string& id) const {
    auto record = store_.get(id);
    if (!record) throw Error(ErrorCode::UnknownJob, id);
    return record->status;
}

json JobService::fetch_result(const std::string& id) const {
    return store_.result_json(id);
}

void JobService::wait_idle() {
    std::unique_lock<std::mutex> lock(queue_mutex_);
    idle_cv_.wait(lock, [this] { return queue_.empty() && active_ == 0; });
}

void JobService::worker_loop() {
    for (;;) {
        std::string id;
        {
            std::unique_lock<std::mutex> lock(queue_mutex_);
            queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_ && queue_.empty()) return;
            id = queue_.front();
            queue_.pop_front();
            ++active_;
        }
        run_job(id);
        {
            std::lock_guard<std::mutex> lock(queue_mutex_);
            --active_;
        }
        idle_cv_.notify_all();
    }
}

void JobService::run_job(const std::string& id) {
    store_.set_running(id);
    try {
        BugReport report = BugReport::from_text(utf8_sanitize(store_.report_text(id)));
        SourceTree tree = source_tree_from_archive(store_.archive_bytes(id), id);
        // Fresh gateway per run: scripted transcripts replay from the top.
        LlmGateway gateway(config_.pipeline.llm);
        LocalizationResult result = run_pipeline(report, tree, config_.pipeline, gateway);
        json j = result.to_json();
        j["id"] = id;
        if (result.status == RunStatus::failed)
            store_.set_failed(id, result.failure_reason, &j);
        else
            store_.set_completed(id, j);
    } catch (const std::exception& e) {
        store_.set_failed(id, e.what());
    }
}

} // namespace cmind
