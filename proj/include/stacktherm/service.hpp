#pragma once

// Design store and job runner behind the HTTP API. Designs and finished job
// results live as files under the state directory.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "stacktherm/design.hpp"

namespace httplib {
class Server;
}

namespace stacktherm {

/// 64-bit FNV-1a, hex encoded.
std::string content_id(std::string_view bytes);

enum class JobKind { Simulate, Sweep };
enum class JobState { Queued, Running, Done, Failed };
std::string_view to_string(JobKind kind);
std::string_view to_string(JobState state);

struct Job {
    std::string id;
    JobKind kind = JobKind::Simulate;
    JobState state = JobState::Queued;
    double progress = 0.0;
    std::string design;
    std::string workload;
    std::string error;
    std::vector<std::size_t> layers;  // heatmap layers of a finished simulate job
};

struct ServiceConfig {
    std::filesystem::path state_dir;
    std::size_t workers = 0;  // 0: hardware concurrency
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

class Service {
public:
    /// Loads stored designs and jobs; jobs that never finished are marked
    /// failed. Throws Error{Io} when the state directory is not writable.
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Transport-independent entry point. `path` excludes the query string.
    Response handle(const std::string& method, const std::string& path,
                    const std::map<std::string, std::string>& query, const std::string& body);

    /// Routes every request of `server` to handle().
    void mount(httplib::Server& server);

    /// Blocks until no job is queued or running.
    void wait_idle();

    std::optional<Job> job(const std::string& id) const;

private:
    struct Design {
        std::string id;
        long revision = 1;
        std::string created;
        std::string modified;
        DesignDocument document;
    };

    Response create_design(const std::string& body);
    Response get_design(const std::string& id);
    Response put_design(const std::string& id, const std::string& body);
    Response submit_job(const std::string& design_id, const std::string& body);
    Response get_job(const std::string& id);
    Response job_result(const std::string& id, const std::string& what, const std::map<std::string, std::string>& query);

    void worker_loop(std::stop_token stop);
    void execute(const std::string& job_id, const DesignDocument& document);
    void persist_design(const Design& d) const;
    void persist_job(const Job& job) const;
    std::filesystem::path job_dir(const std::string& id) const;
    static nlohmann::json design_json(const Design& d);
    static nlohmann::json job_json(const Job& job);

    ServiceConfig config_;
    mutable std::mutex mutex_;
    std::condition_variable_any queue_cv_;
    std::condition_variable idle_cv_;
    std::map<std::string, Design> designs_;
    std::map<std::string, Job> jobs_;
    std::map<std::string, DesignDocument> snapshots_;  // queued job -> design as submitted
    std::deque<std::string> queue_;
    std::size_t active_ = 0;
    std::uint64_t design_counter_ = 0;
    std::vector<std::jthread> workers_;
};

/// Serves until the process ends. `bind` is "host:port". Throws Error{Io} on
/// bind failure.
void serve(const std::string& bind, ServiceConfig config);

}  // namespace stacktherm
