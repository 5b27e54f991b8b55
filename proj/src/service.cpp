#include "stacktherm/service.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include <httplib.h>

#include "stacktherm/error.hpp"
#include "stacktherm/text.hpp"

namespace stacktherm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string content_id(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string_view to_string(JobKind kind) { return kind == JobKind::Simulate ? "simulate" : "sweep"; }

std::string_view to_string(JobState state) {
    switch (state) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
    }
    return "failed";
}

namespace {

std::optional<JobKind> job_kind_from_string(std::string_view s) {
    if (s == "simulate") return JobKind::Simulate;
    if (s == "sweep") return JobKind::Sweep;
    return std::nullopt;
}

JobState job_state_from_string(std::string_view s) {
    for (auto st : {JobState::Queued, JobState::Running, JobState::Done, JobState::Failed})
        if (to_string(st) == s) return st;
    return JobState::Failed;
}

std::string now_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_atomic(const fs::path& path, std::string_view content) {
    const fs::path tmp = path.string() + ".tmp";
    text::write_file(tmp.string(), content);
    fs::rename(tmp, path);
}

Response json_response(int status, const json& body) { return Response{status, body.dump(), "application/json"}; }

Response error_response(int status, const std::string& message) {
    return json_response(status, json{{"error", message}});
}

Response violations_response(const std::vector<std::string>& violations) {
    return json_response(400, json{{"error", "validation"}, {"violations", violations}});
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        std::size_t end = path.find('/', start);
        if (end == std::string::npos) end = path.size();
        if (end > start) parts.push_back(path.substr(start, end - start));
        start = end + 1;
    }
    return parts;
}

// Accepts the document itself or an envelope {"document": ...}.
const json& document_part(const json& body) { return body.contains("document") ? body.at("document") : body; }

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
    std::error_code ec;
    fs::create_directories(config_.state_dir / "designs", ec);
    fs::create_directories(config_.state_dir / "jobs", ec);
    try {
        write_atomic(config_.state_dir / ".probe", "ok\n");
        fs::remove(config_.state_dir / ".probe");
    } catch (const std::exception&) {
        throw Error(ErrorKind::Io, "state directory '" + config_.state_dir.string() + "' is not writable");
    }

    for (const auto& entry : fs::directory_iterator(config_.state_dir / "designs")) {
        if (entry.path().extension() != ".json") continue;
        const json j = json::parse(text::read_file(entry.path().string()));
        Design d;
        d.id = j.at("id").get<std::string>();
        d.revision = j.at("revision").get<long>();
        d.created = j.value("created", std::string{});
        d.modified = j.value("modified", std::string{});
        d.document = design_from_json(j.at("document"));
        designs_[d.id] = std::move(d);
    }
    for (const auto& entry : fs::directory_iterator(config_.state_dir / "jobs")) {
        const fs::path file = entry.path() / "job.json";
        if (!fs::exists(file)) continue;
        const json j = json::parse(text::read_file(file.string()));
        Job job;
        job.id = j.at("id").get<std::string>();
        job.kind = job_kind_from_string(j.at("kind").get<std::string>()).value_or(JobKind::Simulate);
        job.state = job_state_from_string(j.at("state").get<std::string>());
        job.progress = j.value("progress", 0.0);
        job.design = j.value("design", std::string{});
        job.workload = j.value("workload", std::string{});
        job.error = j.value("error", std::string{});
        job.layers = j.value("layers", std::vector<std::size_t>{});
        if (job.state == JobState::Queued || job.state == JobState::Running) {
            job.state = JobState::Failed;
            job.error = "interrupted by service restart";
            persist_job(job);
        }
        jobs_[job.id] = std::move(job);
    }

    const std::size_t n = config_.workers ? config_.workers : std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t i = 0; i < n; ++i) workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
}

Service::~Service() {
    for (auto& w : workers_) w.request_stop();
    queue_cv_.notify_all();
    workers_.clear();
}

json Service::design_json(const Design& d) {
    return json{{"id", d.id}, {"revision", d.revision}, {"created", d.created}, {"modified", d.modified},
                {"document", to_json(d.document)}};
}

json Service::job_json(const Job& job) {
    return json{{"id", job.id},         {"kind", std::string(to_string(job.kind))},
                {"state", std::string(to_string(job.state))}, {"progress", job.progress},
                {"design", job.design}, {"workload", job.workload},
                {"error", job.error},   {"layers", job.layers}};
}

fs::path Service::job_dir(const std::string& id) const { return config_.state_dir / "jobs" / id; }

void Service::persist_design(const Design& d) const {
    write_atomic(config_.state_dir / "designs" / (d.id + ".json"), design_json(d).dump(2));
}

void Service::persist_job(const Job& job) const {
    fs::create_directories(job_dir(job.id));
    write_atomic(job_dir(job.id) / "job.json", job_json(job).dump(2));
}

Response Service::handle(const std::string& method, const std::string& path,
                         const std::map<std::string, std::string>& query, const std::string& body) {
    const auto parts = split_path(path);
    try {
        if (!parts.empty() && parts[0] == "designs") {
            if (parts.size() == 1 && method == "POST") return create_design(body);
            if (parts.size() == 2 && method == "GET") return get_design(parts[1]);
            if (parts.size() == 2 && method == "PUT") return put_design(parts[1], body);
            if (parts.size() == 3 && parts[2] == "jobs" && method == "POST") return submit_job(parts[1], body);
        } else if (!parts.empty() && parts[0] == "jobs" && method == "GET") {
            if (parts.size() == 2) return get_job(parts[1]);
            if (parts.size() == 3) return job_result(parts[1], parts[2], query);
        }
        return error_response(404, "no route for " + method + " " + path);
    } catch (const json::exception& e) {
        return error_response(400, std::string("malformed JSON: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NotFound) return error_response(404, e.what());
        return violations_response({e.what()});
    }
}

Response Service::create_design(const std::string& body) {
    const json j = json::parse(body);
    DesignDocument doc = design_from_json(document_part(j));
    if (auto v = validate_design(doc); !v.empty()) return violations_response(v);
    std::lock_guard lock(mutex_);
    Design d;
    const std::string stamp = now_utc();
    d.id = content_id(to_json(doc).dump() + "\n" + stamp + "\n" + std::to_string(++design_counter_) + "\n" +
                      std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    d.created = d.modified = stamp;
    d.document = std::move(doc);
    persist_design(d);
    auto out = design_json(d);
    designs_[d.id] = std::move(d);
    return json_response(201, out);
}

Response Service::get_design(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = designs_.find(id);
    if (it == designs_.end()) return error_response(404, "unknown design '" + id + "'");
    return json_response(200, design_json(it->second));
}

Response Service::put_design(const std::string& id, const std::string& body) {
    const json j = json::parse(body);
    {
        std::lock_guard lock(mutex_);
        if (!designs_.count(id)) return error_response(404, "unknown design '" + id + "'");
    }
    if (!j.contains("revision")) return violations_response({"update must carry the revision it edits"});
    const long revision = j.at("revision").get<long>();
    DesignDocument doc = design_from_json(document_part(j));
    if (auto v = validate_design(doc); !v.empty()) return violations_response(v);
    std::lock_guard lock(mutex_);
    auto it = designs_.find(id);
    if (it == designs_.end()) return error_response(404, "unknown design '" + id + "'");
    Design& d = it->second;
    if (revision != d.revision)
        return json_response(409, json{{"error", "revision conflict"}, {"current_revision", d.revision}});
    d.document = std::move(doc);
    d.revision += 1;
    d.modified = now_utc();
    persist_design(d);
    return json_response(200, design_json(d));
}

Response Service::submit_job(const std::string& design_id, const std::string& body) {
    const json j = body.empty() ? json::object() : json::parse(body);
    auto kind = job_kind_from_string(j.value("kind", std::string("simulate")));
    if (!kind) return violations_response({"job kind must be 'simulate' or 'sweep'"});
    const std::string workload = j.value("workload", std::string{});

    std::unique_lock lock(mutex_);
    auto it = designs_.find(design_id);
    if (it == designs_.end()) return error_response(404, "unknown design '" + design_id + "'");
    DesignDocument snapshot = it->second.document;
    lock.unlock();

    if (*kind == JobKind::Sweep && snapshot.sweep.empty()) return violations_response({"design has no sweep definition"});
    if (!workload.empty()) {
        bool found = false;
        for (const auto& w : snapshot.workloads) found = found || w.name == workload;
        if (!found) return violations_response({"unknown workload '" + workload + "'"});
    }

    const std::string id = content_id(std::string(to_string(*kind)) + "\n" + workload + "\n" + to_json(snapshot).dump());
    lock.lock();
    if (auto existing = jobs_.find(id); existing != jobs_.end() && existing->second.state != JobState::Failed)
        return json_response(200, job_json(existing->second));
    Job job;
    job.id = id;
    job.kind = *kind;
    job.design = design_id;
    job.workload = workload;
    persist_job(job);
    jobs_[id] = job;
    snapshots_[id] = std::move(snapshot);
    queue_.push_back(id);
    queue_cv_.notify_one();
    return json_response(202, job_json(job));
}

Response Service::get_job(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return error_response(404, "unknown job '" + id + "'");
    return json_response(200, job_json(it->second));
}

Response Service::job_result(const std::string& id, const std::string& what,
                             const std::map<std::string, std::string>& query) {
    Job job;
    {
        std::lock_guard lock(mutex_);
        auto it = jobs_.find(id);
        if (it == jobs_.end()) return error_response(404, "unknown job '" + id + "'");
        job = it->second;
    }
    if (what != "summary" && what != "heatmap" && what != "ranking") return error_response(404, "no such resource");
    if (job.state == JobState::Failed)
        return json_response(409, json{{"error", "job failed"}, {"detail", job.error}});
    if (job.state != JobState::Done) return json_response(409, json{{"error", "job not finished"}});

    auto format = query.count("format") ? query.at("format") : std::string("json");
    const fs::path dir = job_dir(id);
    auto file = [&](const std::string& name, const std::string& type) {
        return Response{200, text::read_file((dir / name).string()), type};
    };

    if (what == "summary") {
        if (format == "tsv") return file(job.kind == JobKind::Sweep ? "comparison.tsv" : "summary.tsv", "text/plain");
        return file("summary.json", "application/json");
    }
    if (what == "ranking") {
        if (job.kind != JobKind::Sweep) return error_response(404, "simulate jobs have no ranking");
        if (format == "tsv") return file("comparison.tsv", "text/plain");
        return file("ranking.json", "application/json");
    }
    if (job.kind != JobKind::Simulate) return error_response(404, "sweep jobs have no heatmap");
    if (!query.count("layer")) return violations_response({"heatmap needs ?layer=<n>"});
    long layer = 0;
    try {
        layer = text::parse_long(query.at("layer"), "layer", 0);
    } catch (const Error& e) {
        return violations_response({e.what()});
    }
    if (layer < 0 || std::find(job.layers.begin(), job.layers.end(), static_cast<std::size_t>(layer)) == job.layers.end())
        return error_response(404, "no layer " + std::to_string(layer));
    const std::string n = std::to_string(layer);
    if (format == "grid") return file("layer_" + n + ".grid", "text/plain");
    return file("heatmap_" + n + ".json", "application/json");
}

void Service::worker_loop(std::stop_token stop) {
    while (true) {
        std::string id;
        DesignDocument doc;
        {
            std::unique_lock lock(mutex_);
            if (!queue_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
            id = queue_.front();
            queue_.pop_front();
            doc = std::move(snapshots_.at(id));
            snapshots_.erase(id);
            Job& job = jobs_.at(id);
            job.state = JobState::Running;
            persist_job(job);
            ++active_;
        }
        execute(id, doc);
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        idle_cv_.notify_all();
    }
}

void Service::execute(const std::string& id, const DesignDocument& doc) {
    JobKind kind;
    std::string workload;
    {
        std::lock_guard lock(mutex_);
        kind = jobs_.at(id).kind;
        workload = jobs_.at(id).workload;
    }
    const fs::path dir = job_dir(id);
    std::vector<std::size_t> layers;
    std::string error;
    try {
        if (kind == JobKind::Simulate) {
            RunArtifacts run = run_design(doc, workload);
            const auto& field = run.result.field;
            for (std::size_t l = 0; l < field.layers.size(); ++l) {
                write_atomic(dir / ("layer_" + std::to_string(l) + ".grid"), emit_heatmap(field, l));
                write_atomic(dir / ("heatmap_" + std::to_string(l) + ".json"), heatmap_json(field, l).dump());
                layers.push_back(l);
            }
            write_atomic(dir / "summary.tsv", run.summary);
            write_atomic(dir / "summary.json", summary_json(run.result.summary).dump());
        } else {
            SweepConfig cfg;
            cfg.workers = 1;
            cfg.progress = [this, &id](std::size_t done, std::size_t total) {
                std::lock_guard lock(mutex_);
                Job& job = jobs_.at(id);
                job.progress = std::max(job.progress, total ? static_cast<double>(done) / total : 1.0);
            };
            SweepArtifacts sweep = sweep_design(doc, cfg);
            const json ranking = ranking_json(sweep);
            write_atomic(dir / "comparison.tsv", sweep.report.to_tsv());
            write_atomic(dir / "ranking.json", ranking.dump());
            write_atomic(dir / "summary.json", ranking.dump());
        }
    } catch (const std::exception& e) {
        error = e.what();
    }
    std::lock_guard lock(mutex_);
    Job& job = jobs_.at(id);
    job.layers = layers;
    if (error.empty()) {
        job.state = JobState::Done;
        job.progress = 1.0;
    } else {
        job.state = JobState::Failed;
        job.error = error;
    }
    persist_job(job);
}

void Service::wait_idle() {
    std::unique_lock lock(mutex_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && active_ == 0; });
}

std::optional<Job> Service::job(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

void Service::mount(httplib::Server& server) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        Response r = handle(req.method, req.path, query, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Get(R"(/.*)", forward);
    server.Post(R"(/.*)", forward);
    server.Put(R"(/.*)", forward);
}

void serve(const std::string& bind, ServiceConfig config) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorKind::Io, "bind address must be host:port");
    const std::string host = bind.substr(0, colon);
    const long port = text::parse_long(bind.substr(colon + 1), "port", 0);
    Service service(std::move(config));
    httplib::Server server;
    service.mount(server);
    if (!server.bind_to_port(host, static_cast<int>(port)))
        throw Error(ErrorKind::Io, "cannot bind " + bind);
    server.listen_after_bind();
}

}  // namespace stacktherm
