#include "hwocr/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "httplib.h"
#include "hwocr/error.hpp"

namespace hwocr {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(JobState state) noexcept {
  switch (state) {
    case JobState::Queued: return "queued";
    case JobState::Ocr: return "ocr";
    case JobState::Indent: return "indent";
    case JobState::Correct: return "correct";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "failed";
}

std::optional<JobState> parse_job_state(std::string_view name) {
  for (auto s : {JobState::Queued, JobState::Ocr, JobState::Indent, JobState::Correct, JobState::Done,
                 JobState::Failed}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

namespace {

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buffer;
}

std::string new_job_id() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  char buffer[33];
  std::snprintf(buffer, sizeof buffer, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buffer;
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

std::string sniff_media_type(const std::string& bytes) {
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
      static_cast<unsigned char>(bytes[1]) == 0xD8 && static_cast<unsigned char>(bytes[2]) == 0xFF) {
    return "image/jpeg";
  }
  if (bytes.size() >= 8 && bytes.compare(0, 8, "\x89PNG\r\n\x1a\n") == 0) return "image/png";
  return {};
}

void write_atomically(const fs::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

json Job::to_json() const {
  json timings = json::object();
  for (const auto& t : stage_timings) timings[t.stage] = t.elapsed.count();
  json result = nullptr;
  if (raw_ocr || indented || corrected_code) {
    result = json{{"raw_ocr", raw_ocr ? hwocr::to_json(*raw_ocr) : json(nullptr)},
                  {"indented", indented ? hwocr::to_json(*indented) : json(nullptr)},
                  {"corrected_code", optional_string(corrected_code)},
                  {"stage_timings", std::move(timings)},
                  {"warnings", warnings},
                  {"config_id", config_id}};
  }
  json audit_list = json::array();
  for (const auto& a : audit) {
    audit_list.push_back(json{{"strategy", a.strategy},
                              {"previous_code", a.previous_code},
                              {"at", a.at},
                              {"error", optional_string(a.error)}});
  }
  return json{{"job_id", job_id},
              {"state", to_string(state)},
              {"config_id", config_id},
              {"created_at", created_at},
              {"updated_at", updated_at},
              {"image", {{"media_type", image_media_type}, {"name", image_name}}},
              {"result", std::move(result)},
              {"edited_code", optional_string(edited_code)},
              {"error", optional_string(error)},
              {"audit", std::move(audit_list)}};
}

Job Job::from_json(const json& j) {
  Job job;
  job.job_id = j.at("job_id").get<std::string>();
  auto state = parse_job_state(j.at("state").get<std::string>());
  if (!state) throw Error(ErrorCode::InvalidArgument, "unknown job state");
  job.state = *state;
  job.config_id = j.at("config_id").get<std::string>();
  job.created_at = j.value("created_at", std::string());
  job.updated_at = j.value("updated_at", std::string());
  job.image_media_type = j.at("image").at("media_type").get<std::string>();
  job.image_name = j.at("image").value("name", std::string());
  if (const auto& r = j.at("result"); !r.is_null()) {
    if (!r.at("raw_ocr").is_null()) job.raw_ocr = ocr_document_from_json(r.at("raw_ocr"));
    if (!r.at("indented").is_null()) job.indented = indented_program_from_json(r.at("indented"));
    job.corrected_code = read_optional_string(r, "corrected_code");
    const json timings = r.value("stage_timings", json::object());
    for (const auto& [stage, seconds] : timings.items()) {
      job.stage_timings.push_back({stage, std::chrono::duration<double>(seconds.get<double>())});
    }
    job.warnings = r.value("warnings", std::vector<std::string>{});
  }
  job.edited_code = read_optional_string(j, "edited_code");
  job.error = read_optional_string(j, "error");
  for (const auto& a : j.value("audit", json::array())) {
    job.audit.push_back({a.at("strategy").get<std::string>(), a.at("previous_code").get<std::string>(),
                         a.value("at", std::string()), read_optional_string(a, "error")});
  }
  return job;
}

// ---------------------------------------------------------------------------

Service::Service(ServiceOptions options, std::vector<PipelineConfig> configs) : options_(std::move(options)) {
  for (auto& c : configs) {
    auto id = c.config_id;
    pipelines_.emplace(id, std::make_shared<const Pipeline>(std::move(c)));
  }
  rebuild_index();
  for (std::size_t i = 0; i < std::max<std::size_t>(options_.workers, 1); ++i) {
    workers_.emplace_back([this](std::stop_token stop) { worker_loop(stop); });
  }
}

Service::Service(ServiceOptions options, std::vector<std::shared_ptr<const Pipeline>> pipelines)
    : options_(std::move(options)) {
  for (auto& p : pipelines) pipelines_.emplace(p->config().config_id, std::move(p));
  rebuild_index();
  for (std::size_t i = 0; i < std::max<std::size_t>(options_.workers, 1); ++i) {
    workers_.emplace_back([this](std::stop_token stop) { worker_loop(stop); });
  }
}

Service::~Service() {
  for (auto& w : workers_) w.request_stop();
  queue_cv_.notify_all();
  workers_.clear();
}

fs::path Service::job_dir(const std::string& job_id) const { return options_.data_dir / "jobs" / job_id; }

void Service::rebuild_index() {
  const auto root = options_.data_dir / "jobs";
  fs::create_directories(root);
  std::vector<std::string> pending;
  for (const auto& dir : fs::directory_iterator(root)) {
    const auto file = dir.path() / "job.json";
    if (!dir.is_directory() || !fs::exists(file)) continue;
    try {
      auto job = Job::from_json(json::parse(read_file(file)));
      auto record = std::make_shared<Record>();
      record->job = std::move(job);
      if (record->job.state != JobState::Done && record->job.state != JobState::Failed) {
        record->job.state = JobState::Queued;
        pending.push_back(record->job.job_id);
      }
      jobs_.emplace(record->job.job_id, std::move(record));
    } catch (const std::exception&) {
      // A half-written job directory from a crash; leave it for inspection.
    }
  }
  std::sort(pending.begin(), pending.end());
  for (const auto& id : pending) queue_.push_back(id);
}

void Service::persist(const Job& job) const {
  const auto dir = job_dir(job.job_id);
  fs::create_directories(dir);
  write_atomically(dir / "job.json", job.to_json().dump(2) + "\n");
}

std::shared_ptr<Service::Record> Service::find(const std::string& job_id) const {
  std::lock_guard lock(index_mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw RequestRejected(404, "NotFound", "no job '" + job_id + "'");
  return it->second;
}

void Service::enqueue(const std::string& job_id) {
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(job_id);
  }
  queue_cv_.notify_one();
}

std::string Service::submit(const ImageInput& image, const std::string& config_id) {
  if (!pipelines_.contains(config_id)) {
    throw RequestRejected(400, "UnknownConfig", "unknown config_id '" + config_id + "'");
  }
  if (image.bytes.empty()) throw RequestRejected(400, "BadRequest", "image is empty");
  if (image.bytes.size() > options_.max_upload_bytes) {
    throw RequestRejected(413, "PayloadTooLarge",
                          "image is " + std::to_string(image.bytes.size()) + " bytes; limit is " +
                              std::to_string(options_.max_upload_bytes));
  }
  std::string media_type = image.media_type;
  if (media_type.empty() || media_type == "application/octet-stream") media_type = sniff_media_type(image.bytes);
  if (media_type != "image/jpeg" && media_type != "image/png") {
    throw RequestRejected(415, "UnsupportedMediaType", "only image/jpeg and image/png are accepted");
  }

  auto record = std::make_shared<Record>();
  auto& job = record->job;
  job.job_id = new_job_id();
  job.state = JobState::Queued;
  job.config_id = config_id;
  job.created_at = job.updated_at = now_utc();
  job.image_media_type = media_type;
  job.image_name = image.name;

  const auto dir = job_dir(job.job_id);
  fs::create_directories(dir);
  write_atomically(dir / "image.bin", image.bytes);
  persist(job);
  {
    std::lock_guard lock(index_mutex_);
    jobs_.emplace(job.job_id, record);
  }
  auto id = job.job_id;
  enqueue(id);
  return id;
}

Job Service::get(const std::string& job_id) const {
  auto record = find(job_id);
  std::lock_guard lock(record->mutex);
  return record->job;
}

Job Service::wait(const std::string& job_id, std::chrono::milliseconds timeout) const {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    auto job = get(job_id);
    if (job.state == JobState::Done || job.state == JobState::Failed ||
        std::chrono::steady_clock::now() >= deadline) {
      return job;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

void Service::worker_loop(std::stop_token stop) {
  while (true) {
    std::string job_id;
    {
      std::unique_lock lock(queue_mutex_);
      if (!queue_cv_.wait(lock, stop, [this] { return !queue_.empty(); })) return;
      job_id = std::move(queue_.front());
      queue_.pop_front();
    }
    process(job_id);
  }
}

void Service::process(const std::string& job_id) {
  auto record = find(job_id);
  Job snapshot;
  {
    std::lock_guard lock(record->mutex);
    snapshot = record->job;
  }
  auto update = [&](auto&& mutate) {
    std::lock_guard lock(record->mutex);
    mutate(record->job);
    record->job.updated_at = now_utc();
    persist(record->job);
  };

  try {
    const auto& pipeline = *pipelines_.at(snapshot.config_id);
    ImageInput image{read_file(job_dir(job_id) / "image.bin"), snapshot.image_media_type, snapshot.image_name};
    auto result = pipeline.run(image, [&](Stage stage, const PipelineResult& partial) {
      update([&](Job& job) {
        switch (stage) {
          case Stage::Ocr:
            job.state = JobState::Ocr;
            break;
          case Stage::Indent:
            job.state = JobState::Indent;
            job.raw_ocr = partial.raw_ocr;
            break;
          case Stage::Correct:
            job.state = JobState::Correct;
            if (!partial.raw_ocr.lines.empty() || partial.raw_ocr.provider_id != "none") {
              job.raw_ocr = partial.raw_ocr;
              job.indented = partial.indented;
            }
            break;
        }
        job.stage_timings = partial.stage_timings;
      });
    });
    update([&](Job& job) {
      job.raw_ocr = result.raw_ocr;
      job.indented = result.indented;
      job.corrected_code = result.corrected_code;
      job.stage_timings = result.stage_timings;
      job.warnings = result.warnings;
      job.state = JobState::Done;
    });
  } catch (const std::exception& e) {
    update([&](Job& job) {
      job.state = JobState::Failed;
      job.error = e.what();
    });
  }
}

Job Service::save_edit(const std::string& job_id, const std::string& code) {
  auto record = find(job_id);
  std::lock_guard lock(record->mutex);
  if (record->job.state != JobState::Done) {
    throw RequestRejected(409, "Conflict", "job is " + std::string(to_string(record->job.state)) + ", not done");
  }
  record->job.edited_code = code;
  record->job.updated_at = now_utc();
  persist(record->job);
  return record->job;
}

Job Service::recorrect(const std::string& job_id, const std::string& strategy_name) {
  auto kind = parse_strategy_kind(strategy_name);
  if (!kind) throw RequestRejected(400, "InvalidStrategy", "unknown strategy '" + strategy_name + "'");
  auto record = find(job_id);
  Job snapshot;
  {
    std::lock_guard lock(record->mutex);
    if (record->job.state != JobState::Done) {
      throw RequestRejected(409, "Conflict", "job is " + std::string(to_string(record->job.state)) + ", not done");
    }
    snapshot = record->job;
  }
  const auto& pipeline = *pipelines_.at(snapshot.config_id);
  CorrectionStrategy strategy = pipeline.config().correction;
  strategy.kind = *kind;

  ImageInput image{read_file(job_dir(job_id) / "image.bin"), snapshot.image_media_type, snapshot.image_name};
  std::optional<CorrectionOutput> output;
  std::optional<std::string> failure;
  try {
    output = pipeline.correct(snapshot.indented.value_or(IndentedProgram{}), image, strategy);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::InvalidArgument) {
      throw RequestRejected(400, "InvalidStrategy", e.what());
    }
    failure = e.what();
  } catch (const std::exception& e) {
    failure = e.what();
  }

  std::lock_guard lock(record->mutex);
  auto& job = record->job;
  const bool reached_client = *kind != StrategyKind::None;
  if (reached_client) {
    job.audit.push_back({std::string(to_string(*kind)), job.corrected_code.value_or(""), now_utc(), failure});
  }
  if (output) {
    job.corrected_code = std::move(output->code);
    job.warnings = std::move(output->warnings);
  }
  job.updated_at = now_utc();
  persist(job);
  return job;
}

std::string Service::export_code(const std::string& job_id) const {
  auto job = get(job_id);
  if (job.edited_code) return *job.edited_code;
  if (job.state != JobState::Done || !job.corrected_code) {
    throw RequestRejected(409, "Conflict", "job has no code to export yet");
  }
  return *job.corrected_code;
}

std::vector<PipelineConfig> Service::configs() const {
  std::vector<PipelineConfig> out;
  for (const auto& [id, p] : pipelines_) out.push_back(p->config());
  return out;
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const RequestRejected& e) {
      reply_json(res, e.status(), json{{"error", e.reason()}, {"detail", e.what()}});
    } catch (const json::exception& e) {
      reply_json(res, 400, json{{"error", "BadRequest"}, {"detail", e.what()}});
    } catch (const std::exception& e) {
      reply_json(res, 500, json{{"error", "Internal"}, {"detail", e.what()}});
    }
  };
}

}  // namespace

void Service::mount(httplib::Server& server) {
  const auto cap = options_.max_upload_bytes;
  server.set_payload_max_length(std::max<std::size_t>(cap * 4, cap + (1u << 20)));

  server.Post("/api/v1/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
                if (!req.has_file("image")) throw RequestRejected(400, "BadRequest", "missing multipart field 'image'");
                const auto file = req.get_file_value("image");
                std::string config_id = req.has_file("config_id") ? req.get_file_value("config_id").content
                                                                   : req.get_param_value("config_id");
                ImageInput image{file.content, file.content_type, fs::path(file.filename).stem().string()};
                auto id = submit(image, config_id);
                reply_json(res, 202, json{{"job_id", id}});
              }));

  server.Get(R"(/api/v1/jobs/([0-9a-f]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               reply_json(res, 200, get(req.matches[1]).to_json());
             }));

  server.Put(R"(/api/v1/jobs/([0-9a-f]+)/edit)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto body = json::parse(req.body);
               if (!body.contains("code") || !body.at("code").is_string()) {
                 throw RequestRejected(400, "BadRequest", "body needs a string 'code'");
               }
               reply_json(res, 200, save_edit(req.matches[1], body.at("code").get<std::string>()).to_json());
             }));

  server.Post(R"(/api/v1/jobs/([0-9a-f]+)/recorrect)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                auto body = json::parse(req.body);
                if (!body.contains("strategy") || !body.at("strategy").is_string()) {
                  throw RequestRejected(400, "InvalidStrategy", "body needs a string 'strategy'");
                }
                reply_json(res, 200, recorrect(req.matches[1], body.at("strategy").get<std::string>()).to_json());
              }));

  server.Get(R"(/api/v1/jobs/([0-9a-f]+)/export)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto code = export_code(req.matches[1]);
               res.status = 200;
               res.set_content(code, "text/plain; charset=utf-8");
             }));

  server.Get(R"(/api/v1/jobs/([0-9a-f]+)/image)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto job = get(req.matches[1]);
               res.status = 200;
               res.set_content(read_file(job_dir(job.job_id) / "image.bin"), job.image_media_type);
             }));

  server.Get("/api/v1/configs", guarded([this](const httplib::Request&, httplib::Response& res) {
               json list = json::array();
               for (const auto& c : configs()) list.push_back(to_json(c));
               reply_json(res, 200, json{{"configs", std::move(list)}});
             }));
}

}  // namespace hwocr
