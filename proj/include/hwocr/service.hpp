#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hwocr/codemodel.hpp"
#include "hwocr/pipeline.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace hwocr {

enum class JobState { Queued, Ocr, Indent, Correct, Done, Failed };

std::string_view to_string(JobState state) noexcept;
std::optional<JobState> parse_job_state(std::string_view name);

struct AuditEntry {
  std::string strategy;
  std::string previous_code;
  std::string at;
  std::optional<std::string> error;  ///< set when the correction failed and nothing was replaced
};

/// Snapshot of one submission. Stage outputs fill in as the job advances.
struct Job {
  std::string job_id;
  JobState state = JobState::Queued;
  std::string config_id;
  std::string created_at;
  std::string updated_at;
  std::string image_media_type;
  std::string image_name;
  std::optional<OcrDocument> raw_ocr;
  std::optional<IndentedProgram> indented;
  std::optional<std::string> corrected_code;
  std::vector<StageTiming> stage_timings;
  std::vector<std::string> warnings;
  std::optional<std::string> edited_code;
  std::optional<std::string> error;
  std::vector<AuditEntry> audit;

  nlohmann::json to_json() const;
  static Job from_json(const nlohmann::json& j);
};

/// Request-level rejection: HTTP status plus a machine-readable reason
/// ("UnsupportedMediaType", "PayloadTooLarge", "UnknownConfig", "NotFound",
/// "Conflict", "InvalidStrategy", "BadRequest").
class RequestRejected : public std::runtime_error {
 public:
  RequestRejected(int status, std::string reason, const std::string& detail)
      : std::runtime_error(detail), status_(status), reason_(std::move(reason)) {}
  int status() const noexcept { return status_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  int status_;
  std::string reason_;
};

struct ServiceOptions {
  std::filesystem::path data_dir;
  std::size_t max_upload_bytes = 10 * 1024 * 1024;
  std::size_t workers = 2;
};

/// Job lifecycle for the classroom loop. Jobs and images live under
/// `<data_dir>/jobs/<job_id>/`; the in-memory index is rebuilt from that
/// directory on construction, and unfinished jobs are queued again.
class Service {
 public:
  Service(ServiceOptions options, std::vector<PipelineConfig> configs);
  /// For tests: pipelines built by the caller (e.g. around mock clients).
  Service(ServiceOptions options, std::vector<std::shared_ptr<const Pipeline>> pipelines);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::string submit(const ImageInput& image, const std::string& config_id);
  Job get(const std::string& job_id) const;
  Job save_edit(const std::string& job_id, const std::string& code);
  Job recorrect(const std::string& job_id, const std::string& strategy);
  /// edited_code when present, else the corrected code.
  std::string export_code(const std::string& job_id) const;
  std::vector<PipelineConfig> configs() const;

  /// Blocks until the job reaches done/failed or the timeout expires.
  Job wait(const std::string& job_id, std::chrono::milliseconds timeout) const;

  /// Registers the /api/v1 routes on `server`.
  void mount(httplib::Server& server);

 private:
  struct Record {
    mutable std::mutex mutex;
    Job job;
  };

  std::shared_ptr<Record> find(const std::string& job_id) const;
  void persist(const Job& job) const;
  void process(const std::string& job_id);
  void worker_loop(std::stop_token stop);
  void enqueue(const std::string& job_id);
  void rebuild_index();
  std::filesystem::path job_dir(const std::string& job_id) const;

  ServiceOptions options_;
  std::map<std::string, std::shared_ptr<const Pipeline>> pipelines_;

  mutable std::mutex index_mutex_;
  std::map<std::string, std::shared_ptr<Record>> jobs_;

  std::mutex queue_mutex_;
  std::condition_variable_any queue_cv_;
  std::deque<std::string> queue_;
  std::vector<std::jthread> workers_;
};

}  // namespace hwocr
