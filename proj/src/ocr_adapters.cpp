#include "hwocr/ocr_adapters.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "http_util.hpp"
#include "httplib.h"
#include "hwocr/error.hpp"

namespace hwocr {

using nlohmann::json;
namespace fs = std::filesystem;

ImageInput load_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read image " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ImageInput image;
  image.bytes = buffer.str();
  image.name = path.stem().string();
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  image.media_type = (ext == ".png") ? "image/png" : "image/jpeg";
  return image;
}

void ProviderConfig::validate() const {
  if (provider_id.empty()) throw Error(ErrorCode::InvalidConfig, "provider_id is required");
  if (!(timeout_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "timeout must be positive");
  if (retry_limit < 0) throw Error(ErrorCode::InvalidConfig, "retry_limit must be non-negative");
  if (max_concurrency < 1) throw Error(ErrorCode::InvalidConfig, "max_concurrency must be at least 1");
  if (kind == ProviderKind::Remote && endpoint.empty()) {
    throw Error(ErrorCode::InvalidConfig, "remote provider needs an endpoint");
  }
}

ProviderConfig provider_config_from_json(const json& j, const fs::path& base_dir) {
  ProviderConfig c;
  try {
    c.provider_id = j.at("provider_id").get<std::string>();
    auto kind = j.value("kind", std::string("replay"));
    if (kind == "replay") {
      c.kind = ProviderKind::Replay;
      fs::path dir = j.at("fixture_dir").get<std::string>();
      c.fixture_dir = dir.is_absolute() ? dir : base_dir / dir;
    } else if (kind == "remote") {
      c.kind = ProviderKind::Remote;
      c.endpoint = j.at("endpoint").get<std::string>();
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown provider kind '" + kind + "'");
    }
    if (j.contains("credentials") || j.contains("api_key")) {
      throw Error(ErrorCode::InvalidConfig,
                  "credentials must be referenced through credentials_env, never inlined");
    }
    c.credentials_env = j.value("credentials_env", std::string());
    c.auth_header = j.value("auth_header", c.auth_header);
    c.auth_scheme = j.value("auth_scheme", c.auth_scheme);
    auto format = j.value("format", std::string("generic"));
    if (format == "generic") {
      c.format = ResponseFormat::Generic;
    } else if (format == "azure_read") {
      c.format = ResponseFormat::AzureRead;
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown response format '" + format + "'");
    }
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.retry_limit = j.value("retry_limit", c.retry_limit);
    c.backoff_base_s = j.value("backoff_base_s", c.backoff_base_s);
    c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("provider config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const ProviderConfig& c) {
  json j{{"provider_id", c.provider_id},
         {"kind", c.kind == ProviderKind::Replay ? "replay" : "remote"},
         {"timeout_s", c.timeout_s},
         {"retry_limit", c.retry_limit},
         {"max_concurrency", c.max_concurrency}};
  if (c.kind == ProviderKind::Replay) {
    j["fixture_dir"] = c.fixture_dir.string();
  } else {
    j["endpoint"] = c.endpoint;
    j["credentials_env"] = c.credentials_env;
    j["format"] = c.format == ResponseFormat::Generic ? "generic" : "azure_read";
  }
  return j;
}

// ---------------------------------------------------------------------------
// Replay

ReplayProvider::ReplayProvider(std::string provider_id, fs::path fixture_dir)
    : id_(std::move(provider_id)), dir_(std::move(fixture_dir)) {}

OcrDocument ReplayProvider::recognize(const ImageInput& image) {
  if (image.name.empty()) {
    throw Error(ErrorCode::InvalidArgument, "replay provider needs an image name to locate its fixture");
  }
  const fs::path path = dir_ / (image.name + ".json");
  if (!fs::exists(path)) {
    throw Error(ErrorCode::ProviderUnavailable, "no recorded fixture " + path.string() + " (retries: 0)");
  }
  auto doc = load_fixture(path);
  doc.provider_id = id_;
  return normalize_reading_order(std::move(doc));
}

// ---------------------------------------------------------------------------
// Remote

namespace {

BoundingBox box_from_points(const std::vector<std::pair<double, double>>& points) {
  if (points.empty()) throw Error(ErrorCode::ProviderProtocolError, "polygon without points");
  BoundingBox box{points[0].first, points[0].second, points[0].first, points[0].second};
  for (const auto& [x, y] : points) {
    box.x_min = std::min(box.x_min, x);
    box.x_max = std::max(box.x_max, x);
    box.y_min = std::min(box.y_min, y);
    box.y_max = std::max(box.y_max, y);
  }
  // Providers occasionally report corners a pixel outside the image.
  box.x_min = std::max(box.x_min, 0.0);
  box.y_min = std::max(box.y_min, 0.0);
  box.x_max = std::max(box.x_max, box.x_min);
  box.y_max = std::max(box.y_max, box.y_min);
  return box;
}

OcrDocument parse_generic(const json& j) {
  OcrDocument doc;
  doc.image_width = j.at("image_width").get<double>();
  doc.image_height = j.at("image_height").get<double>();
  for (const auto& jl : j.at("lines")) {
    LineBox line;
    line.text = jl.at("text").get<std::string>();
    if (jl.contains("polygon")) {
      std::vector<std::pair<double, double>> points;
      for (const auto& p : jl.at("polygon")) points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      line.box = box_from_points(points);
    } else {
      const auto& b = jl.at("box");
      line.box = box_from_points({{b.at("x_min").get<double>(), b.at("y_min").get<double>()},
                                  {b.at("x_max").get<double>(), b.at("y_max").get<double>()}});
    }
    doc.lines.push_back(std::move(line));
  }
  return doc;
}

OcrDocument parse_azure_read(const json& j) {
  const auto& pages = j.at("analyzeResult").at("readResults");
  if (!pages.is_array() || pages.empty()) {
    throw Error(ErrorCode::ProviderProtocolError, "azure response has no readResults");
  }
  // Only the first page: one photo per submission.
  const auto& page = pages.at(0);
  OcrDocument doc;
  doc.image_width = page.at("width").get<double>();
  doc.image_height = page.at("height").get<double>();
  for (const auto& jl : page.at("lines")) {
    const auto& quad = jl.at("boundingBox");
    if (!quad.is_array() || quad.size() != 8) {
      throw Error(ErrorCode::ProviderProtocolError, "azure boundingBox must have 8 numbers");
    }
    std::vector<std::pair<double, double>> points;
    for (std::size_t k = 0; k < 8; k += 2) points.emplace_back(quad[k].get<double>(), quad[k + 1].get<double>());
    doc.lines.push_back({jl.at("text").get<std::string>(), box_from_points(points)});
  }
  return doc;
}

}  // namespace

OcrDocument parse_provider_response(const std::string& body, ResponseFormat format,
                                    const std::string& provider_id) {
  OcrDocument doc;
  try {
    auto j = json::parse(body);
    doc = format == ResponseFormat::Generic ? parse_generic(j) : parse_azure_read(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderProtocolError, std::string("unparseable provider response: ") + e.what());
  }
  if (!(doc.image_width > 0.0) || !(doc.image_height > 0.0)) {
    throw Error(ErrorCode::ProviderProtocolError, "provider reported non-positive image dimensions");
  }
  doc.provider_id = provider_id;
  return doc;
}

RemoteProvider::RemoteProvider(ProviderConfig config)
    : config_(std::move(config)), slots_(std::max(config_.max_concurrency, 1)) {
  config_.validate();
}

OcrDocument RemoteProvider::recognize(const ImageInput& image) {
  if (image.bytes.empty()) throw Error(ErrorCode::InvalidArgument, "image is empty");
  const auto url = detail::split_url(config_.endpoint);
  const auto secret = detail::read_secret(config_.credentials_env);

  httplib::Headers headers;
  if (!secret.empty()) {
    headers.emplace(config_.auth_header,
                    config_.auth_scheme.empty() ? secret : config_.auth_scheme + " " + secret);
  }

  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  std::string last_failure;
  for (int attempt = 0; attempt <= config_.retry_limit; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::duration<double>(config_.backoff_base_s * std::pow(2.0, attempt - 1)));
    }
    auto response = client.Post(url.path, headers, image.bytes, image.media_type);
    if (!response) {
      last_failure = "transport error: " + httplib::to_string(response.error());
      continue;
    }
    const int status = response->status;
    if (status == 200) {
      auto doc = parse_provider_response(response->body, config_.format, config_.provider_id);
      return normalize_reading_order(std::move(doc));
    }
    last_failure = "HTTP " + std::to_string(status);
    if (status == 429 || status >= 500) continue;
    // Auth and other client errors do not improve with retries.
    throw Error(ErrorCode::ProviderUnavailable,
                config_.provider_id + ": " + last_failure + " (retries: " + std::to_string(attempt) + ")");
  }
  throw Error(ErrorCode::ProviderUnavailable, config_.provider_id + ": " + last_failure +
                                                  " (retries: " + std::to_string(config_.retry_limit) + ")");
}

std::shared_ptr<OcrProvider> make_provider(const ProviderConfig& config) {
  config.validate();
  if (config.kind == ProviderKind::Replay) {
    return std::make_shared<ReplayProvider>(config.provider_id, config.fixture_dir);
  }
  return std::make_shared<RemoteProvider>(config);
}

// ---------------------------------------------------------------------------
// Fixtures

void record_fixture(const OcrDocument& doc, const fs::path& path) {
  for (const auto& line : doc.lines) {
    if (!line.box.valid()) throw Error(ErrorCode::InvalidFixture, "document has an invalid box");
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write fixture " + path.string());
  out << serialize(doc);
  if (!out) throw Error(ErrorCode::IoError, "write failed for fixture " + path.string());
}

OcrDocument load_fixture(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read fixture " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidFixture, path.string() + ": " + e.what());
  }
  return ocr_document_from_json(j);
}

}  // namespace hwocr
