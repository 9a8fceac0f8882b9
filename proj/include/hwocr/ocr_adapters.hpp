#pragma once

#include <filesystem>
#include <memory>
#include <semaphore>
#include <string>

#include "hwocr/codemodel.hpp"
#include "json.hpp"

namespace hwocr {

/// Encoded image plus the name used to key recorded fixtures (usually the
/// file stem or program id).
struct ImageInput {
  std::string bytes;
  std::string media_type;
  std::string name;
};

ImageInput load_image(const std::filesystem::path& path);

enum class ProviderKind { Replay, Remote };

/// Response schema a remote provider speaks. Generic is this project's own
/// document JSON (boxes or polygons); AzureRead is the read-results layout
/// with 8-number quadrilaterals.
enum class ResponseFormat { Generic, AzureRead };

struct ProviderConfig {
  std::string provider_id;
  ProviderKind kind = ProviderKind::Replay;
  std::filesystem::path fixture_dir;  ///< replay only
  std::string endpoint;               ///< remote only, e.g. https://host/vision/read
  std::string credentials_env;        ///< name of the environment variable holding the key
  std::string auth_header = "Authorization";
  std::string auth_scheme = "Bearer";  ///< prefix for the header value; empty for raw keys
  ResponseFormat format = ResponseFormat::Generic;
  double timeout_s = 30.0;
  int retry_limit = 3;
  double backoff_base_s = 1.0;  ///< delay before retry k is base * 2^k
  int max_concurrency = 4;

  void validate() const;
};

ProviderConfig provider_config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ProviderConfig& config);

class OcrProvider {
 public:
  virtual ~OcrProvider() = default;
  /// Returns lines in reading order with provider_id stamped. Line text is
  /// passed through untouched.
  virtual OcrDocument recognize(const ImageInput& image) = 0;
  virtual const std::string& id() const noexcept = 0;
};

/// Serves OcrDocuments previously written by record_fixture, keyed by
/// `<fixture_dir>/<image.name>.json`.
class ReplayProvider final : public OcrProvider {
 public:
  ReplayProvider(std::string provider_id, std::filesystem::path fixture_dir);
  OcrDocument recognize(const ImageInput& image) override;
  const std::string& id() const noexcept override { return id_; }

 private:
  std::string id_;
  std::filesystem::path dir_;
};

class RemoteProvider final : public OcrProvider {
 public:
  explicit RemoteProvider(ProviderConfig config);
  OcrDocument recognize(const ImageInput& image) override;
  const std::string& id() const noexcept override { return config_.provider_id; }

 private:
  ProviderConfig config_;
  std::counting_semaphore<1024> slots_;
};

std::shared_ptr<OcrProvider> make_provider(const ProviderConfig& config);

/// Maps a provider response body to an OcrDocument (not yet reordered).
OcrDocument parse_provider_response(const std::string& body, ResponseFormat format,
                                    const std::string& provider_id);

/// Writes the canonical document JSON. Throws IoError if unwritable.
void record_fixture(const OcrDocument& doc, const std::filesystem::path& path);

/// Throws IoError when missing and InvalidFixture when malformed.
OcrDocument load_fixture(const std::filesystem::path& path);

}  // namespace hwocr
