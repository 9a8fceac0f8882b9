#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hwocr/codemodel.hpp"
#include "hwocr/indent_relative.hpp"
#include "hwocr/ocr_adapters.hpp"
#include "hwocr/postcorrect.hpp"
#include "json.hpp"

namespace hwocr {

enum class IndentKind { None, Absolute, Relative };

std::string_view to_string(IndentKind kind) noexcept;

struct ChatClientConfig {
  enum class Kind { Mock, Http };
  Kind kind = Kind::Mock;
  std::filesystem::path script;  ///< mock
  std::string endpoint;          ///< http
  std::string credentials_env;   ///< http
  std::vector<std::string> image_models;
  int max_in_flight = 2;
};

/// One row of an evaluation: exactly one choice per stage. The OCR stage is
/// optional only for the multimodal strategy, which reads the image itself.
struct PipelineConfig {
  std::string config_id;
  std::optional<ProviderConfig> ocr;
  IndentKind indent = IndentKind::None;
  GmmParams gmm;
  CorrectionStrategy correction;
  std::optional<ChatClientConfig> chat;
  std::optional<std::filesystem::path> templates_dir;

  void validate() const;
};

/// Config file schema:
///
///   {"configs": [{"config_id": "replay+relative+simple",
///                 "ocr": {<provider config>},
///                 "indent": {"kind": "relative", "gmm": {...}},
///                 "correction": {"kind": "simple", "model_id": "gpt-4", "temperature": 0},
///                 "chat": {"kind": "mock", "script": "mocks/echo.json"},
///                 "templates_dir": "templates/v1"}]}
///
/// A single config object is accepted as well. Relative paths resolve
/// against the file's directory.
std::vector<PipelineConfig> load_pipeline_configs(const std::filesystem::path& path);
std::vector<PipelineConfig> parse_pipeline_configs(const nlohmann::json& j,
                                                   const std::filesystem::path& base_dir);
nlohmann::json to_json(const PipelineConfig& config);

enum class Stage { Ocr, Indent, Correct };

/// A configured, reusable pipeline. Thread-safe: the provider and chat
/// client are shared handles and every run keeps its state local.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);
  Pipeline(PipelineConfig config, std::shared_ptr<OcrProvider> provider, std::shared_ptr<ChatClient> chat);

  using StageCallback = std::function<void(Stage, const PipelineResult&)>;

  /// OCR, indentation and correction; `on_stage` fires before each stage
  /// with the result accumulated so far.
  PipelineResult run(const ImageInput& image, const StageCallback& on_stage = {}) const;

  IndentedProgram indent(const OcrDocument& doc) const;

  /// Re-runs a correction strategy on an already indented program (or on
  /// the image, for the multimodal strategy).
  CorrectionOutput correct(const IndentedProgram& program, const ImageInput& image,
                           const CorrectionStrategy& strategy) const;

  const PipelineConfig& config() const noexcept { return config_; }

 private:
  PipelineConfig config_;
  std::shared_ptr<OcrProvider> provider_;
  std::shared_ptr<ChatClient> chat_;
  PromptTemplates templates_;
};

std::shared_ptr<ChatClient> make_chat_client(const ChatClientConfig& config);

}  // namespace hwocr
