#include "hwocr/pipeline.hpp"

#include <chrono>
#include <fstream>

#include "hwocr/error.hpp"
#include "hwocr/indent_absolute.hpp"

namespace hwocr {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(IndentKind kind) noexcept {
  switch (kind) {
    case IndentKind::None: return "none";
    case IndentKind::Absolute: return "absolute";
    case IndentKind::Relative: return "relative";
  }
  return "none";
}

void PipelineConfig::validate() const {
  if (config_id.empty()) throw Error(ErrorCode::InvalidConfig, "config_id is required");
  const bool multimodal = correction.kind == StrategyKind::MultimodalEndToEnd;
  if (!multimodal && !ocr) throw Error(ErrorCode::InvalidConfig, config_id + ": an OCR stage is required");
  if (ocr) ocr->validate();
  if (correction.kind != StrategyKind::None && !chat) {
    throw Error(ErrorCode::InvalidConfig, config_id + ": correction strategy needs a chat client");
  }
  if (indent == IndentKind::Relative && !gmm.valid()) {
    throw Error(ErrorCode::InvalidConfig, config_id + ": invalid GMM parameters");
  }
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path = p;
  return path.is_absolute() ? path : base / path;
}

PipelineConfig parse_one(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    c.config_id = j.at("config_id").get<std::string>();
    if (j.contains("ocr") && !j.at("ocr").is_null()) c.ocr = provider_config_from_json(j.at("ocr"), base_dir);

    const json indent = j.value("indent", json::object());
    const auto indent_kind = indent.value("kind", std::string("none"));
    if (indent_kind == "none") {
      c.indent = IndentKind::None;
    } else if (indent_kind == "absolute") {
      c.indent = IndentKind::Absolute;
    } else if (indent_kind == "relative") {
      c.indent = IndentKind::Relative;
      if (indent.contains("gmm")) c.gmm = gmm_params_from_json(indent.at("gmm"));
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown indent kind '" + indent_kind + "'");
    }

    const json correction = j.value("correction", json::object());
    const auto kind_name = correction.value("kind", std::string("none"));
    auto kind = parse_strategy_kind(kind_name);
    if (!kind) throw Error(ErrorCode::InvalidConfig, "unknown correction kind '" + kind_name + "'");
    c.correction.kind = *kind;
    c.correction.model_id = correction.value("model_id", std::string());
    c.correction.temperature = correction.value("temperature", 0.0);

    if (j.contains("chat") && !j.at("chat").is_null()) {
      const auto& jc = j.at("chat");
      ChatClientConfig chat;
      const auto chat_kind = jc.value("kind", std::string("mock"));
      if (chat_kind == "mock") {
        chat.kind = ChatClientConfig::Kind::Mock;
        chat.script = resolve(base_dir, jc.at("script").get<std::string>());
      } else if (chat_kind == "http") {
        chat.kind = ChatClientConfig::Kind::Http;
        chat.endpoint = jc.at("endpoint").get<std::string>();
        chat.credentials_env = jc.value("credentials_env", std::string());
        chat.image_models = jc.value("image_models", std::vector<std::string>{});
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown chat kind '" + chat_kind + "'");
      }
      chat.max_in_flight = jc.value("max_in_flight", chat.max_in_flight);
      c.chat = std::move(chat);
    }
    if (j.contains("templates_dir")) c.templates_dir = resolve(base_dir, j.at("templates_dir").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace

std::vector<PipelineConfig> parse_pipeline_configs(const json& j, const fs::path& base_dir) {
  std::vector<PipelineConfig> configs;
  if (j.is_object() && j.contains("configs")) {
    for (const auto& jc : j.at("configs")) configs.push_back(parse_one(jc, base_dir));
  } else if (j.is_object()) {
    configs.push_back(parse_one(j, base_dir));
  } else {
    throw Error(ErrorCode::InvalidConfig, "config file must hold an object");
  }
  for (std::size_t a = 0; a < configs.size(); ++a) {
    for (std::size_t b = a + 1; b < configs.size(); ++b) {
      if (configs[a].config_id == configs[b].config_id) {
        throw Error(ErrorCode::InvalidConfig, "duplicate config_id '" + configs[a].config_id + "'");
      }
    }
  }
  return configs;
}

std::vector<PipelineConfig> load_pipeline_configs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config " + path.string());
  try {
    return parse_pipeline_configs(json::parse(in), path.parent_path());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

json to_json(const PipelineConfig& c) {
  json j{{"config_id", c.config_id},
         {"indent", {{"kind", to_string(c.indent)}}},
         {"correction",
          {{"kind", to_string(c.correction.kind)},
           {"model_id", c.correction.model_id},
           {"temperature", c.correction.temperature}}}};
  if (c.indent == IndentKind::Relative) j["indent"]["gmm"] = to_json(c.gmm);
  j["ocr"] = c.ocr ? to_json(*c.ocr) : json(nullptr);
  return j;
}

std::shared_ptr<ChatClient> make_chat_client(const ChatClientConfig& config) {
  if (config.kind == ChatClientConfig::Kind::Mock) return MockChatClient::from_file(config.script);
  return std::make_shared<HttpChatClient>(HttpChatClient::Options{
      config.endpoint, config.credentials_env, config.image_models, 120.0, config.max_in_flight});
}

Pipeline::Pipeline(PipelineConfig config)
    : Pipeline(config, config.ocr ? make_provider(*config.ocr) : nullptr,
               config.chat ? make_chat_client(*config.chat) : nullptr) {}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<OcrProvider> provider, std::shared_ptr<ChatClient> chat)
    : config_(std::move(config)), provider_(std::move(provider)), chat_(std::move(chat)) {
  if (chat_) {
    templates_ = config_.templates_dir ? PromptTemplates::load(*config_.templates_dir)
                                       : PromptTemplates::load_default();
  }
}

IndentedProgram Pipeline::indent(const OcrDocument& doc) const {
  if (doc.lines.empty()) return {};
  const auto ordered = normalize_reading_order(doc);
  switch (config_.indent) {
    case IndentKind::None: return flat_program(ordered);
    case IndentKind::Absolute: return absolute_indent(ordered);
    case IndentKind::Relative: return relative_indent(ordered, config_.gmm);
  }
  return flat_program(ordered);
}

CorrectionOutput Pipeline::correct(const IndentedProgram& program, const ImageInput& image,
                                   const CorrectionStrategy& strategy) const {
  if (strategy.kind == StrategyKind::None) {
    CorrectionOutput out;
    out.code = render_program(program);
    return out;
  }
  if (!chat_) throw Error(ErrorCode::InvalidConfig, config_.config_id + ": no chat client configured");
  if (strategy.kind == StrategyKind::MultimodalEndToEnd) {
    return run_multimodal(ImageAttachment{image.bytes, image.media_type, image.name}, *chat_, strategy,
                          templates_);
  }
  const auto code = render_program(program);
  if (code.empty()) {
    // Nothing was recognized; there is nothing for the model to correct.
    return CorrectionOutput{};
  }
  if (strategy.kind == StrategyKind::Simple) return run_simple_correction(code, *chat_, strategy, templates_);
  return run_cot_correction(code, *chat_, strategy, templates_);
}

PipelineResult Pipeline::run(const ImageInput& image, const StageCallback& on_stage) const {
  using Clock = std::chrono::steady_clock;
  PipelineResult result;
  result.config_id = config_.config_id;
  auto timed = [&](const char* name, auto&& body) {
    const auto start = Clock::now();
    body();
    result.stage_timings.push_back({name, Clock::now() - start});
  };

  if (config_.correction.kind != StrategyKind::MultimodalEndToEnd) {
    if (on_stage) on_stage(Stage::Ocr, result);
    timed("ocr", [&] { result.raw_ocr = provider_->recognize(image); });
    if (on_stage) on_stage(Stage::Indent, result);
    timed("indent", [&] { result.indented = indent(result.raw_ocr); });
  } else {
    result.raw_ocr.provider_id = "none";
  }
  if (on_stage) on_stage(Stage::Correct, result);
  timed("correct", [&] {
    auto corrected = correct(result.indented, image, config_.correction);
    result.corrected_code = std::move(corrected.code);
    result.warnings = std::move(corrected.warnings);
  });
  return result;
}

}  // namespace hwocr
