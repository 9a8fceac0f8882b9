#pragma once

#include <filesystem>

#include "json.hpp"

namespace hwocr {

/// Prices in dollars. Token prices are per 1000 tokens.
struct CostModel {
  double ocr_price_per_image = 0.0;
  double input_token_price = 0.0;
  double output_token_price = 0.0;
  double image_price = 0.0;
  double chars_per_token = 4.0;

  void validate() const;
};

struct CharacterCounts {
  double code_chars = 0.0;
  double instruction_chars = 0.0;
  double output_chars = 0.0;
};

struct CostEstimate {
  double input_tokens = 0.0;
  double output_tokens = 0.0;
  double token_cost = 0.0;  ///< language-model text cost
  double fixed_cost = 0.0;  ///< OCR call, or the image charge for multimodal
  double total = 0.0;
};

/// Per-image cost. The OCR pipeline pays the OCR price plus tokens for code
/// and instructions in, corrected code out; the multimodal path pays the
/// image price plus its own token terms (the code arrives as pixels).
CostEstimate estimate_cost(const CostModel& model, const CharacterCounts& counts, bool multimodal);

/// {"ocr_price_per_image", "input_token_price", "output_token_price",
///  "image_price", "chars_per_token"}; missing prices default to 0.
CostModel cost_model_from_json(const nlohmann::json& j);
CostModel load_cost_model(const std::filesystem::path& path);
nlohmann::json to_json(const CostEstimate& estimate);

}  // namespace hwocr
