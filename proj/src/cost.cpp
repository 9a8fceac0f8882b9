#include "hwocr/cost.hpp"

#include <fstream>

#include "hwocr/error.hpp"

namespace hwocr {

using nlohmann::json;

void CostModel::validate() const {
  if (ocr_price_per_image < 0 || input_token_price < 0 || output_token_price < 0 || image_price < 0) {
    throw Error(ErrorCode::InvalidArgument, "prices must be non-negative");
  }
  if (!(chars_per_token > 0)) throw Error(ErrorCode::InvalidArgument, "chars_per_token must be positive");
}

CostEstimate estimate_cost(const CostModel& model, const CharacterCounts& counts, bool multimodal) {
  model.validate();
  if (counts.code_chars < 0 || counts.instruction_chars < 0 || counts.output_chars < 0) {
    throw Error(ErrorCode::InvalidArgument, "character counts must be non-negative");
  }
  CostEstimate e;
  const double input_chars = multimodal ? counts.instruction_chars : counts.code_chars + counts.instruction_chars;
  e.input_tokens = input_chars / model.chars_per_token;
  e.output_tokens = counts.output_chars / model.chars_per_token;
  e.token_cost = (e.input_tokens * model.input_token_price + e.output_tokens * model.output_token_price) / 1000.0;
  e.fixed_cost = multimodal ? model.image_price : model.ocr_price_per_image;
  e.total = e.fixed_cost + e.token_cost;
  return e;
}

CostModel cost_model_from_json(const json& j) {
  CostModel m;
  try {
    m.ocr_price_per_image = j.value("ocr_price_per_image", 0.0);
    m.input_token_price = j.value("input_token_price", 0.0);
    m.output_token_price = j.value("output_token_price", 0.0);
    m.image_price = j.value("image_price", 0.0);
    m.chars_per_token = j.value("chars_per_token", 4.0);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("cost model: ") + e.what());
  }
  m.validate();
  return m;
}

CostModel load_cost_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open cost model " + path.string());
  try {
    return cost_model_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

json to_json(const CostEstimate& e) {
  return json{{"input_tokens", e.input_tokens},
              {"output_tokens", e.output_tokens},
              {"token_cost", e.token_cost},
              {"fixed_cost", e.fixed_cost},
              {"total", e.total}};
}

}  // namespace hwocr
