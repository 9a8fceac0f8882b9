#include "hwocr/postcorrect.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "http_util.hpp"
#include "httplib.h"
#include "hwocr/error.hpp"

namespace hwocr {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ChatRole role) noexcept {
  switch (role) {
    case ChatRole::System: return "system";
    case ChatRole::User: return "user";
    case ChatRole::Assistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::None: return "none";
    case StrategyKind::Simple: return "simple";
    case StrategyKind::ChainOfThought: return "cot";
    case StrategyKind::MultimodalEndToEnd: return "multimodal";
  }
  return "none";
}

std::optional<StrategyKind> parse_strategy_kind(std::string_view name) {
  if (name == "none") return StrategyKind::None;
  if (name == "simple") return StrategyKind::Simple;
  if (name == "cot" || name == "chain_of_thought") return StrategyKind::ChainOfThought;
  if (name == "multimodal") return StrategyKind::MultimodalEndToEnd;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Clients

ChatClient::ChatClient(int max_in_flight) : in_flight_(std::clamp(max_in_flight, 1, 1024)) {}

std::string ChatClient::complete(const std::vector<ChatTurn>& turns, const CorrectionStrategy& strategy) {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};
  return do_complete(turns, strategy);
}

std::shared_ptr<MockChatClient> MockChatClient::echo(bool image_capable,
                                                     std::vector<Substitution> substitutions) {
  std::shared_ptr<MockChatClient> client(new MockChatClient());
  client->echo_mode_ = true;
  client->image_capable_ = image_capable;
  client->substitutions_ = std::move(substitutions);
  return client;
}

std::shared_ptr<MockChatClient> MockChatClient::scripted(std::vector<Reply> replies, bool image_capable) {
  std::shared_ptr<MockChatClient> client(new MockChatClient());
  client->echo_mode_ = false;
  client->image_capable_ = image_capable;
  client->replies_ = std::move(replies);
  return client;
}

std::shared_ptr<MockChatClient> MockChatClient::from_json(const json& j) {
  try {
    const auto mode = j.value("mode", std::string("echo"));
    const bool image_capable = j.value("image_capable", false);
    if (mode == "echo") {
      std::vector<Substitution> subs;
      for (const auto& s : j.value("substitutions", json::array())) {
        subs.push_back({s.at("from").get<std::string>(), s.at("to").get<std::string>()});
      }
      return echo(image_capable, std::move(subs));
    }
    if (mode == "script") {
      std::vector<Reply> replies;
      for (const auto& r : j.at("replies")) {
        if (r.is_string()) {
          replies.push_back({r.get<std::string>(), std::nullopt});
        } else {
          replies.push_back({"", r.at("error").get<std::string>()});
        }
      }
      return scripted(std::move(replies), image_capable);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown mock mode '" + mode + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("mock script: ") + e.what());
  }
}

std::shared_ptr<MockChatClient> MockChatClient::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read mock script " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

bool MockChatClient::image_capable(std::string_view) const { return image_capable_; }

std::string MockChatClient::do_complete(const std::vector<ChatTurn>& turns, const CorrectionStrategy&) {
  calls_.fetch_add(1);
  const auto assistant_turns = static_cast<std::size_t>(
      std::count_if(turns.begin(), turns.end(), [](const ChatTurn& t) { return t.role == ChatRole::Assistant; }));

  if (!echo_mode_) {
    if (assistant_turns >= replies_.size()) {
      throw Error(ErrorCode::ProviderUnavailable,
                  "mock script has no reply for turn " + std::to_string(assistant_turns));
    }
    const auto& reply = replies_[assistant_turns];
    if (reply.error) throw Error(ErrorCode::ProviderUnavailable, *reply.error);
    return reply.text;
  }

  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->role == ChatRole::Assistant) return it->text;
    if (it->role == ChatRole::User && it->payload) {
      std::string code = *it->payload;
      for (const auto& sub : substitutions_) {
        if (sub.from.empty()) continue;
        for (auto pos = code.find(sub.from); pos != std::string::npos;
             pos = code.find(sub.from, pos + sub.to.size())) {
          code.replace(pos, sub.from.size(), sub.to);
        }
      }
      return "```python\n" + code + "\n```";
    }
  }
  return "```python\n```";
}

HttpChatClient::HttpChatClient(Options options)
    : ChatClient(options.max_in_flight), options_(std::move(options)) {
  if (options_.endpoint.empty()) throw Error(ErrorCode::InvalidConfig, "chat endpoint is required");
}

bool HttpChatClient::image_capable(std::string_view model_id) const {
  return std::find(options_.image_models.begin(), options_.image_models.end(), model_id) !=
         options_.image_models.end();
}

std::string HttpChatClient::do_complete(const std::vector<ChatTurn>& turns, const CorrectionStrategy& strategy) {
  json messages = json::array();
  for (const auto& turn : turns) {
    json message{{"role", to_string(turn.role)}};
    if (turn.image) {
      const std::string url =
          "data:" + turn.image->media_type + ";base64," + httplib::detail::base64_encode(turn.image->bytes);
      message["content"] = json::array({json{{"type", "text"}, {"text", turn.text}},
                                        json{{"type", "image_url"}, {"image_url", {{"url", url}}}}});
    } else {
      message["content"] = turn.text;
    }
    messages.push_back(std::move(message));
  }
  const json body{{"model", strategy.model_id}, {"temperature", strategy.temperature}, {"messages", messages}};

  const auto url = detail::split_url(options_.endpoint);
  httplib::Client client(url.origin);
  const auto timeout =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(options_.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  httplib::Headers headers;
  if (auto key = detail::read_secret(options_.credentials_env); !key.empty()) {
    headers.emplace("Authorization", "Bearer " + key);
  }
  auto response = client.Post(url.path, headers, body.dump(), "application/json");
  if (!response) {
    throw Error(ErrorCode::ProviderUnavailable, "chat transport error: " + httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw Error(ErrorCode::ProviderUnavailable, "chat endpoint returned HTTP " + std::to_string(response->status));
  }
  try {
    return json::parse(response->body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderProtocolError, std::string("chat response: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Templates

namespace {

std::string read_template(const fs::path& dir, const char* name) {
  const auto path = dir / name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "missing prompt template " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) {
    ++count;
  }
  return count;
}

}  // namespace

PromptTemplates PromptTemplates::load(const fs::path& dir) {
  PromptTemplates t;
  t.simple_system = read_template(dir, "simple_system.txt");
  t.simple_user = read_template(dir, "simple_user.txt");
  t.cot_system = read_template(dir, "cot_system.txt");
  t.cot_step1 = read_template(dir, "cot_step1.txt");
  t.cot_step2 = read_template(dir, "cot_step2.txt");
  t.cot_step3 = read_template(dir, "cot_step3.txt");
  t.multimodal_user = read_template(dir, "multimodal_user.txt");
  for (const auto* payload_template : {&t.simple_user, &t.cot_step1}) {
    if (count_occurrences(*payload_template, kCodePlaceholder) != 1) {
      throw Error(ErrorCode::InvalidConfig, "payload template in " + dir.string() +
                                                " must contain exactly one " + std::string(kCodePlaceholder));
    }
  }
  return t;
}

PromptTemplates PromptTemplates::load_default() {
  if (const char* dir = std::getenv("HWOCR_TEMPLATES"); dir && *dir) return load(dir);
  return load(HWOCR_DEFAULT_TEMPLATE_DIR);
}

std::string fill_template(std::string_view tmpl, std::string_view code) {
  const auto pos = tmpl.find(kCodePlaceholder);
  if (pos == std::string_view::npos) return std::string(tmpl);
  std::string out;
  out.reserve(tmpl.size() + code.size());
  out.append(tmpl.substr(0, pos));
  out.append(code);
  out.append(tmpl.substr(pos + kCodePlaceholder.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Code block extraction

namespace {

bool is_opening_fence(std::string_view line) {
  if (line.substr(0, 3) != "```") return false;
  auto rest = line.substr(3);
  while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t' || rest.back() == '\r')) rest.remove_suffix(1);
  return std::all_of(rest.begin(), rest.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '+' || c == '-' || c == '.' || c == '#';
  });
}

bool is_closing_fence(std::string_view line) {
  if (line.substr(0, 3) != "```") return false;
  auto rest = line.substr(3);
  return std::all_of(rest.begin(), rest.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

}  // namespace

ExtractedCode extract_code_block(std::string_view reply) {
  const auto lines = split_lines(reply);
  ExtractedCode result;
  bool inside = false;
  std::size_t first_open = 0;
  std::string first_block;
  bool have_first = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!inside && is_opening_fence(lines[i])) {
      inside = true;
      first_open = i;
    } else if (inside && is_closing_fence(lines[i])) {
      inside = false;
      ++result.block_count;
      if (!have_first) {
        for (std::size_t k = first_open + 1; k < i; ++k) {
          if (k > first_open + 1) first_block += '\n';
          first_block.append(lines[k]);
        }
        have_first = true;
      }
    }
  }
  if (!have_first) throw Error(ErrorCode::NoCodeBlock, "reply contains no complete fenced code block");
  result.code = std::move(first_block);
  return result;
}

// ---------------------------------------------------------------------------
// Strategies

std::vector<ChatTurn> build_simple_prompt(std::string_view code, const PromptTemplates& templates) {
  if (code.empty()) throw Error(ErrorCode::InvalidArgument, "code to correct must be non-empty");
  return {ChatTurn{ChatRole::System, templates.simple_system, std::nullopt, std::nullopt},
          ChatTurn{ChatRole::User, fill_template(templates.simple_user, code), std::nullopt, std::string(code)}};
}

namespace {

std::string ask(ChatClient& client, std::vector<ChatTurn>& transcript, const CorrectionStrategy& strategy,
                int step) {
  std::string reply;
  try {
    reply = client.complete(transcript, strategy);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::CorrectionFailed, "step " + std::to_string(step) + ": " + e.what());
  }
  transcript.push_back(ChatTurn{ChatRole::Assistant, reply, std::nullopt, std::nullopt});
  return reply;
}

CorrectionOutput finish(std::vector<ChatTurn> transcript, const std::string& reply) {
  CorrectionOutput out;
  auto extracted = extract_code_block(reply);
  if (extracted.block_count > 1) {
    out.warnings.push_back("reply contained " + std::to_string(extracted.block_count) +
                           " code blocks; using the first");
  }
  out.code = std::move(extracted.code);
  out.transcript = std::move(transcript);
  return out;
}

}  // namespace

CorrectionOutput run_simple_correction(std::string_view code, ChatClient& client,
                                       const CorrectionStrategy& strategy, const PromptTemplates& templates) {
  auto transcript = build_simple_prompt(code, templates);
  auto reply = ask(client, transcript, strategy, 1);
  return finish(std::move(transcript), reply);
}

CorrectionOutput run_cot_correction(std::string_view code, ChatClient& client,
                                    const CorrectionStrategy& strategy, const PromptTemplates& templates) {
  if (code.empty()) throw Error(ErrorCode::InvalidArgument, "code to correct must be non-empty");
  std::vector<ChatTurn> transcript{
      ChatTurn{ChatRole::System, templates.cot_system, std::nullopt, std::nullopt},
      ChatTurn{ChatRole::User, fill_template(templates.cot_step1, code), std::nullopt, std::string(code)}};
  ask(client, transcript, strategy, 1);
  transcript.push_back(ChatTurn{ChatRole::User, templates.cot_step2, std::nullopt, std::nullopt});
  ask(client, transcript, strategy, 2);
  transcript.push_back(ChatTurn{ChatRole::User, templates.cot_step3, std::nullopt, std::nullopt});
  auto reply = ask(client, transcript, strategy, 3);
  return finish(std::move(transcript), reply);
}

CorrectionOutput run_multimodal(const ImageAttachment& image, ChatClient& client,
                                const CorrectionStrategy& strategy, const PromptTemplates& templates) {
  if (image.bytes.empty()) throw Error(ErrorCode::InvalidArgument, "image must be non-empty");
  if (!client.image_capable(strategy.model_id)) {
    throw Error(ErrorCode::InvalidArgument, "model '" + strategy.model_id + "' cannot read images");
  }
  std::vector<ChatTurn> transcript{ChatTurn{ChatRole::User, templates.multimodal_user, image, std::nullopt}};
  auto reply = ask(client, transcript, strategy, 1);
  return finish(std::move(transcript), reply);
}

json to_json(const ChatTurn& turn) {
  json j{{"role", to_string(turn.role)}, {"text", turn.text}};
  if (turn.image) j["image"] = {{"media_type", turn.image->media_type}, {"bytes", turn.image->bytes.size()}};
  return j;
}

}  // namespace hwocr
