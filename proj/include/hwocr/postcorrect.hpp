#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hwocr {

enum class ChatRole { System, User, Assistant };

std::string_view to_string(ChatRole role) noexcept;

struct ImageAttachment {
  std::string bytes;
  std::string media_type;
  std::string name;

  bool operator==(const ImageAttachment&) const = default;
};

struct ChatTurn {
  ChatRole role = ChatRole::User;
  std::string text;
  std::optional<ImageAttachment> image;  ///< user turns only
  /// The code substituted into the template, when there is one. Kept so
  /// transcripts can be audited and mocks can echo the input.
  std::optional<std::string> payload;

  bool operator==(const ChatTurn&) const = default;
};

enum class StrategyKind { None, Simple, ChainOfThought, MultimodalEndToEnd };

std::string_view to_string(StrategyKind kind) noexcept;
/// Accepts "none", "simple", "cot"/"chain_of_thought", "multimodal".
std::optional<StrategyKind> parse_strategy_kind(std::string_view name);

struct CorrectionStrategy {
  StrategyKind kind = StrategyKind::None;
  std::string model_id;
  double temperature = 0.0;
};

/// Chat-completion backend. Calls are throttled to `max_in_flight`
/// concurrent requests per client.
class ChatClient {
 public:
  explicit ChatClient(int max_in_flight = 2);
  virtual ~ChatClient() = default;
  ChatClient(const ChatClient&) = delete;
  ChatClient& operator=(const ChatClient&) = delete;

  std::string complete(const std::vector<ChatTurn>& turns, const CorrectionStrategy& strategy);
  virtual bool image_capable(std::string_view model_id) const = 0;

 protected:
  virtual std::string do_complete(const std::vector<ChatTurn>& turns,
                                  const CorrectionStrategy& strategy) = 0;

 private:
  std::counting_semaphore<1024> in_flight_;
};

/// Deterministic client driven by a script file:
///
///   {"model_id": "...", "image_capable": false, "mode": "echo" | "script",
///    "replies": ["turn 0 reply", {"error": "boom"}, ...],
///    "substitutions": [{"from": "pnint", "to": "print"}]}
///
/// Script mode answers with replies[k] where k is the number of assistant
/// turns already in the conversation. Echo mode repeats the last assistant
/// reply, or else fences the latest payload after applying substitutions in
/// order. Image turns without a payload echo an empty block.
class MockChatClient final : public ChatClient {
 public:
  struct Substitution {
    std::string from;
    std::string to;
  };
  struct Reply {
    std::string text;
    std::optional<std::string> error;
  };

  static std::shared_ptr<MockChatClient> echo(bool image_capable = false,
                                              std::vector<Substitution> substitutions = {});
  static std::shared_ptr<MockChatClient> scripted(std::vector<Reply> replies, bool image_capable = false);
  static std::shared_ptr<MockChatClient> from_json(const nlohmann::json& j);
  static std::shared_ptr<MockChatClient> from_file(const std::filesystem::path& path);

  bool image_capable(std::string_view model_id) const override;
  std::size_t calls() const noexcept { return calls_.load(); }

 protected:
  std::string do_complete(const std::vector<ChatTurn>& turns, const CorrectionStrategy& strategy) override;

 private:
  MockChatClient() = default;

  bool echo_mode_ = true;
  bool image_capable_ = false;
  std::vector<Reply> replies_;
  std::vector<Substitution> substitutions_;
  std::atomic<std::size_t> calls_{0};
};

/// OpenAI-style chat completions over HTTP(S). The key is read from the
/// named environment variable at call time.
class HttpChatClient final : public ChatClient {
 public:
  struct Options {
    std::string endpoint;  ///< full URL of the chat completions route
    std::string credentials_env;
    std::vector<std::string> image_models;
    double timeout_s = 120.0;
    int max_in_flight = 2;
  };

  explicit HttpChatClient(Options options);
  bool image_capable(std::string_view model_id) const override;

 protected:
  std::string do_complete(const std::vector<ChatTurn>& turns, const CorrectionStrategy& strategy) override;

 private:
  Options options_;
};

/// Prompt texts loaded from a template directory. Payload-bearing templates
/// carry exactly one `{{CODE}}` token. One trailing newline per file is
/// dropped.
struct PromptTemplates {
  std::string simple_system;
  std::string simple_user;
  std::string cot_system;
  std::string cot_step1;
  std::string cot_step2;
  std::string cot_step3;
  std::string multimodal_user;

  static PromptTemplates load(const std::filesystem::path& dir);
  /// HWOCR_TEMPLATES if set, else the directory shipped with the sources.
  static PromptTemplates load_default();
};

inline constexpr std::string_view kCodePlaceholder = "{{CODE}}";

std::string fill_template(std::string_view tmpl, std::string_view code);

struct ExtractedCode {
  std::string code;
  std::size_t block_count = 0;
};

/// First ``` fenced block (opening fence may carry a language word). Throws
/// NoCodeBlock if there is no complete block.
ExtractedCode extract_code_block(std::string_view reply);

struct CorrectionOutput {
  std::string code;
  std::vector<ChatTurn> transcript;  ///< including the final assistant reply
  std::vector<std::string> warnings;
};

std::vector<ChatTurn> build_simple_prompt(std::string_view code, const PromptTemplates& templates);

CorrectionOutput run_simple_correction(std::string_view code, ChatClient& client,
                                       const CorrectionStrategy& strategy, const PromptTemplates& templates);

/// Three fixed exchanges: spelling-only correction, undo logic fixes,
/// restore indentation. Each step sees every earlier reply.
CorrectionOutput run_cot_correction(std::string_view code, ChatClient& client,
                                    const CorrectionStrategy& strategy, const PromptTemplates& templates);

CorrectionOutput run_multimodal(const ImageAttachment& image, ChatClient& client,
                                const CorrectionStrategy& strategy, const PromptTemplates& templates);

nlohmann::json to_json(const ChatTurn& turn);

}  // namespace hwocr
