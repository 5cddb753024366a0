#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drugmcts/config.hpp"

namespace drugmcts {

enum class Role { kSystem, kUser, kAssistant };
std::string to_string(Role r);

struct PromptMessage {
  Role role = Role::kUser;
  std::string content;
};

/// What shape of answer the caller expects. Never sent over the wire; the
/// mock backend uses it to synthesize plausible replies.
enum class AnswerKind { kFreeText, kSelectMany, kSelectOne, kYesNo };

struct AnswerHint {
  AnswerKind kind = AnswerKind::kFreeText;
  std::vector<std::string> options;
};

struct SamplingRequest {
  std::string template_id;
  std::vector<PromptMessage> messages;
  double temperature = 0.8;
  int n = 1;
  std::optional<int> max_tokens;
  /// Index of the first requested sample within the caller's sampling
  /// stream. Repeated questions use disjoint offsets so a pure backend can
  /// still return fresh samples.
  std::uint64_t sample_offset = 0;
  AnswerHint hint;
};

struct SamplingResponse {
  std::vector<std::string> texts;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total_tokens() const noexcept { return prompt_tokens + completion_tokens; }
};

/// Whitespace-delimited token count used where no server usage figures exist.
std::int64_t approx_tokens(const std::string& text);

/// Stable 64-bit FNV-1a digest of the role/content sequence.
std::uint64_t prompt_hash(const std::vector<PromptMessage>& messages);
std::string hex64(std::uint64_t v);

class Backend {
 public:
  virtual ~Backend() = default;
  /// Returns exactly request.n texts or throws BackendError. Implementations are thread-safe.
  virtual SamplingResponse sample(const SamplingRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Deterministic synthetic backend: the reply is a pure function of
/// (seed, request). Supplies ids drawn from the hint so the whole pipeline
/// can run offline.
class MockBackend final : public Backend {
 public:
  struct Options {
    std::uint64_t seed = 0;
    /// Upper bound on distinct answers per request; 0 means unbounded.
    int answer_variety = 0;
    /// Probability of an affirmative yes/no reply.
    double yes_probability = 0.6;
  };

  explicit MockBackend(Options options) : options_(options) {}
  explicit MockBackend(std::uint64_t seed) : options_{seed} {}

  SamplingResponse sample(const SamplingRequest& request) override;
  std::string name() const override { return "mock"; }

 private:
  std::string reply(const SamplingRequest& request, std::uint64_t base, std::uint64_t index) const;

  Options options_;
};

/// Replays canned replies in order. Replies are keyed by template id with
/// "*" as the fallback queue; each sample consumes one reply.
class ScriptedBackend final : public Backend {
 public:
  ScriptedBackend(std::map<std::string, std::vector<std::string>> replies, bool cycle = false);
  explicit ScriptedBackend(std::vector<std::string> replies, bool cycle = false);

  /// Accepts a JSON array of replies or {"cycle": bool, "replies": {template_id: [...]}}.
  static std::unique_ptr<ScriptedBackend> from_json(const nlohmann::json& j);
  static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  SamplingResponse sample(const SamplingRequest& request) override;
  std::string name() const override { return "scripted"; }

 private:
  struct Queue {
    std::vector<std::string> replies;
    std::size_t next = 0;
  };
  std::mutex mu_;
  std::map<std::string, Queue> queues_;
  bool cycle_;
};

/// OpenAI-compatible chat-completions client.
class HttpBackend final : public Backend {
 public:
  /// The bearer token is read from settings.api_key_env at construction.
  explicit HttpBackend(HttpSettings settings);

  SamplingResponse sample(const SamplingRequest& request) override;
  std::string name() const override { return "http"; }

  /// Wire body for one call; exposed for replay tests.
  nlohmann::json request_body(const SamplingRequest& request, int n) const;

 private:
  HttpSettings settings_;
  std::string api_key_;
  std::string host_;  // scheme://host[:port]
  std::string path_;  // .../chat/completions
};

}  // namespace drugmcts
