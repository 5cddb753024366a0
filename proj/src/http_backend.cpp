#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "drugmcts/backend.hpp"
#include "drugmcts/error.hpp"

namespace drugmcts {

namespace {

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(HttpSettings settings) : settings_(std::move(settings)) {
  if (const char* key = std::getenv(settings_.api_key_env.c_str())) api_key_ = key;

  const auto& url = settings_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
}

nlohmann::json HttpBackend::request_body(const SamplingRequest& request, int n) const {
  nlohmann::json body;
  body["model"] = settings_.model;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  body["temperature"] = request.temperature;
  body["n"] = n;
  if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
  return body;
}

SamplingResponse HttpBackend::sample(const SamplingRequest& request) {
  if (request.n < 1) throw BackendError("sampling request needs n >= 1");

  httplib::Client client(host_);
  const auto timeout = std::chrono::duration<double>(settings_.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  SamplingResponse out;
  // Servers may return fewer choices than asked; top up with further calls.
  // `attempts` counts consecutive calls that made no progress.
  int attempts = 0;
  double backoff = settings_.backoff_initial_s;
  std::string last_error;
  while (static_cast<int>(out.texts.size()) < request.n) {
    if (attempts >= settings_.max_retries) {
      throw BackendError("chat completion failed after " + std::to_string(attempts) +
                         " attempts: " + last_error);
    }
    if (attempts > 0 && backoff > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    ++attempts;

    const int want = request.n - static_cast<int>(out.texts.size());
    const auto body = request_body(request, want).dump();
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (retryable_status(res->status)) continue;
      throw BackendError("chat completion rejected: " + last_error + " " + res->body);
    }

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw BackendError(std::string("malformed server response: ") + e.what());
    }
    const auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array()) {
      throw BackendError("malformed server response: missing choices array");
    }
    const auto before = out.texts.size();
    for (const auto& c : *choices) {
      if (static_cast<int>(out.texts.size()) >= request.n) break;
      const auto* content = c.contains("message") ? &c["message"] : nullptr;
      if (!content || !content->contains("content") || !(*content)["content"].is_string()) {
        throw BackendError("malformed server response: choice without message.content");
      }
      out.texts.push_back((*content)["content"].get<std::string>());
    }
    if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
      out.prompt_tokens += usage->value("prompt_tokens", std::int64_t{0});
      out.completion_tokens += usage->value("completion_tokens", std::int64_t{0});
    }
    if (out.texts.size() > before) {
      attempts = 0;
      backoff = settings_.backoff_initial_s;
    } else {
      last_error = "server returned no choices";
    }
  }
  return out;
}

}  // namespace drugmcts
